fn main() {
    std::process::exit(netspill::cli::main_with_args(std::env::args_os()));
}
