//! Command-line front end: `estimate`, `simulate`, `graph-stats`, and
//! `communities`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use netspill_core::data::{Aggregator, Design};
use netspill_core::estimator::{Arm, EffectEstimate, EffectKind, EstimatorKind, WeightOptions};
use netspill_core::graph::{components, fast_greedy_communities, network_stats, ComponentPartition, Network};
use netspill_core::optim::OptimOptions;
use netspill_core::policy::AllocationPolicy;
use netspill_core::propensity::{fit_component_propensity, fit_ipw1, fit_ipw2, Ipw1Options, PropensityModel};
use netspill_core::simulate::PartitionChoice;
use netspill_core::variance::{analyze, effect_grid, Analysis};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::fixture;
use crate::io::{self, Prepared};
use crate::study::{self, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "netspill", version, about = "IPW estimation of spillover effects under nearest-neighbor interference")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit propensity models and report effect estimates with Wald intervals.
    Estimate(EstimateArgs),
    /// Run a Monte-Carlo study and report bias, ESE, ASE, and coverage.
    Simulate(SimulateArgs),
    /// Descriptive statistics of a network as JSON.
    GraphStats(GraphArgs),
    /// Fast-greedy communities as a JSON array of `{node, component}`.
    Communities(GraphArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Edge list CSV with columns `from,to`.
    #[arg(long)]
    pub edges: PathBuf,
    /// Node data CSV with columns `id,exposure,outcome,z1,...`.
    #[arg(long)]
    pub data: PathBuf,
    /// ipw1, ipw2, both, or component.
    #[arg(long, default_value = "both", value_delimiter = ',')]
    pub estimator: Vec<String>,
    /// Allocation strategies, comma separated, strictly inside (0, 1) and ascending.
    #[arg(long, default_value = "0.2,0.3,0.4,0.5", value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Subset of direct, indirect, total, overall.
    #[arg(long, default_value = "direct,indirect,total,overall", value_delimiter = ',')]
    pub effects: Vec<String>,
    /// Independent units for the variance: observed components or communities.
    #[arg(long, default_value = "observed")]
    pub partition: String,
    #[arg(long, default_value_t = 0.95)]
    pub ci_level: f64,
    /// Clip weights above this quantile instead of failing on tiny propensities.
    #[arg(long)]
    pub truncate: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full-precision JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
    /// Write θ̂ and its sandwich covariance as JSON to this path.
    #[arg(long)]
    pub dump_sigma: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON; flags given on the command line override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// main, no-ranef, shifted-exposure, stratified-violation, trip-like,
    /// trip-like-covariates, or regen-network.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub components: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Base seed; drawn from the OS when absent and echoed in the report.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub estimator: Option<Vec<String>>,
    #[arg(long)]
    pub partition: Option<String>,
    #[arg(long)]
    pub ci_level: Option<f64>,
    /// Network for the trip-like scenarios (defaults to the bundled fixture).
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output prefix: writes `<out>.csv` and `<out>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary on stdout instead of CSV (without `--out`).
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long)]
    pub edges: PathBuf,
    /// Optional data file; ids absent from the edge list count as isolates.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn sink(out: Option<&Path>, stdout: &mut dyn Write, write: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush().map_err(|e| CliError::io(path, e))
        }
        None => write(stdout),
    }
}

fn write_json<T: Serialize>(w: &mut dyn Write, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| CliError::runtime("IO_ERROR", e.to_string()))?;
    writeln!(w).map_err(|e| CliError::runtime("IO_ERROR", e.to_string()))
}

/// Validated allocation grid: strictly inside (0, 1), strictly ascending.
pub fn parse_alphas(alphas: &[f64]) -> CliResult<Vec<AllocationPolicy>> {
    if alphas.is_empty() {
        return Err(CliError::validation("INVALID_ALPHA", "alpha grid is empty"));
    }
    if alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::validation(
            "INVALID_ALPHA",
            format!("alpha grid {alphas:?} must be strictly ascending"),
        ));
    }
    Ok(alphas.iter().map(|&a| AllocationPolicy::new(a)).collect::<Result<_, _>>()?)
}

fn parse_effects(names: &[String]) -> CliResult<Vec<EffectKind>> {
    names
        .iter()
        .map(|n| {
            EffectKind::parse(n).ok_or_else(|| CliError::validation("INVALID_EFFECT", format!("unknown effect `{n}`")))
        })
        .collect()
}

fn parse_partition(name: &str) -> CliResult<PartitionChoice> {
    PartitionChoice::parse(name)
        .ok_or_else(|| CliError::validation("INVALID_PARTITION", format!("unknown partition `{name}`")))
}

fn check_level(level: f64) -> CliResult<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(CliError::validation("INVALID_CI_LEVEL", format!("ci level {level} outside (0, 1)")))
    }
}

/// Everything `estimate` computes for one estimator.
pub struct EstimatorRun {
    pub kind: EstimatorKind,
    pub analysis: Analysis,
}

/// Options for [`estimate`].
pub struct EstimateRequest {
    pub estimators: Vec<EstimatorKind>,
    pub alphas: Vec<AllocationPolicy>,
    pub effects: Vec<EffectKind>,
    pub partition: PartitionChoice,
    pub ci_level: f64,
    pub weights: WeightOptions,
}

fn run_one<M: PropensityModel>(
    kind: EstimatorKind,
    model: &M,
    design: &Design,
    partition: &ComponentPartition,
    req: &EstimateRequest,
) -> CliResult<EstimatorRun> {
    let requests = effect_grid(req.alphas.len(), &req.effects);
    let analysis = analyze(kind, model, design, partition, &req.alphas, &requests, req.ci_level, &req.weights)?;
    Ok(EstimatorRun { kind, analysis })
}

/// Fits each requested estimator and analyzes it on the chosen partition.
/// The component baseline always uses observed components.
pub fn estimate(prepared: &Prepared, req: &EstimateRequest) -> CliResult<Vec<EstimatorRun>> {
    let net = &prepared.network;
    let design = Design::new(net, &prepared.data, Aggregator::Mean)?;
    let observed = components(net);
    let inference = req.partition.apply(net);
    req.estimators
        .par_iter()
        .map(|&kind| match kind {
            EstimatorKind::Ipw1 => run_one(kind, &fit_ipw1(&design, &Ipw1Options::default())?, &design, &inference, req),
            EstimatorKind::Ipw2 => run_one(
                kind,
                &fit_ipw2(&design, Aggregator::Mean, OptimOptions::default())?,
                &design,
                &inference,
                req,
            ),
            EstimatorKind::Component => run_one(
                kind,
                &fit_component_propensity(&design, &observed, &Ipw1Options::default())?,
                &design,
                &observed,
                req,
            ),
        })
        .collect()
}

fn arm_name(arm: Arm) -> &'static str {
    study::arm_label(arm)
}

#[derive(Serialize)]
struct SigmaDump {
    labels: Vec<String>,
    theta: Vec<f64>,
    sigma: Vec<Vec<f64>>,
    components: usize,
}

fn sigma_dump(run: &EstimatorRun) -> SigmaDump {
    let theta = &run.analysis.theta;
    let mut labels: Vec<String> = (0..theta.nuisance.len()).map(|k| format!("nuisance[{k}]")).collect();
    for (a, alpha) in theta.alphas.iter().enumerate() {
        for arm in Arm::ALL {
            debug_assert_eq!(labels.len(), theta.index(arm, a));
            labels.push(format!("{}({alpha})", arm_name(arm)));
        }
    }
    let s = &run.analysis.covariance.sigma;
    SigmaDump {
        labels,
        theta: theta.to_vec(),
        sigma: (0..s.nrows()).map(|r| (0..s.ncols()).map(|c| s[(r, c)]).collect()).collect(),
        components: run.analysis.covariance.m,
    }
}

fn cmd_estimate(args: &EstimateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let alphas = parse_alphas(&args.alpha)?;
    let effects = parse_effects(&args.effects)?;
    let partition = parse_partition(&args.partition)?;
    check_level(args.ci_level)?;
    let estimators = study::parse_estimators(&args.estimator)?;
    if let Some(q) = args.truncate {
        if !(q > 0.0 && q < 1.0) {
            return Err(CliError::validation("INVALID_TRUNCATION", format!("quantile {q} outside (0, 1)")));
        }
    }
    let net = io::read_edges(&args.edges)?;
    let table = io::read_data(&args.data)?;
    let prepared = io::prepare(&net, &table)?;
    let req = EstimateRequest {
        estimators,
        alphas,
        effects,
        partition,
        ci_level: args.ci_level,
        weights: WeightOptions {
            truncate_quantile: args.truncate,
            ..WeightOptions::default()
        },
    };
    let runs = study::with_threads(args.threads, || estimate(&prepared, &req))??;

    let observed = components(&prepared.network);
    let parts = partition.apply(&prepared.network).m();
    let meta: Vec<(String, String)> = vec![
        ("nodes".into(), prepared.network.n().to_string()),
        ("edges".into(), prepared.network.edge_count().to_string()),
        ("components".into(), observed.m().to_string()),
        ("partition".into(), partition.name().into()),
        ("partition_parts".into(), parts.to_string()),
        ("excluded_isolates".into(), prepared.excluded_isolates.to_string()),
        ("dropped_missing_outcome".into(), prepared.dropped_missing_outcome.to_string()),
        ("ci_level".into(), args.ci_level.to_string()),
    ];
    let _ = writeln!(
        stderr,
        "analyzed {} nodes; excluded {} isolates; dropped {} with missing outcome",
        prepared.network.n(),
        prepared.excluded_isolates,
        prepared.dropped_missing_outcome
    );
    let rows: Vec<EffectEstimate> = runs.iter().flat_map(|r| r.analysis.effects.iter().copied()).collect();
    sink(args.out.as_deref(), stdout, |w| {
        if args.json {
            write_json(w, &io::results_document(&meta, &rows))
        } else {
            io::write_results_csv(w, &meta, &rows)
        }
    })?;
    if let Some(path) = &args.dump_sigma {
        let dump: BTreeMap<&str, SigmaDump> = runs.iter().map(|r| (r.kind.name(), sigma_dump(r))).collect();
        sink(Some(path), stdout, |w| write_json(w, &dump))?;
    }
    Ok(())
}

/// Merges the config file (if any) with command-line overrides.
pub fn simulate_config(args: &SimulateArgs) -> CliResult<ScenarioConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            ScenarioConfig::from_json(&text)?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(s) = &args.scenario {
        cfg.scenario = s.clone();
    }
    if let Some(m) = args.components {
        cfg.m = m;
    }
    if let Some(r) = args.reps {
        cfg.reps = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = Some(s);
    }
    if let Some(a) = &args.alpha {
        cfg.alpha_grid = a.clone();
    }
    if let Some(e) = &args.estimator {
        cfg.estimators = Some(e.clone());
    }
    if let Some(p) = &args.partition {
        cfg.partition = Some(p.clone());
    }
    if let Some(l) = args.ci_level {
        cfg.ci_level = Some(l);
    }
    if let Some(e) = &args.edges {
        cfg.edges = Some(e.clone());
    }
    Ok(cfg)
}

fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let cfg = simulate_config(args)?;
    parse_alphas(&cfg.alpha_grid)?;
    let config = cfg.to_study(rand::random())?;
    let supplied: Option<Network> = match (config.scenario.uses_fixed_network(), &cfg.edges) {
        (true, Some(path)) => Some(io::read_edges(path)?),
        (true, None) => Some(fixture::network()),
        (false, _) => None,
    };
    let _ = writeln!(stderr, "scenario={} reps={} seed={}", config.scenario.name(), config.reps, config.seed);
    let report = study::with_threads(args.threads, || study::run_study(&config, supplied.as_ref()))??;
    let summary = study::report_summary(&report);
    match &args.out {
        Some(prefix) => {
            let csv = prefix.with_extension("csv");
            let json = prefix.with_extension("json");
            sink(Some(&csv), stdout, |w| study::write_report_csv(w, &report))?;
            sink(Some(&json), stdout, |w| write_json(w, &summary))?;
        }
        None if args.json => write_json(stdout, &summary)?,
        None => study::write_report_csv(stdout, &report)?,
    }
    Ok(())
}

fn read_graph(args: &GraphArgs) -> CliResult<Network> {
    let net = io::read_edges(&args.edges)?;
    Ok(match &args.data {
        Some(path) => {
            let table = io::read_data(path)?;
            net.with_extra_nodes(&table.ids)
        }
        None => net,
    })
}

#[derive(Serialize)]
struct StatsJson {
    nodes: usize,
    edges: usize,
    components: usize,
    isolates: usize,
    mean_degree: f64,
    sd_degree: f64,
    density: f64,
    transitivity: Option<f64>,
    assortativity: Option<f64>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn cmd_graph_stats(args: &GraphArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let net = read_graph(args)?;
    let s = network_stats(&net);
    let json = StatsJson {
        nodes: s.nodes,
        edges: s.edges,
        components: s.components,
        isolates: net.isolates().count(),
        mean_degree: s.mean_degree,
        sd_degree: s.sd_degree,
        density: s.density,
        transitivity: finite(s.transitivity),
        assortativity: finite(s.assortativity),
    };
    sink(args.out.as_deref(), stdout, |w| write_json(w, &json))
}

#[derive(Serialize)]
struct Membership<'a> {
    node: &'a str,
    component: usize,
}

fn cmd_communities(args: &GraphArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let net = read_graph(args)?;
    let parts = fast_greedy_communities(&net);
    let rows: Vec<Membership> = (0..net.n())
        .map(|i| Membership {
            node: net.id(i),
            component: parts.part_of(i),
        })
        .collect();
    sink(args.out.as_deref(), stdout, |w| write_json(w, &rows))
}

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Estimate(a) => cmd_estimate(a, stdout, stderr),
        Command::Simulate(a) => cmd_simulate(a, stdout, stderr),
        Command::GraphStats(a) => cmd_graph_stats(a, stdout),
        Command::Communities(a) => cmd_communities(a, stdout),
    }
}

/// Parses `args`, runs the command, and returns the process exit status.
/// Failures are reported on stderr as `{"error": CODE, "message": ...}`.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    match run(&cli, &mut out, &mut err) {
        Ok(()) => {
            let _ = out.flush();
            0
        }
        Err(e) => {
            let _ = out.flush();
            let _ = writeln!(err, "{}", e.to_json());
            e.exit
        }
    }
}
