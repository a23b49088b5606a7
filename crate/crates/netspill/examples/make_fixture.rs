//! Regenerates the bundled synthetic network and node data.

use std::fs::File;
use std::path::Path;

use netspill::fixture;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let net = fixture::trip_like_network(fixture::NETWORK_SEED);
    let data = fixture::trip_like_data(&net, fixture::DATA_SEED);
    netspill::io::write_edges(File::create(dir.join("trip_like_edges.csv")).unwrap(), &net).unwrap();
    netspill::io::write_data(File::create(dir.join("trip_like_data.csv")).unwrap(), &data).unwrap();
    let exposed = data.exposure.iter().filter(|a| **a).count();
    println!("{} nodes, {} edges, {exposed} exposed", net.n(), net.edge_count());
}
