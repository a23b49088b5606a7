//! Observed network, component partitions, community detection, and
//! descriptive statistics.

mod community;
mod network;
mod partition;
mod stats;

pub use community::{fast_greedy_communities, fast_greedy_with_trace, modularity, CommunityTrace, Merge};
pub use network::Network;
pub use partition::{components, ComponentPartition, PartitionKind};
pub use stats::{assortativity, network_stats, transitivity, NetworkStats};
