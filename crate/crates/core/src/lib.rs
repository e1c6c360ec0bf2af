//! Fuzzy trust propagation over directed P2P topologies.
//!
//! Edges carry a `(trust, untrust)` pair. A path is tested hop by hop with a
//! 2x2 matrix product and an acceptance rule, paths are ranked by mean trust,
//! and a greedy walk picks the route packets are most likely to follow.

pub mod cli;
pub mod pathing;
pub mod propagation;
pub mod sim;
pub mod topology;
pub mod trust;

pub use pathing::{
    enumerate_paths, most_likely_route, path_mean_trust, path_mean_untrust, rank_paths, Path,
    PathingError, RankedPath, Route, RouteError, RouteHop, DEFAULT_CAP,
};
pub use propagation::{
    evaluate_path, propagate_trust_hop, propagate_untrust_hop, trust_matrix, untrust_matrix,
    Chaining, HopResult, PathError, PathEvaluation, TestMode, Verdict,
};
pub use sim::{simulate, SimReport};
pub use topology::{
    generate_mesh, paper_fixture, parse_topology, serialize_topology, Topology, TopologyBuilder,
};
pub use trust::{
    classify, complement, display_round, make_pair, ModelConstants, TrustClass, TrustPair,
};
