//! Simple-path enumeration, mean trust ranking and greedy route selection.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::propagation::{
    evaluate_path, propagate_trust_hop, Chaining, HopResult, PathError, TestMode, Verdict,
};
use crate::topology::Topology;
use crate::trust::{classify, ModelConstants, TrustClass, TrustPair};

pub const DEFAULT_CAP: usize = 1_000_000;

/// An ordered node sequence, ids as declared in the topology.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    nodes: Vec<String>,
}

impl Serialize for Path {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.nodes.serialize(s)
    }
}

impl Path {
    pub fn from_ids<I, S>(ids: I) -> Path
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Path {
            nodes: ids.into_iter().map(Into::into).collect(),
        }
    }

    /// Parses a comma-separated node list such as `S,3,7,11,D`.
    pub fn parse_spec(spec: &str) -> Path {
        Path::from_ids(spec.split(',').map(str::trim).filter(|s| !s.is_empty()))
    }

    fn from_indices(t: &Topology, indices: &[usize]) -> Path {
        Path::from_ids(indices.iter().map(|&i| t.node_id(i)))
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    /// Checks the path against `t` and returns the pair of every edge in
    /// order.
    pub fn edge_pairs(&self, t: &Topology) -> Result<Vec<TrustPair>, PathError> {
        let indices = self.resolve(t)?;
        indices
            .windows(2)
            .map(|w| {
                t.edge(w[0], w[1]).ok_or_else(|| {
                    PathError::MissingEdge(t.node_id(w[0]).to_string(), t.node_id(w[1]).to_string())
                })
            })
            .collect()
    }

    fn resolve(&self, t: &Topology) -> Result<Vec<usize>, PathError> {
        let first = self.nodes.first().ok_or(PathError::Empty)?;
        let indices = self
            .nodes
            .iter()
            .map(|id| {
                t.index_of(id)
                    .ok_or_else(|| PathError::UnknownNode(id.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if indices.len() < 2 {
            return Err(PathError::NoEdges);
        }
        if indices[0] != t.source() {
            return Err(PathError::NotFromSource {
                expected: t.source_id().to_string(),
                found: first.clone(),
            });
        }
        if indices[indices.len() - 1] != t.destination() {
            return Err(PathError::NotToDestination {
                expected: t.destination_id().to_string(),
                found: self.nodes[self.nodes.len() - 1].clone(),
            });
        }
        let mut seen = vec![false; t.node_count()];
        for (&i, id) in indices.iter().zip(&self.nodes) {
            if std::mem::replace(&mut seen[i], true) {
                return Err(PathError::RepeatedNode(id.clone()));
            }
        }
        Ok(indices)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.nodes.join("→"))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathingError {
    #[error("more than {cap} simple paths; raise the cap to enumerate them all")]
    CapExceeded { cap: usize },
    #[error(transparent)]
    Path(#[from] PathError),
}

/// Every simple source-to-destination path, depth first, successors taken
/// in declaration order. For a layered mesh the first layer varies slowest.
pub fn enumerate_paths(t: &Topology, cap: usize) -> Result<Vec<Path>, PathingError> {
    let mut out = Vec::new();
    let (source, destination) = (t.source(), t.destination());
    let mut on_path = vec![false; t.node_count()];
    let mut stack: Vec<usize> = vec![source];
    // Next successor position to try for each node on the stack.
    let mut cursor: Vec<usize> = vec![0];
    on_path[source] = true;

    while let Some(&node) = stack.last() {
        let depth = stack.len() - 1;
        let succ = t.successors(node);
        if node == destination || cursor[depth] >= succ.len() {
            if node == destination {
                if out.len() == cap {
                    return Err(PathingError::CapExceeded { cap });
                }
                out.push(Path::from_indices(t, &stack));
            }
            on_path[node] = false;
            stack.pop();
            cursor.pop();
            continue;
        }
        let next = succ[cursor[depth]];
        cursor[depth] += 1;
        if !on_path[next] {
            on_path[next] = true;
            stack.push(next);
            cursor.push(0);
        }
    }
    Ok(out)
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len() as f64;
    values.sum::<f64>() / n
}

pub fn path_mean_trust(t: &Topology, path: &Path) -> Result<f64, PathError> {
    let pairs = path.edge_pairs(t)?;
    Ok(mean(pairs.iter().map(TrustPair::trust)))
}

pub fn path_mean_untrust(t: &Topology, path: &Path) -> Result<f64, PathError> {
    let pairs = path.edge_pairs(t)?;
    Ok(mean(pairs.iter().map(TrustPair::untrust)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedPath {
    pub rank: usize,
    /// 1-based position in enumeration order.
    pub index: usize,
    pub path: Path,
    pub mean_trust: f64,
    pub mean_untrust: f64,
    pub trust_class: TrustClass,
    /// Whether every hop passes the trust test under edge chaining.
    pub confidential: bool,
}

/// Orders by mean trust descending, then mean untrust ascending, then
/// enumeration index.
pub fn rank_order(a: &RankedPath, b: &RankedPath) -> Ordering {
    b.mean_trust
        .total_cmp(&a.mean_trust)
        .then(a.mean_untrust.total_cmp(&b.mean_untrust))
        .then(a.index.cmp(&b.index))
}

pub fn rank_paths(
    t: &Topology,
    c: &ModelConstants,
    cap: usize,
) -> Result<Vec<RankedPath>, PathingError> {
    let paths = enumerate_paths(t, cap)?;
    // Indexed collect keeps enumeration order.
    let mut ranked = paths
        .into_par_iter()
        .enumerate()
        .map(|(i, path)| {
            let pairs = path.edge_pairs(t)?;
            let mean_trust = mean(pairs.iter().map(TrustPair::trust));
            let mean_untrust = mean(pairs.iter().map(TrustPair::untrust));
            let confidential =
                evaluate_path(t, &path, c, TestMode::TrustTest, Chaining::EdgeChaining)?
                    .confidential;
            Ok(RankedPath {
                rank: 0,
                index: i + 1,
                trust_class: classify(mean_trust.clamp(0.0, 1.0)).unwrap_or(TrustClass::VeryLow),
                path,
                mean_trust,
                mean_untrust,
                confidential,
            })
        })
        .collect::<Result<Vec<_>, PathError>>()?;
    ranked.sort_by(rank_order);
    for (i, r) in ranked.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(ranked)
}

/// One step of the greedy walk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteHop {
    pub from: String,
    pub to: String,
    pub edge: TrustPair,
    pub result: HopResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Route {
    pub path: Path,
    pub hops: Vec<RouteHop>,
    pub mean_trust: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RouteError {
    #[error("topology has no edges")]
    EmptyTopology,
    #[error("dead end at node {stuck} after {}", .partial)]
    DeadEnd {
        stuck: String,
        partial: Path,
        trace: Vec<RouteHop>,
    },
}

/// Outcome of one greedy walk; shared by routing and the simulator.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Walk {
    Delivered(Vec<usize>, Vec<RouteHop>),
    Stuck(Vec<usize>, Vec<RouteHop>),
}

pub(crate) fn greedy_walk(t: &Topology, c: &ModelConstants) -> Walk {
    let mut visited = vec![false; t.node_count()];
    let mut current = t.source();
    let mut arrival = TrustPair::FULL_TRUST;
    let mut nodes = vec![current];
    let mut trace = Vec::new();
    visited[current] = true;

    while current != t.destination() {
        let mut best: Option<(usize, TrustPair, HopResult)> = None;
        for &next in t.successors(current) {
            if visited[next] {
                continue;
            }
            let edge = t.edge(current, next).expect("successor has an edge");
            let hop = propagate_trust_hop(arrival, edge, c);
            if hop.verdict != Verdict::Acceptable {
                continue;
            }
            // Strict comparison keeps the earliest-declared node on ties.
            if best.is_none_or(|(_, b, _)| edge.trust() > b.trust()) {
                best = Some((next, edge, hop));
            }
        }
        let Some((next, edge, result)) = best else {
            return Walk::Stuck(nodes, trace);
        };
        trace.push(RouteHop {
            from: t.node_id(current).to_string(),
            to: t.node_id(next).to_string(),
            edge,
            result,
        });
        visited[next] = true;
        nodes.push(next);
        arrival = edge;
        current = next;
    }
    Walk::Delivered(nodes, trace)
}

/// Greedy walk from the source: at each node take the acceptable edge to an
/// unvisited node with the highest trust.
pub fn most_likely_route(t: &Topology, c: &ModelConstants) -> Result<Route, RouteError> {
    if t.edge_count() == 0 {
        return Err(RouteError::EmptyTopology);
    }
    match greedy_walk(t, c) {
        Walk::Delivered(nodes, hops) => {
            let mean_trust = mean(hops.iter().map(|h| h.edge.trust()));
            Ok(Route {
                path: Path::from_indices(t, &nodes),
                hops,
                mean_trust,
            })
        }
        Walk::Stuck(nodes, trace) => Err(RouteError::DeadEnd {
            stuck: t
                .node_id(*nodes.last().expect("walk starts at source"))
                .to_string(),
            partial: Path::from_indices(t, &nodes),
            trace,
        }),
    }
}
