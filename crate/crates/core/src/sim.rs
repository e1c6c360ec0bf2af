//! Deterministic packet forwarding.
//!
//! Every packet performs the greedy walk of [`most_likely_route`] on its
//! own. There is no congestion and no trust feedback, so all packets share
//! one outcome; the report still counts them one by one.
//!
//! [`most_likely_route`]: crate::pathing::most_likely_route

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::pathing::{greedy_walk, Path, Walk};
use crate::topology::Topology;
use crate::trust::ModelConstants;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SimReport {
    pub packets_sent: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub route_usage: BTreeMap<Path, u64>,
    pub drop_points: BTreeMap<String, u64>,
}

impl SimReport {
    fn merge(mut self, other: SimReport) -> SimReport {
        self.packets_sent += other.packets_sent;
        self.delivered += other.delivered;
        self.dropped += other.dropped;
        for (path, n) in other.route_usage {
            *self.route_usage.entry(path).or_default() += n;
        }
        for (node, n) in other.drop_points {
            *self.drop_points.entry(node).or_default() += n;
        }
        self
    }

    fn record(mut self, t: &Topology, walk: Walk) -> SimReport {
        self.packets_sent += 1;
        match walk {
            Walk::Delivered(nodes, _) => {
                self.delivered += 1;
                let path = Path::from_ids(nodes.iter().map(|&i| t.node_id(i)));
                *self.route_usage.entry(path).or_default() += 1;
            }
            Walk::Stuck(nodes, _) => {
                self.dropped += 1;
                let at = t.node_id(*nodes.last().expect("walk starts at source"));
                *self.drop_points.entry(at.to_string()).or_default() += 1;
            }
        }
        self
    }

    /// Every count multiplied by `k`.
    pub fn scaled(&self, k: u64) -> SimReport {
        SimReport {
            packets_sent: self.packets_sent * k,
            delivered: self.delivered * k,
            dropped: self.dropped * k,
            route_usage: self
                .route_usage
                .iter()
                .map(|(p, n)| (p.clone(), n * k))
                .collect(),
            drop_points: self
                .drop_points
                .iter()
                .map(|(d, n)| (d.clone(), n * k))
                .collect(),
        }
    }
}

pub fn simulate(t: &Topology, packets: u64, c: &ModelConstants) -> SimReport {
    (0..packets)
        .into_par_iter()
        .fold(SimReport::default, |report, _| {
            report.record(t, greedy_walk(t, c))
        })
        .reduce(SimReport::default, SimReport::merge)
}
