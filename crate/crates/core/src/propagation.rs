//! Per-hop trust and untrust tests.
//!
//! Each hop multiplies a 1x2 arrival vector by a 2x2 matrix built from the
//! model constants and the next edge's pair. The node at the far end of the
//! hop is acceptable when the trust component of the product dominates.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pathing::Path;
use crate::topology::Topology;
use crate::trust::{ModelConstants, TrustPair};

/// Absolute tolerance for the F_T vs F_U comparison.
pub const VERDICT_TOLERANCE: f64 = 1e-12;

pub type Matrix2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Acceptable,
    NotAcceptable,
    Indifferent,
}

impl Verdict {
    pub fn compare(trust: f64, untrust: f64) -> Verdict {
        if (trust - untrust).abs() <= VERDICT_TOLERANCE {
            Verdict::Indifferent
        } else if trust > untrust {
            Verdict::Acceptable
        } else {
            Verdict::NotAcceptable
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Acceptable => "acceptable",
            Verdict::NotAcceptable => "not-acceptable",
            Verdict::Indifferent => "indifferent",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestMode {
    TrustTest,
    UntrustTest,
}

impl TestMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TestMode::TrustTest => "trust",
            TestMode::UntrustTest => "untrust",
        }
    }
}

/// What a hop receives as its arrival vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Chaining {
    /// Hop k > 1 receives the pair of edge k-1.
    #[default]
    EdgeChaining,
    /// Hop k > 1 receives hop k-1's output vector.
    OutputChaining,
}

impl Chaining {
    pub fn as_str(self) -> &'static str {
        match self {
            Chaining::EdgeChaining => "edge",
            Chaining::OutputChaining => "output",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopResult {
    pub f_trust: f64,
    pub f_untrust: f64,
    pub verdict: Verdict,
}

impl HopResult {
    fn new(f_trust: f64, f_untrust: f64) -> Self {
        HopResult {
            f_trust,
            f_untrust,
            verdict: Verdict::compare(f_trust, f_untrust),
        }
    }

    /// Output components in the order the given test writes them: `[F_T F_U]`
    /// for the trust test, `[F_U F_T]` for the untrust test.
    pub fn vector(&self, mode: TestMode) -> [f64; 2] {
        match mode {
            TestMode::TrustTest => [self.f_trust, self.f_untrust],
            TestMode::UntrustTest => [self.f_untrust, self.f_trust],
        }
    }
}

pub fn trust_matrix(next_edge: TrustPair, c: &ModelConstants) -> Matrix2 {
    [
        [c.theta_min, next_edge.untrust()],
        [c.theta_max, c.theta_ind],
    ]
}

pub fn untrust_matrix(next_edge: TrustPair, c: &ModelConstants) -> Matrix2 {
    [
        [c.upsilon_min, next_edge.trust()],
        [c.upsilon_max, c.upsilon_ind],
    ]
}

fn row_times(v: [f64; 2], m: &Matrix2) -> [f64; 2] {
    [
        v[0] * m[0][0] + v[1] * m[1][0],
        v[0] * m[0][1] + v[1] * m[1][1],
    ]
}

/// `[T U] · [[theta_min, U_next], [theta_max, theta_ind]]`.
pub fn propagate_trust_hop(
    arrival: TrustPair,
    next_edge: TrustPair,
    c: &ModelConstants,
) -> HopResult {
    let [f_trust, f_untrust] = row_times(
        [arrival.trust(), arrival.untrust()],
        &trust_matrix(next_edge, c),
    );
    HopResult::new(f_trust, f_untrust)
}

/// `[U T] · [[upsilon_min, T_next], [upsilon_max, upsilon_ind]]`, giving
/// `[G_U G_T]`.
pub fn propagate_untrust_hop(
    arrival: TrustPair,
    next_edge: TrustPair,
    c: &ModelConstants,
) -> HopResult {
    let [g_untrust, g_trust] = row_times(
        [arrival.untrust(), arrival.trust()],
        &untrust_matrix(next_edge, c),
    );
    HopResult::new(g_trust, g_untrust)
}

pub fn propagate_hop(
    mode: TestMode,
    arrival: TrustPair,
    next_edge: TrustPair,
    c: &ModelConstants,
) -> HopResult {
    match mode {
        TestMode::TrustTest => propagate_trust_hop(arrival, next_edge, c),
        TestMode::UntrustTest => propagate_untrust_hop(arrival, next_edge, c),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("path is empty")]
    Empty,
    #[error("path has no edges")]
    NoEdges,
    #[error("unknown node {0} in path")]
    UnknownNode(String),
    #[error("no such edge {0} -> {1}")]
    MissingEdge(String, String),
    #[error("path starts at {found}, expected source {expected}")]
    NotFromSource { expected: String, found: String },
    #[error("path ends at {found}, expected destination {expected}")]
    NotToDestination { expected: String, found: String },
    #[error("node {0} repeats in path")]
    RepeatedNode(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathEvaluation {
    pub path: Path,
    pub hops: Vec<HopResult>,
    pub mode: TestMode,
    pub chaining: Chaining,
    pub confidential: bool,
}

/// Runs the chosen test along `path`.
///
/// The first hop always starts from the source's full-trust vector `[1 0]`.
pub fn evaluate_path(
    topology: &Topology,
    path: &Path,
    c: &ModelConstants,
    mode: TestMode,
    chaining: Chaining,
) -> Result<PathEvaluation, PathError> {
    let edges = path.edge_pairs(topology)?;
    let mut hops = Vec::with_capacity(edges.len());
    let mut arrival = TrustPair::FULL_TRUST;
    for edge in edges {
        let hop = propagate_hop(mode, arrival, edge, c);
        arrival = match chaining {
            Chaining::EdgeChaining => edge,
            Chaining::OutputChaining => TrustPair::unchecked(hop.f_trust, hop.f_untrust),
        };
        hops.push(hop);
    }
    let confidential = hops.iter().all(|h| h.verdict == Verdict::Acceptable);
    Ok(PathEvaluation {
        path: path.clone(),
        hops,
        mode,
        chaining,
        confidential,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{paper_fixture, TopologyBuilder};
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    fn pair(t: f64, u: f64) -> TrustPair {
        TrustPair::new(t, u).unwrap()
    }

    fn close(a: [f64; 2], b: [f64; 2]) -> bool {
        (a[0] - b[0]).abs() <= EPS && (a[1] - b[1]).abs() <= EPS
    }

    #[test]
    fn matrices_from_defaults() {
        let c = ModelConstants::default();
        assert_eq!(
            trust_matrix(pair(0.95, 0.05), &c),
            [[0.51, 0.05], [1.0, 0.5]]
        );
        assert_eq!(trust_matrix(pair(0.9, 0.1), &c), [[0.51, 0.1], [1.0, 0.5]]);
        assert_eq!(
            trust_matrix(TrustPair::FULL_TRUST, &c),
            [[0.51, 0.0], [1.0, 0.5]]
        );
        assert_eq!(
            untrust_matrix(pair(0.95, 0.05), &c),
            [[0.49, 0.95], [0.0, 0.5]]
        );
        assert_eq!(
            untrust_matrix(pair(0.6, 0.4), &c),
            [[0.49, 0.6], [0.0, 0.5]]
        );
        assert_eq!(
            untrust_matrix(TrustPair::NO_TRUST, &c),
            [[0.49, 0.0], [0.0, 0.5]]
        );
    }

    #[test]
    fn trust_hops() {
        let c = ModelConstants::default();
        let cases = [
            ((1.0, 0.0), (0.95, 0.05), [0.51, 0.05]),
            ((0.95, 0.05), (0.6, 0.4), [0.5345, 0.405]),
            ((0.6, 0.4), (0.9, 0.1), [0.706, 0.26]),
            ((0.9, 0.1), (0.8, 0.2), [0.559, 0.23]),
        ];
        for (arrival, edge, want) in cases {
            let hop = propagate_trust_hop(pair(arrival.0, arrival.1), pair(edge.0, edge.1), &c);
            assert!(close(hop.vector(TestMode::TrustTest), want), "{hop:?}");
            assert_eq!(hop.verdict, Verdict::Acceptable);
        }
    }

    #[test]
    fn untrust_hops() {
        let c = ModelConstants::default();
        let cases = [
            ((1.0, 0.0), (0.95, 0.05), [0.0, 0.5]),
            ((0.95, 0.05), (0.6, 0.4), [0.0245, 0.505]),
            ((0.6, 0.4), (0.9, 0.1), [0.196, 0.66]),
            ((0.9, 0.1), (0.8, 0.2), [0.049, 0.53]),
        ];
        for (arrival, edge, want) in cases {
            let hop = propagate_untrust_hop(pair(arrival.0, arrival.1), pair(edge.0, edge.1), &c);
            assert!(close(hop.vector(TestMode::UntrustTest), want), "{hop:?}");
            assert_eq!(hop.verdict, Verdict::Acceptable);
        }
    }

    #[test]
    fn verdict_rule() {
        assert_eq!(Verdict::compare(0.6, 0.4), Verdict::Acceptable);
        assert_eq!(Verdict::compare(0.4, 0.6), Verdict::NotAcceptable);
        assert_eq!(Verdict::compare(0.5, 0.5), Verdict::Indifferent);
        assert_eq!(Verdict::compare(0.5, 0.5 + 1e-13), Verdict::Indifferent);
        assert_eq!(Verdict::compare(0.5, 0.5 + 1e-9), Verdict::NotAcceptable);
    }

    fn p36() -> Path {
        Path::from_ids(["S", "3", "7", "11", "D"])
    }

    #[test]
    fn golden_chain_both_modes() {
        let t = paper_fixture();
        let c = ModelConstants::default();
        let ev =
            evaluate_path(&t, &p36(), &c, TestMode::TrustTest, Chaining::EdgeChaining).unwrap();
        assert_eq!(ev.hops.len(), 4);
        assert!(ev.confidential);
        let want = [[0.51, 0.05], [0.5345, 0.405], [0.706, 0.26], [0.559, 0.23]];
        for (hop, w) in ev.hops.iter().zip(want) {
            assert!(close(hop.vector(TestMode::TrustTest), w));
        }
        let ev = evaluate_path(
            &t,
            &p36(),
            &c,
            TestMode::UntrustTest,
            Chaining::EdgeChaining,
        )
        .unwrap();
        let want = [[0.0, 0.5], [0.0245, 0.505], [0.196, 0.66], [0.049, 0.53]];
        for (hop, w) in ev.hops.iter().zip(want) {
            assert!(close(hop.vector(TestMode::UntrustTest), w));
        }
        assert!(ev.confidential);
    }

    #[test]
    fn output_chaining_against_hand_oracle() {
        // Values worked by hand: each hop feeds its [F_T F_U] forward.
        //   h1 = [1 0]·[[.51 .05][1 .5]]               = [0.51, 0.05]
        //   h2 = [.51 .05]·[[.51 .4][1 .5]]            = [0.3101, 0.229]
        //   h3 = [.3101 .229]·[[.51 .1][1 .5]]         = [0.387151, 0.14551]
        //   h4 = [.387151 .14551]·[[.51 .2][1 .5]]     = [0.34295701, 0.1501852]
        let want = [
            [0.51, 0.05],
            [0.3101, 0.229],
            [0.387151, 0.14551],
            [0.34295701, 0.1501852],
        ];
        let t = paper_fixture();
        let ev = evaluate_path(
            &t,
            &p36(),
            &ModelConstants::default(),
            TestMode::TrustTest,
            Chaining::OutputChaining,
        )
        .unwrap();
        for (hop, w) in ev.hops.iter().zip(want) {
            assert!(
                close(hop.vector(TestMode::TrustTest), w),
                "{hop:?} vs {w:?}"
            );
        }
        assert!(ev.confidential);
    }

    #[test]
    fn single_edge_path() {
        let mut b = TopologyBuilder::new();
        b.node("S").unwrap().node("D").unwrap();
        b.edge("S", "D", TrustPair::FULL_TRUST)
            .source("S")
            .destination("D");
        let t = b.build().unwrap();
        let ev = evaluate_path(
            &t,
            &Path::from_ids(["S", "D"]),
            &ModelConstants::default(),
            TestMode::TrustTest,
            Chaining::EdgeChaining,
        )
        .unwrap();
        assert_eq!(ev.hops.len(), 1);
        assert!(close(ev.hops[0].vector(TestMode::TrustTest), [0.51, 0.0]));
        assert_eq!(ev.hops[0].verdict, Verdict::Acceptable);
    }

    #[test]
    fn path_errors() {
        let t = paper_fixture();
        let c = ModelConstants::default();
        let eval = |ids: &[&str]| {
            evaluate_path(
                &t,
                &Path::from_ids(ids.iter().copied()),
                &c,
                TestMode::TrustTest,
                Chaining::EdgeChaining,
            )
        };
        assert_eq!(
            eval(&["S", "D"]),
            Err(PathError::MissingEdge("S".into(), "D".into()))
        );
        assert_eq!(
            eval(&["S", "Z", "D"]),
            Err(PathError::UnknownNode("Z".into()))
        );
        assert!(matches!(
            eval(&["1", "5", "8", "D"]),
            Err(PathError::NotFromSource { .. })
        ));
        assert!(matches!(
            eval(&["S", "1", "5", "8"]),
            Err(PathError::NotToDestination { .. })
        ));
        assert_eq!(eval(&[]), Err(PathError::Empty));
        assert_eq!(eval(&["S"]), Err(PathError::NoEdges));
    }

    #[test]
    fn not_confidential_when_any_hop_fails() {
        let mut b = TopologyBuilder::new();
        for id in ["S", "a", "D"] {
            b.node(id).unwrap();
        }
        // Hop 1 from [1 0] into an edge with untrust 1: F_T = 0.51 < F_U = 1.
        // Hop 2 arrives with [0 1]: F_T = 1.0, F_U = 0.5, acceptable.
        b.edge("S", "a", TrustPair::NO_TRUST)
            .edge("a", "D", TrustPair::FULL_TRUST)
            .source("S")
            .destination("D");
        let t = b.build().unwrap();
        let ev = evaluate_path(
            &t,
            &Path::from_ids(["S", "a", "D"]),
            &ModelConstants::default(),
            TestMode::TrustTest,
            Chaining::EdgeChaining,
        )
        .unwrap();
        assert_eq!(ev.hops[0].verdict, Verdict::NotAcceptable);
        assert_eq!(ev.hops[1].verdict, Verdict::Acceptable);
        assert!(!ev.confidential);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn trust_component_identity(a in 0.0f64..=1.0, e in 0.0f64..=1.0) {
            let c = ModelConstants::default();
            let arrival = TrustPair::from_trust(a).unwrap();
            let hop = propagate_trust_hop(arrival, TrustPair::from_trust(e).unwrap(), &c);
            prop_assert!((hop.f_trust - (0.51 + 0.49 * arrival.untrust())).abs() <= 1e-12);
            prop_assert!(hop.f_trust >= 0.51 - 1e-12 && hop.f_trust <= 1.0 + 1e-12);
        }

        #[test]
        fn untrust_component_bounded(a in 0.0f64..=1.0, e in 0.0f64..=1.0) {
            let c = ModelConstants::default();
            let arrival = TrustPair::from_trust(a).unwrap();
            let hop = propagate_untrust_hop(arrival, TrustPair::from_trust(e).unwrap(), &c);
            prop_assert!((hop.f_untrust - 0.49 * arrival.untrust()).abs() <= 1e-15);
            prop_assert!(hop.f_untrust <= 0.49);
        }

        #[test]
        fn edge_chaining_matches_manual_hops(ts in proptest::collection::vec(0.0f64..=1.0, 3)) {
            let ids = ["S", "a", "b", "D"];
            let mut b = TopologyBuilder::new();
            for id in ids {
                b.node(id).unwrap();
            }
            let pairs: Vec<TrustPair> = ts.iter().map(|&t| TrustPair::from_trust(t).unwrap()).collect();
            for (w, p) in ids.windows(2).zip(&pairs) {
                b.edge(w[0], w[1], *p);
            }
            let t = b.source("S").destination("D").build().unwrap();
            let c = ModelConstants::default();
            let ev = evaluate_path(&t, &Path::from_ids(ids), &c, TestMode::TrustTest, Chaining::EdgeChaining).unwrap();

            // Manual: [1 0] into edge 0, then edge k-1's pair into edge k.
            let mut manual = vec![propagate_trust_hop(TrustPair::FULL_TRUST, pairs[0], &c)];
            for k in 1..pairs.len() {
                manual.push(propagate_trust_hop(pairs[k - 1], pairs[k], &c));
            }
            prop_assert_eq!(&ev.hops, &manual);
            let again = evaluate_path(&t, &Path::from_ids(ids), &c, TestMode::TrustTest, Chaining::EdgeChaining).unwrap();
            prop_assert_eq!(ev, again);
        }
    }
}
