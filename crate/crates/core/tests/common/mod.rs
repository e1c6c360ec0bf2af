//! Random topology generators and brute-force oracles shared by the
//! integration tests. None of the oracles call into the library's
//! enumeration, ranking or propagation code.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use trustnet::{Topology, TopologyBuilder, TrustPair};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Trust value with a random number of decimals, or a raw float.
pub fn random_trust(rng: &mut StdRng) -> f64 {
    match rng.gen_range(0..4) {
        0 => rng.gen_range(0..=100) as f64 / 100.0,
        1 => rng.gen_range(0..=20) as f64 / 20.0,
        2 => rng.gen::<f64>(),
        _ => [0.0, 0.5, 1.0][rng.gen_range(0..3)],
    }
}

pub fn random_pair(rng: &mut StdRng) -> TrustPair {
    TrustPair::from_trust(random_trust(rng)).unwrap()
}

/// Random acyclic topology on up to `max_nodes` nodes. Declaration order is
/// shuffled so it differs from the topological order.
pub fn random_dag(rng: &mut StdRng, max_nodes: usize) -> Topology {
    let n = rng.gen_range(2..=max_nodes);
    let topo_order: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut declared = topo_order.clone();
    declared.shuffle(rng);
    let density: f64 = rng.gen_range(0.2..0.9);
    let mut b = TopologyBuilder::new();
    for id in &declared {
        b.node(id).unwrap();
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                b.edge(&topo_order[i], &topo_order[j], random_pair(rng));
            }
        }
    }
    b.source(&topo_order[0])
        .destination(&topo_order[n - 1])
        .build()
        .unwrap()
}

/// Random directed graph, cycles allowed.
pub fn random_digraph(rng: &mut StdRng, max_nodes: usize) -> Topology {
    let n = rng.gen_range(2..=max_nodes);
    let ids: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let density: f64 = rng.gen_range(0.1..0.7);
    let mut b = TopologyBuilder::new();
    for id in &ids {
        b.node(id).unwrap();
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(density) {
                b.edge(&ids[i], &ids[j], random_pair(rng));
            }
        }
    }
    let s = rng.gen_range(0..n);
    let mut d = rng.gen_range(0..n);
    while d == s {
        d = rng.gen_range(0..n);
    }
    b.source(&ids[s]).destination(&ids[d]).build().unwrap()
}

/// Every ordering of every subset of the intermediate nodes, kept when each
/// consecutive pair is an edge. Returned in lexicographic order of node
/// declaration indices.
pub fn brute_force_paths(t: &Topology) -> Vec<Vec<usize>> {
    let (s, d) = (t.source(), t.destination());
    let middle: Vec<usize> = (0..t.node_count()).filter(|&i| i != s && i != d).collect();
    let mut found = Vec::new();
    let mut current = vec![s];
    let mut used = vec![false; middle.len()];
    permute(t, &middle, &mut used, &mut current, d, &mut found);
    found.sort();
    found
}

fn permute(
    t: &Topology,
    middle: &[usize],
    used: &mut [bool],
    current: &mut Vec<usize>,
    d: usize,
    found: &mut Vec<Vec<usize>>,
) {
    // Check the candidate that ends here, then extend with every unused node.
    let mut candidate = current.clone();
    candidate.push(d);
    if candidate.windows(2).all(|w| t.edge(w[0], w[1]).is_some()) {
        found.push(candidate);
    }
    for k in 0..middle.len() {
        if !used[k] {
            used[k] = true;
            current.push(middle[k]);
            permute(t, middle, used, current, d, found);
            current.pop();
            used[k] = false;
        }
    }
}

pub fn ids(t: &Topology, path: &[usize]) -> Vec<String> {
    path.iter().map(|&i| t.node_id(i).to_string()).collect()
}

/// Means by direct summation over the listed edges.
pub fn direct_means(t: &Topology, path: &[usize]) -> (f64, f64) {
    let mut trust = 0.0;
    let mut untrust = 0.0;
    for w in path.windows(2) {
        let e = t.edge(w[0], w[1]).unwrap();
        trust += e.trust();
        untrust += e.untrust();
    }
    let n = (path.len() - 1) as f64;
    (trust / n, untrust / n)
}

/// Naive greedy walk: every step scans all declared nodes, applies the
/// acceptance rule written out by hand, and keeps the first maximum.
/// Returns the node indices walked and whether the destination was reached.
pub fn greedy_oracle(
    t: &Topology,
    theta_min: f64,
    theta_max: f64,
    theta_ind: f64,
) -> (Vec<usize>, bool) {
    let mut walked = vec![t.source()];
    let (mut at_t, mut at_u) = (1.0, 0.0);
    loop {
        let here = *walked.last().unwrap();
        if here == t.destination() {
            return (walked, true);
        }
        let mut best: Option<(usize, f64, f64, f64)> = None;
        for cand in 0..t.node_count() {
            if walked.contains(&cand) {
                continue;
            }
            let Some(e) = t.edge(here, cand) else {
                continue;
            };
            let f_t = at_t * theta_min + at_u * theta_max;
            let f_u = at_t * e.untrust() + at_u * theta_ind;
            if f_t - f_u <= 1e-12 {
                continue;
            }
            match best {
                Some((_, bt, _, _)) if e.trust() <= bt => {}
                _ => best = Some((cand, e.trust(), e.trust(), e.untrust())),
            }
        }
        match best {
            Some((next, _, t_next, u_next)) => {
                walked.push(next);
                at_t = t_next;
                at_u = u_next;
            }
            None => return (walked, false),
        }
    }
}
