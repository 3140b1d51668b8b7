//! Independent oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls the routine it checks.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use swarmlink::network::{Graph, NodeId, NodeRole, TopologyGraph, TopologyKind, GROUND_STATION};
use swarmlink::rng::rng_from_seed;
use swarmlink::wind::{synthesize_turbulence, Component, TurbulenceModel, TurbulenceSpec};
use swarmlink::Vec3;

// ---------------------------------------------------------------------------
// Spectra

/// Welch estimate of a two-sided PSD in rad/m, normalized so that summing it
/// over all bins times the bin width gives the sample variance.
///
/// Hann-windowed segments of length `m` with 50% overlap; plain O(m²) DFT so
/// the estimate shares no code with the synthesis.
pub fn welch(x: &[f64], spacing: f64, m: usize) -> Vec<(f64, f64)> {
    let window: Vec<f64> = (0..m)
        .map(|j| 0.5 - 0.5 * (2.0 * PI * j as f64 / m as f64).cos())
        .collect();
    let u = window.iter().map(|w| w * w).sum::<f64>() / m as f64;
    let mut acc = vec![0.0; m / 2 + 1];
    let mut segments = 0;
    let mut start = 0;
    while start + m <= x.len() {
        let seg = &x[start..start + m];
        let mean = seg.iter().sum::<f64>() / m as f64;
        for (k, a) in acc.iter_mut().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, v) in seg.iter().enumerate() {
                let ang = -2.0 * PI * (j * k) as f64 / m as f64;
                s += Complex64::from_polar((v - mean) * window[j], ang);
            }
            *a += s.norm_sqr();
        }
        segments += 1;
        start += m / 2;
    }
    acc.iter()
        .enumerate()
        .map(|(k, a)| {
            let omega = 2.0 * PI * k as f64 / (m as f64 * spacing);
            (omega, a / segments as f64 * spacing / (2.0 * PI * u * m as f64))
        })
        .collect()
}

/// Mean of periodogram/target over the Welch bins of the central decade (the
/// decade log-centred between the first non-DC bin and Nyquist).
pub fn central_decade_ratio(model: TurbulenceModel, seed: u64) -> f64 {
    let spec = TurbulenceSpec::isotropic(1.0, 200.0, model).unwrap();
    let (n, dx, m) = (4096, 10.0, 512);
    let x = synthesize_turbulence(&spec, Component::U, dx, n, seed).unwrap();
    let est = welch(&x, dx, m);
    let centre = (est[1].0 * est.last().unwrap().0).sqrt();
    let (d0, d1) = (centre / 10f64.sqrt(), centre * 10f64.sqrt());
    let ratios: Vec<f64> = est
        .iter()
        .filter(|(w, _)| *w >= d0 && *w <= d1)
        .map(|(w, p)| p / spec.psd(Component::U, *w).unwrap())
        .collect();
    ratios.iter().sum::<f64>() / ratios.len() as f64
}

// ---------------------------------------------------------------------------
// Special functions

/// `½·erfc(√γ)` from an independent erfc implementation.
pub fn qpsk_ber_oracle(ebn0_db: f64) -> f64 {
    let g = 10f64.powf(ebn0_db / 10.0);
    0.5 * statrs::function::erf::erfc(g.sqrt())
}

/// Least-squares slope of `y` against `x`.
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

// ---------------------------------------------------------------------------
// Graphs

/// Erdős–Rényi graph with edge probability `p` and costs in `[0.1, 10)`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = rng_from_seed(seed);
    let mut g = Graph::new(n);
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < p {
                g.add_edge(a, b, rng.random_range(0.1..10.0)).unwrap();
            }
        }
    }
    g
}

/// Cheapest simple path by exhaustive enumeration.
pub fn brute_force_cost(g: &Graph, src: NodeId, dst: NodeId) -> Option<f64> {
    fn walk(g: &Graph, at: NodeId, dst: NodeId, seen: &mut Vec<bool>, cost: f64, best: &mut Option<f64>) {
        if at == dst {
            *best = Some(best.map_or(cost, |b: f64| b.min(cost)));
            return;
        }
        for &(m, c) in g.neighbors(at) {
            if !seen[m] {
                seen[m] = true;
                walk(g, m, dst, seen, cost + c, best);
                seen[m] = false;
            }
        }
    }
    let mut seen = vec![false; g.node_count()];
    seen[src] = true;
    let mut best = None;
    walk(g, src, dst, &mut seen, 0.0, &mut best);
    best
}

/// Hop distance of every node within `ttl` hops of `src`.
pub fn bfs_within(g: &Graph, src: NodeId, ttl: usize) -> BTreeMap<NodeId, usize> {
    let mut depth = BTreeMap::from([(src, 0)]);
    let mut queue = VecDeque::from([src]);
    while let Some(n) = queue.pop_front() {
        let d = depth[&n];
        if d == ttl {
            continue;
        }
        for &(m, _) in g.neighbors(n) {
            if let std::collections::btree_map::Entry::Vacant(e) = depth.entry(m) {
                e.insert(d + 1);
                queue.push_back(m);
            }
        }
    }
    depth
}

/// Ground station at the origin, UAVs uniform in a 200 m box above it.
pub fn random_positions(n_uavs: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = rng_from_seed(seed);
    let mut p = vec![Vec3::zeros()];
    for _ in 0..n_uavs {
        p.push(Vec3::new(
            rng.random_range(-100.0..100.0),
            rng.random_range(-100.0..100.0),
            rng.random_range(10.0..100.0),
        ));
    }
    p
}

fn connected_within(g: &Graph, nodes: &BTreeSet<NodeId>) -> bool {
    let Some(&start) = nodes.iter().next() else {
        return true;
    };
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(n) = queue.pop_front() {
        for &(m, _) in g.neighbors(n) {
            if nodes.contains(&m) && seen.insert(m) {
                queue.push_back(m);
            }
        }
    }
    seen.len() == nodes.len()
}

/// Structural rules of each topology kind, checked from the edge list.
/// Returns the first violated rule.
pub fn topology_violation(t: &TopologyGraph) -> Option<String> {
    let g = &t.graph;
    let n = g.node_count();
    let all: BTreeSet<NodeId> = (0..n).collect();
    let uavs: BTreeSet<NodeId> = (1..n).collect();
    let masters: BTreeSet<NodeId> = (0..n).filter(|&i| t.roles[i] == NodeRole::MasterUav).collect();
    let gs_nbrs: BTreeSet<NodeId> = g.neighbors(GROUND_STATION).iter().map(|e| e.0).collect();
    let edges = g.edges();
    let group_ids: BTreeSet<usize> = t.groups.iter().flatten().copied().collect();
    let members = |k: usize| -> BTreeSet<NodeId> { (1..n).filter(|&i| t.groups[i] == Some(k)).collect() };

    if t.roles[GROUND_STATION] != NodeRole::GroundStation || (1..n).any(|i| t.roles[i] == NodeRole::GroundStation) {
        return Some("ground station must be node 0 and unique".into());
    }
    if !connected_within(g, &all) {
        return Some("not connected".into());
    }
    if t.kind != TopologyKind::Star {
        for k in &group_ids {
            if members(*k).intersection(&masters).count() != 1 {
                return Some(format!("group {k} needs exactly one master"));
            }
        }
    }
    match t.kind {
        TopologyKind::Star => {
            if gs_nbrs != uavs || edges.len() != n - 1 {
                return Some("star: every UAV links to the ground station and nothing else".into());
            }
        }
        TopologyKind::MultiStar => {
            if gs_nbrs != masters {
                return Some("multi-star: ground station links exactly the masters".into());
            }
            for &(a, b, _) in &edges {
                if a == GROUND_STATION {
                    continue;
                }
                if masters.contains(&a) == masters.contains(&b) || t.groups[a] != t.groups[b] {
                    return Some(format!("multi-star: edge {a}-{b}"));
                }
            }
        }
        TopologyKind::SingleGroupAdHoc => {
            if gs_nbrs.len() != 1 || gs_nbrs != masters {
                return Some("single-group: one gateway master".into());
            }
            if !connected_within(g, &uavs) {
                return Some("single-group: mesh disconnected".into());
            }
        }
        TopologyKind::MultiGroupAdHoc => {
            if gs_nbrs != masters {
                return Some("multi-group: ground station links exactly the masters".into());
            }
            if edges
                .iter()
                .any(|&(a, b, _)| a != GROUND_STATION && t.groups[a] != t.groups[b])
            {
                return Some("multi-group: inter-group edge".into());
            }
            for k in &group_ids {
                if !connected_within(g, &members(*k)) {
                    return Some(format!("multi-group: group {k} disconnected"));
                }
            }
        }
        TopologyKind::MultiLayerAdHoc => {
            if gs_nbrs.len() != 1 || !masters.contains(gs_nbrs.iter().next().unwrap()) {
                return Some("multi-layer: one gateway master".into());
            }
            if !connected_within(g, &uavs) {
                return Some("multi-layer: UAVs disconnected without the ground station".into());
            }
            if !connected_within(g, &masters) {
                return Some("multi-layer: master layer disconnected".into());
            }
        }
    }
    None
}
