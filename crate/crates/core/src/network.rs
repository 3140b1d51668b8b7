//! Swarm network topologies, message propagation and path planning.
//!
//! Node `0` of every topology is the ground station; UAVs are `1..=n`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::rng::{rng_from_seed, UnitDraw};
use crate::{Error, Result, Vec3};

pub type NodeId = usize;

pub const GROUND_STATION: NodeId = 0;

/// Undirected weighted graph with sorted adjacency lists.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    adj: Vec<Vec<(NodeId, f64)>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn check(&self, n: NodeId) -> Result<()> {
        if n >= self.adj.len() {
            return Err(Error::domain(format!("node {n} does not exist")));
        }
        Ok(())
    }

    /// Adds or replaces the edge `a–b`.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId, cost: f64) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::domain(format!("self-loop on {a}")));
        }
        if !(cost >= 0.0 && cost.is_finite()) {
            return Err(Error::domain(format!("edge cost must be finite and >= 0, got {cost}")));
        }
        for (x, y) in [(a, b), (b, a)] {
            let list = &mut self.adj[x];
            match list.binary_search_by_key(&y, |e| e.0) {
                Ok(i) => list[i].1 = cost,
                Err(i) => list.insert(i, (y, cost)),
            }
        }
        Ok(())
    }

    /// Returns whether the edge existed.
    pub fn remove_edge(&mut self, a: NodeId, b: NodeId) -> bool {
        let mut removed = false;
        for (x, y) in [(a, b), (b, a)] {
            if let Some(list) = self.adj.get_mut(x) {
                if let Ok(i) = list.binary_search_by_key(&y, |e| e.0) {
                    list.remove(i);
                    removed = true;
                }
            }
        }
        removed
    }

    pub fn edge_cost(&self, a: NodeId, b: NodeId) -> Option<f64> {
        let list = self.adj.get(a)?;
        list.binary_search_by_key(&b, |e| e.0).ok().map(|i| list[i].1)
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edge_cost(a, b).is_some()
    }

    /// Neighbors in increasing id order.
    pub fn neighbors(&self, n: NodeId) -> &[(NodeId, f64)] {
        &self.adj[n]
    }

    /// Each edge once, as `(a, b, cost)` with `a < b`.
    pub fn edges(&self) -> Vec<(NodeId, NodeId, f64)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |(b, _)| a < *b).map(move |(b, c)| (a, *b, *c)))
            .collect()
    }

    /// Nodes reachable from `src`, optionally pretending one node is absent.
    pub fn reachable_from(&self, src: NodeId, without: Option<NodeId>) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::from([src]);
        let mut queue = VecDeque::from([src]);
        while let Some(n) = queue.pop_front() {
            for &(m, _) in &self.adj[n] {
                if Some(m) != without && seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        seen
    }

    /// Cost of a node sequence, or `None` if some hop is not an edge.
    pub fn path_cost(&self, path: &[NodeId]) -> Option<f64> {
        path.windows(2).map(|w| self.edge_cost(w[0], w[1])).sum()
    }
}

// ---------------------------------------------------------------------------
// Topologies

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    /// Every UAV talks only to the ground station.
    Star,
    /// Star of stars: slaves talk to their group master, masters to the
    /// ground station.
    MultiStar,
    /// One ad hoc mesh whose master is the only gateway to the ground.
    SingleGroupAdHoc,
    /// Several meshes, each with its own gateway master; groups meet only at
    /// the ground station.
    MultiGroupAdHoc,
    /// Several meshes whose masters form a second mesh; one gateway master
    /// talks to the ground station.
    MultiLayerAdHoc,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 5] = [
        TopologyKind::Star,
        TopologyKind::MultiStar,
        TopologyKind::SingleGroupAdHoc,
        TopologyKind::MultiGroupAdHoc,
        TopologyKind::MultiLayerAdHoc,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    GroundStation,
    MasterUav,
    SlaveUav,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyGraph {
    pub kind: TopologyKind,
    pub roles: Vec<NodeRole>,
    /// Group of each UAV; `None` for the ground station.
    pub groups: Vec<Option<usize>>,
    pub positions: Vec<Vec3>,
    pub graph: Graph,
}

/// Splits UAVs `1..=n` into `g` contiguous groups; the first `n mod g`
/// groups take one extra member.
pub fn partition_groups(n_uavs: usize, n_groups: usize) -> Vec<Vec<NodeId>> {
    let (base, extra) = (n_uavs / n_groups, n_uavs % n_groups);
    let mut next = 1;
    (0..n_groups)
        .map(|g| {
            let size = base + usize::from(g < extra);
            let members = (next..next + size).collect();
            next += size;
            members
        })
        .collect()
}

fn dist(p: &[Vec3], a: NodeId, b: NodeId) -> f64 {
    (p[a] - p[b]).norm()
}

/// Member closest to the ground station, lowest id on ties.
fn closest_to_ground(members: &[NodeId], p: &[Vec3]) -> NodeId {
    *members
        .iter()
        .min_by(|&&a, &&b| {
            dist(p, a, GROUND_STATION)
                .total_cmp(&dist(p, b, GROUND_STATION))
                .then(a.cmp(&b))
        })
        .expect("groups are non-empty")
}

struct Builder<'a> {
    graph: Graph,
    positions: &'a [Vec3],
    range: f64,
}

impl Builder<'_> {
    fn in_range(&self, a: NodeId, b: NodeId) -> bool {
        dist(self.positions, a, b) <= self.range
    }

    /// Links `a–b` if in range; reports whether it did.
    fn link(&mut self, a: NodeId, b: NodeId) -> bool {
        if !self.in_range(a, b) {
            return false;
        }
        let d = dist(self.positions, a, b);
        self.graph.add_edge(a, b, d).expect("ids and distance are valid");
        true
    }

    fn mesh(&mut self, members: &[NodeId]) {
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                self.link(a, b);
            }
        }
    }

    /// Members of `set` not connected to `anchor` through `set` alone.
    fn cut_off(&self, set: &[NodeId], anchor: NodeId) -> Vec<NodeId> {
        let allowed: BTreeSet<NodeId> = set.iter().copied().collect();
        let mut seen = BTreeSet::from([anchor]);
        let mut queue = VecDeque::from([anchor]);
        while let Some(n) = queue.pop_front() {
            for &(m, _) in self.graph.neighbors(n) {
                if allowed.contains(&m) && seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        set.iter().copied().filter(|n| !seen.contains(n)).collect()
    }
}

/// Builds a topology over `positions` (index 0 is the ground station) with
/// Euclidean edge costs. Only links of length `≤ link_range` are created.
///
/// Masters are the group member closest to the ground station. Fails with
/// [`Error::Infeasible`] listing every UAV that cannot reach its legal
/// neighbors.
pub fn build_topology(
    kind: TopologyKind,
    n_uavs: usize,
    n_groups: usize,
    link_range: f64,
    positions: &[Vec3],
) -> Result<TopologyGraph> {
    if n_uavs == 0 {
        return Err(Error::domain("n_uavs must be >= 1"));
    }
    if n_groups == 0 || n_groups > n_uavs {
        return Err(Error::domain(format!(
            "n_groups must lie in 1..={n_uavs}, got {n_groups}"
        )));
    }
    if positions.len() != n_uavs + 1 {
        return Err(Error::domain(format!(
            "expected {} positions (ground station first), got {}",
            n_uavs + 1,
            positions.len()
        )));
    }
    if !(link_range > 0.0) {
        return Err(Error::domain("link_range must be > 0"));
    }
    let n_groups = match kind {
        TopologyKind::Star | TopologyKind::SingleGroupAdHoc => {
            if n_groups != 1 {
                return Err(Error::domain(format!("{kind:?} has exactly one group, got {n_groups}")));
            }
            1
        }
        _ => n_groups,
    };

    let groups = partition_groups(n_uavs, n_groups);
    let mut roles = vec![NodeRole::SlaveUav; n_uavs + 1];
    roles[GROUND_STATION] = NodeRole::GroundStation;
    let mut group_of = vec![None; n_uavs + 1];
    for (g, members) in groups.iter().enumerate() {
        for &m in members {
            group_of[m] = Some(g);
        }
    }
    let masters: Vec<NodeId> = groups.iter().map(|m| closest_to_ground(m, positions)).collect();
    if kind != TopologyKind::Star {
        for &m in &masters {
            roles[m] = NodeRole::MasterUav;
        }
    }

    let mut b = Builder {
        graph: Graph::new(n_uavs + 1),
        positions,
        range: link_range,
    };
    let mut orphans = BTreeSet::new();
    match kind {
        TopologyKind::Star => {
            for u in 1..=n_uavs {
                if !b.link(GROUND_STATION, u) {
                    orphans.insert(u);
                }
            }
        }
        TopologyKind::MultiStar => {
            for (members, &master) in groups.iter().zip(&masters) {
                if !b.link(GROUND_STATION, master) {
                    orphans.insert(master);
                }
                for &s in members.iter().filter(|&&s| s != master) {
                    if !b.link(master, s) {
                        orphans.insert(s);
                    }
                }
            }
        }
        TopologyKind::SingleGroupAdHoc | TopologyKind::MultiGroupAdHoc => {
            for (members, &master) in groups.iter().zip(&masters) {
                if !b.link(GROUND_STATION, master) {
                    orphans.insert(master);
                }
                b.mesh(members);
                orphans.extend(b.cut_off(members, master));
            }
        }
        TopologyKind::MultiLayerAdHoc => {
            for (members, &master) in groups.iter().zip(&masters) {
                b.mesh(members);
                orphans.extend(b.cut_off(members, master));
            }
            b.mesh(&masters);
            let gateway = closest_to_ground(&masters, positions);
            if !b.link(GROUND_STATION, gateway) {
                orphans.insert(gateway);
            }
            orphans.extend(b.cut_off(&masters, gateway));
        }
    }
    if !orphans.is_empty() {
        return Err(Error::Infeasible {
            orphans: orphans.into_iter().collect(),
        });
    }

    let topo = TopologyGraph {
        kind,
        roles,
        groups: group_of,
        positions: positions.to_vec(),
        graph: b.graph,
    };
    validate_structure(&topo)?;
    Ok(topo)
}

fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

/// Checks the structural invariants of `t.kind`.
pub fn validate_structure(t: &TopologyGraph) -> Result<()> {
    let g = &t.graph;
    let n = g.node_count();
    if t.roles.len() != n || t.groups.len() != n || t.positions.len() != n {
        return Err(structural("roles, groups and positions must cover every node"));
    }
    let grounds: Vec<NodeId> = (0..n).filter(|&i| t.roles[i] == NodeRole::GroundStation).collect();
    if grounds != [GROUND_STATION] {
        return Err(structural(format!(
            "exactly one ground station at node 0 required, found {grounds:?}"
        )));
    }
    if g.reachable_from(GROUND_STATION, None).len() != n {
        return Err(structural("graph is not connected"));
    }
    let masters: Vec<NodeId> = (0..n).filter(|&i| t.roles[i] == NodeRole::MasterUav).collect();
    let ground_nbrs: Vec<NodeId> = g.neighbors(GROUND_STATION).iter().map(|e| e.0).collect();
    let uav_edges = || g.edges().into_iter().filter(|(a, _, _)| *a != GROUND_STATION);

    match t.kind {
        TopologyKind::Star => {
            if uav_edges().next().is_some() {
                return Err(structural("star: UAV-UAV edge present"));
            }
        }
        TopologyKind::MultiStar => {
            if ground_nbrs.iter().any(|m| t.roles[*m] != NodeRole::MasterUav) {
                return Err(structural("multi-star: ground station linked to a non-master"));
            }
            for (a, b, _) in uav_edges() {
                let master_slave = (t.roles[a] == NodeRole::MasterUav) != (t.roles[b] == NodeRole::MasterUav);
                if !master_slave || t.groups[a] != t.groups[b] {
                    return Err(structural(format!("multi-star: illegal edge {a}-{b}")));
                }
            }
        }
        TopologyKind::SingleGroupAdHoc => {
            if ground_nbrs.len() != 1 || t.roles[ground_nbrs[0]] != NodeRole::MasterUav || masters.len() != 1 {
                return Err(structural(
                    "single-group: ground station must have exactly one master neighbor",
                ));
            }
        }
        TopologyKind::MultiGroupAdHoc => {
            if ground_nbrs.iter().any(|m| t.roles[*m] != NodeRole::MasterUav) {
                return Err(structural("multi-group: ground station linked to a non-master"));
            }
            if let Some((a, b, _)) = uav_edges().find(|(a, b, _)| t.groups[*a] != t.groups[*b]) {
                return Err(structural(format!(
                    "multi-group: inter-group edge {a}-{b} bypasses the ground station"
                )));
            }
        }
        TopologyKind::MultiLayerAdHoc => {
            if ground_nbrs.len() != 1 || t.roles[ground_nbrs[0]] != NodeRole::MasterUav {
                return Err(structural(
                    "multi-layer: ground station must link to exactly one gateway master",
                ));
            }
            let mut layer = Graph::new(n);
            for (a, b, c) in uav_edges() {
                if t.roles[a] == NodeRole::MasterUav && t.roles[b] == NodeRole::MasterUav {
                    layer.add_edge(a, b, c)?;
                }
            }
            if layer.reachable_from(masters[0], None).len() != masters.len() {
                return Err(structural("multi-layer: master layer is not connected"));
            }
            if n > 1 && g.reachable_from(1, Some(GROUND_STATION)).len() != n - 1 {
                return Err(structural("multi-layer: UAV graph depends on the ground station"));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shortest paths

/// Outcome of a single-pair search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSearch {
    /// `None` when `dst` is unreachable.
    pub path: Option<Vec<NodeId>>,
    pub cost: f64,
    /// Nodes in the order they were settled.
    pub expanded: Vec<NodeId>,
}

fn unwind(prev: &[Option<NodeId>], dst: NodeId) -> Vec<NodeId> {
    let mut path = vec![dst];
    while let Some(p) = prev[*path.last().expect("non-empty")] {
        path.push(p);
    }
    path.reverse();
    path
}

/// Dijkstra from `src`, stopping when `dst` is settled. Equal distances are
/// settled in increasing id order.
pub fn dijkstra(graph: &Graph, src: NodeId, dst: NodeId) -> Result<PathSearch> {
    graph.check(src)?;
    graph.check(dst)?;
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::from([Reverse((OrderedFloat(0.0), src))]);
    dist[src] = 0.0;
    let mut expanded = Vec::new();
    while let Some(Reverse((OrderedFloat(d), u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        expanded.push(u);
        if u == dst {
            return Ok(PathSearch {
                path: Some(unwind(&prev, dst)),
                cost: d,
                expanded,
            });
        }
        for &(v, c) in graph.neighbors(u) {
            let nd = d + c;
            if nd < dist[v] {
                dist[v] = nd;
                prev[v] = Some(u);
                heap.push(Reverse((OrderedFloat(nd), v)));
            }
        }
    }
    Ok(PathSearch {
        path: None,
        cost: f64::INFINITY,
        expanded,
    })
}

/// A* with heuristic `h(n)` estimating the remaining cost to `dst`.
///
/// `h` must never overestimate. Closed nodes are reopened when a cheaper
/// route appears, so merely admissible heuristics still give optimal paths.
/// Equal `f` values pop lower `h` first, then lower id.
pub fn astar<H: Fn(NodeId) -> f64>(graph: &Graph, src: NodeId, dst: NodeId, h: H) -> Result<PathSearch> {
    graph.check(src)?;
    graph.check(dst)?;
    let n = graph.node_count();
    let mut g = vec![f64::INFINITY; n];
    let mut prev = vec![None; n];
    let mut closed_at = vec![f64::INFINITY; n];
    g[src] = 0.0;
    let hs = h(src);
    let mut open = BinaryHeap::from([Reverse((OrderedFloat(hs), OrderedFloat(hs), src))]);
    let mut expanded = Vec::new();
    while let Some(Reverse((_, _, u))) = open.pop() {
        // Stale entry: u was already expanded with this or a cheaper g.
        if closed_at[u] <= g[u] {
            continue;
        }
        closed_at[u] = g[u];
        expanded.push(u);
        if u == dst {
            return Ok(PathSearch {
                path: Some(unwind(&prev, dst)),
                cost: g[u],
                expanded,
            });
        }
        for &(v, c) in graph.neighbors(u) {
            let ng = g[u] + c;
            if ng < g[v] {
                g[v] = ng;
                prev[v] = Some(u);
                let hv = h(v);
                open.push(Reverse((OrderedFloat(ng + hv), OrderedFloat(hv), v)));
            }
        }
    }
    Ok(PathSearch {
        path: None,
        cost: f64::INFINITY,
        expanded,
    })
}

/// Straight-line distance to `dst`; admissible when edge costs are at least
/// the Euclidean length of the edge.
pub fn euclidean_heuristic(positions: &[Vec3], dst: NodeId) -> impl Fn(NodeId) -> f64 + '_ {
    move |n| (positions[n] - positions[dst]).norm()
}

/// Occupancy grid searched with 8-connected moves. A diagonal move is allowed
/// only if both orthogonal cells it passes are free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMap {
    pub width: usize,
    pub height: usize,
    blocked: Vec<bool>,
}

impl GridMap {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            blocked: vec![false; width * height],
        }
    }

    /// Blocks each cell with probability `density`, except `keep_free`.
    pub fn random(width: usize, height: usize, density: f64, seed: u64, keep_free: &[(usize, usize)]) -> Self {
        let mut rng = rng_from_seed(seed);
        let mut g = Self::new(width, height);
        for i in 0..width * height {
            g.blocked[i] = rng.unit() < density;
        }
        for &(r, c) in keep_free {
            g.set_blocked(r, c, false);
        }
        g
    }

    pub fn index(&self, row: usize, col: usize) -> NodeId {
        row * self.width + col
    }

    pub fn cell(&self, id: NodeId) -> (usize, usize) {
        (id / self.width, id % self.width)
    }

    pub fn set_blocked(&mut self, row: usize, col: usize, blocked: bool) {
        let i = self.index(row, col);
        self.blocked[i] = blocked;
    }

    pub fn is_free(&self, row: usize, col: usize) -> bool {
        !self.blocked[self.index(row, col)]
    }

    /// Graph over all cells (blocked ones isolated) and cell-centre positions.
    pub fn to_graph(&self) -> (Graph, Vec<Vec3>) {
        let mut g = Graph::new(self.width * self.height);
        let positions = (0..self.width * self.height)
            .map(|i| {
                let (r, c) = self.cell(i);
                Vec3::new(c as f64, r as f64, 0.0)
            })
            .collect();
        let (h, w) = (self.height as isize, self.width as isize);
        let free = |r: isize, c: isize| r >= 0 && c >= 0 && r < h && c < w && self.is_free(r as usize, c as usize);
        for r in 0..h {
            for c in 0..w {
                if !free(r, c) {
                    continue;
                }
                // Forward half of the neighborhood, so each edge is added once.
                for (dr, dc) in [(0, 1), (1, -1), (1, 0), (1, 1)] {
                    let (nr, nc) = (r + dr, c + dc);
                    if !free(nr, nc) {
                        continue;
                    }
                    let diagonal = dr != 0 && dc != 0;
                    if diagonal && !(free(r + dr, c) && free(r, c + dc)) {
                        continue;
                    }
                    let cost = if diagonal { std::f64::consts::SQRT_2 } else { 1.0 };
                    g.add_edge(
                        self.index(r as usize, c as usize),
                        self.index(nr as usize, nc as usize),
                        cost,
                    )
                    .expect("grid edge is valid");
                }
            }
        }
        (g, positions)
    }
}

// ---------------------------------------------------------------------------
// Propagation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    pub delivered: BTreeSet<NodeId>,
    pub total_messages: usize,
    /// Path length for routing, deepest layer reached for flooding.
    pub hop_count: usize,
    /// Routing only; `None` on no route or for flooding.
    pub path: Option<Vec<NodeId>>,
    /// Hop count at which each delivered node first got the message.
    pub arrival_hops: BTreeMap<NodeId, usize>,
}

impl PropagationResult {
    pub fn reached(&self, n: NodeId) -> bool {
        self.delivered.contains(&n)
    }
}

/// Unicast along the Dijkstra path; one transmission per hop. An unreachable
/// `dst` gives the explicit no-route result: only `src` holds the message.
pub fn route_shortest(graph: &Graph, src: NodeId, dst: NodeId) -> Result<PropagationResult> {
    let search = dijkstra(graph, src, dst)?;
    Ok(match search.path {
        Some(path) => PropagationResult {
            delivered: path.iter().copied().collect(),
            total_messages: path.len() - 1,
            hop_count: path.len() - 1,
            arrival_hops: path.iter().enumerate().map(|(i, n)| (*n, i)).collect(),
            path: Some(path),
        },
        None => PropagationResult {
            delivered: BTreeSet::from([src]),
            total_messages: 0,
            hop_count: 0,
            path: None,
            arrival_hops: BTreeMap::from([(src, 0)]),
        },
    })
}

/// Synchronous-round flooding with duplicate suppression.
///
/// A node forwards once, on first receipt, to every neighbor except the one
/// it heard from; each such transmission counts as one message. Nodes first
/// reached at hop `ttl` do not forward. When several senders reach a node in
/// the same round the lowest-id sender counts as its parent.
pub fn flood(graph: &Graph, src: NodeId, ttl: usize) -> Result<PropagationResult> {
    graph.check(src)?;
    let mut arrival = BTreeMap::from([(src, 0usize)]);
    let mut frontier: Vec<(NodeId, Option<NodeId>)> = vec![(src, None)];
    let mut messages = 0;
    let mut depth = 0;
    while depth < ttl && !frontier.is_empty() {
        let mut next = BTreeMap::new();
        for &(node, parent) in &frontier {
            for &(m, _) in graph.neighbors(node) {
                if Some(m) == parent {
                    continue;
                }
                messages += 1;
                if !arrival.contains_key(&m) {
                    next.entry(m).or_insert(node);
                }
            }
        }
        depth += 1;
        for &m in next.keys() {
            arrival.insert(m, depth);
        }
        frontier = next.into_iter().map(|(m, p)| (m, Some(p))).collect();
    }
    Ok(PropagationResult {
        delivered: arrival.keys().copied().collect(),
        total_messages: messages,
        hop_count: arrival.values().copied().max().unwrap_or(0),
        path: None,
        arrival_hops: arrival,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationMetrics {
    pub reached: bool,
    /// Hops until `dst` first holds the message.
    pub hops_to_dst: Option<usize>,
    pub messages: usize,
    pub nodes_involved: usize,
    /// `hops_to_dst × per-hop delay`, s.
    pub latency_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationComparison {
    pub src: NodeId,
    pub dst: NodeId,
    pub routing: PropagationMetrics,
    pub flooding: PropagationMetrics,
    pub path: Option<Vec<NodeId>>,
}

fn metrics(r: &PropagationResult, dst: NodeId, per_hop_delay: f64) -> PropagationMetrics {
    let hops = r.arrival_hops.get(&dst).copied();
    PropagationMetrics {
        reached: r.reached(dst),
        hops_to_dst: hops,
        messages: r.total_messages,
        nodes_involved: r.delivered.len(),
        latency_s: hops.map(|h| h as f64 * per_hop_delay),
    }
}

/// Routing against unlimited flooding (TTL = node count) on the same graph.
pub fn compare_propagation(
    graph: &Graph,
    src: NodeId,
    dst: NodeId,
    per_hop_delay: f64,
) -> Result<PropagationComparison> {
    let routed = route_shortest(graph, src, dst)?;
    let flooded = flood(graph, src, graph.node_count())?;
    Ok(PropagationComparison {
        src,
        dst,
        routing: metrics(&routed, dst, per_hop_delay),
        flooding: metrics(&flooded, dst, per_hop_delay),
        path: routed.path,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkFailureReport {
    pub removed_edge: (NodeId, NodeId),
    pub stale_path: Vec<NodeId>,
    /// Whether the previously computed route still works.
    pub stale_route_valid: bool,
    pub flooding_delivers: bool,
    pub recomputed: Option<Vec<NodeId>>,
}

/// Breaks one link of the current route, preferring the first one whose loss
/// leaves `dst` reachable, then checks the stale route, flooding and a
/// recomputed route. Returns `None` when `src` and `dst` are not connected
/// by a path of at least one hop.
pub fn link_failure(graph: &Graph, src: NodeId, dst: NodeId) -> Result<Option<LinkFailureReport>> {
    let Some(path) = dijkstra(graph, src, dst)?.path else {
        return Ok(None);
    };
    if path.len() < 2 {
        return Ok(None);
    }
    let hops: Vec<(NodeId, NodeId)> = path.windows(2).map(|w| (w[0], w[1])).collect();
    let survivable = hops.iter().copied().find(|&(a, b)| {
        let mut g = graph.clone();
        g.remove_edge(a, b);
        g.reachable_from(src, None).contains(&dst)
    });
    let (a, b) = survivable.unwrap_or(hops[0]);
    let mut broken = graph.clone();
    broken.remove_edge(a, b);
    Ok(Some(LinkFailureReport {
        removed_edge: (a, b),
        stale_route_valid: broken.path_cost(&path).is_some(),
        stale_path: path,
        flooding_delivers: flood(&broken, src, broken.node_count())?.reached(dst),
        recomputed: dijkstra(&broken, src, dst)?.path,
    }))
}

// ---------------------------------------------------------------------------
// Artificial potential field

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub center: Vec3,
    pub radius: f64,
}

impl Obstacle {
    /// Distance from the surface; negative inside.
    pub fn clearance(&self, p: &Vec3) -> f64 {
        (p - self.center).norm() - self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleField {
    pub obstacles: Vec<Obstacle>,
    pub goal: Vec3,
    pub bounds_min: Vec3,
    pub bounds_max: Vec3,
}

impl ObstacleField {
    pub fn validate(&self) -> Result<()> {
        if self.obstacles.iter().any(|o| !(o.radius > 0.0)) {
            return Err(Error::domain("obstacle radii must be > 0"));
        }
        if (0..3).any(|i| self.bounds_min[i] > self.bounds_max[i]) {
            return Err(Error::domain("bounds_min must be <= bounds_max"));
        }
        Ok(())
    }

    pub fn min_clearance(&self, p: &Vec3) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.clearance(p))
            .fold(f64::INFINITY, f64::min)
    }

    fn in_bounds(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.bounds_min[i] && p[i] <= self.bounds_max[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApfParams {
    /// `k_a` in `½·k_a·|x − goal|²`.
    pub attract_gain: f64,
    /// `k_r` in `½·k_r·(1/ρ − 1/ρ0)²`.
    pub repel_gain: f64,
    /// `ρ0`: obstacles farther than this from the surface exert no force.
    pub influence_radius: f64,
    /// Largest displacement per step.
    pub step: f64,
    pub max_steps: usize,
    /// Goal reached within this distance.
    pub goal_tolerance: f64,
    /// A step shorter than this away from the goal is a local minimum.
    pub stall_tolerance: f64,
}

impl Default for ApfParams {
    fn default() -> Self {
        Self {
            attract_gain: 0.5,
            repel_gain: 5.0,
            influence_radius: 2.0,
            step: 0.2,
            max_steps: 2000,
            goal_tolerance: 0.05,
            stall_tolerance: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApfOutcome {
    ReachedGoal,
    LocalMinimum,
    StepLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApfSample {
    pub position: Vec3,
    pub potential: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApfResult {
    pub trajectory: Vec<ApfSample>,
    pub outcome: ApfOutcome,
}

/// Total potential; infinite on or inside an obstacle.
pub fn apf_potential(p: &Vec3, field: &ObstacleField, params: &ApfParams) -> f64 {
    let mut u = 0.5 * params.attract_gain * (p - field.goal).norm_squared();
    for o in &field.obstacles {
        let rho = o.clearance(p);
        if rho <= 0.0 {
            return f64::INFINITY;
        }
        if rho < params.influence_radius {
            u += 0.5 * params.repel_gain * (1.0 / rho - 1.0 / params.influence_radius).powi(2);
        }
    }
    u
}

pub fn apf_gradient(p: &Vec3, field: &ObstacleField, params: &ApfParams) -> Vec3 {
    let mut g = (p - field.goal) * params.attract_gain;
    for o in &field.obstacles {
        let rho = o.clearance(p);
        if rho > 0.0 && rho < params.influence_radius {
            let outward = (p - o.center).normalize();
            g -= outward * (params.repel_gain * (1.0 / rho - 1.0 / params.influence_radius) / (rho * rho));
        }
    }
    g
}

/// Descends the potential from `start`.
///
/// Each step moves along `−∇U`, capped at `step`, and is halved until the
/// potential decreases and the point stays in bounds, so the path never
/// touches an obstacle.
pub fn apf_plan(start: Vec3, field: &ObstacleField, params: &ApfParams) -> Result<ApfResult> {
    field.validate()?;
    if !(params.step > 0.0 && params.influence_radius > 0.0 && params.attract_gain > 0.0 && params.repel_gain >= 0.0) {
        return Err(Error::domain("APF gains, step and influence radius must be positive"));
    }
    if !field.in_bounds(&start) {
        return Err(Error::domain("start lies outside the bounds"));
    }
    if field.min_clearance(&start) <= 0.0 {
        return Err(Error::domain("start lies inside an obstacle"));
    }

    let mut x = start;
    let mut u = apf_potential(&x, field, params);
    let mut trajectory = vec![ApfSample {
        position: x,
        potential: u,
    }];
    for _ in 0..params.max_steps {
        if (x - field.goal).norm() <= params.goal_tolerance {
            return Ok(ApfResult {
                trajectory,
                outcome: ApfOutcome::ReachedGoal,
            });
        }
        let grad = apf_gradient(&x, field, params);
        let mut delta = -grad;
        let len = delta.norm();
        if len > params.step {
            delta *= params.step / len;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let cand = x + delta;
            let uc = apf_potential(&cand, field, params);
            if field.in_bounds(&cand) && uc < u {
                accepted = Some((cand, uc));
                break;
            }
            delta *= 0.5;
        }
        let Some((next, un)) = accepted else {
            return Ok(ApfResult {
                trajectory,
                outcome: ApfOutcome::LocalMinimum,
            });
        };
        let moved = (next - x).norm();
        x = next;
        u = un;
        trajectory.push(ApfSample {
            position: x,
            potential: u,
        });
        if moved < params.stall_tolerance && (x - field.goal).norm() > params.goal_tolerance {
            return Ok(ApfResult {
                trajectory,
                outcome: ApfOutcome::LocalMinimum,
            });
        }
    }
    let outcome = if (x - field.goal).norm() <= params.goal_tolerance {
        ApfOutcome::ReachedGoal
    } else {
        ApfOutcome::StepLimit
    };
    Ok(ApfResult { trajectory, outcome })
}
