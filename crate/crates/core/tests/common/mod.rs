// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Brute-force oracles shared by the integration tests. None of these use
//! the library's graph algorithms.

#![allow(dead_code)]

use rand::Rng;
use steiner_cnot::CouplingGraph;

/// Dense weighted adjacency of the alive part of `g`; `None` where there is
/// no edge.
pub fn dense(g: &CouplingGraph) -> Vec<Vec<Option<f64>>> {
    let n = g.capacity();
    let mut adj = vec![vec![None; n]; n];
    for (_, u, v, w) in g.edges() {
        adj[u][v] = Some(w);
        adj[v][u] = Some(w);
    }
    adj
}

/// Whether the vertices in `mask` induce a connected subgraph.
pub fn mask_connected(adj: &[Vec<Option<f64>>], mask: u64) -> bool {
    if mask == 0 {
        return true;
    }
    let start = mask.trailing_zeros() as usize;
    let mut seen = 1u64 << start;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for (v, edge) in adj[u].iter().enumerate() {
            if mask >> v & 1 == 1 && seen >> v & 1 == 0 && edge.is_some() {
                seen |= 1 << v;
                stack.push(v);
            }
        }
    }
    seen == mask
}

/// Prim's algorithm on the subgraph induced by `mask` (assumed connected).
pub fn induced_mst_weight(adj: &[Vec<Option<f64>>], mask: u64) -> f64 {
    let verts: Vec<usize> = (0..adj.len()).filter(|&v| mask >> v & 1 == 1).collect();
    if verts.len() <= 1 {
        return 0.0;
    }
    let mut in_tree = vec![false; adj.len()];
    let mut best = vec![f64::INFINITY; adj.len()];
    best[verts[0]] = 0.0;
    let mut total = 0.0;
    for _ in 0..verts.len() {
        let u = *verts
            .iter()
            .filter(|&&v| !in_tree[v])
            .min_by(|&&a, &&b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[u] = true;
        total += best[u];
        for &v in &verts {
            if let Some(w) = adj[u][v] {
                if !in_tree[v] && w < best[v] {
                    best[v] = w;
                }
            }
        }
    }
    total
}

/// Exact minimum Steiner tree weight: the cheapest spanning tree over all
/// connected vertex sets containing the terminals.
pub fn steiner_optimum(g: &CouplingGraph, terminals: &[usize]) -> f64 {
    let adj = dense(g);
    let alive: Vec<usize> = g.vertices().collect();
    let term_mask: u64 = terminals.iter().map(|&t| 1u64 << t).sum();
    let optional: Vec<usize> = alive
        .into_iter()
        .filter(|v| term_mask >> v & 1 == 0)
        .collect();
    let mut best = f64::INFINITY;
    for pick in 0u64..(1 << optional.len()) {
        let mut mask = term_mask;
        for (i, &v) in optional.iter().enumerate() {
            if pick >> i & 1 == 1 {
                mask |= 1 << v;
            }
        }
        if mask_connected(&adj, mask) {
            best = best.min(induced_mst_weight(&adj, mask));
        }
    }
    best
}

/// Cut vertices by deleting each vertex in turn; `None` if the graph itself
/// is disconnected.
pub fn brute_cut_vertices(adj: &[Vec<Option<f64>>], alive: u64) -> Option<Vec<usize>> {
    if !mask_connected(adj, alive) {
        return None;
    }
    Some(
        (0..adj.len())
            .filter(|&v| alive >> v & 1 == 1 && !mask_connected(adj, alive & !(1 << v)))
            .collect(),
    )
}

/// Random graph on `n` vertices with edge probability `p` and integer weights
/// in `1..=max_w` (all 1 when `max_w == 1`).
pub fn random_graph<R: Rng>(n: usize, p: f64, max_w: u32, rng: &mut R) -> CouplingGraph {
    let mut g = CouplingGraph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(u, v, rng.gen_range(1..=max_w) as f64).unwrap();
            }
        }
    }
    g
}

/// Random connected graph: a random spanning tree plus extra edges.
pub fn random_connected_graph<R: Rng>(n: usize, p: f64, max_w: u32, rng: &mut R) -> CouplingGraph {
    let mut g = CouplingGraph::new(n);
    for v in 1..n {
        let u = rng.gen_range(0..v);
        g.add_edge(u, v, rng.gen_range(1..=max_w) as f64).unwrap();
    }
    for u in 0..n {
        for v in u + 1..n {
            if !g.has_edge(u, v) && rng.gen_bool(p) {
                g.add_edge(u, v, rng.gen_range(1..=max_w) as f64).unwrap();
            }
        }
    }
    g
}

/// Topologies from every generator with at most `max_n` qubits.
pub fn small_generator_graphs(max_n: usize) -> Vec<steiner_cnot::Topology> {
    use steiner_cnot::Topology;
    let mut out = Vec::new();
    for n in 1..=max_n {
        out.push(Topology::Line(n));
        out.push(Topology::Complete(n));
    }
    for r in 1..=max_n {
        for c in 1..=max_n {
            if r * c <= max_n && r * c >= 2 {
                out.push(Topology::Grid(r, c));
            }
        }
    }
    for m in 2..=max_n {
        for b in 1..=2 {
            if 2 * m + b - 1 <= max_n {
                out.push(Topology::Barbell(m, b));
            }
        }
    }
    for r in 1..=3 {
        for c in 1..=3 {
            let t = Topology::HeavyHex(r, c);
            if t.qubits() <= max_n {
                out.push(t);
            }
        }
    }
    out
}

/// Outcome of an oracle sweep.
#[derive(Debug, Default, Clone)]
pub struct Sweep {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl Sweep {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn fail(&mut self, msg: String) {
        if self.violations.len() < 20 {
            self.violations.push(msg);
        }
    }
}

/// Structural checks on a Steiner tree plus the `2 - 2/|S|` bound against
/// the exhaustive optimum, for every terminal set of size at least 2.
pub fn check_steiner_all_terminal_sets(g: &CouplingGraph, label: &str, sweep: &mut Sweep) {
    let alive: Vec<usize> = g.vertices().collect();
    let k = alive.len();
    for pick in 0u64..(1 << k) {
        if pick.count_ones() < 2 {
            continue;
        }
        let terminals: Vec<usize> = (0..k)
            .filter(|&i| pick >> i & 1 == 1)
            .map(|i| alive[i])
            .collect();
        check_steiner(g, &terminals, label, sweep);
    }
}

pub fn check_steiner(g: &CouplingGraph, terminals: &[usize], label: &str, sweep: &mut Sweep) {
    sweep.checked += 1;
    let tree = match g.steiner_tree(terminals) {
        Ok(t) => t,
        Err(e) => return sweep.fail(format!("{label} {terminals:?}: {e}")),
    };
    let edges = tree.edges();
    if edges.len() + 1 != tree.nodes().len() {
        return sweep.fail(format!("{label} {terminals:?}: not a tree"));
    }
    if let Some(&(p, c)) = edges.iter().find(|&&(p, c)| !g.has_edge(p, c)) {
        return sweep.fail(format!("{label} {terminals:?}: ({p},{c}) is not an edge"));
    }
    if let Some(t) = terminals.iter().find(|&&t| !tree.contains(t)) {
        return sweep.fail(format!("{label} {terminals:?}: terminal {t} missing"));
    }
    let weight = tree.weight(g);
    let opt = steiner_optimum(g, terminals);
    let bound = (2.0 - 2.0 / terminals.len() as f64) * opt;
    if weight > bound + 1e-9 || weight < opt - 1e-9 {
        sweep.fail(format!(
            "{label} {terminals:?}: weight {weight}, optimum {opt}"
        ));
    }
}

/// Compares `articulation_points` with vertex deletion on every labelled
/// graph with `n` vertices.
pub fn check_articulation_exhaustive(n: usize, sweep: &mut Sweep) {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let full = (1u64 << n) - 1;
    for pick in 0u64..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = (0..pairs.len())
            .filter(|&i| pick >> i & 1 == 1)
            .map(|i| pairs[i])
            .collect();
        let g = CouplingGraph::from_edges(n, &edges).unwrap();
        check_articulation(&g, full, sweep);
    }
}

/// Same comparison on one graph whose alive vertices are `alive`.
pub fn check_articulation(g: &CouplingGraph, alive: u64, sweep: &mut Sweep) {
    sweep.checked += 1;
    let expected = brute_cut_vertices(&dense(g), alive);
    let got = g.articulation_points().ok();
    if got != expected {
        let edges: Vec<(usize, usize)> = g.edges().map(|(_, u, v, _)| (u, v)).collect();
        sweep.fail(format!(
            "edges {edges:?}: got {got:?}, expected {expected:?}"
        ));
    }
}

/// Random graphs with 1..=max_n vertices, some with deleted vertices.
pub fn check_articulation_random<R: Rng>(
    max_n: usize,
    count: usize,
    rng: &mut R,
    sweep: &mut Sweep,
) {
    for _ in 0..count {
        let n = rng.gen_range(1..=max_n);
        let p = rng.gen_range(0.05..0.6);
        let mut g = random_graph(n, p, 1, rng);
        let mut alive = (1u64 << n) - 1;
        if n > 2 && rng.gen_bool(0.3) {
            let v = rng.gen_range(0..n);
            g.delete_vertex(v).unwrap();
            alive &= !(1 << v);
        }
        check_articulation(&g, alive, sweep);
    }
}
