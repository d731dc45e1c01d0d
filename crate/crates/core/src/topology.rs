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

//! Coupling graphs, topology generators, cut vertices and Steiner trees.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("vertex {0} is not in the graph")]
    MissingVertex(usize),
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) already exists")]
    ParallelEdge(usize, usize),
    #[error("edge weight {0} must be finite and non-negative")]
    BadWeight(f64),
    #[error("graph is not connected")]
    Disconnected,
    #[error("terminal set is empty")]
    NoTerminals,
    #[error("cannot add {requested} edges, only {available} vertex pairs are free")]
    TooManyEdges { requested: usize, available: usize },
    #[error("root {root} must be the largest terminal under the ordering")]
    BadRoot { root: usize },
    #[error("invalid topology description: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq)]
struct Edge {
    u: usize,
    v: usize,
    weight: f64,
    alive: bool,
}

/// Undirected simple graph over qubit indices with mutable edge weights.
///
/// Vertices keep their original index after deletion, so rows of a parity
/// matrix can be addressed by vertex id for the whole synthesis run.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingGraph {
    alive: Vec<bool>,
    adjacency: Vec<Vec<(usize, usize)>>,
    edges: Vec<Edge>,
    vertex_count: usize,
    edge_count: usize,
}

/// Id of an edge inside a [`CouplingGraph`]; stable under vertex deletion.
pub type EdgeId = usize;

impl CouplingGraph {
    /// `n` isolated vertices.
    pub fn new(n: usize) -> Self {
        Self {
            alive: vec![true; n],
            adjacency: vec![Vec::new(); n],
            edges: Vec::new(),
            vertex_count: n,
            edge_count: 0,
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, TopologyError> {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v, 1.0)?;
        }
        Ok(g)
    }

    /// Upper bound on vertex ids (deleted vertices included).
    pub fn capacity(&self) -> usize {
        self.alive.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains(&self, v: usize) -> bool {
        self.alive.get(v).copied().unwrap_or(false)
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.alive.len()).filter(|&v| self.alive[v])
    }

    /// Live neighbours of `v` with the connecting edge id, ascending by neighbour.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, EdgeId)> + '_ {
        self.adjacency[v]
            .iter()
            .copied()
            .filter(|&(_, e)| self.edges[e].alive)
    }

    /// Live edges as `(id, u, v, weight)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, usize, usize, f64)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.alive)
            .map(|(id, e)| (id, e.u, e.v, e.weight))
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<EdgeId> {
        if !self.contains(u) || !self.contains(v) {
            return None;
        }
        self.adjacency[u]
            .binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| self.adjacency[u][i].1)
            .filter(|&e| self.edges[e].alive)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_between(u, v).is_some()
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.edge_between(u, v).map(|e| self.edges[e].weight)
    }

    pub fn edge_weight(&self, id: EdgeId) -> f64 {
        self.edges[id].weight
    }

    pub fn set_edge_weight(&mut self, id: EdgeId, weight: f64) -> Result<(), TopologyError> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(TopologyError::BadWeight(weight));
        }
        self.edges[id].weight = weight;
        Ok(())
    }

    /// Resets every live edge to weight 1.
    pub fn reset_weights(&mut self) {
        for e in self.edges.iter_mut() {
            e.weight = 1.0;
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64) -> Result<EdgeId, TopologyError> {
        for x in [u, v] {
            if !self.contains(x) {
                return Err(TopologyError::MissingVertex(x));
            }
        }
        if u == v {
            return Err(TopologyError::SelfLoop(u));
        }
        if self.has_edge(u, v) {
            return Err(TopologyError::ParallelEdge(u.min(v), u.max(v)));
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(TopologyError::BadWeight(weight));
        }
        let id = self.edges.len();
        let (a, b) = (u.min(v), u.max(v));
        self.edges.push(Edge {
            u: a,
            v: b,
            weight,
            alive: true,
        });
        for (x, y) in [(a, b), (b, a)] {
            let list = &mut self.adjacency[x];
            let pos = list.partition_point(|&(w, _)| w < y);
            list.insert(pos, (y, id));
        }
        self.edge_count += 1;
        Ok(id)
    }

    /// Removes `v` and its incident edges. Connectivity is not checked.
    pub fn delete_vertex(&mut self, v: usize) -> Result<(), TopologyError> {
        if !self.contains(v) {
            return Err(TopologyError::MissingVertex(v));
        }
        self.alive[v] = false;
        self.vertex_count -= 1;
        for &(_, e) in &self.adjacency[v] {
            if self.edges[e].alive {
                self.edges[e].alive = false;
                self.edge_count -= 1;
            }
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        let Some(start) = self.vertices().next() else {
            return true;
        };
        let mut seen = vec![false; self.capacity()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for (w, _) in self.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.vertex_count
    }

    /// Adds `k` distinct, uniformly chosen missing edges with weight 1.
    ///
    /// For a fixed RNG state the added edges for `k` are a prefix of those for
    /// any larger `k`.
    pub fn augment_random_edges<R: Rng + ?Sized>(
        &mut self,
        k: usize,
        rng: &mut R,
    ) -> Result<(), TopologyError> {
        let verts: Vec<usize> = self.vertices().collect();
        let mut missing = Vec::new();
        for (i, &u) in verts.iter().enumerate() {
            for &v in &verts[i + 1..] {
                if !self.has_edge(u, v) {
                    missing.push((u, v));
                }
            }
        }
        if k > missing.len() {
            return Err(TopologyError::TooManyEdges {
                requested: k,
                available: missing.len(),
            });
        }
        missing.shuffle(rng);
        for &(u, v) in &missing[..k] {
            self.add_edge(u, v, 1.0)?;
        }
        Ok(())
    }

    /// Vertices whose removal disconnects the graph.
    pub fn articulation_points(&self) -> Result<Vec<usize>, TopologyError> {
        if !self.is_connected() {
            return Err(TopologyError::Disconnected);
        }
        let cap = self.capacity();
        let mut cut = vec![false; cap];
        let Some(root) = self.vertices().next() else {
            return Ok(Vec::new());
        };
        const UNSEEN: usize = usize::MAX;
        let mut disc = vec![UNSEEN; cap];
        let mut low = vec![0; cap];
        let mut timer = 0;
        let mut root_children = 0;
        // Iterative DFS: (vertex, parent, next adjacency slot).
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, UNSEEN, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (u, parent, ref mut slot)) = stack.last_mut() {
            let adj = &self.adjacency[u];
            let mut advanced = false;
            while *slot < adj.len() {
                let (w, e) = adj[*slot];
                *slot += 1;
                if !self.edges[e].alive || w == parent {
                    continue;
                }
                if disc[w] == UNSEEN {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    if u == root {
                        root_children += 1;
                    }
                    stack.push((w, u, 0));
                    advanced = true;
                    break;
                }
                low[u] = low[u].min(disc[w]);
            }
            if advanced {
                continue;
            }
            stack.pop();
            if parent != UNSEEN {
                low[parent] = low[parent].min(low[u]);
                if parent != root && low[u] >= disc[parent] {
                    cut[parent] = true;
                }
            }
        }
        if root_children > 1 {
            cut[root] = true;
        }
        Ok((0..cap).filter(|&v| cut[v]).collect())
    }

    /// Approximate minimum Steiner tree over `terminals`, rooted at the smallest terminal.
    ///
    /// Mehlhorn's construction: terminals grow Voronoi regions by multi-source
    /// shortest paths; every edge joining two regions proposes a terminal pair;
    /// the MST of that terminal graph is expanded back into graph paths; the
    /// MST of the subgraph induced by those path vertices is pruned of
    /// non-terminal leaves. Total weight is within `2 - 2/|S|` of optimal.
    pub fn steiner_tree(&self, terminals: &[usize]) -> Result<SteinerTree, TopologyError> {
        let mut terms: Vec<usize> = terminals.to_vec();
        terms.sort_unstable();
        terms.dedup();
        let &root = terms.first().ok_or(TopologyError::NoTerminals)?;
        for &t in &terms {
            if !self.contains(t) {
                return Err(TopologyError::MissingVertex(t));
            }
        }
        let cap = self.capacity();
        if terms.len() == 1 {
            return Ok(SteinerTree::single(cap, root));
        }

        // Voronoi regions.
        let mut dist = vec![f64::INFINITY; cap];
        let mut source = vec![usize::MAX; cap];
        let mut pred = vec![usize::MAX; cap];
        let mut heap = BinaryHeap::new();
        for &t in &terms {
            dist[t] = 0.0;
            source[t] = t;
            heap.push(HeapItem {
                dist: 0.0,
                vertex: t,
            });
        }
        while let Some(HeapItem { dist: d, vertex: u }) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for (w, e) in self.neighbors(u) {
                let nd = d + self.edges[e].weight;
                if nd < dist[w] {
                    dist[w] = nd;
                    source[w] = source[u];
                    pred[w] = u;
                    heap.push(HeapItem {
                        dist: nd,
                        vertex: w,
                    });
                }
            }
        }

        // Cheapest bridging edge for every pair of adjacent regions.
        let mut bridges: BTreeMap<(usize, usize), (f64, EdgeId)> = BTreeMap::new();
        for (id, u, v, w) in self.edges() {
            let (su, sv) = (source[u], source[v]);
            if su == usize::MAX || sv == usize::MAX || su == sv {
                continue;
            }
            let key = (su.min(sv), su.max(sv));
            let d = dist[u] + w + dist[v];
            bridges
                .entry(key)
                .and_modify(|best| {
                    if d < best.0 {
                        *best = (d, id);
                    }
                })
                .or_insert((d, id));
        }
        let mut candidates: Vec<((usize, usize), f64, EdgeId)> =
            bridges.into_iter().map(|(k, (d, e))| (k, d, e)).collect();
        candidates.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

        let mut dsu = DisjointSet::new(cap);
        let mut in_set = vec![false; cap];
        let mut joined = 1;
        for ((a, b), _, e) in candidates {
            if !dsu.union(a, b) {
                continue;
            }
            joined += 1;
            let edge = &self.edges[e];
            for end in [edge.u, edge.v] {
                let mut x = end;
                loop {
                    in_set[x] = true;
                    if pred[x] == usize::MAX {
                        break;
                    }
                    x = pred[x];
                }
            }
        }
        if joined < terms.len() {
            return Err(TopologyError::Disconnected);
        }

        // MST of the induced subgraph.
        let mut sub_edges: Vec<(f64, usize, usize)> = self
            .edges()
            .filter(|&(_, u, v, _)| in_set[u] && in_set[v])
            .map(|(_, u, v, w)| (w, u, v))
            .collect();
        sub_edges.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let mut dsu = DisjointSet::new(cap);
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); cap];
        for (_, u, v) in sub_edges {
            if dsu.union(u, v) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }

        // Prune non-terminal leaves.
        let mut is_terminal = vec![false; cap];
        for &t in &terms {
            is_terminal[t] = true;
        }
        let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
        let mut removed = vec![false; cap];
        let mut leaves: Vec<usize> = (0..cap)
            .filter(|&v| in_set[v] && degree[v] == 1 && !is_terminal[v])
            .collect();
        while let Some(v) = leaves.pop() {
            removed[v] = true;
            for &w in &adj[v] {
                if !removed[w] {
                    degree[w] -= 1;
                    if degree[w] == 1 && !is_terminal[w] {
                        leaves.push(w);
                    }
                }
            }
        }
        for (v, list) in adj.iter_mut().enumerate() {
            if removed[v] {
                list.clear();
            } else {
                list.retain(|&w| !removed[w]);
            }
        }
        Ok(SteinerTree::from_adjacency(root, &adj, &terms))
    }

    /// Steiner tree in which every node ranks above its children.
    ///
    /// `rank[v]` is the position of `v` in the ordering. The tree grows
    /// greedily from `root`: each round runs a multi-source shortest path
    /// search from the current tree along rank-decreasing edges, and attaches
    /// the nearest uncovered terminal (ties to the lowest index) by its path.
    /// Returns `Ok(None)` when some terminal cannot be reached this way.
    pub fn decreasing_steiner_tree(
        &self,
        terminals: &[usize],
        root: usize,
        rank: &[usize],
    ) -> Result<Option<SteinerTree>, TopologyError> {
        let cap = self.capacity();
        if !self.contains(root) {
            return Err(TopologyError::MissingVertex(root));
        }
        for &t in terminals {
            if !self.contains(t) {
                return Err(TopologyError::MissingVertex(t));
            }
            if rank[t] > rank[root] {
                return Err(TopologyError::BadRoot { root });
            }
        }
        let mut in_tree = vec![false; cap];
        in_tree[root] = true;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); cap];
        let mut pending: Vec<usize> = terminals.iter().copied().filter(|&t| t != root).collect();
        pending.sort_unstable();
        pending.dedup();

        let mut dist = vec![f64::INFINITY; cap];
        let mut pred = vec![usize::MAX; cap];
        while !pending.is_empty() {
            dist.fill(f64::INFINITY);
            pred.fill(usize::MAX);
            let mut heap = BinaryHeap::new();
            for v in self.vertices().filter(|&v| in_tree[v]) {
                dist[v] = 0.0;
                heap.push(HeapItem {
                    dist: 0.0,
                    vertex: v,
                });
            }
            while let Some(HeapItem { dist: d, vertex: u }) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for (w, e) in self.neighbors(u) {
                    if in_tree[w] || rank[w] >= rank[u] {
                        continue;
                    }
                    let nd = d + self.edges[e].weight;
                    if nd < dist[w] {
                        dist[w] = nd;
                        pred[w] = u;
                        heap.push(HeapItem {
                            dist: nd,
                            vertex: w,
                        });
                    }
                }
            }
            let best = pending
                .iter()
                .enumerate()
                .filter(|(_, &t)| dist[t].is_finite())
                .min_by(|a, b| dist[*a.1].total_cmp(&dist[*b.1]).then(a.1.cmp(b.1)))
                .map(|(i, _)| i);
            let Some(idx) = best else {
                return Ok(None);
            };
            let mut x = pending.remove(idx);
            while !in_tree[x] {
                in_tree[x] = true;
                let p = pred[x];
                adj[x].push(p);
                adj[p].push(x);
                x = p;
            }
            pending.retain(|&t| !in_tree[t]);
        }
        let mut terms: Vec<usize> = terminals.to_vec();
        terms.push(root);
        terms.sort_unstable();
        terms.dedup();
        Ok(Some(SteinerTree::from_adjacency(root, &adj, &terms)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    // min-heap on (dist, vertex)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Rooted tree over a subset of graph vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SteinerTree {
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    nodes: Vec<usize>,
    terminals: Vec<usize>,
}

impl SteinerTree {
    fn single(cap: usize, root: usize) -> Self {
        Self {
            root,
            parent: vec![None; cap],
            children: vec![Vec::new(); cap],
            nodes: vec![root],
            terminals: vec![root],
        }
    }

    fn from_adjacency(root: usize, adj: &[Vec<usize>], terminals: &[usize]) -> Self {
        let cap = adj.len();
        let mut tree = Self::single(cap, root);
        tree.terminals = terminals.to_vec();
        let mut seen = vec![false; cap];
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            let mut kids: Vec<usize> = adj[u].iter().copied().filter(|&w| !seen[w]).collect();
            kids.sort_unstable();
            for &w in &kids {
                seen[w] = true;
                tree.parent[w] = Some(u);
                tree.nodes.push(w);
                stack.push(w);
            }
            tree.children[u] = kids;
        }
        tree.nodes.sort_unstable();
        tree
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Tree vertices, ascending.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn contains(&self, v: usize) -> bool {
        self.nodes.binary_search(&v).is_ok()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent.get(v).copied().flatten()
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// `(parent, child)` pairs in preorder.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.preorder()
            .into_iter()
            .filter_map(|v| self.parent(v).map(|p| (p, v)))
            .collect()
    }

    pub fn weight(&self, graph: &CouplingGraph) -> f64 {
        self.edges()
            .iter()
            .map(|&(p, c)| graph.weight(p, c).expect("tree edge missing from graph"))
            .sum()
    }

    /// Parents before children, children visited in ascending order.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children[u].iter().rev());
        }
        out
    }

    /// Children before parents, children visited in ascending order.
    pub fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((u, expanded)) = stack.pop() {
            if expanded {
                out.push(u);
            } else {
                stack.push((u, true));
                stack.extend(self.children[u].iter().rev().map(|&c| (c, false)));
            }
        }
        out
    }

    /// Same tree rooted at another of its nodes.
    pub fn rerooted(&self, root: usize) -> Self {
        assert!(self.contains(root), "new root must be a tree node");
        let mut adj = vec![Vec::new(); self.parent.len()];
        for (p, c) in self.edges() {
            adj[p].push(c);
            adj[c].push(p);
        }
        Self::from_adjacency(root, &adj, &self.terminals)
    }
}

/// Named built-in topologies, parsed from `line:N`, `grid:RxC`, `heavyhex:RxC`,
/// `barbell:M:B` and `complete:N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Topology {
    Line(usize),
    Grid(usize, usize),
    HeavyHex(usize, usize),
    Barbell(usize, usize),
    Complete(usize),
}

impl Topology {
    pub fn build(&self) -> CouplingGraph {
        match *self {
            Topology::Line(n) => make_line(n),
            Topology::Grid(r, c) => make_grid(r, c),
            Topology::HeavyHex(r, c) => make_heavy_hex(r, c),
            Topology::Barbell(m, b) => make_barbell(m, b),
            Topology::Complete(n) => make_complete(n),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Topology::Line(_) => "line",
            Topology::Grid(..) => "grid",
            Topology::HeavyHex(..) => "heavyhex",
            Topology::Barbell(..) => "barbell",
            Topology::Complete(_) => "complete",
        }
    }

    pub fn qubits(&self) -> usize {
        match *self {
            Topology::Line(n) | Topology::Complete(n) => n,
            Topology::Grid(r, c) => r * c,
            Topology::HeavyHex(r, c) => heavy_hex_layout(r, c).0,
            Topology::Barbell(m, b) => 2 * m + b - 1,
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::Line(n) => write!(f, "line:{n}"),
            Topology::Grid(r, c) => write!(f, "grid:{r}x{c}"),
            Topology::HeavyHex(r, c) => write!(f, "heavyhex:{r}x{c}"),
            Topology::Barbell(m, b) => write!(f, "barbell:{m}:{b}"),
            Topology::Complete(n) => write!(f, "complete:{n}"),
        }
    }
}

impl From<Topology> for String {
    fn from(t: Topology) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for Topology {
    type Error = TopologyError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl FromStr for Topology {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TopologyError::Parse(s.to_string());
        let num = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
        let dims = |x: &str| -> Result<(usize, usize), TopologyError> {
            let (a, b) = x.split_once(['x', 'X']).ok_or_else(bad)?;
            Ok((num(a)?, num(b)?))
        };
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let topo = match kind.trim().to_ascii_lowercase().as_str() {
            "line" => Topology::Line(num(rest)?),
            "complete" => Topology::Complete(num(rest)?),
            "grid" => {
                let (r, c) = dims(rest)?;
                Topology::Grid(r, c)
            }
            "heavyhex" => {
                let (r, c) = dims(rest)?;
                Topology::HeavyHex(r, c)
            }
            "barbell" => {
                let (m, b) = rest.split_once(':').ok_or_else(bad)?;
                Topology::Barbell(num(m)?, num(b)?)
            }
            _ => return Err(bad()),
        };
        let ok = match topo {
            Topology::Line(n) | Topology::Complete(n) => n >= 1,
            Topology::Grid(r, c) | Topology::HeavyHex(r, c) => r >= 1 && c >= 1,
            Topology::Barbell(m, b) => m >= 1 && (b == 1 || b == 2),
        };
        if ok {
            Ok(topo)
        } else {
            Err(bad())
        }
    }
}

pub fn make_line(n: usize) -> CouplingGraph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    CouplingGraph::from_edges(n, &edges).expect("line edges are valid")
}

/// `rows x cols` grid labelled in snake order, so consecutive labels are
/// always adjacent (row 0 left to right, row 1 right to left, ...).
pub fn make_grid(rows: usize, cols: usize) -> CouplingGraph {
    let label = |r: usize, c: usize| r * cols + if r.is_multiple_of(2) { c } else { cols - 1 - c };
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((label(r, c), label(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((label(r, c), label(r + 1, c)));
            }
        }
    }
    CouplingGraph::from_edges(rows * cols, &edges).expect("grid edges are valid")
}

pub fn make_complete(n: usize) -> CouplingGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    CouplingGraph::from_edges(n, &edges).expect("complete edges are valid")
}

/// Two `K_m` joined by a path of `bridge` edges (1 or 2).
///
/// Labels run `0..m` through the first clique, then the middle vertex (for a
/// two-edge bridge), then the second clique, so the label order is a
/// Hamiltonian path.
pub fn make_barbell(m: usize, bridge: usize) -> CouplingGraph {
    assert!(bridge == 1 || bridge == 2, "bridge must have 1 or 2 edges");
    let n = 2 * m + bridge - 1;
    let second = m + bridge - 1;
    let mut edges = Vec::new();
    for base in [0, second] {
        for u in 0..m {
            for v in u + 1..m {
                edges.push((base + u, base + v));
            }
        }
    }
    for i in m - 1..second {
        edges.push((i, i + 1));
    }
    CouplingGraph::from_edges(n, &edges).expect("barbell edges are valid")
}

/// Returns `(qubit count, edges)` for the heavy-hex layout.
///
/// There are `rows + 1` horizontal qubit chains. Between chains `r` and
/// `r + 1` sit bridge qubits every fourth column, offset by 2 on odd gaps,
/// so each cell is a 12-cycle and every qubit has degree at most 3. Labels go
/// chain 0, bridges of gap 0, chain 1, bridges of gap 1, and so on.
fn heavy_hex_layout(rows: usize, cols: usize) -> (usize, Vec<(usize, usize)>) {
    let offset = |gap: usize| if gap.is_multiple_of(2) { 0 } else { 2 };
    let span = |r: usize| {
        let mut lo = usize::MAX;
        let mut hi = 0;
        for gap in [r.checked_sub(1), (r < rows).then_some(r)]
            .into_iter()
            .flatten()
        {
            lo = lo.min(offset(gap));
            hi = hi.max(offset(gap) + 4 * cols);
        }
        (lo, hi)
    };
    let mut next = 0;
    let mut chain_start = Vec::with_capacity(rows + 1);
    let mut edges = Vec::new();
    let mut pending_bridges: Vec<(usize, usize)> = Vec::new();
    for r in 0..=rows {
        let (lo, hi) = span(r);
        chain_start.push((next, lo));
        for col in lo..=hi {
            if col > lo {
                edges.push((next - 1, next));
            }
            next += 1;
        }
        // Bridges from the previous gap connect down to this chain.
        for (bridge, col) in pending_bridges.drain(..) {
            let (start, lo) = chain_start[r];
            edges.push((bridge, start + col - lo));
        }
        if r < rows {
            let (start, lo) = chain_start[r];
            let mut col = offset(r);
            while col <= offset(r) + 4 * cols {
                edges.push((start + col - lo, next));
                pending_bridges.push((next, col));
                next += 1;
                col += 4;
            }
        }
    }
    (next, edges)
}

pub fn make_heavy_hex(rows: usize, cols: usize) -> CouplingGraph {
    let (n, edges) = heavy_hex_layout(rows, cols);
    CouplingGraph::from_edges(n, &edges).expect("heavy-hex edges are valid")
}

/// Parses the coupling file format: `n` on the first line, then `u v [w]` per edge.
pub fn parse_coupling_file(text: &str) -> Result<CouplingGraph, TopologyError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| TopologyError::Parse("empty file".into()))?;
    let n: usize = header
        .parse()
        .map_err(|_| TopologyError::Parse(format!("bad vertex count {header:?}")))?;
    let mut g = CouplingGraph::new(n);
    for line in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let parse_vertex = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| TopologyError::Parse(format!("bad edge line {line:?}")))
        };
        let (u, v, w) = match parts.as_slice() {
            [u, v] => (parse_vertex(u)?, parse_vertex(v)?, 1.0),
            [u, v, w] => (
                parse_vertex(u)?,
                parse_vertex(v)?,
                w.parse::<f64>()
                    .map_err(|_| TopologyError::Parse(format!("bad weight in {line:?}")))?,
            ),
            _ => return Err(TopologyError::Parse(format!("bad edge line {line:?}"))),
        };
        g.add_edge(u, v, w)?;
    }
    Ok(g)
}
