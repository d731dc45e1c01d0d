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

//! CNOT circuit synthesis: weighted RowCol, weighted SteinerGauss and the
//! Patel-Markov-Hayes baseline.
//!
//! Every algorithm reduces a working copy of the parity matrix to the
//! identity with row additions. A row addition `src -> dst` is a
//! `CNOT(control = src, target = dst)`; the recorded sequence, reversed, is
//! the circuit that implements the input matrix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{Gf2Error, ParityMatrix};
use crate::topology::{CouplingGraph, SteinerTree, TopologyError};
use crate::weighting::{update_all_weights, WeightError, WeightRule, Weighting};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("coupling graph is not connected")]
    Disconnected,
    #[error("parity matrix is not invertible")]
    NotInvertible,
    #[error("dimension mismatch: matrix has {matrix} rows, graph has {graph} vertices")]
    DimensionMismatch { matrix: usize, graph: usize },
    #[error(
        "infeasible-topology: no admissible Steiner tree for column {column} in phase {phase}"
    )]
    InfeasibleTopology { phase: u8, column: usize },
    #[error("PMH requires all-to-all connectivity")]
    PmhNeedsCompleteGraph,
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error("circuit parse error: {0}")]
    Parse(String),
}

/// Ordered list of `(control, target)` CNOT gates on `n` qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CnotCircuit {
    n: usize,
    gates: Vec<(usize, usize)>,
}

impl CnotCircuit {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(n: usize, gates: Vec<(usize, usize)>) -> Result<Self, SynthError> {
        let mut c = Self::new(n);
        for (ctrl, tgt) in gates {
            c.try_push(ctrl, tgt)?;
        }
        Ok(c)
    }

    pub fn try_push(&mut self, control: usize, target: usize) -> Result<(), SynthError> {
        if control == target {
            return Err(Gf2Error::InvalidRowOp {
                src: control,
                dst: target,
            }
            .into());
        }
        for q in [control, target] {
            if q >= self.n {
                return Err(Gf2Error::OutOfRange {
                    index: q,
                    n: self.n,
                }
                .into());
            }
        }
        self.gates.push((control, target));
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[(usize, usize)] {
        &self.gates
    }

    pub fn size(&self) -> usize {
        self.gates.len()
    }

    /// Number of ASAP layers: each gate lands one layer after the later of
    /// its two qubits' previous gates.
    pub fn depth(&self) -> usize {
        let mut finish = vec![0usize; self.n];
        let mut depth = 0;
        for &(c, t) in &self.gates {
            let layer = finish[c].max(finish[t]) + 1;
            finish[c] = layer;
            finish[t] = layer;
            depth = depth.max(layer);
        }
        depth
    }

    /// The parity matrix this circuit computes.
    pub fn to_matrix(&self) -> ParityMatrix {
        let mut m = ParityMatrix::identity(self.n);
        for &(c, t) in &self.gates {
            m.add_row(c, t);
        }
        m
    }

    /// Whether applying the gates in circuit order to `I_n` yields `m`.
    pub fn verify(&self, m: &ParityMatrix) -> Result<bool, SynthError> {
        if m.n() != self.n {
            return Err(SynthError::DimensionMismatch {
                matrix: m.n(),
                graph: self.n,
            });
        }
        Ok(self.to_matrix() == *m)
    }

    /// The row additions that reduce the implemented matrix back to `I_n`.
    pub fn reduction_ops(&self) -> Vec<(usize, usize)> {
        self.gates.iter().rev().copied().collect()
    }

    pub fn respects(&self, g: &CouplingGraph) -> bool {
        self.gates.iter().all(|&(c, t)| g.has_edge(c, t))
    }

    pub fn emit(&self, format: EmitFormat) -> String {
        let mut out = String::new();
        match format {
            EmitFormat::Gates => {
                out.push_str(&format!("{}\n", self.n));
                for (c, t) in &self.gates {
                    out.push_str(&format!("{c} {t}\n"));
                }
            }
            EmitFormat::Qasm => {
                out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
                out.push_str(&format!("qreg q[{}];\n", self.n));
                for (c, t) in &self.gates {
                    out.push_str(&format!("cx q[{c}],q[{t}];\n"));
                }
            }
        }
        out
    }

    /// Parses either emitted format.
    pub fn parse(text: &str) -> Result<Self, SynthError> {
        let bad = |l: &str| SynthError::Parse(format!("unexpected line {l:?}"));
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        let first = *lines
            .first()
            .ok_or_else(|| SynthError::Parse("empty input".into()))?;
        if first.starts_with("OPENQASM") {
            let mut circuit: Option<CnotCircuit> = None;
            for &line in &lines[1..] {
                if line.starts_with("include") {
                    continue;
                }
                if let Some(rest) = line.strip_prefix("qreg q[") {
                    let n = rest.strip_suffix("];").ok_or_else(|| bad(line))?;
                    let n = n.parse().map_err(|_| bad(line))?;
                    circuit = Some(CnotCircuit::new(n));
                    continue;
                }
                let body = line
                    .strip_prefix("cx q[")
                    .and_then(|r| r.strip_suffix("];"))
                    .ok_or_else(|| bad(line))?;
                let (c, t) = body.split_once("],q[").ok_or_else(|| bad(line))?;
                let c = c.parse().map_err(|_| bad(line))?;
                let t = t.parse().map_err(|_| bad(line))?;
                circuit
                    .as_mut()
                    .ok_or_else(|| SynthError::Parse("gate before qreg".into()))?
                    .try_push(c, t)?;
            }
            circuit.ok_or_else(|| SynthError::Parse("missing qreg".into()))
        } else {
            let n = first.parse().map_err(|_| bad(first))?;
            let mut circuit = CnotCircuit::new(n);
            for &line in &lines[1..] {
                let mut parts = line.split_whitespace();
                let (Some(c), Some(t), None) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(bad(line));
                };
                circuit.try_push(
                    c.parse().map_err(|_| bad(line))?,
                    t.parse().map_err(|_| bad(line))?,
                )?;
            }
            Ok(circuit)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitFormat {
    Gates,
    Qasm,
}

impl FromStr for EmitFormat {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gates" => Ok(EmitFormat::Gates),
            "qasm" | "qasm2" => Ok(EmitFormat::Qasm),
            other => Err(SynthError::Parse(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    RowCol,
    SteinerGauss,
    Pmh,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::RowCol => "rowcol",
            Algorithm::SteinerGauss => "steinergauss",
            Algorithm::Pmh => "pmh",
        })
    }
}

impl FromStr for Algorithm {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rowcol" => Ok(Algorithm::RowCol),
            "steinergauss" | "steiner-gauss" => Ok(Algorithm::SteinerGauss),
            "pmh" => Ok(Algorithm::Pmh),
            other => Err(SynthError::Parse(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisOptions {
    pub algorithm: Algorithm,
    pub weighting: Weighting,
    pub pmh_section_size: Option<usize>,
    /// SteinerGauss only: also weight the decreasing trees of phase 2.
    /// Off by default; phase 2 then uses unit weights.
    pub weight_decreasing_trees: bool,
}

impl SynthesisOptions {
    pub fn new(algorithm: Algorithm, weighting: Weighting) -> Self {
        Self {
            algorithm,
            weighting,
            pmh_section_size: None,
            weight_decreasing_trees: false,
        }
    }
}

/// Runs the algorithm selected in `opts`.
pub fn synthesize(
    m: &ParityMatrix,
    g: &CouplingGraph,
    opts: &SynthesisOptions,
) -> Result<CnotCircuit, SynthError> {
    match opts.algorithm {
        Algorithm::RowCol => rowcol(m, g, opts.weighting),
        Algorithm::SteinerGauss => {
            let phase_two = if opts.weight_decreasing_trees {
                opts.weighting
            } else {
                Weighting::Unweighted
            };
            steiner_gauss_phases(m, g, opts.weighting, phase_two).map(|(c, _)| c)
        }
        Algorithm::Pmh => {
            let n = g.vertex_count();
            if n != m.n() {
                return Err(SynthError::DimensionMismatch {
                    matrix: m.n(),
                    graph: n,
                });
            }
            if g.edge_count() != n * n.saturating_sub(1) / 2 {
                return Err(SynthError::PmhNeedsCompleteGraph);
            }
            pmh(m, opts.pmh_section_size)
        }
    }
}

/// Working matrix plus the row additions applied to it so far.
struct Reducer {
    m: ParityMatrix,
    ops: Vec<(usize, usize)>,
}

impl Reducer {
    fn new(m: &ParityMatrix) -> Self {
        Self {
            m: m.clone(),
            ops: Vec::new(),
        }
    }

    #[inline]
    fn add(&mut self, src: usize, dst: usize) {
        self.m.add_row(src, dst);
        self.ops.push((src, dst));
    }

    fn into_circuit(self) -> CnotCircuit {
        CnotCircuit {
            n: self.m.n(),
            gates: self.ops.into_iter().rev().collect(),
        }
    }
}

fn check_inputs(
    m: &ParityMatrix,
    g: &CouplingGraph,
    weighting: Weighting,
) -> Result<(), SynthError> {
    if weighting == Weighting::Rule(WeightRule::Zero) {
        return Err(WeightError::ZeroRule.into());
    }
    if g.vertex_count() != m.n() || g.capacity() != m.n() {
        return Err(SynthError::DimensionMismatch {
            matrix: m.n(),
            graph: g.vertex_count(),
        });
    }
    if !g.is_connected() {
        return Err(SynthError::Disconnected);
    }
    if !m.is_invertible() {
        return Err(SynthError::NotInvertible);
    }
    Ok(())
}

/// Snapshot handed to a [`rowcol_observed`] callback after each vertex is eliminated.
pub struct RowColStep<'a> {
    pub vertex: usize,
    /// Working matrix after row and column `vertex` were cleared.
    pub matrix: &'a ParityMatrix,
    /// Graph the vertex was chosen from, before its deletion.
    pub graph: &'a CouplingGraph,
    pub column_tree: &'a SteinerTree,
    pub row_tree: &'a SteinerTree,
}

pub fn rowcol(
    m: &ParityMatrix,
    g: &CouplingGraph,
    weighting: Weighting,
) -> Result<CnotCircuit, SynthError> {
    rowcol_observed(m, g, weighting, |_| {})
}

/// RowCol with edge weights refreshed before each of the two tree searches
/// per eliminated vertex. `Weighting::Unweighted` is the classic algorithm.
pub fn rowcol_observed<F>(
    m: &ParityMatrix,
    g: &CouplingGraph,
    weighting: Weighting,
    mut observe: F,
) -> Result<CnotCircuit, SynthError>
where
    F: FnMut(&RowColStep<'_>),
{
    check_inputs(m, g, weighting)?;
    let n = m.n();
    let mut red = Reducer::new(m);
    let mut graph = g.clone();
    let mut in_set = vec![false; n];

    while graph.vertex_count() > 1 {
        let cuts = graph.articulation_points()?;
        let i = graph
            .vertices()
            .find(|v| cuts.binary_search(v).is_err())
            .ok_or_else(|| SynthError::Invariant("no non-cut vertex left".into()))?;

        // Column i.
        update_all_weights(&red.m, &mut graph, weighting)?;
        let terminals: Vec<usize> = graph
            .vertices()
            .filter(|&j| j == i || red.m.get(j, i))
            .collect();
        let col_tree = graph.steiner_tree(&terminals)?.rerooted(i);
        for j in col_tree.postorder() {
            if let Some(k) = col_tree.parent(j) {
                if red.m.get(j, i) && !red.m.get(k, i) {
                    red.add(j, k);
                }
            }
        }
        for k in col_tree.postorder() {
            for &c in col_tree.children(k) {
                red.add(k, c);
            }
        }
        if !red.m.col_is_unit(i) {
            return Err(SynthError::Invariant(format!("column {i} not cleared")));
        }

        // Row i.
        update_all_weights(&red.m, &mut graph, weighting)?;
        let active: Vec<usize> = graph.vertices().collect();
        let combo = red.m.solve_combination(&active, i)?;
        for &j in &combo {
            in_set[j] = true;
        }
        let mut terminals = combo.clone();
        terminals.push(i);
        let row_tree = graph.steiner_tree(&terminals)?.rerooted(i);
        for j in row_tree.preorder() {
            if let Some(p) = row_tree.parent(j) {
                if !in_set[j] {
                    red.add(j, p);
                }
            }
        }
        for j in row_tree.postorder() {
            if let Some(p) = row_tree.parent(j) {
                red.add(j, p);
            }
        }
        for &j in &combo {
            in_set[j] = false;
        }
        if !red.m.row_is_unit(i) || !red.m.col_is_unit(i) {
            return Err(SynthError::Invariant(format!(
                "row/column {i} not reduced to a unit vector"
            )));
        }

        observe(&RowColStep {
            vertex: i,
            matrix: &red.m,
            graph: &graph,
            column_tree: &col_tree,
            row_tree: &row_tree,
        });
        graph.delete_vertex(i)?;
    }
    if let Some(last) = graph.vertices().next() {
        if !red.m.row_is_unit(last) || !red.m.col_is_unit(last) {
            return Err(SynthError::Invariant(format!(
                "last vertex {last} not reduced"
            )));
        }
    }
    if !red.m.is_identity() {
        return Err(SynthError::Invariant(
            "matrix not reduced to identity".into(),
        ));
    }
    Ok(red.into_circuit())
}

/// SteinerGauss with vertex index order as the elimination order.
///
/// Phase 1 clears below the diagonal column by column, using Steiner trees
/// inside the not-yet-eliminated vertices. Phase 2 transposes the resulting
/// upper triangular matrix and repeats the column sweep with decreasing
/// trees. `weighting` drives the phase-1 trees; the decreasing trees use
/// unit weights (see [`steiner_gauss_phases`] to weight both).
pub fn steiner_gauss(
    m: &ParityMatrix,
    g: &CouplingGraph,
    weighting: Weighting,
) -> Result<CnotCircuit, SynthError> {
    let (circuit, _) = steiner_gauss_phases(m, g, weighting, Weighting::Unweighted)?;
    Ok(circuit)
}

/// SteinerGauss with separate weightings for the two phases. Also returns
/// the working matrix after phase 1.
pub fn steiner_gauss_phases(
    m: &ParityMatrix,
    g: &CouplingGraph,
    weighting: Weighting,
    phase_two: Weighting,
) -> Result<(CnotCircuit, ParityMatrix), SynthError> {
    check_inputs(m, g, weighting)?;
    check_inputs(m, g, phase_two)?;
    let n = m.n();
    let mut red = Reducer::new(m);

    let mut graph = g.clone();
    for i in 0..n {
        update_all_weights(&red.m, &mut graph, weighting)?;
        let terminals: Vec<usize> = std::iter::once(i)
            .chain((i + 1..n).filter(|&k| red.m.get(k, i)))
            .collect();
        let tree = match graph.steiner_tree(&terminals) {
            Ok(t) => t.rerooted(i),
            Err(TopologyError::Disconnected) => {
                return Err(SynthError::InfeasibleTopology {
                    phase: 1,
                    column: i,
                })
            }
            Err(e) => return Err(e.into()),
        };
        for j in tree.postorder() {
            if let Some(k) = tree.parent(j) {
                if red.m.get(j, i) && !red.m.get(k, i) {
                    red.add(j, k);
                }
            }
        }
        for j in tree.postorder() {
            if let Some(p) = tree.parent(j) {
                red.add(p, j);
            }
        }
        graph.delete_vertex(i)?;
    }
    let upper = red.m.clone();
    if !upper.is_unit_upper_triangular() {
        return Err(SynthError::Invariant(
            "phase 1 did not reach upper triangular form".into(),
        ));
    }

    // Phase 2 works on the transpose, which is lower triangular. Clearing
    // below the diagonal again keeps it lower triangular only if every row
    // addition goes from a smaller index to a larger one, so trees must be
    // decreasing under the reversed index order.
    let reversed: Vec<usize> = (0..n).map(|v| n - 1 - v).collect();
    let mut lower = Reducer::new(&red.m.transpose());
    let mut graph = g.clone();
    for i in 0..n {
        let terminals: Vec<usize> = std::iter::once(i)
            .chain((i + 1..n).filter(|&k| lower.m.get(k, i)))
            .collect();
        if terminals.len() == 1 {
            continue;
        }
        update_all_weights(&lower.m, &mut graph, phase_two)?;
        let tree = graph
            .decreasing_steiner_tree(&terminals, i, &reversed)?
            .ok_or(SynthError::InfeasibleTopology {
                phase: 2,
                column: i,
            })?;
        for j in tree.preorder() {
            if let Some(p) = tree.parent(j) {
                if !lower.m.get(j, i) {
                    lower.add(p, j);
                }
            }
        }
        for j in tree.postorder() {
            if let Some(p) = tree.parent(j) {
                lower.add(p, j);
            }
        }
    }
    if !lower.m.is_identity() {
        return Err(SynthError::Invariant(
            "phase 2 did not reach the identity".into(),
        ));
    }
    // M = E1^-1 U and E2 U^T = I, so U is the product of the phase-2
    // operations with control and target swapped, applied in order.
    let mut gates: Vec<(usize, usize)> = lower.ops.into_iter().map(|(s, d)| (d, s)).collect();
    gates.extend(red.ops.into_iter().rev());
    Ok((CnotCircuit { n, gates }, upper))
}

/// Default PMH section size: `round(log2(n) / 2)`, at least 1.
pub fn default_section_size(n: usize) -> usize {
    (((n.max(1)) as f64).log2() / 2.0).round().max(1.0) as usize
}

/// Patel-Markov-Hayes synthesis for all-to-all connectivity.
pub fn pmh(m: &ParityMatrix, section_size: Option<usize>) -> Result<CnotCircuit, SynthError> {
    if !m.is_invertible() {
        return Err(SynthError::NotInvertible);
    }
    let n = m.n();
    let section = section_size
        .unwrap_or_else(|| default_section_size(n))
        .max(1);
    let mut work = m.clone();
    let lower = pmh_lower(&mut work, section);
    let mut upper_t = work.transpose();
    let upper = pmh_lower(&mut upper_t, section);
    if !upper_t.is_identity() {
        return Err(SynthError::Invariant(
            "PMH did not reach the identity".into(),
        ));
    }
    // M = E(lower)^-1 * U, and U^T is reduced by `upper`, so U is the
    // product of the transposed (control/target swapped) upper operations.
    let mut gates: Vec<(usize, usize)> = upper.into_iter().map(|(s, d)| (d, s)).collect();
    gates.extend(lower.into_iter().rev());
    Ok(CnotCircuit { n, gates })
}

/// Section-wise elimination below the diagonal; returns the row additions applied.
fn pmh_lower(a: &mut ParityMatrix, section: usize) -> Vec<(usize, usize)> {
    let n = a.n();
    let mut ops = Vec::new();
    let mut add = |a: &mut ParityMatrix, src: usize, dst: usize| {
        a.add_row(src, dst);
        ops.push((src, dst));
    };
    let mut start = 0;
    while start < n {
        let end = (start + section).min(n);
        // Clear duplicate sub-rows within the section's columns.
        let mut first_seen = vec![usize::MAX; 1 << (end - start)];
        for row in start..n {
            let pattern = (start..end).fold(0usize, |acc, c| acc << 1 | a.get(row, c) as usize);
            if pattern == 0 {
                continue;
            }
            match first_seen[pattern] {
                usize::MAX => first_seen[pattern] = row,
                src => add(a, src, row),
            }
        }
        for col in start..end {
            let mut diag_one = a.get(col, col);
            for row in col + 1..n {
                if a.get(row, col) {
                    if !diag_one {
                        add(a, row, col);
                        diag_one = true;
                    }
                    add(a, col, row);
                }
            }
        }
        start = end;
    }
    ops
}
