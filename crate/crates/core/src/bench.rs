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

//! Cost estimation, rule ranking and the benchmark experiments.
//!
//! Every random draw comes from a stream derived from the run seed and a
//! cell key, so results do not depend on thread count or scheduling.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell_rng;
use crate::gf2::ParityMatrix;
use crate::synthesis::{synthesize, Algorithm, CnotCircuit, SynthError, SynthesisOptions};
use crate::topology::{make_line, CouplingGraph, Topology};
use crate::weighting::{WeightRule, Weighting};

/// Where the input matrices of a benchmark come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum MatrixSource {
    /// Uniformly random invertible matrices.
    Uniform,
    /// Identity with `k` random row additions.
    Walk(usize),
}

impl fmt::Display for MatrixSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixSource::Uniform => f.write_str("uniform"),
            MatrixSource::Walk(k) => write!(f, "walk:{k}"),
        }
    }
}

impl From<MatrixSource> for String {
    fn from(s: MatrixSource) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for MatrixSource {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl FromStr for MatrixSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "uniform" {
            return Ok(MatrixSource::Uniform);
        }
        s.strip_prefix("walk:")
            .and_then(|k| k.parse().ok())
            .map(MatrixSource::Walk)
            .ok_or_else(|| format!("unknown matrix source {s:?}"))
    }
}

fn mix(mut x: u64) -> u64 {
    // splitmix64 finaliser
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn stream_key(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5EED_u64, |acc, &p| mix(acc ^ p))
}

const MATRIX_STREAM: u64 = 1;
const EDGE_STREAM: u64 = 2;

/// The `sample`-th input matrix of size `n` for a run seeded with `seed`.
///
/// The draw depends only on `(seed, n, source, sample)`, so every topology,
/// algorithm and rule of a run sees the same matrices.
pub fn sample_matrix(seed: u64, n: usize, source: MatrixSource, sample: usize) -> ParityMatrix {
    let (tag, k) = match source {
        MatrixSource::Uniform => (0, 0),
        MatrixSource::Walk(k) => (1, k as u64),
    };
    let mut rng = cell_rng(
        seed,
        stream_key(&[MATRIX_STREAM, n as u64, tag, k, sample as u64]),
    );
    match source {
        MatrixSource::Uniform => ParityMatrix::random_invertible(n, &mut rng),
        MatrixSource::Walk(k) => ParityMatrix::random_walk(n, k, &mut rng),
    }
}

/// Order-sensitive fingerprint of a matrix set.
pub fn matrix_set_hash(matrices: &[ParityMatrix]) -> u64 {
    use std::hash::{Hash, Hasher};
    // DefaultHasher::new() uses fixed keys, so this is stable within a build.
    let mut h = std::collections::hash_map::DefaultHasher::new();
    matrices.hash(&mut h);
    h.finish()
}

/// One synthesized circuit. Serialises to the CSV columns
/// `topology,n,algorithm,rule,seed,source,cnot_count,depth,wall_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub topology: String,
    pub n: usize,
    pub algorithm: Algorithm,
    pub rule: String,
    pub seed: u64,
    pub source: String,
    pub cnot_count: usize,
    pub depth: usize,
    pub wall_ms: f64,
}

/// Knobs shared by every benchmark run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Fraction of circuits re-verified against their input matrix.
    pub verify_fraction: f64,
    /// Record wall time; off by default so that reruns are byte-identical.
    pub timing: bool,
}

impl RunConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            verify_fraction: 0.05,
            timing: false,
        }
    }

    pub fn verify_all(mut self) -> Self {
        self.verify_fraction = 1.0;
        self
    }

    fn should_verify(&self, key: u64) -> bool {
        self.verify_fraction >= 1.0
            || (mix(self.seed ^ key) as f64 / u64::MAX as f64) < self.verify_fraction
    }
}

/// Outcome of one (graph, matrix, options) cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub circuit: CnotCircuit,
    pub wall_ms: f64,
}

fn run_cell(
    m: &ParityMatrix,
    g: &CouplingGraph,
    opts: &SynthesisOptions,
    cfg: &RunConfig,
    key: u64,
) -> Result<CellResult, SynthError> {
    let start = Instant::now();
    let circuit = synthesize(m, g, opts)?;
    let wall_ms = if cfg.timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    if cfg.should_verify(key) {
        assert!(
            circuit.verify(m)? && (opts.algorithm == Algorithm::Pmh || circuit.respects(g)),
            "synthesized circuit failed verification"
        );
    }
    Ok(CellResult { circuit, wall_ms })
}

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub std_err: f64,
    pub count: usize,
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                mean: f64::NAN,
                std_err: f64::NAN,
                count,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let std_err = if count > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_err,
            count,
        }
    }
}

/// Per-graph term of a cost estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphCost {
    pub topology: String,
    pub n: usize,
    pub mean_cnots: f64,
    pub std_err: f64,
    pub samples: usize,
    pub skipped: usize,
}

/// `sum over graphs of |G|^-2 * mean CNOT count` for one weighting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub algorithm: Algorithm,
    pub weighting: Weighting,
    pub cost: f64,
    pub std_err: f64,
    pub samples: usize,
    pub per_graph: Vec<GraphCost>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostConfig {
    pub algorithm: Algorithm,
    pub graphs: Vec<Topology>,
    pub samples: usize,
    pub source: MatrixSource,
    pub run: RunConfig,
}

impl CostConfig {
    /// Grid and all-to-all at 9, 49 and 81 qubits, 100 matrices each.
    pub fn standard(algorithm: Algorithm, seed: u64) -> Self {
        Self {
            algorithm,
            graphs: default_pretrain_graphs(),
            samples: 100,
            source: MatrixSource::Uniform,
            run: RunConfig::new(seed),
        }
    }
}

pub fn default_pretrain_graphs() -> Vec<Topology> {
    vec![
        Topology::Grid(3, 3),
        Topology::Grid(7, 7),
        Topology::Grid(9, 9),
        Topology::Complete(9),
        Topology::Complete(49),
        Topology::Complete(81),
    ]
}

pub fn cost(weighting: Weighting, cfg: &CostConfig) -> CostReport {
    assert!(cfg.samples >= 1, "need at least one sample per graph");
    let opts = SynthesisOptions::new(cfg.algorithm, weighting);
    let mut total = 0.0;
    let mut var = 0.0;
    let mut per_graph = Vec::new();
    let mut errors = Vec::new();
    let mut samples = 0;
    for (gi, topo) in cfg.graphs.iter().enumerate() {
        let g = topo.build();
        let n = g.vertex_count();
        let results: Vec<Result<usize, SynthError>> = (0..cfg.samples)
            .into_par_iter()
            .map(|s| {
                let m = sample_matrix(cfg.run.seed, n, cfg.source, s);
                let key = stream_key(&[gi as u64, s as u64]);
                run_cell(&m, &g, &opts, &cfg.run, key).map(|r| r.circuit.size())
            })
            .collect();
        let mut counts = Vec::new();
        let mut skipped = 0;
        for r in results {
            match r {
                Ok(c) => counts.push(c as f64),
                Err(e) => {
                    skipped += 1;
                    if errors.len() < 16 {
                        errors.push(format!("{topo}: {e}"));
                    }
                }
            }
        }
        let st = Stats::of(&counts);
        if st.count > 0 {
            let norm = (n * n) as f64;
            total += st.mean / norm;
            var += (st.std_err / norm).powi(2);
        }
        samples += st.count;
        per_graph.push(GraphCost {
            topology: topo.to_string(),
            n,
            mean_cnots: st.mean,
            std_err: st.std_err,
            samples: st.count,
            skipped,
        });
    }
    CostReport {
        algorithm: cfg.algorithm,
        weighting,
        cost: total,
        std_err: var.sqrt(),
        samples,
        per_graph,
        errors,
    }
}

/// Costs of all seven usable rules, cheapest first (ties keep table order).
pub fn pretrain(cfg: &CostConfig) -> Vec<CostReport> {
    let mut reports: Vec<CostReport> = WeightRule::USABLE
        .iter()
        .map(|&r| cost(Weighting::Rule(r), cfg))
        .collect();
    reports.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    reports
}

/// Paired comparison of a weighted run against the unweighted baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub topology: String,
    pub algorithm: Algorithm,
    pub weighting: Weighting,
    /// `1 - mean(weighted / unweighted)` over matrices with a non-empty baseline.
    pub improvement: f64,
    pub std_err: f64,
    pub weighted_size: Stats,
    pub unweighted_size: Stats,
    pub weighted_depth: Stats,
    pub unweighted_depth: Stats,
    /// `weighted depth - unweighted depth` per matrix.
    pub depth_difference: Stats,
}

pub fn improvement(
    topology: &Topology,
    algorithm: Algorithm,
    weighting: Weighting,
    samples: usize,
    source: MatrixSource,
    run: &RunConfig,
) -> Result<Improvement, SynthError> {
    let g = topology.build();
    let n = g.vertex_count();
    let matrices: Vec<ParityMatrix> = (0..samples)
        .map(|s| sample_matrix(run.seed, n, source, s))
        .collect();
    let pairs = paired_runs(&matrices, &g, algorithm, weighting, run)?;
    Ok(summarize_pairs(
        topology.to_string(),
        algorithm,
        weighting,
        &pairs,
    ))
}

/// `(weighted, unweighted)` circuits for each matrix.
fn paired_runs(
    matrices: &[ParityMatrix],
    g: &CouplingGraph,
    algorithm: Algorithm,
    weighting: Weighting,
    run: &RunConfig,
) -> Result<Vec<(CellResult, CellResult)>, SynthError> {
    let weighted = SynthesisOptions::new(algorithm, weighting);
    let baseline = SynthesisOptions::new(algorithm, Weighting::Unweighted);
    matrices
        .par_iter()
        .enumerate()
        .map(|(s, m)| {
            let w = run_cell(m, g, &weighted, run, stream_key(&[s as u64, 0]))?;
            let u = run_cell(m, g, &baseline, run, stream_key(&[s as u64, 1]))?;
            Ok((w, u))
        })
        .collect()
}

fn summarize_pairs(
    topology: String,
    algorithm: Algorithm,
    weighting: Weighting,
    pairs: &[(CellResult, CellResult)],
) -> Improvement {
    let col = |f: &dyn Fn(&(CellResult, CellResult)) -> f64| -> Vec<f64> {
        pairs.iter().map(f).collect()
    };
    let ratios: Vec<f64> = pairs
        .iter()
        .filter(|(_, u)| u.circuit.size() > 0)
        .map(|(w, u)| w.circuit.size() as f64 / u.circuit.size() as f64)
        .collect();
    let ratio = Stats::of(&ratios);
    Improvement {
        topology,
        algorithm,
        weighting,
        improvement: 1.0 - ratio.mean,
        std_err: ratio.std_err,
        weighted_size: Stats::of(&col(&|p| p.0.circuit.size() as f64)),
        unweighted_size: Stats::of(&col(&|p| p.1.circuit.size() as f64)),
        weighted_depth: Stats::of(&col(&|p| p.0.circuit.depth() as f64)),
        unweighted_depth: Stats::of(&col(&|p| p.1.circuit.depth() as f64)),
        depth_difference: Stats::of(&col(&|p| {
            p.0.circuit.depth() as f64 - p.1.circuit.depth() as f64
        })),
    }
}

fn record(
    topology: String,
    n: usize,
    algorithm: Algorithm,
    weighting: Weighting,
    run: &RunConfig,
    source: MatrixSource,
    cell: &CellResult,
) -> BenchRecord {
    BenchRecord {
        topology,
        n,
        algorithm,
        rule: weighting.label(),
        seed: run.seed,
        source: source.to_string(),
        cnot_count: cell.circuit.size(),
        depth: cell.circuit.depth(),
        wall_ms: cell.wall_ms,
    }
}

/// Output of the edge-density experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDensityResult {
    pub records: Vec<BenchRecord>,
    /// Per level: number of added edges and the paired statistics.
    pub levels: Vec<(usize, Improvement)>,
    /// Fingerprint of the matrix set used at every level.
    pub matrix_hash: u64,
}

/// A line of `n` qubits with progressively more random extra edges; the
/// same matrices are synthesized at every level, weighted and unweighted.
pub fn experiment_edge_density(
    n: usize,
    added_edges: &[usize],
    samples: usize,
    weighting: Weighting,
    run: &RunConfig,
) -> Result<EdgeDensityResult, SynthError> {
    let matrices: Vec<ParityMatrix> = (0..samples)
        .map(|s| sample_matrix(run.seed, n, MatrixSource::Uniform, s))
        .collect();
    let matrix_hash = matrix_set_hash(&matrices);
    let mut records = Vec::new();
    let mut levels = Vec::new();
    for &k in added_edges {
        let mut g = make_line(n);
        g.augment_random_edges(
            k,
            &mut cell_rng(run.seed, stream_key(&[EDGE_STREAM, n as u64])),
        )?;
        let label = format!("line:{n}+{k}");
        let pairs = paired_runs(&matrices, &g, Algorithm::RowCol, weighting, run)?;
        for (w, u) in &pairs {
            records.push(record(
                label.clone(),
                n,
                Algorithm::RowCol,
                weighting,
                run,
                MatrixSource::Uniform,
                w,
            ));
            records.push(record(
                label.clone(),
                n,
                Algorithm::RowCol,
                Weighting::Unweighted,
                run,
                MatrixSource::Uniform,
                u,
            ));
        }
        debug_assert_eq!(matrix_set_hash(&matrices), matrix_hash);
        levels.push((
            k,
            summarize_pairs(label, Algorithm::RowCol, weighting, &pairs),
        ));
    }
    Ok(EdgeDensityResult {
        records,
        levels,
        matrix_hash,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputSizeResult {
    pub records: Vec<BenchRecord>,
    pub levels: Vec<(usize, Improvement)>,
}

/// Complete graph on `n` qubits fed identity-plus-`k`-random-row-additions inputs.
pub fn experiment_input_size(
    n: usize,
    walk_lengths: &[usize],
    samples: usize,
    weighting: Weighting,
    run: &RunConfig,
) -> Result<InputSizeResult, SynthError> {
    let topo = Topology::Complete(n);
    let g = topo.build();
    let mut records = Vec::new();
    let mut levels = Vec::new();
    for &k in walk_lengths {
        let source = MatrixSource::Walk(k);
        let matrices: Vec<ParityMatrix> = (0..samples)
            .map(|s| sample_matrix(run.seed, n, source, s))
            .collect();
        let pairs = paired_runs(&matrices, &g, Algorithm::RowCol, weighting, run)?;
        for (w, u) in &pairs {
            records.push(record(
                topo.to_string(),
                n,
                Algorithm::RowCol,
                weighting,
                run,
                source,
                w,
            ));
            records.push(record(
                topo.to_string(),
                n,
                Algorithm::RowCol,
                Weighting::Unweighted,
                run,
                source,
                u,
            ));
        }
        levels.push((
            k,
            summarize_pairs(topo.to_string(), Algorithm::RowCol, weighting, &pairs),
        ));
    }
    Ok(InputSizeResult { records, levels })
}

/// The per-topology benchmark: RowCol (NAND vs unweighted), SteinerGauss
/// (OR vs unweighted) where feasible, and PMH on all-to-all graphs.
/// Infeasible SteinerGauss cells are skipped.
pub fn experiment_topologies(
    topologies: &[Topology],
    samples: usize,
    run: &RunConfig,
) -> Vec<BenchRecord> {
    let mut records = Vec::new();
    for topo in topologies {
        let g = topo.build();
        let n = g.vertex_count();
        let mut variants = vec![
            (Algorithm::RowCol, Weighting::Rule(WeightRule::Nand)),
            (Algorithm::RowCol, Weighting::Unweighted),
            (Algorithm::SteinerGauss, Weighting::Rule(WeightRule::Or)),
            (Algorithm::SteinerGauss, Weighting::Unweighted),
        ];
        if matches!(topo, Topology::Complete(_)) {
            variants.push((Algorithm::Pmh, Weighting::Unweighted));
        }
        for (vi, &(alg, weighting)) in variants.iter().enumerate() {
            let opts = SynthesisOptions::new(alg, weighting);
            let cells: Vec<Option<BenchRecord>> = (0..samples)
                .into_par_iter()
                .map(|s| {
                    let m = sample_matrix(run.seed, n, MatrixSource::Uniform, s);
                    let key = stream_key(&[vi as u64, s as u64]);
                    run_cell(&m, &g, &opts, run, key).ok().map(|c| {
                        record(
                            topo.to_string(),
                            n,
                            alg,
                            weighting,
                            run,
                            MatrixSource::Uniform,
                            &c,
                        )
                    })
                })
                .collect();
            records.extend(cells.into_iter().flatten());
        }
    }
    records
}

pub fn write_csv<W: std::io::Write>(records: &[BenchRecord], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn records_to_csv(records: &[BenchRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Reads records written by [`write_csv`]; lines starting with `#` are skipped.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<BenchRecord>, csv::Error> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input)
        .deserialize()
        .collect()
}

/// A gnuplot script plotting mean CNOT count and depth per `x_column` group
/// of a CSV written by this module.
pub fn gnuplot_script(csv_path: &str, title: &str) -> String {
    format!(
        "# gnuplot script; aggregate means per (topology, rule) first, e.g. with\n\
         #   mlr --icsv --opprint stats1 -a mean -f cnot_count,depth -g topology,rule {csv_path}\n\
         set datafile separator ','\n\
         set title '{title}'\n\
         set key autotitle columnhead\n\
         set xlabel 'sample'\n\
         set ylabel 'CNOT count'\n\
         plot '{csv_path}' using 0:7 with points title 'cnot_count', \\\n\
         \x20    '{csv_path}' using 0:8 with points title 'depth'\n"
    )
}
