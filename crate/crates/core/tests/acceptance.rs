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

//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.
//!
//! Run alone with `cargo test --test acceptance`; pass criterion numbers
//! (`cargo test --test acceptance -- 4 7`) to run a subset.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use steiner_cnot::bench::{
    cost, experiment_edge_density, experiment_input_size, experiment_topologies, improvement,
    records_to_csv, CostConfig, MatrixSource, RunConfig, Stats,
};
use steiner_cnot::cli::run_cli;
use steiner_cnot::synthesis::{pmh, rowcol_observed, synthesize};
use steiner_cnot::{
    seeded_rng, Algorithm, BitRow, CnotCircuit, ParityMatrix, SynthesisOptions, Topology,
    WeightRule, Weighting,
};

use common::{
    check_articulation, check_articulation_exhaustive, check_articulation_random,
    check_steiner_all_terminal_sets, random_connected_graph, small_generator_graphs, Sweep,
};

const SEED: u64 = 2024;
const NAND: Weighting = Weighting::Rule(WeightRule::Nand);

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn within_time(outcome: Outcome, elapsed: Duration, limit: Duration) -> Outcome {
    if elapsed <= limit {
        outcome
    } else {
        Outcome::new(
            false,
            format!("{} [over time limit {limit:?}]", outcome.detail),
        )
    }
}

fn matrix(n: usize, seed: u64) -> ParityMatrix {
    ParityMatrix::random_invertible(n, &mut seeded_rng(seed))
}

fn golden() -> Outcome {
    let run = || {
        let m = ParityMatrix::from_strs(&["0011", "1011", "0111", "0101"]).unwrap();
        let c = CnotCircuit::from_gates(4, vec![(1, 3), (0, 1), (3, 2), (2, 1), (1, 0)]).unwrap();
        (c.verify(&m).unwrap(), c.depth(), c.size())
    };
    run();
    let start = Instant::now();
    let (ok, depth, size) = run();
    let elapsed = start.elapsed();
    let pass = ok && depth == 4 && size == 5 && elapsed < Duration::from_millis(1);
    Outcome::new(
        pass,
        format!("verify={ok} depth={depth} size={size} in {elapsed:?}"),
    )
}

fn soundness() -> Outcome {
    let start = Instant::now();
    let cases: Vec<(u64, Topology)> = {
        let mut rng = seeded_rng(SEED);
        (0..1000u64)
            .map(|case| {
                let topo = match case % 5 {
                    0 => Topology::Line(rng.gen_range(2..=49)),
                    1 => {
                        let r = rng.gen_range(1..=7);
                        Topology::Grid(r, rng.gen_range(2..=49 / r).max(2))
                    }
                    2 => Topology::Barbell(rng.gen_range(2..=24), rng.gen_range(1..=2)),
                    3 => Topology::HeavyHex(1, rng.gen_range(1..=3)),
                    _ => Topology::Complete(rng.gen_range(2..=49)),
                };
                (case, topo)
            })
            .collect()
    };
    let failures: Vec<String> = cases
        .par_iter()
        .flat_map_iter(|(case, topo)| {
            let g = topo.build();
            let m = matrix(g.vertex_count(), SEED ^ case);
            let mut bad = Vec::new();
            for rule in WeightRule::USABLE {
                for alg in [Algorithm::RowCol, Algorithm::SteinerGauss] {
                    if alg == Algorithm::SteinerGauss && matches!(topo, Topology::HeavyHex(..)) {
                        continue;
                    }
                    let res =
                        synthesize(&m, &g, &SynthesisOptions::new(alg, Weighting::Rule(rule)));
                    match res {
                        Ok(c) if c.verify(&m).unwrap() && c.respects(&g) => {}
                        Ok(_) => bad.push(format!("{alg}/{rule} on {topo}: wrong circuit")),
                        Err(e) => bad.push(format!("{alg}/{rule} on {topo}: {e}")),
                    }
                }
            }
            bad
        })
        .collect();
    let max_n = cases.iter().map(|(_, t)| t.qubits()).max().unwrap();
    let outcome = Outcome::new(
        failures.is_empty(),
        format!(
            "1000 cases x 7 rules, max n {max_n}, {} failures {:?}",
            failures.len(),
            failures.first()
        ),
    );
    within_time(outcome, start.elapsed(), Duration::from_secs(120))
}

fn steiner_approximation() -> Outcome {
    let mut sweep = Sweep::default();
    for topo in small_generator_graphs(9) {
        check_steiner_all_terminal_sets(&topo.build(), &topo.to_string(), &mut sweep);
    }
    let mut rng = seeded_rng(SEED);
    for i in 0..100 {
        let n = rng.gen_range(2..=8);
        let max_w = if i % 2 == 0 { 1 } else { 9 };
        let g = random_connected_graph(n, rng.gen_range(0.0..0.7), max_w, &mut rng);
        check_steiner_all_terminal_sets(&g, &format!("random #{i}"), &mut sweep);
    }
    Outcome::new(
        sweep.ok(),
        format!(
            "{} terminal sets, {} violations {:?}",
            sweep.checked,
            sweep.violations.len(),
            sweep.violations.first()
        ),
    )
}

fn reference_costs(algorithm: Algorithm) -> [(WeightRule, f64); 7] {
    use WeightRule::*;
    match algorithm {
        Algorithm::RowCol => [
            (And, 4.1),
            (Xor, 3.6),
            (Or, 3.6),
            (Nor, 3.8),
            (Nxor, 3.8),
            (Nand, 3.5),
            (One, 3.7),
        ],
        _ => [
            (And, 4.1),
            (Xor, 3.7),
            (Or, 3.7),
            (Nor, 4.0),
            (Nxor, 4.0),
            (Nand, 3.8),
            (One, 3.8),
        ],
    }
}

fn cost_ranking() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for alg in [Algorithm::RowCol, Algorithm::SteinerGauss] {
        let cfg = CostConfig::standard(alg, SEED);
        let mut costs = Vec::new();
        for (rule, expected) in reference_costs(alg) {
            let report = cost(Weighting::Rule(rule), &cfg);
            pass &= report.errors.is_empty() && (report.cost - expected).abs() <= 0.3;
            costs.push((rule, report.cost));
            parts.push(format!("{alg}/{rule} {:.3} (reference {expected})", report.cost));
        }
        if alg == Algorithm::RowCol {
            let nand = costs
                .iter()
                .find(|(r, _)| *r == WeightRule::Nand)
                .unwrap()
                .1;
            let first = costs
                .iter()
                .all(|&(r, c)| r == WeightRule::Nand || c > nand);
            pass &= first;
            parts.push(format!("nand strictly first: {first}"));
        }
    }
    within_time(
        Outcome::new(pass, parts.join(", ")),
        start.elapsed(),
        Duration::from_secs(15 * 60),
    )
}

fn improvement_claims() -> Outcome {
    let run = RunConfig::new(SEED);
    let imp = |t: Topology| {
        improvement(
            &t,
            Algorithm::RowCol,
            NAND,
            100,
            MatrixSource::Uniform,
            &run,
        )
        .unwrap()
        .improvement
    };
    let complete = imp(Topology::Complete(25));
    let grid = imp(Topology::Grid(5, 5));
    let heavy = imp(Topology::HeavyHex(2, 2));
    let pass = complete >= 0.05 && (-0.01..=0.05).contains(&grid) && heavy.abs() <= 0.02;
    Outcome::new(
        pass,
        format!("complete:25 {complete:.4} (>= 0.05), grid:5x5 {grid:.4} (in [-0.01, 0.05]), heavyhex:2x2 {heavy:.4} (|.| <= 0.02)"),
    )
}

fn depth_claim() -> Outcome {
    let run = RunConfig::new(SEED);
    let full = 25 * 24 / 2 - 24;
    let res = experiment_edge_density(
        25,
        &[0, full / 4, full / 2, 3 * full / 4, full],
        100,
        NAND,
        &run,
    )
    .unwrap();
    let (k, last) = res.levels.last().unwrap();
    let d = last.depth_difference;
    let upper = d.mean + 1.96 * d.std_err;
    Outcome::new(
        *k == full && upper < 0.0,
        format!(
            "at +{k} edges: weighted depth {:.1}, unweighted {:.1}, paired difference {:.1} +- {:.1} (95% upper {upper:.1})",
            last.weighted_depth.mean, last.unweighted_depth.mean, d.mean, d.std_err
        ),
    )
}

fn pmh_baseline() -> Outcome {
    let start = Instant::now();
    let sizes: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|s| {
            let m =
                steiner_cnot::bench::sample_matrix(SEED, 100, MatrixSource::Uniform, s as usize);
            let c = pmh(&m, None).unwrap();
            assert!(c.verify(&m).unwrap());
            c.size() as f64
        })
        .collect();
    let stats = Stats::of(&sizes);
    let rel = stats.mean / 8175.0 - 1.0;
    let outcome = Outcome::new(
        rel.abs() <= 0.05,
        format!(
            "mean {:.1} +- {:.1}, {:+.1}% from 8175",
            stats.mean,
            stats.std_err,
            rel * 100.0
        ),
    );
    within_time(outcome, start.elapsed(), Duration::from_secs(300))
}

fn saturation() -> Outcome {
    let run = RunConfig::new(SEED);
    let walks = [
        0, 1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000,
    ];
    let res = experiment_input_size(25, &walks, 100, NAND, &run).unwrap();
    let uniform = improvement(
        &Topology::Complete(25),
        Algorithm::RowCol,
        NAND,
        100,
        MatrixSource::Uniform,
        &run,
    )
    .unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, pick, base) in [
        ("nand", 0, uniform.weighted_size),
        ("unweighted", 1, uniform.unweighted_size),
    ] {
        let series: Vec<Stats> = res
            .levels
            .iter()
            .map(|(_, imp)| {
                if pick == 0 {
                    imp.weighted_size
                } else {
                    imp.unweighted_size
                }
            })
            .collect();
        let monotone = series.windows(2).all(|w| {
            w[1].mean >= w[0].mean - 3.0 * (w[0].std_err.powi(2) + w[1].std_err.powi(2)).sqrt()
        });
        let last = series.last().unwrap().mean;
        let rel = last / base.mean - 1.0;
        pass &= monotone && rel.abs() <= 0.03;
        parts.push(format!(
            "{label}: k=10^4 mean {last:.1} vs uniform {:.1} ({:+.2}%), monotone {monotone}",
            base.mean,
            rel * 100.0
        ));
    }
    Outcome::new(pass, parts.join("; "))
}

fn cli_csv(args: &[&str]) -> Vec<u8> {
    let mut out = Vec::new();
    let code = run_cli(
        std::iter::once("steiner-cnot").chain(args.iter().copied()),
        &mut out,
        &mut std::io::sink(),
    );
    assert_eq!(code, 0);
    out
}

fn determinism() -> Outcome {
    let run = RunConfig::new(SEED);
    let topologies: Vec<Topology> = [
        "line:9",
        "grid:3x4",
        "heavyhex:1x1",
        "barbell:4:2",
        "complete:10",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect();
    let topo = || records_to_csv(&experiment_topologies(&topologies, 10, &run));
    let edges = || {
        records_to_csv(
            &experiment_edge_density(10, &[0, 10, 36], 10, NAND, &run)
                .unwrap()
                .records,
        )
    };
    let sizes = || {
        records_to_csv(
            &experiment_input_size(10, &[0, 10, 100], 10, NAND, &run)
                .unwrap()
                .records,
        )
    };
    let args = [
        "bench-topology",
        "--topologies",
        "grid:3x3,complete:8",
        "--samples",
        "8",
        "--seed",
        "5",
    ];
    let serial = cli_csv(&[&["--threads", "1"], &args[..]].concat());
    let checks = [
        ("bench-topology", topo() == topo()),
        ("bench-edges", edges() == edges()),
        ("bench-inputsize", sizes() == sizes()),
        (
            "cli",
            cli_csv(&args) == cli_csv(&args) && cli_csv(&args) == serial,
        ),
    ];
    let pass = checks.iter().all(|c| c.1);
    Outcome::new(pass, format!("{checks:?}"))
}

fn property_suite() -> Outcome {
    // solve_combination on RowCol-shaped instances.
    let mut rng = seeded_rng(SEED);
    let mut solve_bad = 0;
    for t in 0..10_000u64 {
        let n = rng.gen_range(1..=40);
        let i = rng.gen_range(0..n);
        let active: Vec<usize> = (0..n).filter(|&r| r == i || rng.gen_bool(0.6)).collect();
        let block = matrix(active.len(), t);
        let mut m = ParityMatrix::identity(n);
        for (a, &r) in active.iter().enumerate() {
            for (b, &c) in active.iter().enumerate() {
                m.set(r, c, block.get(a, b));
            }
        }
        let ok = m.solve_combination(&active, i).is_ok_and(|sol| {
            let mut acc = m.row(i);
            acc.xor_assign(&BitRow::unit(n, i));
            for &r in &sol {
                acc.xor_assign(&m.row(r));
            }
            acc.is_zero() && sol.iter().all(|r| active.contains(r))
        });
        solve_bad += usize::from(!ok);
    }

    let mut sweep = Sweep::default();
    for n in 1..=7 {
        check_articulation_exhaustive(n, &mut sweep);
    }
    check_articulation_random(12, 50_000, &mut rng, &mut sweep);
    for topo in small_generator_graphs(12) {
        let g = topo.build();
        check_articulation(&g, (1u64 << g.capacity()) - 1, &mut sweep);
    }

    let mut rowcol_bad = 0;
    let topologies = [
        "line:10",
        "grid:4x4",
        "heavyhex:1x1",
        "barbell:5:1",
        "complete:12",
    ];
    for seed in 0..200u64 {
        let topo: Topology = topologies[seed as usize % topologies.len()]
            .parse()
            .unwrap();
        let g = topo.build();
        let m = matrix(g.vertex_count(), seed);
        let rule = Weighting::Rule(WeightRule::USABLE[seed as usize % 7]);
        let mut steps_ok = true;
        let res = rowcol_observed(&m, &g, rule, |step| {
            steps_ok &=
                step.matrix.row_is_unit(step.vertex) && step.matrix.col_is_unit(step.vertex);
        });
        let ok = steps_ok && matches!(res, Ok(ref c) if c.verify(&m).unwrap() && c.respects(&g));
        rowcol_bad += usize::from(!ok);
    }
    Outcome::new(
        solve_bad == 0 && sweep.ok() && rowcol_bad == 0,
        format!(
            "solve 10000 instances, {solve_bad} bad; articulation {} graphs (all <= 7 vertices, random <= 12), {} bad; rowcol 200 runs, {rowcol_bad} bad",
            sweep.checked,
            sweep.violations.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("golden circuit", golden),
        ("soundness sweep", soundness),
        ("steiner approximation", steiner_approximation),
        ("cost table replication", cost_ranking),
        ("improvement claims", improvement_claims),
        ("depth at full connectivity", depth_claim),
        ("pmh baseline", pmh_baseline),
        ("input size saturation", saturation),
        ("determinism", determinism),
        ("property suite", property_suite),
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    for (idx, (name, check)) in criteria.iter().enumerate() {
        let number = idx + 1;
        if !selected.is_empty() && !selected.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {number:>2} {verdict} {name} ({:.1}s): {}",
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
        if !outcome.pass {
            failed.push(number);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
