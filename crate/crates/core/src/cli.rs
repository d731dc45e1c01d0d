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

//! The `steiner-cnot` command line.
//!
//! Every subcommand is reachable through [`run_cli`], which never exits the
//! process itself and returns the exit code instead.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::bench::{
    cost, experiment_edge_density, experiment_input_size, experiment_topologies, gnuplot_script,
    pretrain, records_to_csv, BenchRecord, CostConfig, CostReport, Improvement, MatrixSource,
    RunConfig,
};
use crate::gf2::ParityMatrix;
use crate::seeded_rng;
use crate::synthesis::{synthesize, Algorithm, EmitFormat, SynthError, SynthesisOptions};
use crate::topology::{parse_coupling_file, CouplingGraph, Topology};
use crate::weighting::{WeightRule, Weighting};

/// Exit code for a SteinerGauss input the topology cannot support.
pub const EXIT_INFEASIBLE: i32 = 3;
/// Exit code for any other runtime failure. Usage errors exit with 2.
pub const EXIT_FAILURE: i32 = 1;

/// Environment variable read when `--threads` is not given.
pub const THREADS_ENV: &str = "STEINER_CNOT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "steiner-cnot",
    version,
    about = "CNOT circuit synthesis on restricted connectivity"
)]
pub struct Cli {
    /// Worker threads for benchmark runs (0 = all cores).
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize one parity matrix into a CNOT circuit.
    Synth(SynthArgs),
    /// Cost of one or more weight rules over a graph set.
    Cost(CostArgs),
    /// Rank all usable weight rules by cost.
    Pretrain(CostArgs),
    /// Weighted vs unweighted synthesis on a list of topologies.
    BenchTopology(TopologyArgs),
    /// Line graph with a growing number of random extra edges.
    BenchEdges(EdgeArgs),
    /// Complete graph with inputs made of k random row additions.
    BenchInputsize(InputSizeArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value = "rowcol")]
    pub algorithm: Algorithm,
    /// Weight rule: and, xor, or, nor, nxor, nand, one, vandaele or unweighted.
    /// Defaults to nand for rowcol and or for steinergauss.
    #[arg(long, value_parser = parse_weighting)]
    pub rule: Option<Weighting>,
    /// Built-in coupling map: line:N, grid:RxC, heavyhex:RxC, barbell:M:B, complete:N.
    #[arg(
        long,
        required_unless_present = "coupling_file",
        conflicts_with = "coupling_file"
    )]
    pub coupling: Option<Topology>,
    /// Coupling map file: "n" then one "u v [w]" line per edge.
    #[arg(long)]
    pub coupling_file: Option<PathBuf>,
    /// Matrix file: "n" then n rows of '0'/'1'. A random invertible matrix
    /// drawn from --seed is used when absent.
    #[arg(long)]
    pub matrix_file: Option<PathBuf>,
    #[arg(long, default_value = "gates")]
    pub emit: EmitFormat,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// PMH section size; defaults to round(log2(n) / 2).
    #[arg(long)]
    pub section_size: Option<usize>,
    /// SteinerGauss: weight the phase-2 trees as well.
    #[arg(long)]
    pub weight_decreasing_trees: bool,
    /// Print a JSON object instead of the bare circuit.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CostArgs {
    #[arg(long, default_value = "rowcol")]
    pub algorithm: Algorithm,
    /// Rules to evaluate (comma separated). `pretrain` ignores this and
    /// ranks all seven usable rules.
    #[arg(long, value_delimiter = ',', value_parser = parse_weighting)]
    pub rule: Vec<Weighting>,
    /// Graph set; defaults to grid and complete graphs on 9, 49 and 81 qubits.
    #[arg(long, value_delimiter = ',')]
    pub graphs: Vec<Topology>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value = "uniform")]
    pub source: MatrixSource,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct TopologyArgs {
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "line:25,grid:5x5,heavyhex:2x2,barbell:12:1,complete:25"
    )]
    pub topologies: Vec<Topology>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct EdgeArgs {
    #[arg(long, default_value_t = 25)]
    pub n: usize,
    /// Extra edges per level, on top of the line. 276 completes a 25-qubit line.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,10,25,50,100,150,200,250,276"
    )]
    pub edges: Vec<usize>,
    #[arg(long, default_value = "nand", value_parser = parse_weighting)]
    pub rule: Weighting,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct InputSizeArgs {
    #[arg(long, default_value_t = 25)]
    pub n: usize,
    /// Number of random row additions per input matrix.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,5,10,25,50,100,250,500,1000,10000"
    )]
    pub walks: Vec<usize>,
    #[arg(long, default_value = "nand", value_parser = parse_weighting)]
    pub rule: Weighting,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Record wall time per circuit (makes output non-reproducible).
    #[arg(long)]
    pub timing: bool,
    /// Re-verify every circuit rather than a 5% sample.
    #[arg(long)]
    pub verify_all: bool,
    /// Also write a gnuplot script for the CSV to this path (needs --out).
    #[arg(long, requires = "out")]
    #[serde(skip)]
    pub gnuplot: Option<PathBuf>,
}

impl CommonArgs {
    fn run_config(&self) -> RunConfig {
        let run = RunConfig {
            timing: self.timing,
            ..RunConfig::new(self.seed)
        };
        if self.verify_all {
            run.verify_all()
        } else {
            run
        }
    }
}

fn parse_weighting(s: &str) -> Result<Weighting, String> {
    match s.parse::<Weighting>() {
        Ok(Weighting::Rule(WeightRule::Zero)) => {
            Err("the zero rule gives every edge weight 0".into())
        }
        Ok(w) => Ok(w),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Synth(SynthError::InfeasibleTopology { .. }) => EXIT_INFEASIBLE,
            _ => EXIT_FAILURE,
        }
    }
}

fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAILURE;
        }
    };
    match pool.install(|| dispatch(&cli.command)) {
        Ok(text) => match write_output(&cli.command, &text, out) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn output_path(command: &Command) -> Option<&PathBuf> {
    match command {
        Command::Synth(a) => a.out.as_ref(),
        Command::Cost(a) | Command::Pretrain(a) => a.common.out.as_ref(),
        Command::BenchTopology(a) => a.common.out.as_ref(),
        Command::BenchEdges(a) => a.common.out.as_ref(),
        Command::BenchInputsize(a) => a.common.out.as_ref(),
    }
}

fn write_output(command: &Command, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match output_path(command) {
        Some(path) => fs::write(path, text).map_err(io_err(path)),
        None => out
            .write_all(text.as_bytes())
            .map_err(io_err(std::path::Path::new("<stdout>"))),
    }
}

fn dispatch(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Synth(a) => synth(a),
        Command::Cost(a) => cost_cmd(a, false),
        Command::Pretrain(a) => cost_cmd(a, true),
        Command::BenchTopology(a) => {
            let records = experiment_topologies(&a.topologies, a.samples, &a.common.run_config());
            bench_output("bench-topology", a, &a.common, &records, &[])
        }
        Command::BenchEdges(a) => {
            let res =
                experiment_edge_density(a.n, &a.edges, a.samples, a.rule, &a.common.run_config())?;
            bench_output("bench-edges", a, &a.common, &res.records, &res.levels)
        }
        Command::BenchInputsize(a) => {
            let res =
                experiment_input_size(a.n, &a.walks, a.samples, a.rule, &a.common.run_config())?;
            bench_output("bench-inputsize", a, &a.common, &res.records, &res.levels)
        }
    }
}

fn default_rule(algorithm: Algorithm) -> Weighting {
    match algorithm {
        Algorithm::RowCol => Weighting::Rule(WeightRule::Nand),
        Algorithm::SteinerGauss => Weighting::Rule(WeightRule::Or),
        Algorithm::Pmh => Weighting::Unweighted,
    }
}

fn read_file(path: &std::path::Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn synth(a: &SynthArgs) -> Result<String, CliError> {
    let graph: CouplingGraph = match (&a.coupling, &a.coupling_file) {
        (Some(t), _) => t.build(),
        (None, Some(path)) => parse_coupling_file(&read_file(path)?).map_err(SynthError::from)?,
        (None, None) => return Err(CliError::Input("a coupling map is required".into())),
    };
    let n = graph.vertex_count();
    let matrix = match &a.matrix_file {
        Some(path) => ParityMatrix::parse_text(&read_file(path)?).map_err(SynthError::from)?,
        None => ParityMatrix::random_invertible(n, &mut seeded_rng(a.seed)),
    };
    let weighting = a.rule.unwrap_or_else(|| default_rule(a.algorithm));
    let opts = SynthesisOptions {
        pmh_section_size: a.section_size,
        weight_decreasing_trees: a.weight_decreasing_trees,
        ..SynthesisOptions::new(a.algorithm, weighting)
    };
    let circuit = synthesize(&matrix, &graph, &opts)?;
    if !circuit.verify(&matrix)? {
        return Err(SynthError::Invariant(
            "synthesized circuit does not implement the input".into(),
        )
        .into());
    }
    let text = circuit.emit(a.emit);
    if !a.json {
        return Ok(text);
    }
    let doc = serde_json::json!({
        "command": "synth",
        "config": a,
        "rule": weighting.label(),
        "n": n,
        "cnot_count": circuit.size(),
        "depth": circuit.depth(),
        "circuit": text,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn cost_cmd(a: &CostArgs, rank: bool) -> Result<String, CliError> {
    let cfg = CostConfig {
        algorithm: a.algorithm,
        graphs: if a.graphs.is_empty() {
            crate::bench::default_pretrain_graphs()
        } else {
            a.graphs.clone()
        },
        samples: a.samples,
        source: a.source,
        run: a.common.run_config(),
    };
    if cfg.samples == 0 {
        return Err(CliError::Input("--samples must be at least 1".into()));
    }
    let reports: Vec<CostReport> = if rank {
        pretrain(&cfg)
    } else {
        let rules = if a.rule.is_empty() {
            WeightRule::USABLE
                .iter()
                .map(|&r| Weighting::Rule(r))
                .collect()
        } else {
            a.rule.clone()
        };
        rules.into_iter().map(|w| cost(w, &cfg)).collect()
    };
    let name = if rank { "pretrain" } else { "cost" };
    if a.common.json {
        let doc = serde_json::json!({ "command": name, "config": a, "reports": reports });
        return Ok(serde_json::to_string_pretty(&doc)? + "\n");
    }
    let mut text = format!(
        "# {name} algorithm={} seed={} samples={} source={}\n",
        a.algorithm, a.common.seed, a.samples, a.source
    );
    text.push_str("rank,rule,cost,std_err,skipped\n");
    for (i, r) in reports.iter().enumerate() {
        text.push_str(&format!(
            "{},{},{:.4},{:.4},{}\n",
            i + 1,
            r.weighting.label(),
            r.cost,
            r.std_err,
            r.errors.len()
        ));
    }
    Ok(text)
}

fn bench_output<C: Serialize>(
    name: &str,
    config: &C,
    common: &CommonArgs,
    records: &[BenchRecord],
    levels: &[(usize, Improvement)],
) -> Result<String, CliError> {
    if let (Some(script), Some(csv)) = (&common.gnuplot, &common.out) {
        fs::write(script, gnuplot_script(&csv.display().to_string(), name))
            .map_err(io_err(script))?;
    }
    if common.json {
        let doc = serde_json::json!({
            "command": name,
            "config": config,
            "records": records,
            "levels": levels,
        });
        return Ok(serde_json::to_string_pretty(&doc)? + "\n");
    }
    let header = serde_json::to_string(&serde_json::json!({ "command": name, "config": config }))?;
    Ok(format!("# {header}\n{}", records_to_csv(records)))
}
