//! Command-line front end.
//!
//! Exit codes: 0 finite solvable (or success), 1 not finite solvable, 2 error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Edge, ViewingGraph};
use crate::miner::{self, SamplingModel, SweepOptions, DESK_MAX_NODES};
use crate::solvability::{
    derive_seeds, finite_field_rank, finite_solvability_with_gauge, jacobian_for_seed, matrix_dims,
    maximal_components, ComponentPartition, SolvabilityReport, DEFAULT_PRIME, DEFAULT_TOLERANCE,
};

pub const EXIT_SOLVABLE: i32 = 0;
pub const EXIT_NOT_SOLVABLE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

pub const MINE_CSV_HEADER: &str = "n,edge_target,candidates,fin_solv";
pub const SWEEP_CSV_HEADER: &str =
    "n,density_percent,samples,fin_solv_count,component_count_min,component_count_max,seed";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Parser, Debug)]
#[command(
    name = "finsolv",
    version,
    about = "Finite solvability of viewing graphs"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Relative singular-value threshold for the rank test.
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Explicit seeds, comma separated. Overrides --master-seed.
    #[arg(long, global = true, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Number of seeds derived from the master seed.
    #[arg(long, global = true, default_value_t = 5)]
    pub seed_count: usize,
    #[arg(long, global = true, default_value_t = 42)]
    pub master_seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Write the Jacobian of the first seed in Matrix Market format.
    #[arg(long, global = true)]
    pub export_matrix: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "FINSOLV_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Include wall-clock times in JSON output.
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Test an edge list for finite solvability.
    Check {
        path: Option<PathBuf>,
        /// Gauge edge as `a,b` (default: first edge).
        #[arg(long)]
        gauge: Option<EdgeArg>,
        /// Also compute the rank over GF(p) with the first seed.
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = DEFAULT_PRIME)]
        prime: u64,
    },
    /// Partition the edges into maximal finite-solvable components.
    Components { path: Option<PathBuf> },
    /// Count minimally-solvable candidates for each node count.
    Mine {
        #[arg(required = true)]
        nodes: Vec<usize>,
        /// Dump passing graphs as edge-list files.
        #[arg(long)]
        witnesses_dir: Option<PathBuf>,
        /// Permit node counts above the default limit.
        #[arg(long)]
        allow_large_n: bool,
    },
    /// Random connected graphs at a given density.
    Sweep {
        nodes: usize,
        /// Edge density in percent; several values give one row each.
        density: Densities,
        #[arg(default_value_t = 200)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = ModelArg::Auto)]
        model: ModelArg,
    },
    /// Equation and unknown counts of the three formulations.
    Dims { path: Option<PathBuf> },
}

/// Edge written as `a,b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeArg(pub Edge);

impl std::str::FromStr for EdgeArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let ids: Vec<usize> = s
            .split(',')
            .map(|t| t.trim().parse().map_err(|e| format!("bad node {t:?}: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        match ids[..] {
            [a, b] => Ok(EdgeArg((a.min(b), a.max(b)))),
            _ => Err(format!("expected two node ids, got {s:?}")),
        }
    }
}

/// Comma-separated list of densities in percent.
#[derive(Clone, Debug, PartialEq)]
pub struct Densities(pub Vec<f64>);

impl std::str::FromStr for Densities {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad density {t:?}: {e}"))
            })
            .collect::<std::result::Result<_, _>>()
            .map(Densities)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Auto,
    EdgeCount,
    SpanningTreePlus,
}

impl From<ModelArg> for SamplingModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Auto => SamplingModel::Auto,
            ModelArg::EdgeCount => SamplingModel::EdgeCount,
            ModelArg::SpanningTreePlus => SamplingModel::SpanningTreePlus,
        }
    }
}

impl RunConfig {
    pub fn seed_list(&self) -> Result<Vec<u64>> {
        let seeds = if self.seeds.is_empty() {
            derive_seeds(self.master_seed, self.seed_count)
        } else {
            self.seeds.clone()
        };
        if seeds.is_empty() {
            return Err(Error::EmptySeeds);
        }
        Ok(seeds)
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    #[serde(flatten)]
    report: &'a SolvabilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    finite_field: Option<FiniteFieldOutput>,
}

#[derive(Serialize)]
struct FiniteFieldOutput {
    prime: u64,
    seed: u64,
    rank: usize,
    finite_solvable: bool,
}

fn read_graph(path: Option<&Path>) -> Result<ViewingGraph> {
    let text = match path {
        Some(p) => fs::read_to_string(p)?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    ViewingGraph::parse_edge_list(&text)
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn no_csv(command: &str) -> Error {
    Error::OutOfRange(format!(
        "csv output is only available for mine and sweep, not {command}"
    ))
}

fn check(
    cfg: &RunConfig,
    path: Option<&Path>,
    gauge: Option<EdgeArg>,
    exact: bool,
    prime: u64,
) -> Result<(String, i32)> {
    let g = read_graph(path)?;
    let seeds = cfg.seed_list()?;
    let gauge = match gauge {
        Some(EdgeArg(e)) => e,
        None => *g.edges().first().ok_or(Error::NoEdges)?,
    };
    let mut report = finite_solvability_with_gauge(&g, &seeds, cfg.tolerance, gauge)?;
    if let Some(out) = &cfg.export_matrix {
        let j = jacobian_for_seed(&g, seeds[0], gauge)?;
        j.write_matrix_market(io::BufWriter::new(fs::File::create(out)?))?;
    }
    let finite_field = if exact {
        let rank = finite_field_rank(&g, prime, seeds[0])?;
        let full = rank == 12 * g.node_count() && g.is_connected();
        Some(FiniteFieldOutput {
            prime,
            seed: seeds[0],
            rank,
            finite_solvable: full,
        })
    } else {
        None
    };
    let code = if report.finite_solvable {
        EXIT_SOLVABLE
    } else {
        EXIT_NOT_SOLVABLE
    };
    let wall = report.wall_time.unwrap_or(0.0);
    let text = match cfg.format {
        OutputFormat::Json => {
            if !cfg.timings {
                report.wall_time = None;
            }
            json(&CheckOutput {
                report: &report,
                finite_field,
            })?
        }
        OutputFormat::Csv => return Err(no_csv("check")),
        OutputFormat::Text => {
            let r = &report;
            let mut s = String::new();
            s += &format!(
                "finite solvable: {}\n",
                if r.finite_solvable { "yes" } else { "no" }
            );
            s += &format!(
                "nodes {}  edges {}  connected pieces {}\n",
                r.nodes, r.edges, r.connected_pieces
            );
            s += &format!("rank(J_P) {} of {}\n", r.rank_jp, r.expected_rank);
            s += &format!(
                "J {}x{}  rank {}  method {:?}\n",
                r.jacobian_rows, r.jacobian_cols, r.jacobian_rank, r.method
            );
            s += &format!(
                "sigma_min {:.3e}  sigma_max {:.3e}  tolerance {:e}\n",
                r.sigma_min, r.sigma_max, r.tolerance
            );
            s += &format!("gauge edge ({}, {})\n", r.gauge_edge.0, r.gauge_edge.1);
            let votes = r.agreement.iter().filter(|v| v.finite_solvable).count();
            s += &format!(
                "seeds {}/{} vote solvable{}\n",
                votes,
                r.agreement.len(),
                if r.seeds_agree { "" } else { " (disagreement)" }
            );
            if let Some(ff) = &finite_field {
                s += &format!(
                    "GF({}) rank {} -> {}\n",
                    ff.prime,
                    ff.rank,
                    if ff.finite_solvable { "yes" } else { "no" }
                );
            }
            s += &format!("time {wall:.3}s\n");
            s
        }
    };
    Ok((text, code))
}

fn components(cfg: &RunConfig, path: Option<&Path>) -> Result<String> {
    let g = read_graph(path)?;
    let seeds = cfg.seed_list()?;
    let p: ComponentPartition = maximal_components(&g, &seeds, cfg.tolerance)?;
    match cfg.format {
        OutputFormat::Json => json(&p),
        OutputFormat::Csv => Err(no_csv("components")),
        OutputFormat::Text => {
            let mut s = format!("{} component(s)\n", p.len());
            for (k, c) in p.components.iter().enumerate() {
                let edges: Vec<String> = c
                    .edges
                    .iter()
                    .map(|&e| format!("{}-{}", g.edges()[e].0, g.edges()[e].1))
                    .collect();
                let nodes: Vec<String> = c.nodes.iter().map(|v| v.to_string()).collect();
                s += &format!(
                    "component {k}: nodes [{}] edges [{}]\n",
                    nodes.join(" "),
                    edges.join(" ")
                );
            }
            Ok(s)
        }
    }
}

fn mine(
    cfg: &RunConfig,
    nodes: &[usize],
    witnesses_dir: Option<&Path>,
    allow_large_n: bool,
) -> Result<String> {
    if let Some(&n) = nodes
        .iter()
        .find(|&&n| n > DESK_MAX_NODES && !allow_large_n)
    {
        return Err(Error::OutOfRange(format!(
            "n = {n} exceeds {DESK_MAX_NODES}; pass --allow-large-n"
        )));
    }
    let mut results = Vec::new();
    let mut times = Vec::new();
    for &n in nodes {
        let start = Instant::now();
        let r = miner::mine_minimal(
            n,
            cfg.master_seed,
            cfg.seed_count.max(1),
            cfg.tolerance,
            witnesses_dir.is_some(),
        )?;
        times.push(start.elapsed().as_secs_f64());
        if let (Some(dir), Some(w)) = (witnesses_dir, &r.witnesses) {
            fs::create_dir_all(dir)?;
            for (k, text) in w.iter().enumerate() {
                fs::write(dir.join(format!("n{n}_{k:04}.txt")), text)?;
            }
        }
        results.push(r);
    }
    match cfg.format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Timed<'a> {
                #[serde(flatten)]
                result: &'a miner::MiningResult,
                wall_time: f64,
            }
            if cfg.timings {
                json(
                    &results
                        .iter()
                        .zip(&times)
                        .map(|(result, &wall_time)| Timed { result, wall_time })
                        .collect::<Vec<_>>(),
                )
            } else {
                json(&results)
            }
        }
        OutputFormat::Csv => {
            let mut s = format!("{MINE_CSV_HEADER}\n");
            for r in &results {
                s += &format!(
                    "{},{},{},{}\n",
                    r.n, r.edge_target, r.candidates, r.fin_solv
                );
            }
            Ok(s)
        }
        OutputFormat::Text => Ok(results
            .iter()
            .zip(&times)
            .map(|(r, t)| {
                format!(
                    "n = {}: {} edges, {} candidates, {} finite solvable ({t:.2}s)\n",
                    r.n, r.edge_target, r.candidates, r.fin_solv
                )
            })
            .collect()),
    }
}

fn sweep(
    cfg: &RunConfig,
    n: usize,
    densities: &[f64],
    samples: usize,
    model: ModelArg,
) -> Result<String> {
    let options = SweepOptions {
        model: model.into(),
        seed_count: cfg.seed_count.max(1),
        tolerance: cfg.tolerance,
    };
    let mut rows = Vec::new();
    for &d in densities {
        rows.push(miner::density_sweep(
            n,
            d,
            samples,
            cfg.master_seed,
            &options,
        )?);
    }
    match cfg.format {
        OutputFormat::Json => json(&rows),
        OutputFormat::Csv => {
            let mut s = format!("{SWEEP_CSV_HEADER}\n");
            for r in &rows {
                s += &format!(
                    "{},{},{},{},{},{},{}\n",
                    r.n,
                    r.density_percent,
                    r.samples,
                    r.fin_solv_count,
                    r.component_count_min,
                    r.component_count_max,
                    r.seed
                );
            }
            Ok(s)
        }
        OutputFormat::Text => Ok(rows
            .iter()
            .map(|r| {
                format!(
                    "density {}%: {}/{} finite solvable, components [{}, {}], mean edges {:.1}\n",
                    r.density_percent,
                    r.fin_solv_count,
                    r.samples,
                    r.component_count_min,
                    r.component_count_max,
                    r.mean_edges
                )
            })
            .collect()),
    }
}

fn dims(cfg: &RunConfig, path: Option<&Path>) -> Result<String> {
    let g = read_graph(path)?;
    let d = matrix_dims(&g);
    match cfg.format {
        OutputFormat::Json => json(&d),
        OutputFormat::Csv => Err(no_csv("dims")),
        OutputFormat::Text => Ok(format!(
            "n = {}, m = {}\n\
             formulation      equations  unknowns\n\
             triplet          {:>9}  {:>8}   (lower bound {:.1})\n\
             edge-reduced     {:>9}  {:>8}\n\
             node Jacobian    {:>9}  {:>8}\n",
            d.nodes, d.edges, d.e1, d.v12, d.e1_lower_bound, d.e2, d.v12, d.e3, d.v3
        )),
    }
}

fn dispatch(cli: &Cli) -> Result<(String, i32)> {
    let cfg = &cli.config;
    cfg.validate()?;
    match &cli.command {
        Command::Check {
            path,
            gauge,
            exact,
            prime,
        } => check(cfg, path.as_deref(), *gauge, *exact, *prime),
        Command::Components { path } => Ok((components(cfg, path.as_deref())?, 0)),
        Command::Mine {
            nodes,
            witnesses_dir,
            allow_large_n,
        } => Ok((
            mine(cfg, nodes, witnesses_dir.as_deref(), *allow_large_n)?,
            0,
        )),
        Command::Sweep {
            nodes,
            density,
            samples,
            model,
        } => Ok((sweep(cfg, *nodes, &density.0, *samples, *model)?, 0)),
        Command::Dims { path } => Ok((dims(cfg, path.as_deref())?, 0)),
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// its output once at the end. Returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_ERROR;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.config.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok((text, code)) => {
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_ERROR;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn run() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
