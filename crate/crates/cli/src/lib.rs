//! `sufctl`: graph generation, controllability curves, driver placement,
//! placement verification and benchmark tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use sufficient_control::edcp::{edcp, naive_placement, EdcpError, PlacementReport};
use sufficient_control::elpgm::{elpgm_optimize, ElpgmConfig, ElpgmError};
use sufficient_control::graph::{
    generate_ba, generate_ba_sized, generate_er, parse_edge_list, DirectedGraph, GraphError,
};
use sufficient_control::lti::{control_cost, simulate, LtiError, OptimalInput, DEFAULT_STEPS};
use sufficient_control::mcfp::{controllability_curve, McfpError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Infeasible(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<LtiError> for CliError {
    fn from(e: LtiError) -> Self {
        match e {
            LtiError::Uncontrollable => CliError::Infeasible(e.to_string()),
            LtiError::IllConditioned { .. } | LtiError::ZeroColumn(_) => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<McfpError> for CliError {
    fn from(e: McfpError) -> Self {
        match e {
            McfpError::TargetOutOfRange { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<EdcpError> for CliError {
    fn from(e: EdcpError) -> Self {
        match e {
            EdcpError::InsufficientCover { .. } | EdcpError::TooFewControllers { .. } => {
                CliError::Infeasible(e.to_string())
            }
            EdcpError::Mcfp(e) => e.into(),
            EdcpError::Lti(e) => e.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<ElpgmError> for CliError {
    fn from(e: ElpgmError) -> Self {
        match e {
            ElpgmError::NoControllableStart => CliError::Infeasible(e.to_string()),
            ElpgmError::Lti(e) => e.into(),
            ElpgmError::Graph(e) => e.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sufctl",
    version,
    about = "Sufficient control of complex networks"
)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Control horizon.
    #[arg(long = "tf", global = true, default_value_t = 2.0)]
    pub t_f: f64,
    /// Output format where a command offers more than one.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random graph as an edge list.
    Gen {
        #[command(subcommand)]
        model: Model,
    },
    /// Maximum controllable fraction for every number of controllers.
    Curve { graph: PathBuf },
    /// Place drivers and controlled nodes; writes placement JSON.
    Place(PlaceArgs),
    /// Check a placement file: controllability, cost and driving residual.
    Verify { graph: PathBuf, placement: PathBuf },
    /// Algorithm by fraction cost table on seeded instances.
    Bench(BenchArgs),
}

#[derive(Debug, Subcommand)]
pub enum Model {
    /// Erdős–Rényi with mean total degree `mu`.
    Er {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        mu: f64,
    },
    /// Barabási–Albert with `m` edges per new node, or sized to `edges`.
    Ba {
        #[arg(long)]
        n: usize,
        #[arg(long, required_unless_present = "edges", conflicts_with = "edges")]
        m: Option<usize>,
        #[arg(long)]
        edges: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Edcp,
    Elpgm,
    Naive,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Edcp => "edcp",
            Algorithm::Elpgm => "elpgm",
            Algorithm::Naive => "naive",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ElpgmArgs {
    /// Restarts of the projected gradient search.
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Iterations per restart.
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
}

impl ElpgmArgs {
    fn config(&self, seed: u64, t_f: f64) -> ElpgmConfig {
        ElpgmConfig {
            restarts: self.restarts,
            k_f: self.iters,
            seed,
            t_f,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct PlaceArgs {
    pub graph: PathBuf,
    /// Number of drivers.
    #[arg(short = 'M')]
    pub m: usize,
    /// Number of controlled nodes.
    #[arg(
        short = 'R',
        conflicts_with = "fraction",
        required_unless_present = "fraction"
    )]
    pub r: Option<usize>,
    /// Controlled fraction in (0, 1]; `R = ceil(fraction * n)`.
    #[arg(long)]
    pub fraction: Option<f64>,
    #[arg(long, value_enum, default_value_t = Algorithm::Edcp)]
    pub algo: Algorithm,
    /// eLPGM only: write the cost trace as CSV here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub elpgm: ElpgmArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Network {
    Er,
    Ba,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Random model for generated instances.
    #[arg(long, value_enum, default_value_t = Network::Er, conflicts_with = "graph")]
    pub network: Network,
    /// Benchmark a graph file instead of generated instances.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 300)]
    pub edges: usize,
    /// Generated instances, seeded `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 1)]
    pub instances: u64,
    #[arg(short = 'M', default_value_t = 32)]
    pub m: usize,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.4,0.5,0.6,0.7,0.8,0.9,1.0"
    )]
    pub fractions: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "edcp,naive")]
    pub algos: Vec<Algorithm>,
    #[command(flatten)]
    pub elpgm: ElpgmArgs,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let out = cli.out.clone();
    match run(&cli).and_then(|text| emit(out.as_deref(), &text)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("sufctl: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_graph(path: &Path) -> Result<DirectedGraph, CliError> {
    Ok(parse_edge_list(&read_file(path)?)?)
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Costs of `1e4` and above in the `2.351234E04` style, smaller ones in
/// shortest round-trip form.
pub fn format_cost(e: f64) -> String {
    if !e.is_finite() {
        return "inf".into();
    }
    if e.abs() < 1e4 {
        return format!("{e:?}");
    }
    let s = format!("{e:.6E}");
    let (mantissa, exp) = s.split_once('E').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}E{exp:02}")
}

/// Runs the parsed command and returns what it prints.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    if !(cli.t_f.is_finite() && cli.t_f > 0.0) {
        return Err(CliError::Usage(format!(
            "--tf must be positive, got {}",
            cli.t_f
        )));
    }
    match &cli.command {
        Command::Gen { model } => cmd_gen(model, cli.seed, cli.format),
        Command::Curve { graph } => cmd_curve(&load_graph(graph)?, cli.format),
        Command::Place(args) => cmd_place(args, cli.seed, cli.t_f),
        Command::Verify { graph, placement } => cmd_verify(
            &load_graph(graph)?,
            placement,
            cli.seed,
            cli.t_f,
            cli.format,
        ),
        Command::Bench(args) => cmd_bench(args, cli.seed, cli.t_f, cli.format),
    }
}

fn cmd_gen(model: &Model, seed: u64, format: Option<Format>) -> Result<String, CliError> {
    let g = match *model {
        Model::Er { n, mu } => generate_er(n, mu, seed)?,
        Model::Ba { n, m: Some(m), .. } => generate_ba(n, m, seed)?,
        Model::Ba {
            n, edges: Some(e), ..
        } => generate_ba_sized(n, e, seed)?,
        Model::Ba { .. } => return Err(CliError::Usage("ba needs --m or --edges".into())),
    };
    Ok(match format {
        Some(Format::Json) => to_json(&g.to_json()),
        _ => g.to_edge_list(),
    })
}

#[derive(Serialize)]
struct CurveRow {
    #[serde(rename = "M")]
    m: usize,
    rmax: usize,
    frac_controllable: f64,
    frac_drivers_normalized: f64,
}

fn cmd_curve(g: &DirectedGraph, format: Option<Format>) -> Result<String, CliError> {
    let curve = controllability_curve(g)?;
    Ok(match format {
        Some(Format::Json) => {
            let rows: Vec<CurveRow> = curve
                .points
                .iter()
                .map(|p| CurveRow {
                    m: p.m,
                    rmax: p.rmax,
                    frac_controllable: curve.frac_controllable(p),
                    frac_drivers_normalized: curve.frac_drivers_normalized(p),
                })
                .collect();
            to_json(&rows)
        }
        _ => curve.to_csv(),
    })
}

/// `R` from an explicit count or a fraction of `n`, checked against `M`.
fn resolve_r(
    n: usize,
    m: usize,
    r: Option<usize>,
    fraction: Option<f64>,
) -> Result<usize, CliError> {
    let r = match (r, fraction) {
        (Some(r), _) => r,
        (None, Some(f)) if f > 0.0 && f <= 1.0 => (f * n as f64 - 1e-9).ceil().max(1.0) as usize,
        (None, Some(f)) => return Err(CliError::Usage(format!("fraction {f} outside (0, 1]"))),
        (None, None) => return Err(CliError::Usage("give -R or --fraction".into())),
    };
    if m == 0 || m > r || r > n {
        return Err(CliError::Usage(format!(
            "need 1 <= M <= R <= n, got M = {m}, R = {r}, n = {n}"
        )));
    }
    Ok(r)
}

fn place(
    g: &DirectedGraph,
    algo: Algorithm,
    m: usize,
    r: usize,
    t_f: f64,
    cfg: &ElpgmConfig,
) -> Result<(PlacementReport, Option<String>), CliError> {
    Ok(match algo {
        Algorithm::Edcp => (PlacementReport::from_edcp(g, &edcp(g, m, r, t_f)?), None),
        Algorithm::Naive => (
            PlacementReport::from_edcp(g, &naive_placement(g, m, r, t_f)?),
            None,
        ),
        Algorithm::Elpgm => {
            let res = elpgm_optimize(&g.adjacency_matrix(), m, r, cfg)?;
            let report = PlacementReport::new(g, &res.placement, &[], f64::NAN, Some(res.e_best));
            (report, Some(res.trace_csv()))
        }
    })
}

fn cmd_place(args: &PlaceArgs, seed: u64, t_f: f64) -> Result<String, CliError> {
    let g = load_graph(&args.graph)?;
    let r = resolve_r(g.node_count(), args.m, args.r, args.fraction)?;
    let cfg = args.elpgm.config(seed, t_f);
    let (report, trace) = place(&g, args.algo, args.m, r, t_f, &cfg)?;
    if let (Some(path), Some(trace)) = (&args.trace, trace) {
        write_file(path, &trace)?;
    }
    Ok(to_json(&report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub controllable: bool,
    pub cost: Option<f64>,
    /// `‖C x(t_f)‖ / ‖C x0‖` under the minimum-energy input.
    pub residual: Option<f64>,
}

pub fn verify(
    g: &DirectedGraph,
    report: &PlacementReport,
    seed: u64,
    t_f: f64,
) -> Result<Verification, CliError> {
    let p = report.to_placement(g, t_f)?;
    let a = g.adjacency_matrix();
    let n = g.node_count();
    if !p.is_output_controllable(&a)? {
        return Ok(Verification {
            controllable: false,
            cost: None,
            residual: None,
        });
    }
    let cost = control_cost(&a, &p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let input = OptimalInput::new(&a, &p, &x0)?;
    let traj = simulate(&a, &p.b_matrix(n), |t| input.at(t), &x0, t_f, DEFAULT_STEPS)?;
    let c = p.c_matrix(n);
    let residual = (&c * traj.final_state()).norm() / (&c * &x0).norm().max(f64::MIN_POSITIVE);
    Ok(Verification {
        controllable: true,
        cost: Some(cost),
        residual: Some(residual),
    })
}

fn cmd_verify(
    g: &DirectedGraph,
    placement: &Path,
    seed: u64,
    t_f: f64,
    format: Option<Format>,
) -> Result<String, CliError> {
    let report: PlacementReport = serde_json::from_str(&read_file(placement)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", placement.display())))?;
    let v = verify(g, &report, seed, t_f)?;
    Ok(match format {
        Some(Format::Json) => to_json(&v),
        _ => format!(
            "controllable,cost,residual\n{},{},{}\n",
            v.controllable,
            v.cost.map(format_cost).unwrap_or_default(),
            v.residual.map(|r| format!("{r:.3e}")).unwrap_or_default()
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub network: String,
    pub n: usize,
    pub edges: usize,
    pub fraction: f64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "R")]
    pub r: usize,
    pub algorithm: &'static str,
    /// `None` when the algorithm found no controllable placement.
    pub cost: Option<f64>,
    pub wall_time_s: f64,
}

/// Every (instance, fraction, algorithm) cell, run in parallel and returned
/// in that nested order.
pub fn bench(args: &BenchArgs, seed: u64, t_f: f64) -> Result<Vec<BenchRow>, CliError> {
    if args.fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
        return Err(CliError::Usage("fractions must lie in (0, 1]".into()));
    }
    let instances: Vec<(String, DirectedGraph)> = match &args.graph {
        Some(path) => {
            let name = path
                .file_stem()
                .map_or("graph".into(), |s| s.to_string_lossy().into_owned());
            vec![(name, load_graph(path)?)]
        }
        None => (0..args.instances)
            .map(|i| {
                let s = seed + i;
                let g = match args.network {
                    Network::Er => {
                        generate_er(args.n, 2.0 * args.edges as f64 / args.n.max(1) as f64, s)?
                    }
                    Network::Ba => generate_ba_sized(args.n, args.edges, s)?,
                };
                let name = match args.network {
                    Network::Er => "ER",
                    Network::Ba => "BA",
                };
                Ok((name.to_string(), g))
            })
            .collect::<Result<_, CliError>>()?,
    };
    let mut cells = Vec::new();
    for (k, (_, g)) in instances.iter().enumerate() {
        for &f in &args.fractions {
            let r = resolve_r(g.node_count(), args.m, None, Some(f))?;
            for &algo in &args.algos {
                cells.push((k, f, r, algo));
            }
        }
    }
    let rows = cells
        .par_iter()
        .map(|&(k, fraction, r, algo)| {
            let (name, g) = &instances[k];
            let cfg = args.elpgm.config(seed, t_f);
            let start = Instant::now();
            let cost = match place(g, algo, args.m, r, t_f, &cfg) {
                Ok((report, _)) => report.e_exact,
                Err(CliError::Infeasible(_)) | Err(CliError::Numeric(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(BenchRow {
                network: name.clone(),
                n: g.node_count(),
                edges: g.edge_count(),
                fraction,
                m: args.m,
                r,
                algorithm: algo.name(),
                cost,
                wall_time_s: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("network,n,edges,fraction,M,R,algorithm,cost,wall_time_s\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:?},{},{},{},{},{:.3}",
            r.network,
            r.n,
            r.edges,
            r.fraction,
            r.m,
            r.r,
            r.algorithm,
            r.cost.map_or("inf".into(), format_cost),
            r.wall_time_s
        );
    }
    out
}

fn cmd_bench(
    args: &BenchArgs,
    seed: u64,
    t_f: f64,
    format: Option<Format>,
) -> Result<String, CliError> {
    let rows = bench(args, seed, t_f)?;
    Ok(match format {
        Some(Format::Json) => to_json(&rows),
        _ => bench_csv(&rows),
    })
}
