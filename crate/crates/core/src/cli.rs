//! Command-line front end.
//!
//! Tables go to CSV (a file with `--out`, stdout otherwise). Each CSV file
//! gets a JSON manifest next to it (`<out>.manifest.json`, or the path given
//! by `--manifest`) recording the command, its configuration, the seed and
//! per-stage timings. The CSV itself depends only on the configuration and
//! the seed, never on `--jobs`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::{LatticePath, LatticePoint};
use crate::lerw::{estimate_beta, tail_profile};
use crate::probes::{
    a1_frequency, heat_kernel_scaling_experiment, spiral_box_sequence, tube_event_check, volume_scaling_experiment,
    TubeEventParams, TubeGeometry,
};
use crate::resistance::{effective_resistance_with, point_to_set_resistance, Solver};
use crate::rng::{DirectionSampler, RngConfig};
use crate::srw::walk_until;
use crate::treewalk::{heat_kernel_exact, heat_kernel_mc};
use crate::ust::SpanningTree;
use crate::wilson::{sample_window_ust, wilson_uniformity, BallExplorer, FiniteGraph, UstWindowConfig, VertexOrder};

pub const BETA_COLUMNS: &str = "n,mean,stderr,trials";
pub const TAILS_COLUMNS: &str = "kappa,upper_freq,lower_freq";
pub const BALL_COLUMNS: &str = "r,volume,clipped";
pub const HK_COLUMNS: &str = "n,value,stderr";
pub const UNIFORMITY_COLUMNS: &str = "tree,count,expected";
pub const SPIRAL_COLUMNS: &str = "index,x,y,z,shell";
pub const TUBE_COLUMNS: &str = "j,a,b,e,f,lambda_len,hit_probability,hit_stderr";
pub const A1_COLUMNS: &str = "scale,m,q,trials,hits,frequency,stderr";
pub const VOL_COLUMNS: &str = "r,median,mean,q25,q75,used,clipped";
pub const HK_SCALING_COLUMNS: &str =
    "n,median,mean,q25,q75,normalized_mean,normalized_variance,max_relative_gap,samples";

#[derive(Parser, Debug)]
#[command(name = "ust3d", version, about = "Uniform spanning tree of Z^3: sampling and measurements")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Master seed; every random quantity is a function of it.
    #[arg(long, global = true, env = "UST3D_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// CSV output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Manifest path (default: `<out>.manifest.json` when --out is given).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sample a wired window UST and write it in the tree text format.
    Sample(SampleArgs),
    /// Intrinsic ball volumes of a stored tree.
    #[command(after_help = "CSV columns: r,volume,clipped")]
    Ball(BallArgs),
    /// Effective resistance between terminal sets of a stored tree, printed with 12 digits.
    Reff(ReffArgs),
    /// Return probability p_n(x,x) of the walk on a stored tree.
    #[command(after_help = "CSV columns: n,value,stderr")]
    Hk(HkArgs),
    /// Growth exponent of the loop-erased walk.
    #[command(after_help = "CSV columns: n,mean,stderr,trials")]
    Beta(BetaArgs),
    /// Upper and lower tail frequencies of M_n relative to its mean.
    #[command(after_help = "CSV columns: kappa,upper_freq,lower_freq")]
    Tails(TailsArgs),
    /// Chi-square test of Wilson's algorithm against the uniform law.
    #[command(after_help = "CSV columns: tree,count,expected")]
    Uniformity(UniformityArgs),
    /// Spiral sequence of boxes.
    #[command(after_help = "CSV columns: index,x,y,z,shell")]
    Spiral(SpiralArgs),
    /// Tube events along a path, or the frequency of A_1 with --a1-trials.
    #[command(after_help = "CSV columns: j,a,b,e,f,lambda_len,hit_probability,hit_stderr\n\
                            With --a1-trials: scale,m,q,trials,hits,frequency,stderr")]
    TubeEvents(TubeArgs),
    /// Median intrinsic ball volume across independent trees.
    #[command(after_help = "CSV columns: r,median,mean,q25,q75,used,clipped")]
    VolScaling(VolArgs),
    /// Median return probability p_2n(0,0) across independent trees.
    #[command(after_help = "CSV columns: \
                            n,median,mean,q25,q75,normalized_mean,normalized_variance,max_relative_gap,samples")]
    HkScaling(HkScalingArgs),
    /// Loop erasure of a path file (one `x y z` per line), written in the same format.
    LoopErase(LoopEraseArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderArg {
    Lexicographic,
    Spiral,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct WindowArgs {
    /// Window radius R: branches start from every point of the sup-ball of radius R.
    #[arg(long, default_value_t = 16)]
    pub radius: u64,
    /// Truncation factor K: the wired boundary sits at sup-distance K * max(R, 1).
    #[arg(long, default_value_t = 4)]
    pub truncation: u64,
}

impl WindowArgs {
    fn config(&self) -> UstWindowConfig {
        UstWindowConfig::new(self.radius, self.truncation)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, value_enum, default_value_t = OrderArg::Lexicographic)]
    pub order: OrderArg,
    /// Only grow the tree far enough to know the intrinsic ball of this radius around the origin.
    #[arg(long)]
    pub explore: Option<u64>,
    /// Tree file to write (default: stdout).
    #[arg(long)]
    pub tree: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BallArgs {
    #[arg(long)]
    pub tree: PathBuf,
    /// Center as `x,y,z`.
    #[arg(long, default_value = "0,0,0", value_parser = parse_point)]
    pub center: LatticePoint,
    #[arg(long, default_value_t = 16)]
    pub max_r: u64,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverArg {
    Auto,
    Exact,
    Direct,
    Cg,
    /// Series/parallel reduction on the tree (single source only).
    Tree,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ReffArgs {
    #[arg(long)]
    pub tree: PathBuf,
    /// First terminal set: points `x,y,z` separated by `;`.
    #[arg(long, value_parser = parse_points)]
    pub from: PointSet,
    /// Second terminal set.
    #[arg(long, value_parser = parse_points)]
    pub to: PointSet,
    #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
    pub solver: SolverArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct HkArgs {
    #[arg(long)]
    pub tree: PathBuf,
    #[arg(long, default_value = "0,0,0", value_parser = parse_point)]
    pub x: LatticePoint,
    /// Step counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u64>,
    /// Exact evolution of the distribution (default).
    #[arg(long, conflicts_with = "mc")]
    pub exact: bool,
    /// Monte Carlo estimate.
    #[arg(long)]
    pub mc: bool,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BetaArgs {
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
    pub radii: Vec<u64>,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TailsArgs {
    #[arg(long, default_value_t = 128)]
    pub n: u64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, value_delimiter = ',', default_value = "1,1.5,2,2.5,3,3.5,4")]
    pub kappas: Vec<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct UniformityArgs {
    /// `complete:N`, `cycle:N`, `path:N` or `grid:WxH`.
    #[arg(long, default_value = "grid:3x3")]
    pub graph: String,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpiralArgs {
    /// Scale N; the sequence has 2N(2N-1)^2 boxes.
    #[arg(long, default_value_t = 2)]
    pub scale: u64,
    /// Box side m.
    #[arg(long, default_value_t = 64)]
    pub m: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TubeArgs {
    #[arg(long, default_value_t = 64)]
    pub m: u64,
    #[arg(long, default_value_t = 2)]
    pub scale: u64,
    #[arg(long, default_value_t = 0)]
    pub axis: usize,
    /// Path file to check; without it a walk from the origin is run until it reaches the end of the tube.
    #[arg(long)]
    pub path: Option<PathBuf>,
    /// Step cap for the generated walk.
    #[arg(long, default_value_t = 100_000_000)]
    pub max_steps: u64,
    /// Length constant C in len(lambda_j) <= C m^beta.
    #[arg(long, default_value_t = 1.0)]
    pub length_constant: f64,
    /// Hittability threshold.
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, default_value_t = 1000)]
    pub hit_trials: u64,
    #[arg(long, default_value_t = crate::DEFAULT_BETA)]
    pub beta: f64,
    /// Estimate the frequency of A_1 from this many walks instead.
    #[arg(long)]
    pub a1_trials: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VolArgs {
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256")]
    pub radii: Vec<u64>,
    #[arg(long, default_value_t = 200)]
    pub samples: u64,
    #[arg(long, default_value_t = crate::DEFAULT_BETA)]
    pub beta: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct HkScalingArgs {
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, value_delimiter = ',', default_value = "16,64,256,1024,4096")]
    pub ns: Vec<u64>,
    #[arg(long, default_value_t = 50)]
    pub samples: u64,
    /// Intrinsic radius explored around the origin; the walk is killed outside it.
    #[arg(long, default_value_t = 192)]
    pub explore_radius: u64,
    #[arg(long, default_value_t = crate::DEFAULT_BETA)]
    pub beta: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LoopEraseArgs {
    /// Input path file (default: stdin).
    #[arg(long)]
    pub path: Option<PathBuf>,
}

fn parse_point(s: &str) -> std::result::Result<LatticePoint, String> {
    let c: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| format!("bad coordinate {t:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match c[..] {
        [x, y, z] => Ok(LatticePoint::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got {s:?}")),
    }
}

/// Terminal set given on the command line.
#[derive(Clone, Debug, Serialize)]
pub struct PointSet(pub Vec<LatticePoint>);

fn parse_points(s: &str) -> std::result::Result<PointSet, String> {
    s.split(';').filter(|t| !t.trim().is_empty()).map(parse_point).collect::<std::result::Result<_, _>>().map(PointSet)
}

fn parse_graph(spec: &str) -> Result<FiniteGraph> {
    let bad = || Error::invalid(format!("unknown graph {spec:?}; use complete:N, cycle:N, path:N or grid:WxH"));
    let (kind, arg) = spec.split_once(':').ok_or_else(bad)?;
    let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
    Ok(match kind {
        "complete" => FiniteGraph::complete(num(arg)?),
        "cycle" => FiniteGraph::cycle(num(arg)?),
        "path" => FiniteGraph::path(num(arg)?),
        "grid" => {
            let (w, h) = arg.split_once('x').ok_or_else(bad)?;
            FiniteGraph::grid(num(w)?, num(h)?)
        }
        _ => return Err(bad()),
    })
}

/// Record written next to every CSV output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub beta: Option<f64>,
    pub version: String,
    pub output: Option<String>,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub timings: Vec<(String, f64)>,
    pub summary: Value,
}

struct Run {
    start: Instant,
    last: Instant,
    timings: Vec<(String, f64)>,
    summary: Value,
    beta: Option<f64>,
}

impl Run {
    fn new() -> Self {
        let now = Instant::now();
        Run { start: now, last: now, timings: Vec::new(), summary: Value::Null, beta: None }
    }

    fn stage(&mut self, name: &str) {
        let now = Instant::now();
        self.timings.push((name.to_string(), (now - self.last).as_secs_f64()));
        self.last = now;
    }
}

pub fn version_string() -> String {
    format!("ust3d v{}", env!("CARGO_PKG_VERSION"))
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code: 0 on success, 1 on a usage error and 2
/// when the command fails.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = cli.common.jobs {
            if j == 0 {
                return Err(Error::invalid("--jobs must be at least 1"));
            }
            b = b.num_threads(j);
        }
        b.build().map_err(|e| Error::invalid(format!("thread pool: {e}")))?
    };
    let rng = RngConfig::from_seed(cli.common.seed);
    let mut run = Run::new();
    let started_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut text = Vec::new();
    pool.install(|| execute(&cli.command, &rng, &mut run, &mut text))?;

    match &cli.common.out {
        Some(path) => std::fs::write(path, &text)?,
        None => std::io::stdout().lock().write_all(&text)?,
    }
    let manifest_path = cli.common.manifest.clone().or_else(|| cli.common.out.as_ref().map(|p| sidecar(p)));
    if let Some(mp) = manifest_path {
        run.stage("write");
        let m = RunManifest {
            command: command_name(&cli.command).to_string(),
            config: serde_json::to_value(&cli.command).unwrap_or(Value::Null),
            seed: cli.common.seed,
            beta: run.beta,
            version: version_string(),
            output: cli.common.out.as_ref().map(|p| p.display().to_string()),
            started_unix,
            wall_clock_seconds: run.start.elapsed().as_secs_f64(),
            timings: run.timings,
            summary: run.summary,
        };
        let body = serde_json::to_string_pretty(&m).map_err(|e| Error::invalid(format!("manifest: {e}")))?;
        std::fs::write(mp, body + "\n")?;
    }
    Ok(())
}

/// `<out>.manifest.json`.
pub fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Sample(_) => "sample",
        Command::Ball(_) => "ball",
        Command::Reff(_) => "reff",
        Command::Hk(_) => "hk",
        Command::Beta(_) => "beta",
        Command::Tails(_) => "tails",
        Command::Uniformity(_) => "uniformity",
        Command::Spiral(_) => "spiral",
        Command::TubeEvents(_) => "tube-events",
        Command::VolScaling(_) => "vol-scaling",
        Command::HkScaling(_) => "hk-scaling",
        Command::LoopErase(_) => "loop-erase",
    }
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn execute(cmd: &Command, rng: &RngConfig, run: &mut Run, out: &mut Vec<u8>) -> Result<()> {
    match cmd {
        Command::Sample(a) => {
            let mut cfg = a.window.config();
            cfg.order = match a.order {
                OrderArg::Lexicographic => VertexOrder::Lexicographic,
                OrderArg::Spiral => VertexOrder::Spiral,
            };
            let tree = match a.explore {
                Some(r) => {
                    let mut ex = BallExplorer::new(&cfg, rng)?;
                    ex.explore_to(r)?;
                    ex.into_tree()?
                }
                None => sample_window_ust(&cfg, rng)?,
            };
            run.stage("sample");
            run.summary = json!({ "vertices": tree.vertex_count() });
            match &a.tree {
                Some(p) => tree.save(p)?,
                None => tree.write_text(&mut *out)?,
            }
        }
        Command::Ball(a) => {
            let tree = SpanningTree::load(&a.tree)?;
            run.stage("load");
            let prof = tree.ball_profile(&a.center, a.max_r)?;
            writeln!(out, "{BALL_COLUMNS}")?;
            for row in prof {
                writeln!(out, "{},{},{}", row.radius, row.volume, row.clipped)?;
            }
            run.stage("measure");
        }
        Command::Reff(a) => {
            let (from, to) = (&a.from.0, &a.to.0);
            if from.is_empty() || to.is_empty() {
                return Err(Error::invalid("terminal sets must be nonempty"));
            }
            let tree = SpanningTree::load(&a.tree)?;
            run.stage("load");
            let ohms = match a.solver {
                SolverArg::Tree => {
                    let [x] = from[..] else {
                        return Err(Error::invalid("the tree solver takes a single source point"));
                    };
                    point_to_set_resistance(&tree, &x, to)?.ohms
                }
                s => {
                    let solver = match s {
                        SolverArg::Exact => Solver::Exact,
                        SolverArg::Direct => Solver::Direct,
                        SolverArg::Cg => Solver::ConjugateGradient,
                        _ => Solver::Auto,
                    };
                    let ids = |ps: &[LatticePoint]| -> Result<Vec<usize>> {
                        ps.iter().map(|p| tree.require(p).map(|i| i as usize)).collect()
                    };
                    effective_resistance_with(&tree.to_graph(), &ids(from)?, &ids(to)?, solver)?.ohms
                }
            };
            run.stage("solve");
            writeln!(out, "{ohms:.12}")?;
        }
        Command::Hk(a) => {
            let tree = SpanningTree::load(&a.tree)?;
            run.stage("load");
            writeln!(out, "{HK_COLUMNS}")?;
            for (i, &n) in a.n.iter().enumerate() {
                let est = if a.mc {
                    heat_kernel_mc(&tree, &a.x, n, a.trials, &rng.child(i as u64))?
                } else {
                    heat_kernel_exact(&tree, &a.x, n)?
                };
                writeln!(out, "{},{},{}", n, est.value, est.stderr)?;
            }
            run.stage("evolve");
        }
        Command::Beta(a) => {
            let est = estimate_beta(&a.radii, a.trials, rng)?;
            run.stage("simulate");
            writeln!(out, "{BETA_COLUMNS}")?;
            for r in &est.rows {
                writeln!(out, "{},{},{},{}", r.n, r.mean, r.stderr, r.trials)?;
            }
            run.beta = Some(est.beta());
            run.summary = serde_json::to_value(&est.fit).unwrap_or(Value::Null);
        }
        Command::Tails(a) => {
            let t = tail_profile(a.n, a.trials, &a.kappas, rng)?;
            run.stage("simulate");
            writeln!(out, "{TAILS_COLUMNS}")?;
            for r in &t.rows {
                writeln!(out, "{},{},{}", r.kappa, r.upper_freq, r.lower_freq)?;
            }
            let fit = t.upper_tail_fit().ok();
            run.summary = json!({ "mean": t.mean, "upper_tail_fit": fit.map(|(s, i, r2)| json!({"slope": s, "intercept": i, "r_squared": r2})) });
        }
        Command::Uniformity(a) => {
            let g = parse_graph(&a.graph)?;
            let rep = wilson_uniformity(&g, a.samples, rng)?;
            run.stage("sample");
            let expected = rep.samples as f64 / rep.tree_count as f64;
            writeln!(out, "{UNIFORMITY_COLUMNS}")?;
            for (i, c) in rep.counts.iter().enumerate() {
                writeln!(out, "{i},{c},{expected}")?;
            }
            run.summary = json!({
                "tree_count": rep.tree_count,
                "distinct": rep.distinct,
                "chi_square": rep.chi_square,
            });
            eprintln!(
                "{} spanning trees, chi-square {:.3} on {} dof, p = {:.4}",
                rep.tree_count, rep.chi_square.statistic, rep.chi_square.dof, rep.chi_square.p_value
            );
        }
        Command::Spiral(a) => {
            let seq = spiral_box_sequence(a.scale, a.m)?;
            seq.validate()?;
            let shells = seq.shell_index();
            writeln!(out, "{SPIRAL_COLUMNS}")?;
            for (i, (c, s)) in seq.centers.iter().zip(&shells).enumerate() {
                writeln!(out, "{},{},{},{},{}", i, c.x, c.y, c.z, s)?;
            }
            run.stage("generate");
        }
        Command::TubeEvents(a) => {
            let geom = TubeGeometry::new(a.m, a.scale, a.axis)?;
            run.beta = Some(a.beta);
            if let Some(trials) = a.a1_trials {
                let f = a1_frequency(&geom, trials, rng);
                run.stage("simulate");
                writeln!(out, "{A1_COLUMNS}")?;
                writeln!(out, "{},{},{},{},{},{},{}", f.scale, f.m, f.q, f.trials, f.hits, f.frequency(), f.stderr())?;
                return Ok(());
            }
            let path = match &a.path {
                Some(p) => read_path(Some(p))?,
                None => {
                    let end = geom.a(a.scale as i64 + 1);
                    let mut buf = Vec::new();
                    let mut dirs = DirectionSampler::new(rng.child(0).rng());
                    walk_until(LatticePoint::ORIGIN, &mut dirs, a.max_steps, &mut buf, |p| geom.on_face(p, end));
                    LatticePath::from_vec_unchecked(buf)
                }
            };
            run.stage("path");
            let params = TubeEventParams {
                length_constant: a.length_constant,
                eta: a.eta,
                hit_trials: a.hit_trials,
                beta: a.beta,
            };
            let flags = tube_event_check(&path, &geom, &params, &rng.child(1));
            run.stage("events");
            writeln!(out, "{TUBE_COLUMNS}")?;
            for b in &flags {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    b.j,
                    b.a.as_str(),
                    b.b.as_str(),
                    b.e.as_str(),
                    b.f.as_str(),
                    opt(b.lambda_len),
                    opt(b.hit_probability),
                    opt(b.hit_stderr)
                )?;
            }
            run.summary = json!({ "path_steps": path.len() });
        }
        Command::VolScaling(a) => {
            let v = volume_scaling_experiment(&a.window.config(), &a.radii, a.samples, a.beta, rng)?;
            run.stage("simulate");
            run.beta = Some(a.beta);
            for r in &v.dropped {
                eprintln!("warning: every sample was clipped at r = {r}; dropped");
            }
            writeln!(out, "{VOL_COLUMNS}")?;
            for r in &v.rows {
                writeln!(out, "{},{},{},{},{},{},{}", r.r, r.median, r.mean, r.q25, r.q75, r.used, r.clipped)?;
            }
            run.summary = json!({ "fit": v.fit, "target": v.target, "dropped": v.dropped });
        }
        Command::HkScaling(a) => {
            let h = heat_kernel_scaling_experiment(&a.window.config(), &a.ns, a.samples, a.explore_radius, a.beta, rng)?;
            run.stage("simulate");
            run.beta = Some(a.beta);
            writeln!(out, "{HK_SCALING_COLUMNS}")?;
            for r in &h.rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.n,
                    r.median,
                    r.mean,
                    r.q25,
                    r.q75,
                    r.normalized_mean,
                    r.normalized_variance,
                    r.max_relative_gap,
                    r.samples
                )?;
            }
            run.summary = json!({ "fit": h.fit, "target": h.target });
        }
        Command::LoopErase(a) => {
            let path = read_path(a.path.as_deref())?;
            let le = crate::lerw::loop_erase(&path);
            le.to_path().write_text(&mut *out)?;
            run.stage("erase");
        }
    }
    Ok(())
}

fn read_path(p: Option<&Path>) -> Result<LatticePath> {
    match p {
        Some(p) => LatticePath::read_text(std::io::BufReader::new(std::fs::File::open(p)?)),
        None => LatticePath::read_text(std::io::stdin().lock()),
    }
}
