use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use affineflow::exact::{self, ProblemSpec};
use affineflow::harness::{self, InstabilityDemo, InvarianceTest, RunManifest, SteadyOptions};
use affineflow::model1d::{euler_solve_1d, Dt1DPolicy, Scheme1D, Scheme1DConfig};
use affineflow::{io, SchemeVariant, StencilSet, StopRule, TimeStepPolicy};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "affineflow", version, about = "Affine curvature flow experiments")]
struct Cli {
    /// Directory for CSV and JSON outputs.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Rerun the command recorded in a manifest.json.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Steady solve of a static example on one grid.
    SolveStatic(SolveStatic),
    /// Evolve a curve and write its zero level set at each snapshot.
    Evolve(Evolve),
    /// Error table over a list of grids.
    Convergence(Convergence),
    /// Morphology and affine invariance differences.
    Invariance(Invariance),
    /// Unstable configurations next to their convergent counterparts.
    Instability(Instability),
    /// Print the offsets of a wide stencil.
    Stencil(StencilCmd),
    /// The one-dimensional model equation.
    Model1d(Model1d),
}

#[derive(Args, Debug)]
struct SolveStatic {
    #[arg(long, default_value = "static-a")]
    problem: String,
    #[arg(long, default_value = "filtered-regularized")]
    variant: String,
    #[arg(long, short, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iters: u64,
    /// Time step: lipschitz-cfl, h2/2, h2/8 or a number.
    #[arg(long)]
    dt: Option<String>,
}

#[derive(Args, Debug)]
struct Evolve {
    #[arg(long, default_value = "evolution-ellipse")]
    problem: String,
    #[arg(long, default_value = "elliptic-regularized")]
    variant: String,
    #[arg(long, short)]
    n: Option<usize>,
    /// Comma-separated snapshot times.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    #[arg(long)]
    dt: Option<String>,
}

#[derive(Args, Debug)]
struct Convergence {
    #[arg(long, default_value = "static-c")]
    problem: String,
    #[arg(long, value_delimiter = ',', default_value = "standard,filtered-regularized")]
    variants: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "32,64,128")]
    ns: Vec<usize>,
    /// Start every grid from zero instead of the previous solution.
    #[arg(long)]
    cold: bool,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
}

#[derive(Args, Debug)]
struct Invariance {
    /// morphology-exp, morphology-cube, morphology-identity, affine-rot45,
    /// affine-shear or affine-rot90.
    #[arg(long, default_value = "affine-rot90")]
    test: String,
    #[arg(long, value_delimiter = ',', default_value = "standard,filtered-regularized")]
    variants: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long)]
    t: Option<f64>,
}

#[derive(Args, Debug)]
struct Instability {
    /// 1d-sin, 1d-x43 or 2d-static-d.
    #[arg(long, default_value = "1d-x43")]
    demo: String,
}

#[derive(Args, Debug)]
struct StencilCmd {
    #[arg(long, default_value_t = 7)]
    n_theta: usize,
    /// Number of directions; defaults to 8 n_theta.
    #[arg(long)]
    n_s: Option<usize>,
}

#[derive(Args, Debug)]
struct Model1d {
    /// model1d-sin or model1d-x43.
    #[arg(long, default_value = "model1d-x43")]
    problem: String,
    #[arg(long, default_value = "elliptic")]
    scheme: String,
    #[arg(long, short)]
    n: Option<usize>,
    /// lipschitz-cfl, h2/2, scaling[:denom] or a number.
    #[arg(long)]
    dt: Option<String>,
    /// Final time; omit to iterate to a steady state.
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
}

fn variants(names: &[String]) -> Result<Vec<SchemeVariant>> {
    names.iter().map(|s| s.parse().map_err(anyhow::Error::from)).collect()
}

fn policy(s: &Option<String>) -> Result<Option<TimeStepPolicy>> {
    s.as_deref().map(str::parse).transpose().map_err(Into::into)
}

struct Out {
    dir: PathBuf,
}

impl Out {
    fn write(&self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    fn json(&self, name: &str, value: &impl serde::Serialize) -> Result<()> {
        self.write(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }
}

fn static_problem(name: &str) -> Result<ProblemSpec> {
    let p = exact::problem_by_name(name)?;
    if !p.is_static() {
        bail!("`{name}` is not a static problem");
    }
    Ok(p)
}

fn solve_static(a: &SolveStatic, out: &Out) -> Result<(serde_json::Value, u8)> {
    let p = static_problem(&a.problem)?;
    let variant: SchemeVariant = a.variant.parse()?;
    let opts = SteadyOptions { tol: a.tol, max_iters: a.max_iters, policy: policy(&a.dt)?, ..Default::default() };
    let (u, report, err) = harness::solve_static(&p, variant, a.n, &opts, None)?;
    out.write("solution.csv", &io::grid_to_csv(&u))?;
    out.json("report.json", &json!({ "problem": p.name, "variant": variant, "N": a.n, "error_linf": err, "report": report }))?;
    println!("{} {} N={} error {:.3e} {:?} after {} iterations", p.name, variant, a.n, err, report.status, report.iterations);
    let config = json!({ "problem": p.name, "variant": variant, "N": a.n, "options": opts });
    Ok((config, 0))
}

fn evolve(a: &Evolve, out: &Out) -> Result<(serde_json::Value, u8)> {
    let p = exact::problem_by_name(&a.problem)?;
    let variant: SchemeVariant = a.variant.parse()?;
    let n = a.n.unwrap_or(p.default_n);
    let r = harness::cmd_evolution(&p, variant, n, a.times.as_deref(), policy(&a.dt)?)?;
    for (k, frame) in r.frames.iter().enumerate() {
        out.write(&format!("contour_{k:03}.csv"), &io::polylines_to_csv(&frame.contours))?;
        println!(
            "t={:.4} contours={} area={} axis_ratio={}",
            frame.t,
            frame.contours.len(),
            frame.area.map_or("-".into(), |v| format!("{v:.4}")),
            frame.axis_ratio.map_or("-".into(), |v| format!("{v:.4}")),
        );
    }
    out.json("evolution.json", &r)?;
    let config = json!({ "problem": r.problem, "variant": variant, "N": n, "times": r.frames.iter().map(|f| f.requested).collect::<Vec<_>>(), "policy": r.policy });
    Ok((config, if r.report.status == affineflow::SolveStatus::BlowUp { 2 } else { 0 }))
}

fn convergence(a: &Convergence, out: &Out) -> Result<(serde_json::Value, u8)> {
    let p = exact::problem_by_name(&a.problem)?;
    let vs = variants(&a.variants)?;
    let opts = SteadyOptions { tol: a.tol, warm_start: !a.cold, ..Default::default() };
    let rows = if p.is_static() {
        harness::cmd_convergence(&p, &vs, &a.ns, &opts)?
    } else if p.u_exact.is_some() && p.dimension == 2 {
        harness::cmd_time_table(&p, &vs, &a.ns)?
    } else {
        bail!("`{}` has no exact solution to compare with", p.name);
    };
    let csv = harness::convergence_csv(&rows);
    print!("{csv}");
    out.write("convergence.csv", &csv)?;
    out.json("convergence.json", &rows)?;
    Ok((json!({ "problem": p.name, "variants": vs, "ns": a.ns, "options": opts }), 0))
}

fn invariance(a: &Invariance, out: &Out) -> Result<(serde_json::Value, u8)> {
    let test: InvarianceTest = a.test.parse()?;
    let vs = variants(&a.variants)?;
    let ns = a.ns.clone().unwrap_or_else(|| test.default_ns());
    let t = a.t.unwrap_or_else(|| test.default_t());
    let rows = harness::cmd_invariance(test, &vs, &ns, Some(t))?;
    let csv = harness::invariance_csv(&rows);
    print!("{csv}");
    out.write("invariance.csv", &csv)?;
    out.json("invariance.json", &rows)?;
    Ok((json!({ "test": test.name(), "variants": vs, "ns": ns, "t": t }), 0))
}

fn instability(a: &Instability, out: &Out) -> Result<(serde_json::Value, u8)> {
    let demo: InstabilityDemo = a.demo.parse()?;
    let runs = harness::cmd_instability(demo)?;
    for run in &runs {
        println!(
            "{} {} dt={} N={} diverged={} departure={:.3e} residual={:.3e} ({:?})",
            demo.name(),
            run.label,
            run.dt_policy,
            run.n,
            run.diverged,
            run.departure,
            run.report.final_residual,
            run.report.status
        );
        for (k, (_, csv)) in run.snapshots.iter().enumerate() {
            out.write(&format!("{}_{k:02}.csv", run.label), csv)?;
        }
    }
    out.json("instability.json", &runs)?;
    if let Some(bad) = runs.iter().find(|r| !r.as_expected()) {
        eprintln!("warning: run `{}` diverged={} against expectation", bad.label, bad.diverged);
    }
    let code = if runs.iter().any(|r| r.diverged) { 2 } else { 0 };
    Ok((json!({ "demo": demo.name() }), code))
}

fn stencil(a: &StencilCmd, out: &Out) -> Result<(serde_json::Value, u8)> {
    let n_s = a.n_s.unwrap_or(8 * a.n_theta);
    let s = StencilSet::build(a.n_theta, n_s)?;
    let csv = s.to_csv();
    print!("{csv}");
    out.write("stencil.csv", &csv)?;
    Ok((json!({ "n_theta": a.n_theta, "n_s": n_s, "dtheta": s.dtheta() }), 0))
}

fn model1d(a: &Model1d, out: &Out) -> Result<(serde_json::Value, u8)> {
    let p = exact::problem_by_name(&a.problem)?;
    if p.dimension != 1 {
        bail!("`{}` is not a 1D problem", p.name);
    }
    let scheme: Scheme1D = a.scheme.parse()?;
    let n = a.n.unwrap_or(p.default_n);
    let g = p.grid_1d(n)?;
    let mut config = Scheme1DConfig::defaults(scheme, g.h)?;
    if let Some(dt) = &a.dt {
        config.dt_policy = dt.parse::<Dt1DPolicy>()?;
    }
    let stop = match a.t_end {
        Some(t) => StopRule::until(t),
        None => StopRule::Steady { tol: affineflow::schemes::DEFAULT_TOL, max_iters: 100_000_000, max_seconds: None },
    };
    let times = a.times.clone().unwrap_or_else(|| if a.t_end.is_some() { p.snapshot_times.clone() } else { Vec::new() });
    let u0 = p.initial(g);
    let f = p.rhs(g);
    let bc = p.boundary_condition()?;
    let (u, snaps, report) = euler_solve_1d(&u0, f.as_ref(), &config, &bc, stop, &times)?;
    let departure = p.exact(g, 0.0).map(|e| u.sup_dist(&e));
    out.write("solution.csv", &io::grid1d_to_csv(&u))?;
    for (k, s) in snaps.iter().enumerate() {
        out.write(&format!("snapshot_{k:02}.csv"), &io::grid1d_to_csv(&s.field))?;
    }
    let diverged = departure.map_or(report.status == affineflow::SolveStatus::BlowUp, |d| harness::is_divergent(&report, d));
    out.json("report.json", &json!({ "problem": p.name, "scheme": scheme, "N": n, "departure": departure, "diverged": diverged, "report": report }))?;
    println!(
        "{} {} N={} dt={} diverged={} departure={} {:?}",
        p.name,
        scheme,
        n,
        config.dt_policy.name(),
        diverged,
        departure.map_or("-".into(), |d| format!("{d:.3e}")),
        report.status
    );
    let config = json!({ "problem": p.name, "scheme": scheme, "N": n, "dt": config.dt_policy, "t_end": a.t_end, "times": times });
    Ok((config, if diverged { 2 } else { 0 }))
}

fn replay_args(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m: RunManifest = serde_json::from_str(&text).context("parsing manifest")?;
    let argv = m.config.get("argv").and_then(|v| v.as_array()).ok_or_else(|| anyhow!("manifest has no argv"))?;
    argv.iter().map(|v| v.as_str().map(String::from).ok_or_else(|| anyhow!("non-string argument in manifest"))).collect()
}

fn dispatch(cli: &Cli, argv: &[String]) -> Result<u8> {
    let command = cli.command.as_ref().ok_or_else(|| anyhow!("no subcommand given"))?;
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global().context("configuring threads")?;
    }
    fs::create_dir_all(&cli.out_dir).with_context(|| format!("creating {}", cli.out_dir.display()))?;
    let out = Out { dir: cli.out_dir.clone() };
    let (name, (config, code)) = match command {
        Command::SolveStatic(a) => ("solve-static", solve_static(a, &out)?),
        Command::Evolve(a) => ("evolve", evolve(a, &out)?),
        Command::Convergence(a) => ("convergence", convergence(a, &out)?),
        Command::Invariance(a) => ("invariance", invariance(a, &out)?),
        Command::Instability(a) => ("instability", instability(a, &out)?),
        Command::Stencil(a) => ("stencil", stencil(a, &out)?),
        Command::Model1d(a) => ("model1d", model1d(a, &out)?),
    };
    let mut config = config;
    config["argv"] = json!(argv);
    config["threads"] = json!(cli.threads);
    out.json("manifest.json", &RunManifest::new(name, config, None))?;
    Ok(code)
}

fn run() -> Result<u8> {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            e.print()?;
            return Ok(0);
        }
        Err(e) => {
            e.print()?;
            return Ok(1);
        }
    };
    match &cli.manifest {
        Some(path) if cli.command.is_none() => {
            let replayed = replay_args(path)?;
            let mut again = Cli::try_parse_from(&replayed)?;
            again.out_dir = cli.out_dir.clone();
            dispatch(&again, &replayed)
        }
        Some(_) => bail!("--manifest replays a recorded run and takes no subcommand"),
        None => dispatch(&cli, &argv),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
