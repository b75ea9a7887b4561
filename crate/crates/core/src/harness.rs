//! Experiment drivers: convergence tables, instability demos, curve
//! evolution with contours and invariance tests.

use serde::{Deserialize, Serialize};

use crate::contour::{self, Polyline};
use crate::error::{Error, Result};
use crate::exact::{self, ProblemSpec};
use crate::grid::{BoundaryCondition, Grid2D, GridFn1, GridFn2};
use crate::io;
use crate::model1d::{euler_solve_1d, Dt1DPolicy, Scheme1D, Scheme1DConfig};
use crate::schemes::{SchemeConfig, SchemeVariant, DEFAULT_TOL};
use crate::time_integration::{
    evolve, prolong, solve_steady_with, SolveReport, SolveStatus, StopRule, TimeStepPolicy, DEFAULT_MAX_ITERS,
};

/// Everything needed to rerun a command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self { command: command.into(), config, seed, version: env!("CARGO_PKG_VERSION").into(), timestamp }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub variant: SchemeVariant,
    pub error_linf: f64,
    /// `log₂(e_prev / e)` against the previous convergent row.
    pub observed_order: Option<f64>,
    pub diverged: bool,
    pub status: SolveStatus,
    pub iterations: u64,
    pub dt: f64,
    pub final_residual: f64,
    pub wall_time: f64,
}

/// Knobs for steady solves. `None` fields take the variant defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyOptions {
    pub tol: f64,
    pub max_iters: u64,
    pub max_seconds: Option<f64>,
    pub policy: Option<TimeStepPolicy>,
    /// Start each grid from the solution on the previous one.
    pub warm_start: bool,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iters: DEFAULT_MAX_ITERS, max_seconds: None, policy: None, warm_start: true }
    }
}

/// Sup distance over points off the Dirichlet layer.
pub fn interior_error(u: &GridFn2, exact: &GridFn2, width: usize) -> f64 {
    let g = u.grid();
    let mut e: f64 = 0.0;
    for j in width..g.ny.saturating_sub(width) {
        for i in width..g.nx.saturating_sub(width) {
            e = e.max((u.at(i, j) - exact.at(i, j)).abs());
        }
    }
    e
}

/// Exact values on the layer, `interior` elsewhere.
fn static_start(g: &Grid2D, exact: &GridFn2, width: usize, interior: Option<&GridFn2>) -> GridFn2 {
    let mut u = exact.clone();
    for j in width..g.ny.saturating_sub(width) {
        for i in width..g.nx.saturating_sub(width) {
            let k = g.index(i, j);
            u.values_mut()[k] = interior.map_or(0.0, |v| v.values()[k]);
        }
    }
    u
}

/// One steady solve of a static problem on an `n`-point grid.
pub fn solve_static(
    problem: &ProblemSpec,
    variant: SchemeVariant,
    n: usize,
    opts: &SteadyOptions,
    warm: Option<&GridFn2>,
) -> Result<(GridFn2, SolveReport, f64)> {
    if !problem.is_static() {
        return Err(Error::InvalidParameter(format!("{} is not a static problem", problem.name)));
    }
    let g = problem.grid(n)?;
    let exact = problem.exact(g, 0.0).expect("static problems carry an exact solution");
    let f = problem.rhs(g).expect("static problems carry a source");
    let bc = problem.boundary_condition()?;
    let width = bc.layer_width();
    let guess = warm.map(|c| prolong(c, &g)).transpose()?;
    let u0 = static_start(&g, &exact, width, guess.as_ref());
    let mut config = SchemeConfig::defaults(variant, g.h)?;
    config.tol = opts.tol;
    let policy = opts.policy.unwrap_or_else(|| TimeStepPolicy::default_for(variant, true));
    let stop = StopRule::Steady { tol: opts.tol, max_iters: opts.max_iters, max_seconds: opts.max_seconds };
    let (u, report) = solve_steady_with(&u0, &f, &config, &bc, policy, stop)?;
    let err = interior_error(&u, &exact, width);
    Ok((u, report, err))
}

/// Steady solves over increasing `ns`, warm-started coarse to fine.
pub fn cmd_convergence(
    problem: &ProblemSpec,
    variants: &[SchemeVariant],
    ns: &[usize],
    opts: &SteadyOptions,
) -> Result<Vec<ConvergenceRow>> {
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut rows = Vec::new();
    for &variant in variants {
        let mut prev: Option<GridFn2> = None;
        let mut last_err: Option<f64> = None;
        for &n in &ns {
            let warm = if opts.warm_start { prev.as_ref() } else { None };
            let (u, report, err) = solve_static(problem, variant, n, opts, warm)?;
            let diverged = !report.converged();
            let observed_order = match (last_err, diverged) {
                (Some(e0), false) if e0 > 0.0 && err > 0.0 => Some((e0 / err).log2()),
                _ => None,
            };
            rows.push(ConvergenceRow {
                n,
                variant,
                error_linf: err,
                observed_order,
                diverged,
                status: report.status,
                iterations: report.iterations,
                dt: report.dt,
                final_residual: report.final_residual,
                wall_time: report.wall_time,
            });
            if diverged {
                prev = None;
                last_err = None;
            } else {
                prev = Some(u);
                last_err = Some(err);
            }
        }
    }
    Ok(rows)
}

/// `N,variant,error_linf,observed_order,...` with `-` for divergent errors.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("N,variant,error_linf,observed_order,status,iterations,dt,final_residual\n");
    for r in rows {
        let err = if r.diverged { "-".to_string() } else { format!("{:.3e}", r.error_linf) };
        let ord = r.observed_order.map_or(String::new(), |o| format!("{o:.2}"));
        s.push_str(&format!(
            "{},{},{},{},{},{},{:.6e},{:.3e}\n",
            r.n,
            r.variant,
            err,
            ord,
            serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            r.iterations,
            r.dt,
            r.final_residual
        ));
    }
    s
}

/// Time-dependent problems: evolve to the final time and compare with the
/// exact solution at the time reached, over the whole grid.
pub fn cmd_time_table(problem: &ProblemSpec, variants: &[SchemeVariant], ns: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let t_end = problem
        .t_end
        .ok_or_else(|| Error::InvalidParameter(format!("{} has no final time", problem.name)))?;
    if problem.u_exact.is_none() {
        return Err(Error::InvalidParameter(format!("{} has no exact solution", problem.name)));
    }
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let bc = problem.boundary_condition()?;
    let mut rows = Vec::new();
    for &variant in variants {
        let mut last_err: Option<f64> = None;
        for &n in &ns {
            let g = problem.grid(n)?;
            let u0 = problem.initial(g);
            let config = SchemeConfig::defaults(variant, g.h)?;
            let policy = TimeStepPolicy::default_for(variant, false);
            let (u, _, report) = evolve(&u0, None, &config, &bc, policy, t_end, &[])?;
            let exact = problem.exact(g, report.t_final).expect("checked above");
            let err = u.sup_dist(&exact);
            let diverged = report.status == SolveStatus::BlowUp;
            let observed_order = match last_err {
                Some(e0) if !diverged && e0 > 0.0 && err > 0.0 => Some((e0 / err).log2()),
                _ => None,
            };
            last_err = (!diverged).then_some(err);
            rows.push(ConvergenceRow {
                n,
                variant,
                error_linf: err,
                observed_order,
                diverged,
                status: report.status,
                iterations: report.iterations,
                dt: report.dt,
                final_residual: report.final_residual,
                wall_time: report.wall_time,
            });
        }
    }
    Ok(rows)
}

/// Shape of the zero level set at one snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionFrame {
    pub requested: f64,
    pub t: f64,
    pub iteration: u64,
    pub contours: Vec<Polyline>,
    /// Measures of the largest closed contour.
    pub area: Option<f64>,
    pub axis_ratio: Option<f64>,
    pub convexity: Option<f64>,
    #[serde(skip)]
    pub field: Option<GridFn2>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    pub problem: String,
    pub variant: SchemeVariant,
    pub n: usize,
    pub policy: TimeStepPolicy,
    pub frames: Vec<EvolutionFrame>,
    pub report: SolveReport,
}

pub fn frame_of(u: &GridFn2, requested: f64, t: f64, iteration: u64, level: f64) -> EvolutionFrame {
    let contours = contour::marching_squares(u, level);
    let main = contour::largest_closed(&contours);
    let m = main.and_then(contour::moments);
    EvolutionFrame {
        requested,
        t,
        iteration,
        area: m.map(|m| m.area),
        axis_ratio: m.map(|m| m.axis_ratio()),
        convexity: main.and_then(contour::convexity),
        contours,
        field: Some(u.clone()),
    }
}

/// Evolves a curve-evolution problem and extracts the zero level set at
/// each snapshot time.
pub fn cmd_evolution(
    problem: &ProblemSpec,
    variant: SchemeVariant,
    n: usize,
    times: Option<&[f64]>,
    policy: Option<TimeStepPolicy>,
) -> Result<EvolutionResult> {
    let times: Vec<f64> = times.map_or_else(|| problem.snapshot_times.clone(), <[f64]>::to_vec);
    let t_end = times.iter().copied().fold(problem.t_end.unwrap_or(0.0), f64::max);
    let g = problem.grid(n)?;
    let u0 = problem.initial(g);
    let config = SchemeConfig::defaults(variant, g.h)?;
    let policy = policy.unwrap_or_else(|| TimeStepPolicy::default_for(variant, false));
    let bc = problem.boundary_condition()?;
    let (_, snaps, report) = evolve(&u0, None, &config, &bc, policy, t_end, &times)?;
    let frames = snaps.iter().map(|s| frame_of(&s.field, s.requested, s.t, s.iteration, 0.0)).collect();
    Ok(EvolutionResult { problem: problem.name.clone(), variant, n, policy, frames, report })
}

/// Largest sup-norm difference between the regularized and unregularized
/// elliptic evolutions of the ellipse, both stepped at the regularized
/// scheme's `1 / C^h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizationComparison {
    pub n: usize,
    pub dt: f64,
    pub times: Vec<f64>,
    pub differences: Vec<f64>,
    pub max_difference: f64,
}

pub fn compare_regularization(n: usize) -> Result<RegularizationComparison> {
    let problem = exact::evolution_ic("ellipse")?;
    let g = problem.grid(n)?;
    let u0 = problem.initial(g);
    let bc = problem.boundary_condition()?;
    let reg = SchemeConfig::defaults(SchemeVariant::EllipticRegularized, g.h)?;
    let plain = SchemeConfig::defaults(SchemeVariant::Elliptic, g.h)?;
    let dt = TimeStepPolicy::LipschitzCfl.resolve(g.h, &reg)?;
    let t_end = problem.t_end.unwrap_or(0.0);
    let times = &problem.snapshot_times;
    let (_, a, _) = evolve(&u0, None, &reg, &bc, TimeStepPolicy::Fixed(dt), t_end, times)?;
    let (_, b, _) = evolve(&u0, None, &plain, &bc, TimeStepPolicy::Fixed(dt), t_end, times)?;
    let differences: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.field.sup_dist(&y.field)).collect();
    let max_difference = differences.iter().copied().fold(0.0, f64::max);
    Ok(RegularizationComparison { n, dt, times: a.iter().map(|s| s.t).collect(), differences, max_difference })
}

/// Monotone relabelling of level values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relabel {
    Identity,
    Exp,
    Cube,
}

impl Relabel {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Self::Identity => v,
            Self::Exp => v.exp(),
            Self::Cube => v * v * v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceRow {
    pub test: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub variant: SchemeVariant,
    /// Sup-norm difference of the two sides.
    pub difference: f64,
    /// Hausdorff distance between their zero level sets, where computed.
    pub hausdorff: Option<f64>,
    pub t: f64,
    pub wall_time: f64,
}

/// `min((x/2)² + y² - 1, 0)` on `[-3, 3]²` with reflecting boundaries.
pub fn morphology_problem() -> ProblemSpec {
    let mut p = exact::ellipse_time_problem(true);
    p.name = "morphology".into();
    p.u0 = std::sync::Arc::new(|x, y| ((x / 2.0).powi(2) + y * y - 1.0).min(0.0));
    p.u_exact = None;
    p.t_end = Some(1.0);
    p.snapshot_times = vec![1.0];
    p
}

/// `‖Φ_t(g∘u₀) - g∘Φ_t(u₀)‖_∞` over the whole grid.
pub fn morphology(g: Relabel, variant: SchemeVariant, n: usize, t: f64) -> Result<InvarianceRow> {
    let start = crate::time_integration::Stopwatch::start();
    let problem = morphology_problem();
    let grid = problem.grid(n)?;
    let u0 = problem.initial(grid);
    let config = SchemeConfig::defaults(variant, grid.h)?;
    let policy = TimeStepPolicy::default_for(variant, false);
    let bc = BoundaryCondition::NeumannReflect;
    let (a, _, _) = evolve(&u0.map(|v| g.apply(v)), None, &config, &bc, policy, t, &[])?;
    let (b, _, _) = evolve(&u0, None, &config, &bc, policy, t, &[])?;
    let name = serde_json::to_value(g).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    Ok(InvarianceRow {
        test: format!("morphology-{name}"),
        n,
        variant,
        difference: a.sup_dist(&b.map(|v| g.apply(v))),
        hausdorff: None,
        t,
        wall_time: start.seconds(),
    })
}

/// `(x/2)² + y² - 1` on `[-5, 5]²` with reflecting boundaries.
pub fn affine_grid(n: usize) -> Result<(Grid2D, GridFn2)> {
    let g = Grid2D::square(-5.0, 5.0, n)?;
    Ok((g, GridFn2::sample(g, |x, y| (x / 2.0).powi(2) + y * y - 1.0)))
}

/// Compares `Φ_t(u∘φ)` with `(Φ_{t det(A)^{2/3}} u)∘φ` for `φ(x) = Ax` on
/// the points where `Ax` stays in the grid.
pub fn affine_invariance(a: [[f64; 2]; 2], t: f64, variant: SchemeVariant, n: usize) -> Result<InvarianceRow> {
    let start = crate::time_integration::Stopwatch::start();
    let (g, u) = affine_grid(n)?;
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if !(det > 0.0) {
        return Err(Error::SingularMap(det));
    }
    let far = u.max();
    let u_phi = exact::affine_transform_field(&u, a, [0.0, 0.0], far)?;
    let config = SchemeConfig::defaults(variant, g.h)?;
    let policy = TimeStepPolicy::default_for(variant, false);
    let bc = BoundaryCondition::NeumannReflect;
    let s = t * det.powf(2.0 / 3.0);
    let (lhs, _, _) = evolve(&u_phi, None, &config, &bc, policy, t, &[])?;
    let (rhs, _, _) = evolve(&u, None, &config, &bc, policy, s, &[])?;
    let rhs_phi = exact::affine_transform_field(&rhs, a, [0.0, 0.0], rhs.max())?;
    let mask = exact::affine_overlap(&g, a, [0.0, 0.0]);
    let difference = lhs
        .values()
        .iter()
        .zip(rhs_phi.values())
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|((p, q), _)| (p - q).abs())
        .fold(0.0, f64::max);
    let hausdorff = contour::hausdorff(&contour::marching_squares(&lhs, 0.0), &contour::marching_squares(&rhs_phi, 0.0));
    Ok(InvarianceRow {
        test: "affine".into(),
        n,
        variant,
        difference,
        hausdorff: Some(hausdorff),
        t,
        wall_time: start.seconds(),
    })
}

/// Compares `rot90(Φ_t u)` with `Φ_t(rot90 u)`; the stencils and boundary
/// treatment are lattice symmetric, so only rounding separates them.
pub fn rot90_invariance(variant: SchemeVariant, n: usize, t: f64) -> Result<InvarianceRow> {
    let start = crate::time_integration::Stopwatch::start();
    let (g, u) = affine_grid(n)?;
    let config = SchemeConfig::defaults(variant, g.h)?;
    let policy = TimeStepPolicy::default_for(variant, false);
    let bc = BoundaryCondition::NeumannReflect;
    let (a, _, _) = evolve(&u, None, &config, &bc, policy, t, &[])?;
    let (b, _, _) = evolve(&exact::rotate90(&u)?, None, &config, &bc, policy, t, &[])?;
    let ra = exact::rotate90(&a)?;
    Ok(InvarianceRow {
        test: "affine-rot90".into(),
        n,
        variant,
        difference: ra.sup_dist(&b),
        hausdorff: Some(contour::hausdorff(&contour::marching_squares(&ra, 0.0), &contour::marching_squares(&b, 0.0))),
        t,
        wall_time: start.seconds(),
    })
}

/// Named invariance tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvarianceTest {
    MorphologyExp,
    MorphologyCube,
    MorphologyIdentity,
    AffineRot45,
    AffineShear,
    AffineRot90,
}

impl InvarianceTest {
    pub const ALL: [InvarianceTest; 6] = [
        Self::MorphologyExp,
        Self::MorphologyCube,
        Self::MorphologyIdentity,
        Self::AffineRot45,
        Self::AffineShear,
        Self::AffineRot90,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::MorphologyExp => "morphology-exp",
            Self::MorphologyCube => "morphology-cube",
            Self::MorphologyIdentity => "morphology-identity",
            Self::AffineRot45 => "affine-rot45",
            Self::AffineShear => "affine-shear",
            Self::AffineRot90 => "affine-rot90",
        }
    }

    /// Final time used unless overridden.
    pub fn default_t(self) -> f64 {
        match self {
            Self::AffineShear => 0.7,
            _ => 1.0,
        }
    }

    pub fn default_ns(self) -> Vec<usize> {
        match self {
            Self::MorphologyExp | Self::MorphologyCube | Self::MorphologyIdentity => vec![32, 64, 128, 256, 512],
            _ => vec![256],
        }
    }
}

impl std::str::FromStr for InvarianceTest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown invariance test `{s}`")))
    }
}

pub fn cmd_invariance(
    test: InvarianceTest,
    variants: &[SchemeVariant],
    ns: &[usize],
    t: Option<f64>,
) -> Result<Vec<InvarianceRow>> {
    let t = t.unwrap_or_else(|| test.default_t());
    let mut rows = Vec::new();
    for &variant in variants {
        for &n in ns {
            let mut row = match test {
                InvarianceTest::MorphologyExp => morphology(Relabel::Exp, variant, n, t)?,
                InvarianceTest::MorphologyCube => morphology(Relabel::Cube, variant, n, t)?,
                InvarianceTest::MorphologyIdentity => morphology(Relabel::Identity, variant, n, t)?,
                InvarianceTest::AffineRot45 => affine_invariance(exact::rotation(std::f64::consts::FRAC_PI_4), t, variant, n)?,
                InvarianceTest::AffineShear => affine_invariance([[1.0, 1.0], [-1.0, 1.0]], t, variant, n)?,
                InvarianceTest::AffineRot90 => rot90_invariance(variant, n, t)?,
            };
            row.test = test.name().into();
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn invariance_csv(rows: &[InvarianceRow]) -> String {
    let mut s = String::from("test,N,variant,t,difference,hausdorff\n");
    for r in rows {
        let hd = r.hausdorff.map_or(String::new(), |d| format!("{d:.3e}"));
        s.push_str(&format!("{},{},{},{},{:.3e},{}\n", r.test, r.n, r.variant, r.t, r.difference, hd));
    }
    s
}

/// A run is divergent when it blows up, when its residual ends more than
/// ten times above where it started, or when it departs from the exact
/// solution by more than this.
pub const DEPARTURE_THRESHOLD: f64 = 0.1;

pub fn is_divergent(report: &SolveReport, departure: f64) -> bool {
    report.status == SolveStatus::BlowUp
        || !(report.final_residual <= 10.0 * report.initial_residual)
        || !(departure <= DEPARTURE_THRESHOLD)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstabilityRun {
    pub label: String,
    pub scheme: String,
    pub dt_policy: String,
    pub n: usize,
    pub report: SolveReport,
    /// Sup distance to the exact solution at the end of the run.
    pub departure: f64,
    pub diverged: bool,
    pub expect_divergence: bool,
    /// `(time, csv)` of the requested snapshots.
    #[serde(skip)]
    pub snapshots: Vec<(f64, String)>,
}

impl InstabilityRun {
    pub fn as_expected(&self) -> bool {
        self.diverged == self.expect_divergence
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstabilityDemo {
    #[serde(rename = "1d-sin")]
    Sin1D,
    #[serde(rename = "1d-x43")]
    X43,
    #[serde(rename = "2d-static-d")]
    StaticD,
}

impl InstabilityDemo {
    pub const ALL: [InstabilityDemo; 3] = [Self::Sin1D, Self::X43, Self::StaticD];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sin1D => "1d-sin",
            Self::X43 => "1d-x43",
            Self::StaticD => "2d-static-d",
        }
    }
}

impl std::str::FromStr for InstabilityDemo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown instability demo `{s}`")))
    }
}

fn run_1d(
    problem: &ProblemSpec,
    label: &str,
    variant: Scheme1D,
    dt_policy: Dt1DPolicy,
    stop: StopRule,
    times: &[f64],
    expect_divergence: bool,
) -> Result<InstabilityRun> {
    let n = problem.default_n;
    let g = problem.grid_1d(n)?;
    let u0: GridFn1 = problem.initial(g);
    let f = problem.rhs(g);
    let exact = problem.exact(g, 0.0).expect("1D demos carry an exact solution");
    let mut config = Scheme1DConfig::defaults(variant, g.h)?;
    config.dt_policy = dt_policy;
    let bc = problem.boundary_condition()?;
    let (u, snaps, report) = euler_solve_1d(&u0, f.as_ref(), &config, &bc, stop, times)?;
    let departure = u.sup_dist(&exact);
    Ok(InstabilityRun {
        label: label.into(),
        scheme: variant.name().into(),
        dt_policy: dt_policy.name(),
        n,
        diverged: is_divergent(&report, departure),
        departure,
        report,
        expect_divergence,
        snapshots: snaps.iter().map(|s| (s.t, io::grid1d_to_csv(&s.field))).collect(),
    })
}

/// Grid for the regularized 1D solve paired with the sin demo. Its step
/// `1 / C^h` scales like `h^{10/3}` and the run needs `t ≈ 25`.
pub const SIN_REGULARIZED_N: usize = 128;

/// Runs a divergent configuration and its convergent counterparts.
pub fn cmd_instability(demo: InstabilityDemo) -> Result<Vec<InstabilityRun>> {
    let steady = |max_iters| StopRule::Steady { tol: DEFAULT_TOL, max_iters, max_seconds: None };
    let cases = exact::model1d_cases();
    match demo {
        InstabilityDemo::Sin1D => {
            let p = &cases[0];
            let times = p.snapshot_times.clone();
            let t_end = p.t_end.unwrap_or(5.0);
            Ok(vec![
                run_1d(p, "standard", Scheme1D::Standard, Dt1DPolicy::FixedH2, StopRule::until(t_end), &times, true)?,
                run_1d(
                    &ProblemSpec { default_n: SIN_REGULARIZED_N, ..p.clone() },
                    "elliptic-regularized",
                    Scheme1D::EllipticRegularized,
                    Dt1DPolicy::LipschitzCfl,
                    steady(u64::MAX),
                    &[],
                    false,
                )?,
            ])
        }
        InstabilityDemo::X43 => {
            let p = &cases[1];
            let times = p.snapshot_times.clone();
            let t_end = p.t_end.unwrap_or(20.0);
            let scaling = Dt1DPolicy::Scaling { denom: 4.0 };
            Ok(vec![
                run_1d(p, "elliptic-scaling-dt", Scheme1D::Elliptic, scaling, StopRule::until(t_end), &times, true)?,
                run_1d(p, "elliptic-h2-dt", Scheme1D::Elliptic, Dt1DPolicy::FixedH2, StopRule::until(t_end), &times, false)?,
            ])
        }
        InstabilityDemo::StaticD => {
            let p = exact::static_example('d')?;
            let n = 32;
            let g = p.grid(n)?;
            let exact_u = p.exact(g, 0.0).expect("static problems carry an exact solution");
            let f = p.rhs(g).expect("static problems carry a source");
            let bc = p.boundary_condition()?;
            let width = bc.layer_width();
            let config = SchemeConfig::defaults(SchemeVariant::Standard, g.h)?;
            let times = [0.0, 15.0, 17.0, 20.0, 40.0, 50.0];
            let (u, snaps, report) = evolve(&exact_u, Some(&f), &config, &bc, TimeStepPolicy::FixedH2, 50.0, &times)?;
            let departure = interior_error(&u, &exact_u, width);
            let mut runs = vec![InstabilityRun {
                label: "standard".into(),
                scheme: SchemeVariant::Standard.name().into(),
                dt_policy: TimeStepPolicy::FixedH2.name(),
                n,
                diverged: is_divergent(&report, departure),
                departure,
                report,
                expect_divergence: true,
                snapshots: snaps.iter().map(|s| (s.t, io::grid_to_csv(&s.field))).collect(),
            }];
            for variant in [SchemeVariant::EllipticRegularized, SchemeVariant::FilteredRegularized] {
                let opts = SteadyOptions { warm_start: false, ..Default::default() };
                let (u, report, err) = solve_static(&p, variant, n, &opts, None)?;
                runs.push(InstabilityRun {
                    label: variant.name().into(),
                    scheme: variant.name().into(),
                    dt_policy: TimeStepPolicy::default_for(variant, true).name(),
                    n,
                    diverged: is_divergent(&report, err) || !report.converged(),
                    departure: err,
                    report,
                    expect_divergence: false,
                    snapshots: vec![(f64::NAN, io::grid_to_csv(&u))],
                });
            }
            Ok(runs)
        }
    }
}
