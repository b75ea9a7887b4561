//! Explicit Euler drivers: `u ← u + dt (F^h[u] - f)` run either to a final
//! time or until the sup norm of the residual drops below a tolerance.


use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, Extended, Grid, Grid2D, GridFn2, LayerData, Probe};
use crate::nonlinearity::RegularizationParams;
use crate::schemes::{SchemeConfig, SchemeVariant};

/// Default iteration budget per solve.
pub const DEFAULT_MAX_ITERS: u64 = 1_000_000;

/// Residual history keeps at most this many samples.
const HISTORY_CAP: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeStepPolicy {
    /// `dt = 1 / C^h` from the configured stencil and regularization.
    LipschitzCfl,
    /// `dt = h² / 2`.
    FixedH2,
    /// `dt = h² / 8`.
    FixedH2Over8,
    Fixed(f64),
}

impl TimeStepPolicy {
    pub fn resolve(&self, h: f64, config: &SchemeConfig) -> Result<f64> {
        let dt = match *self {
            Self::LipschitzCfl => 1.0 / lipschitz_constant_2d(h, config.stencil.n_theta(), &config.reg),
            Self::FixedH2 => h * h / 2.0,
            Self::FixedH2Over8 => h * h / 8.0,
            Self::Fixed(dt) => dt,
        };
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step {dt}")));
        }
        Ok(dt)
    }

    /// Regularized variants and `Standard` in evolution problems step at
    /// `1 / C^h`; the unregularized monotone variants and static `Standard`
    /// solves use `h² / 2`.
    pub fn default_for(variant: SchemeVariant, steady: bool) -> Self {
        match variant {
            SchemeVariant::Standard if steady => Self::FixedH2,
            SchemeVariant::Standard => Self::LipschitzCfl,
            v if v.is_regularized() => Self::LipschitzCfl,
            _ => Self::FixedH2,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::LipschitzCfl => "lipschitz-cfl".into(),
            Self::FixedH2 => "h2/2".into(),
            Self::FixedH2Over8 => "h2/8".into(),
            Self::Fixed(dt) => format!("fixed:{dt}"),
        }
    }
}

impl std::str::FromStr for TimeStepPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lipschitz-cfl" | "cfl" => Ok(Self::LipschitzCfl),
            "h2/2" | "h2" => Ok(Self::FixedH2),
            "h2/8" => Ok(Self::FixedH2Over8),
            _ => {
                let v = s.strip_prefix("fixed:").unwrap_or(s);
                v.parse::<f64>()
                    .map(Self::Fixed)
                    .map_err(|_| Error::Parse(format!("unknown time step policy `{s}`")))
            }
        }
    }
}

/// `C^h = K/h + 2L/(h n_θ)²`.
pub fn lipschitz_constant_2d(h: f64, n_theta: usize, reg: &RegularizationParams) -> f64 {
    let r = h * n_theta as f64;
    reg.k / h + 2.0 * reg.l / (r * r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    /// Reached the requested final time.
    Completed,
    MaxIters,
    BlowUp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: u64,
    pub dt: f64,
    /// Time reached by the returned field.
    pub t_final: f64,
    pub initial_residual: f64,
    /// Sup norm of `F^h[u] - f` over the updated points of the returned field.
    pub final_residual: f64,
    /// `(iteration, residual)` pairs at a stride that doubles as the run grows.
    pub residual_history: Vec<(u64, f64)>,
    pub wall_time: f64,
    pub message: Option<String>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// When to stop iterating.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    Steady { tol: f64, max_iters: u64, max_seconds: Option<f64> },
    /// Last step not exceeding `t_end`.
    Until { t_end: f64, max_iters: u64 },
}

impl StopRule {
    pub fn steady(tol: f64) -> Self {
        Self::Steady { tol, max_iters: DEFAULT_MAX_ITERS, max_seconds: None }
    }

    pub fn until(t_end: f64) -> Self {
        Self::Until { t_end, max_iters: u64::MAX }
    }

    fn max_iters(&self) -> u64 {
        match *self {
            Self::Steady { max_iters, .. } | Self::Until { max_iters, .. } => max_iters,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T> {
    pub requested: f64,
    pub t: f64,
    pub iteration: u64,
    pub field: T,
}

/// Raw layout shared by the 1D (`ny = 1`) and 2D drivers.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Layout {
    pub nx: usize,
    pub ny: usize,
    pub pad_x: usize,
    pub pad_y: usize,
    pub h: f64,
    pub x0: f64,
    pub y0: f64,
}

impl Layout {
    pub fn of_2d(g: &Grid2D, reach: usize) -> Self {
        Self { nx: g.nx, ny: g.ny, pad_x: reach, pad_y: reach, h: g.h, x0: g.x0, y0: g.y0 }
    }

    fn on_layer(&self, w: usize, i: usize, j: usize) -> bool {
        w > 0 && (i < w || i + w >= self.nx || (self.ny > 1 && (j < w || j + w >= self.ny)))
    }

    fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h)
    }
}

pub(crate) struct Outcome {
    pub u: Vec<f64>,
    pub report: SolveReport,
    pub snapshots: Vec<Snapshot<Vec<f64>>>,
}

/// Evaluates `F^h[u] - f` into `r` (zero on Dirichlet layer points) and
/// returns the sup norm over updated points, or `None` if anything is not
/// finite.
pub(crate) fn residual_sweep<K>(
    lay: &Layout,
    bc: &BoundaryCondition,
    ext: &Extended,
    f: Option<&[f64]>,
    kernel: &K,
    r: &mut [f64],
) -> Option<f64>
where
    K: Fn(&Probe, &mut Vec<f64>) -> f64 + Sync,
{
    let w = bc.layer_width();
    let row = |j: usize, out: &mut [f64], scratch: &mut Vec<f64>| -> (f64, bool) {
        let mut sup = 0.0f64;
        let mut finite = true;
        for (i, o) in out.iter_mut().enumerate() {
            if lay.on_layer(w, i, j) {
                *o = 0.0;
                continue;
            }
            let mut v = kernel(&ext.probe(i, j), scratch);
            if let Some(f) = f {
                v -= f[j * lay.nx + i];
            }
            finite &= v.is_finite();
            sup = sup.max(v.abs());
            *o = v;
        }
        (sup, finite)
    };

    #[cfg(feature = "parallel")]
    let (sup, finite) = {
        use rayon::prelude::*;
        r.par_chunks_mut(lay.nx)
            .enumerate()
            .map_init(|| Vec::with_capacity(64), |scratch, (j, out)| row(j, out, scratch))
            .reduce(|| (0.0, true), |a, b| (a.0.max(b.0), a.1 && b.1))
    };
    #[cfg(not(feature = "parallel"))]
    let (sup, finite) = {
        let mut scratch = Vec::with_capacity(64);
        r.chunks_mut(lay.nx)
            .enumerate()
            .map(|(j, out)| row(j, out, &mut scratch))
            .fold((0.0f64, true), |a, b| (a.0.max(b.0), a.1 && b.1))
    };
    finite.then_some(sup)
}

fn layer_indices(lay: &Layout, bc: &BoundaryCondition) -> Vec<(usize, usize)> {
    let w = bc.layer_width();
    let mut out = Vec::new();
    for j in 0..lay.ny {
        for i in 0..lay.nx {
            if lay.on_layer(w, i, j) {
                out.push((i, j));
            }
        }
    }
    out
}

fn impose_layer(lay: &Layout, bc: &BoundaryCondition, layer: &[(usize, usize)], u: &mut [f64], t: f64) {
    if let BoundaryCondition::DirichletLayer { data, .. } = bc {
        if matches!(data, LayerData::Initial) {
            return;
        }
        for &(i, j) in layer {
            let k = j * lay.nx + i;
            let (x, y) = lay.point(i, j);
            u[k] = bc.layer_value(u, k, x, y, t);
        }
    }
}

struct History {
    stride: u64,
    data: Vec<(u64, f64)>,
}

impl History {
    fn new() -> Self {
        Self { stride: 1, data: Vec::new() }
    }

    fn push(&mut self, it: u64, r: f64) {
        if it % self.stride != 0 {
            return;
        }
        self.data.push((it, r));
        if self.data.len() >= HISTORY_CAP {
            self.stride *= 2;
            let s = self.stride;
            self.data.retain(|&(k, _)| k % s == 0);
        }
    }

    fn finish(mut self, it: u64, r: f64) -> Vec<(u64, f64)> {
        if self.data.last().map(|&(k, _)| k) != Some(it) {
            self.data.push((it, r));
        }
        self.data
    }
}

/// The Euler loop. `snapshot_times` must be sorted.
pub(crate) fn run<K>(
    lay: &Layout,
    mut u: Vec<f64>,
    f: Option<&[f64]>,
    bc: &BoundaryCondition,
    kernel: K,
    dt: f64,
    stop: StopRule,
    snapshot_times: &[f64],
) -> Result<Outcome>
where
    K: Fn(&Probe, &mut Vec<f64>) -> f64 + Sync,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("time step {dt}")));
    }
    if snapshot_times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("snapshot times must be sorted".into()));
    }
    if let Some(f) = f {
        if f.len() != u.len() {
            return Err(Error::LengthMismatch { expected: u.len(), found: f.len() });
        }
    }
    if let StopRule::Steady { tol, .. } = stop {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol = {tol}")));
        }
    }
    crate::grid::check_finite(&u)?;

    let start = Stopwatch::start();
    let layer = layer_indices(lay, bc);
    let mut ext = Extended::new();
    let mut r = vec![0.0; u.len()];
    let mut history = History::new();
    let mut snapshots = Vec::new();
    let mut next_snap = 0;
    let mut initial = None;
    let max_iters = stop.max_iters();
    // a step "does not exceed" a time if it lands within this slack of it
    let slack = 1e-9 * dt;

    let mut u_max = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut n: u64 = 0;
    let (status, residual, message) = loop {
        let t = n as f64 * dt;
        impose_layer(lay, bc, &layer, &mut u, t);
        ext.fill(&u, lay.nx, lay.ny, lay.pad_x, lay.pad_y)?;
        let res = residual_sweep(lay, bc, &ext, f, &kernel, &mut r);
        let Some(res) = res else {
            break (SolveStatus::BlowUp, f64::NAN, Some(format!("non-finite residual at iteration {n}, t = {t}")));
        };
        initial.get_or_insert(res);
        history.push(n, res);

        while next_snap < snapshot_times.len() && snapshot_times[next_snap] < t + dt - slack {
            snapshots.push(Snapshot { requested: snapshot_times[next_snap], t, iteration: n, field: u.clone() });
            next_snap += 1;
        }

        match stop {
            StopRule::Steady { tol, max_seconds, .. } => {
                if res < tol {
                    break (SolveStatus::Converged, res, None);
                }
                if let Some(cap) = max_seconds {
                    if start.seconds() > cap {
                        break (SolveStatus::MaxIters, res, Some(format!("wall-clock cap of {cap} s reached")));
                    }
                }
            }
            StopRule::Until { t_end, .. } => {
                if t + dt > t_end + slack {
                    break (SolveStatus::Completed, res, None);
                }
            }
        }
        if n >= max_iters {
            break (SolveStatus::MaxIters, res, Some(format!("iteration budget {max_iters} exhausted")));
        }

        // refuse a step that could overflow so the returned field stays finite
        if !(u_max + dt * res < f64::MAX / 4.0) {
            break (SolveStatus::BlowUp, res, Some(format!("field magnitude overflow at iteration {n}, t = {t}")));
        }
        u_max = 0.0;
        for (v, dv) in u.iter_mut().zip(&r) {
            *v += dt * dv;
            u_max = u_max.max(v.abs());
        }
        n += 1;
    };

    let report = SolveReport {
        status,
        iterations: n,
        dt,
        t_final: n as f64 * dt,
        initial_residual: initial.unwrap_or(f64::NAN),
        final_residual: residual,
        residual_history: history.finish(n, residual),
        wall_time: start.seconds(),
        message,
    };
    Ok(Outcome { u, report, snapshots })
}

fn check_grid(u: &GridFn2, f: Option<&GridFn2>, config: &SchemeConfig) -> Result<Layout> {
    config.validate()?;
    let g = u.grid();
    if let Some(f) = f {
        if f.grid() != g {
            return Err(Error::DomainMismatch);
        }
    }
    Ok(Layout::of_2d(g, config.reach()))
}

/// Evolves `u0` by the configured scheme until `t_end`, capturing the field
/// at the last step not exceeding each requested snapshot time.
pub fn evolve(
    u0: &GridFn2,
    f: Option<&GridFn2>,
    config: &SchemeConfig,
    bc: &BoundaryCondition,
    policy: TimeStepPolicy,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<(GridFn2, Vec<Snapshot<GridFn2>>, SolveReport)> {
    if !(t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!("final time {t_end}")));
    }
    let lay = check_grid(u0, f, config)?;
    let g = *u0.grid();
    let dt = policy.resolve(g.h, config)?;
    let scheme = config.bind(g.h)?;
    let out = run(
        &lay,
        u0.values().to_vec(),
        f.map(|f| f.values()),
        bc,
        |p: &Probe, s: &mut Vec<f64>| scheme.eval(p, s),
        dt,
        StopRule::until(t_end),
        snapshot_times,
    )?;
    let snaps = out
        .snapshots
        .into_iter()
        .map(|s| Snapshot { requested: s.requested, t: s.t, iteration: s.iteration, field: wrap(g, s.field) })
        .collect();
    Ok((wrap(g, out.u), snaps, out.report))
}

/// Iterates to a steady state of `u_t = F^h[u] - f`.
pub fn solve_steady(
    u0: &GridFn2,
    f: &GridFn2,
    config: &SchemeConfig,
    bc: &BoundaryCondition,
    policy: TimeStepPolicy,
    max_iters: u64,
) -> Result<(GridFn2, SolveReport)> {
    solve_steady_with(u0, f, config, bc, policy, StopRule::Steady { tol: config.tol, max_iters, max_seconds: None })
}

pub fn solve_steady_with(
    u0: &GridFn2,
    f: &GridFn2,
    config: &SchemeConfig,
    bc: &BoundaryCondition,
    policy: TimeStepPolicy,
    stop: StopRule,
) -> Result<(GridFn2, SolveReport)> {
    let lay = check_grid(u0, Some(f), config)?;
    let g = *u0.grid();
    let dt = policy.resolve(g.h, config)?;
    let scheme = config.bind(g.h)?;
    let out = run(
        &lay,
        u0.values().to_vec(),
        Some(f.values()),
        bc,
        |p: &Probe, s: &mut Vec<f64>| scheme.eval(p, s),
        dt,
        stop,
        &[],
    )?;
    Ok((wrap(g, out.u), out.report))
}

/// `F^h[u]` at every point not on a Dirichlet layer (zero on the layer).
pub fn apply_scheme(u: &GridFn2, config: &SchemeConfig, bc: &BoundaryCondition) -> Result<GridFn2> {
    let lay = check_grid(u, None, config)?;
    let scheme = config.bind(lay.h)?;
    let ext = {
        let mut e = Extended::new();
        e.fill(u.values(), lay.nx, lay.ny, lay.pad_x, lay.pad_y)?;
        e
    };
    let mut r = vec![0.0; u.values().len()];
    residual_sweep(&lay, bc, &ext, None, &|p: &Probe, s: &mut Vec<f64>| scheme.eval(p, s), &mut r)
        .ok_or(Error::NonFinite { index: r.iter().position(|v| !v.is_finite()).unwrap_or(0) })?;
    Ok(wrap(*u.grid(), r))
}

/// One explicit Euler step `u + dt (F^h[u] - f)`; layer points are kept.
pub fn euler_step(
    u: &GridFn2,
    f: Option<&GridFn2>,
    config: &SchemeConfig,
    bc: &BoundaryCondition,
    dt: f64,
) -> Result<GridFn2> {
    let fu = apply_scheme(u, config, bc)?;
    let w = bc.layer_width();
    let g = *u.grid();
    let lay = Layout::of_2d(&g, 0);
    let mut out = u.values().to_vec();
    for (k, v) in out.iter_mut().enumerate() {
        let (i, j) = g.coords(k);
        if !lay.on_layer(w, i, j) {
            *v += dt * (fu.values()[k] - f.map_or(0.0, |f| f.values()[k]));
        }
    }
    Ok(wrap(g, out))
}

fn wrap(g: Grid2D, values: Vec<f64>) -> GridFn2 {
    GridFn2::from_values(g, values).expect("driver keeps fields finite and sized")
}

/// Tensor cubic Lagrange interpolation of `coarse` onto the points of
/// `fine`; exact for polynomials of degree three in each variable.
pub fn prolong(coarse: &GridFn2, fine: &Grid2D) -> Result<GridFn2> {
    let c = coarse.grid();
    if c.nx < 4 || c.ny < 4 {
        return Err(Error::DomainMismatch);
    }
    let mut values = Vec::with_capacity(fine.len());
    for j in 0..fine.ny {
        for i in 0..fine.nx {
            let (x, y) = (fine.x(i), fine.y(j));
            if !c.contains(x, y) {
                return Err(Error::DomainMismatch);
            }
            values.push(bicubic(coarse, x, y));
        }
    }
    GridFn2::from_values(*fine, values)
}

fn cubic_weights(s: f64, n: usize) -> (usize, [f64; 4]) {
    let s = s.clamp(0.0, (n - 1) as f64);
    let k = (s.floor() as usize).clamp(1, n - 3) - 1;
    let t = s - k as f64;
    let (a, b, c, d) = (t, t - 1.0, t - 2.0, t - 3.0);
    (k, [-b * c * d / 6.0, a * c * d / 2.0, -a * b * d / 2.0, a * b * c / 6.0])
}

fn bicubic(u: &GridFn2, x: f64, y: f64) -> f64 {
    let g = u.grid();
    let (i, wx) = cubic_weights((x - g.x0) / g.h, g.nx);
    let (j, wy) = cubic_weights((y - g.y0) / g.h, g.ny);
    let mut sum = 0.0;
    for (b, wb) in wy.iter().enumerate() {
        let row: f64 = wx.iter().enumerate().map(|(a, wa)| wa * u.at(i + a, j + b)).sum();
        sum += wb * row;
    }
    sum
}

/// Bilinear interpolant of a grid function at a point of its rectangle.
pub fn bilinear(u: &GridFn2, x: f64, y: f64) -> f64 {
    let g = u.grid();
    let locate = |s: f64, n: usize| -> (usize, f64) {
        let s = s.clamp(0.0, (n - 1) as f64);
        let k = (s.floor() as usize).min(n - 2);
        (k, s - k as f64)
    };
    let (i, a) = locate((x - g.x0) / g.h, g.nx);
    let (j, b) = locate((y - g.y0) / g.h, g.ny);
    let v00 = u.at(i, j);
    let v10 = u.at(i + 1, j);
    let v01 = u.at(i, j + 1);
    let v11 = u.at(i + 1, j + 1);
    (1.0 - b) * ((1.0 - a) * v00 + a * v10) + b * ((1.0 - a) * v01 + a * v11)
}

/// Wall clock; reads zero where the platform has none.
#[derive(Clone, Copy, Debug)]
pub struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    pub fn start() -> Self {
        Self(
            #[cfg(not(target_arch = "wasm32"))]
            std::time::Instant::now(),
        )
    }

    pub fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}
