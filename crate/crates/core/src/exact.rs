//! Closed-form solutions, manufactured sources and initial conditions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, Grid1D, Grid2D, GridFn, GridFn2, LayerData, DEFAULT_LAYER_WIDTH};
use crate::time_integration::bilinear;

pub type Field = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type TimeField = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcKind {
    /// Exact solution prescribed on a layer of this many points.
    Dirichlet { width: usize },
    Neumann,
}

/// A named experiment: domain, data and boundary treatment.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub dimension: u8,
    /// The square (or interval) `[lo, hi]^d`.
    pub domain: (f64, f64),
    pub u_exact: Option<TimeField>,
    pub f_rhs: Option<Field>,
    pub u0: Field,
    pub bc: BcKind,
    pub default_n: usize,
    pub t_end: Option<f64>,
    pub snapshot_times: Vec<f64>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("domain", &self.domain)
            .field("has_exact", &self.u_exact.is_some())
            .field("has_rhs", &self.f_rhs.is_some())
            .field("bc", &self.bc)
            .field("default_n", &self.default_n)
            .field("t_end", &self.t_end)
            .finish()
    }
}

impl ProblemSpec {
    pub fn grid(&self, n: usize) -> Result<Grid2D> {
        Grid2D::square(self.domain.0, self.domain.1, n)
    }

    pub fn grid_1d(&self, n: usize) -> Result<Grid1D> {
        Grid1D::spanning(self.domain.0, self.domain.1, n)
    }

    pub fn initial<G: crate::grid::Grid>(&self, grid: G) -> GridFn<G> {
        let u0 = self.u0.clone();
        GridFn::sample(grid, move |x, y| u0(x, y))
    }

    pub fn rhs<G: crate::grid::Grid>(&self, grid: G) -> Option<GridFn<G>> {
        let f = self.f_rhs.clone()?;
        Some(GridFn::sample(grid, move |x, y| f(x, y)))
    }

    pub fn exact<G: crate::grid::Grid>(&self, grid: G, t: f64) -> Option<GridFn<G>> {
        let u = self.u_exact.clone()?;
        Some(GridFn::sample(grid, move |x, y| u(x, y, t)))
    }

    /// Dirichlet layers take their values from the exact solution at every
    /// time level.
    pub fn boundary_condition(&self) -> Result<BoundaryCondition> {
        match self.bc {
            BcKind::Neumann => Ok(BoundaryCondition::NeumannReflect),
            BcKind::Dirichlet { width } => {
                let u = self.u_exact.clone().ok_or_else(|| {
                    Error::InvalidParameter(format!("{}: Dirichlet data needs an exact solution", self.name))
                })?;
                BoundaryCondition::dirichlet(width, LayerData::Exact(u))
            }
        }
    }

    pub fn is_static(&self) -> bool {
        self.f_rhs.is_some() && self.t_end.is_none()
    }
}

/// `t + (3/4) ((b/a) x² + (a/b) y²)^{2/3}`.
pub fn ellipse_solution(a: f64, b: f64, x: f64, y: f64, t: f64) -> f64 {
    t + 0.75 * ((b / a) * x * x + (a / b) * y * y).powf(2.0 / 3.0)
}

/// The level curve `ellipse_solution(a, b, x, y, t) = c` is
/// `(b/a) x² + (a/b) y² = R`; returns `R = ((c - t) / 0.75)^{3/2}`.
pub fn ellipse_level_radius(c: f64, t: f64) -> f64 {
    ((c - t).max(0.0) / 0.75).powf(1.5)
}

fn field(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Field {
    Arc::new(f)
}

fn static_spec(name: &str, u: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, f: Field) -> ProblemSpec {
    let u = Arc::new(u);
    let ue = u.clone();
    ProblemSpec {
        name: name.into(),
        dimension: 2,
        domain: (-1.0, 1.0),
        u_exact: Some(Arc::new(move |x, y, _| ue(x, y))),
        f_rhs: Some(f),
        u0: field(move |x, y| u(x, y)),
        bc: BcKind::Dirichlet { width: DEFAULT_LAYER_WIDTH },
        default_n: 64,
        t_end: None,
        snapshot_times: Vec::new(),
    }
}

/// Static manufactured problems on `[-1, 1]²`, tags `a` to `d`.
///
/// `u0` holds the exact solution; the solver protocol replaces the
/// interior before iterating.
pub fn static_example(tag: char) -> Result<ProblemSpec> {
    let r2 = |x: f64, y: f64| x * x + y * y;
    Ok(match tag {
        'a' => static_spec("static-a", move |x, y| r2(x, y), field(move |x, y| 2.0 * r2(x, y).cbrt())),
        'b' => static_spec(
            "static-b",
            move |x, y| r2(x, y).exp(),
            field(move |x, y| {
                let s = r2(x, y);
                2.0 * ((3.0 * s).exp() * s).cbrt()
            }),
        ),
        'c' => static_spec("static-c", move |x, y| r2(x, y).powf(2.0 / 3.0), field(|_, _| 4.0 / 3.0)),
        'd' => static_spec(
            "static-d",
            |x, y| (2.0 * PI * x).sin() * (2.0 * PI * y).sin() / 4.0,
            field(|x, y| {
                let s = (2.0 * PI * x).sin() * (2.0 * PI * y).sin();
                let c = 2.0 + (4.0 * PI * x).cos() + (4.0 * PI * y).cos();
                PI.powf(4.0 / 3.0) / 2.0 * (-c * s).cbrt()
            }),
        ),
        _ => return Err(Error::UnknownProblem(format!("static-{tag}"))),
    })
}

/// Ellipse with `a = 2, b = 1` on `[-3, 3]²`: exact Dirichlet data on the
/// seven-point layer, or capped at `min(u - 1, 0)` with reflecting
/// boundaries.
pub fn ellipse_time_problem(neumann: bool) -> ProblemSpec {
    let (a, b) = (2.0, 1.0);
    let u: TimeField = if neumann {
        Arc::new(move |x, y, t| (ellipse_solution(a, b, x, y, t) - 1.0).min(0.0))
    } else {
        Arc::new(move |x, y, t| ellipse_solution(a, b, x, y, t))
    };
    let u0 = u.clone();
    ProblemSpec {
        name: if neumann { "ellipse-neumann" } else { "ellipse-dirichlet" }.into(),
        dimension: 2,
        domain: (-3.0, 3.0),
        u_exact: Some(u),
        f_rhs: None,
        u0: field(move |x, y| u0(x, y, 0.0)),
        bc: if neumann { BcKind::Neumann } else { BcKind::Dirichlet { width: DEFAULT_LAYER_WIDTH } },
        default_n: 64,
        t_end: Some(0.1),
        snapshot_times: vec![0.1],
    }
}

fn evolution_spec(name: &str, lo: f64, u0: Field, times: Vec<f64>) -> ProblemSpec {
    ProblemSpec {
        name: name.into(),
        dimension: 2,
        domain: (lo, -lo),
        u_exact: None,
        f_rhs: None,
        u0,
        bc: BcKind::Neumann,
        default_n: 128,
        t_end: times.last().copied(),
        snapshot_times: times,
    }
}

fn steps(end: f64, by: f64) -> Vec<f64> {
    let n = (end / by).round() as usize;
    (0..=n).map(|k| k as f64 * by).collect()
}

/// Curve evolution initial conditions, capped at 1 with reflecting
/// boundaries.
pub fn evolution_ic(tag: &str) -> Result<ProblemSpec> {
    Ok(match tag {
        "ellipse" => evolution_spec(
            "evolution-ellipse",
            -4.0,
            field(|x, y| ((x / 2.0).powi(2) + y * y - 1.0).min(1.0)),
            vec![0.0, 0.1, 0.3, 0.5, 0.7, 0.9],
        ),
        "diamond" => {
            evolution_spec("evolution-diamond", -2.0, field(|x, y| (x.abs() + y.abs() - 1.0).min(1.0)), steps(0.5, 0.1))
        }
        "flat_diamond" | "flat-diamond" => evolution_spec(
            "evolution-flat-diamond",
            -2.0,
            field(|x, y| (x.abs() + 2.0 * y.abs() - 1.0).min(1.0)),
            steps(0.3, 0.05),
        ),
        "fan" => evolution_spec("evolution-fan", -2.0, field(fan), vec![0.0, 0.05, 0.1, 0.2]),
        _ => return Err(Error::UnknownProblem(format!("evolution-{tag}"))),
    })
}

/// `min(c₊⁽¹⁾, c₋⁽¹⁾, c₊⁽²⁾, c₋⁽²⁾, 1)`.
pub fn fan(x: f64, y: f64) -> f64 {
    let c1 = |s: f64| (x + s * 0.5).powi(2) + 5.0 * (y + s * 0.25).powi(2) - 0.5;
    let c2 = |s: f64| 5.0 * (x + s * 0.25).powi(2) + (y - s * 0.25).powi(2) - 0.5;
    c1(1.0).min(c1(-1.0)).min(c2(1.0)).min(c2(-1.0)).min(1.0)
}

/// Coefficient of the constant source for `u = C |x|^{4/3}`:
/// `F^{1D}[u] = (64/81)^{1/3} C`.
pub fn x43_rhs_coefficient() -> f64 {
    (64.0f64 / 81.0).cbrt()
}

/// The two 1D instability demos on `[-1, 1]`, each with `f = F^{1D}[u0]`
/// in closed form and the exact steady state `u0`.
pub fn model1d_cases() -> Vec<ProblemSpec> {
    model1d_cases_with(1.0)
}

pub fn model1d_cases_with(c: f64) -> Vec<ProblemSpec> {
    let tau = 2.0 * PI;
    let sin_u = move |x: f64| (tau * x).sin();
    let x43 = move |x: f64| c * x.abs().powf(4.0 / 3.0);
    let one_d = |name: &str, u: Arc<dyn Fn(f64) -> f64 + Send + Sync>, f: Field, n: usize, t_end: f64, times: Vec<f64>| {
        let ue = u.clone();
        ProblemSpec {
            name: name.into(),
            dimension: 1,
            domain: (-1.0, 1.0),
            u_exact: Some(Arc::new(move |x, _, _| ue(x))),
            f_rhs: Some(f),
            u0: field(move |x, _| u(x)),
            bc: BcKind::Dirichlet { width: 1 },
            default_n: n,
            t_end: Some(t_end),
            snapshot_times: times,
        }
    };
    vec![
        one_d(
            "model1d-sin",
            Arc::new(sin_u),
            field(move |x, _| {
                let ux = tau * (tau * x).cos();
                let uxx = -tau * tau * (tau * x).sin();
                (ux * ux * uxx).cbrt()
            }),
            256,
            5.0,
            vec![0.0, 1.0, 2.0, 5.0],
        ),
        one_d(
            "model1d-x43",
            Arc::new(x43),
            field(move |_, _| x43_rhs_coefficient() * c),
            128,
            20.0,
            vec![0.0, 1.0, 5.0, 20.0],
        ),
    ]
}

/// Registry of every named problem.
pub fn problem_names() -> Vec<&'static str> {
    vec![
        "static-a",
        "static-b",
        "static-c",
        "static-d",
        "ellipse-dirichlet",
        "ellipse-neumann",
        "evolution-ellipse",
        "evolution-diamond",
        "evolution-flat-diamond",
        "evolution-fan",
        "model1d-sin",
        "model1d-x43",
    ]
}

pub fn problem_by_name(name: &str) -> Result<ProblemSpec> {
    if let Some(tag) = name.strip_prefix("static-") {
        let mut cs = tag.chars();
        return match (cs.next(), cs.next()) {
            (Some(c), None) => static_example(c),
            _ => Err(Error::UnknownProblem(name.into())),
        };
    }
    if let Some(tag) = name.strip_prefix("evolution-") {
        return evolution_ic(tag);
    }
    match name {
        "ellipse-dirichlet" => Ok(ellipse_time_problem(false)),
        "ellipse-neumann" => Ok(ellipse_time_problem(true)),
        "model1d-sin" | "model1d-x43" => Ok(model1d_cases().into_iter().find(|p| p.name == name).expect("registered")),
        _ => Err(Error::UnknownProblem(name.into())),
    }
}

/// `x ↦ u(Ax + b)` sampled by bilinear interpolation of `u`; points that
/// map outside the grid take `far_field`.
pub fn affine_transform_field(u: &GridFn2, a: [[f64; 2]; 2], b: [f64; 2], far_field: f64) -> Result<GridFn2> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < 1e-12 {
        return Err(Error::SingularMap(det));
    }
    let g = *u.grid();
    let mut out = Vec::with_capacity(g.nx * g.ny);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let (x, y) = (g.x(i), g.y(j));
            let (px, py) = (a[0][0] * x + a[0][1] * y + b[0], a[1][0] * x + a[1][1] * y + b[1]);
            out.push(if g.contains(px, py) { bilinear(u, px, py) } else { far_field });
        }
    }
    GridFn2::from_values(g, out)
}

/// Mask of grid points `x` whose image `Ax + b` lies inside the grid.
pub fn affine_overlap(g: &Grid2D, a: [[f64; 2]; 2], b: [f64; 2]) -> Vec<bool> {
    let mut out = Vec::with_capacity(g.nx * g.ny);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let (x, y) = (g.x(i), g.y(j));
            out.push(g.contains(a[0][0] * x + a[0][1] * y + b[0], a[1][0] * x + a[1][1] * y + b[1]));
        }
    }
    out
}

pub fn rotation(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, s], [-s, c]]
}

/// `x ↦ u(R x)` for the quarter turn `R = [[0, 1], [-1, 0]]` on a square
/// grid centred at the origin: an exact permutation of samples.
pub fn rotate90(u: &GridFn2) -> Result<GridFn2> {
    let g = *u.grid();
    let centred = (g.x0 + g.x_max()).abs() < 1e-12 * g.h && (g.y0 + g.y_max()).abs() < 1e-12 * g.h;
    if g.nx != g.ny || !centred {
        return Err(Error::DomainMismatch);
    }
    let n = g.nx;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            out.push(u.at(j, n - 1 - i));
        }
    }
    GridFn2::from_values(g, out)
}
