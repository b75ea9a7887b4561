//! The one-dimensional model `u_t = A(u_x, u_xx) - f` and its standard,
//! elliptic and regularized discretizations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diff::{abs_minus, abs_plus, d2_xx, d_centered_x, Axis};
use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, Grid1D, GridFn1, Probe};
use crate::nonlinearity::{affine_a, elliptic_a, RegularizationParams};
use crate::time_integration::{run, Layout, Snapshot, SolveReport, StopRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme1D {
    Standard,
    Elliptic,
    EllipticRegularized,
}

impl Scheme1D {
    pub const ALL: [Scheme1D; 3] = [Scheme1D::Standard, Scheme1D::Elliptic, Scheme1D::EllipticRegularized];

    pub fn name(self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::Elliptic => "elliptic",
            Self::EllipticRegularized => "elliptic-regularized",
        }
    }
}

impl fmt::Display for Scheme1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme1D {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown 1D scheme `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dt1DPolicy {
    /// `1 / C^h` with `C^h = K/h + 2L/h²`.
    LipschitzCfl,
    /// `(h⁴ / denom)^{1/3}`; `denom = 2` is the maximum-principle bound.
    Scaling { denom: f64 },
    /// `h² / 2`.
    FixedH2,
    Fixed(f64),
}

impl Dt1DPolicy {
    pub fn max_principle() -> Self {
        Self::Scaling { denom: 2.0 }
    }

    pub fn name(&self) -> String {
        match self {
            Self::LipschitzCfl => "lipschitz-cfl".into(),
            Self::Scaling { denom } => format!("scaling:{denom}"),
            Self::FixedH2 => "h2/2".into(),
            Self::Fixed(dt) => format!("fixed:{dt}"),
        }
    }
}

impl FromStr for Dt1DPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown time step policy `{s}`"));
        match s {
            "lipschitz-cfl" | "cfl" => Ok(Self::LipschitzCfl),
            "h2/2" | "h2" => Ok(Self::FixedH2),
            "scaling" => Ok(Self::max_principle()),
            _ => {
                if let Some(d) = s.strip_prefix("scaling:") {
                    d.parse().map(|denom| Self::Scaling { denom }).map_err(|_| bad())
                } else {
                    s.strip_prefix("fixed:").unwrap_or(s).parse().map(Self::Fixed).map_err(|_| bad())
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scheme1DConfig {
    pub variant: Scheme1D,
    pub reg: RegularizationParams,
    pub dt_policy: Dt1DPolicy,
}

impl Scheme1DConfig {
    /// `K = h^{-1/3}`, `L = h^{-4/3}`; regularized runs step at `1/C^h`,
    /// the others at `h²/2`.
    pub fn defaults(variant: Scheme1D, h: f64) -> Result<Self> {
        let dt_policy = match variant {
            Scheme1D::EllipticRegularized => Dt1DPolicy::LipschitzCfl,
            _ => Dt1DPolicy::FixedH2,
        };
        Ok(Self { variant, reg: RegularizationParams::model_1d(h)?, dt_policy })
    }

    pub fn resolve_dt(&self, h: f64) -> Result<f64> {
        let dt = match self.dt_policy {
            Dt1DPolicy::LipschitzCfl => 1.0 / lipschitz_constant_1d(h, &self.reg),
            Dt1DPolicy::Scaling { denom } => (h.powi(4) / denom).cbrt(),
            Dt1DPolicy::FixedH2 => h * h / 2.0,
            Dt1DPolicy::Fixed(dt) => dt,
        };
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step {dt}")));
        }
        Ok(dt)
    }

    #[inline]
    pub fn eval(&self, p: &Probe, h: f64) -> f64 {
        match self.variant {
            Scheme1D::Standard => f1d_standard(p, h),
            Scheme1D::Elliptic => f1d_elliptic(p, h),
            Scheme1D::EllipticRegularized => f1d_elliptic_regularized(p, h, &self.reg),
        }
    }
}

/// `A(u_x^h, u_xx^h)` with centered differences.
#[inline]
pub fn f1d_standard(p: &Probe, h: f64) -> f64 {
    affine_a(d_centered_x(p, h), d2_xx(p, h))
}

/// `-F = A⁺(|u_x^h|⁺, -u_xx^h) + A⁻(-|u_x^h|⁻, -u_xx^h)`; returns `F`.
#[inline]
pub fn f1d_elliptic(p: &Probe, h: f64) -> f64 {
    elliptic_a(abs_plus(p, Axis::X, h), abs_minus(p, Axis::X, h), d2_xx(p, h))
}

#[inline]
pub fn f1d_elliptic_regularized(p: &Probe, h: f64, reg: &RegularizationParams) -> f64 {
    reg.elliptic(abs_plus(p, Axis::X, h), abs_minus(p, Axis::X, h), d2_xx(p, h))
}

/// `C^h = K/h + 2L/h²`.
pub fn lipschitz_constant_1d(h: f64, reg: &RegularizationParams) -> f64 {
    reg.k / h + 2.0 * reg.l / (h * h)
}

/// Largest step for which one elliptic Euler step with `f = 0` obeys the
/// maximum principle: `(h⁴/2)^{1/3}`.
pub fn max_principle_dt(h: f64) -> f64 {
    (h.powi(4) / 2.0).cbrt()
}

fn layout(g: &Grid1D) -> Layout {
    Layout { nx: g.nx, ny: 1, pad_x: 1, pad_y: 0, h: g.h, x0: g.x0, y0: 0.0 }
}

/// `F^h[u]` at every point not on a Dirichlet layer.
pub fn apply_scheme_1d(u: &GridFn1, config: &Scheme1DConfig, bc: &BoundaryCondition) -> Result<GridFn1> {
    let g = *u.grid();
    let lay = layout(&g);
    let mut ext = crate::grid::Extended::new();
    ext.fill(u.values(), g.nx, 1, 1, 0)?;
    let mut r = vec![0.0; g.nx];
    let h = g.h;
    crate::time_integration::residual_sweep(&lay, bc, &ext, None, &|p: &Probe, _: &mut Vec<f64>| config.eval(p, h), &mut r)
        .ok_or(Error::NonFinite { index: 0 })?;
    GridFn1::from_values(g, r)
}

/// One Euler step `u + dt (F^h[u] - f)`; layer points are kept.
pub fn euler_step_1d(
    u: &GridFn1,
    f: Option<&GridFn1>,
    config: &Scheme1DConfig,
    bc: &BoundaryCondition,
    dt: f64,
) -> Result<GridFn1> {
    let fu = apply_scheme_1d(u, config, bc)?;
    let w = bc.layer_width();
    let n = u.grid().nx;
    let values = (0..n)
        .map(|i| {
            let v = u.at(i);
            if w > 0 && (i < w || i + w >= n) {
                v
            } else {
                v + dt * (fu.at(i) - f.map_or(0.0, |f| f.at(i)))
            }
        })
        .collect();
    GridFn1::from_values(*u.grid(), values)
}

/// Runs `u ← u + dt (F^h[u] - f)` under `stop`, capturing snapshots at the
/// last step not exceeding each requested time.
pub fn euler_solve_1d(
    u0: &GridFn1,
    f: Option<&GridFn1>,
    config: &Scheme1DConfig,
    bc: &BoundaryCondition,
    stop: StopRule,
    snapshot_times: &[f64],
) -> Result<(GridFn1, Vec<Snapshot<GridFn1>>, SolveReport)> {
    let g = *u0.grid();
    if let Some(f) = f {
        if f.grid() != &g {
            return Err(Error::DomainMismatch);
        }
    }
    let dt = config.resolve_dt(g.h)?;
    let h = g.h;
    let cfg = *config;
    let out = run(
        &layout(&g),
        u0.values().to_vec(),
        f.map(|f| f.values()),
        bc,
        move |p: &Probe, _: &mut Vec<f64>| cfg.eval(p, h),
        dt,
        stop,
        snapshot_times,
    )?;
    let wrap = |v: Vec<f64>| GridFn1::from_values(g, v).expect("driver keeps fields finite");
    let snaps = out
        .snapshots
        .into_iter()
        .map(|s| Snapshot { requested: s.requested, t: s.t, iteration: s.iteration, field: wrap(s.field) })
        .collect();
    Ok((wrap(out.u), snaps, out.report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Extended, GridFn};

    fn probe_of(xs: &[f64], h: f64) -> Extended {
        let g = Grid1D::new(xs.len(), h, 0.0).unwrap();
        Extended::of_1d(&GridFn::from_values(g, xs.to_vec()).unwrap(), 1).unwrap()
    }

    #[test]
    fn standard_is_exact_on_quadratics() {
        let g = Grid1D::new(21, 0.1, 0.0).unwrap();
        let e = Extended::of_1d(&GridFn::sample(g, |x, _| x * x), 1).unwrap();
        assert!((f1d_standard(&e.probe(10, 0), 0.1) - 2.0).abs() < 1e-12);
        let c = probe_of(&[2.0; 5], 0.1);
        assert_eq!(f1d_standard(&c.probe(2, 0), 0.1), 0.0);
    }

    #[test]
    fn standard_on_sine() {
        let h = 1.0 / 256.0;
        let g = Grid1D::new(257, h, 0.0).unwrap();
        let e = Extended::of_1d(&GridFn::sample(g, |x, _| (2.0 * std::f64::consts::PI * x).sin()), 1).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = affine_a(tau * s, -tau * tau * s);
        assert!((f1d_standard(&e.probe(32, 0), h) - want).abs() < 1e-3);
    }

    #[test]
    fn elliptic_hand_values() {
        // u = x² at x = 0 with h = 0.5: -D⁺ = D⁻ = -0.5, u_xx = 2
        // |u_x|⁺ = 0, -|u_x|⁻ = -0.5: F = (0.25 * 2)^{1/3}
        let e = probe_of(&[0.25, 0.0, 0.25], 0.5);
        let v = f1d_elliptic(&e.probe(1, 0), 0.5);
        assert!((v - 0.5f64.cbrt()).abs() < 1e-15);
        assert!((v - 0.7937).abs() < 1e-4);

        // u = x² at x = 1 with h = 0.1: D⁻ = 1.9, -D⁺ = -2.1
        // |u_x|⁺ = 1.9, -|u_x|⁻ = -2.1; convex so the A⁻ branch is active
        let e = probe_of(&[0.81, 1.0, 1.21], 0.1);
        let p = e.probe(1, 0);
        assert!((abs_plus(&p, Axis::X, 0.1) - 1.9).abs() < 1e-12);
        assert!((abs_minus(&p, Axis::X, 0.1) + 2.1).abs() < 1e-12);
        let v = f1d_elliptic(&p, 0.1);
        assert!((v - (2.1f64 * 2.1 * 2.0).cbrt()).abs() < 1e-12);
        assert!((v - 2.0661).abs() < 1e-4);

        let unit = RegularizationParams::new(1.0, 1.0).unwrap();
        // max(-(8.82)^{1/3}, -2.1, -2) = -2
        assert!((f1d_elliptic_regularized(&p, 0.1, &unit) - 2.0).abs() < 1e-12);

        let lin = probe_of(&[0.0, 0.3, 0.6], 0.1);
        assert_eq!(f1d_elliptic(&lin.probe(1, 0), 0.1), 0.0);
        assert_eq!(f1d_elliptic_regularized(&lin.probe(1, 0), 0.1, &unit), 0.0);
    }

    #[test]
    fn large_caps_reproduce_elliptic() {
        let huge = RegularizationParams::new(1e6, 1e6).unwrap();
        let g = Grid1D::spanning(-1.0, 1.0, 41).unwrap();
        let e = Extended::of_1d(&GridFn::sample(g, |x, _| (3.0 * x).sin() + 0.5 * x * x), 1).unwrap();
        for i in 0..41 {
            let p = e.probe(i, 0);
            assert!((f1d_elliptic(&p, g.h) - f1d_elliptic_regularized(&p, g.h, &huge)).abs() < 1e-12);
        }
    }

    #[test]
    fn lipschitz_constant() {
        let unit = RegularizationParams::new(1.0, 1.0).unwrap();
        assert_eq!(lipschitz_constant_1d(1.0, &unit), 3.0);
        let reg = RegularizationParams::model_1d(0.5).unwrap();
        let c = lipschitz_constant_1d(0.5, &reg);
        assert!((c - 22.678578898107716).abs() < 1e-9, "{c}");
    }

    #[test]
    fn dt_policies() {
        let cfg = Scheme1DConfig::defaults(Scheme1D::Elliptic, 0.1).unwrap();
        assert!((cfg.resolve_dt(0.1).unwrap() - 0.005).abs() < 1e-18);
        let mp = Scheme1DConfig { dt_policy: Dt1DPolicy::max_principle(), ..cfg };
        assert!((mp.resolve_dt(0.1).unwrap() - max_principle_dt(0.1)).abs() < 1e-18);
        assert!("scaling:4".parse::<Dt1DPolicy>().unwrap() == Dt1DPolicy::Scaling { denom: 4.0 });
        let bad = Scheme1DConfig { dt_policy: Dt1DPolicy::Fixed(-1.0), ..cfg };
        assert!(bad.resolve_dt(0.1).is_err());
    }
}
