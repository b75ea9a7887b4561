//! Discretizations of the affine curvature operator
//! `F[u] = |∇u| k[u]^{1/3} = (u_xx u_y² - 2 u_x u_y u_xy + u_yy u_x²)^{1/3}`.
//!
//! * `Standard`: centered differences inside the cube root. Accurate where
//!   the solution is smooth, but neither elliptic nor stable in general.
//! * `Elliptic`: `A` split into nondecreasing parts, fed with the one-sided
//!   gradient norms and the median approximation of `Δ₁u`.
//! * `EllipticRegularized`: the same with the Lipschitz `A^δ`, which admits
//!   the explicit step `dt = 1 / C^h`.
//! * `Filtered` / `FilteredRegularized`: the standard scheme where it agrees
//!   with the elliptic one to within `ε`, the elliptic one where they differ
//!   by more than `ε + ρ√2`, and a linear blend between.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diff::{d2_xx, d2_xy, d2_yy, d_centered_x, d_centered_y, grad_norm_minus, grad_norm_plus};
use crate::error::{Error, Result};
use crate::grid::Probe;
use crate::nonlinearity::{elliptic_a, RegularizationParams};
use crate::stencil::{delta1_median, StencilSet};

/// Width of the blending zone of the filter, in units of `ε`.
pub const FILTER_RHO_FACTOR: f64 = 10.0;

/// Default steady-state residual threshold.
pub const DEFAULT_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeVariant {
    Standard,
    Elliptic,
    EllipticRegularized,
    Filtered,
    FilteredRegularized,
}

impl SchemeVariant {
    pub const ALL: [SchemeVariant; 5] = [
        SchemeVariant::Standard,
        SchemeVariant::Elliptic,
        SchemeVariant::EllipticRegularized,
        SchemeVariant::Filtered,
        SchemeVariant::FilteredRegularized,
    ];

    pub fn is_regularized(self) -> bool {
        matches!(self, Self::EllipticRegularized | Self::FilteredRegularized)
    }

    pub fn is_filtered(self) -> bool {
        matches!(self, Self::Filtered | Self::FilteredRegularized)
    }

    pub fn uses_stencil(self) -> bool {
        self != Self::Standard
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::Elliptic => "elliptic",
            Self::EllipticRegularized => "elliptic-regularized",
            Self::Filtered => "filtered",
            Self::FilteredRegularized => "filtered-regularized",
        }
    }
}

impl fmt::Display for SchemeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown scheme variant `{s}`")))
    }
}

/// Everything a spatial discretization needs besides the field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub variant: SchemeVariant,
    pub stencil: StencilSet,
    pub reg: RegularizationParams,
    /// Filter width; only read by the filtered variants.
    pub epsilon: f64,
    pub tol: f64,
}

impl SchemeConfig {
    /// Defaults on a grid of spacing `h`: narrow stencil for the elliptic
    /// variants, wide stencil for the filtered ones (and for `Standard`,
    /// whose time step is borrowed from the filtered scheme),
    /// `K = 20 h^{-1/9}`, `L = 20 h^{-4/9}`, `ε = √h + dθ/10`.
    pub fn defaults(variant: SchemeVariant, h: f64) -> Result<Self> {
        let stencil = match variant {
            SchemeVariant::Elliptic | SchemeVariant::EllipticRegularized => StencilSet::narrow(),
            _ => StencilSet::wide(),
        };
        Self::with_stencil(variant, h, stencil)
    }

    pub fn with_stencil(variant: SchemeVariant, h: f64, stencil: StencilSet) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("h = {h}")));
        }
        let epsilon = default_epsilon(h, stencil.dtheta());
        Ok(Self { variant, reg: RegularizationParams::plane(h)?, epsilon, stencil, tol: DEFAULT_TOL })
    }

    pub fn validate(&self) -> Result<()> {
        RegularizationParams::new(self.reg.k, self.reg.l)?;
        if self.variant.is_filtered() && !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("filter width ε = {} must be positive", self.epsilon)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol = {}", self.tol)));
        }
        Ok(())
    }

    /// Number of ghost cells the scheme reads beyond a point.
    pub fn reach(&self) -> usize {
        if self.variant.uses_stencil() {
            self.stencil.reach().max(1)
        } else {
            1
        }
    }

    /// Binds the configuration to a grid spacing for evaluation.
    pub fn bind(&self, h: f64) -> Result<Scheme<'_>> {
        self.validate()?;
        Ok(Scheme { config: self, h })
    }
}

/// `ε(h, dθ) = √h + dθ / 10`.
pub fn default_epsilon(h: f64, dtheta: f64) -> f64 {
    h.sqrt() + dtheta / 10.0
}

/// A configuration bound to a spacing; evaluates `F^h[u]` at a point.
#[derive(Clone, Copy, Debug)]
pub struct Scheme<'a> {
    config: &'a SchemeConfig,
    h: f64,
}

impl<'a> Scheme<'a> {
    pub fn config(&self) -> &SchemeConfig {
        self.config
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn eval(&self, p: &Probe, scratch: &mut Vec<f64>) -> f64 {
        let c = self.config;
        match c.variant {
            SchemeVariant::Standard => f2d_standard(p, self.h),
            SchemeVariant::Elliptic => f2d_elliptic(p, self.h, &c.stencil, scratch),
            SchemeVariant::EllipticRegularized => {
                f2d_elliptic_regularized(p, self.h, &c.stencil, &c.reg, scratch)
            }
            SchemeVariant::Filtered => f2d_filtered(p, self.h, &c.stencil, None, c.epsilon, scratch),
            SchemeVariant::FilteredRegularized => {
                f2d_filtered(p, self.h, &c.stencil, Some(&c.reg), c.epsilon, scratch)
            }
        }
    }
}

/// `(u_xx u_y² - 2 u_x u_y u_xy + u_yy u_x²)^{1/3}` with centered differences.
#[inline]
pub fn f2d_standard(p: &Probe, h: f64) -> f64 {
    let ux = d_centered_x(p, h);
    let uy = d_centered_y(p, h);
    let uxx = d2_xx(p, h);
    let uyy = d2_yy(p, h);
    let uxy = d2_xy(p, h);
    ((uxx * (uy * uy) + uyy * (ux * ux)) - 2.0 * (ux * uy) * uxy).cbrt()
}

/// `-F^e = A⁺(|∇u^h|⁺, -Δ₁^e u) + A⁻(-|∇u^h|⁻, -Δ₁^e u)`; returns `F^e`.
#[inline]
pub fn f2d_elliptic(p: &Probe, h: f64, stencil: &StencilSet, scratch: &mut Vec<f64>) -> f64 {
    let q = delta1_median(p, stencil, h, scratch);
    elliptic_a(grad_norm_plus(p, h), grad_norm_minus(p, h), q)
}

/// Regularized elliptic scheme `F^{e,δ}`.
#[inline]
pub fn f2d_elliptic_regularized(
    p: &Probe,
    h: f64,
    stencil: &StencilSet,
    reg: &RegularizationParams,
    scratch: &mut Vec<f64>,
) -> f64 {
    let q = delta1_median(p, stencil, h, scratch);
    reg.elliptic(grad_norm_plus(p, h), grad_norm_minus(p, h), q)
}

/// `S^ε(F^a, F^e)`, or `S^ε(F^a, F^{e,δ})` when `reg` is given.
#[inline]
pub fn f2d_filtered(
    p: &Probe,
    h: f64,
    stencil: &StencilSet,
    reg: Option<&RegularizationParams>,
    epsilon: f64,
    scratch: &mut Vec<f64>,
) -> f64 {
    let a = f2d_standard(p, h);
    let b = match reg {
        Some(reg) => f2d_elliptic_regularized(p, h, stencil, reg, scratch),
        None => f2d_elliptic(p, h, stencil, scratch),
    };
    filter_blend(a, b, epsilon)
}

/// `S^ε(a, b)`: `a` on the strip `|a - b| < ε`, `b` beyond distance
/// `ρ = 10ε` from it, linear in the distance in between. The distance is
/// Euclidean in the `(a, b)` plane: `d = (|a - b| - ε) / √2`.
#[inline]
pub fn filter_blend(a: f64, b: f64, epsilon: f64) -> f64 {
    let gap = (a - b).abs();
    if gap < epsilon {
        return a;
    }
    let rho = FILTER_RHO_FACTOR * epsilon;
    let d = (gap - epsilon) * std::f64::consts::FRAC_1_SQRT_2;
    if d <= rho {
        ((rho - d) * a + d * b) / rho
    } else {
        b
    }
}

/// Guaranteed bound on `|S^ε(a, b) - b|`.
pub fn filter_deviation_bound(epsilon: f64) -> f64 {
    epsilon * (1.0 + FILTER_RHO_FACTOR * std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Extended, Grid2D, GridFn};

    fn probe_field(h: f64, n: usize, x0: f64, y0: f64, f: impl Fn(f64, f64) -> f64, pad: usize) -> (Grid2D, Extended) {
        let g = Grid2D::new(n, n, h, x0, y0).unwrap();
        let e = Extended::of_2d(&GridFn::sample(g, f), pad).unwrap();
        (g, e)
    }

    #[test]
    fn standard_on_quadratics() {
        let (g, e) = probe_field(0.25, 9, 0.0, 0.0, |x, y| x * x + y * y, 1);
        assert_eq!((g.x(4), g.y(4)), (1.0, 1.0));
        let v = f2d_standard(&e.probe(4, 4), 0.25);
        assert!((v - 16f64.cbrt()).abs() < 1e-12);
        assert!((v - 2.0 * 2f64.cbrt()).abs() < 1e-12);

        let (g, e) = probe_field(0.25, 9, 0.0, -1.0, |x, y| x * x - y * y, 1);
        assert_eq!((g.x(4), g.y(4)), (1.0, 0.0));
        assert!((f2d_standard(&e.probe(4, 4), 0.25) + 2.0).abs() < 1e-12);

        let (_, e) = probe_field(0.125, 5, 0.0, 0.0, |x, y| 2.0 * x - y + 1.0, 1);
        assert_eq!(f2d_standard(&e.probe(2, 2), 0.125), 0.0);
    }

    #[test]
    fn elliptic_on_paraboloid() {
        let mut scratch = Vec::new();
        let h = 0.005;
        let n = 41;
        let (g, e) = probe_field(h, n, 1.0 - 20.0 * h, -20.0 * h, |x, y| x * x + y * y, 3);
        assert!((g.x(20) - 1.0).abs() < 1e-12 && g.y(20).abs() < 1e-12);
        let p = e.probe(20, 20);
        let s = StencilSet::narrow();
        let v = f2d_elliptic(&p, h, &s, &mut scratch);
        // F = 2 (x² + y²)^{1/3} = 2; one-sided gradients are O(h) off
        assert!((v - 2.0).abs() < 0.02, "F^e = {v}");

        let c = Extended::of_2d(&GridFn::sample(g, |_, _| 3.0), 3).unwrap();
        assert_eq!(f2d_elliptic(&c.probe(20, 20), h, &s, &mut scratch), 0.0);

        // negating the field negates the scheme
        let neg = Extended::of_2d(&GridFn::sample(g, |x, y| -(x * x + y * y)), 3).unwrap();
        let w = f2d_elliptic(&neg.probe(20, 20), h, &s, &mut scratch);
        assert!((v + w).abs() < 1e-12);
    }

    #[test]
    fn regularized_cap() {
        let mut scratch = Vec::new();
        let h = 0.005;
        let (_, e) = probe_field(h, 41, 1.0 - 20.0 * h, -20.0 * h, |x, y| x * x + y * y, 3);
        let p = e.probe(20, 20);
        let s = StencilSet::narrow();
        let huge = RegularizationParams::new(1e6, 1e6).unwrap();
        let a = f2d_elliptic(&p, h, &s, &mut scratch);
        let b = f2d_elliptic_regularized(&p, h, &s, &huge, &mut scratch);
        assert!((a - b).abs() < 1e-12);

        // K = 0.5 caps the value at K |∇u^h|⁻ (the convex branch) ≈ 1
        let capped = RegularizationParams::new(0.5, 1e6).unwrap();
        let v = f2d_elliptic_regularized(&p, h, &s, &capped, &mut scratch);
        let gm = -grad_norm_minus(&p, h);
        assert!((v - 0.5 * gm).abs() < 1e-12);
        assert!((v - 1.0).abs() < 0.01);
    }

    #[test]
    fn blend_branches() {
        assert_eq!(filter_blend(1.0, 1.05, 0.1), 1.0);
        assert_eq!(filter_blend(1.0, 0.0, 0.01), 0.0);
        // d = 0.9 / √2, ρ = 1
        let d = 0.9 / 2f64.sqrt();
        let want = (1.0 - d) * 1.0 + d * 0.0;
        assert!((filter_blend(1.0, 0.0, 0.1) - want).abs() < 1e-15);
        assert!((filter_blend(1.0, 0.0, 0.1) - 0.3636).abs() < 1e-4);
    }

    #[test]
    fn blend_is_continuous_at_zone_edges() {
        let eps = 0.1;
        let rho = FILTER_RHO_FACTOR * eps;
        let a = 0.3;
        for gap in [eps, eps + rho * 2f64.sqrt()] {
            let lo = filter_blend(a, a + gap - 1e-12, eps);
            let hi = filter_blend(a, a + gap + 1e-12, eps);
            assert!((lo - hi).abs() < 1e-9, "jump at gap {gap}: {lo} vs {hi}");
        }
    }

    #[test]
    fn variant_names_round_trip() {
        for v in SchemeVariant::ALL {
            assert_eq!(v.name().parse::<SchemeVariant>().unwrap(), v);
        }
        assert!("median".parse::<SchemeVariant>().is_err());
    }

    #[test]
    fn default_config() {
        let h = 2.0 / 31.0;
        let c = SchemeConfig::defaults(SchemeVariant::FilteredRegularized, h).unwrap();
        assert_eq!(c.stencil.n_theta(), 7);
        let want = h.sqrt() + 2.0 * std::f64::consts::PI / 56.0 / 10.0;
        assert!((c.epsilon - want).abs() < 1e-15);
        assert_eq!(c.tol, 1e-5);
        assert_eq!(SchemeConfig::defaults(SchemeVariant::Elliptic, h).unwrap().stencil.n_theta(), 3);
        let mut bad = c.clone();
        bad.epsilon = 0.0;
        assert!(bad.validate().is_err());
    }
}
