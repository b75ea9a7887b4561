//! The cube-root nonlinearity `A(p, q) = (p^2 q)^{1/3}`, its splitting into
//! nondecreasing parts, and the Lipschitz regularization `A^δ`.
//!
//! The affine curvature operator is `F[u] = A(|∇u|, Δ₁u)` and its 1D model
//! is `A(u_x, u_xx)`. `A` is neither monotone nor Lipschitz, so the schemes
//! use the identity
//!
//! ```text
//! -A(p, q) = A⁺(|p|, -q) + A⁻(-|p|, -q)
//! ```
//!
//! with `A⁺(p, q) = A(p⁺, q⁺)` and `A⁻(p, q) = A(p⁻, q⁻)` both nondecreasing,
//! substituting elliptic discretizations for `±|p|` and `-q`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `sgn` with `sgn(0) = 0`.
#[inline(always)]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Real cube root of `p² q`; even in `p`, odd in `q`.
#[inline(always)]
pub fn affine_a(p: f64, q: f64) -> f64 {
    (p * p * q).cbrt()
}

#[inline(always)]
pub fn a_plus(p: f64, q: f64) -> f64 {
    affine_a(p.max(0.0), q.max(0.0))
}

#[inline(always)]
pub fn a_minus(p: f64, q: f64) -> f64 {
    affine_a(p.min(0.0), q.min(0.0))
}

/// Elliptic evaluation of `A` from one-sided data.
///
/// `p_plus >= 0` and `p_minus <= 0` are the elliptic approximations of
/// `|p|` and `-|p|`; `q` approximates the second-order argument. Returns
/// `F` where `-F = A⁺(p_plus, -q) + A⁻(p_minus, -q)`.
#[inline(always)]
pub fn elliptic_a(p_plus: f64, p_minus: f64, q: f64) -> f64 {
    -(a_plus(p_plus, -q) + a_minus(p_minus, -q))
}

/// Slope caps of the regularized nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizationParams {
    /// Cap on the slope in the gradient argument.
    pub k: f64,
    /// Cap on the slope in the curvature argument.
    pub l: f64,
}

impl RegularizationParams {
    /// Validates `K, L > 0` and `K √L >= 1`.
    pub fn new(k: f64, l: f64) -> Result<Self> {
        if !(k > 0.0 && l > 0.0 && k.is_finite() && l.is_finite()) {
            return Err(Error::InvalidParameter(format!("K = {k}, L = {l} must be positive")));
        }
        if k * l.sqrt() < 1.0 {
            return Err(Error::InvalidParameter(format!("K sqrt(L) = {} < 1", k * l.sqrt())));
        }
        Ok(Self { k, l })
    }

    /// `K = h^{-1/3}`, `L = h^{-4/3}`: the 1D choice balancing the
    /// regularization and truncation errors at `O(h^{2/3})`.
    pub fn model_1d(h: f64) -> Result<Self> {
        Self::new(h.powf(-1.0 / 3.0), h.powf(-4.0 / 3.0))
    }

    /// `K = 20 h^{-1/9}`, `L = 20 h^{-4/9}` used for every 2D computation.
    pub fn plane(h: f64) -> Result<Self> {
        Self::new(20.0 * h.powf(-1.0 / 9.0), 20.0 * h.powf(-4.0 / 9.0))
    }

    /// `A^δ(p, q) = sgn(q) min(|A(p, q)|, K|p|, L|q|)`.
    #[inline(always)]
    pub fn apply(&self, p: f64, q: f64) -> f64 {
        let a = affine_a(p, q).abs();
        sgn(q) * a.min(self.k * p.abs()).min(self.l * q.abs())
    }

    #[inline(always)]
    pub fn plus(&self, p: f64, q: f64) -> f64 {
        self.apply(p.max(0.0), q.max(0.0))
    }

    #[inline(always)]
    pub fn minus(&self, p: f64, q: f64) -> f64 {
        self.apply(p.min(0.0), q.min(0.0))
    }

    /// Regularized counterpart of [`elliptic_a`].
    #[inline(always)]
    pub fn elliptic(&self, p_plus: f64, p_minus: f64, q: f64) -> f64 {
        -(self.plus(p_plus, -q) + self.minus(p_minus, -q))
    }

    /// Upper bound on `|A^δ(p, q) - A(p, q)|`.
    pub fn error_bound(&self, p: f64, q: f64) -> f64 {
        let a = 4.0 * q.abs() / (27.0 * self.k * self.k);
        let b = 2.0 * p.abs() / (3.0 * (3.0 * self.l).sqrt());
        a.max(b)
    }
}
