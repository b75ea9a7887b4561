//! Finite-difference building blocks evaluated on a [`Probe`].
//!
//! The one-sided quantities are written in elliptic form: each is a
//! nondecreasing function of the differences `u(x) - u(neighbour)`.

use crate::grid::Probe;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    #[inline(always)]
    fn step(self) -> (isize, isize) {
        match self {
            Axis::X => (1, 0),
            Axis::Y => (0, 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Upwind {
    /// `D^- u = (u(x) - u(x - h)) / h`
    Backward,
    /// `-D^+ u = (u(x) - u(x + h)) / h`
    NegForward,
}

#[inline(always)]
pub fn d_centered(p: &Probe, axis: Axis, h: f64) -> f64 {
    let (a, b) = axis.step();
    (p.at(a, b) - p.at(-a, -b)) / (2.0 * h)
}

#[inline(always)]
pub fn d_centered_x(p: &Probe, h: f64) -> f64 {
    d_centered(p, Axis::X, h)
}

#[inline(always)]
pub fn d_centered_y(p: &Probe, h: f64) -> f64 {
    d_centered(p, Axis::Y, h)
}

#[inline(always)]
pub fn d2(p: &Probe, axis: Axis, h: f64) -> f64 {
    let (a, b) = axis.step();
    ((p.at(a, b) + p.at(-a, -b)) - 2.0 * p.center()) / (h * h)
}

#[inline(always)]
pub fn d2_xx(p: &Probe, h: f64) -> f64 {
    d2(p, Axis::X, h)
}

#[inline(always)]
pub fn d2_yy(p: &Probe, h: f64) -> f64 {
    d2(p, Axis::Y, h)
}

#[inline(always)]
pub fn d2_xy(p: &Probe, h: f64) -> f64 {
    ((p.at(1, 1) + p.at(-1, -1)) - (p.at(1, -1) + p.at(-1, 1))) / (4.0 * h * h)
}

#[inline(always)]
pub fn d_upwind(p: &Probe, axis: Axis, dir: Upwind, h: f64) -> f64 {
    let (a, b) = axis.step();
    match dir {
        Upwind::Backward => (p.center() - p.at(-a, -b)) / h,
        Upwind::NegForward => (p.center() - p.at(a, b)) / h,
    }
}

/// `|u_x^h|^+ = max{-D^+ u, D^- u, 0}`, nonnegative.
#[inline(always)]
pub fn abs_plus(p: &Probe, axis: Axis, h: f64) -> f64 {
    let back = d_upwind(p, axis, Upwind::Backward, h);
    let fwd = d_upwind(p, axis, Upwind::NegForward, h);
    back.max(fwd).max(0.0)
}

/// `-|u_x^h|^- = min{-D^+ u, D^- u, 0}`, nonpositive.
#[inline(always)]
pub fn abs_minus(p: &Probe, axis: Axis, h: f64) -> f64 {
    let back = d_upwind(p, axis, Upwind::Backward, h);
    let fwd = d_upwind(p, axis, Upwind::NegForward, h);
    back.min(fwd).min(0.0)
}

/// `|grad u^h|^+ = N(|u_x^h|^+, |u_y^h|^+)`.
#[inline(always)]
pub fn grad_norm_plus(p: &Probe, h: f64) -> f64 {
    let a = abs_plus(p, Axis::X, h);
    let b = abs_plus(p, Axis::Y, h);
    (a * a + b * b).sqrt()
}

/// `-|grad u^h|^- = -N(-|u_x^h|^-, -|u_y^h|^-)`, nonpositive.
#[inline(always)]
pub fn grad_norm_minus(p: &Probe, h: f64) -> f64 {
    let a = abs_minus(p, Axis::X, h);
    let b = abs_minus(p, Axis::Y, h);
    -(a * a + b * b).sqrt()
}
