//! Wide stencils and the median approximation of `Δ₁u = |∇u| k[u]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Probe;

/// Directions sampled around a grid point at radius `n_theta` cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StencilSet {
    n_theta: usize,
    n_s: usize,
    offsets: Vec<(i32, i32)>,
}

impl StencilSet {
    /// Quadrant one uses the nearest lattice point to
    /// `n_theta (cos(i dθ), sin(i dθ))`, `i = 0..n_s/4`; the other three
    /// quadrants are exact quarter-turn rotations. Each direction keeps its
    /// own entry even when two directions round to the same lattice point.
    pub fn build(n_theta: usize, n_s: usize) -> Result<Self> {
        if n_theta == 0 {
            return Err(Error::InvalidStencil("n_theta must be >= 1".into()));
        }
        if n_s == 0 || n_s % 4 != 0 {
            return Err(Error::InvalidStencil(format!("n_S = {n_s} is not a positive multiple of 4")));
        }
        let dtheta = 2.0 * PI / n_s as f64;
        let r = n_theta as f64;
        let quadrant: Vec<(i32, i32)> = (0..n_s / 4)
            .map(|i| {
                let a = i as f64 * dtheta;
                (round_half_away(r * a.cos()) as i32, round_half_away(r * a.sin()) as i32)
            })
            .collect();
        let mut offsets = Vec::with_capacity(n_s);
        let mut turn = quadrant.clone();
        for _ in 0..4 {
            offsets.extend_from_slice(&turn);
            turn = turn.iter().map(|&(x, y)| (-y, x)).collect();
        }
        let set = Self { n_theta, n_s, offsets };
        set.validate()?;
        Ok(set)
    }

    /// `n_S = 8 n_θ`.
    pub fn with_default_directions(n_theta: usize) -> Result<Self> {
        Self::build(n_theta, 8 * n_theta)
    }

    pub fn narrow() -> Self {
        Self::with_default_directions(3).expect("narrow preset is valid")
    }

    pub fn wide() -> Self {
        Self::with_default_directions(7).expect("wide preset is valid")
    }

    fn validate(&self) -> Result<()> {
        let dtheta = self.dtheta();
        let r = self.n_theta as f64;
        for (i, &(x, y)) in self.offsets.iter().enumerate() {
            if x == 0 && y == 0 {
                return Err(Error::InvalidStencil(format!("direction {i} rounds to the centre point")));
            }
            let a = i as f64 * dtheta;
            let (ex, ey) = (x as f64 - r * a.cos(), y as f64 - r * a.sin());
            if ex.abs() > 1.0 + 1e-9 || ey.abs() > 1.0 + 1e-9 {
                return Err(Error::InvalidStencil(format!(
                    "direction {i}: offset ({x}, {y}) is more than one cell from the circle"
                )));
            }
        }
        Ok(())
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_directions(&self) -> usize {
        self.n_s
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.n_s as f64
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    /// Largest coordinate magnitude over all offsets, in cells.
    pub fn reach(&self) -> usize {
        self.offsets.iter().map(|&(x, y)| x.unsigned_abs().max(y.unsigned_abs()) as usize).max().unwrap_or(0)
    }

    /// `direction,dx,dy` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# n_theta={},n_s={}\ndirection,dx,dy\n", self.n_theta, self.n_s);
        for (i, (x, y)) in self.offsets.iter().enumerate() {
            s.push_str(&format!("{i},{x},{y}\n"));
        }
        s
    }
}

/// Nearest integer, ties away from zero. Values within 1e-9 of a tie are
/// treated as ties so that e.g. `3 sin(π/6)` rounds to 2.
pub fn round_half_away(x: f64) -> f64 {
    let a = x.abs();
    let frac = a - a.floor();
    let r = if (frac - 0.5).abs() < 1e-9 { a.floor() + 1.0 } else { a.round() };
    r.copysign(x)
}

/// Middle order statistic; mean of the two central ones for even length.
/// Reorders `values`.
pub fn median_in_place(values: &mut [f64]) -> Result<f64> {
    let n = values.len();
    if n == 0 {
        return Err(Error::EmptyMedian);
    }
    let mid = n / 2;
    let (lower, m, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *m;
    if n % 2 == 1 {
        Ok(upper)
    } else {
        let below = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(0.5 * (below + upper))
    }
}

pub fn median(values: &[f64]) -> Result<f64> {
    median_in_place(&mut values.to_vec())
}

/// Median scheme for `Δ₁u`: `2 (median_i u_i - u) / (h n_θ)²`.
///
/// `scratch` is reused between calls to avoid allocation.
#[inline]
pub fn delta1_median(p: &Probe, stencil: &StencilSet, h: f64, scratch: &mut Vec<f64>) -> f64 {
    gather(p, stencil, scratch);
    delta1_from_samples(p.center(), scratch, stencil, h)
}

/// Loads the stencil values around `p` into `out`.
#[inline]
pub fn gather(p: &Probe, stencil: &StencilSet, out: &mut Vec<f64>) {
    out.clear();
    out.extend(stencil.offsets.iter().map(|&(x, y)| p.at(x as isize, y as isize)));
}

/// Median of `values` bracketed by the samples at `guesses`.
///
/// Only values between the smallest and largest guessed sample are ordered;
/// when that band misses the middle order statistics, or is large, this
/// falls back to [`median_in_place`]. The result is identical to it either
/// way. May reorder `values`.
pub fn median_bracketed(values: &mut [f64], guesses: &[usize]) -> Result<f64> {
    const BAND: usize = 16;
    let n = values.len();
    if n == 0 {
        return Err(Error::EmptyMedian);
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &g in guesses {
        let v = values[g % n];
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let mut band = [0.0f64; BAND + 1];
    let mut below = 0;
    let mut len = 0;
    for &v in values.iter() {
        below += (v < lo) as usize;
        band[len.min(BAND)] = v;
        len += (v >= lo && v <= hi) as usize;
    }
    let mid = n / 2;
    let first = if n % 2 == 0 { mid - 1 } else { mid };
    if len > BAND || below > first || below + len <= mid {
        return median_in_place(values);
    }
    let band = &mut band[..len];
    for k in 1..len {
        let v = band[k];
        let mut m = k;
        while m > 0 && band[m - 1].total_cmp(&v).is_gt() {
            band[m] = band[m - 1];
            m -= 1;
        }
        band[m] = v;
    }
    let upper = band[mid - below];
    if n % 2 == 1 {
        Ok(upper)
    } else {
        Ok(0.5 * (band[first - below] + upper))
    }
}

/// [`delta1_median`] from samples already gathered; reorders them.
#[inline]
pub fn delta1_from_samples(center: f64, samples: &mut [f64], stencil: &StencilSet, h: f64) -> f64 {
    let n = samples.len();
    // the middle order statistics sit near the two tangent directions
    let gx = samples[0] - samples[n / 2];
    let gy = samples[n / 4] - samples[3 * n / 4];
    let m = if gx == 0.0 && gy == 0.0 {
        median_in_place(samples)
    } else {
        let phi = gy.atan2(gx) + 0.5 * PI;
        let k = (phi / stencil.dtheta()).round().rem_euclid(n as f64) as usize;
        let (a, b) = (k + n, k + n / 2 + n);
        median_bracketed(samples, &[a - 1, a, a + 1, b - 1, b, b + 1])
    }
    .expect("stencil is nonempty");
    let r = h * stencil.n_theta as f64;
    2.0 * (m - center) / (r * r)
}
