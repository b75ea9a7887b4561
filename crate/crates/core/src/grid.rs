//! Uniform grids, grid functions and boundary extension.
//!
//! Values are stored row-major: point `(i, j)` lives at `j * nx + i`, with
//! `i` running along x.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest number of points per axis accepted by the grid constructors.
pub const MIN_POINTS: usize = 3;

/// Common behaviour of 1D and 2D grids.
pub trait Grid: Copy + fmt::Debug + PartialEq {
    fn len(&self) -> usize;
    fn spacing(&self) -> f64;
    /// Physical coordinates of a flat index; `y` is zero in 1D.
    fn point(&self, k: usize) -> (f64, f64);
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub nx: usize,
    pub h: f64,
    pub x0: f64,
}

impl Grid1D {
    pub fn new(nx: usize, h: f64, x0: f64) -> Result<Self> {
        if nx < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("nx = {nx} < {MIN_POINTS}")));
        }
        if !(h > 0.0 && h.is_finite()) || !x0.is_finite() {
            return Err(Error::InvalidGrid(format!("h = {h}, x0 = {x0}")));
        }
        Ok(Self { nx, h, x0 })
    }

    /// `n` points spanning `[lo, hi]` including both ends.
    pub fn spanning(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < MIN_POINTS || hi <= lo {
            return Err(Error::InvalidGrid(format!("[{lo}, {hi}] with {n} points")));
        }
        Self::new(n, (hi - lo) / (n - 1) as f64, lo)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }
}

impl Grid for Grid1D {
    fn len(&self) -> usize {
        self.nx
    }
    fn spacing(&self) -> f64 {
        self.h
    }
    fn point(&self, k: usize) -> (f64, f64) {
        (self.x(k), 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub x0: f64,
    pub y0: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, h: f64, x0: f64, y0: f64) -> Result<Self> {
        if nx < MIN_POINTS || ny < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("{nx} x {ny} points")));
        }
        if !(h > 0.0 && h.is_finite()) || !x0.is_finite() || !y0.is_finite() {
            return Err(Error::InvalidGrid(format!("h = {h}, origin = ({x0}, {y0})")));
        }
        Ok(Self { nx, ny, h, x0, y0 })
    }

    /// `n x n` points covering the square `[lo, hi]^2`, corners included.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < MIN_POINTS || hi <= lo {
            return Err(Error::InvalidGrid(format!("[{lo}, {hi}]^2 with {n} points")));
        }
        Self::new(n, n, (hi - lo) / (n - 1) as f64, lo, lo)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.h
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.ny - 1)
    }

    /// True when `(x, y)` lies in the closed rectangle spanned by the grid.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let tol = 1e-12 * self.h;
        x >= self.x0 - tol && x <= self.x_max() + tol && y >= self.y0 - tol && y <= self.y_max() + tol
    }
}

impl Grid for Grid2D {
    fn len(&self) -> usize {
        self.nx * self.ny
    }
    fn spacing(&self) -> f64 {
        self.h
    }
    fn point(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.coords(k);
        (self.x(i), self.y(j))
    }
}

/// A scalar field sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFn<G> {
    grid: G,
    values: Vec<f64>,
}

pub type GridFn1 = GridFn<Grid1D>;
pub type GridFn2 = GridFn<Grid2D>;

impl<G: Grid> GridFn<G> {
    pub fn from_values(grid: G, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), found: values.len() });
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: G) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    /// Samples `f(x, y)` at every grid point (`y = 0` in 1D).
    pub fn sample(grid: G, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (x, y) = grid.point(k);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &G {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn check_finite(&self) -> Result<()> {
        check_finite(&self.values)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sup-norm distance to another field on the same grid.
    pub fn sup_dist(&self, other: &Self) -> f64 {
        sup_dist(&self.values, &other.values)
    }
}

impl GridFn1 {
    #[inline]
    pub fn at(&self, i: usize) -> f64 {
        self.values[i]
    }
}

impl GridFn2 {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

pub(crate) fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Time-dependent boundary data `g(x, y, t)`.
pub type BoundaryFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Where the values on a Dirichlet layer come from.
#[derive(Clone)]
pub enum LayerData {
    /// Whatever the initial field holds on the layer, frozen.
    Initial,
    /// Full-length array; only entries on the layer are read.
    Values(Vec<f64>),
    /// Re-evaluated at every time level.
    Exact(BoundaryFn),
}

impl fmt::Debug for LayerData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerData::Initial => f.write_str("Initial"),
            LayerData::Values(v) => write!(f, "Values(len {})", v.len()),
            LayerData::Exact(_) => f.write_str("Exact(<fn>)"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum BoundaryCondition {
    /// Points within `width` of the edge are prescribed and never evolved.
    DirichletLayer { width: usize, data: LayerData },
    /// Homogeneous Neumann through even reflection of indices.
    NeumannReflect,
}

/// Default Dirichlet layer width for 2D problems.
pub const DEFAULT_LAYER_WIDTH: usize = 7;

impl BoundaryCondition {
    pub fn dirichlet(width: usize, data: LayerData) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidParameter("Dirichlet layer width must be >= 1".into()));
        }
        if let LayerData::Values(v) = &data {
            check_finite(v)?;
        }
        Ok(Self::DirichletLayer { width, data })
    }

    pub fn layer_width(&self) -> usize {
        match self {
            Self::DirichletLayer { width, .. } => *width,
            Self::NeumannReflect => 0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::DirichletLayer { .. } => "dirichlet",
            Self::NeumannReflect => "neumann",
        }
    }

    /// Prescribed value at flat index `k` (a layer point) at time `t`.
    pub(crate) fn layer_value(&self, u: &[f64], k: usize, x: f64, y: f64, t: f64) -> f64 {
        match self {
            Self::DirichletLayer { data: LayerData::Values(v), .. } => v[k],
            Self::DirichletLayer { data: LayerData::Exact(g), .. } => g(x, y, t),
            _ => u[k],
        }
    }

    /// Value of `u` at a possibly out-of-grid index `(i, j)` at time `t`.
    ///
    /// Indices inside the grid on a Dirichlet layer return the prescribed
    /// value; indices outside the grid are mirrored back for both kinds.
    pub fn extend(&self, u: &GridFn2, i: isize, j: isize, t: f64) -> Result<f64> {
        let g = u.grid();
        let ri = reflect_index(i, g.nx).ok_or(Error::OutOfRange { i, j })?;
        let rj = reflect_index(j, g.ny).ok_or(Error::OutOfRange { i, j })?;
        let w = self.layer_width();
        let k = g.index(ri, rj);
        let on_layer = w > 0 && (ri < w || rj < w || ri + w >= g.nx || rj + w >= g.ny);
        if on_layer {
            Ok(self.layer_value(u.values(), k, g.x(ri), g.y(rj), t))
        } else {
            Ok(u.values()[k])
        }
    }

    /// 1D analogue of [`BoundaryCondition::extend`].
    pub fn extend_1d(&self, u: &GridFn1, i: isize, t: f64) -> Result<f64> {
        let g = u.grid();
        let ri = reflect_index(i, g.nx).ok_or(Error::OutOfRange { i, j: 0 })?;
        let w = self.layer_width();
        if w > 0 && (ri < w || ri + w >= g.nx) {
            Ok(self.layer_value(u.values(), ri, g.x(ri), 0.0, t))
        } else {
            Ok(u.values()[ri])
        }
    }
}

/// Mirror an index about the end points: `-k -> k`, `n-1+k -> n-1-k`.
pub fn reflect_index(k: isize, n: usize) -> Option<usize> {
    let last = n as isize - 1;
    let r = if k < 0 {
        -k
    } else if k > last {
        2 * last - k
    } else {
        k
    };
    (0..=last).contains(&r).then_some(r as usize)
}

/// A copy of a field surrounded by reflected ghost cells, so that stencils
/// can be evaluated without branching on the boundary.
#[derive(Clone, Debug, Default)]
pub struct Extended {
    nx: usize,
    ny: usize,
    pad_x: usize,
    pad_y: usize,
    stride: usize,
    data: Vec<f64>,
}

impl Extended {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of_2d(u: &GridFn2, pad: usize) -> Result<Self> {
        let mut e = Self::new();
        e.fill(u.values(), u.grid().nx, u.grid().ny, pad, pad)?;
        Ok(e)
    }

    pub fn of_1d(u: &GridFn1, pad: usize) -> Result<Self> {
        let mut e = Self::new();
        e.fill(u.values(), u.grid().nx, 1, pad, 0)?;
        Ok(e)
    }

    /// Refill from raw values, reusing the allocation.
    pub(crate) fn fill(&mut self, u: &[f64], nx: usize, ny: usize, pad_x: usize, pad_y: usize) -> Result<()> {
        if pad_x >= nx {
            return Err(Error::StencilTooWide { reach: pad_x, n: nx });
        }
        if ny > 1 && pad_y >= ny {
            return Err(Error::StencilTooWide { reach: pad_y, n: ny });
        }
        debug_assert_eq!(u.len(), nx * ny);
        let stride = nx + 2 * pad_x;
        let rows = ny + 2 * pad_y;
        self.nx = nx;
        self.ny = ny;
        self.pad_x = pad_x;
        self.pad_y = pad_y;
        self.stride = stride;
        self.data.resize(stride * rows, 0.0);
        for r in 0..rows {
            let j = reflect_index(r as isize - pad_y as isize, ny).expect("pad checked");
            let src = &u[j * nx..(j + 1) * nx];
            let dst = &mut self.data[r * stride..(r + 1) * stride];
            dst[pad_x..pad_x + nx].copy_from_slice(src);
            for g in 1..=pad_x {
                dst[pad_x - g] = src[g];
                dst[pad_x + nx - 1 + g] = src[nx - 1 - g];
            }
        }
        Ok(())
    }

    pub fn pad(&self) -> usize {
        self.pad_x
    }

    /// Neighbourhood of grid point `(i, j)`; must lie inside the grid.
    #[inline]
    pub fn probe(&self, i: usize, j: usize) -> Probe<'_> {
        debug_assert!(i < self.nx && j < self.ny);
        Probe {
            data: &self.data,
            center: (j + self.pad_y) * self.stride + i + self.pad_x,
            stride: self.stride as isize,
        }
    }

    /// Checked variant of [`Extended::probe`]: errors unless every point
    /// within `reach` of `(i, j)` exists in the extended array.
    pub fn probe_checked(&self, i: isize, j: isize, reach: usize) -> Result<Probe<'_>> {
        let r = reach as isize;
        let fits_x = i - r >= -(self.pad_x as isize) && i + r < (self.nx + self.pad_x) as isize;
        let fits_y = if self.ny == 1 && self.pad_y == 0 {
            j == 0
        } else {
            j - r >= -(self.pad_y as isize) && j + r < (self.ny + self.pad_y) as isize
        };
        if !(fits_x && fits_y) || i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return Err(Error::OutOfRange { i, j });
        }
        Ok(self.probe(i as usize, j as usize))
    }
}

/// Read-only view of the values around one grid point.
#[derive(Clone, Copy)]
pub struct Probe<'a> {
    data: &'a [f64],
    center: usize,
    stride: isize,
}

impl<'a> Probe<'a> {
    /// Builds a probe over a raw slice; `center` is the flat index of the
    /// reference point and `stride` the row length.
    pub fn new(data: &'a [f64], center: usize, stride: usize) -> Self {
        Self { data, center, stride: stride as isize }
    }

    #[inline(always)]
    pub fn at(&self, di: isize, dj: isize) -> f64 {
        self.data[(self.center as isize + dj * self.stride + di) as usize]
    }

    #[inline(always)]
    pub fn center(&self) -> f64 {
        self.data[self.center]
    }
}
