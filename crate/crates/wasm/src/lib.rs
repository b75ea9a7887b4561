//! Browser bindings: step a level-set evolution, extract its zero contour,
//! and inspect the wide stencils.

use affineflow::contour::{self, Polyline};
use affineflow::exact;
use affineflow::time_integration::evolve;
use affineflow::{BoundaryCondition, Grid2D, GridFn2, SchemeConfig, SchemeVariant, StencilSet, TimeStepPolicy};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// `[x0, y0, x1, y1, ..., NaN, NaN, ...]`, one NaN pair after each polyline.
fn flatten(lines: &[Polyline]) -> Vec<f64> {
    let mut out = Vec::new();
    for l in lines {
        for &(x, y) in &l.points {
            out.extend([x, y]);
        }
        out.extend([f64::NAN, f64::NAN]);
    }
    out
}

#[wasm_bindgen]
pub struct Simulation {
    u: GridFn2,
    config: SchemeConfig,
    bc: BoundaryCondition,
    dt: f64,
    t: f64,
}

#[wasm_bindgen]
impl Simulation {
    /// `problem` is a registered curve evolution (`evolution-ellipse`,
    /// `evolution-diamond`, `evolution-flat-diamond`, `evolution-fan`).
    #[wasm_bindgen(constructor)]
    pub fn new(problem: &str, variant: &str, n: usize) -> Result<Simulation, JsError> {
        let p = exact::problem_by_name(problem).map_err(js_err)?;
        if p.dimension != 2 {
            return Err(JsError::new("only 2D problems can be simulated"));
        }
        let variant: SchemeVariant = variant.parse().map_err(js_err)?;
        let g = p.grid(n).map_err(js_err)?;
        let config = SchemeConfig::defaults(variant, g.h).map_err(js_err)?;
        let dt = TimeStepPolicy::default_for(variant, false).resolve(g.h, &config).map_err(js_err)?;
        let bc = p.boundary_condition().map_err(js_err)?;
        Ok(Simulation { u: p.initial(g), config, bc, dt, t: 0.0 })
    }

    /// Advances by `duration` and returns the time reached.
    pub fn advance(&mut self, duration: f64) -> Result<f64, JsError> {
        let (u, _, report) =
            evolve(&self.u, None, &self.config, &self.bc, TimeStepPolicy::Fixed(self.dt), duration, &[]).map_err(js_err)?;
        self.u = u;
        self.t += report.t_final;
        Ok(self.t)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n(&self) -> usize {
        self.u.grid().nx
    }

    /// `[x_min, x_max]` of the square domain.
    pub fn extent(&self) -> Vec<f64> {
        let g = self.u.grid();
        vec![g.x0, g.x_max()]
    }

    /// Row-major field values.
    pub fn field(&self) -> Vec<f64> {
        self.u.values().to_vec()
    }

    /// Level set of the current field, flattened as in [`contours`].
    pub fn contour(&self, level: f64) -> Vec<f64> {
        flatten(&contour::marching_squares(&self.u, level))
    }
}

/// Marching-squares level set of a row-major `nx × ny` field with spacing
/// `h` and lower-left corner `(x0, y0)`.
#[wasm_bindgen]
pub fn contours(values: Vec<f64>, nx: usize, ny: usize, h: f64, x0: f64, y0: f64, level: f64) -> Result<Vec<f64>, JsError> {
    let g = Grid2D::new(nx, ny, h, x0, y0).map_err(js_err)?;
    let u = GridFn2::from_values(g, values).map_err(js_err)?;
    Ok(flatten(&contour::marching_squares(&u, level)))
}

/// Integer offsets `[dx0, dy0, dx1, dy1, ...]` of the `n_theta` stencil.
#[wasm_bindgen]
pub fn stencil_offsets(n_theta: usize) -> Result<Vec<i32>, JsError> {
    let s = StencilSet::with_default_directions(n_theta).map_err(js_err)?;
    Ok(s.offsets().iter().flat_map(|&(dx, dy)| [dx, dy]).collect())
}
