//! Monotone and filtered finite-difference schemes for the level set
//! equation of affine curvature motion, `u_t = |∇u| k[u]^{1/3}`.

pub mod contour;
pub mod diff;
pub mod error;
pub mod exact;
pub mod grid;
pub mod harness;
pub mod io;
pub mod model1d;
pub mod nonlinearity;
pub mod schemes;
pub mod stencil;
pub mod time_integration;

pub use error::{Error, Result};
pub use grid::{BoundaryCondition, Grid, Grid1D, Grid2D, GridFn, GridFn1, GridFn2, LayerData};
pub use nonlinearity::RegularizationParams;
pub use schemes::{SchemeConfig, SchemeVariant};
pub use stencil::StencilSet;
pub use time_integration::{SolveReport, SolveStatus, StopRule, TimeStepPolicy};
