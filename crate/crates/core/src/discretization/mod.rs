//! Uniform space-time grids, finite-difference operators, trace extraction
//! and weighted quadrature.

mod field;
mod grid;
pub mod io;
mod quadrature;
mod stencil;
mod trace;

pub use field::{Field, Role, VectorField};
pub use grid::{FaceNode, GridDims, NodeKind, SpaceTimeGrid, TimeEnd};
pub use quadrature::{
    integrate, integrate_nodes, log_weight, norm_sq, region_nodes, weighted_integral, LogScaled,
    QuadNode, Region, Weight,
};
pub use stencil::{
    divergence, dt, first_derivative, gradient, laplacian, partial, second_derivative, Stencil,
};
pub use trace::{
    extract_cauchy, normal_derivative, tangential_derivative, CauchyData, FieldTraces,
};
