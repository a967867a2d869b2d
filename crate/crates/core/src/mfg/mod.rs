//! The coupled mean-field-game system: a backward Hamilton-Jacobi equation
//! for `u` and a forward Fokker-Planck equation for `v`.

mod analytic;
mod manufactured;
mod problem;
mod solver;

#[cfg(test)]
mod tests;

pub use analytic::{Closed, Jet};
pub use manufactured::{
    make_manufactured, source_f, source_g, Manufactured, ManufacturedCase, CATALOGUE,
};
pub use problem::{
    apply_p, c0_ratio, interior_l2, residual_u, residual_v, LinearLowerOrder, LowerOrder,
    MFGCoefficients, MFGProblem, NoLowerOrder, PApplied,
};
pub use solver::{solve, solve_u, solve_v, Solution, SolverOptions};
