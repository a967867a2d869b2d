//! Unique continuation from lateral Cauchy data: the difference system,
//! mismatch constants, the decay bound, window verification, the `t0`
//! sweep and a weighted least-squares reconstruction.

mod bound;
mod pair;
mod reconstruct;
mod verify;

#[cfg(test)]
mod tests;

pub use bound::{bound_at, eval_bound, BoundCurve};
pub use pair::{
    build_difference, compute_mismatch, manufactured_pair, ramp_perturbation, solution_residual,
    DifferencePair, LowerOrderConstants, MismatchConstants, PairSource, SolutionRef,
};
pub use reconstruct::{
    add_noise, qr_reconstruct, system_residuals, LinearizedSystem, QrOptions, Reconstruction,
};
pub use verify::{sweep_t0, t0_grid, uc_verify, CoverageReport, UcOptions, UcVerdict, WindowCell};
