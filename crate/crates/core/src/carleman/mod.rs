//! Both sides of the single-equation and coupled Carleman estimates,
//! evaluated on discrete fields over sweeps of the large parameter `s`.

mod boundary;
mod estimate;
mod sweep;


pub use boundary::{eval_b, eval_b_jets, BTerms, BoundaryFunctionalParams, FieldJets};
pub use estimate::{
    check_overflow, eval_lemma1, eval_theorem2, max_admissible_s, CarlemanRow, Lemma1Prepared,
    Theorem2Prepared,
};
pub use sweep::{linear_s_grid, sweep_s, CarlemanReport, Estimate};
