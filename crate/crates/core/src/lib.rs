#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::should_implement_trait
)]

//! Carleman estimates and unique continuation for a coupled mean-field-game
//! system on a space-time cylinder.

pub mod carleman;
pub mod config;
pub mod discretization;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod mfg;
pub mod runner;
pub mod uc;

pub use error::{Error, Result};
