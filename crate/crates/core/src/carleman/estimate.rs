use serde::Serialize;

use super::boundary::{eval_b_jets, BTerms, BoundaryFunctionalParams, FieldJets};
use crate::discretization::{integrate, Field, LogScaled, Region, SpaceTimeGrid, Weight};
use crate::error::{Error, Result};
use crate::geometry::WeightConfig;
use crate::mfg::{apply_p, LowerOrder};
use crate::uc::DifferencePair;

/// Largest `s` with `2 s (phi_max - phi_min) <= 600`.
pub fn max_admissible_s(cfg: &WeightConfig) -> f64 {
    300.0 / (cfg.phi_max() - cfg.phi_min())
}

pub fn check_overflow(s: f64, cfg: &WeightConfig) -> Result<()> {
    if !(s > 0.0) {
        return Err(Error::Config(format!("s must be positive, got {s}")));
    }
    let max_s = max_admissible_s(cfg);
    if s > max_s {
        return Err(Error::OverflowGuard { s, max_s });
    }
    Ok(())
}

/// One evaluation of an estimate at a single `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CarlemanRow {
    pub s: f64,
    pub lhs: LogScaled,
    /// Source part of the right-hand side.
    pub rhs_source: LogScaled,
    /// Boundary part of the right-hand side, already multiplied by any
    /// power of `s` the estimate puts in front of `B`.
    pub b: BTerms,
    /// `lhs / (rhs_source + B)`; `NaN` when both sides vanish.
    pub ratio: f64,
}

impl CarlemanRow {
    fn new(s: f64, lhs: LogScaled, rhs_source: LogScaled, b: BTerms) -> Self {
        let ratio = lhs.ratio(&rhs_source.add(b.total()));
        Self {
            s,
            lhs,
            rhs_source,
            b,
            ratio,
        }
    }

    pub fn rhs(&self) -> LogScaled {
        self.rhs_source.add(self.b.total())
    }

    pub fn is_defined(&self) -> bool {
        !self.ratio.is_nan()
    }

    /// Common log-normalizer of the non-zero entries.
    pub fn normalizer(&self) -> f64 {
        [
            self.lhs,
            self.rhs_source,
            self.b.gamma,
            self.b.complement,
            self.b.slices,
        ]
        .iter()
        .filter(|v| v.value != 0.0)
        .map(|v| v.log_scale)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0)
    }
}

/// Single-equation estimate inputs with derivatives precomputed.
#[derive(Debug, Clone)]
pub struct Lemma1Prepared {
    pub k: u8,
    pub jets: FieldJets,
    pub p: Field,
}

impl Lemma1Prepared {
    pub fn new(
        k: u8,
        grid: &SpaceTimeGrid,
        f: &Field,
        a: &Field,
        lower: &dyn LowerOrder,
    ) -> Result<Self> {
        let p = apply_p(k, grid, a, f, lower)?.value;
        Ok(Self {
            k,
            jets: FieldJets::new(grid, f)?,
            p,
        })
    }

    pub fn row(
        &self,
        grid: &SpaceTimeGrid,
        s: f64,
        cfg: &WeightConfig,
        params: &BoundaryFunctionalParams,
    ) -> Result<CarlemanRow> {
        check_overflow(s, cfg)?;
        let j = &self.jets;
        let (s2, s3) = (s * s, s * s * s);
        let lhs = integrate(grid, cfg, Region::Full, s, Weight::Phi, |sp, k| {
            let i = grid.index(sp, k);
            (j.dt.values()[i].powi(2) + j.lap.values()[i].powi(2)) / s
                + s * j.grad_sq(i)
                + s3 * j.value.values()[i].powi(2)
        })?;
        let source = integrate(grid, cfg, Region::Full, s, Weight::Phi, |sp, k| {
            self.p.values()[grid.index(sp, k)].powi(2)
        })?
        .scale(s2 * s2);
        let b = eval_b_jets(grid, j, s, cfg, params)?;
        Ok(CarlemanRow::new(s, lhs, source, b))
    }
}

/// Single-equation estimate for `P_k` at one `s`.
#[allow(clippy::too_many_arguments)]
pub fn eval_lemma1(
    k: u8,
    grid: &SpaceTimeGrid,
    f: &Field,
    a: &Field,
    lower: &dyn LowerOrder,
    s: f64,
    cfg: &WeightConfig,
    params: &BoundaryFunctionalParams,
) -> Result<CarlemanRow> {
    Lemma1Prepared::new(k, grid, f, a, lower)?.row(grid, s, cfg, params)
}

/// Coupled-system estimate inputs.
#[derive(Debug, Clone)]
pub struct Theorem2Prepared {
    pub y: FieldJets,
    pub z: FieldJets,
    pub df: Field,
    pub dg: Field,
}

impl Theorem2Prepared {
    /// Refuses pairs whose discrete difference-system residual exceeds `tol`.
    pub fn new(grid: &SpaceTimeGrid, pair: &DifferencePair, tol: f64) -> Result<Self> {
        if !(pair.relative_residual <= tol) {
            return Err(Error::NotASolution {
                residual: pair.relative_residual,
                tolerance: tol,
            });
        }
        Ok(Self {
            y: FieldJets::new(grid, &pair.y)?,
            z: FieldJets::new(grid, &pair.z)?,
            df: pair.df.clone(),
            dg: pair.dg.clone(),
        })
    }

    pub fn row(
        &self,
        grid: &SpaceTimeGrid,
        s: f64,
        cfg: &WeightConfig,
        params: &BoundaryFunctionalParams,
    ) -> Result<CarlemanRow> {
        check_overflow(s, cfg)?;
        let (y, z) = (&self.y, &self.z);
        let (s2, s3) = (s * s, s * s * s);
        let lhs = integrate(grid, cfg, Region::Full, s, Weight::Phi, |sp, k| {
            let i = grid.index(sp, k);
            let ly = y.dt.values()[i].powi(2)
                + y.lap.values()[i].powi(2)
                + s2 * y.grad_sq(i)
                + s2 * s2 * y.value.values()[i].powi(2);
            let lz = (z.dt.values()[i].powi(2) + z.lap.values()[i].powi(2)) / s
                + s * z.grad_sq(i)
                + s3 * z.value.values()[i].powi(2);
            ly + lz
        })?;
        let source = integrate(grid, cfg, Region::Full, s, Weight::Phi, |sp, k| {
            let i = grid.index(sp, k);
            s * self.df.values()[i].powi(2) + self.dg.values()[i].powi(2)
        })?;
        let b = eval_b_jets(grid, y, s, cfg, params)?
            .add(&eval_b_jets(grid, z, s, cfg, params)?)
            .scale(s);
        Ok(CarlemanRow::new(s, lhs, source, b))
    }
}

/// Coupled-system estimate at one `s`, with `C = 1` on the right-hand side.
pub fn eval_theorem2(
    grid: &SpaceTimeGrid,
    pair: &DifferencePair,
    s: f64,
    cfg: &WeightConfig,
    params: &BoundaryFunctionalParams,
    residual_tol: f64,
) -> Result<CarlemanRow> {
    Theorem2Prepared::new(grid, pair, residual_tol)?.row(grid, s, cfg, params)
}
