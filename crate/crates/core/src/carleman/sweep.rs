use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::boundary::BoundaryFunctionalParams;
use super::estimate::{check_overflow, CarlemanRow, Lemma1Prepared, Theorem2Prepared};
use crate::discretization::SpaceTimeGrid;
use crate::error::{Error, Result};
use crate::geometry::WeightConfig;

/// Which estimate a sweep evaluates.
#[derive(Debug, Clone, Copy)]
pub enum Estimate<'a> {
    Lemma1(&'a Lemma1Prepared),
    Theorem2(&'a Theorem2Prepared),
}

impl Estimate<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Estimate::Lemma1(p) if p.k == 1 => "lemma1-k1",
            Estimate::Lemma1(_) => "lemma1-k2",
            Estimate::Theorem2(_) => "theorem2",
        }
    }

    fn row(
        &self,
        grid: &SpaceTimeGrid,
        s: f64,
        cfg: &WeightConfig,
        params: &BoundaryFunctionalParams,
    ) -> Result<CarlemanRow> {
        match self {
            Estimate::Lemma1(p) => p.row(grid, s, cfg, params),
            Estimate::Theorem2(p) => p.row(grid, s, cfg, params),
        }
    }
}

/// `n` points evenly spaced on `[lo, hi]`.
pub fn linear_s_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CarlemanReport {
    pub estimate: &'static str,
    pub rows: Vec<CarlemanRow>,
    /// Smallest `s` from which the running maximum of the ratio stays
    /// within 10% of its final value.
    pub s_lo: f64,
    /// Largest ratio over `s >= s_lo`.
    pub c_emp: f64,
    /// Largest ratio over the last quarter of the sweep.
    pub last_quartile_max: f64,
    /// Largest ratio before the last quarter.
    pub earlier_max: f64,
    /// Ratio never increases across the last quarter.
    pub tail_non_increasing: bool,
    /// Number of `s` values where both sides vanish.
    pub undefined: usize,
    /// All ratios finite and the last quarter stays within 5% of the
    /// earlier maximum.
    pub bounded: bool,
}

impl CarlemanReport {
    pub fn from_rows(estimate: &'static str, rows: Vec<CarlemanRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptySGrid);
        }
        let defined: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.is_defined())
            .map(|r| (r.s, r.ratio))
            .collect();
        let undefined = rows.len() - defined.len();
        let finite = defined.iter().all(|(_, r)| r.is_finite());
        if defined.is_empty() {
            return Ok(Self {
                estimate,
                rows,
                s_lo: f64::NAN,
                c_emp: 0.0,
                last_quartile_max: 0.0,
                earlier_max: 0.0,
                tail_non_increasing: true,
                undefined,
                bounded: true,
            });
        }
        let global = defined
            .iter()
            .map(|d| d.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut running = f64::NEG_INFINITY;
        let mut s_lo = defined[0].0;
        for &(s, r) in &defined {
            running = running.max(r);
            if running >= 0.9 * global {
                s_lo = s;
                break;
            }
        }
        let c_emp = defined
            .iter()
            .filter(|d| d.0 >= s_lo)
            .map(|d| d.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let split = defined.len() - defined.len().div_ceil(4);
        let earlier_max = defined[..split]
            .iter()
            .map(|d| d.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let tail = &defined[split..];
        let last_quartile_max = tail.iter().map(|d| d.1).fold(f64::NEG_INFINITY, f64::max);
        let tail_non_increasing = tail.windows(2).all(|w| w[1].1 <= w[0].1);
        let bounded = finite && (split == 0 || last_quartile_max <= 1.05 * earlier_max);
        Ok(Self {
            estimate,
            rows,
            s_lo,
            c_emp,
            last_quartile_max,
            earlier_max,
            tail_non_increasing,
            undefined,
            bounded,
        })
    }

    /// CSV with columns `s, lhs, rhs_source, B1, B2, B3, ratio, normalizer`;
    /// the magnitudes in each row are relative to `exp(normalizer)`.
    pub fn write_csv<W: Write>(&self, config_hash: &str, mut out: W) -> Result<()> {
        writeln!(out, "# config-hash: {config_hash}")?;
        writeln!(out, "# estimate: {}", self.estimate)?;
        writeln!(out, "s,lhs,rhs_source,B1,B2,B3,ratio,normalizer")?;
        for r in &self.rows {
            let n = r.normalizer();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.s,
                r.lhs.rescaled(n),
                r.rhs_source.rescaled(n),
                r.b.gamma.rescaled(n),
                r.b.complement.rescaled(n),
                r.b.slices.rescaled(n),
                r.ratio,
                n
            )?;
        }
        Ok(())
    }
}

/// Evaluate `estimate` at every `s` in `s_grid` (in parallel) and
/// summarize.
pub fn sweep_s(
    estimate: Estimate<'_>,
    grid: &SpaceTimeGrid,
    s_grid: &[f64],
    cfg: &WeightConfig,
    params: &BoundaryFunctionalParams,
) -> Result<CarlemanReport> {
    if s_grid.is_empty() {
        return Err(Error::EmptySGrid);
    }
    for &s in s_grid {
        check_overflow(s, cfg)?;
    }
    let rows = s_grid
        .par_iter()
        .map(|&s| estimate.row(grid, s, cfg, params))
        .collect::<Result<Vec<_>>>()?;
    CarlemanReport::from_rows(estimate.name(), rows)
}
