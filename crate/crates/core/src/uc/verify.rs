use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bound::eval_bound;
use super::pair::{compute_mismatch, DifferencePair, MismatchConstants};
use crate::discretization::{extract_cauchy, norm_sq, Region, SpaceTimeGrid};
use crate::error::{Error, Result};
use crate::geometry::WeightConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcOptions {
    pub s_grid: Vec<f64>,
    /// Relative tolerance for the zero-Cauchy-data precondition on Gamma.
    pub tol_gamma: f64,
    /// `C` in the discretization slack `C (h^2 + tau)`.
    pub slack_constant: f64,
}

impl Default for UcOptions {
    fn default() -> Self {
        Self {
            s_grid: crate::carleman::linear_s_grid(1.0, 50.0, 491),
            tol_gamma: 1e-10,
            slack_constant: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UcVerdict {
    /// Squared `L2` norm of `(y, z)` on `Omega_eps x (t0 - r delta, t0 + r delta)`.
    pub window_norm: f64,
    pub bound_min: f64,
    pub s_star: f64,
    pub slack: f64,
    pub mismatch: MismatchConstants,
    pub c_emp: f64,
    /// Largest Gamma trace of `(y, z)` relative to their sup norm.
    pub gamma_mismatch: f64,
    pub pass: bool,
}

/// Check the window norm of a pair with zero Cauchy data on Gamma against
/// the decay bound plus discretization slack.
pub fn uc_verify(
    grid: &SpaceTimeGrid,
    cfg: &WeightConfig,
    pair: &DifferencePair,
    c_emp: f64,
    opts: &UcOptions,
) -> Result<UcVerdict> {
    let scale = pair.y.max_abs().max(pair.z.max_abs());
    let traces = extract_cauchy(grid, &pair.y, Some(&pair.z)).gamma_max_abs();
    let gamma_mismatch = if scale > 0.0 { traces / scale } else { 0.0 };
    if !(gamma_mismatch <= opts.tol_gamma) {
        return Err(Error::GammaTrace {
            mismatch: gamma_mismatch,
            tolerance: opts.tol_gamma,
        });
    }
    let window_norm = norm_sq(grid, cfg, Region::Window, &[&pair.y, &pair.z])?;
    let mismatch = compute_mismatch(grid, cfg, pair)?;
    let curve = eval_bound(&mismatch, cfg, c_emp, &opts.s_grid)?;
    let h = grid.h_max();
    let slack = opts.slack_constant * (h * h + grid.tau());
    Ok(UcVerdict {
        window_norm,
        bound_min: curve.min,
        s_star: curve.s_min,
        slack,
        mismatch,
        c_emp,
        gamma_mismatch,
        pass: window_norm <= curve.min + slack,
    })
}

/// Centres `t0` used by [`sweep_t0`]: `n` interior points of `(delta, T - delta)`.
pub fn t0_grid(horizon: f64, delta: f64, n: usize) -> Result<Vec<f64>> {
    if !(horizon > 2.0 * delta) {
        return Err(Error::Horizon { horizon, delta });
    }
    let span = horizon - 2.0 * delta;
    Ok((0..n)
        .map(|i| delta + span * (i + 1) as f64 / (n + 1) as f64)
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowCell {
    pub t0: f64,
    pub window: (f64, f64),
    pub verdict: UcVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub cells: Vec<WindowCell>,
    /// Union of the windows when it is a single interval.
    pub union: Option<(f64, f64)>,
    /// `((1 - r) delta, T - (1 - r) delta)`
    pub target: (f64, f64),
    /// Spacing of the `t0` grid, `(T - 2 delta) / (n + 1)`.
    pub granularity: f64,
    /// The union reaches the target up to the granularity.
    pub exhausts: bool,
    pub all_pass: bool,
}

/// Run [`uc_verify`] on windows centred on an interior grid of `t0` values
/// and check that their union exhausts the target time interval.
///
/// `cell(t0, cfg)` builds the grid, the pair and the empirical constant for
/// one centre. Cells run on a pool of `workers` threads.
pub fn sweep_t0<C>(
    horizon: f64,
    cfg: &WeightConfig,
    n_t0: usize,
    opts: &UcOptions,
    workers: usize,
    cell: C,
) -> Result<CoverageReport>
where
    C: Fn(f64, &WeightConfig) -> Result<(SpaceTimeGrid, DifferencePair, f64)> + Sync,
{
    let (delta, r) = (cfg.delta, cfg.r);
    let centres = t0_grid(horizon, delta, n_t0.max(1))?;
    let run = |&t0: &f64| -> Result<WindowCell> {
        let local = cfg.with_t0(t0)?;
        let (grid, pair, c_emp) = cell(t0, &local)?;
        let verdict = uc_verify(&grid, &local, &pair, c_emp, opts)?;
        Ok(WindowCell {
            t0,
            window: (t0 - r * delta, t0 + r * delta),
            verdict,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let cells = pool.install(|| centres.par_iter().map(run).collect::<Result<Vec<_>>>())?;

    let target = ((1.0 - r) * delta, horizon - (1.0 - r) * delta);
    let granularity = (horizon - 2.0 * delta) / (centres.len() + 1) as f64;
    let contiguous = cells
        .windows(2)
        .all(|w| w[1].window.0 <= w[0].window.1 + 1e-12);
    let union = contiguous.then(|| (cells[0].window.0, cells[cells.len() - 1].window.1));
    let tol = granularity * (1.0 + 1e-9);
    let exhausts = union.is_some_and(|(lo, hi)| lo - target.0 <= tol && target.1 - hi <= tol);
    let all_pass = cells.iter().all(|c| c.verdict.pass);
    Ok(CoverageReport {
        cells,
        union,
        target,
        granularity,
        exhausts,
        all_pass,
    })
}
