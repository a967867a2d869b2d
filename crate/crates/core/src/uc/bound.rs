use serde::Serialize;

use super::pair::MismatchConstants;
use crate::error::{Error, Result};
use crate::geometry::{compute_mu, WeightConfig};

/// `C s^2 (M1 exp(-2s(mu2 - 1)) + M2 exp(-2s(mu2 - mu1)))`.
pub fn bound_at(m: &MismatchConstants, mu1: f64, mu2: f64, c_emp: f64, s: f64) -> f64 {
    let a = if m.m1 == 0.0 {
        0.0
    } else {
        m.m1 * (-2.0 * s * (mu2 - 1.0)).exp()
    };
    let b = if m.m2 == 0.0 {
        0.0
    } else {
        m.m2 * (-2.0 * s * (mu2 - mu1)).exp()
    };
    c_emp * s * s * (a + b)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCurve {
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    /// Grid minimizer and minimum.
    pub s_min: f64,
    pub min: f64,
    /// Grid maximizer, refined by a parabola through its neighbours when
    /// it is interior, and the maximum on the grid.
    pub s_peak: f64,
    pub peak: f64,
}

pub fn eval_bound(
    m: &MismatchConstants,
    cfg: &WeightConfig,
    c_emp: f64,
    s_grid: &[f64],
) -> Result<BoundCurve> {
    if s_grid.is_empty() {
        return Err(Error::EmptySGrid);
    }
    let (mu1, mu2) = compute_mu(cfg)?;
    let values: Vec<f64> = s_grid
        .iter()
        .map(|&s| bound_at(m, mu1, mu2, c_emp, s))
        .collect();
    let argmin = (0..values.len()).fold(0, |b, i| if values[i] < values[b] { i } else { b });
    let argmax = (0..values.len()).fold(0, |b, i| if values[i] > values[b] { i } else { b });
    let mut s_peak = s_grid[argmax];
    if argmax > 0 && argmax + 1 < values.len() {
        let (x0, x1, x2) = (s_grid[argmax - 1], s_grid[argmax], s_grid[argmax + 1]);
        let (y0, y1, y2) = (values[argmax - 1], values[argmax], values[argmax + 1]);
        let den = (x0 - x1) * (x0 - x2) * (x1 - x2);
        let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den;
        let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den;
        if a < 0.0 {
            s_peak = -b / (2.0 * a);
        }
    }
    Ok(BoundCurve {
        s_min: s_grid[argmin],
        min: values[argmin],
        s_peak,
        peak: values[argmax],
        s: s_grid.to_vec(),
        values,
    })
}
