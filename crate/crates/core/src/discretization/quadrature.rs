//! Trapezoidal space-time quadrature with overflow-safe exponential weights.
//!
//! A weight `exp(2 s phi)` is never formed directly. Each integral carries a
//! log-normalizer `L` (the largest log-weight over its nodes) and stores
//! `sum_q w_q f_q exp(2 s phi_q - L)`, so the represented value is
//! `value * exp(L)`. Ratios of integrals never need `exp(L)` itself.

use serde::Serialize;

use super::field::Field;
use super::grid::{SpaceTimeGrid, TimeEnd};
use crate::error::{Error, Result};
use crate::geometry::WeightConfig;

/// `value * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogScaled {
    pub value: f64,
    pub log_scale: f64,
}

impl LogScaled {
    pub const ZERO: LogScaled = LogScaled {
        value: 0.0,
        log_scale: 0.0,
    };

    pub fn new(value: f64, log_scale: f64) -> Self {
        Self { value, log_scale }
    }

    /// Value expressed relative to `exp(log_scale)`.
    pub fn rescaled(&self, log_scale: f64) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.value * (self.log_scale - log_scale).exp()
        }
    }

    /// Natural log of the represented (positive) value.
    pub fn ln(&self) -> f64 {
        self.value.ln() + self.log_scale
    }

    /// Represented value; may overflow to infinity.
    pub fn to_f64(&self) -> f64 {
        self.value * self.log_scale.exp()
    }

    pub fn scale(self, c: f64) -> Self {
        Self {
            value: c * self.value,
            log_scale: self.log_scale,
        }
    }

    pub fn add(self, other: LogScaled) -> Self {
        if other.value == 0.0 {
            return self;
        }
        if self.value == 0.0 {
            return other;
        }
        let l = self.log_scale.max(other.log_scale);
        Self {
            value: self.rescaled(l) + other.rescaled(l),
            log_scale: l,
        }
    }

    /// `self / other`; `NaN` when both vanish.
    pub fn ratio(&self, other: &LogScaled) -> f64 {
        if other.value == 0.0 {
            return if self.value == 0.0 {
                f64::NAN
            } else {
                f64::INFINITY
            };
        }
        (self.value / other.value) * (self.log_scale - other.log_scale).exp()
    }
}

/// Integration regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// `Q_I = Omega x I`
    Full,
    /// `Omega_eps x (t0 - r delta, t0 + r delta)`
    Window,
    /// `Gamma x I` (surface measure)
    Gamma,
    /// `(dOmega \ Gamma) x I` (surface measure)
    Complement,
    /// `Omega` at a single time end
    Slice(TimeEnd),
}

/// Which exponential weight multiplies the integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    /// `exp(2 s phi(x, t))`
    Phi,
    /// `exp(2 s phi(x, t0 - delta))`
    PhiAtStart,
    /// `exp(2 s)`
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadNode {
    pub space: usize,
    pub time: usize,
    pub weight: f64,
}

/// Quadrature nodes and trapezoid weights of `region`.
pub fn region_nodes(
    grid: &SpaceTimeGrid,
    cfg: &WeightConfig,
    region: Region,
) -> Result<Vec<QuadNode>> {
    let nt = grid.nt();
    let ns = grid.n_space();
    let mut out = Vec::new();
    match region {
        Region::Full => {
            for k in 0..nt {
                let wt = grid.time_weight(k);
                out.extend((0..ns).map(|s| QuadNode {
                    space: s,
                    time: k,
                    weight: wt * grid.space_weight(s),
                }));
            }
        }
        Region::Window => {
            let (lo_t, hi_t) = grid
                .window()
                .ok_or_else(|| Error::EmptyRegion("time window has no nodes".into()))?;
            let ranges = grid
                .core_ranges(cfg)
                .ok_or_else(|| Error::EmptyRegion("Omega_eps has no nodes".into()))?;
            let h = grid.h();
            for k in lo_t..=hi_t {
                let wt = SpaceTimeGrid::trapezoid(k, lo_t, hi_t, grid.tau());
                for j in ranges[1].0..=ranges[1].1 {
                    let wy = if grid.dimension() == 2 {
                        SpaceTimeGrid::trapezoid(j, ranges[1].0, ranges[1].1, h[1])
                    } else {
                        1.0
                    };
                    for i in ranges[0].0..=ranges[0].1 {
                        let wx = SpaceTimeGrid::trapezoid(i, ranges[0].0, ranges[0].1, h[0]);
                        out.push(QuadNode {
                            space: grid.space_index(i, j),
                            time: k,
                            weight: wt * wy * wx,
                        });
                    }
                }
            }
        }
        Region::Gamma | Region::Complement => {
            let nodes = if region == Region::Gamma {
                grid.gamma_nodes()
            } else {
                grid.complement_nodes()
            };
            if nodes.is_empty() {
                return Err(Error::EmptyRegion(format!("{region:?} has no nodes")));
            }
            for k in 0..nt {
                let wt = grid.time_weight(k);
                out.extend(nodes.iter().map(|n| QuadNode {
                    space: n.space,
                    time: k,
                    weight: wt * n.weight,
                }));
            }
        }
        Region::Slice(end) => {
            let k = grid.slice_index(end);
            out.extend((0..ns).map(|s| QuadNode {
                space: s,
                time: k,
                weight: grid.space_weight(s),
            }));
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyRegion(format!("{region:?}")));
    }
    Ok(out)
}

/// `log` of the weight at node `(space, time)`.
#[inline]
pub fn log_weight(
    grid: &SpaceTimeGrid,
    cfg: &WeightConfig,
    s: f64,
    weight: Weight,
    space: usize,
    time: usize,
) -> f64 {
    match weight {
        Weight::Unit => 2.0 * s,
        Weight::Phi => {
            2.0 * s
                * cfg
                    .log_phi_offset(grid.point(space), grid.time_offset(time))
                    .exp()
        }
        Weight::PhiAtStart => {
            2.0 * s
                * cfg
                    .log_phi_offset(grid.point(space), grid.time_offset(0))
                    .exp()
        }
    }
}

/// Weighted quadrature of a node-wise integrand over precomputed nodes.
pub fn integrate_nodes(
    grid: &SpaceTimeGrid,
    cfg: &WeightConfig,
    nodes: &[QuadNode],
    s: f64,
    weight: Weight,
    integrand: impl Fn(usize, usize) -> f64,
) -> LogScaled {
    if s == 0.0 {
        let value = nodes
            .iter()
            .map(|q| q.weight * integrand(q.space, q.time))
            .sum();
        return LogScaled::new(value, 0.0);
    }
    let logs: Vec<f64> = nodes
        .iter()
        .map(|q| log_weight(grid, cfg, s, weight, q.space, q.time))
        .collect();
    let norm = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let value = nodes
        .iter()
        .zip(&logs)
        .map(|(q, &lw)| q.weight * integrand(q.space, q.time) * (lw - norm).exp())
        .sum();
    LogScaled::new(value, norm)
}

pub fn integrate(
    grid: &SpaceTimeGrid,
    cfg: &WeightConfig,
    region: Region,
    s: f64,
    weight: Weight,
    integrand: impl Fn(usize, usize) -> f64,
) -> Result<LogScaled> {
    let nodes = region_nodes(grid, cfg, region)?;
    Ok(integrate_nodes(grid, cfg, &nodes, s, weight, integrand))
}

/// Trapezoidal quadrature of `f exp(2 s phi)` over `region`.
pub fn weighted_integral(
    grid: &SpaceTimeGrid,
    f: &Field,
    s: f64,
    cfg: &WeightConfig,
    region: Region,
) -> Result<LogScaled> {
    if f.len() != grid.n_nodes() {
        return Err(Error::ShapeMismatch {
            expected: grid.n_nodes(),
            got: f.len(),
        });
    }
    integrate(grid, cfg, region, s, Weight::Phi, |sp, k| f.at(grid, sp, k))
}

/// Unweighted squared L2 norm of the given fields summed over `region`.
pub fn norm_sq(
    grid: &SpaceTimeGrid,
    cfg: &WeightConfig,
    region: Region,
    fields: &[&Field],
) -> Result<f64> {
    let r = integrate(grid, cfg, region, 0.0, Weight::Phi, |sp, k| {
        fields.iter().map(|f| f.at(grid, sp, k).powi(2)).sum()
    })?;
    Ok(r.value)
}
