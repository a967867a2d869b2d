//! Implicit Euler time stepping for the two equations with Dirichlet data on
//! the whole lateral boundary.

use serde::{Deserialize, Serialize};

use super::problem::{interior_l2, residual_u, residual_v, transport_pieces, MFGProblem};
use crate::discretization::{Field, Role, SpaceTimeGrid};
use crate::error::{Error, Result};
use crate::linalg::BandedMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_inner: usize,
    pub tol_inner: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_inner: 100,
            tol_inner: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub field: Field,
    /// Discrete `L2(Q_I)` norm of the equation residual over interior nodes.
    pub residual: f64,
    /// Largest number of fixed-point sweeps used by a single time step.
    pub max_inner_used: usize,
}

fn bandwidth(grid: &SpaceTimeGrid) -> usize {
    if grid.dimension() == 2 {
        grid.n()[0]
    } else {
        1
    }
}

fn level_gradient_sq(grid: &SpaceTimeGrid, level: &[f64]) -> Vec<f64> {
    (0..grid.n_space())
        .map(|s| {
            (0..grid.dimension())
                .map(|axis| {
                    grid.first_derivative_at(s, axis)
                        .apply(|q| level[q])
                        .powi(2)
                })
                .sum()
        })
        .collect()
}

/// Backward sweep from the terminal level `t0 + delta`.
///
/// Each step solves
/// `(u^{k+1} - u^k)/tau + a1 lap u^k - h u^k = F^k + kappa |grad u^(m)|^2 / 2`
/// where `u^(0) = u^{k+1}` and `u^(m)` is the previous fixed-point iterate.
pub fn solve_u(problem: &MFGProblem, opts: &SolverOptions) -> Result<Solution> {
    let grid = &problem.grid;
    let c = &problem.coeffs;
    if !(c.a1.min() > 0.0) {
        return Err(Error::NonPositiveCoefficient {
            name: "a1",
            min: c.a1.min(),
        });
    }
    let (ns, nt, tau) = (grid.n_space(), grid.nt(), grid.tau());
    let mut u = Field::zeros(grid).with_role(Role::U);
    u.level_mut(grid, nt - 1)
        .copy_from_slice(problem.u_data.level(grid, nt - 1));
    let mut max_inner_used = 0;

    for k in (0..nt - 1).rev() {
        let mut m = BandedMatrix::zeros(ns, bandwidth(grid));
        for s in 0..ns {
            if grid.is_boundary(s) {
                m.set_identity_row(s);
                continue;
            }
            let i = grid.index(s, k);
            m.add(s, s, -1.0 / tau - c.h.values()[i]);
            for axis in 0..grid.dimension() {
                for (q, w) in grid.second_derivative_at(s, axis).iter() {
                    m.add(s, q, c.a1.values()[i] * w);
                }
            }
        }
        let lu = m.factor().map_err(|e| match e {
            Error::SingularSystem { row } => Error::SingularSystem {
                row: grid.index(row, k),
            },
            other => other,
        })?;

        let next = u.level(grid, k + 1).to_vec();
        let mut iterate = next.clone();
        let mut converged = false;
        let mut last = f64::INFINITY;
        let linear = c.kappa.level(grid, k).iter().all(|&q| q == 0.0);
        for sweep in 1..=opts.max_inner.max(1) {
            let g2 = level_gradient_sq(grid, &iterate);
            let rhs: Vec<f64> = (0..ns)
                .map(|s| {
                    let i = grid.index(s, k);
                    if grid.is_boundary(s) {
                        problem.u_data.values()[i]
                    } else {
                        problem.f.values()[i] - next[s] / tau + 0.5 * c.kappa.values()[i] * g2[s]
                    }
                })
                .collect();
            let new = lu.solve(&rhs);
            let scale = new.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            last = new
                .iter()
                .zip(&iterate)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if new.iter().any(|v| !v.is_finite()) {
                last = f64::NAN;
                break;
            }
            iterate = new;
            // The first sweep uses the gradient of the previous level, so at
            // least two sweeps are needed to measure the fixed-point update.
            if linear || (sweep > 1 && last <= opts.tol_inner * scale) {
                max_inner_used = max_inner_used.max(sweep);
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::InnerIteration {
                step: k,
                residual: last,
            });
        }
        u.level_mut(grid, k).copy_from_slice(&iterate);
    }
    let residual = interior_l2(grid, &residual_u(problem, &u));
    Ok(Solution {
        field: u,
        residual,
        max_inner_used,
    })
}

/// Forward sweep from the initial level `t0 - delta`, with `lap(a2 v)`
/// expanded as `a2 lap v + 2 grad a2 . grad v + v lap a2` and the drift
/// term discretized as the central divergence of `kappa v grad u`.
pub fn solve_v(problem: &MFGProblem, u: &Field) -> Result<Solution> {
    let grid = &problem.grid;
    let c = &problem.coeffs;
    if u.len() != grid.n_nodes() {
        return Err(Error::ShapeMismatch {
            expected: grid.n_nodes(),
            got: u.len(),
        });
    }
    let (ns, nt, tau) = (grid.n_space(), grid.nt(), grid.tau());
    let pieces = transport_pieces(grid, c, u);
    let mut v = Field::zeros(grid).with_role(Role::V);
    v.level_mut(grid, 0)
        .copy_from_slice(problem.v_data.level(grid, 0));

    for k in 1..nt {
        let mut m = BandedMatrix::zeros(ns, bandwidth(grid));
        let mut rhs = vec![0.0; ns];
        for s in 0..ns {
            let i = grid.index(s, k);
            if grid.is_boundary(s) {
                m.set_identity_row(s);
                rhs[s] = problem.v_data.values()[i];
                continue;
            }
            m.add(s, s, 1.0 / tau - pieces.lap_a2.values()[i]);
            for axis in 0..grid.dimension() {
                for (q, w) in grid.second_derivative_at(s, axis).iter() {
                    m.add(s, q, -c.a2.values()[i] * w);
                }
                let ga = pieces.grad_a2.components[axis].values()[i];
                let qa = &pieces.q.components[axis];
                for (q, w) in grid.first_derivative_at(s, axis).iter() {
                    m.add(s, q, -2.0 * ga * w - w * qa.values()[grid.index(q, k)]);
                }
            }
            rhs[s] = problem.g.values()[i] + v.at(grid, s, k - 1) / tau;
        }
        let lu = m.factor().map_err(|e| match e {
            Error::SingularSystem { row } => Error::SingularSystem {
                row: grid.index(row, k),
            },
            other => other,
        })?;
        let level = lu.solve(&rhs);
        v.level_mut(grid, k).copy_from_slice(&level);
    }
    let residual = interior_l2(grid, &residual_v(problem, u, &v));
    Ok(Solution {
        field: v,
        residual,
        max_inner_used: 0,
    })
}

/// Solve `u` then `v`.
pub fn solve(problem: &MFGProblem, opts: &SolverOptions) -> Result<(Solution, Solution)> {
    let u = solve_u(problem, opts)?;
    let v = solve_v(problem, &u.field)?;
    Ok((u, v))
}
