use serde::Serialize;

use crate::discretization::{
    divergence, dt, gradient, integrate, laplacian, Field, Region, Role, SpaceTimeGrid, TimeEnd,
    Weight,
};
use crate::error::{Error, Result};
use crate::geometry::WeightConfig;
use crate::mfg::{
    c0_ratio, interior_l2, residual_u, residual_v, solve, Closed, MFGCoefficients, MFGProblem,
    ManufacturedCase, SolverOptions,
};

/// One solution of the system together with its sources.
#[derive(Debug, Clone, Copy)]
pub struct SolutionRef<'a> {
    pub u: &'a Field,
    pub v: &'a Field,
    pub f: &'a Field,
    pub g: &'a Field,
}

/// Empirical constants of the lower-order terms of the difference system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerOrderConstants {
    /// `max |R1| / (|y| + |grad y|)`
    pub r1: f64,
    /// `max |R2| / (|z| + |grad z|)`
    pub r2: f64,
    /// `max |R3| / (|y| + |grad y|)`
    pub r3: f64,
}

impl LowerOrderConstants {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3)
    }
}

/// `y = u - u~`, `z = v - v~` with the residuals of
///
/// ```text
/// y_t + a1 lap y + R1                 = F - F~
/// z_t - a2 lap z + R2 - kappa v lap y - R3 = G - G~
/// ```
///
/// where `R1 = -kappa (grad u + grad u~) . grad y / 2 - h y`,
/// `R2 = -2 grad a2 . grad z - z lap a2 - kappa grad u~ . grad z - z div(kappa grad u~)`
/// and `R3 = grad(kappa v) . grad y`.
#[derive(Debug, Clone)]
pub struct DifferencePair {
    pub y: Field,
    pub z: Field,
    pub df: Field,
    pub dg: Field,
    pub line1: Field,
    pub line2: Field,
    /// Larger of the two relative line residuals over interior nodes.
    pub relative_residual: f64,
    /// Relative residuals of the two inputs in their own equations.
    pub input_residuals: [f64; 2],
    pub c0: LowerOrderConstants,
}

fn relative(res: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        res / scale
    } else if res == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Relative residual of one solution in the `u` and `v` equations.
pub fn solution_residual(
    grid: &SpaceTimeGrid,
    coeffs: &MFGCoefficients,
    sol: SolutionRef<'_>,
) -> Result<f64> {
    let p = MFGProblem::new(
        grid.clone(),
        coeffs.clone(),
        sol.f.clone(),
        sol.g.clone(),
        sol.u.clone(),
        sol.v.clone(),
    )?;
    let l2 = |f: &Field| interior_l2(grid, f);
    let (u, v) = (sol.u, sol.v);
    let grad_u = gradient(grid, u);
    let ru = l2(&residual_u(&p, u));
    let su = l2(&dt(grid, u))
        + l2(&coeffs.a1.mul(&laplacian(grid, u)))
        + l2(&coeffs.kappa.mul(&grad_u.norm_sq()).scale(0.5))
        + l2(&coeffs.h.mul(u))
        + l2(sol.f);
    let rv = l2(&residual_v(&p, u, v));
    let sv = l2(&dt(grid, v))
        + l2(&laplacian(grid, &coeffs.a2.mul(v)))
        + l2(&divergence(grid, &grad_u.scale_by(&coeffs.kappa.mul(v))))
        + l2(sol.g);
    Ok(relative(ru, su).max(relative(rv, sv)))
}

/// Form the difference pair and check it against the difference system.
/// Both inputs must solve the system to within `tol` (relative).
pub fn build_difference(
    grid: &SpaceTimeGrid,
    coeffs: &MFGCoefficients,
    first: SolutionRef<'_>,
    second: SolutionRef<'_>,
    tol: f64,
) -> Result<DifferencePair> {
    let input_residuals = [
        solution_residual(grid, coeffs, first)?,
        solution_residual(grid, coeffs, second)?,
    ];
    for &r in &input_residuals {
        if !(r <= tol) {
            return Err(Error::NotASolution {
                residual: r,
                tolerance: tol,
            });
        }
    }
    let l2 = |f: &Field| interior_l2(grid, f);
    let y = first.u.sub(second.u).with_role(Role::Y);
    let z = first.v.sub(second.v).with_role(Role::Z);
    let df = first.f.sub(second.f).with_role(Role::Source);
    let dg = first.g.sub(second.g).with_role(Role::Source);
    let c = coeffs;

    let grad_y = gradient(grid, &y);
    let grad_z = gradient(grid, &z);
    let grad_u = gradient(grid, first.u);
    let grad_ut = gradient(grid, second.u);
    let lap_y = laplacian(grid, &y);

    let r1 = c
        .kappa
        .mul(&grad_u.add(&grad_ut).dot(&grad_y))
        .scale(-0.5)
        .sub(&c.h.mul(&y));
    let dt_y = dt(grid, &y);
    let a1_lap = c.a1.mul(&lap_y);
    let line1 = dt_y
        .add(&a1_lap)
        .add(&r1)
        .sub(&df)
        .with_role(Role::Residual);
    let scale1 = l2(&dt_y) + l2(&a1_lap) + l2(&r1) + l2(&df);

    let grad_a2 = gradient(grid, &c.a2);
    let kgrad_ut = grad_ut.scale_by(&c.kappa);
    let r2 = grad_a2
        .dot(&grad_z)
        .scale(-2.0)
        .sub(&z.mul(&laplacian(grid, &c.a2)))
        .sub(&kgrad_ut.dot(&grad_z))
        .sub(&z.mul(&divergence(grid, &kgrad_ut)));
    let kv = c.kappa.mul(first.v);
    let r3 = gradient(grid, &kv).dot(&grad_y);
    let dt_z = dt(grid, &z);
    let a2_lap = c.a2.mul(&laplacian(grid, &z));
    let coupling = kv.mul(&lap_y);
    let line2 = dt_z
        .sub(&a2_lap)
        .add(&r2)
        .sub(&coupling)
        .sub(&r3)
        .sub(&dg)
        .with_role(Role::Residual);
    let scale2 = l2(&dt_z) + l2(&a2_lap) + l2(&r2) + l2(&coupling) + l2(&r3) + l2(&dg);

    let relative_residual = relative(l2(&line1), scale1).max(relative(l2(&line2), scale2));
    let c0 = LowerOrderConstants {
        r1: c0_ratio(&r1, &y, &grad_y),
        r2: c0_ratio(&r2, &z, &grad_z),
        r3: c0_ratio(&r3, &y, &grad_y),
    };
    Ok(DifferencePair {
        y,
        z,
        df,
        dg,
        line1,
        line2,
        relative_residual,
        input_residuals,
        c0,
    })
}

/// Squared mismatch norms driving the decay bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MismatchConstants {
    /// `sum_{k=0,1} |grad_{x,t}^k (y, z)|^2` over `(dOmega \ Gamma) x I`.
    pub m1: f64,
    /// Squared `H^1(Omega)` norms of `y, z` at `t0 - delta` and `t0 + delta`.
    pub m2: f64,
}

pub fn compute_mismatch(
    grid: &SpaceTimeGrid,
    cfg: &WeightConfig,
    pair: &DifferencePair,
) -> Result<MismatchConstants> {
    let parts: Vec<(Field, Field, Vec<Field>)> = [&pair.y, &pair.z]
        .into_iter()
        .map(|f| (f.clone(), dt(grid, f), gradient(grid, f).components))
        .collect();
    let pointwise = |i: usize, with_time: bool| -> f64 {
        parts
            .iter()
            .map(|(f, ft, g)| {
                f.values()[i].powi(2)
                    + g.iter().map(|c| c.values()[i].powi(2)).sum::<f64>()
                    + if with_time {
                        ft.values()[i].powi(2)
                    } else {
                        0.0
                    }
            })
            .sum()
    };
    let m1 = integrate(grid, cfg, Region::Complement, 0.0, Weight::Unit, |s, k| {
        pointwise(grid.index(s, k), true)
    })?
    .value;
    let mut m2 = 0.0;
    for end in [TimeEnd::Start, TimeEnd::End] {
        m2 += integrate(grid, cfg, Region::Slice(end), 0.0, Weight::Unit, |s, k| {
            pointwise(grid.index(s, k), false)
        })?
        .value;
    }
    Ok(MismatchConstants { m1, m2 })
}

/// How the two solutions of a manufactured pair are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSource {
    /// Closed forms sampled on the grid.
    Sampled,
    /// Both problems solved numerically from their sampled data.
    Solved,
}

/// Perturbation `(w, w/2)` with `w = amplitude ((x1 - 0.7)_+)^6`, times
/// `sin^2(pi x2)` in 2D. Its value and normal derivative vanish on the
/// faces `x1 = 0`, `x2 = 0` and `x2 = 1`.
pub fn ramp_perturbation(dimension: usize, amplitude: f64) -> (Closed, Closed) {
    let mut w = Closed::ramp(0, 0.7, 6).scale(amplitude);
    if dimension == 2 {
        let s = Closed::sin(1, std::f64::consts::PI);
        w = w.mul(&s.mul(&s));
    }
    let half = w.scale(0.5);
    (w, half)
}

/// Difference of a manufactured case and its perturbation by `(du, dv)`.
pub fn manufactured_pair(
    grid: &SpaceTimeGrid,
    case: &ManufacturedCase,
    du: &Closed,
    dv: &Closed,
    source: PairSource,
    solver: &SolverOptions,
    tol: f64,
) -> Result<DifferencePair> {
    let first = case.sample(grid)?;
    let second = case.perturbed(du, dv).sample(grid)?;
    let coeffs = case.coefficients(grid)?;
    let (u1, v1, u2, v2) = match source {
        PairSource::Sampled => (first.u_exact, first.v_exact, second.u_exact, second.v_exact),
        PairSource::Solved => {
            let (u1, v1) = solve(&first.problem, solver)?;
            let (u2, v2) = solve(&second.problem, solver)?;
            (u1.field, v1.field, u2.field, v2.field)
        }
    };
    build_difference(
        grid,
        &coeffs,
        SolutionRef {
            u: &u1,
            v: &v1,
            f: &first.problem.f,
            g: &first.problem.g,
        },
        SolutionRef {
            u: &u2,
            v: &v2,
            f: &second.problem.f,
            g: &second.problem.g,
        },
        tol,
    )
}
