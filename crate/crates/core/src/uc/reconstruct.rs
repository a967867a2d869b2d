//! Carleman-weighted least-squares (quasi-reversibility) reconstruction of
//! a difference pair from its Cauchy data on Gamma.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::pair::DifferencePair;
use crate::discretization::{
    divergence, gradient, laplacian, CauchyData, Field, Role, SpaceTimeGrid, VectorField,
};
use crate::error::{Error, Result};
use crate::geometry::WeightConfig;
use crate::linalg::{cgnr, CgOptions, CsrMatrix};
use crate::mfg::{Closed, Jet, MFGCoefficients, ManufacturedCase};

/// The difference system with couplings frozen at a reference solution:
///
/// ```text
/// y_t + a1 lap y + b1 . grad y + c1 y                          = dF
/// z_t - a2 lap z + b2 . grad z + c2 z - e lap y - g . grad y   = dG
/// ```
#[derive(Debug, Clone)]
pub struct LinearizedSystem {
    pub a1: Field,
    pub b1: VectorField,
    pub c1: Field,
    pub a2: Field,
    pub b2: VectorField,
    pub c2: Field,
    pub e: Field,
    pub g: VectorField,
}

impl LinearizedSystem {
    /// Freeze at nodal reference fields, with discrete derivatives.
    pub fn from_reference(
        grid: &SpaceTimeGrid,
        c: &MFGCoefficients,
        u_ref: &Field,
        v_ref: &Field,
    ) -> Self {
        let kgrad_u = gradient(grid, u_ref).scale_by(&c.kappa);
        let grad_a2 = gradient(grid, &c.a2);
        let kv = c.kappa.mul(v_ref);
        Self {
            a1: c.a1.clone(),
            b1: kgrad_u.scale_by(&Field::constant(grid, -1.0)),
            c1: c.h.scale(-1.0),
            a2: c.a2.clone(),
            b2: grad_a2
                .scale_by(&Field::constant(grid, 2.0))
                .add(&kgrad_u)
                .scale_by(&Field::constant(grid, -1.0)),
            c2: laplacian(grid, &c.a2)
                .add(&divergence(grid, &kgrad_u))
                .scale(-1.0),
            g: gradient(grid, &kv),
            e: kv,
        }
    }

    /// Freeze at the closed-form solution of a manufactured case.
    pub fn from_case(grid: &SpaceTimeGrid, case: &ManufacturedCase) -> Self {
        let d = grid.dimension();
        let jets = |x, t| {
            (
                case.u.jet(x, t),
                case.v.jet(x, t),
                case.a1.jet(x, t),
                case.a2.jet(x, t),
                case.kappa.jet(x, t),
                case.h.jet(x, t),
            )
        };
        let scalar = |f: &dyn Fn(&[Jet; 6]) -> f64| {
            Field::from_fn(grid, |x, t| {
                let j = jets(x, t);
                f(&[j.0, j.1, j.2, j.3, j.4, j.5])
            })
        };
        let vector = |f: &dyn Fn(&[Jet; 6], usize) -> f64| VectorField {
            components: (0..d).map(|a| scalar(&|j: &[Jet; 6]| f(j, a))).collect(),
        };
        let [u, v, a1, a2, kappa, h] = [0, 1, 2, 3, 4, 5];
        Self {
            a1: scalar(&|j| j[a1].value),
            b1: vector(&|j, a| -j[kappa].value * j[u].grad[a]),
            c1: scalar(&|j| -j[h].value),
            a2: scalar(&|j| j[a2].value),
            b2: vector(&|j, a| -(2.0 * j[a2].grad[a] + j[kappa].value * j[u].grad[a])),
            c2: scalar(&|j| -(j[a2].lap + j[kappa].value * j[u].lap + j[kappa].dot_grad(&j[u]))),
            e: scalar(&|j| j[kappa].value * j[v].value),
            g: vector(&|j, a| j[kappa].value * j[v].grad[a] + j[v].value * j[kappa].grad[a]),
        }
    }

    /// Continuous right-hand sides `(dF, dG)` of closed-form `(y, z)`
    /// for a system built by [`LinearizedSystem::from_case`].
    pub fn closed_sources(&self, grid: &SpaceTimeGrid, y: &Closed, z: &Closed) -> (Field, Field) {
        let d = grid.dimension();
        let mut df = Field::zeros(grid).with_role(Role::Source);
        let mut dg = Field::zeros(grid).with_role(Role::Source);
        for k in 0..grid.nt() {
            let t = grid.time(k);
            for s in 0..grid.n_space() {
                let x = grid.point(s);
                let i = grid.index(s, k);
                let (jy, jz) = (y.jet(x, t), z.jet(x, t));
                let dot = |b: &VectorField, j: &Jet| {
                    (0..d)
                        .map(|a| b.components[a].values()[i] * j.grad[a])
                        .sum::<f64>()
                };
                df.values_mut()[i] = jy.dt
                    + self.a1.values()[i] * jy.lap
                    + dot(&self.b1, &jy)
                    + self.c1.values()[i] * jy.value;
                dg.values_mut()[i] = jz.dt - self.a2.values()[i] * jz.lap
                    + dot(&self.b2, &jz)
                    + self.c2.values()[i] * jz.value
                    - self.e.values()[i] * jy.lap
                    - dot(&self.g, &jy);
            }
        }
        (df, dg)
    }
}

/// Add `eta * max|trace| * N(0, 1)` to each Gamma trace array of the first
/// two components.
pub fn add_noise(data: &CauchyData, eta: f64, seed: u64) -> CauchyData {
    let mut out = data.clone();
    if eta == 0.0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for comp in out.components.iter_mut() {
        for trace in [&mut comp.gamma_value, &mut comp.gamma_normal] {
            let amp = trace.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            for v in trace.iter_mut().flatten() {
                let n: f64 = StandardNormal.sample(&mut rng);
                *v += eta * amp * n;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QrOptions {
    pub s: f64,
    /// Cauchy penalty; `None` means `1e3 s^4`.
    pub rho: Option<f64>,
    pub rtol: f64,
    pub max_iter: usize,
}

impl Default for QrOptions {
    fn default() -> Self {
        Self {
            s: 1.0,
            rho: None,
            rtol: 1e-8,
            max_iter: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub pair: DifferencePair,
    /// `J_s` at the minimizer.
    pub functional: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

/// Minimize
/// `|e^{s phi} line1|^2 + |e^{s phi} line2|^2 + rho |Gamma-Cauchy mismatch|^2`
/// over nodal `(y, z)` by conjugate gradient on the normal equations.
/// The weight is normalized by `e^{-s max phi}`; residual rows sit at
/// interior spatial nodes for every time level.
pub fn qr_reconstruct(
    grid: &SpaceTimeGrid,
    cfg: &WeightConfig,
    system: &LinearizedSystem,
    cauchy: &CauchyData,
    df: &Field,
    dg: &Field,
    opts: &QrOptions,
) -> Result<Reconstruction> {
    if cauchy.components.len() < 2 {
        return Err(Error::Config(
            "reconstruction needs Cauchy data for both y and z".into(),
        ));
    }
    for f in [df, dg] {
        if f.len() != grid.n_nodes() {
            return Err(Error::ShapeMismatch {
                expected: grid.n_nodes(),
                got: f.len(),
            });
        }
    }
    let s = opts.s;
    let rho = opts.rho.unwrap_or(1e3 * s.powi(4));
    let n = grid.n_nodes();
    let d = grid.dimension();
    let phi = |sp: usize, k: usize| {
        cfg.log_phi_offset(grid.point(sp), grid.time_offset(k))
            .exp()
    };
    let phi_max = (0..grid.nt())
        .flat_map(|k| (0..grid.n_space()).map(move |sp| (sp, k)))
        .map(|(sp, k)| phi(sp, k))
        .fold(f64::NEG_INFINITY, f64::max);

    let mut a = CsrMatrix::new(2 * n);
    let mut b = Vec::new();
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(32);
    for k in 0..grid.nt() {
        let time = grid.time_derivative_at(k);
        for sp in 0..grid.n_space() {
            if grid.is_boundary(sp) {
                continue;
            }
            let i = grid.index(sp, k);
            let w = (s * (phi(sp, k) - phi_max)).exp()
                * (grid.time_weight(k) * grid.space_weight(sp)).sqrt();
            let lap: Vec<(usize, f64)> = (0..d)
                .flat_map(|ax| grid.second_derivative_at(sp, ax).iter().collect::<Vec<_>>())
                .collect();

            row.clear();
            row.extend(time.iter().map(|(q, c)| (grid.index(sp, q), w * c)));
            row.extend(
                lap.iter()
                    .map(|&(q, c)| (grid.index(q, k), w * system.a1.values()[i] * c)),
            );
            for ax in 0..d {
                let bc = system.b1.components[ax].values()[i];
                row.extend(
                    grid.first_derivative_at(sp, ax)
                        .iter()
                        .map(|(q, c)| (grid.index(q, k), w * bc * c)),
                );
            }
            row.push((i, w * system.c1.values()[i]));
            a.push_row(row.iter().copied());
            b.push(w * df.values()[i]);

            row.clear();
            row.extend(time.iter().map(|(q, c)| (n + grid.index(sp, q), w * c)));
            row.extend(
                lap.iter()
                    .map(|&(q, c)| (n + grid.index(q, k), -w * system.a2.values()[i] * c)),
            );
            row.extend(
                lap.iter()
                    .map(|&(q, c)| (grid.index(q, k), -w * system.e.values()[i] * c)),
            );
            for ax in 0..d {
                let bc = system.b2.components[ax].values()[i];
                let gc = system.g.components[ax].values()[i];
                for (q, c) in grid.first_derivative_at(sp, ax).iter() {
                    row.push((n + grid.index(q, k), w * bc * c));
                    row.push((grid.index(q, k), -w * gc * c));
                }
            }
            row.push((n + i, w * system.c2.values()[i]));
            a.push_row(row.iter().copied());
            b.push(w * dg.values()[i]);
        }
    }

    for (q, node) in cauchy.gamma_nodes.iter().enumerate() {
        let axis = node.face.axis();
        let sign = if node.face.is_upper() { 1.0 } else { -1.0 };
        let stencil = grid.first_derivative_at(node.space, axis);
        for k in 0..grid.nt() {
            let w = (rho * grid.time_weight(k) * node.weight).sqrt();
            for (comp, offset) in cauchy.components.iter().take(2).zip([0, n]) {
                a.push_row([(offset + grid.index(node.space, k), w)]);
                b.push(w * comp.gamma_value[k][q]);
                a.push_row(
                    stencil
                        .iter()
                        .map(|(p, c)| (offset + grid.index(p, k), w * sign * c)),
                );
                b.push(w * comp.gamma_normal[k][q]);
            }
        }
    }

    let out = cgnr(
        &a,
        &b,
        CgOptions {
            rtol: opts.rtol,
            max_iter: opts.max_iter,
        },
    )?;
    let residual = a.matvec(&out.x);
    let functional = residual
        .iter()
        .zip(&b)
        .map(|(r, bb)| (r - bb).powi(2))
        .sum();
    let y = Field::from_vec(grid, out.x[..n].to_vec())?.with_role(Role::Y);
    let z = Field::from_vec(grid, out.x[n..].to_vec())?.with_role(Role::Z);
    let (line1, line2) = system_residuals(grid, system, &y, &z, df, dg);
    let pair = DifferencePair {
        y,
        z,
        df: df.clone(),
        dg: dg.clone(),
        line1,
        line2,
        relative_residual: f64::NAN,
        input_residuals: [f64::NAN; 2],
        c0: super::pair::LowerOrderConstants {
            r1: f64::NAN,
            r2: f64::NAN,
            r3: f64::NAN,
        },
    };
    Ok(Reconstruction {
        pair,
        functional,
        iterations: out.iterations,
        history: out.history,
    })
}

/// Node-wise residuals of the linearized system.
pub fn system_residuals(
    grid: &SpaceTimeGrid,
    sys: &LinearizedSystem,
    y: &Field,
    z: &Field,
    df: &Field,
    dg: &Field,
) -> (Field, Field) {
    let (gy, gz) = (gradient(grid, y), gradient(grid, z));
    let lap_y = laplacian(grid, y);
    let dt = |f: &Field| crate::discretization::dt(grid, f);
    let l1 = dt(y)
        .add(&sys.a1.mul(&lap_y))
        .add(&sys.b1.dot(&gy))
        .add(&sys.c1.mul(y))
        .sub(df);
    let l2 = dt(z)
        .sub(&sys.a2.mul(&laplacian(grid, z)))
        .add(&sys.b2.dot(&gz))
        .add(&sys.c2.mul(z))
        .sub(&sys.e.mul(&lap_y))
        .sub(&sys.g.dot(&gy))
        .sub(dg);
    (l1.with_role(Role::Residual), l2.with_role(Role::Residual))
}
