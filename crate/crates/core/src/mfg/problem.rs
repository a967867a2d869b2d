use crate::discretization::{
    dt, gradient, laplacian, partial, Field, Role, SpaceTimeGrid, VectorField,
};
use crate::error::{Error, Result};

/// Coefficients of the coupled system, sampled on the grid.
#[derive(Debug, Clone)]
pub struct MFGCoefficients {
    pub a1: Field,
    pub a2: Field,
    pub kappa: Field,
    pub h: Field,
    /// Bound used for the lower-order residuals.
    pub c0_estimate: f64,
}

impl MFGCoefficients {
    /// Constant coefficients.
    pub fn constant(grid: &SpaceTimeGrid, a1: f64, a2: f64, kappa: f64, h: f64) -> Result<Self> {
        let c = |v: f64| Field::constant(grid, v).with_role(Role::Coefficient);
        Self::new(c(a1), c(a2), c(kappa), c(h))
    }

    pub fn new(a1: Field, a2: Field, kappa: Field, h: Field) -> Result<Self> {
        if !(a1.min() > 0.0) {
            return Err(Error::NonPositiveCoefficient {
                name: "a1",
                min: a1.min(),
            });
        }
        if !(a2.min() > 0.0) {
            return Err(Error::NonPositiveCoefficient {
                name: "a2",
                min: a2.min(),
            });
        }
        let c0_estimate = kappa.max_abs().max(h.max_abs()).max(1.0);
        Ok(Self {
            a1,
            a2,
            kappa,
            h,
            c0_estimate,
        })
    }
}

/// The coupled forward-backward problem on one grid.
///
/// `u_data` and `v_data` are full fields of which only the lateral boundary
/// values, the terminal level of `u` and the initial level of `v` are read.
#[derive(Debug, Clone)]
pub struct MFGProblem {
    pub grid: SpaceTimeGrid,
    pub coeffs: MFGCoefficients,
    pub f: Field,
    pub g: Field,
    pub u_data: Field,
    pub v_data: Field,
}

impl MFGProblem {
    pub fn new(
        grid: SpaceTimeGrid,
        coeffs: MFGCoefficients,
        f: Field,
        g: Field,
        u_data: Field,
        v_data: Field,
    ) -> Result<Self> {
        let n = grid.n_nodes();
        for field in [
            &coeffs.a1,
            &coeffs.a2,
            &coeffs.kappa,
            &coeffs.h,
            &f,
            &g,
            &u_data,
            &v_data,
        ] {
            if field.len() != n {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    got: field.len(),
                });
            }
        }
        Ok(Self {
            grid,
            coeffs,
            f,
            g,
            u_data,
            v_data,
        })
    }

    /// Problem with all sources, data and `kappa`, `h` set to zero.
    pub fn zero(grid: SpaceTimeGrid) -> Result<Self> {
        let coeffs = MFGCoefficients::constant(&grid, 1.0, 1.0, 0.0, 0.0)?;
        let z = Field::zeros(&grid);
        Self::new(grid, coeffs, z.clone(), z.clone(), z.clone(), z)
    }
}

/// Lower-order term `R(x, t, f)` of `P_k`, given `f` and its gradient.
pub trait LowerOrder {
    fn eval(&self, grid: &SpaceTimeGrid, f: &Field, grad: &VectorField) -> Field;
}

/// `R = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoLowerOrder;

impl LowerOrder for NoLowerOrder {
    fn eval(&self, grid: &SpaceTimeGrid, _: &Field, _: &VectorField) -> Field {
        Field::zeros(grid)
    }
}

/// `R = b . grad f + c f`.
#[derive(Debug, Clone)]
pub struct LinearLowerOrder {
    pub b: VectorField,
    pub c: Field,
}

impl LowerOrder for LinearLowerOrder {
    fn eval(&self, _: &SpaceTimeGrid, f: &Field, grad: &VectorField) -> Field {
        self.b.dot(grad).add(&self.c.mul(f))
    }
}

impl<F: Fn(&SpaceTimeGrid, &Field, &VectorField) -> Field> LowerOrder for F {
    fn eval(&self, grid: &SpaceTimeGrid, f: &Field, grad: &VectorField) -> Field {
        self(grid, f, grad)
    }
}

/// Result of applying `P_k`.
#[derive(Debug, Clone)]
pub struct PApplied {
    pub value: Field,
    /// `max |R| / (|f| + |grad f|)` over nodes where the denominator is
    /// positive; infinite if `R != 0` where `f` and `grad f` vanish.
    pub c0_ratio: f64,
}

/// `P_k f = dt f + (-1)^k a lap f + R(f)`.
pub fn apply_p(
    k: u8,
    grid: &SpaceTimeGrid,
    a: &Field,
    f: &Field,
    lower: &dyn LowerOrder,
) -> Result<PApplied> {
    let sign = match k {
        1 => -1.0,
        2 => 1.0,
        _ => return Err(Error::InvalidDirection(k)),
    };
    let grad = gradient(grid, f);
    let r = lower.eval(grid, f, &grad);
    let value = dt(grid, f)
        .add(&a.mul(&laplacian(grid, f)).scale(sign))
        .add(&r);
    Ok(PApplied {
        c0_ratio: c0_ratio(&r, f, &grad),
        value,
    })
}

/// `max |r| / (|f| + |grad f|)`.
pub fn c0_ratio(r: &Field, f: &Field, grad: &VectorField) -> f64 {
    let gn = grad.norm_sq();
    let mut worst: f64 = 0.0;
    for ((rv, fv), g2) in r.values().iter().zip(f.values()).zip(gn.values()) {
        let den = fv.abs() + g2.sqrt();
        if den > 0.0 {
            worst = worst.max(rv.abs() / den);
        } else if rv.abs() > 0.0 {
            return f64::INFINITY;
        }
    }
    worst
}

/// Discrete pieces of `lap(a2 v)` and `div(kappa v grad u)` by the product
/// rule: returns `(grad a2, lap a2, kappa grad u)`.
pub(crate) struct TransportPieces {
    pub grad_a2: VectorField,
    pub lap_a2: Field,
    pub q: VectorField,
}

pub(crate) fn transport_pieces(
    grid: &SpaceTimeGrid,
    coeffs: &MFGCoefficients,
    u: &Field,
) -> TransportPieces {
    TransportPieces {
        grad_a2: gradient(grid, &coeffs.a2),
        lap_a2: laplacian(grid, &coeffs.a2),
        q: gradient(grid, u).scale_by(&coeffs.kappa),
    }
}

/// Node-wise residual of the `u` equation:
/// `dt u + a1 lap u - kappa |grad u|^2 / 2 - h u - F`.
pub fn residual_u(problem: &MFGProblem, u: &Field) -> Field {
    let (grid, c) = (&problem.grid, &problem.coeffs);
    let g2 = gradient(grid, u).norm_sq();
    dt(grid, u)
        .add(&c.a1.mul(&laplacian(grid, u)))
        .sub(&c.kappa.mul(&g2).scale(0.5))
        .sub(&c.h.mul(u))
        .sub(&problem.f)
        .with_role(Role::Residual)
}

/// Node-wise residual of the `v` equation:
/// `dt v - lap(a2 v) - div(kappa v grad u) - G`.
pub fn residual_v(problem: &MFGProblem, u: &Field, v: &Field) -> Field {
    let (grid, c) = (&problem.grid, &problem.coeffs);
    let p = transport_pieces(grid, c, u);
    let grad_v = gradient(grid, v);
    let lap_a2v =
        c.a2.mul(&laplacian(grid, v))
            .add(&p.grad_a2.dot(&grad_v).scale(2.0))
            .add(&p.lap_a2.mul(v));
    let mut div = Field::zeros(grid);
    for (axis, q) in p.q.components.iter().enumerate() {
        div = div.add(&partial(grid, &q.mul(v), axis));
    }
    dt(grid, v)
        .sub(&lap_a2v)
        .sub(&div)
        .sub(&problem.g)
        .with_role(Role::Residual)
}

/// Discrete `L2(Q_I)` norm over interior spatial nodes.
pub fn interior_l2(grid: &SpaceTimeGrid, f: &Field) -> f64 {
    let mut acc = 0.0;
    for k in 0..grid.nt() {
        let wt = grid.time_weight(k);
        for s in 0..grid.n_space() {
            if !grid.is_boundary(s) {
                acc += wt * grid.space_weight(s) * f.at(grid, s, k).powi(2);
            }
        }
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::GridDims;
    use crate::geometry::{DomainSpec, Face, WeightConfig, WeightParams};
    use std::f64::consts::PI;

    fn grid(n: usize, nt: usize) -> SpaceTimeGrid {
        let spec = DomainSpec::interval(1.0, Face::Left, 0.5);
        let cfg = WeightConfig::for_domain(&spec, &WeightParams::default()).unwrap();
        SpaceTimeGrid::new(&spec, GridDims::new_1d(n, nt), &cfg).unwrap()
    }

    #[test]
    fn p_of_zero_is_zero() {
        let g = grid(9, 9);
        let zero = Field::zeros(&g);
        let lower = LinearLowerOrder {
            b: VectorField {
                components: vec![Field::constant(&g, 2.0)],
            },
            c: Field::constant(&g, -1.0),
        };
        for k in [1, 2] {
            let p = apply_p(k, &g, &Field::constant(&g, 1.0), &zero, &lower).unwrap();
            assert_eq!(p.value.max_abs(), 0.0);
            assert_eq!(p.c0_ratio, 0.0);
        }
    }

    #[test]
    fn p_of_time_is_one() {
        let g = grid(9, 9);
        let f = Field::from_fn(&g, |_, t| t);
        for k in [1, 2] {
            let p = apply_p(k, &g, &Field::constant(&g, 1.0), &f, &NoLowerOrder).unwrap();
            assert!(p.value.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn invalid_direction() {
        let g = grid(5, 5);
        let f = Field::zeros(&g);
        assert!(matches!(
            apply_p(3, &g, &f, &f, &NoLowerOrder),
            Err(Error::InvalidDirection(3))
        ));
    }

    #[test]
    fn p1_manufactured_converges() {
        // Oracle: with P_1 = dt - lap and f = e^{-t} sin(pi x),
        // P_1 f = (pi^2 - 1) e^{-t} sin(pi x).
        let err = |n: usize| {
            let g = grid(n, n);
            let f = Field::from_fn(&g, |x, t| (-t).exp() * (PI * x[0]).sin());
            let p = apply_p(1, &g, &Field::constant(&g, 1.0), &f, &NoLowerOrder).unwrap();
            let exact = Field::from_fn(&g, |x, t| (PI * PI - 1.0) * (-t).exp() * (PI * x[0]).sin());
            let mut worst: f64 = 0.0;
            for k in 1..g.nt() - 1 {
                for s in 1..g.n_space() - 1 {
                    worst = worst.max((p.value.at(&g, s, k) - exact.at(&g, s, k)).abs());
                }
            }
            worst
        };
        let ratio = err(33) / err(65);
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
    }

    #[test]
    fn measured_c0_of_linear_lower_order() {
        let g = grid(9, 5);
        let f = Field::from_fn(&g, |x, t| 1.0 + x[0] * t);
        let lower = LinearLowerOrder {
            b: VectorField {
                components: vec![Field::constant(&g, 3.0)],
            },
            c: Field::constant(&g, 0.5),
        };
        let p = apply_p(2, &g, &Field::constant(&g, 1.0), &f, &lower).unwrap();
        assert!(p.c0_ratio <= 3.0 + 1e-12 && p.c0_ratio > 0.5);
    }

    #[test]
    fn non_positive_diffusion_is_rejected() {
        let g = grid(5, 5);
        let err = MFGCoefficients::constant(&g, 0.0, 1.0, 0.0, 0.0).unwrap_err();
        assert!(matches!(
            err,
            Error::NonPositiveCoefficient { name: "a1", .. }
        ));
    }
}
