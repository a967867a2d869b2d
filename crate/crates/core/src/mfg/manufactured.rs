//! Manufactured solutions: closed-form `(u*, v*)` and coefficients, with
//! the sources obtained by substituting them into the system.

use std::f64::consts::PI;

use super::analytic::{Closed, Jet};
use super::problem::{MFGCoefficients, MFGProblem};
use crate::discretization::{Field, Role, SpaceTimeGrid};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Identifiers of the built-in cases.
pub const CATALOGUE: &[&str] = &[
    "zero",
    "1d-linear",
    "1d-nonlinear",
    "1d-varying-a2",
    "2d-smooth",
];

#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub id: String,
    pub u: Closed,
    pub v: Closed,
    pub a1: Closed,
    pub a2: Closed,
    pub kappa: Closed,
    pub h: Closed,
}

/// A sampled problem together with its exact solution.
#[derive(Debug, Clone)]
pub struct Manufactured {
    pub problem: MFGProblem,
    pub u_exact: Field,
    pub v_exact: Field,
}

/// `F = u_t + a1 lap u - kappa |grad u|^2 / 2 - h u`.
pub fn source_f(u: &Jet, a1: &Jet, kappa: &Jet, h: &Jet) -> f64 {
    u.dt + a1.value * u.lap - 0.5 * kappa.value * u.dot_grad(u) - h.value * u.value
}

/// `G = v_t - lap(a2 v) - div(kappa v grad u)`.
pub fn source_g(u: &Jet, v: &Jet, a2: &Jet, kappa: &Jet) -> f64 {
    let lap_a2v = a2.mul(*v).lap;
    let div = kappa.value * (v.dot_grad(u) + v.value * u.lap) + v.value * kappa.dot_grad(u);
    v.dt - lap_a2v - div
}

impl ManufacturedCase {
    /// Catalogue entry centred at `t0`.
    pub fn get(id: &str, t0: f64) -> Result<Self> {
        let one = Closed::constant(1.0);
        let grow = Closed::exp_time(1.0, t0);
        let decay = Closed::exp_time(-1.0, t0);
        let u1 = grow.mul(&Closed::sin(0, PI));
        let v1 = decay.mul(&Closed::cos(0, PI / 2.0));
        let case = |u: Closed, v: Closed, a2: Closed, kappa: f64| ManufacturedCase {
            id: id.to_string(),
            u,
            v,
            a1: one.clone(),
            a2,
            kappa: Closed::constant(kappa),
            h: one.clone(),
        };
        Ok(match id {
            "zero" => ManufacturedCase {
                id: id.into(),
                u: Closed::constant(0.0),
                v: Closed::constant(0.0),
                a1: one.clone(),
                a2: one.clone(),
                kappa: Closed::constant(0.0),
                h: Closed::constant(0.0),
            },
            "1d-linear" => case(u1, v1, one.clone(), 0.0),
            "1d-nonlinear" => case(u1, v1, one.clone(), 1.0),
            "1d-varying-a2" => case(u1, v1, Closed::affine(0, 1.0, 0.5), 1.0),
            "2d-smooth" => case(
                u1.mul(&Closed::sin(1, PI)),
                v1.mul(&Closed::cos(1, PI / 2.0)),
                one.clone(),
                1.0,
            ),
            _ => return Err(Error::UnknownCase(id.to_string())),
        })
    }

    /// Same coefficients, with `(u*, v*)` replaced by `(u* + du, v* + dv)`.
    pub fn perturbed(&self, du: &Closed, dv: &Closed) -> Self {
        Self {
            id: format!("{}+perturbation", self.id),
            u: self.u.add(du),
            v: self.v.add(dv),
            ..self.clone()
        }
    }

    pub fn sources(&self, x: Point, t: f64) -> (f64, f64) {
        let (u, v) = (self.u.jet(x, t), self.v.jet(x, t));
        let kappa = self.kappa.jet(x, t);
        (
            source_f(&u, &self.a1.jet(x, t), &kappa, &self.h.jet(x, t)),
            source_g(&u, &v, &self.a2.jet(x, t), &kappa),
        )
    }

    pub fn coefficients(&self, grid: &SpaceTimeGrid) -> Result<MFGCoefficients> {
        let s = |c: &Closed| c.sample(grid).with_role(Role::Coefficient);
        MFGCoefficients::new(s(&self.a1), s(&self.a2), s(&self.kappa), s(&self.h))
    }

    pub fn sample(&self, grid: &SpaceTimeGrid) -> Result<Manufactured> {
        let coeffs = self.coefficients(grid)?;
        let f = Field::from_fn(grid, |x, t| self.sources(x, t).0).with_role(Role::Source);
        let g = Field::from_fn(grid, |x, t| self.sources(x, t).1).with_role(Role::Source);
        let u_exact = self.u.sample(grid).with_role(Role::U);
        let v_exact = self.v.sample(grid).with_role(Role::V);
        let problem =
            MFGProblem::new(grid.clone(), coeffs, f, g, u_exact.clone(), v_exact.clone())?;
        Ok(Manufactured {
            problem,
            u_exact,
            v_exact,
        })
    }
}

/// Catalogue case `case_id` sampled on `grid`.
pub fn make_manufactured(case_id: &str, grid: &SpaceTimeGrid) -> Result<Manufactured> {
    ManufacturedCase::get(case_id, grid.t0())?.sample(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from a computer-algebra substitution of the closed
    // forms into both equations, at t0 = 1.
    const POINTS: [(f64, f64, f64); 3] = [(0.3, 0.7, 0.0), (0.55, 1.2, 0.0), (0.8, 1.45, 0.35)];

    #[test]
    fn sources_match_symbolic_oracle() {
        let expected: [(&str, [(f64, f64); 3]); 4] = [
            (
                "1d-linear",
                [
                    (-5.915194717718277, 1.7648917338192436),
                    (-11.906347913028664, 0.7802510468577658),
                    (-9.098105060396325, 0.2891336825307679),
                ],
            ),
            (
                "1d-nonlinear",
                [
                    (-6.850881363387785, 10.196138287321602),
                    (-12.08650544562628, 6.5241181634454835),
                    (-17.04230329264186, -1.715134357432302),
                ],
            ),
            (
                "1d-varying-a2",
                [
                    (-6.850881363387785, 11.603902232639786),
                    (-12.08650544562628, 7.862838184088688),
                    (-17.04230329264186, -0.5681027601626694),
                ],
            ),
            (
                "2d-smooth",
                [
                    (-1.7725902238118192, 4.732516471921837),
                    (-7.181702268149427, 2.0922251834099286),
                    (-23.384084660260115, 0.7129244090264538),
                ],
            ),
        ];
        for (id, values) in expected {
            let case = ManufacturedCase::get(id, 1.0).unwrap();
            for ((x, t, y), (f, g)) in POINTS.iter().zip(values) {
                let (gf, gg) = case.sources([*x, *y], *t);
                assert!(
                    (gf - f).abs() < 1e-9 * (1.0 + f.abs()),
                    "{id} F at ({x},{y},{t}): {gf} vs {f}"
                );
                assert!(
                    (gg - g).abs() < 1e-9 * (1.0 + g.abs()),
                    "{id} G at ({x},{y},{t}): {gg} vs {g}"
                );
            }
        }
    }

    #[test]
    fn nonlinear_source_carries_the_quadratic_gradient_term() {
        let lin = ManufacturedCase::get("1d-linear", 1.0).unwrap();
        let non = ManufacturedCase::get("1d-nonlinear", 1.0).unwrap();
        let (x, t) = (0.3, 1.2);
        let diff = non.sources([x, 0.0], t).0 - lin.sources([x, 0.0], t).0;
        let expected = -0.5 * (2.0f64 * (t - 1.0)).exp() * PI * PI * (PI * x).cos().powi(2);
        assert!((diff - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_case_and_unknown_case() {
        let case = ManufacturedCase::get("zero", 1.0).unwrap();
        assert_eq!(case.sources([0.4, 0.0], 1.1), (0.0, 0.0));
        assert!(matches!(
            ManufacturedCase::get("nope", 1.0),
            Err(Error::UnknownCase(_))
        ));
    }
}
