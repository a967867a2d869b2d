use serde::{Deserialize, Serialize};

use crate::discretization::{
    dt, gradient, integrate, laplacian, Field, LogScaled, Region, SpaceTimeGrid, TimeEnd,
    VectorField, Weight,
};
use crate::error::{Error, Result};
use crate::geometry::WeightConfig;

/// Knobs of the boundary functional `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFunctionalParams {
    /// Constant `C` in the `exp(C s)` factor of the first summand.
    pub c_b: f64,
    /// Which of the three summands are included.
    pub include: [bool; 3],
    /// Weight the second summand by `exp(2 s phi)` instead of `exp(2 s)`.
    pub complement_phi_weighted: bool,
}

impl Default for BoundaryFunctionalParams {
    fn default() -> Self {
        Self {
            c_b: 0.0,
            include: [true; 3],
            complement_phi_weighted: false,
        }
    }
}

impl BoundaryFunctionalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_b >= 0.0) {
            return Err(Error::Config(format!(
                "C_B must be non-negative, got {}",
                self.c_b
            )));
        }
        Ok(())
    }
}

/// A field with the derivatives used by the estimates, computed once.
#[derive(Debug, Clone)]
pub struct FieldJets {
    pub value: Field,
    pub dt: Field,
    pub grad: VectorField,
    pub lap: Field,
}

impl FieldJets {
    pub fn new(grid: &SpaceTimeGrid, f: &Field) -> Result<Self> {
        if f.len() != grid.n_nodes() {
            return Err(Error::ShapeMismatch {
                expected: grid.n_nodes(),
                got: f.len(),
            });
        }
        Ok(Self {
            value: f.clone(),
            dt: dt(grid, f),
            grad: gradient(grid, f),
            lap: laplacian(grid, f),
        })
    }

    #[inline]
    pub(crate) fn grad_sq(&self, i: usize) -> f64 {
        self.grad
            .components
            .iter()
            .map(|c| c.values()[i].powi(2))
            .sum()
    }
}

/// The three summands of `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BTerms {
    /// `exp(C_B s) |f|^2_{H^1(Gamma x I)}`
    pub gamma: LogScaled,
    /// `s^3 int_{(dOmega \ Gamma) x I} (|f|^2 + |grad_{x,t} f|^2) exp(2s)`
    pub complement: LogScaled,
    /// `s^2 int_Omega (|f|^2 + |grad f|^2)` at both time ends, weighted by
    /// `exp(2 s phi(x, t0 - delta))`
    pub slices: LogScaled,
}

impl BTerms {
    pub const ZERO: BTerms = BTerms {
        gamma: LogScaled::ZERO,
        complement: LogScaled::ZERO,
        slices: LogScaled::ZERO,
    };

    pub fn total(&self) -> LogScaled {
        self.gamma.add(self.complement).add(self.slices)
    }

    pub fn add(&self, o: &BTerms) -> BTerms {
        BTerms {
            gamma: self.gamma.add(o.gamma),
            complement: self.complement.add(o.complement),
            slices: self.slices.add(o.slices),
        }
    }

    pub fn scale(&self, c: f64) -> BTerms {
        BTerms {
            gamma: self.gamma.scale(c),
            complement: self.complement.scale(c),
            slices: self.slices.scale(c),
        }
    }
}

/// `B(f)` at parameter `s`.
pub fn eval_b_jets(
    grid: &SpaceTimeGrid,
    jets: &FieldJets,
    s: f64,
    cfg: &WeightConfig,
    params: &BoundaryFunctionalParams,
) -> Result<BTerms> {
    params.validate()?;
    let f = &jets.value;
    let mut out = BTerms::ZERO;

    if params.include[0] {
        let mut acc = 0.0;
        for node in grid.gamma_nodes() {
            let tangential = 1 - node.face.axis();
            for k in 0..grid.nt() {
                let i = grid.index(node.space, k);
                let mut v = f.values()[i].powi(2) + jets.dt.values()[i].powi(2);
                if grid.dimension() == 2 {
                    v += jets.grad.components[tangential].values()[i].powi(2);
                }
                acc += grid.time_weight(k) * node.weight * v;
            }
        }
        out.gamma = LogScaled::new(acc, params.c_b * s);
    }

    if params.include[1] {
        let weight = if params.complement_phi_weighted {
            Weight::Phi
        } else {
            Weight::Unit
        };
        let integral = integrate(grid, cfg, Region::Complement, s, weight, |sp, k| {
            let i = grid.index(sp, k);
            f.values()[i].powi(2) + jets.grad_sq(i) + jets.dt.values()[i].powi(2)
        })?;
        out.complement = integral.scale(s.powi(3));
    }

    if params.include[2] {
        let slice = |end: TimeEnd| {
            integrate(
                grid,
                cfg,
                Region::Slice(end),
                s,
                Weight::PhiAtStart,
                |sp, k| {
                    let i = grid.index(sp, k);
                    f.values()[i].powi(2) + jets.grad_sq(i)
                },
            )
        };
        out.slices = slice(TimeEnd::Start)?
            .add(slice(TimeEnd::End)?)
            .scale(s * s);
    }
    Ok(out)
}

pub fn eval_b(
    grid: &SpaceTimeGrid,
    f: &Field,
    s: f64,
    cfg: &WeightConfig,
    params: &BoundaryFunctionalParams,
) -> Result<BTerms> {
    eval_b_jets(grid, &FieldJets::new(grid, f)?, s, cfg, params)
}
