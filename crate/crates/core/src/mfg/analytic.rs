//! Closed-form space-time functions carried together with the derivatives
//! the MFG operators need.

use std::sync::Arc;

use crate::discretization::{Field, SpaceTimeGrid};
use crate::geometry::Point;

/// Value, time derivative, spatial gradient and Laplacian at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub dt: f64,
    pub grad: [f64; 2],
    pub lap: f64,
}

impl Jet {
    pub const fn constant(c: f64) -> Self {
        Jet {
            value: c,
            dt: 0.0,
            grad: [0.0; 2],
            lap: 0.0,
        }
    }

    pub fn add(self, o: Jet) -> Jet {
        Jet {
            value: self.value + o.value,
            dt: self.dt + o.dt,
            grad: [self.grad[0] + o.grad[0], self.grad[1] + o.grad[1]],
            lap: self.lap + o.lap,
        }
    }

    pub fn scale(self, c: f64) -> Jet {
        Jet {
            value: c * self.value,
            dt: c * self.dt,
            grad: [c * self.grad[0], c * self.grad[1]],
            lap: c * self.lap,
        }
    }

    /// Product rule, including `lap(fg) = f lap g + g lap f + 2 grad f . grad g`.
    pub fn mul(self, o: Jet) -> Jet {
        Jet {
            value: self.value * o.value,
            dt: self.dt * o.value + self.value * o.dt,
            grad: [
                self.grad[0] * o.value + self.value * o.grad[0],
                self.grad[1] * o.value + self.value * o.grad[1],
            ],
            lap: self.lap * o.value + self.value * o.lap + 2.0 * self.dot_grad(&o),
        }
    }

    pub fn dot_grad(&self, o: &Jet) -> f64 {
        self.grad[0] * o.grad[0] + self.grad[1] * o.grad[1]
    }
}

/// A closed-form function `(x, t) -> Jet`.
#[derive(Clone)]
pub struct Closed(Arc<dyn Fn(Point, f64) -> Jet + Send + Sync>);

impl std::fmt::Debug for Closed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Closed(..)")
    }
}

impl Closed {
    pub fn new(f: impl Fn(Point, f64) -> Jet + Send + Sync + 'static) -> Self {
        Closed(Arc::new(f))
    }

    #[inline]
    pub fn jet(&self, x: Point, t: f64) -> Jet {
        (self.0)(x, t)
    }

    pub fn constant(c: f64) -> Self {
        Closed::new(move |_, _| Jet::constant(c))
    }

    /// `sin(k x_axis)`
    pub fn sin(axis: usize, k: f64) -> Self {
        Closed::new(move |x, _| {
            let (s, c) = (k * x[axis]).sin_cos();
            let mut grad = [0.0; 2];
            grad[axis] = k * c;
            Jet {
                value: s,
                dt: 0.0,
                grad,
                lap: -k * k * s,
            }
        })
    }

    /// `cos(k x_axis)`
    pub fn cos(axis: usize, k: f64) -> Self {
        Closed::new(move |x, _| {
            let (s, c) = (k * x[axis]).sin_cos();
            let mut grad = [0.0; 2];
            grad[axis] = -k * s;
            Jet {
                value: c,
                dt: 0.0,
                grad,
                lap: -k * k * c,
            }
        })
    }

    /// `a + b x_axis`
    pub fn affine(axis: usize, a: f64, b: f64) -> Self {
        Closed::new(move |x, _| {
            let mut grad = [0.0; 2];
            grad[axis] = b;
            Jet {
                value: a + b * x[axis],
                dt: 0.0,
                grad,
                lap: 0.0,
            }
        })
    }

    /// `exp(rate (t - t0))`
    pub fn exp_time(rate: f64, t0: f64) -> Self {
        Closed::new(move |_, t| {
            let e = (rate * (t - t0)).exp();
            Jet {
                value: e,
                dt: rate * e,
                grad: [0.0; 2],
                lap: 0.0,
            }
        })
    }

    /// `((x_axis - c)_+)^p` for `p >= 3`; `C^{p-1}` across `x_axis = c`.
    pub fn ramp(axis: usize, c: f64, p: i32) -> Self {
        Closed::new(move |x, _| {
            let q = x[axis] - c;
            if q <= 0.0 {
                return Jet::default();
            }
            let pf = p as f64;
            let mut grad = [0.0; 2];
            grad[axis] = pf * q.powi(p - 1);
            Jet {
                value: q.powi(p),
                dt: 0.0,
                grad,
                lap: pf * (pf - 1.0) * q.powi(p - 2),
            }
        })
    }

    pub fn mul(&self, o: &Closed) -> Closed {
        let (a, b) = (self.clone(), o.clone());
        Closed::new(move |x, t| a.jet(x, t).mul(b.jet(x, t)))
    }

    pub fn add(&self, o: &Closed) -> Closed {
        let (a, b) = (self.clone(), o.clone());
        Closed::new(move |x, t| a.jet(x, t).add(b.jet(x, t)))
    }

    pub fn scale(&self, c: f64) -> Closed {
        let a = self.clone();
        Closed::new(move |x, t| a.jet(x, t).scale(c))
    }

    pub fn sample(&self, grid: &SpaceTimeGrid) -> Field {
        Field::from_fn(grid, |x, t| self.jet(x, t).value)
    }

    pub fn sample_with(&self, grid: &SpaceTimeGrid, f: impl Fn(&Jet) -> f64) -> Field {
        Field::from_fn(grid, |x, t| f(&self.jet(x, t)))
    }
}
