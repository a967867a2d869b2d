//! Finite-difference operators on [`SpaceTimeGrid`] fields.
//!
//! Space: second-order central differences inside, second-order one-sided
//! differences on the boundary (3-point first derivative, 4-point second
//! derivative). Time: central inside, first-order one-sided at the two ends.
//! The same coefficient tables are used for applying operators to fields and
//! for assembling sparse systems, so both views agree exactly.

use super::field::{Field, VectorField};
use super::grid::SpaceTimeGrid;

/// Up to four `(index, coefficient)` pairs along one axis.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    idx: [usize; 4],
    coef: [f64; 4],
    len: usize,
}

impl Stencil {
    fn from(pairs: &[(usize, f64)]) -> Self {
        let mut s = Stencil {
            idx: [0; 4],
            coef: [0.0; 4],
            len: pairs.len(),
        };
        for (q, &(i, c)) in pairs.iter().enumerate() {
            s.idx[q] = i;
            s.coef[q] = c;
        }
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.idx[..self.len]
            .iter()
            .copied()
            .zip(self.coef[..self.len].iter().copied())
    }

    #[inline]
    pub fn apply(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.iter().map(|(i, c)| c * f(i)).sum()
    }
}

/// First derivative at index `i` of an axis with `n >= 3` nodes.
pub fn first_derivative(i: usize, n: usize, h: f64) -> Stencil {
    let c = 0.5 / h;
    if i == 0 {
        Stencil::from(&[(0, -3.0 * c), (1, 4.0 * c), (2, -c)])
    } else if i == n - 1 {
        Stencil::from(&[(n - 1, 3.0 * c), (n - 2, -4.0 * c), (n - 3, c)])
    } else {
        Stencil::from(&[(i - 1, -c), (i + 1, c)])
    }
}

/// Second derivative at index `i` of an axis with `n >= 3` nodes.
pub fn second_derivative(i: usize, n: usize, h: f64) -> Stencil {
    let c = 1.0 / (h * h);
    if i > 0 && i < n - 1 {
        Stencil::from(&[(i - 1, c), (i, -2.0 * c), (i + 1, c)])
    } else if n == 3 {
        Stencil::from(&[(0, c), (1, -2.0 * c), (2, c)])
    } else if i == 0 {
        Stencil::from(&[(0, 2.0 * c), (1, -5.0 * c), (2, 4.0 * c), (3, -c)])
    } else {
        Stencil::from(&[
            (n - 1, 2.0 * c),
            (n - 2, -5.0 * c),
            (n - 3, 4.0 * c),
            (n - 4, -c),
        ])
    }
}

/// Time derivative at level `k` of `nt` levels.
pub fn time_derivative(k: usize, nt: usize, tau: f64) -> Stencil {
    if k == 0 {
        Stencil::from(&[(0, -1.0 / tau), (1, 1.0 / tau)])
    } else if k == nt - 1 {
        Stencil::from(&[(nt - 1, 1.0 / tau), (nt - 2, -1.0 / tau)])
    } else {
        Stencil::from(&[(k - 1, -0.5 / tau), (k + 1, 0.5 / tau)])
    }
}

impl SpaceTimeGrid {
    /// Spatial neighbour index of node `s` after replacing its coordinate on
    /// `axis` by `q`.
    #[inline]
    pub fn along(&self, s: usize, axis: usize, q: usize) -> usize {
        let (i, j) = self.space_ij(s);
        if axis == 0 {
            self.space_index(q, j)
        } else {
            self.space_index(i, q)
        }
    }

    #[inline]
    pub fn axis_position(&self, s: usize, axis: usize) -> usize {
        let (i, j) = self.space_ij(s);
        if axis == 0 {
            i
        } else {
            j
        }
    }

    pub fn first_derivative_at(&self, s: usize, axis: usize) -> Stencil {
        let mut st = first_derivative(self.axis_position(s, axis), self.n()[axis], self.h()[axis]);
        for q in 0..st.len {
            st.idx[q] = self.along(s, axis, st.idx[q]);
        }
        st
    }

    pub fn second_derivative_at(&self, s: usize, axis: usize) -> Stencil {
        let mut st = second_derivative(self.axis_position(s, axis), self.n()[axis], self.h()[axis]);
        for q in 0..st.len {
            st.idx[q] = self.along(s, axis, st.idx[q]);
        }
        st
    }

    pub fn time_derivative_at(&self, k: usize) -> Stencil {
        time_derivative(k, self.nt(), self.tau())
    }
}

fn spatial_op(grid: &SpaceTimeGrid, f: &Field, stencil: impl Fn(usize) -> Stencil) -> Field {
    assert_eq!(f.len(), grid.n_nodes(), "field does not match grid");
    let ns = grid.n_space();
    let tables: Vec<Stencil> = (0..ns).map(stencil).collect();
    let mut out = Field::zeros(grid);
    for k in 0..grid.nt() {
        let level = f.level(grid, k);
        let dst = out.level_mut(grid, k);
        for (s, st) in tables.iter().enumerate() {
            dst[s] = st.apply(|q| level[q]);
        }
    }
    out
}

/// Partial derivative along a spatial axis.
pub fn partial(grid: &SpaceTimeGrid, f: &Field, axis: usize) -> Field {
    spatial_op(grid, f, |s| grid.first_derivative_at(s, axis))
}

pub fn gradient(grid: &SpaceTimeGrid, f: &Field) -> VectorField {
    VectorField {
        components: (0..grid.dimension()).map(|a| partial(grid, f, a)).collect(),
    }
}

pub fn laplacian(grid: &SpaceTimeGrid, f: &Field) -> Field {
    let mut out = spatial_op(grid, f, |s| grid.second_derivative_at(s, 0));
    if grid.dimension() == 2 {
        out = out.add(&spatial_op(grid, f, |s| grid.second_derivative_at(s, 1)));
    }
    out
}

pub fn divergence(grid: &SpaceTimeGrid, v: &VectorField) -> Field {
    let mut out = partial(grid, &v.components[0], 0);
    for (axis, c) in v.components.iter().enumerate().skip(1) {
        out = out.add(&partial(grid, c, axis));
    }
    out
}

pub fn dt(grid: &SpaceTimeGrid, f: &Field) -> Field {
    assert_eq!(f.len(), grid.n_nodes(), "field does not match grid");
    let ns = grid.n_space();
    let mut out = Field::zeros(grid);
    for k in 0..grid.nt() {
        let st = grid.time_derivative_at(k);
        for s in 0..ns {
            out.values_mut()[grid.index(s, k)] = st.apply(|q| f.at(grid, s, q));
        }
    }
    out
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

    fn grid_2d(n: usize, nt: usize) -> SpaceTimeGrid {
        let spec = DomainSpec::rectangle(1.0, 1.0, &[Face::Left, Face::Bottom, Face::Top], 0.5);
        let cfg = WeightConfig::for_domain(&spec, &WeightParams::default()).unwrap();
        SpaceTimeGrid::new(&spec, GridDims::new_2d(n, n, nt), &cfg).unwrap()
    }

    #[test]
    fn quadratic_laplacian_is_exact_everywhere() {
        for g in [grid(9, 5), grid(3, 3)] {
            let f = Field::from_fn(&g, |x, _| x[0] * x[0]);
            let lap = laplacian(&g, &f);
            for v in lap.values() {
                assert!((v - 2.0).abs() < 1e-11, "{v}");
            }
        }
        let g = grid_2d(7, 3);
        let f = Field::from_fn(&g, |x, _| {
            x[0] * x[0] - 3.0 * x[0] * x[1] + 0.5 * x[1] * x[1]
        });
        for v in laplacian(&g, &f).values() {
            assert!((v - 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let g = grid_2d(5, 4);
        let f = Field::constant(&g, 3.5);
        for c in gradient(&g, &f).components {
            assert!(c.max_abs() < 1e-13);
        }
    }

    #[test]
    fn quadratic_gradient_is_exact_and_linear_dt_is_exact() {
        let g = grid(6, 7);
        let f = Field::from_fn(&g, |x, t| 2.0 * x[0] * x[0] - x[0] + 3.0 * t);
        let gx = partial(&g, &f, 0);
        let ft = dt(&g, &f);
        for s in 0..g.n_space() {
            let x = g.point(s)[0];
            for k in 0..g.nt() {
                assert!((gx.at(&g, s, k) - (4.0 * x - 1.0)).abs() < 1e-12);
                assert!((ft.at(&g, s, k) - 3.0).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn divergence_of_linear_vector_field() {
        let g = grid_2d(6, 3);
        let v = VectorField {
            components: vec![
                Field::from_fn(&g, |x, _| 2.0 * x[0] + x[1]),
                Field::from_fn(&g, |x, _| -5.0 * x[1]),
            ],
        };
        for d in divergence(&g, &v).values() {
            assert!((d + 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_of_sine_converges_at_second_order() {
        // Oracle: analytic -pi^2 sin(pi x) at interior nodes.
        let err = |n: usize| {
            let g = grid(n, 3);
            let f = Field::from_fn(&g, |x, _| (PI * x[0]).sin());
            let lap = laplacian(&g, &f);
            (1..n - 1)
                .map(|s| (lap.at(&g, s, 0) + PI * PI * (PI * g.point(s)[0]).sin()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (err(17), err(33), err(65));
        let (r1, r2) = (e1 / e2, e2 / e3);
        assert!(
            (r1 - 4.0).abs() < 0.1 && (r2 - 4.0).abs() < 0.05,
            "ratios {r1} {r2}"
        );
    }
}
