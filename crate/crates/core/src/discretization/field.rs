use serde::{Deserialize, Serialize};

use super::grid::SpaceTimeGrid;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// What a field represents; carried along for diagnostics and IO headers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    U,
    V,
    Y,
    Z,
    Source,
    Coefficient,
    Weight,
    Residual,
    #[default]
    Other,
}

/// Nodal values on a [`SpaceTimeGrid`], time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    pub role: Role,
}

impl Field {
    pub fn zeros(grid: &SpaceTimeGrid) -> Self {
        Self {
            values: vec![0.0; grid.n_nodes()],
            role: Role::Other,
        }
    }

    pub fn constant(grid: &SpaceTimeGrid, c: f64) -> Self {
        Self {
            values: vec![c; grid.n_nodes()],
            role: Role::Other,
        }
    }

    pub fn from_vec(grid: &SpaceTimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::ShapeMismatch {
                expected: grid.n_nodes(),
                got: values.len(),
            });
        }
        Ok(Self {
            values,
            role: Role::Other,
        })
    }

    /// Sample `f(x, t)` at every node.
    pub fn from_fn(grid: &SpaceTimeGrid, f: impl Fn(Point, f64) -> f64) -> Self {
        let ns = grid.n_space();
        let mut values = Vec::with_capacity(grid.n_nodes());
        for k in 0..grid.nt() {
            let t = grid.time(k);
            for s in 0..ns {
                values.push(f(grid.point(s), t));
            }
        }
        Self {
            values,
            role: Role::Other,
        }
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn at(&self, grid: &SpaceTimeGrid, s: usize, k: usize) -> f64 {
        self.values[grid.index(s, k)]
    }

    /// Values of one time level.
    pub fn level(&self, grid: &SpaceTimeGrid, k: usize) -> &[f64] {
        let ns = grid.n_space();
        &self.values[k * ns..(k + 1) * ns]
    }

    pub fn level_mut(&mut self, grid: &SpaceTimeGrid, k: usize) -> &mut [f64] {
        let ns = grid.n_space();
        &mut self.values[k * ns..(k + 1) * ns]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            role: self.role,
        }
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.len(), other.len(), "fields live on different grids");
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            role: self.role,
        }
    }

    pub fn add(&self, other: &Field) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `f(x, 2 t0 - t)`; exact on the symmetric time grid.
    pub fn time_reversed(&self, grid: &SpaceTimeGrid) -> Self {
        let nt = grid.nt();
        let mut out = self.clone();
        for k in 0..nt {
            out.level_mut(grid, k)
                .copy_from_slice(self.level(grid, nt - 1 - k));
        }
        out
    }
}

/// One [`Field`] per spatial axis.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub components: Vec<Field>,
}

impl VectorField {
    pub fn zeros(grid: &SpaceTimeGrid) -> Self {
        Self {
            components: (0..grid.dimension()).map(|_| Field::zeros(grid)).collect(),
        }
    }

    /// Squared Euclidean norm at each node.
    pub fn norm_sq(&self) -> Field {
        let mut out = self.components[0].map(|v| v * v);
        for c in &self.components[1..] {
            out = out.zip_with(c, |a, b| a + b * b);
        }
        out
    }

    pub fn dot(&self, other: &VectorField) -> Field {
        let mut out = self.components[0].mul(&other.components[0]);
        for (a, b) in self.components[1..].iter().zip(&other.components[1..]) {
            out = out.add(&a.mul(b));
        }
        out
    }

    pub fn scale_by(&self, f: &Field) -> Self {
        Self {
            components: self.components.iter().map(|c| c.mul(f)).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }
}
