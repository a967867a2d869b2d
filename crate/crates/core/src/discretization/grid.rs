use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Face, Point, WeightConfig};

/// Node counts of a space-time grid. `n2` is ignored in 1D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDims {
    pub n1: usize,
    #[serde(default = "one")]
    pub n2: usize,
    pub nt: usize,
}

fn one() -> usize {
    1
}

impl GridDims {
    pub fn new_1d(n1: usize, nt: usize) -> Self {
        Self { n1, n2: 1, nt }
    }

    pub fn new_2d(n1: usize, n2: usize, nt: usize) -> Self {
        Self { n1, n2, nt }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeKind {
    Interior,
    Gamma,
    Complement,
    Corner,
}

/// A node on a boundary face, tagged with the face it is read from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceNode {
    pub space: usize,
    pub face: Face,
    /// Trapezoid weight along the face (1 in 1D, where faces are points).
    pub weight: f64,
}

/// Uniform tensor grid on `Omega x (t0 - delta, t0 + delta)`.
///
/// Spatial nodes are numbered `j * n1 + i`; space-time nodes
/// `n * n_space + space`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    dimension: usize,
    n: [usize; 2],
    nt: usize,
    extents: [f64; 2],
    h: [f64; 2],
    tau: f64,
    t0: f64,
    delta: f64,
    gamma_faces: Vec<Face>,
    kinds: Vec<NodeKind>,
    window: Option<(usize, usize)>,
}

impl SpaceTimeGrid {
    pub fn new(spec: &DomainSpec, dims: GridDims, cfg: &WeightConfig) -> Result<Self> {
        let dimension = spec.dimension;
        let n = [dims.n1, if dimension == 2 { dims.n2 } else { 1 }];
        if dims.n1 < 3 || (dimension == 2 && dims.n2 < 3) || dims.nt < 3 {
            return Err(Error::DegenerateGrid(format!(
                "need at least 3 nodes per axis, got {dims:?} in {dimension}D"
            )));
        }
        if spec.extents.len() != dimension {
            return Err(Error::DegenerateGrid(format!(
                "extents {:?} do not match {dimension}D",
                spec.extents
            )));
        }
        let extents = [
            spec.extent(0),
            if dimension == 2 { spec.extent(1) } else { 0.0 },
        ];
        let h = [
            extents[0] / (n[0] - 1) as f64,
            if dimension == 2 {
                extents[1] / (n[1] - 1) as f64
            } else {
                1.0
            },
        ];
        if !(cfg.delta > 0.0) || h.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::DegenerateGrid("mesh widths must be positive".into()));
        }
        let tau = 2.0 * cfg.delta / (dims.nt - 1) as f64;

        let mut grid = Self {
            dimension,
            n,
            nt: dims.nt,
            extents,
            h,
            tau,
            t0: cfg.t0,
            delta: cfg.delta,
            gamma_faces: spec.gamma_faces.clone(),
            kinds: Vec::new(),
            window: None,
        };
        grid.kinds = (0..grid.n_space()).map(|s| grid.classify(s)).collect();

        let half_width = cfg.r * cfg.delta * (1.0 + 1e-12);
        let lo = (0..grid.nt).find(|&k| grid.time_offset(k).abs() <= half_width);
        grid.window = lo.map(|lo| (lo, grid.nt - 1 - lo));
        Ok(grid)
    }

    fn classify(&self, s: usize) -> NodeKind {
        let faces = self.faces_of(s);
        match faces.len() {
            0 => NodeKind::Interior,
            1 if self.gamma_faces.contains(&faces[0]) => NodeKind::Gamma,
            1 => NodeKind::Complement,
            _ => NodeKind::Corner,
        }
    }

    /// Faces a spatial node lies on.
    pub fn faces_of(&self, s: usize) -> Vec<Face> {
        let (i, j) = self.space_ij(s);
        let mut faces = Vec::with_capacity(2);
        if i == 0 {
            faces.push(Face::Left);
        }
        if i == self.n[0] - 1 {
            faces.push(Face::Right);
        }
        if self.dimension == 2 {
            if j == 0 {
                faces.push(Face::Bottom);
            }
            if j == self.n[1] - 1 {
                faces.push(Face::Top);
            }
        }
        faces
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Nodes per spatial axis (`n[1] == 1` in 1D).
    pub fn n(&self) -> [usize; 2] {
        self.n
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn n_space(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn n_nodes(&self) -> usize {
        self.n_space() * self.nt
    }

    pub fn h(&self) -> [f64; 2] {
        self.h
    }

    /// Largest spatial mesh width.
    pub fn h_max(&self) -> f64 {
        if self.dimension == 2 {
            self.h[0].max(self.h[1])
        } else {
            self.h[0]
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn extents(&self) -> [f64; 2] {
        self.extents
    }

    pub fn gamma_faces(&self) -> &[Face] {
        &self.gamma_faces
    }

    pub fn kind(&self, s: usize) -> NodeKind {
        self.kinds[s]
    }

    pub fn is_boundary(&self, s: usize) -> bool {
        self.kinds[s] != NodeKind::Interior
    }

    #[inline]
    pub fn space_ij(&self, s: usize) -> (usize, usize) {
        (s % self.n[0], s / self.n[0])
    }

    #[inline]
    pub fn space_index(&self, i: usize, j: usize) -> usize {
        j * self.n[0] + i
    }

    #[inline]
    pub fn index(&self, s: usize, k: usize) -> usize {
        k * self.n_space() + s
    }

    pub fn point(&self, s: usize) -> Point {
        let (i, j) = self.space_ij(s);
        let x = self.extents[0] * i as f64 / (self.n[0] - 1) as f64;
        let y = if self.dimension == 2 {
            self.extents[1] * j as f64 / (self.n[1] - 1) as f64
        } else {
            0.0
        };
        [x, y]
    }

    /// `t_k - t0`, exactly antisymmetric under `k -> nt - 1 - k`.
    #[inline]
    pub fn time_offset(&self, k: usize) -> f64 {
        (2.0 * k as f64 - (self.nt - 1) as f64) * self.delta / (self.nt - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + self.time_offset(k)
    }

    /// Inclusive time-index range of the window `|t - t0| <= r delta`.
    pub fn window(&self) -> Option<(usize, usize)> {
        self.window
    }

    /// Nodes on the faces in `faces`, one entry per (face, node) pair.
    pub fn face_nodes(&self, faces: &[Face]) -> Vec<FaceNode> {
        let mut out = Vec::new();
        for &face in faces {
            let axis = face.axis();
            let fixed = if face.is_upper() { self.n[axis] - 1 } else { 0 };
            if self.dimension == 1 {
                out.push(FaceNode {
                    space: fixed,
                    face,
                    weight: 1.0,
                });
                continue;
            }
            let other = 1 - axis;
            let m = self.n[other];
            for q in 0..m {
                let (i, j) = if axis == 0 { (fixed, q) } else { (q, fixed) };
                let end = q == 0 || q == m - 1;
                let weight = if end {
                    0.5 * self.h[other]
                } else {
                    self.h[other]
                };
                out.push(FaceNode {
                    space: self.space_index(i, j),
                    face,
                    weight,
                });
            }
        }
        out
    }

    pub fn gamma_nodes(&self) -> Vec<FaceNode> {
        self.face_nodes(&self.gamma_faces)
    }

    pub fn complement_faces(&self) -> Vec<Face> {
        Face::all(self.dimension)
            .iter()
            .copied()
            .filter(|f| !self.gamma_faces.contains(f))
            .collect()
    }

    pub fn complement_nodes(&self) -> Vec<FaceNode> {
        self.face_nodes(&self.complement_faces())
    }

    /// Trapezoid weight of node `i` within the inclusive index range `[lo, hi]`
    /// of an axis with spacing `step`.
    #[inline]
    pub(crate) fn trapezoid(i: usize, lo: usize, hi: usize, step: f64) -> f64 {
        if lo == hi {
            1.0
        } else if i == lo || i == hi {
            0.5 * step
        } else {
            step
        }
    }

    /// Spatial trapezoid weight over the whole domain.
    pub fn space_weight(&self, s: usize) -> f64 {
        let (i, j) = self.space_ij(s);
        let wx = Self::trapezoid(i, 0, self.n[0] - 1, self.h[0]);
        if self.dimension == 2 {
            wx * Self::trapezoid(j, 0, self.n[1] - 1, self.h[1])
        } else {
            wx
        }
    }

    pub fn time_weight(&self, k: usize) -> f64 {
        Self::trapezoid(k, 0, self.nt - 1, self.tau)
    }

    /// Inclusive index ranges `[(lo1, hi1), (lo2, hi2)]` of `Omega_eps`.
    pub fn core_ranges(&self, cfg: &WeightConfig) -> Option<[(usize, usize); 2]> {
        let eps = cfg.d0 - 1e-12 * cfg.d1.max(1.0);
        let axis = cfg.d.complement.axis();
        let mut ranges = [(0, self.n[0] - 1), (0, self.n[1] - 1)];
        let inside: Vec<usize> = (0..self.n[axis])
            .filter(|&q| {
                let s = if axis == 0 {
                    self.space_index(q, 0)
                } else {
                    self.space_index(0, q)
                };
                cfg.d.value(self.point(s)) >= eps
            })
            .collect();
        let (&lo, &hi) = (inside.first()?, inside.last()?);
        ranges[axis] = (lo, hi);
        Some(ranges)
    }

    /// Time-index nodes matching the end slices `t0 - delta` and `t0 + delta`.
    pub fn slice_index(&self, end: TimeEnd) -> usize {
        match end {
            TimeEnd::Start => 0,
            TimeEnd::End => self.nt - 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TimeEnd {
    Start,
    End,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WeightParams;

    fn grid_1d(n: usize, nt: usize) -> SpaceTimeGrid {
        let spec = DomainSpec::interval(1.0, Face::Left, 0.5);
        let cfg = WeightConfig::for_domain(&spec, &WeightParams::default()).unwrap();
        SpaceTimeGrid::new(&spec, GridDims::new_1d(n, nt), &cfg).unwrap()
    }

    #[test]
    fn classification_partitions_nodes() {
        let spec = DomainSpec::rectangle(1.0, 2.0, &[Face::Left, Face::Bottom, Face::Top], 0.5);
        let cfg = WeightConfig::for_domain(&spec, &WeightParams::default()).unwrap();
        let g = SpaceTimeGrid::new(&spec, GridDims::new_2d(5, 7, 5), &cfg).unwrap();
        let count = |k| (0..g.n_space()).filter(|&s| g.kind(s) == k).count();
        assert_eq!(count(NodeKind::Interior), 3 * 5);
        assert_eq!(count(NodeKind::Corner), 4);
        assert_eq!(count(NodeKind::Complement), 5);
        assert_eq!(count(NodeKind::Gamma), 5 + 3 + 3);
        assert_eq!(g.h(), [0.25, 2.0 / 6.0]);
    }

    #[test]
    fn window_is_symmetric() {
        for nt in [9, 10, 33, 64] {
            let g = grid_1d(9, nt);
            let (lo, hi) = g.window().unwrap();
            assert_eq!(lo + hi, nt - 1);
            assert_eq!(g.time_offset(lo), -g.time_offset(hi));
        }
    }

    #[test]
    fn degenerate_grid_rejected() {
        let spec = DomainSpec::interval(1.0, Face::Left, 0.5);
        let cfg = WeightConfig::for_domain(&spec, &WeightParams::default()).unwrap();
        assert!(matches!(
            SpaceTimeGrid::new(&spec, GridDims::new_1d(2, 9), &cfg),
            Err(Error::DegenerateGrid(_))
        ));
    }

    #[test]
    fn core_range_in_1d() {
        let g = grid_1d(11, 5);
        let spec = DomainSpec::interval(1.0, Face::Left, 0.5);
        let cfg = WeightConfig::for_domain(&spec, &WeightParams::default()).unwrap();
        // d = 1 - x >= 0.5  <=>  x <= 0.5
        assert_eq!(g.core_ranges(&cfg).unwrap()[0], (0, 5));
    }
}
