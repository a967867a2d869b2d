//! Small sparse linear algebra: banded LU for implicit time steps and a
//! Jacobi-preconditioned conjugate gradient on normal equations for the
//! weighted least-squares reconstruction.

use crate::error::{Error, Result};

/// Square matrix with `bw` sub- and super-diagonals, stored row-wise.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (2 * bw + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(
            j + self.bw >= i && j <= i + self.bw,
            "({i}, {j}) outside band {}",
            self.bw
        );
        i * (2 * self.bw + 1) + (j + self.bw - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.bw < i || j > i + self.bw {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j);
        self.data[k] += v;
    }

    /// Zero row `i` and put 1 on the diagonal.
    pub fn set_identity_row(&mut self, i: usize) {
        let w = 2 * self.bw + 1;
        self.data[i * w..(i + 1) * w].fill(0.0);
        let k = self.slot(i, i);
        self.data[k] = 1.0;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.bw);
                let hi = (i + self.bw).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// In-place LU factorization without pivoting.
    pub fn factor(mut self) -> Result<BandedLu> {
        let (n, bw) = (self.n, self.bw);
        for k in 0..n {
            let pivot = self.data[self.slot(k, k)];
            let scale = (k.saturating_sub(bw)..=(k + bw).min(n - 1))
                .map(|j| self.get(k, j).abs())
                .fold(0.0, f64::max);
            if !(pivot.abs() > 1e-14 * scale) {
                return Err(Error::SingularSystem { row: k });
            }
            let hi = (k + bw).min(n - 1);
            for i in k + 1..=hi {
                let ik = self.slot(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=hi {
                        let kj = self.data[self.slot(k, j)];
                        let ij = self.slot(i, j);
                        self.data[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(BandedLu { m: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    m: BandedMatrix,
}

impl BandedLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.m.n, self.m.bw);
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut acc = x[i];
            for j in lo..i {
                acc -= self.m.data[self.m.slot(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut acc = x[i];
            for j in i + 1..=hi {
                acc -= self.m.data[self.m.slot(i, j)] * x[j];
            }
            x[i] = acc / self.m.data[self.m.slot(i, i)];
        }
        x
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, Default)]
pub struct CsrMatrix {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(cols: usize) -> Self {
        Self {
            rows: 0,
            cols,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Append a row; duplicate column entries are kept and summed on use.
    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (usize, f64)>) {
        for (c, v) in entries {
            debug_assert!(c < self.cols);
            self.indices.push(c);
            self.values.push(v);
        }
        self.indptr.push(self.indices.len());
        self.rows += 1;
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1])
                    .map(|q| self.values[q] * x[self.indices[q]])
                    .sum()
            })
            .collect()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            for q in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[q];
                indices[next[c]] = r;
                values[next[c]] = self.values[q];
                next[c] += 1;
            }
        }
        CsrMatrix {
            rows: self.cols,
            cols: self.rows,
            indptr: counts,
            indices,
            values,
        }
    }

    /// Squared Euclidean norm of each column.
    pub fn column_norms_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (&c, &v) in self.indices.iter().zip(&self.values) {
            out[c] += v * v;
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    pub rtol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            max_iter: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative preconditioned residual, sampled every 100 iterations.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least squares `min |A x - b|` by conjugate gradient on `A^T A x = A^T b`
/// with the Jacobi preconditioner `diag(A^T A)`.
pub fn cgnr(a: &CsrMatrix, b: &[f64], opts: CgOptions) -> Result<CgOutcome> {
    let at = a.transpose();
    let n = a.cols;
    let dinv: Vec<f64> = a
        .column_norms_sq()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 0.0 })
        .collect();
    let rhs = at.matvec(b);
    let mut x = vec![0.0; n];
    let norm0 = rhs
        .iter()
        .zip(&dinv)
        .map(|(r, d)| r * r * d)
        .sum::<f64>()
        .sqrt();
    if norm0 == 0.0 {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            history: vec![0.0],
        });
    }
    let mut r = rhs;
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut history = vec![1.0];
    for it in 1..=opts.max_iter {
        let ap = at.matvec(&a.matvec(&p));
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let rel = rz_new.max(0.0).sqrt() / norm0;
        if it % 100 == 0 {
            history.push(rel);
        }
        if rel <= opts.rtol {
            history.push(rel);
            return Ok(CgOutcome {
                x,
                iterations: it,
                history,
            });
        }
        if !rel.is_finite() {
            return Err(Error::CgNotConverged {
                iterations: it,
                last: rel,
                history,
            });
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let last = *history.last().unwrap_or(&f64::NAN);
    Err(Error::CgNotConverged {
        iterations: opts.max_iter,
        last,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_banded(n: usize, bw: usize, seed: &[f64]) -> BandedMatrix {
        let mut m = BandedMatrix::zeros(n, bw);
        let mut q = 0;
        for i in 0..n {
            let mut off = 0.0;
            for j in i.saturating_sub(bw)..=(i + bw).min(n - 1) {
                if j != i {
                    let v = seed[q % seed.len()];
                    q += 1;
                    m.add(i, j, v);
                    off += v.abs();
                }
            }
            m.add(i, i, off + 1.0);
        }
        m
    }

    proptest! {
        #[test]
        fn banded_lu_solves_diagonally_dominant_systems(
            n in 3usize..40, bw in 1usize..5,
            seed in proptest::collection::vec(-2.0f64..2.0, 8),
            xs in proptest::collection::vec(-5.0f64..5.0, 40),
        ) {
            let m = random_banded(n, bw, &seed);
            let x: Vec<f64> = xs[..n].to_vec();
            let b = m.matvec(&x);
            let got = m.factor().unwrap().solve(&b);
            for (g, e) in got.iter().zip(&x) {
                prop_assert!((g - e).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let mut m = BandedMatrix::zeros(3, 1);
        m.add(0, 0, 1.0);
        m.add(0, 1, 1.0);
        m.add(1, 0, 1.0);
        m.add(1, 1, 1.0);
        m.add(2, 2, 1.0);
        assert!(matches!(m.factor(), Err(Error::SingularSystem { row: 1 })));
    }

    #[test]
    fn cgnr_recovers_overdetermined_consistent_solution() {
        let mut a = CsrMatrix::new(3);
        a.push_row([(0, 1.0), (1, 2.0)]);
        a.push_row([(1, 1.0), (2, -1.0)]);
        a.push_row([(0, 3.0), (2, 1.0)]);
        a.push_row([(0, 1.0), (1, 1.0), (2, 1.0)]);
        let x = [1.0, -2.0, 0.5];
        let b = a.matvec(&x);
        let out = cgnr(
            &a,
            &b,
            CgOptions {
                rtol: 1e-13,
                max_iter: 100,
            },
        )
        .unwrap();
        for (g, e) in out.x.iter().zip(&x) {
            assert!((g - e).abs() < 1e-10);
        }
        let t = a.transpose();
        assert_eq!(t.transpose().matvec(&x), a.matvec(&x));
    }

    #[test]
    fn cgnr_zero_rhs_is_immediate() {
        let mut a = CsrMatrix::new(2);
        a.push_row([(0, 1.0)]);
        a.push_row([(1, 1.0)]);
        let out = cgnr(&a, &[0.0, 0.0], CgOptions::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.x, vec![0.0, 0.0]);
    }

    #[test]
    fn cgnr_reports_non_convergence_with_history() {
        let mut a = CsrMatrix::new(3);
        for i in 0..3 {
            a.push_row([(i, 1.0 + i as f64), ((i + 1) % 3, 0.3)]);
        }
        let err = cgnr(
            &a,
            &[1.0, 2.0, 3.0],
            CgOptions {
                rtol: 1e-30,
                max_iter: 1,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::CgNotConverged { iterations: 1, .. }));
    }
}
