//! Minimal dense complex linear algebra for the simulation oracle.
//!
//! Matrices here are at most a few hundred rows by a few tens of columns, so
//! everything is naive column-major loops. The one piece with real numerical
//! content is the modified Gram-Schmidt QR: it runs a second orthogonalization
//! pass (classic MGS drift is otherwise visible at the 1e-10 invariant level)
//! and normalizes so the R diagonal is real and positive. The positive
//! diagonal matters beyond cosmetics: QR with that convention is unique, which
//! makes the Q factor of a Gaussian matrix exactly Haar distributed.

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("column {col} is numerically dependent on the preceding columns")]
    SingularColumn { col: usize },
    #[error("triangular factor is ill-conditioned: diagonal ratio {ratio:.3e}")]
    IllConditioned { ratio: f64 },
}

/// Column-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// y = A^H x for a vector x of length `rows`.
    pub fn herm_apply(&self, x: &[C64]) -> Vec<C64> {
        (0..self.cols).map(|j| herm_dot(self.col(j), x)).collect()
    }

    /// y = A x for a vector x of length `cols`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.rows];
        for j in 0..self.cols {
            axpy(x[j], self.col(j), &mut y);
        }
        y
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[j * self.rows + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[j * self.rows + i]
    }
}

/// Hermitian inner product sum(conj(x_i)·y_i).
pub fn herm_dot(x: &[C64], y: &[C64]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        acc += a.conj() * b;
    }
    acc
}

/// Squared Euclidean norm.
pub fn norm_sq(x: &[C64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum()
}

/// y += alpha·x.
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// v -= Q(Q^H v) for an orthonormal-column matrix Q; projects v onto the
/// orthogonal complement of span(Q).
pub fn project_out(q: &CMat, v: &mut [C64]) {
    for j in 0..q.cols() {
        let c = herm_dot(q.col(j), v);
        axpy(-c, q.col(j), v);
    }
}

/// Thin QR factors with orthonormal Q and upper-triangular R whose diagonal
/// is real and positive.
#[derive(Debug, Clone)]
pub struct QrFactors {
    pub q: CMat,
    pub r: CMat,
}

impl QrFactors {
    /// Ratio of the largest to smallest |r_jj|, a cheap conditioning proxy.
    pub fn diag_ratio(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for j in 0..self.r.cols() {
            let d = self.r[(j, j)].norm();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        hi / lo
    }
}

/// Modified Gram-Schmidt QR with one re-orthogonalization pass.
///
/// Fails when a column loses essentially all of its norm to the preceding
/// columns (rank deficiency at working precision).
pub fn qr(a: &CMat) -> Result<QrFactors, LinalgError> {
    let (rows, cols) = (a.rows(), a.cols());
    assert!(cols <= rows, "QR expects a tall matrix, got {rows}x{cols}");
    let mut q = a.clone();
    let mut r = CMat::zeros(cols, cols);
    for j in 0..cols {
        let orig = norm_sq(q.col(j)).sqrt();
        for _ in 0..2 {
            for i in 0..j {
                let (qi, qj) = split_cols(&mut q, i, j);
                let c = herm_dot(qi, qj);
                r[(i, j)] += c;
                axpy(-c, qi, qj);
            }
        }
        let nrm = norm_sq(q.col(j)).sqrt();
        if !(nrm > orig * 1e-14) {
            return Err(LinalgError::SingularColumn { col: j });
        }
        r[(j, j)] = C64::new(nrm, 0.0);
        let inv = 1.0 / nrm;
        for v in q.col_mut(j) {
            *v *= inv;
        }
    }
    Ok(QrFactors { q, r })
}

/// Column k of R^{-H} for upper-triangular R, i.e. the solution of
/// R^H y = e_k by forward substitution. Used to form the ZF pseudo-inverse
/// G(G^H G)^{-1} = Q R^{-H} without ever building the Gramian.
pub fn rinv_herm_col(r: &CMat, k: usize) -> Vec<C64> {
    let n = r.cols();
    let mut y = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        let rhs = if i == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        let mut acc = rhs;
        for j in 0..i {
            acc -= r[(j, i)].conj() * y[j];
        }
        y[i] = acc / r[(i, i)].conj();
    }
    y
}

fn split_cols(m: &mut CMat, i: usize, j: usize) -> (&[C64], &mut [C64]) {
    assert!(i < j);
    let rows = m.rows;
    let (head, tail) = m.data.split_at_mut(j * rows);
    (&head[i * rows..(i + 1) * rows], &mut tail[..rows])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(rows, cols, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    fn max_abs(m: &CMat) -> f64 {
        (0..m.cols()).flat_map(|j| m.col(j).iter()).map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn qr_reconstructs_and_orthonormalizes() {
        for seed in 0..5 {
            let a = random_matrix(40, 12, seed);
            let f = qr(&a).unwrap();
            // Q^H Q = I
            for i in 0..12 {
                for j in 0..12 {
                    let d = herm_dot(f.q.col(i), f.q.col(j));
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((d - C64::new(expect, 0.0)).norm() < 1e-12, "Q'Q[{i},{j}] = {d}");
                }
            }
            // QR = A
            let mut resid: f64 = 0.0;
            for j in 0..12 {
                let rcol: Vec<C64> = (0..12).map(|i| f.r[(i, j)]).collect();
                let recon = f.q.apply(&rcol);
                for (x, y) in recon.iter().zip(a.col(j)) {
                    resid = resid.max((x - y).norm());
                }
            }
            assert!(resid < 1e-12 * max_abs(&a).max(1.0), "max residual {resid}");
            // positive real diagonal
            for j in 0..12 {
                assert!(f.r[(j, j)].im == 0.0 && f.r[(j, j)].re > 0.0);
            }
        }
    }

    #[test]
    fn qr_flags_dependent_columns() {
        let mut a = random_matrix(20, 3, 9);
        let dup: Vec<C64> = a.col(0).to_vec();
        a.col_mut(2).copy_from_slice(&dup);
        assert_eq!(qr(&a).unwrap_err(), LinalgError::SingularColumn { col: 2 });
    }

    #[test]
    fn rinv_herm_solves_triangular_system() {
        let a = random_matrix(15, 6, 3);
        let f = qr(&a).unwrap();
        for k in 0..6 {
            let y = rinv_herm_col(&f.r, k);
            // R^H y should be e_k
            for i in 0..6 {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..6 {
                    // (R^H)[i][j] = conj(R[j][i]]
                    acc += f.r[(j, i)].conj() * y[j];
                }
                let expect = if i == k { 1.0 } else { 0.0 };
                assert!((acc - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn project_out_removes_span_component() {
        let a = random_matrix(30, 5, 11);
        let f = qr(&a).unwrap();
        let mut v: Vec<C64> = random_matrix(30, 1, 12).col(0).to_vec();
        project_out(&f.q, &mut v);
        project_out(&f.q, &mut v);
        for j in 0..5 {
            assert!(herm_dot(f.q.col(j), &v).norm() < 1e-13);
        }
    }

    #[test]
    fn diag_ratio_detects_near_dependence() {
        let mut a = random_matrix(20, 3, 5);
        let fresh = random_matrix(20, 1, 6);
        let mixed: Vec<C64> = a
            .col(0)
            .iter()
            .zip(fresh.col(0))
            .map(|(x, y)| x + C64::new(1e-6, 0.0) * y)
            .collect();
        a.col_mut(2).copy_from_slice(&mixed);
        let f = qr(&a).unwrap();
        assert!(f.diag_ratio() > 1e6);
    }
}
