//! Small dense-banded linear algebra used by the solvers.
//!
//! Edge-local systems are banded with half-bandwidth at most 2 (tridiagonal
//! interiors plus one-sided three-point boundary rows), so a banded LU with
//! partial pivoting covers every per-edge solve. Junction systems are tiny
//! and dense; they go through nalgebra.

use crate::error::SolveError;

/// Row-major banded matrix with `kl` subdiagonals and `ku` superdiagonals.
///
/// Storage follows the LAPACK band layout with `kl` extra superdiagonals for
/// pivoting fill: entry (i, j) lives at `band[j - i + kl + ku]` of row i for
/// `-kl <= j - i <= ku + kl`.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    rows: Vec<f64>,
    width: usize,
}

impl BandedMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = kl + ku + kl + 1;
        BandedMatrix { n, kl, ku, rows: vec![0.0; n * width], width }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> Option<usize> {
        let d = j as isize - i as isize;
        if d < -(self.kl as isize) || d > (self.ku + self.kl) as isize {
            return None;
        }
        Some(i * self.width + (d + self.kl as isize) as usize)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let o = self.offset(i, j).expect("entry outside band");
        self.rows[o] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let o = self.offset(i, j).expect("entry outside band");
        self.rows[o] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.offset(i, j).map(|o| self.rows[o]).unwrap_or(0.0)
    }

    /// Solve `A x = b` in place by banded LU with row partial pivoting.
    /// Consumes the matrix (factorization overwrites the band).
    pub fn solve(mut self, mut b: Vec<f64>) -> Result<Vec<f64>, SolveError> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        if b.len() != n {
            return Err(SolveError::Invalid("rhs length mismatch".into()));
        }
        let scale: Vec<f64> = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(kl);
                let hi = (i + ku + kl).min(n - 1);
                (lo..=hi).map(|j| self.get(i, j).abs()).fold(0.0, f64::max)
            })
            .collect();
        if scale.iter().any(|&s| s == 0.0) {
            return Err(SolveError::SingularSystem("zero row in banded matrix".into()));
        }

        for k in 0..n {
            // Pivot search limited to rows reaching column k.
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs() / scale[k];
            for i in k + 1..=last {
                let cand = self.get(i, k).abs() / scale[i];
                if cand > best {
                    best = cand;
                    p = i;
                }
            }
            if self.get(p, k) == 0.0 {
                return Err(SolveError::SingularSystem(format!("zero pivot at column {k}")));
            }
            if p != k {
                let hi = (k + ku + kl).min(n - 1);
                for j in k..=hi {
                    let a = self.get(k, j);
                    let c = self.get(p, j);
                    self.set(k, j, c);
                    self.set(p, j, a);
                }
                b.swap(k, p);
            }
            let piv = self.get(k, k);
            let hi = (k + ku + kl).min(n - 1);
            for i in k + 1..=last {
                let f = self.get(i, k) / piv;
                if f != 0.0 {
                    for j in k + 1..=hi {
                        let v = self.get(i, j) - f * self.get(k, j);
                        self.set(i, j, v);
                    }
                    b[i] -= f * b[k];
                }
                self.set(i, k, 0.0);
            }
        }

        for i in (0..n).rev() {
            let hi = (i + ku + kl).min(n - 1);
            let mut s = b[i];
            for j in i + 1..=hi {
                s -= self.get(i, j) * b[j];
            }
            b[i] = s / self.get(i, i);
        }
        Ok(b)
    }
}

/// Solve a strictly tridiagonal system given the three diagonals.
/// `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: Vec<f64>,
) -> Result<Vec<f64>, SolveError> {
    let n = diag.len();
    let mut m = BandedMatrix::new(n, 1, 1);
    for i in 0..n {
        m.set(i, i, diag[i]);
        if i > 0 {
            m.set(i, i - 1, lower[i]);
        }
        if i + 1 < n {
            m.set(i, i, diag[i]);
            m.set(i, i + 1, upper[i]);
        }
    }
    m.solve(rhs)
}

/// Solve a small dense system with nalgebra's pivoted LU.
pub fn solve_dense(a: nalgebra::DMatrix<f64>, b: nalgebra::DVector<f64>) -> Result<Vec<f64>, SolveError> {
    let lu = a.lu();
    lu.solve(&b)
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| SolveError::SingularSystem("dense junction system".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn banded_matches_dense_on_random_systems() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &(n, kl, ku) in &[(5usize, 1usize, 1usize), (12, 2, 2), (30, 2, 1)] {
            let mut banded = BandedMatrix::new(n, kl, ku);
            let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let d = j as isize - i as isize;
                    if d >= -(kl as isize) && d <= ku as isize {
                        let v: f64 = rng.gen_range(-1.0..1.0);
                        let v = if i == j { v + 4.0 } else { v };
                        banded.set(i, j, v);
                        dense[(i, j)] = v;
                    }
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x1 = banded.solve(b.clone()).unwrap();
            let x2 = dense.lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
            for i in 0..n {
                assert_relative_eq!(x1[i], x2[i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn banded_pivots_when_diagonal_vanishes() {
        // First row has a zero diagonal entry; solvable only with pivoting.
        let mut m = BandedMatrix::new(3, 1, 1);
        m.set(0, 0, 0.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 1.0);
        m.set(1, 2, 1.0);
        m.set(2, 1, 1.0);
        m.set(2, 2, 2.0);
        // Solution of [[0,1,0],[1,1,1],[0,1,2]] x = [1,6,5] is [2,1,2].
        let x = m.solve(vec![1.0, 6.0, 5.0]).unwrap();
        assert_relative_eq!(x[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(x[2], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_matrix_reported() {
        let mut m = BandedMatrix::new(2, 1, 1);
        m.set(0, 0, 1.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 1.0);
        assert!(m.solve(vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn tridiagonal_solves_poisson_row() {
        let n = 50;
        let lower = vec![1.0; n];
        let diag = vec![-2.0; n];
        let upper = vec![1.0; n];
        // Manufactured solution x_i = i.
        let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let mut s = -2.0 * xs[i];
            if i > 0 {
                s += xs[i - 1];
            }
            if i + 1 < n {
                s += xs[i + 1];
            }
            rhs[i] = s;
        }
        let x = solve_tridiagonal(&lower, &diag, &upper, rhs).unwrap();
        for i in 0..n {
            assert_relative_eq!(x[i], xs[i], epsilon = 1e-9);
        }
    }
}
