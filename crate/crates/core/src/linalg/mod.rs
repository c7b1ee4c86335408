//! Dense complex vectors and matrices.
//!
//! Everything here is dense and sized for desk-scale work: operators live on
//! at most `2^12`-dimensional spaces, so no sparse or blocked paths exist.
//! The one nontrivial algorithm is [`hermitian_eig`], which backs every
//! spectral quantity in the crate.

mod eig;

pub use eig::{hermitian_eig, HermitianEig};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = Complex64::new(0.0, 0.0);
pub const ONE: C64 = Complex64::new(1.0, 0.0);
pub const I: C64 = Complex64::new(0.0, 1.0);

/// Relative tolerance for the Hermiticity check.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// A complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector {
    entries: Vec<C64>,
}

impl CVector {
    pub fn new(entries: Vec<C64>) -> Self {
        Self { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: vec![ZERO; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.entries
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.entries.iter().map(|c| c * s).collect())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.entries.iter().map(|c| c.conj()).collect())
    }

    /// `⟨self|other⟩`, conjugating the left argument.
    pub fn inner(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Tensor product with `other`; `self` indexes the high-order digits.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.entries {
            for b in &other.entries {
                out.push(a * b);
            }
        }
        Self::new(out)
    }

    /// Rank-one matrix `|self⟩⟨self|`.
    pub fn outer(&self) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] = self.entries[r] * self.entries[c].conj();
            }
        }
        m
    }
}

impl std::ops::Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.entries[i]
    }
}

impl std::ops::IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.entries[i]
    }
}

/// A dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(*v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> CVector {
        CVector::new((0..self.rows).map(|r| self[(r, c)]).collect())
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| c * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &CVector) -> CVector {
        assert_eq!(self.cols, v.dim(), "matvec dimension mismatch");
        let mut out = CVector::zeros(self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            out[r] = row.iter().zip(v.as_slice()).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// `⟨v|M|v⟩`.
    pub fn quadratic_form(&self, v: &CVector) -> C64 {
        assert_eq!(self.cols, v.dim(), "quadratic form dimension mismatch");
        let mut acc = ZERO;
        for r in 0..self.rows {
            let row = self.row(r);
            let mv: C64 = row.iter().zip(v.as_slice()).map(|(a, b)| a * b).sum();
            acc += v[r].conj() * mv;
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from `M = M†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                let dev = (self[(r, c)] - self[(c, r)].conj()).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }

    /// Errors unless `M = M†` within `HERMITICITY_TOL` relative to the largest
    /// entry magnitude.
    pub fn check_hermitian(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::DimMismatch(format!(
                "expected square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let scale = self.max_abs().max(1.0);
        let dev = self.hermiticity_deviation();
        let tol = HERMITICITY_TOL * scale;
        if dev > tol {
            return Err(Error::NonHermitian { max_dev: dev, tol });
        }
        Ok(())
    }

    /// `(M + M†)/2`, absorbing round-off before spectral work.
    pub fn symmetrize(&self) -> Self {
        debug_assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }

    /// Kronecker product; `self` indexes the high-order block.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Partial trace over the second factor of a `d1*d2`-dimensional square
    /// matrix, returning a `d1 x d1` matrix.
    pub fn partial_trace_second(&self, d1: usize, d2: usize) -> Self {
        assert_eq!(self.rows, d1 * d2);
        assert!(self.is_square());
        let mut out = Self::zeros(d1, d1);
        for i in 0..d1 {
            for ip in 0..d1 {
                let mut acc = ZERO;
                for j in 0..d2 {
                    acc += self[(i * d2 + j, ip * d2 + j)];
                }
                out[(i, ip)] = acc;
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kron(b)
}

/// Trace norm `Σ|λ_i|` of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    let eig = hermitian_eig(m)?;
    Ok(eig.values.iter().map(|l| l.abs()).sum())
}

/// Operator norm `max|λ_i|` of a Hermitian matrix.
pub fn operator_norm(m: &CMatrix) -> Result<f64> {
    let eig = hermitian_eig(m)?;
    Ok(eig.values.iter().map(|l| l.abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    pub(crate) fn random_matrix(dim: usize, rng: &mut RngStream) -> CMatrix {
        CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.standard_normal(), rng.standard_normal())
        })
    }

    pub(crate) fn random_hermitian(dim: usize, rng: &mut RngStream) -> CMatrix {
        let a = random_matrix(dim, rng);
        a.add(&a.adjoint()).scale_re(0.5)
    }

    #[test]
    fn kron_identity_blocks() {
        let i2 = CMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4));
    }

    #[test]
    fn kron_x_z_layout() {
        let x = CMatrix::from_fn(2, 2, |r, c| if r != c { ONE } else { ZERO });
        let z = CMatrix::diag(&[1.0, -1.0]);
        let xz = kron(&x, &z);
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 2)] = ONE;
        expected[(1, 3)] = -ONE;
        expected[(2, 0)] = ONE;
        expected[(3, 1)] = -ONE;
        assert_eq!(xz, expected);
    }

    #[test]
    fn kron_trace_multiplicative() {
        let mut rng = RngStream::from_seed(42);
        let a = random_matrix(4, &mut rng);
        let b = random_matrix(4, &mut rng);
        let lhs = kron(&a, &b).trace();
        let rhs = a.trace() * b.trace();
        assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn trace_norm_examples() {
        let m = CMatrix::diag(&[1.0, -1.0]);
        assert!((trace_norm(&m).unwrap() - 2.0).abs() < 1e-12);
        let z = CMatrix::zeros(3, 3);
        assert!(trace_norm(&z).unwrap().abs() < 1e-12);
        // |0><0| - I/2 has eigenvalues ±1/2.
        let m = CMatrix::diag(&[0.5, -0.5]);
        assert!((trace_norm(&m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&CMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-12);
        let m = CMatrix::diag(&[5.0, -7.0]);
        assert!((operator_norm(&m).unwrap() - 7.0).abs() < 1e-12);
    }

    /// Power iteration on M·M, independent of the QL path.
    fn power_iteration_norm(m: &CMatrix, rng: &mut RngStream) -> f64 {
        let dim = m.rows();
        let m2 = m.matmul(m);
        let mut v = CVector::new(
            (0..dim)
                .map(|_| C64::new(rng.standard_normal(), rng.standard_normal()))
                .collect(),
        );
        let mut lambda = 0.0;
        for _ in 0..4000 {
            let w = m2.matvec(&v);
            let norm = w.norm();
            if norm == 0.0 {
                return 0.0;
            }
            lambda = norm;
            v = w.scale(C64::new(1.0 / norm, 0.0));
        }
        lambda.sqrt()
    }

    #[test]
    fn operator_norm_matches_power_iteration() {
        let rng = RngStream::from_seed(9);
        for trial in 0..5 {
            let m = random_hermitian(8, &mut rng.substream(trial));
            let direct = operator_norm(&m).unwrap();
            let power = power_iteration_norm(&m, &mut rng.substream(100 + trial));
            assert!(
                (direct - power).abs() <= 1e-8 * direct.max(1.0),
                "direct {direct} vs power {power}"
            );
        }
    }

    #[test]
    fn norm_ordering_and_kron_associativity() {
        let mut rng = RngStream::from_seed(5);
        for trial in 0..10 {
            let dim = 2 + (trial % 5) as usize;
            let m = random_hermitian(dim, &mut rng.substream(trial));
            let tn = trace_norm(&m).unwrap();
            let on = operator_norm(&m).unwrap();
            assert!(tn + 1e-12 >= on);
            assert!(on + 1e-12 >= tn / dim as f64);
        }
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(3, &mut rng);
        let c = random_matrix(2, &mut rng);
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        let scale = left.max_abs().max(1.0);
        assert!(left.sub(&right).max_abs() <= 1e-14 * scale);
    }

    #[test]
    fn partial_trace_of_kron() {
        let mut rng = RngStream::from_seed(21);
        let a = random_matrix(3, &mut rng);
        let b = random_matrix(4, &mut rng);
        let pt = kron(&a, &b).partial_trace_second(3, 4);
        let expected = a.scale(b.trace());
        assert!(pt.sub(&expected).max_abs() < 1e-12 * (1.0 + expected.max_abs()));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = CMatrix::identity(2);
        m[(0, 1)] = C64::new(0.0, 1.0);
        assert!(matches!(
            m.check_hermitian(),
            Err(Error::NonHermitian { .. })
        ));
    }
}
