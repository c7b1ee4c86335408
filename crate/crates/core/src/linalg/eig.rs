//! Hermitian eigendecomposition.
//!
//! Two classical stages: unitary Householder reduction of the (symmetrized)
//! input to a Hermitian tridiagonal matrix, a diagonal phase similarity that
//! makes the off-diagonal real and nonnegative, then implicit-shift QL on the
//! real tridiagonal problem with plane rotations accumulated into the complex
//! eigenvector matrix.

use num_complex::Complex64;

use super::{CMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 60;

/// Spectral decomposition of a Hermitian matrix: `M = V diag(values) V†`.
///
/// Eigenvalues are sorted in descending order; column `j` of `vectors` is the
/// unit eigenvector for `values[j]`.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEig {
    /// Rebuilds `V diag(values) V†`, mainly for residual checks.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for c in 0..n {
            for r in 0..n {
                scaled[(r, c)] *= self.values[c];
            }
        }
        scaled.matmul(&self.vectors.adjoint())
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is checked against the crate-wide Hermiticity tolerance and
/// symmetrized before any arithmetic, so callers may pass matrices carrying
/// round-off without pre-cleaning them.
pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEig> {
    m.check_hermitian()?;
    let n = m.rows();
    let mut a = m.symmetrize();

    if n == 0 {
        return Ok(HermitianEig {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        });
    }
    if n == 1 {
        return Ok(HermitianEig {
            values: vec![a[(0, 0)].re],
            vectors: CMatrix::identity(1),
        });
    }

    // Stage 1: Householder reduction. After this loop `a` is Hermitian
    // tridiagonal and `q` holds the accumulated unitary, so a_in = q a q†.
    let mut q = CMatrix::identity(n);
    let mut u = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let m_len = n - k - 1;
        let tail_sq: f64 = (k + 2..n).map(|r| a[(r, k)].norm_sqr()).sum();
        if tail_sq == 0.0 {
            continue;
        }
        let alpha = a[(k + 1, k)];
        let xnorm = (alpha.norm_sqr() + tail_sq).sqrt();
        let phase = if alpha == ZERO {
            ONE
        } else {
            alpha / alpha.norm()
        };
        let beta = -phase * xnorm;

        // v = x − β e₁ has no cancellation: v₀ = phase·(|α| + ‖x‖).
        u[0] = alpha - beta;
        for i in 1..m_len {
            u[i] = a[(k + 1 + i, k)];
        }
        let unorm = u[..m_len]
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if unorm == 0.0 {
            continue;
        }
        for entry in u[..m_len].iter_mut() {
            *entry /= unorm;
        }

        // Two-sided update of the trailing block with H = I − 2uu†:
        // p = A u, μ = u†p, w = p − μu, A ← A − 2uw† − 2wu†.
        for (i, wi) in w[..m_len].iter_mut().enumerate() {
            let row = k + 1 + i;
            let mut acc = ZERO;
            for (j, uj) in u[..m_len].iter().enumerate() {
                acc += a[(row, k + 1 + j)] * uj;
            }
            *wi = acc;
        }
        let mu: C64 = u[..m_len]
            .iter()
            .zip(&w[..m_len])
            .map(|(ui, pi)| ui.conj() * pi)
            .sum();
        for (wi, ui) in w[..m_len].iter_mut().zip(&u[..m_len]) {
            *wi -= mu * ui;
        }
        for i in 0..m_len {
            for j in 0..m_len {
                let delta = u[i] * w[j].conj() + w[i] * u[j].conj();
                a[(k + 1 + i, k + 1 + j)] -= 2.0 * delta;
            }
        }

        // Column k transforms to β e₁ exactly; write it rather than update.
        a[(k + 1, k)] = beta;
        a[(k, k + 1)] = beta.conj();
        for r in k + 2..n {
            a[(r, k)] = ZERO;
            a[(k, r)] = ZERO;
        }

        // Accumulate q ← q H on the trailing columns.
        for r in 0..n {
            let mut s = ZERO;
            for (j, uj) in u[..m_len].iter().enumerate() {
                s += q[(r, k + 1 + j)] * uj;
            }
            if s != ZERO {
                for (j, uj) in u[..m_len].iter().enumerate() {
                    let val = 2.0 * s * uj.conj();
                    q[(r, k + 1 + j)] -= val;
                }
            }
        }
    }

    // Stage 2: phase similarity making the off-diagonal real nonnegative.
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    let mut phases = vec![ONE; n];
    for i in 0..n {
        d[i] = a[(i, i)].re;
    }
    for i in 1..n {
        let t = a[(i, i - 1)];
        let mag = t.norm();
        e[i - 1] = mag;
        phases[i] = if mag == 0.0 {
            phases[i - 1]
        } else {
            phases[i - 1] * (mag / t)
        };
    }
    let mut v = q;
    for (j, phase) in phases.iter().enumerate() {
        let factor = phase.conj();
        if factor != ONE {
            for r in 0..n {
                v[(r, j)] *= factor;
            }
        }
    }

    // Stage 3: implicit QL with Wilkinson shifts on (d, e), rotating v along.
    ql_implicit(&mut d, &mut e, &mut v)?;

    // Descending eigenvalue order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);

    Ok(HermitianEig { values, vectors })
}

/// Classic tql2-style implicit QL sweep. `e[i]` couples `d[i]` and `d[i+1]`;
/// `e[n-1]` is scratch.
fn ql_implicit(d: &mut [f64], e: &mut [f64], v: &mut CMatrix) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence(MAX_QL_ITERATIONS));
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let denom = g + r.abs().copysign(if g >= 0.0 { 1.0 } else { -1.0 });
            g = d[m] - d[l] + e[l] / denom;
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                for row in 0..v.rows() {
                    f = v[(row, i + 1)].re;
                    let f_im = v[(row, i + 1)].im;
                    let lo = v[(row, i)];
                    v[(row, i + 1)] = Complex64::new(s * lo.re + c * f, s * lo.im + c * f_im);
                    v[(row, i)] = Complex64::new(c * lo.re - s * f, c * lo.im - s * f_im);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, CVector};
    use crate::rng::RngStream;

    fn random_hermitian(dim: usize, rng: &mut RngStream) -> CMatrix {
        let a = CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.standard_normal(), rng.standard_normal())
        });
        a.add(&a.adjoint()).scale_re(0.5)
    }

    fn assert_decomposition(m: &CMatrix, tol_scale: f64) {
        let eig = hermitian_eig(m).unwrap();
        let scale = crate::linalg::operator_norm(m).unwrap().max(1e-30);
        let residual = eig.reconstruct().sub(m).max_abs();
        assert!(
            residual <= tol_scale * scale,
            "residual {residual:.3e} vs scale {scale:.3e}"
        );
        let trace_sum: f64 = eig.values.iter().sum();
        assert!((trace_sum - m.trace().re).abs() <= 1e-9 * scale.max(1.0));
        // Orthonormal columns.
        let gram = eig.vectors.adjoint().matmul(&eig.vectors);
        assert!(gram.sub(&CMatrix::identity(m.rows())).max_abs() < 1e-10);
        // Sorted descending.
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1] - 1e-12));
    }

    #[test]
    fn diagonal_input() {
        let m = CMatrix::diag(&[3.0, 1.0]);
        let eig = hermitian_eig(&m).unwrap();
        assert_eq!(eig.values, vec![3.0, 1.0]);
        assert!(eig.vectors.sub(&CMatrix::identity(2)).max_abs() < 1e-14);
    }

    #[test]
    fn pauli_x_spectrum() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = ONE;
        m[(1, 0)] = ONE;
        let eig = hermitian_eig(&m).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] + 1.0).abs() < 1e-14);
        let inv = 1.0 / 2.0f64.sqrt();
        for (col, sign) in [(0usize, 1.0f64), (1usize, -1.0)] {
            let v = eig.vectors.column(col);
            // eigenvector (1, ±1)/√2 up to phase
            let overlap = (v[0].conj() * inv + v[1].conj() * sign * inv).norm();
            assert!((overlap - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_reconstruction_dim8() {
        let rng = RngStream::from_seed(100);
        for trial in 0..8 {
            let m = random_hermitian(8, &mut rng.substream(trial));
            assert_decomposition(&m, 1e-8);
        }
    }

    #[test]
    fn reconstruction_across_dims() {
        let rng = RngStream::from_seed(200);
        for (i, dim) in [2usize, 3, 5, 16, 64, 256].iter().enumerate() {
            let m = random_hermitian(*dim, &mut rng.substream(i as u64));
            assert_decomposition(&m, 1e-8);
        }
    }

    /// Residual check sized for large dimensions: one decomposition, the
    /// norm taken from the computed spectrum, orthonormality spot-checked on
    /// a column subset.
    fn assert_decomposition_large(m: &CMatrix) {
        let n = m.rows();
        let eig = hermitian_eig(m).unwrap();
        let scale = eig.values.iter().fold(0.0f64, |a, l| a.max(l.abs()));
        let residual = eig.reconstruct().sub(m).max_abs();
        assert!(
            residual <= 1e-8 * scale,
            "dim {n}: residual {residual:.3e} vs scale {scale:.3e}"
        );
        for probe in [0usize, n / 3, n / 2, n - 1] {
            let col = eig.vectors.column(probe);
            assert!((col.norm() - 1.0).abs() < 1e-10);
            let other = eig.vectors.column((probe + 1) % n);
            assert!(col.inner(&other).norm() < 1e-10);
        }
    }

    #[test]
    #[ignore = "minutes of runtime; run explicitly with --ignored"]
    fn reconstruction_dim_1024() {
        let mut rng = RngStream::from_seed(299);
        let m = random_hermitian(1024, &mut rng);
        assert_decomposition_large(&m);
    }

    #[test]
    #[ignore = "large; run explicitly with --ignored"]
    fn reconstruction_dim_4096() {
        let mut rng = RngStream::from_seed(300);
        let m = random_hermitian(4096, &mut rng);
        assert_decomposition_large(&m);
    }

    #[test]
    fn degenerate_spectrum() {
        // kron(I, Z) has eigenvalues ±1 with multiplicity 2.
        let z = CMatrix::diag(&[1.0, -1.0]);
        let m = kron(&CMatrix::identity(2), &z);
        let eig = hermitian_eig(&m).unwrap();
        assert_eq!(eig.values.iter().filter(|l| **l > 0.0).count(), 2);
        assert_decomposition(&m, 1e-10);
    }

    #[test]
    fn rank_one_projector() {
        let v = CVector::new(vec![
            C64::new(0.5, 0.5),
            C64::new(0.5, -0.5),
            ZERO,
            ZERO,
        ]);
        let m = v.outer();
        let eig = hermitian_eig(&m).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-12);
        assert!(eig.values[1].abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(3);
        m[(0, 2)] = C64::new(1.0, 0.0);
        assert!(matches!(
            hermitian_eig(&m),
            Err(Error::NonHermitian { .. })
        ));
    }

    proptest::proptest! {
        #[test]
        fn reconstruction_property(seed in 0u64..500, dim in 2usize..12) {
            let mut rng = RngStream::from_seed(seed);
            let m = random_hermitian(dim, &mut rng);
            assert_decomposition(&m, 1e-8);
        }
    }
}
