//! Observables with cached spectral data, Born-rule measurement, and
//! single-snapshot estimation.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, kron, CMatrix, C64, ONE};
use crate::rng::RngStream;
use crate::states::{PauliMask, PureState};

/// Relative tolerance for merging eigenvalues into one projector.
const GROUPING_TOL: f64 = 1e-8;

/// One eigenspace of an observable.
#[derive(Debug, Clone)]
pub struct SpectralGroup {
    pub value: f64,
    pub projector: CMatrix,
}

/// A Hermitian observable over `n` qubits.
///
/// Construction eagerly computes the grouped spectral decomposition
/// `O = Σ αᵢ Πᵢ`, the trace, the operator norm, and `Tr(O₀²)` for the
/// traceless part `O₀ = O − (Tr O / 2ⁿ) I`. Instances are immutable, so
/// shared read access across threads is safe.
#[derive(Debug, Clone)]
pub struct Observable {
    n: usize,
    matrix: CMatrix,
    groups: Vec<SpectralGroup>,
    trace: f64,
    op_norm: f64,
    traceless_sq: f64,
}

impl Observable {
    pub fn new(n: usize, matrix: CMatrix) -> Result<Self> {
        let dim = 1usize << n;
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::DimMismatch(format!(
                "observable over {n} qubits must be {dim}x{dim}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let eig = hermitian_eig(&matrix)?;
        let matrix = matrix.symmetrize();
        let op_norm = eig.values.iter().map(|l| l.abs()).fold(0.0, f64::max);
        let tol = GROUPING_TOL * op_norm.max(f64::MIN_POSITIVE);

        // Eigenvalues arrive sorted descending; cluster runs within `tol`.
        let mut groups: Vec<SpectralGroup> = Vec::new();
        let mut start = 0;
        while start < eig.values.len() {
            let mut end = start + 1;
            while end < eig.values.len() && (eig.values[end - 1] - eig.values[end]).abs() <= tol {
                end += 1;
            }
            let mut projector = CMatrix::zeros(dim, dim);
            let mut value = 0.0;
            for col in start..end {
                value += eig.values[col];
                let v = eig.vectors.column(col);
                for r in 0..dim {
                    for c in 0..dim {
                        let entry = v[r] * v[c].conj();
                        projector[(r, c)] += entry;
                    }
                }
            }
            value /= (end - start) as f64;
            groups.push(SpectralGroup { value, projector });
            start = end;
        }

        let trace = matrix.trace().re;
        // Tr(O₀²) = Tr(O²) − Tr(O)²/2ⁿ; Tr(O²) is the squared Frobenius norm.
        let frob_sq = matrix.frobenius_norm().powi(2);
        let traceless_sq = frob_sq - trace * trace / dim as f64;

        Ok(Self {
            n,
            matrix,
            groups,
            trace,
            op_norm,
            traceless_sq: traceless_sq.max(0.0),
        })
    }

    /// Observable from a Pauli string such as `"XZIY"`.
    pub fn pauli(label: &str) -> Result<Self> {
        let n = label.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty Pauli string".into()));
        }
        let mut matrix = CMatrix::identity(1);
        for ch in label.chars() {
            let factor = match ch {
                'I' => CMatrix::identity(2),
                'X' => {
                    let mut m = CMatrix::zeros(2, 2);
                    m[(0, 1)] = ONE;
                    m[(1, 0)] = ONE;
                    m
                }
                'Y' => {
                    let mut m = CMatrix::zeros(2, 2);
                    m[(0, 1)] = C64::new(0.0, -1.0);
                    m[(1, 0)] = C64::new(0.0, 1.0);
                    m
                }
                'Z' => CMatrix::diag(&[1.0, -1.0]),
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown Pauli letter '{other}'"
                    )))
                }
            };
            matrix = kron(&matrix, &factor);
        }
        Self::new(n, matrix)
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, CMatrix::identity(1 << n)).expect("identity is Hermitian")
    }

    /// GUE draw: `H = (A + A†)/2` with i.i.d. standard complex Gaussian `A`,
    /// so diagonal entries are standard normal.
    pub fn random_gue(n: usize, rng: &mut RngStream) -> Self {
        let dim = 1usize << n;
        let a = CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.standard_normal(), rng.standard_normal())
        });
        let h = a.add(&a.adjoint()).scale_re(0.5);
        Self::new(n, h).expect("GUE draw is Hermitian")
    }

    /// Rank-`r` projector onto leading eigenvectors of a GUE draw.
    pub fn random_projector(n: usize, rank: usize, rng: &mut RngStream) -> Result<Self> {
        let dim = 1usize << n;
        if rank == 0 || rank > dim {
            return Err(Error::InvalidParameter(format!(
                "projector rank {rank} out of range for dim {dim}"
            )));
        }
        let gue = Self::random_gue(n, rng);
        let eig = hermitian_eig(&gue.matrix)?;
        let mut p = CMatrix::zeros(dim, dim);
        for col in 0..rank {
            let v = eig.vectors.column(col);
            for r in 0..dim {
                for c in 0..dim {
                    let entry = v[r] * v[c].conj();
                    p[(r, c)] += entry;
                }
            }
        }
        Self::new(n, p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn groups(&self) -> &[SpectralGroup] {
        &self.groups
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn op_norm(&self) -> f64 {
        self.op_norm
    }

    /// `Tr(O₀²)`.
    pub fn traceless_sq(&self) -> f64 {
        self.traceless_sq
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.groups
            .iter()
            .map(|g| g.value)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        self.min_eigenvalue() >= -GROUPING_TOL * self.op_norm.max(1.0)
    }

    /// `O₀ = O − (Tr O / 2ⁿ) I`.
    pub fn traceless_part(&self) -> Self {
        let dim = self.dim();
        let shift = self.trace / dim as f64;
        let m = self
            .matrix
            .sub(&CMatrix::identity(dim).scale_re(shift));
        Self::new(self.n, m).expect("shifting by identity preserves Hermiticity")
    }

    /// Entrywise conjugate; same spectrum, conjugated projectors.
    pub fn conjugate_observable(&self) -> Self {
        Self {
            n: self.n,
            matrix: self.matrix.conj(),
            groups: self
                .groups
                .iter()
                .map(|g| SpectralGroup {
                    value: g.value,
                    projector: g.projector.conj(),
                })
                .collect(),
            trace: self.trace,
            op_norm: self.op_norm,
            traceless_sq: self.traceless_sq,
        }
    }

    /// `⟨s|O|s⟩`.
    pub fn expectation_pure(&self, s: &PureState) -> Result<f64> {
        self.check_state(s)?;
        Ok(self.matrix.quadratic_form(s.amplitudes()).re)
    }

    /// Born-rule probabilities `⟨s|Πᵢ|s⟩`, in group order.
    pub fn measurement_probabilities(&self, s: &PureState) -> Result<Vec<f64>> {
        self.check_state(s)?;
        Ok(self
            .groups
            .iter()
            .map(|g| g.projector.quadratic_form(s.amplitudes()).re.max(0.0))
            .collect())
    }

    /// Samples an eigenvalue according to the Born rule.
    pub fn measure(&self, s: &PureState, rng: &mut RngStream) -> Result<f64> {
        let probs = self.measurement_probabilities(s)?;
        let idx = rng.weighted_index(&probs);
        Ok(self.groups[idx].value)
    }

    /// Estimate of `Tr(Oρ)` from one snapshot:
    /// `(2ⁿ+1)·⟨ζ*_{x,z}|O|ζ*_{x,z}⟩ − Tr(O)`, evaluated as a rank-one
    /// quadratic form without ever materializing the snapshot matrix.
    pub fn shadow_estimate(&self, snapshot: &Snapshot) -> Result<f64> {
        self.check_state(&snapshot.zeta)?;
        let shifted = snapshot.zeta.conjugate().apply_pauli(&snapshot.mask)?;
        let dim = self.dim() as f64;
        Ok((dim + 1.0) * self.matrix.quadratic_form(shifted.amplitudes()).re - self.trace)
    }

    fn check_state(&self, s: &PureState) -> Result<()> {
        if s.n() != self.n {
            return Err(Error::DimMismatch(format!(
                "observable over {} qubits applied to state over {}",
                self.n,
                s.n()
            )));
        }
        Ok(())
    }
}

/// Classical record of one snapshot experiment: the auxiliary state, the
/// measured bits, and the stream key it was generated from.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub zeta: PureState,
    pub mask: PauliMask,
    pub key: u64,
}

impl Snapshot {
    pub fn new(zeta: PureState, mask: PauliMask, key: u64) -> Result<Self> {
        if mask.n() != zeta.n() {
            return Err(Error::LengthMismatch {
                expected: zeta.n(),
                got: mask.n(),
            });
        }
        Ok(Self { zeta, mask, key })
    }

    /// The state `ζ*_{x,z}` whose projector defines the snapshot matrix.
    pub fn shifted_conjugate(&self) -> PureState {
        self.zeta
            .conjugate()
            .apply_pauli(&self.mask)
            .expect("mask length checked at construction")
    }

    /// Dense `ρ̂ = (2ⁿ+1)|ζ*_{x,z}⟩⟨ζ*_{x,z}| − I`; test oracle only, the
    /// estimator path never builds it.
    pub fn dense_snapshot_matrix(&self) -> CMatrix {
        let dim = 1usize << self.zeta.n();
        let proj = self.shifted_conjugate().projector();
        proj.scale_re(dim as f64 + 1.0)
            .sub(&CMatrix::identity(dim))
    }
}
