//! Quantum states, Pauli masks, and auxiliary-state samplers.
//!
//! Bit convention used everywhere: qubit 0 is the most significant bit of a
//! computational-basis index, and a Pauli mask stores its bit for qubit `i`
//! at position `n-1-i` of a `u64`, so masks line up with basis indices and
//! `popcount(z & b)` is the symplectic dot product directly.
//!
//! Global phases are never stripped; comparisons in tests go through
//! projectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64, ONE};
use crate::rng::RngStream;

const NORM_TOL: f64 = 1e-10;

/// Parity of `a & b` over F₂.
#[inline]
pub fn bit_dot(a: u64, b: u64) -> u64 {
    (a & b).count_ones() as u64 & 1
}

/// A normalized pure state of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(n: usize, amplitudes: CVector) -> Result<Self> {
        if amplitudes.dim() != 1 << n {
            return Err(Error::DimMismatch(format!(
                "state over {n} qubits needs {} amplitudes, got {}",
                1usize << n,
                amplitudes.dim()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "state norm {norm} deviates from 1 beyond {NORM_TOL}"
            )));
        }
        Ok(Self { n, amplitudes })
    }

    /// Builds a state from unnormalized amplitudes.
    pub fn normalized(n: usize, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("zero vector".into()));
        }
        Self::new(n, amplitudes.scale(C64::new(1.0 / norm, 0.0)))
    }

    pub fn basis(n: usize, index: u64) -> Self {
        let mut amps = CVector::zeros(1 << n);
        amps[index as usize] = ONE;
        Self {
            n,
            amplitudes: amps,
        }
    }

    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    /// `|+⟩^⊗n`.
    pub fn plus(n: usize) -> Self {
        let dim = 1usize << n;
        let amp = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            n,
            amplitudes: CVector::new(vec![amp; dim]),
        }
    }

    /// `((|0⟩ + i|1⟩)/√2)^⊗n`.
    pub fn plus_i(n: usize) -> Self {
        let dim = 1usize << n;
        let scale = 1.0 / (dim as f64).sqrt();
        let amps = (0..dim)
            .map(|b| {
                let ones = (b as u64).count_ones() % 4;
                let phase = match ones {
                    0 => C64::new(1.0, 0.0),
                    1 => C64::new(0.0, 1.0),
                    2 => C64::new(-1.0, 0.0),
                    _ => C64::new(0.0, -1.0),
                };
                phase * scale
            })
            .collect();
        Self {
            n,
            amplitudes: CVector::new(amps),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, basis: u64) -> C64 {
        self.amplitudes[basis as usize]
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.inner(&other.amplitudes)
    }

    /// `|⟨self|other⟩|²`, phase-free.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn projector(&self) -> CMatrix {
        self.amplitudes.outer()
    }

    /// Entrywise complex conjugate in the computational basis.
    pub fn conjugate(&self) -> Self {
        Self {
            n: self.n,
            amplitudes: self.amplitudes.conj(),
        }
    }

    /// Applies `X^x Z^z`: a `(-1)^{z·b}` phase, then the index shift `b → b⊕x`.
    pub fn apply_pauli(&self, mask: &PauliMask) -> Result<Self> {
        if mask.n() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: mask.n(),
            });
        }
        let dim = self.dim();
        let mut out = CVector::zeros(dim);
        for b in 0..dim as u64 {
            let src = b ^ mask.x();
            let sign = if bit_dot(mask.z(), src) == 1 { -1.0 } else { 1.0 };
            out[b as usize] = self.amplitudes[src as usize] * sign;
        }
        Ok(Self {
            n: self.n,
            amplitudes: out,
        })
    }

    /// Tensor product; `self` holds the leading qubits.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            n: self.n + other.n,
            amplitudes: self.amplitudes.kron(&other.amplitudes),
        }
    }
}

/// JSON form `{n, re, im}` used by CLI fixtures.
#[derive(Serialize, Deserialize)]
struct PureStateRepr {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = PureStateRepr {
            n: self.n,
            re: self.amplitudes.as_slice().iter().map(|c| c.re).collect(),
            im: self.amplitudes.as_slice().iter().map(|c| c.im).collect(),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PureStateRepr::deserialize(d)?;
        if repr.re.len() != repr.im.len() {
            return Err(serde::de::Error::custom("re/im length mismatch"));
        }
        let amps = CVector::new(
            repr.re
                .iter()
                .zip(&repr.im)
                .map(|(r, i)| C64::new(*r, *i))
                .collect(),
        );
        PureState::new(repr.n, amps).map_err(serde::de::Error::custom)
    }
}

/// Outcome bits of one snapshot experiment, doubling as the `X^x Z^z` label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliMask {
    n: usize,
    x: u64,
    z: u64,
}

impl PauliMask {
    pub fn new(n: usize, x: u64, z: u64) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidParameter(format!("bad qubit count {n}")));
        }
        let valid = if n == 64 { u64::MAX } else { (1 << n) - 1 };
        if x & !valid != 0 || z & !valid != 0 {
            return Err(Error::LengthMismatch { expected: n, got: 64 });
        }
        Ok(Self { n, x, z })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, x: 0, z: 0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn z(&self) -> u64 {
        self.z
    }

    /// Bit of `x` acting on qubit `i` (qubit 0 = most significant).
    pub fn x_bit(&self, qubit: usize) -> bool {
        (self.x >> (self.n - 1 - qubit)) & 1 == 1
    }

    pub fn z_bit(&self, qubit: usize) -> bool {
        (self.z >> (self.n - 1 - qubit)) & 1 == 1
    }

    /// MSB-first bit string, qubit 0 leftmost.
    pub fn x_string(&self) -> String {
        format!("{:0width$b}", self.x, width = self.n)
    }

    pub fn z_string(&self) -> String {
        format!("{:0width$b}", self.z, width = self.n)
    }

    /// Packs into the flat outcome index `(x << n) | z`.
    pub fn outcome_index(&self) -> u64 {
        (self.x << self.n) | self.z
    }

    pub fn from_outcome_index(n: usize, index: u64) -> Result<Self> {
        let mask = (1u64 << n) - 1;
        Self::new(n, (index >> n) & mask, index & mask)
    }
}

/// A density matrix: Hermitian, PSD, unit trace.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(n: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.rows() != 1 << n || !matrix.is_square() {
            return Err(Error::DimMismatch(format!(
                "density matrix over {n} qubits must be {0}x{0}",
                1usize << n
            )));
        }
        matrix.check_hermitian()?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace {tr} deviates from 1"
            )));
        }
        let eig = crate::linalg::hermitian_eig(&matrix)?;
        if let Some(min) = eig.values.last() {
            if *min < -NORM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "density matrix has negative eigenvalue {min}"
                )));
            }
        }
        Ok(Self { n, matrix })
    }

    pub fn pure(state: &PureState) -> Self {
        Self {
            n: state.n(),
            matrix: state.projector(),
        }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        Self {
            n,
            matrix: CMatrix::identity(dim).scale_re(1.0 / dim as f64),
        }
    }

    /// Full-rank random state: `GG†/Tr(GG†)` with complex Gaussian `G`.
    pub fn random_mixed(n: usize, rng: &mut RngStream) -> Self {
        let dim = 1usize << n;
        let g = CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.standard_normal(), rng.standard_normal())
        });
        let w = g.matmul(&g.adjoint());
        let tr = w.trace().re;
        Self {
            n,
            matrix: w.scale_re(1.0 / tr).symmetrize(),
        }
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

    /// `Tr(Oρ)` for a Hermitian `o` of matching dimension.
    pub fn expectation_of(&self, o: &CMatrix) -> f64 {
        o.matmul(&self.matrix).trace().re
    }
}

#[derive(Serialize, Deserialize)]
struct DensityRepr {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = DensityRepr {
            n: self.n,
            re: self.matrix.data().iter().map(|c| c.re).collect(),
            im: self.matrix.data().iter().map(|c| c.im).collect(),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = DensityRepr::deserialize(d)?;
        let dim = 1usize << repr.n;
        if repr.re.len() != dim * dim || repr.im.len() != dim * dim {
            return Err(serde::de::Error::custom("density entry count mismatch"));
        }
        let m = CMatrix::from_fn(dim, dim, |r, c| {
            C64::new(repr.re[r * dim + c], repr.im[r * dim + c])
        });
        DensityMatrix::new(repr.n, m).map_err(serde::de::Error::custom)
    }
}

/// Haar-random pure state via the Ginibre construction.
pub fn haar_sample(n: usize, rng: &mut RngStream) -> PureState {
    let dim = 1usize << n;
    let amps = CVector::new(
        (0..dim)
            .map(|_| C64::new(rng.standard_normal(), rng.standard_normal()))
            .collect(),
    );
    PureState::normalized(n, amps).expect("Gaussian vector is nonzero")
}

/// Orthogonally invariant real-amplitude state; the negative control.
pub fn real_haar_sample(n: usize, rng: &mut RngStream) -> PureState {
    let dim = 1usize << n;
    let amps = CVector::new(
        (0..dim)
            .map(|_| C64::new(rng.standard_normal(), 0.0))
            .collect(),
    );
    PureState::normalized(n, amps).expect("Gaussian vector is nonzero")
}

/// `2^{-n/2} Σ_x (-1)^{f(x)} |x⟩` with a fresh uniformly random `f` per call.
pub fn binary_phase_sample(n: usize, rng: &mut RngStream) -> PureState {
    let dim = 1usize << n;
    let scale = 1.0 / (dim as f64).sqrt();
    let amps = CVector::new(
        (0..dim)
            .map(|_| {
                let sign = if rng.coin(0.5) { -1.0 } else { 1.0 };
                C64::new(sign * scale, 0.0)
            })
            .collect(),
    );
    PureState {
        n,
        amplitudes: amps,
    }
}

// --- stabilizer states ------------------------------------------------------
//
// Parametrization: an affine subspace A = {Ru ⊕ t} of dimension k together
// with phase data (d ∈ Z₄^k, B upper-triangular bits) defines
//
//     |ψ⟩ = 2^{-k/2} Σ_{u ∈ F₂^k} i^{d·u} (-1)^{Σ_{i<j} B_{ij} u_i u_j} |Ru ⊕ t⟩.
//
// For a fixed subspace, basis, and base point, (d, B) ranges bijectively over
// the stabilizer states supported on A whose amplitude at |t⟩ is positive
// real, and each projector is reached once per choice of base point. Uniform
// draws of (k by state count, R, t, d, B) are therefore uniform over all
// stabilizer states, and the canonical enumeration (minimal coset
// representative, reduced basis) lists each state exactly once.

const I_POWERS: [C64; 4] = [
    C64::new(1.0, 0.0),
    C64::new(0.0, 1.0),
    C64::new(-1.0, 0.0),
    C64::new(0.0, -1.0),
];

/// Number of unordered pairs `(i, j)` with `i < j < k`.
fn pair_count(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Gaussian binomial coefficient `[n k]_2`: the number of k-dimensional
/// subspaces of F₂ⁿ.
fn gaussian_binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    // DP over [m j] = [m-1 j-1] + 2^j [m-1 j].
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for _m in 1..=n {
        for j in (1..=k).rev() {
            row[j] = row[j - 1] + (1u128 << j) * row[j];
        }
    }
    row[k]
}

/// Number of distinct stabilizer states: `2^n Π_{k=1..n} (2^k + 1)`.
pub fn stabilizer_count(n: usize) -> u128 {
    let mut count = 1u128 << n;
    for k in 1..=n {
        count *= (1u128 << k) + 1;
    }
    count
}

/// Per-dimension state counts used as sampling weights.
fn stabilizer_dim_weights(n: usize) -> Vec<u128> {
    (0..=n)
        .map(|k| {
            let affine = (1u128 << (n - k)) * gaussian_binomial(n, k);
            let phases = (1u128 << (2 * k)) * (1u128 << pair_count(k));
            affine * phases
        })
        .collect()
}

/// Rank of a set of F₂ⁿ vectors, by elimination.
fn f2_rank(cols: &[u64]) -> usize {
    let mut pivots: Vec<u64> = Vec::new();
    for &c in cols {
        let mut v = c;
        for &p in &pivots {
            let high = 63 - p.leading_zeros() as usize;
            if (v >> high) & 1 == 1 {
                v ^= p;
            }
        }
        if v != 0 {
            pivots.push(v);
            pivots.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    pivots.len()
}

fn build_stabilizer_state(
    n: usize,
    basis: &[u64],
    shift: u64,
    d: &[u8],
    b_bits: u64,
) -> PureState {
    let k = basis.len();
    let dim = 1usize << n;
    let scale = 1.0 / ((1u64 << k) as f64).sqrt();
    let mut amps = CVector::zeros(dim);
    for u in 0..(1u64 << k) {
        let mut point = shift;
        let mut phase_i = 0u8;
        let mut quad = 0u64;
        for i in 0..k {
            if (u >> i) & 1 == 1 {
                point ^= basis[i];
                phase_i = (phase_i + d[i]) & 3;
                for j in (i + 1)..k {
                    if (u >> j) & 1 == 1 {
                        let pair = pair_index(i, j, k);
                        quad ^= (b_bits >> pair) & 1;
                    }
                }
            }
        }
        let sign = if quad == 1 { -1.0 } else { 1.0 };
        amps[point as usize] = I_POWERS[phase_i as usize] * (sign * scale);
    }
    PureState {
        n,
        amplitudes: amps,
    }
}

/// Linear index of the unordered pair `(i, j)`, `i < j < k`.
fn pair_index(i: usize, j: usize, k: usize) -> usize {
    debug_assert!(i < j && j < k);
    i * k - i * (i + 1) / 2 + (j - i - 1)
}

/// Uniform draw over all stabilizer states of `n` qubits.
pub fn stabilizer_sample(n: usize, rng: &mut RngStream) -> PureState {
    let weights: Vec<f64> = stabilizer_dim_weights(n)
        .iter()
        .map(|w| *w as f64)
        .collect();
    let k = rng.weighted_index(&weights);

    // Uniform k-dimensional subspace: random n×k matrix conditioned on full
    // rank; every subspace has the same number of bases.
    let mut basis = vec![0u64; k];
    if k > 0 {
        loop {
            for b in basis.iter_mut() {
                *b = rng.bits(n);
            }
            if f2_rank(&basis) == k {
                break;
            }
        }
    }
    let shift = rng.bits(n);
    let d: Vec<u8> = (0..k).map(|_| rng.below(4) as u8).collect();
    let b_bits = rng.bits(pair_count(k));
    build_stabilizer_state(n, &basis, shift, &d, b_bits)
}

/// Reduced (pivot-echelon) basis of the linear span of `elems`.
fn reduced_basis(elems: &[u64]) -> Vec<u64> {
    let mut pivots: Vec<u64> = Vec::new();
    for &e in elems {
        let mut v = e;
        for &p in &pivots {
            let high = 63 - p.leading_zeros() as usize;
            if (v >> high) & 1 == 1 {
                v ^= p;
            }
        }
        if v != 0 {
            pivots.push(v);
            pivots.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    // Back-substitute so each pivot bit appears in exactly one basis vector.
    let snapshot = pivots.clone();
    for (i, pivot) in pivots.iter_mut().enumerate() {
        for (j, &other) in snapshot.iter().enumerate() {
            if i != j {
                let high = 63 - other.leading_zeros() as usize;
                if (*pivot >> high) & 1 == 1 && *pivot != other {
                    *pivot ^= other;
                }
            }
        }
    }
    pivots.sort_unstable();
    pivots
}

/// Every stabilizer state of `n ≤ 3` qubits, each exactly once.
pub fn stabilizer_enumerate(n: usize) -> Result<Vec<PureState>> {
    if n == 0 || n > 3 {
        return Err(Error::SizeLimit(format!(
            "stabilizer enumeration supports 1..=3 qubits, got {n}"
        )));
    }
    let dim = 1usize << n;
    let full: Vec<u64> = (0..dim as u64).collect();

    // All linear subspaces, by brute-force closure over subsets containing 0.
    let mut subspaces: Vec<Vec<u64>> = Vec::new();
    for mask in 0u32..(1 << dim) {
        if mask & 1 == 0 {
            continue;
        }
        let elems: Vec<u64> = full.iter().copied().filter(|&v| (mask >> v) & 1 == 1).collect();
        let closed = elems
            .iter()
            .all(|&a| elems.iter().all(|&b| elems.contains(&(a ^ b))));
        if closed {
            subspaces.push(elems);
        }
    }

    let mut states = Vec::new();
    for subspace in &subspaces {
        let basis = reduced_basis(subspace);
        let k = basis.len();
        debug_assert_eq!(1 << k, subspace.len());

        // Canonical coset representatives: minimal element of each coset.
        let mut seen = vec![false; dim];
        let mut shifts = Vec::new();
        for t in 0..dim as u64 {
            if !seen[t as usize] {
                shifts.push(t);
                for &s in subspace {
                    seen[(t ^ s) as usize] = true;
                }
            }
        }

        let quad_count = 1u64 << pair_count(k);
        for &shift in &shifts {
            let mut d = vec![0u8; k];
            loop {
                for b_bits in 0..quad_count {
                    states.push(build_stabilizer_state(n, &basis, shift, &d, b_bits));
                }
                // Odometer over Z₄^k.
                let mut pos = 0;
                loop {
                    if pos == k {
                        break;
                    }
                    d[pos] = (d[pos] + 1) & 3;
                    if d[pos] != 0 {
                        break;
                    }
                    pos += 1;
                }
                if pos == k {
                    break;
                }
            }
        }
    }
    debug_assert_eq!(states.len() as u128, stabilizer_count(n));
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn projector_distance(a: &PureState, b: &PureState) -> f64 {
        a.projector().sub(&b.projector()).max_abs()
    }

    #[test]
    fn pauli_action_basics() {
        let s = PureState::zero(1);
        let flipped = s.apply_pauli(&PauliMask::new(1, 1, 0).unwrap()).unwrap();
        assert_eq!(flipped.amplitude(1), ONE);
        let phased = s.apply_pauli(&PauliMask::new(1, 0, 1).unwrap()).unwrap();
        assert_eq!(phased.amplitude(0), ONE);
        let plus = PureState::plus(1);
        let minus = plus.apply_pauli(&PauliMask::new(1, 0, 1).unwrap()).unwrap();
        assert!((minus.amplitude(0).re - minus.amplitude(1).re.abs()).abs() < 1e-15);
        assert!(minus.amplitude(1).re < 0.0);
    }

    #[test]
    fn pauli_is_isometry_and_involution_up_to_phase() {
        let mut rng = RngStream::from_seed(3);
        for n in 1..=3usize {
            let s = haar_sample(n, &mut rng);
            let mask = PauliMask::new(n, rng.bits(n), rng.bits(n)).unwrap();
            let t = s.apply_pauli(&mask).unwrap();
            assert!((t.amplitudes().norm() - 1.0).abs() < 1e-12);
            let back = t.apply_pauli(&mask).unwrap();
            assert!(projector_distance(&back, &s) < 1e-12);
        }
    }

    #[test]
    fn conjugate_commutes_with_pauli_on_projectors() {
        let mut rng = RngStream::from_seed(4);
        let s = haar_sample(2, &mut rng);
        let mask = PauliMask::new(2, 0b10, 0b11).unwrap();
        let a = s.apply_pauli(&mask).unwrap().conjugate();
        let b = s.conjugate().apply_pauli(&mask).unwrap();
        assert!(projector_distance(&a, &b) < 1e-12);
    }

    #[test]
    fn conjugate_is_involution() {
        let mut rng = RngStream::from_seed(5);
        let s = haar_sample(3, &mut rng);
        assert_eq!(s.conjugate().conjugate(), s);

        // (|0⟩ + i|1⟩)/√2 conjugates to (|0⟩ − i|1⟩)/√2.
        let c = PureState::plus_i(1).conjugate();
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        assert!((c.amplitude(0) - C64::new(inv, 0.0)).norm() < 1e-15);
        assert!((c.amplitude(1) - C64::new(0.0, -inv)).norm() < 1e-15);
    }

    #[test]
    fn haar_low_moments() {
        let rng = RngStream::from_seed(6);
        let shots = 100_000;
        // E|⟨0|ψ⟩|² = 1/4 for n = 2.
        let samples: Vec<f64> = (0..shots)
            .map(|i| {
                let s = haar_sample(2, &mut rng.substream(i));
                s.amplitude(0).norm_sqr()
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / shots as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / shots as f64;
        let se = (var / shots as f64).sqrt();
        assert!((mean - 0.25).abs() <= 5.0 * se, "mean {mean}, se {se}");

        // E|⟨0|ψ⟩|⁴ = 1/3 for n = 1.
        let samples: Vec<f64> = (0..shots)
            .map(|i| {
                let s = haar_sample(1, &mut rng.substream(shots + i));
                s.amplitude(0).norm_sqr().powi(2)
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / shots as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / shots as f64;
        let se = (var / shots as f64).sqrt();
        assert!((mean - 1.0 / 3.0).abs() <= 5.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn sampler_outputs_normalized() {
        let rng = RngStream::from_seed(7);
        for i in 0..50 {
            let s = haar_sample(3, &mut rng.substream(i));
            assert!((s.amplitudes().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn binary_phase_shape() {
        let mut rng = RngStream::from_seed(8);
        let s = binary_phase_sample(3, &mut rng);
        let expected = 1.0 / 8.0f64.sqrt();
        for b in 0..8 {
            let a = s.amplitude(b);
            assert_eq!(a.im, 0.0);
            assert!((a.re.abs() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn real_haar_is_real() {
        let mut rng = RngStream::from_seed(9);
        let s = real_haar_sample(2, &mut rng);
        assert!(s.amplitudes().as_slice().iter().all(|c| c.im == 0.0));
        assert!((s.amplitudes().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stabilizer_counts() {
        assert_eq!(stabilizer_count(1), 6);
        assert_eq!(stabilizer_count(2), 60);
        assert_eq!(stabilizer_count(3), 1080);
        for n in 1..=6 {
            let total: u128 = stabilizer_dim_weights(n).iter().sum();
            assert_eq!(total, stabilizer_count(n), "weights disagree at n={n}");
        }
    }

    #[test]
    fn stabilizer_enumeration_distinct() {
        for n in 1..=2usize {
            let states = stabilizer_enumerate(n).unwrap();
            assert_eq!(states.len() as u128, stabilizer_count(n));
            for i in 0..states.len() {
                for j in (i + 1)..states.len() {
                    assert!(
                        projector_distance(&states[i], &states[j]) > 1e-6,
                        "duplicate stabilizer state at n={n}: {i} vs {j}"
                    );
                }
            }
        }
        // n=3 count only; pairwise distinctness is covered by the hash below.
        let states = stabilizer_enumerate(3).unwrap();
        assert_eq!(states.len(), 1080);
        let mut keys: Vec<String> = states
            .iter()
            .map(|s| {
                let p = s.projector();
                p.data()
                    .iter()
                    .map(|c| format!("{:.6},{:.6};", c.re, c.im))
                    .collect()
            })
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 1080);
    }

    #[test]
    fn stabilizer_single_qubit_set() {
        let states = stabilizer_enumerate(1).unwrap();
        let expected = [
            PureState::zero(1),
            PureState::basis(1, 1),
            PureState::plus(1),
            PureState::normalized(
                1,
                CVector::new(vec![ONE, C64::new(-1.0, 0.0)]),
            )
            .unwrap(),
            PureState::plus_i(1),
            PureState::normalized(1, CVector::new(vec![ONE, C64::new(0.0, -1.0)])).unwrap(),
        ];
        for e in &expected {
            assert!(
                states.iter().any(|s| projector_distance(s, e) < 1e-10),
                "missing expected single-qubit stabilizer state"
            );
        }
    }

    #[test]
    fn stabilizer_sampler_matches_enumeration_marginals() {
        // Frequency of each of the 6 single-qubit states should be ~1/6.
        let rng = RngStream::from_seed(12);
        let states = stabilizer_enumerate(1).unwrap();
        let mut counts = vec![0usize; 6];
        let shots = 30_000;
        for i in 0..shots {
            let s = stabilizer_sample(1, &mut rng.substream(i));
            let idx = states
                .iter()
                .position(|t| projector_distance(t, &s) < 1e-8)
                .expect("sample must be a stabilizer state");
            counts[idx] += 1;
        }
        for c in counts {
            let f = c as f64 / shots as f64;
            assert!((f - 1.0 / 6.0).abs() < 0.02, "frequency {f}");
        }
    }

    #[test]
    fn state_json_round_trip() {
        let mut rng = RngStream::from_seed(13);
        let s = haar_sample(2, &mut rng);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"re\""));
        let back: PureState = serde_json::from_str(&json).unwrap();
        assert!((s.inner(&back).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_validation() {
        let mut rng = RngStream::from_seed(14);
        let rho = DensityMatrix::random_mixed(2, &mut rng);
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        let bad = CMatrix::identity(4);
        assert!(DensityMatrix::new(2, bad).is_err());
    }

    proptest::proptest! {
        #[test]
        fn pauli_double_application_is_projector_identity(
            seed in 0u64..200, n in 1usize..4, x in 0u64..8, z in 0u64..8
        ) {
            let mut rng = RngStream::from_seed(seed);
            let dim_mask = (1u64 << n) - 1;
            let mask = PauliMask::new(n, x & dim_mask, z & dim_mask).unwrap();
            let s = haar_sample(n, &mut rng);
            let twice = s.apply_pauli(&mask).unwrap().apply_pauli(&mask).unwrap();
            let d = twice.projector().sub(&s.projector()).max_abs();
            proptest::prop_assert!(d < 1e-12);
        }
    }
}
