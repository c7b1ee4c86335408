//! The snapshot protocol: Bell-basis circuit sampling, median-of-means
//! estimation with guarantee-matched batch counts, and the measurement
//! channel with its depolarizing inverse.
//!
//! One experiment entangles the input register with an auxiliary state by
//! transversal CNOTs, applies Hadamards to the input register, and measures
//! both registers, yielding bits `(z, x)`. The snapshot `(ζ, x, z)` estimates
//! `Tr(Oρ)` through `(2ⁿ+1)⟨ζ*_{x,z}|O|ζ*_{x,z}⟩ − Tr(O)`.
//!
//! The gate-by-gate circuit is the production sampling path; the analytic
//! outcome law `Pr[x,z|ζ] = ⟨ζ*_{x,z}|ρ|ζ*_{x,z}⟩/2ⁿ` is kept as an
//! independent oracle and never feeds the sampler.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, CMatrix, C64};
use crate::moments::{ensemble_moment, Ensemble, MomentMode};
use crate::observables::{Observable, Snapshot};
use crate::parallel::try_map_indexed;
use crate::rng::RngStream;
use crate::states::{DensityMatrix, PauliMask, PureState};

/// Largest qubit count for the dense `4ⁿ` outcome table.
const MAX_OUTCOME_TABLE_QUBITS: usize = 7;

/// Which estimator guarantee parametrizes planning and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundKind {
    /// Exact design: no bias, no variance slack.
    Exact,
    /// Relative ε-approximate design; requires a positive observable.
    Relative { epsilon: f64 },
    /// Additive ε-approximate design.
    Additive { epsilon: f64 },
    /// Pseudo-design with distinguishing advantage ε.
    Pseudo { epsilon: f64 },
}

impl BoundKind {
    /// Bias allowance added to the accuracy target.
    pub fn bias_bound(&self, o: &Observable) -> f64 {
        let big_n = (1u64 << o.n()) as f64;
        match self {
            BoundKind::Exact => 0.0,
            BoundKind::Relative { epsilon } => 2.0 * epsilon * o.trace(),
            BoundKind::Additive { epsilon } => (big_n + 1.0) * epsilon * o.op_norm(),
            BoundKind::Pseudo { epsilon } => 2.0 * (big_n + 1.0) * epsilon * o.op_norm(),
        }
    }

    /// The ε-dependent term of the per-snapshot variance bound.
    pub fn variance_slack(&self, o: &Observable) -> f64 {
        let big_n = (1u64 << o.n()) as f64;
        let norm_term = o.op_norm().powi(2) * (big_n + 1.0).powi(2);
        match self {
            BoundKind::Exact => 0.0,
            BoundKind::Relative { epsilon } => 10.0 * epsilon * o.trace().powi(2),
            BoundKind::Additive { epsilon } => 3.0 * epsilon * norm_term,
            BoundKind::Pseudo { epsilon } => 6.0 * epsilon * norm_term,
        }
    }

    /// Full per-snapshot variance bound `3·Tr(O₀²) + slack`.
    pub fn variance_bound(&self, o: &Observable) -> f64 {
        3.0 * o.traceless_sq() + self.variance_slack(o)
    }

    fn epsilon(&self) -> f64 {
        match self {
            BoundKind::Exact => 0.0,
            BoundKind::Relative { epsilon }
            | BoundKind::Additive { epsilon }
            | BoundKind::Pseudo { epsilon } => *epsilon,
        }
    }
}

/// Shot budget for one estimator run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub gamma: f64,
    pub delta: f64,
    pub k: usize,
    pub l: usize,
    pub bound_kind: BoundKind,
}

impl EstimatorConfig {
    pub fn total_shots(&self) -> u64 {
        self.k as u64 * self.l as u64
    }
}

/// Batch counts backing the estimator guarantees: `K = ⌈2 ln(2/δ)⌉` (natural log,
/// matching the `2e^{−K/2}` tail) and
/// `L = ⌈(34/γ²)(3 Tr(O₀²) + slack)⌉`, clamped to at least 1.
///
/// The relative kind demands a positive semidefinite observable.
pub fn plan(gamma: f64, delta: f64, bound_kind: BoundKind, o: &Observable) -> Result<EstimatorConfig> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    if bound_kind.epsilon() < 0.0 {
        return Err(Error::InvalidParameter("epsilon must be nonnegative".into()));
    }
    if matches!(bound_kind, BoundKind::Relative { .. }) && !o.is_positive_semidefinite() {
        return Err(Error::NonPositiveObservable(o.min_eigenvalue()));
    }
    let k = (2.0 * (2.0 / delta).ln()).ceil().max(1.0) as usize;
    let l_raw = 34.0 / gamma.powi(2) * (3.0 * o.traceless_sq() + bound_kind.variance_slack(o));
    // Round-off guard so values one ulp above an integer do not bump L.
    let l = (l_raw * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    Ok(EstimatorConfig {
        gamma,
        delta,
        k,
        l,
        bound_kind,
    })
}

/// Source of input-register states: a pure state, or a density matrix
/// eigendecomposed once so each shot draws an eigenvector by weight.
#[derive(Debug, Clone)]
pub struct StateSource {
    n: usize,
    components: Vec<(PureState, f64)>,
    density: DensityMatrix,
}

impl StateSource {
    pub fn from_pure(state: PureState) -> Self {
        let density = DensityMatrix::pure(&state);
        Self {
            n: state.n(),
            components: vec![(state, 1.0)],
            density,
        }
    }

    pub fn from_density(rho: DensityMatrix) -> Result<Self> {
        let eig = hermitian_eig(rho.matrix())?;
        let mut components = Vec::new();
        for (idx, lambda) in eig.values.iter().enumerate() {
            if *lambda <= 1e-12 {
                continue;
            }
            let column = eig.vectors.column(idx);
            components.push((PureState::normalized(rho.n(), column)?, *lambda));
        }
        if components.is_empty() {
            return Err(Error::InvalidParameter("density matrix has no support".into()));
        }
        let total: f64 = components.iter().map(|(_, w)| w).sum();
        for c in components.iter_mut() {
            c.1 /= total;
        }
        Ok(Self {
            n: rho.n(),
            components,
            density: rho,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn density(&self) -> &DensityMatrix {
        &self.density
    }

    pub fn sample_pure(&self, rng: &mut RngStream) -> &PureState {
        if self.components.len() == 1 {
            return &self.components[0].0;
        }
        let weights: Vec<f64> = self.components.iter().map(|(_, w)| *w).collect();
        &self.components[rng.weighted_index(&weights)].0
    }
}

/// Analytic outcome law: the `4ⁿ` table of
/// `Pr[x,z|ζ] = ⟨ζ*_{x,z}|ρ|ζ*_{x,z}⟩ / 2ⁿ`, indexed by `(x << n) | z`.
pub fn outcome_distribution(rho: &DensityMatrix, zeta: &PureState) -> Result<Vec<f64>> {
    if rho.n() != zeta.n() {
        return Err(Error::DimMismatch(format!(
            "input state has {} qubits, auxiliary has {}",
            rho.n(),
            zeta.n()
        )));
    }
    let n = rho.n();
    if n > MAX_OUTCOME_TABLE_QUBITS {
        return Err(Error::SizeLimit(format!(
            "outcome table needs n ≤ {MAX_OUTCOME_TABLE_QUBITS}, got {n}"
        )));
    }
    let dim = 1usize << n;
    let scale = 1.0 / dim as f64;
    let conj = zeta.conjugate();
    let mut table = vec![0.0f64; dim * dim];
    for (idx, entry) in table.iter_mut().enumerate() {
        let mask = PauliMask::from_outcome_index(n, idx as u64)?;
        let shifted = conj.apply_pauli(&mask)?;
        *entry = (rho.matrix().quadratic_form(shifted.amplitudes()).re * scale).max(0.0);
    }
    debug_assert!((table.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    Ok(table)
}

/// Simulates one run of the snapshot circuit on `ψ ⊗ ζ`: transversal CNOTs
/// (input controls, auxiliary targets), Hadamards on the input register, and
/// a computational measurement returning `z` (input register) and `x`
/// (auxiliary register).
pub fn bell_measure_circuit(
    psi: &PureState,
    zeta: &PureState,
    rng: &mut RngStream,
) -> Result<PauliMask> {
    if psi.n() != zeta.n() {
        return Err(Error::DimMismatch(format!(
            "input state has {} qubits, auxiliary has {}",
            psi.n(),
            zeta.n()
        )));
    }
    let n = psi.n();
    let local = 1usize << n;
    let mut joint = psi.amplitudes().kron(zeta.amplitudes()).into_vec();

    // CNOT on qubit pair i: control bit in the input register (high half),
    // target in the auxiliary register (low half).
    for i in 0..n {
        let control = 1usize << (2 * n - 1 - i);
        let target = 1usize << (n - 1 - i);
        for idx in 0..joint.len() {
            if idx & control != 0 && idx & target == 0 {
                joint.swap(idx, idx | target);
            }
        }
    }

    // Hadamards on the input register.
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        let bit = 1usize << (2 * n - 1 - i);
        for idx in 0..joint.len() {
            if idx & bit == 0 {
                let lo = joint[idx];
                let hi = joint[idx | bit];
                joint[idx] = (lo + hi) * inv_sqrt2;
                joint[idx | bit] = (lo - hi) * inv_sqrt2;
            }
        }
    }

    // Born sample of the joint computational measurement.
    let u = rng.uniform();
    let mut acc = 0.0;
    let mut outcome = joint.len() - 1;
    for (idx, amp) in joint.iter().enumerate() {
        acc += amp.norm_sqr();
        if u < acc {
            outcome = idx;
            break;
        }
    }
    let z = (outcome >> n) as u64;
    let x = (outcome & (local - 1)) as u64;
    PauliMask::new(n, x, z)
}

/// One full snapshot experiment: draw the input eigenvector and the
/// auxiliary state, run the circuit, record `(ζ, x, z)` under `key`.
pub fn generate_snapshot(
    source: &StateSource,
    ensemble: &Ensemble,
    rng: &mut RngStream,
    key: u64,
) -> Result<Snapshot> {
    if source.n() != ensemble.n() {
        return Err(Error::DimMismatch(format!(
            "state source over {} qubits, ensemble over {}",
            source.n(),
            ensemble.n()
        )));
    }
    let psi = source.sample_pure(rng).clone();
    let zeta = ensemble.sample(rng);
    let mask = bell_measure_circuit(&psi, &zeta, rng)?;
    Snapshot::new(zeta, mask, key)
}

/// Per-shot estimates for `shots` snapshots, shot `i` on `base.substream(i)`.
pub fn shadow_estimates(
    source: &StateSource,
    ensemble: &Ensemble,
    o: &Observable,
    shots: u64,
    base: &RngStream,
) -> Result<Vec<f64>> {
    try_map_indexed(shots, |i| {
        let mut stream = base.substream(i);
        let snap = generate_snapshot(source, ensemble, &mut stream, i)?;
        o.shadow_estimate(&snap)
    })
}

/// Median of `k` means over consecutive blocks of `l` values. For even `k`
/// the two middle block means are averaged; `k = 1` is the plain mean.
pub fn median_of_means(values: &[f64], k: usize, l: usize) -> Result<f64> {
    if k == 0 || l == 0 || values.len() != k * l {
        return Err(Error::LengthMismatch {
            expected: k * l,
            got: values.len(),
        });
    }
    let mut means: Vec<f64> = values
        .chunks_exact(l)
        .map(|block| block.iter().sum::<f64>() / l as f64)
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = k / 2;
    Ok(if k % 2 == 1 {
        means[mid]
    } else {
        (means[mid - 1] + means[mid]) / 2.0
    })
}

/// Outcome of one estimator run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub k: usize,
    pub l: usize,
    pub total_shots: u64,
    pub empirical_variance: f64,
    pub bias_bound: f64,
    pub variance_bound: f64,
    pub seed: u64,
}

/// Runs the estimator: `K·L` snapshots, per-shot estimates, median of means.
pub fn estimate_observable(
    source: &StateSource,
    ensemble: &Ensemble,
    o: &Observable,
    config: &EstimatorConfig,
    seed: u64,
) -> Result<EstimateReport> {
    let base = RngStream::from_seed(seed);
    let values = shadow_estimates(source, ensemble, o, config.total_shots(), &base)?;
    let estimate = median_of_means(&values, config.k, config.l)?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let empirical_variance = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64
    } else {
        0.0
    };
    Ok(EstimateReport {
        estimate,
        k: config.k,
        l: config.l,
        total_shots: config.total_shots(),
        empirical_variance,
        bias_bound: config.bound_kind.bias_bound(o),
        variance_bound: config.bound_kind.variance_bound(o),
        seed,
    })
}

/// One recorded shot for CSV dumps.
#[derive(Debug, Clone, Serialize)]
pub struct ShotRecord {
    pub shot_id: u64,
    pub ensemble_key: u64,
    pub x: String,
    pub z: String,
    pub estimate: f64,
}

/// [`estimate_observable`] that also returns per-shot records. Identical
/// numbers: the same substream layout drives both paths.
pub fn estimate_observable_recorded(
    source: &StateSource,
    ensemble: &Ensemble,
    o: &Observable,
    config: &EstimatorConfig,
    seed: u64,
) -> Result<(EstimateReport, Vec<ShotRecord>)> {
    let base = RngStream::from_seed(seed);
    let shots = config.total_shots();
    let records: Vec<(f64, ShotRecord)> = try_map_indexed(shots, |i| {
        let mut stream = base.substream(i);
        let snap = generate_snapshot(source, ensemble, &mut stream, i)?;
        let estimate = o.shadow_estimate(&snap)?;
        Ok::<_, Error>((
            estimate,
            ShotRecord {
                shot_id: i,
                ensemble_key: snap.key,
                x: snap.mask.x_string(),
                z: snap.mask.z_string(),
                estimate,
            },
        ))
    })?;
    let values: Vec<f64> = records.iter().map(|(v, _)| *v).collect();
    let estimate = median_of_means(&values, config.k, config.l)?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let empirical_variance = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64
    } else {
        0.0
    };
    let report = EstimateReport {
        estimate,
        k: config.k,
        l: config.l,
        total_shots: shots,
        empirical_variance,
        bias_bound: config.bound_kind.bias_bound(o),
        variance_bound: config.bound_kind.variance_bound(o),
        seed,
    };
    Ok((report, records.into_iter().map(|(_, r)| r).collect()))
}

/// Sample mean/variance of per-shot estimates against the true value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BiasVariance {
    pub shots: u64,
    pub mean: f64,
    pub true_value: f64,
    pub bias: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
}

pub fn empirical_bias_variance(
    source: &StateSource,
    ensemble: &Ensemble,
    o: &Observable,
    shots: u64,
    base: &RngStream,
) -> Result<BiasVariance> {
    if shots < 2 {
        return Err(Error::InvalidParameter("need at least two shots".into()));
    }
    let values = shadow_estimates(source, ensemble, o, shots, base)?;
    let m = shots as f64;
    let mean = values.iter().sum::<f64>() / m;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let fourth = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / m;
    let se_mean = (variance / m).sqrt();
    let se_variance = ((fourth - variance.powi(2)).max(0.0) / m).sqrt();
    let true_value = source.density().expectation_of(o.matrix());
    Ok(BiasVariance {
        shots,
        mean,
        true_value,
        bias: mean - true_value,
        variance,
        se_mean,
        se_variance,
    })
}

/// Exact measurement channel of the ensemble applied to `rho`:
/// `ℳ(ρ) = E_ζ Σ_{x,z} Pr[x,z|ζ] |ζ*_{x,z}⟩⟨ζ*_{x,z}|`, evaluated from the
/// ensemble's exact 2-copy moment.
pub fn channel_apply(ensemble: &Ensemble, rho: &DensityMatrix) -> Result<CMatrix> {
    if ensemble.n() != rho.n() {
        return Err(Error::DimMismatch(format!(
            "ensemble over {} qubits, state over {}",
            ensemble.n(),
            rho.n()
        )));
    }
    if !ensemble.has_exact_moment(2) {
        return Err(Error::NotEnumerable);
    }
    let rng = RngStream::from_seed(0);
    let m2 = ensemble_moment(ensemble, 2, MomentMode::Exact, &rng)?;
    let w = m2.matrix().conj();
    channel_from_two_copy(&w, rho)
}

/// Monte-Carlo channel: averages the exact conditional channel of sampled
/// auxiliary states.
pub fn channel_apply_mc(
    ensemble: &Ensemble,
    rho: &DensityMatrix,
    samples: u64,
    base: &RngStream,
) -> Result<CMatrix> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let n = rho.n();
    let dim = 1usize << n;
    let partials = try_map_indexed(samples, |i| {
        let mut stream = base.substream(i);
        let zeta = ensemble.sample(&mut stream);
        let conj = zeta.conjugate();
        let mut acc = CMatrix::zeros(dim, dim);
        for idx in 0..(dim * dim) as u64 {
            let mask = PauliMask::from_outcome_index(n, idx)?;
            let shifted = conj.apply_pauli(&mask)?;
            let pr = rho.matrix().quadratic_form(shifted.amplitudes()).re / dim as f64;
            for r in 0..dim {
                for c in 0..dim {
                    let entry = shifted.amplitudes()[r] * shifted.amplitudes()[c].conj() * pr;
                    acc[(r, c)] += entry;
                }
            }
        }
        Ok::<_, Error>(acc)
    })?;
    let mut total = CMatrix::zeros(dim, dim);
    for p in partials {
        total = total.add(&p);
    }
    Ok(total.scale_re(1.0 / samples as f64))
}

/// `ℳ(ρ)` from the conjugated 2-copy moment `W = E[|ζ*⟩⟨ζ*|^{⊗2}]`:
/// `(1/2ⁿ) Σ_{x,z} Tr₁[(P⊗P) W (P⊗P)† (ρ ⊗ I)]` with `P = X^xZ^z`.
fn channel_from_two_copy(w: &CMatrix, rho: &DensityMatrix) -> Result<CMatrix> {
    let n = rho.n();
    let dim = 1usize << n;
    let mut out = CMatrix::zeros(dim, dim);
    for idx in 0..(dim * dim) as u64 {
        let mask = PauliMask::from_outcome_index(n, idx)?;
        let x = mask.x();
        let z = mask.z();
        // (P W P†)[u,v] = s(u)s(v)·W[u⊕x, v⊕x] with s(c) = (−1)^{z·(c⊕x)},
        // applied on both tensor digits.
        let sign = |c: u64| -> f64 {
            if crate::states::bit_dot(z, c ^ x) == 1 {
                -1.0
            } else {
                1.0
            }
        };
        for b in 0..dim as u64 {
            for bp in 0..dim as u64 {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..dim as u64 {
                    for ap in 0..dim as u64 {
                        let row = ((a ^ x) as usize) * dim + ((b ^ x) as usize);
                        let col = ((ap ^ x) as usize) * dim + ((bp ^ x) as usize);
                        let s = sign(a) * sign(b) * sign(ap) * sign(bp);
                        acc += w[(row, col)] * s * rho.matrix()[(ap as usize, a as usize)];
                    }
                }
                out[(b as usize, bp as usize)] += acc;
            }
        }
    }
    Ok(out.scale_re(1.0 / dim as f64))
}

/// Inverse of the Haar-ensemble channel: `A ↦ (2ⁿ+1)A − Tr(A)·I`.
pub fn depolarizing_inverse(a: &CMatrix, n: usize) -> Result<CMatrix> {
    let dim = 1usize << n;
    if a.rows() != dim || a.cols() != dim {
        return Err(Error::DimMismatch(format!(
            "expected {dim}x{dim} matrix for {n} qubits"
        )));
    }
    Ok(a.scale_re(dim as f64 + 1.0)
        .sub(&CMatrix::identity(dim).scale(a.trace())))
}
