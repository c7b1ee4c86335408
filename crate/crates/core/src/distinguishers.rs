//! Acceptance-style distinguishers that convert estimator bias and variance
//! into distinguishing advantage, plus their closed-form acceptance
//! probabilities.
//!
//! The expectation distinguisher consumes two copies of the auxiliary state:
//! one runs the snapshot circuit against the input state, the other receives
//! the outcome correction `Z^z` then `X^x` and is measured with the
//! conjugated observable, yielding eigenvalue `α`. It accepts with
//! probability `1/2 + α/(2‖O‖∞)`. The variance distinguisher corrects and
//! measures two extra copies independently and accepts with probability
//! `1/2 + α₁α₂/(2‖O‖∞²)`.
//!
//! Closed forms (per fixed `ζ`, or averaged through a t-copy moment):
//!
//! `p_E = 1/2 + (1/2‖O‖∞) ·Σ_{x,z} (1/2ⁿ)·Tr(|ζ*_{x,z}⟩⟨ζ*_{x,z}|^{⊗2} ρ⊗O)`
//! `p_V = 1/2 + (1/2‖O‖∞²)·Σ_{x,z} (1/2ⁿ)·Tr(|ζ*_{x,z}⟩⟨ζ*_{x,z}|^{⊗3} ρ⊗O⊗O)`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::moments::{ensemble_moment, haar_moment, Ensemble, MomentMode, MomentOperator};
use crate::observables::Observable;
use crate::parallel::try_map_indexed;
use crate::rng::RngStream;
use crate::shadows::{bell_measure_circuit, StateSource};
use crate::states::{bit_dot, DensityMatrix, PauliMask, PureState};

/// Tolerance for the acceptance-probability range assertion.
const PROB_SLACK: f64 = 1e-9;

fn check_observable(o: &Observable) -> Result<()> {
    if o.op_norm() <= 0.0 {
        return Err(Error::InvalidParameter(
            "distinguisher needs ‖O‖∞ > 0".into(),
        ));
    }
    Ok(())
}

fn accept(p: f64, rng: &mut RngStream) -> bool {
    assert!(
        (-PROB_SLACK..=1.0 + PROB_SLACK).contains(&p),
        "acceptance probability {p} outside [0,1]"
    );
    rng.coin(p.clamp(0.0, 1.0))
}

/// One shot of the expectation distinguisher. `ensemble` supplies the
/// auxiliary state; the same draw serves both registers.
pub fn run_expectation_distinguisher(
    ensemble: &Ensemble,
    rho: &StateSource,
    o: &Observable,
    rng: &mut RngStream,
) -> Result<bool> {
    check_observable(o)?;
    let o_star = o.conjugate_observable();
    run_expectation_with_conjugate(ensemble, rho, o, &o_star, rng)
}

fn run_expectation_with_conjugate(
    ensemble: &Ensemble,
    rho: &StateSource,
    o: &Observable,
    o_star: &Observable,
    rng: &mut RngStream,
) -> Result<bool> {
    let zeta = ensemble.sample(rng);
    let psi = rho.sample_pure(rng).clone();
    let mask = bell_measure_circuit(&psi, &zeta, rng)?;
    let corrected = zeta.apply_pauli(&mask)?;
    let alpha = o_star.measure(&corrected, rng)?;
    let p = 0.5 + alpha / (2.0 * o.op_norm());
    Ok(accept(p, rng))
}

/// One shot of the variance distinguisher: two independent corrected copies,
/// two conjugate measurements.
pub fn run_variance_distinguisher(
    ensemble: &Ensemble,
    rho: &StateSource,
    o: &Observable,
    rng: &mut RngStream,
) -> Result<bool> {
    check_observable(o)?;
    let o_star = o.conjugate_observable();
    run_variance_with_conjugate(ensemble, rho, o, &o_star, rng)
}

fn run_variance_with_conjugate(
    ensemble: &Ensemble,
    rho: &StateSource,
    o: &Observable,
    o_star: &Observable,
    rng: &mut RngStream,
) -> Result<bool> {
    let zeta = ensemble.sample(rng);
    let psi = rho.sample_pure(rng).clone();
    let mask = bell_measure_circuit(&psi, &zeta, rng)?;
    let corrected = zeta.apply_pauli(&mask)?;
    let alpha1 = o_star.measure(&corrected, rng)?;
    let alpha2 = o_star.measure(&corrected, rng)?;
    let p = 0.5 + alpha1 * alpha2 / (2.0 * o.op_norm().powi(2));
    Ok(accept(p, rng))
}

/// Empirical acceptance frequency with standard error; shot `i` runs on
/// `substream(i)` of the seed.
pub fn expectation_acceptance_sampled(
    ensemble: &Ensemble,
    rho: &StateSource,
    o: &Observable,
    shots: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    check_observable(o)?;
    let o_star = o.conjugate_observable();
    let base = RngStream::from_seed(seed);
    let bits = try_map_indexed(shots, |i| {
        let mut stream = base.substream(i);
        run_expectation_with_conjugate(ensemble, rho, o, &o_star, &mut stream)
    })?;
    Ok(frequency(&bits))
}

pub fn variance_acceptance_sampled(
    ensemble: &Ensemble,
    rho: &StateSource,
    o: &Observable,
    shots: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    check_observable(o)?;
    let o_star = o.conjugate_observable();
    let base = RngStream::from_seed(seed);
    let bits = try_map_indexed(shots, |i| {
        let mut stream = base.substream(i);
        run_variance_with_conjugate(ensemble, rho, o, &o_star, &mut stream)
    })?;
    Ok(frequency(&bits))
}

fn frequency(bits: &[bool]) -> (f64, f64) {
    let shots = bits.len() as f64;
    let p = bits.iter().filter(|b| **b).count() as f64 / shots;
    let se = (p * (1.0 - p) / shots).sqrt();
    (p, se)
}

/// Auxiliary-state input to the analytic acceptance probability: a fixed
/// state, or an ensemble average through its t-copy moment.
pub enum ZetaOrMoment<'a> {
    Zeta(&'a PureState),
    Moment(&'a MomentOperator),
}

/// Analytic acceptance probability of the expectation distinguisher.
pub fn acceptance_prob_expectation(
    zeta: ZetaOrMoment<'_>,
    rho: &DensityMatrix,
    o: &Observable,
) -> Result<f64> {
    check_observable(o)?;
    let correlation = pauli_sum_correlation(zeta, rho, &[o], 2)?;
    Ok(0.5 + correlation / (2.0 * o.op_norm()))
}

/// Analytic acceptance probability of the variance distinguisher.
pub fn acceptance_prob_variance(
    zeta: ZetaOrMoment<'_>,
    rho: &DensityMatrix,
    o: &Observable,
) -> Result<f64> {
    check_observable(o)?;
    let correlation = pauli_sum_correlation(zeta, rho, &[o, o], 3)?;
    Ok(0.5 + correlation / (2.0 * o.op_norm().powi(2)))
}

/// `Σ_{x,z} (1/2ⁿ)·Tr( E[|ζ*_{x,z}⟩⟨ζ*_{x,z}|^{⊗t}] · ρ ⊗ O₁ ⊗ … )`.
///
/// For a fixed `ζ` the term is a product of rank-one quadratic forms; for a
/// moment operator the Pauli shifts are applied to the conjugated moment by
/// index relabeling and signs.
fn pauli_sum_correlation(
    zeta: ZetaOrMoment<'_>,
    rho: &DensityMatrix,
    observables: &[&Observable],
    t: usize,
) -> Result<f64> {
    let n = rho.n();
    let dim = 1usize << n;
    match zeta {
        ZetaOrMoment::Zeta(state) => {
            if state.n() != n {
                return Err(Error::DimMismatch(format!(
                    "auxiliary state over {} qubits, input over {n}",
                    state.n()
                )));
            }
            if n > 5 {
                return Err(Error::SizeLimit(format!(
                    "explicit outcome sum needs n ≤ 5, got {n}"
                )));
            }
            let conj = state.conjugate();
            let mut total = 0.0;
            for idx in 0..(dim * dim) as u64 {
                let mask = PauliMask::from_outcome_index(n, idx)?;
                let shifted = conj.apply_pauli(&mask)?;
                let mut term = rho.matrix().quadratic_form(shifted.amplitudes()).re;
                for ob in observables {
                    term *= ob.matrix().quadratic_form(shifted.amplitudes()).re;
                }
                total += term;
            }
            Ok(total / dim as f64)
        }
        ZetaOrMoment::Moment(moment) => {
            if moment.n() != n {
                return Err(Error::DimMismatch(format!(
                    "moment over {} qubits, input over {n}",
                    moment.n()
                )));
            }
            if moment.t() != t {
                return Err(Error::DimMismatch(format!(
                    "need a t={t} moment, got t={}",
                    moment.t()
                )));
            }
            let twirled = pauli_twirl_copies(&moment.matrix().conj(), n, t);
            let mut factors: Vec<&CMatrix> = vec![rho.matrix()];
            for ob in observables {
                factors.push(ob.matrix());
            }
            Ok(contract_with_factors(&twirled, &factors, dim) / dim as f64)
        }
    }
}

/// `Σ_{x,z} P^{⊗t} W (P^{⊗t})†` with `P = X^xZ^z` acting on every copy.
fn pauli_twirl_copies(w: &CMatrix, n: usize, t: usize) -> CMatrix {
    let local = 1usize << n;
    let dim = local.pow(t as u32);
    debug_assert_eq!(w.rows(), dim);
    let mut out = CMatrix::zeros(dim, dim);
    for x in 0..local as u64 {
        for z in 0..local as u64 {
            // Precompute the per-digit shift and sign of P†.
            let mut shifted_digit = vec![0usize; local];
            let mut digit_sign = vec![1.0f64; local];
            for c in 0..local as u64 {
                shifted_digit[c as usize] = (c ^ x) as usize;
                if bit_dot(z, c ^ x) == 1 {
                    digit_sign[c as usize] = -1.0;
                }
            }
            for row in 0..dim {
                let (src_row, sign_row) = map_index(row, local, t, &shifted_digit, &digit_sign);
                for col in 0..dim {
                    let (src_col, sign_col) =
                        map_index(col, local, t, &shifted_digit, &digit_sign);
                    let val = w[(src_row, src_col)] * (sign_row * sign_col);
                    out[(row, col)] += val;
                }
            }
        }
    }
    out
}

fn map_index(
    mut index: usize,
    local: usize,
    t: usize,
    shifted_digit: &[usize],
    digit_sign: &[f64],
) -> (usize, f64) {
    let mut digits = vec![0usize; t];
    for d in (0..t).rev() {
        digits[d] = index % local;
        index /= local;
    }
    let mut sign = 1.0;
    let mut out = 0usize;
    for digit in digits {
        sign *= digit_sign[digit];
        out = out * local + shifted_digit[digit];
    }
    (out, sign)
}

/// `Tr(W · A₁ ⊗ A₂ ⊗ …)` without forming the Kronecker product.
fn contract_with_factors(w: &CMatrix, factors: &[&CMatrix], local: usize) -> f64 {
    let t = factors.len();
    let dim = local.pow(t as u32);
    debug_assert_eq!(w.rows(), dim);
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..dim {
        for c in 0..dim {
            let wval = w[(r, c)];
            if wval == C64::new(0.0, 0.0) {
                continue;
            }
            // (⊗A_m)[c, r] = Π A_m[c_m, r_m].
            let mut prod = C64::new(1.0, 0.0);
            let (mut rr, mut cc) = (r, c);
            for m in (0..t).rev() {
                let rd = rr % local;
                let cd = cc % local;
                rr /= local;
                cc /= local;
                prod *= factors[m][(cd, rd)];
            }
            acc += wval * prod;
        }
    }
    acc.re
}

/// Plugs measured advantages into the reduction inequalities with
/// `ε = max(adv_E, adv_Var)`: bias `≤ 2(2ⁿ+1)ε‖O‖∞` and variance
/// `≤ 3Tr(O₀²) + 6ε‖O‖∞²(2ⁿ+1)²`.
pub fn advantage_to_bounds(adv_e: f64, adv_var: f64, o: &Observable) -> (f64, f64) {
    let eps = adv_e.max(adv_var);
    let big_n = (1u64 << o.n()) as f64;
    let bias = 2.0 * (big_n + 1.0) * eps * o.op_norm();
    let variance = 3.0 * o.traceless_sq() + 6.0 * eps * o.op_norm().powi(2) * (big_n + 1.0).powi(2);
    (bias, variance)
}

/// Summary of a distinguisher experiment against the Haar baseline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistinguisherReport {
    pub n: usize,
    pub shots: u64,
    pub p_accept_ensemble: f64,
    pub p_accept_haar: f64,
    pub advantage: f64,
    pub implied_bias_bound: f64,
    pub implied_variance_slack: f64,
    pub std_error: f64,
    /// Analytic acceptance probabilities, when the ensemble admits exact
    /// moments.
    pub analytic_ensemble: Option<f64>,
    pub analytic_haar: f64,
}

/// Runs the expectation distinguisher against `ensemble` and the Haar
/// baseline and reports advantages plus the implied estimator bounds.
pub fn distinguisher_report(
    ensemble: &Ensemble,
    rho: &StateSource,
    o: &Observable,
    shots: u64,
    seed: u64,
) -> Result<DistinguisherReport> {
    check_observable(o)?;
    let n = o.n();
    let haar = Ensemble::haar(n);
    let (p_ens, se_ens) = expectation_acceptance_sampled(ensemble, rho, o, shots, seed)?;
    let (p_haar, se_haar) = expectation_acceptance_sampled(&haar, rho, o, shots, seed ^ 0x9E37)?;
    let advantage = (p_ens - p_haar).abs();
    let (bias, variance) = advantage_to_bounds(advantage, 0.0, o);
    let rng = RngStream::from_seed(0);
    let analytic_haar = acceptance_prob_expectation(
        ZetaOrMoment::Moment(&haar_moment(n, 2)?),
        rho.density(),
        o,
    )?;
    let analytic_ensemble = if ensemble.has_exact_moment(2) {
        let m = ensemble_moment(ensemble, 2, MomentMode::Exact, &rng)?;
        Some(acceptance_prob_expectation(
            ZetaOrMoment::Moment(&m),
            rho.density(),
            o,
        )?)
    } else {
        None
    };
    Ok(DistinguisherReport {
        n,
        shots,
        p_accept_ensemble: p_ens,
        p_accept_haar: p_haar,
        advantage,
        implied_bias_bound: bias,
        implied_variance_slack: variance - 3.0 * o.traceless_sq(),
        std_error: se_ens.hypot(se_haar),
        analytic_ensemble,
        analytic_haar,
    })
}
