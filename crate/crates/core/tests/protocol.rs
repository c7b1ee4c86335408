//! Cross-module protocol checks that sit above any single unit.

use bell_shadows_core::moments::{ensemble_moment, Ensemble, MomentMode};
use bell_shadows_core::observables::Observable;
use bell_shadows_core::rng::RngStream;
use bell_shadows_core::shadows::{
    empirical_bias_variance, estimate_observable, plan, shadow_estimates, BoundKind, StateSource,
};
use bell_shadows_core::states::{DensityMatrix, PureState};

#[test]
fn estimator_hits_accuracy_on_exact_design() {
    // ρ = |+⟩⟨+|, O = X: true value 1. At an exact design the guarantee
    // holds with ε = 0; check a handful of independent runs.
    let source = StateSource::from_pure(PureState::plus(1));
    let ensemble = Ensemble::stabilizer(1);
    let o = Observable::pauli("X").unwrap();
    let config = plan(0.2, 0.1, BoundKind::Exact, &o).unwrap();
    let mut hits = 0;
    let runs = 30;
    for run in 0..runs {
        let report = estimate_observable(&source, &ensemble, &o, &config, 1000 + run).unwrap();
        if (report.estimate - 1.0).abs() <= 0.2 {
            hits += 1;
        }
    }
    // Failure probability per run is at most δ = 0.1.
    assert!(hits >= 24, "only {hits}/{runs} runs within γ");
}

#[test]
fn snapshot_reuse_across_observables() {
    // The same per-shot estimates drive any observable; linearity holds
    // shot by shot.
    let mut rng = RngStream::from_seed(5);
    let rho = DensityMatrix::random_mixed(2, &mut rng);
    let source = StateSource::from_density(rho).unwrap();
    let ensemble = Ensemble::stabilizer(2);
    let a = Observable::pauli("ZZ").unwrap();
    let b = Observable::pauli("XI").unwrap();
    let sum = Observable::new(2, a.matrix().add(b.matrix())).unwrap();

    let base = RngStream::from_seed(17);
    let va = shadow_estimates(&source, &ensemble, &a, 500, &base).unwrap();
    let vb = shadow_estimates(&source, &ensemble, &b, 500, &base).unwrap();
    let vs = shadow_estimates(&source, &ensemble, &sum, 500, &base).unwrap();
    for i in 0..500 {
        assert!((va[i] + vb[i] - vs[i]).abs() < 1e-9);
    }
}

#[test]
fn binary_phase_ensemble_estimates_real_observables() {
    // Binary-phase states are real-valued, so estimates of a real observable
    // on a real state still converge; exercised statistically as the
    // candidate computational ensemble.
    let source = StateSource::from_pure(PureState::plus(2));
    let ensemble = Ensemble::binary_phase(2);
    let o = Observable::pauli("XX").unwrap();
    let truth = source.density().expectation_of(o.matrix());
    let base = RngStream::from_seed(23);
    let bv = empirical_bias_variance(&source, &ensemble, &o, 100_000, &base).unwrap();
    assert!(
        (bv.mean - truth).abs() <= 5.0 * bv.se_mean + 0.05,
        "mean {} vs truth {truth}",
        bv.mean
    );
}

#[test]
fn mixture_moment_matches_sampled_frequencies() {
    // The spiked ensemble emits ψ with probability ε₀/2.
    let psi = PureState::zero(1);
    let ensemble = Ensemble::adversarial_mixture(0.4, psi.clone()).unwrap();
    let rng = RngStream::from_seed(31);
    let mut hits = 0u32;
    let shots = 20_000;
    for i in 0..shots {
        let s = ensemble.sample(&mut rng.substream(i));
        if s.fidelity(&psi) > 1.0 - 1e-9 {
            hits += 1;
        }
    }
    let f = f64::from(hits) / shots as f64;
    assert!((f - 0.2).abs() < 0.02, "spike frequency {f}");

    // And its exact moment is the stated convex combination.
    let rng = RngStream::from_seed(0);
    let m = ensemble_moment(&ensemble, 2, MomentMode::Exact, &rng).unwrap();
    assert!((m.matrix().trace().re - 1.0).abs() < 1e-12);
}

#[test]
fn estimator_report_carries_bounds() {
    let source = StateSource::from_pure(PureState::zero(2));
    let ensemble = Ensemble::stabilizer(2);
    let o = Observable::pauli("ZI").unwrap();
    let kind = BoundKind::Additive { epsilon: 0.05 };
    let config = plan(0.3, 0.1, kind, &o).unwrap();
    let report = estimate_observable(&source, &ensemble, &o, &config, 3).unwrap();
    assert!((report.bias_bound - 5.0 * 0.05).abs() < 1e-12);
    assert!(report.variance_bound >= 3.0 * o.traceless_sq());
    assert_eq!(report.total_shots, (config.k * config.l) as u64);
    // JSON representation round-trips.
    let json = serde_json::to_string(&report).unwrap();
    let back: bell_shadows_core::shadows::EstimateReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.estimate, report.estimate);
}
