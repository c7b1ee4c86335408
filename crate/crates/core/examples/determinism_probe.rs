//! Prints a handful of estimator numbers; used to confirm the parallel and
//! sequential builds emit identical values.

use bell_shadows_core::moments::{ensemble_moment, Ensemble, MomentMode};
use bell_shadows_core::observables::Observable;
use bell_shadows_core::rng::RngStream;
use bell_shadows_core::shadows::{estimate_observable, plan, BoundKind, StateSource};
use bell_shadows_core::states::PureState;

fn main() {
    let source = StateSource::from_pure(PureState::plus(2));
    let ensemble = Ensemble::stabilizer(2);
    let o = Observable::pauli("XX").unwrap();
    let config = plan(0.3, 0.2, BoundKind::Exact, &o).unwrap();
    let report = estimate_observable(&source, &ensemble, &o, &config, 42).unwrap();
    println!("estimate={:.17e}", report.estimate);
    println!("variance={:.17e}", report.empirical_variance);

    let rng = RngStream::from_seed(9);
    let m = ensemble_moment(
        &Ensemble::haar(2),
        2,
        MomentMode::MonteCarlo { samples: 4096 },
        &rng,
    )
    .unwrap();
    let trace = m.matrix().trace();
    println!("mc_trace={:.17e},{:.17e}", trace.re, trace.im);
    println!("mc_entry={:.17e}", m.matrix()[(3, 7)].re);
}
