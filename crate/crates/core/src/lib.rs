//! State-based classical shadow tomography at desk scale.
//!
//! The crate simulates a snapshot protocol in which an unknown state is
//! entangled with an auxiliary state drawn from a configurable ensemble and
//! measured in the Bell basis. The recorded outcome bits, together with the
//! auxiliary state, form a classical snapshot from which observable values
//! are estimated by median-of-means. Around that core sit exact symmetric-
//! subspace moment operators, additive/relative design distances with their
//! conversion bounds, acceptance-style distinguishers, and a verification
//! suite that checks every estimator guarantee numerically.
//!
//! Shot loops are data-parallel via rayon (default `parallel` feature) with
//! per-shot derived random streams and ordered reductions, so all results are
//! bit-identical for any worker count, or with the feature disabled.

pub mod distinguishers;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod observables;
pub mod parallel;
pub mod rng;
pub mod shadows;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
pub use moments::{Ensemble, MomentMode, MomentOperator};
pub use observables::{Observable, Snapshot};
pub use rng::RngStream;
pub use shadows::{BoundKind, EstimateReport, EstimatorConfig, StateSource};
pub use states::{DensityMatrix, PauliMask, PureState};
