//! JSON experiment configuration and its resolution into core types.

use std::path::Path;

use serde::{Deserialize, Serialize};

use bell_shadows_core::linalg::{CMatrix, C64};
use bell_shadows_core::moments::Ensemble;
use bell_shadows_core::observables::Observable;
use bell_shadows_core::rng::RngStream;
use bell_shadows_core::shadows::BoundKind;
use bell_shadows_core::states::{DensityMatrix, PureState};

use crate::CliError;

/// A pure state referenced from a config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    /// `zero`, `plus`, or `plus_i`, over the experiment's qubit count.
    Named { name: String },
    /// Computational basis state by index.
    Basis { index: u64 },
    /// JSON file holding `{n, re, im}`.
    File { path: String },
    /// Reproducible Haar draw.
    Haar { seed: u64 },
}

impl StateSpec {
    pub fn resolve(&self, n: usize) -> Result<PureState, CliError> {
        match self {
            StateSpec::Named { name } => match name.as_str() {
                "zero" => Ok(PureState::zero(n)),
                "plus" => Ok(PureState::plus(n)),
                "plus_i" => Ok(PureState::plus_i(n)),
                other => Err(CliError::config(format!("unknown state name '{other}'"))),
            },
            StateSpec::Basis { index } => {
                if *index >= 1u64 << n {
                    return Err(CliError::config(format!(
                        "basis index {index} out of range for {n} qubits"
                    )));
                }
                Ok(PureState::basis(n, *index))
            }
            StateSpec::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::config(format!("cannot read {path}: {e}")))?;
                let state: PureState = serde_json::from_str(&text)
                    .map_err(|e| CliError::config(format!("bad state file {path}: {e}")))?;
                if state.n() != n {
                    return Err(CliError::dimension(format!(
                        "state file {path} has {} qubits, expected {n}",
                        state.n()
                    )));
                }
                Ok(state)
            }
            StateSpec::Haar { seed } => {
                let mut rng = RngStream::from_seed(*seed);
                Ok(bell_shadows_core::states::haar_sample(n, &mut rng))
            }
        }
    }
}

/// Input-state source.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RhoSpec {
    /// `zero`, `plus`, `plus_i`, or `max_mixed`.
    Named { name: String },
    Pure { state: StateSpec },
    /// JSON file holding a density matrix `{n, re, im}` (row-major).
    File { path: String },
    RandomMixed { seed: u64 },
}

impl RhoSpec {
    pub fn resolve(&self, n: usize) -> Result<DensityMatrix, CliError> {
        match self {
            RhoSpec::Named { name } => match name.as_str() {
                "max_mixed" => Ok(DensityMatrix::maximally_mixed(n)),
                _ => {
                    let state = StateSpec::Named { name: name.clone() }.resolve(n)?;
                    Ok(DensityMatrix::pure(&state))
                }
            },
            RhoSpec::Pure { state } => Ok(DensityMatrix::pure(&state.resolve(n)?)),
            RhoSpec::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::config(format!("cannot read {path}: {e}")))?;
                let dm: DensityMatrix = serde_json::from_str(&text)
                    .map_err(|e| CliError::config(format!("bad density file {path}: {e}")))?;
                if dm.n() != n {
                    return Err(CliError::dimension(format!(
                        "density file {path} has {} qubits, expected {n}",
                        dm.n()
                    )));
                }
                Ok(dm)
            }
            RhoSpec::RandomMixed { seed } => {
                let mut rng = RngStream::from_seed(*seed);
                Ok(DensityMatrix::random_mixed(n, &mut rng))
            }
        }
    }
}

/// Auxiliary-state ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum EnsembleSpec {
    Haar,
    RealHaar,
    BinaryPhase,
    Stabilizer,
    StabilizerEnumerated,
    Mixture {
        epsilon0: f64,
        #[serde(default)]
        psi: Option<StateSpec>,
    },
    Single {
        state: StateSpec,
    },
}

impl EnsembleSpec {
    pub fn resolve(&self, n: usize) -> Result<Ensemble, CliError> {
        match self {
            EnsembleSpec::Haar => Ok(Ensemble::haar(n)),
            EnsembleSpec::RealHaar => Ok(Ensemble::real_haar(n)),
            EnsembleSpec::BinaryPhase => Ok(Ensemble::binary_phase(n)),
            EnsembleSpec::Stabilizer => Ok(Ensemble::stabilizer(n)),
            EnsembleSpec::StabilizerEnumerated => {
                Ensemble::stabilizer_enumerated(n).map_err(CliError::from_core)
            }
            EnsembleSpec::Mixture { epsilon0, psi } => {
                let psi = match psi {
                    Some(spec) => spec.resolve(n)?,
                    None => PureState::zero(n),
                };
                Ensemble::adversarial_mixture(*epsilon0, psi).map_err(CliError::from_core)
            }
            EnsembleSpec::Single { state } => Ok(Ensemble::single(state.resolve(n)?)),
        }
    }
}

/// Observable payloads mirror the JSON schema `{kind, payload}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum ObservableSpec {
    /// Pauli string such as `"ZI"`.
    Pauli(String),
    /// Dense Hermitian matrix, row-major `{re, im}`.
    Dense { re: Vec<f64>, im: Vec<f64> },
    /// Seeded GUE draw.
    Gue { seed: u64 },
}

impl ObservableSpec {
    pub fn resolve(&self, n: usize) -> Result<Observable, CliError> {
        match self {
            ObservableSpec::Pauli(label) => {
                if label.len() != n {
                    return Err(CliError::dimension(format!(
                        "Pauli string '{label}' has length {}, expected {n}",
                        label.len()
                    )));
                }
                Observable::pauli(label).map_err(CliError::from_core)
            }
            ObservableSpec::Dense { re, im } => {
                let dim = 1usize << n;
                if re.len() != dim * dim || im.len() != dim * dim {
                    return Err(CliError::dimension(format!(
                        "dense observable needs {} entries, got {}",
                        dim * dim,
                        re.len()
                    )));
                }
                let m = CMatrix::from_fn(dim, dim, |r, c| {
                    C64::new(re[r * dim + c], im[r * dim + c])
                });
                Observable::new(n, m).map_err(CliError::from_core)
            }
            ObservableSpec::Gue { seed } => {
                let mut rng = RngStream::from_seed(*seed);
                Ok(Observable::random_gue(n, &mut rng))
            }
        }
    }
}

/// Configuration for `estimate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub n: usize,
    pub seed: u64,
    pub ensemble: EnsembleSpec,
    pub rho: RhoSpec,
    pub observable: ObservableSpec,
    pub gamma: f64,
    pub delta: f64,
    pub bound: BoundKind,
    /// Overrides the planned total shot budget, keeping K from δ.
    #[serde(default)]
    pub shots_override: Option<u64>,
}

/// Configuration for `moments`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentsConfig {
    pub n: usize,
    pub t: usize,
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub seed: u64,
}

/// Configuration for `distinguish`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistinguishConfig {
    pub n: usize,
    pub seed: u64,
    pub shots: u64,
    pub ensemble: EnsembleSpec,
    pub rho: RhoSpec,
    pub observable: ObservableSpec,
}

/// Configuration for `sweep`: a grid over mixture strength and accuracy
/// targets, one estimator batch per cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    pub seed: u64,
    pub rho: RhoSpec,
    pub observable: ObservableSpec,
    /// `additive` or `relative`; the ε for the bound is measured from the
    /// mixture's exact 3-copy moment.
    pub bound: String,
    pub epsilon0_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub runs: usize,
}

pub fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<(T, Vec<u8>), CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let parsed = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))?;
    Ok((parsed, bytes))
}
