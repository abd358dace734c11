//! Experiment configuration: a single JSON file, with CLI flags layered
//! on top by the binary.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use shadow_core::{
    Observable, ObservableSpec, QuantumState, Scheme, StateSpec, STATEVECTOR_CAP,
};

use crate::CliError;

/// Which post-processing pipeline consumes the phase-1 records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Reconstruct a dense snapshot matrix per record and trace against
    /// dense observables.
    Baseline,
    /// Re-prepare states from the records and read estimates off
    /// emulated measurements.
    Qcqc,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Baseline => "baseline",
            Mode::Qcqc => "qcqc",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            "qcqc" => Ok(Mode::Qcqc),
            other => Err(format!("unknown mode '{other}' (use baseline or qcqc)")),
        }
    }
}

/// Hard overrides for the planned sampling budget. Absent fields keep
/// the planner's choice.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Phase-2 shots per record (m); None uses the scheme defaults.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    /// Median group count (K).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<usize>,
    /// Total record count (N); rounded up to a multiple of the groups.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub records: Option<usize>,
}

fn default_k_max() -> usize {
    8
}

fn default_dense_cap() -> usize {
    10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub scheme: Scheme,
    pub mode: Mode,
    pub state: StateSpec,
    pub observables: Vec<ObservableSpec>,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub overrides: Overrides,
    /// Default destination for reports or record files; `--out` wins.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Largest observable support admitted under the pauli scheme.
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Largest register the baseline path may materialize densely.
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    /// Structural checks plus construction of the state and observables.
    pub fn materialize(&self) -> Result<(QuantumState, Vec<Observable>), CliError> {
        if self.n == 0 {
            return Err(CliError::config("n must be at least 1"));
        }
        if self.n > STATEVECTOR_CAP {
            return Err(CliError::config(format!(
                "n = {} exceeds the simulation cap of {STATEVECTOR_CAP} qubits",
                self.n
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(CliError::config("epsilon must be a positive finite number"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(CliError::config("delta must lie in (0, 1)"));
        }
        if self.observables.is_empty() {
            return Err(CliError::config("need at least one observable"));
        }
        if self.mode == Mode::Baseline && self.n > self.dense_cap {
            return Err(CliError::config(format!(
                "baseline mode materializes 2^{0} x 2^{0} snapshots; n = {0} exceeds \
                 the dense cap of {1} (raise dense_cap or switch to qcqc)",
                self.n, self.dense_cap
            )));
        }
        let state = self
            .state
            .build()
            .map_err(|e| CliError::config(format!("state: {e}")))?;
        if state.n() != self.n {
            return Err(CliError::config(format!(
                "state is on {} qubits, config says n = {}",
                state.n(),
                self.n
            )));
        }
        let mut observables = Vec::with_capacity(self.observables.len());
        for (j, spec) in self.observables.iter().enumerate() {
            let obs = spec
                .build(self.n)
                .map_err(|e| CliError::config(format!("observable {j}: {e}")))?;
            if self.scheme == Scheme::Pauli && obs.locality() > self.k_max {
                return Err(CliError::config(format!(
                    "observable {j} acts on {} qubits; the pauli scheme caps support \
                     at k_max = {} (costs grow as 4^k)",
                    obs.locality(),
                    self.k_max
                )));
            }
            observables.push(obs);
        }
        Ok((state, observables))
    }
}

/// Short human label for report rows.
pub fn spec_label(spec: &ObservableSpec) -> String {
    match spec {
        ObservableSpec::Pauli { coeff, letters } => {
            if (*coeff - 1.0).abs() < 1e-12 {
                format!("pauli {letters}")
            } else {
                format!("pauli {coeff}*{letters}")
            }
        }
        ObservableSpec::Projector { .. } => "projector".to_string(),
        ObservableSpec::Dense { support, .. } => format!("dense on {support:?}"),
    }
}
