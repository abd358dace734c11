//! Run reports: per-observable results, resource accounting and the
//! determinism hash used by replay checks.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shadow_core::{MeasurementRecord, MoMPlan, ObservableSpec, Scheme, UnitaryDescription};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Versions {
    pub cli: String,
    pub core: String,
}

impl Versions {
    pub fn current() -> Self {
        Versions {
            cli: env!("CARGO_PKG_VERSION").to_string(),
            core: shadow_core::VERSION.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableReport {
    pub label: String,
    /// Median-of-means output, clamped to the observable's spectrum.
    pub estimate: f64,
    /// Ground truth from the exact expectation oracle, when one ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_error: Option<f64>,
    /// Phase-2 shots per record (0 in baseline mode).
    pub shots_per_record: u64,
    /// Sample variance of the per-record estimates.
    pub empirical_variance: f64,
    pub group_means: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Totals {
    /// Copies of the source state consumed (phase 1 only).
    pub copies_consumed: u64,
    pub records: usize,
    /// Emulated phase-2 measurement shots across all observables.
    pub phase2_shots: u64,
    /// Scalars held by the classical record archive (bits count as one
    /// scalar, complex numbers as two).
    pub record_scalars: u64,
    /// Peak transient scalars of the estimation stage.
    pub workspace_scalars: u64,
    /// record archive + workspace + per-record estimate table.
    pub peak_stored_scalars: u64,
}

/// Wall-clock measurements; excluded from the determinism hash.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timing {
    pub acquire_ms: f64,
    pub estimate_ms: f64,
    pub total_ms: f64,
    /// Mean cost of one emulated phase-2 shot, when any were taken. This
    /// is the emulation stand-in for per-shot circuit cost on hardware.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_shot_ns: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub versions: Versions,
    pub plan: MoMPlan,
    pub observables: Vec<ObservableReport>,
    pub totals: Totals,
    pub timing: Timing,
    pub determinism_hash: String,
}

impl RunReport {
    /// Hash of the report with wall-clock fields stripped; two runs with
    /// the same config and seed must agree on it.
    pub fn compute_hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        let obj = value.as_object_mut().expect("report is a json object");
        obj.remove("timing");
        obj.remove("determinism_hash");
        // serde_json maps are sorted by key, so this string is canonical
        let canonical = serde_json::to_string(&value).expect("value serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn seal(mut self) -> Self {
        self.determinism_hash = self.compute_hash();
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned human-readable summary.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let p = &self.plan;
        out.push_str(&format!(
            "run report (schema {})\nscheme {}  mode {}  n {}  seed {}\n",
            self.schema, self.config.scheme, self.config.mode, self.config.n, self.seed
        ));
        out.push_str(&format!(
            "plan: K = {}  N = {}  shots = {}  (epsilon {}, delta {}, var bound {:.4})\n\n",
            p.groups,
            p.records,
            p.shots.map_or("default".to_string(), |m| m.to_string()),
            p.epsilon,
            p.delta,
            p.var_bound
        ));
        let width = self
            .observables
            .iter()
            .map(|o| o.label.len())
            .max()
            .unwrap_or(10)
            .max(10);
        out.push_str(&format!(
            "{:<width$}  {:>12}  {:>12}  {:>10}  {:>6}\n",
            "observable", "estimate", "exact", "|error|", "m"
        ));
        for o in &self.observables {
            let exact = o.exact.map_or("-".into(), |v| format!("{v:>12.6}"));
            let err = o.abs_error.map_or("-".into(), |v| format!("{v:>10.6}"));
            out.push_str(&format!(
                "{:<width$}  {:>12.6}  {:>12}  {:>10}  {:>6}\n",
                o.label, o.estimate, exact, err, o.shots_per_record
            ));
        }
        let t = &self.totals;
        out.push_str(&format!(
            "\ncopies {}  phase-2 shots {}  records {}\n",
            t.copies_consumed, t.phase2_shots, t.records
        ));
        out.push_str(&format!(
            "stored scalars: records {}  workspace {}  peak {}\n",
            t.record_scalars, t.workspace_scalars, t.peak_stored_scalars
        ));
        out.push_str(&format!(
            "wall time: acquire {:.1} ms  estimate {:.1} ms  total {:.1} ms\n",
            self.timing.acquire_ms, self.timing.estimate_ms, self.timing.total_ms
        ));
        if let Some(ns) = self.timing.per_shot_ns {
            out.push_str(&format!("per-shot cost {ns:.0} ns\n"));
        }
        out.push_str(&format!("determinism sha256 {}\n", self.determinism_hash));
        out
    }
}

/// Logical scalar count of one classical record as stored on disk:
/// basis letters and bits count as one scalar each.
pub fn record_stored_scalars(rec: &MeasurementRecord) -> u64 {
    let outcome = rec.outcome.len() as u64;
    match &rec.unitary {
        UnitaryDescription::Pauli { bases } => bases.len() as u64 + outcome,
        // hex payloads: 4 stored bits per character
        UnitaryDescription::Clifford { tableau, phases, .. } => {
            4 * (tableau.len() + phases.len()) as u64 + outcome
        }
    }
}

/// Scalars of one dense snapshot matrix (complex entries count as two).
pub fn dense_snapshot_scalars(n: usize) -> u64 {
    2 * (1u64 << n) * (1u64 << n)
}

/// Peak transient scalars of one phase-2 evaluation for one observable.
pub fn phase2_workspace_scalars(scheme: Scheme, n: usize, spec: &ObservableSpec, k: usize) -> u64 {
    // outcome tables hold (value, probability) pairs
    let outcomes = match spec {
        ObservableSpec::Pauli { .. } | ObservableSpec::Projector { .. } => 2u64,
        ObservableSpec::Dense { .. } => 1u64 << k,
    };
    match scheme {
        // one re-prepared statevector plus one outcome table
        Scheme::Clifford => 2 * (1u64 << n) + 2 * outcomes,
        // one k-qubit preparation plus a table per distinct noisy bitstring
        Scheme::Pauli => 2 * (1u64 << k) + (1u64 << k) * 2 * outcomes,
    }
}
