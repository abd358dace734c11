//! Classical shadow estimation of many observables from few state copies.
//!
//! The crate provides two interchangeable estimation pipelines over the
//! same phase-1 measurement records:
//!
//! * a baseline that reconstructs per-record snapshot matrices (in closed
//!   form, with optional dense export), and
//! * a record-replay pipeline that re-prepares cheap basis states and
//!   reads the estimator variables off emulated measurements, keeping all
//!   work per record linear in the state dimension.
//!
//! Records come from two measurement ensembles (random per-qubit Pauli
//! bases, uniformly random Clifford circuits); estimates are aggregated
//! with a planned median-of-means.

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod baseline;
pub mod bits;
pub mod ensembles;
pub mod error;
pub mod estimator;
pub mod gates;
pub mod linalg;
pub mod measure;
pub mod observable;
pub mod pauli;
pub mod qcqc;
pub mod qstate;
pub mod rng;
pub mod tableau;
pub mod tol;

pub use baseline::{
    depolarize_global, depolarize_local, measurement_channel, measurement_channel_inverse,
    snapshot_from_record, Snapshot,
};
pub use bits::BitString;
pub use ensembles::{
    acquire_record, rotate_and_measure, CopyCounter, MeasBasis, MeasurementRecord, SampledUnitary,
    Scheme, UnitaryDescription,
};
pub use error::{Error, Result};
pub use estimator::{
    corollary_budget, median_of_means, phase2_variance_bound, plan, plan_with_constants,
    shadow_norm_bound, MoMEstimate, MoMPlan, PlanConstants,
};
pub use gates::Gate;
pub use linalg::frobenius_trace;
pub use measure::{measure_observable, OutcomeDistribution};
pub use observable::{Observable, ObservableSpec, PauliLetter};
pub use qcqc::{
    acquire, default_shots, flip_bits, pauli_default_shots, phase2, phase2_clifford, phase2_pauli,
    EstimateVariable, NoisyPreparation, RecordFile,
};
pub use qstate::{QuantumState, StateFamily, StateSpec};
pub use tableau::{CliffordTableau, DENSE_EXPORT_CAP, STATEVECTOR_CAP, TABLEAU_QUBIT_CAP};
