//! Numeric tolerances used across validation and self-checks.

/// Statevector norm must match 1 this closely at construction.
pub const NORM: f64 = 1e-10;

/// Hermiticity deviation allowed for density matrices and observables.
pub const HERMITIAN: f64 = 1e-10;

/// Smallest admissible eigenvalue of a density matrix.
pub const PSD_FLOOR: f64 = -1e-9;

/// Trace deviation allowed for density matrices.
pub const TRACE: f64 = 1e-10;

/// Unitarity deviation that gets an operator rejected.
pub const UNITARY: f64 = 1e-8;

/// Norm drift allowed after applying a unitary.
pub const NORM_DRIFT: f64 = 1e-9;

/// Agreement required between analytic channel pairs and between cached
/// scalars and their recomputation.
pub const CHANNEL: f64 = 1e-9;

/// Exact-arithmetic comparisons (closed forms vs dense oracles).
pub const EXACT: f64 = 1e-10;
