//! Random measurement ensembles and the acquisition step they share.
//!
//! Two ensembles are supported: independent single-qubit Pauli bases and
//! uniformly random n-qubit Clifford circuits. Each acquisition consumes
//! one copy of the source state: rotate a fresh copy by the sampled
//! unitary, read the computational register once, and keep (U, b) as a
//! classical record.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::qstate::QuantumState;
use crate::tableau::CliffordTableau;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Pauli,
    Clifford,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Pauli => write!(f, "pauli"),
            Scheme::Clifford => write!(f, "clifford"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pauli" => Ok(Scheme::Pauli),
            "clifford" => Ok(Scheme::Clifford),
            other => Err(Error::InvalidInput(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Single-qubit measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasBasis {
    X,
    Y,
    Z,
}

impl MeasBasis {
    pub fn from_char(c: char) -> Result<Self> {
        Ok(match c {
            'X' | 'x' => MeasBasis::X,
            'Y' | 'y' => MeasBasis::Y,
            'Z' | 'z' => MeasBasis::Z,
            other => return Err(Error::InvalidInput(format!("invalid basis '{other}'"))),
        })
    }

    pub fn to_char(self) -> char {
        match self {
            MeasBasis::X => 'X',
            MeasBasis::Y => 'Y',
            MeasBasis::Z => 'Z',
        }
    }

    /// Gates rotating this basis into the computational one, i.e. a
    /// unitary R with R sigma R^dag = Z.
    pub fn rotation(self, q: usize) -> Vec<Gate> {
        match self {
            MeasBasis::Z => vec![],
            MeasBasis::X => vec![Gate::H(q)],
            MeasBasis::Y => vec![Gate::Sdg(q), Gate::H(q)],
        }
    }
}

/// One independent uniform basis per qubit.
pub fn sample_pauli_bases<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<MeasBasis> {
    (0..n)
        .map(|_| match rng.random_range(0..3u8) {
            0 => MeasBasis::X,
            1 => MeasBasis::Y,
            _ => MeasBasis::Z,
        })
        .collect()
}

pub fn rotation_gates(bases: &[MeasBasis]) -> Vec<Gate> {
    bases
        .iter()
        .enumerate()
        .flat_map(|(q, b)| b.rotation(q))
        .collect()
}

/// A sampled measurement unitary, kept in whichever form replays it
/// exactly.
#[derive(Debug, Clone)]
pub enum SampledUnitary {
    Pauli { bases: Vec<MeasBasis> },
    Clifford { tableau: CliffordTableau },
}

impl SampledUnitary {
    pub fn sample<R: Rng + ?Sized>(scheme: Scheme, n: usize, rng: &mut R) -> Self {
        match scheme {
            Scheme::Pauli => SampledUnitary::Pauli {
                bases: sample_pauli_bases(n, rng),
            },
            Scheme::Clifford => SampledUnitary::Clifford {
                tableau: CliffordTableau::random(n, rng),
            },
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            SampledUnitary::Pauli { .. } => Scheme::Pauli,
            SampledUnitary::Clifford { .. } => Scheme::Clifford,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            SampledUnitary::Pauli { bases } => bases.len(),
            SampledUnitary::Clifford { tableau } => tableau.n(),
        }
    }

    /// Maps the state to U rho U^dag. Panics on register mismatch; callers
    /// that take external input go through `rotate_and_measure`.
    pub fn apply_to(&self, state: &mut QuantumState) {
        match self {
            SampledUnitary::Pauli { bases } => {
                state.apply_gates(&rotation_gates(bases));
            }
            SampledUnitary::Clifford { tableau } => {
                state.apply_tableau(tableau);
            }
        }
    }

    pub fn describe(&self) -> UnitaryDescription {
        match self {
            SampledUnitary::Pauli { bases } => UnitaryDescription::Pauli {
                bases: bases.iter().map(|b| b.to_char()).collect(),
            },
            SampledUnitary::Clifford { tableau } => {
                let (bits, phases) = tableau.to_hex();
                UnitaryDescription::Clifford {
                    n: tableau.n(),
                    tableau: bits,
                    phases,
                }
            }
        }
    }
}

/// Serialized form of a sampled unitary, suitable for record files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase", deny_unknown_fields)]
pub enum UnitaryDescription {
    Pauli { bases: String },
    Clifford { n: usize, tableau: String, phases: String },
}

impl UnitaryDescription {
    pub fn parse(&self) -> Result<SampledUnitary> {
        match self {
            UnitaryDescription::Pauli { bases } => {
                let bases = bases
                    .chars()
                    .map(MeasBasis::from_char)
                    .collect::<Result<Vec<_>>>()?;
                if bases.is_empty() {
                    return Err(Error::InvalidInput("empty basis string".into()));
                }
                Ok(SampledUnitary::Pauli { bases })
            }
            UnitaryDescription::Clifford { n, tableau, phases } => Ok(SampledUnitary::Clifford {
                tableau: CliffordTableau::from_hex(*n, tableau, phases)?,
            }),
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            UnitaryDescription::Pauli { .. } => Scheme::Pauli,
            UnitaryDescription::Clifford { .. } => Scheme::Clifford,
        }
    }
}

/// Classical record of one consumed copy: the sampled unitary and the
/// observed computational outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    #[serde(rename = "u")]
    pub unitary: UnitaryDescription,
    #[serde(rename = "b")]
    pub outcome: BitString,
}

/// Counts copies of the source state handed to measurement devices.
/// Every code path that touches a fresh copy goes through this counter,
/// which is what the copy-complexity accounting in reports relies on.
#[derive(Debug, Default)]
pub struct CopyCounter(AtomicU64);

impl CopyCounter {
    pub fn new() -> Self {
        CopyCounter(AtomicU64::new(0))
    }

    pub fn increment(&self, copies: u64) {
        self.0.fetch_add(copies, Ordering::Relaxed);
    }

    pub fn count(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

/// Rotates a fresh copy of `state` and reads the register once.
pub fn rotate_and_measure<R: Rng + ?Sized>(
    state: &QuantumState,
    unitary: &SampledUnitary,
    rng: &mut R,
) -> Result<BitString> {
    if unitary.n() != state.n() {
        return Err(Error::Dimension(format!(
            "unitary on {} qubits, state on {}",
            unitary.n(),
            state.n()
        )));
    }
    let mut copy = state.clone();
    unitary.apply_to(&mut copy);
    Ok(copy.sample_computational(rng))
}

/// One full acquisition step: sample U, consume one copy, keep (U, b).
pub fn acquire_record<R: Rng + ?Sized>(
    state: &QuantumState,
    scheme: Scheme,
    counter: &CopyCounter,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let unitary = SampledUnitary::sample(scheme, state.n(), rng);
    let outcome = rotate_and_measure(state, &unitary, rng)?;
    counter.increment(1);
    Ok(MeasurementRecord {
        unitary: unitary.describe(),
        outcome,
    })
}
