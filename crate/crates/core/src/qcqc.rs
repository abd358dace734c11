//! Two-phase estimation from compact classical records.
//!
//! Phase 1 measures the source state and keeps only (U, b) per copy.
//! Phase 2 never touches the source again: for each record it re-prepares
//! cheap basis states on an emulated device and turns repeated
//! measurements of the target observable into an estimator variable Y
//! whose conditional mean equals the baseline snapshot trace, without
//! ever materializing a d x d matrix.
//!
//! Clifford records re-prepare |b> and run U^dag before measuring, giving
//! Y = (d+1) X - tr(O) from the shot mean X. Pauli records work on the
//! observable's support only: each round flips every kept bit with
//! probability 1/3, prepares the noisy product state, measures, and
//! multiplies by the per-bit weights 3 times the flip sign, so the noise
//! average rebuilds 3|b><b| - I per qubit.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::ensembles::{
    acquire_record, CopyCounter, MeasurementRecord, SampledUnitary, Scheme,
};
use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::measure::OutcomeDistribution;
use crate::observable::Observable;
use crate::qstate::QuantumState;

/// One phase-2 output: the estimator variable for a (record, observable)
/// pair and the number of emulated shots it consumed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateVariable {
    pub value: f64,
    pub shots: u64,
}

/// Phase 1: consume `count` copies of the state, keep classical records.
pub fn acquire<R: Rng + ?Sized>(
    state: &QuantumState,
    scheme: Scheme,
    count: usize,
    counter: &CopyCounter,
    rng: &mut R,
) -> Result<Vec<MeasurementRecord>> {
    if count == 0 {
        return Err(Error::InvalidInput("need at least one record".into()));
    }
    (0..count)
        .map(|_| acquire_record(state, scheme, counter, rng))
        .collect()
}

/// Default phase-2 shot count per record.
pub fn default_shots(scheme: Scheme, n: usize, obs: &Observable) -> u64 {
    match scheme {
        Scheme::Clifford => 2 * ((1u64 << n) + 1),
        Scheme::Pauli => pauli_default_shots(obs.locality()),
    }
}

/// ceil((9/4)^k), the shot count that tames the 3^k weight variance.
pub fn pauli_default_shots(k: usize) -> u64 {
    (9f64 / 4.0).powi(k as i32).ceil() as u64
}

/// Phase 2 for a Clifford record: emulate m preparations of U^dag |b>,
/// measure the observable each time, and rescale the shot mean.
pub fn phase2_clifford<R: Rng + ?Sized>(
    rec: &MeasurementRecord,
    obs: &Observable,
    m: u64,
    rng: &mut R,
) -> Result<EstimateVariable> {
    let tableau = match rec.unitary.parse()? {
        SampledUnitary::Clifford { tableau } => tableau,
        SampledUnitary::Pauli { .. } => {
            return Err(Error::SchemeMismatch {
                expected: "clifford",
                got: "pauli",
            })
        }
    };
    if m < 1 {
        return Err(Error::InvalidInput("phase 2 needs at least one shot".into()));
    }
    if obs.n() != tableau.n() {
        return Err(Error::Dimension(format!(
            "observable on {} qubits, record on {}",
            obs.n(),
            tableau.n()
        )));
    }
    let phi = QuantumState::from_statevector(tableau.adjoint().basis_image(&rec.outcome)?)?;
    // the re-prepared state is identical across shots, so the outcome
    // distribution is computed once per record
    let dist = OutcomeDistribution::of_observable(&phi, obs)?;
    let mut acc = 0.0;
    for _ in 0..m {
        acc += dist.sample(rng);
    }
    let x = acc / m as f64;
    let d = (1u64 << tableau.n()) as f64;
    Ok(EstimateVariable {
        value: (d + 1.0) * x - obs.trace(),
        shots: m,
    })
}

/// Result of pushing a bitstring through the bit-flip noise channel.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyPreparation {
    /// e: which bits flipped.
    pub flips: BitString,
    /// c = b xor e, the string actually prepared.
    pub noisy: BitString,
    /// 3*(-1)^(e_l) per bit.
    pub weights: Vec<f64>,
}

/// Flips each bit independently with probability 1/3.
pub fn flip_bits<R: Rng + ?Sized>(b: &BitString, rng: &mut R) -> NoisyPreparation {
    let flips = BitString::new((0..b.len()).map(|_| rng.random_bool(1.0 / 3.0)).collect());
    let noisy = b.xor(&flips);
    let weights = flips.iter().map(|e| if e { -3.0 } else { 3.0 }).collect();
    NoisyPreparation {
        flips,
        noisy,
        weights,
    }
}

/// Phase 2 for a Pauli record, restricted to the observable's support Q.
/// Each of the m rounds draws fresh flip noise, prepares the k-qubit
/// noisy state in the recorded bases, measures the reduced observable and
/// weights the outcome by the product of per-bit weights.
pub fn phase2_pauli<R: Rng + ?Sized>(
    rec: &MeasurementRecord,
    obs: &Observable,
    m: u64,
    rng: &mut R,
) -> Result<EstimateVariable> {
    let bases = match rec.unitary.parse()? {
        SampledUnitary::Pauli { bases } => bases,
        SampledUnitary::Clifford { .. } => {
            return Err(Error::SchemeMismatch {
                expected: "pauli",
                got: "clifford",
            })
        }
    };
    if m < 1 {
        return Err(Error::InvalidInput("phase 2 needs at least one shot".into()));
    }
    if obs.n() != bases.len() {
        return Err(Error::Dimension(format!(
            "observable on {} qubits, record on {}",
            obs.n(),
            bases.len()
        )));
    }
    let support = obs.support();
    if support.is_empty() {
        // identity component: every round yields the same deterministic
        // value tr(snapshot * c I) = c, no quantum work involved
        let c = obs.trace() / (1u64 << obs.n()) as f64;
        return Ok(EstimateVariable { value: c, shots: m });
    }

    let reduced = obs.restrict_to_support()?;
    let b_q = rec.outcome.select(support);
    // adjoint basis rotations, re-indexed onto the k-qubit workspace
    let preparations: Vec<Vec<Gate>> = support
        .iter()
        .enumerate()
        .map(|(j, &q)| {
            bases[q]
                .rotation(j)
                .iter()
                .rev()
                .map(|g| g.inverse())
                .collect()
        })
        .collect();

    // the outcome distribution depends only on the noisy string c, and
    // there are at most 2^k of those
    let mut cache: HashMap<usize, OutcomeDistribution> = HashMap::new();
    let mut acc = 0.0;
    for _ in 0..m {
        let noise = flip_bits(&b_q, rng);
        let weight: f64 = noise.weights.iter().product();
        let dist = match cache.entry(noise.noisy.to_index()) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(slot) => {
                let mut state = QuantumState::basis(&noise.noisy)?;
                for gates in &preparations {
                    state.apply_gates(gates);
                }
                slot.insert(OutcomeDistribution::of_observable(&state, &reduced)?)
            }
        };
        acc += dist.sample(rng) * weight;
    }
    Ok(EstimateVariable {
        value: acc / m as f64,
        shots: m,
    })
}

/// Dispatches on the record's scheme.
pub fn phase2<R: Rng + ?Sized>(
    rec: &MeasurementRecord,
    obs: &Observable,
    m: u64,
    rng: &mut R,
) -> Result<EstimateVariable> {
    match rec.unitary.scheme() {
        Scheme::Clifford => phase2_clifford(rec, obs, m, rng),
        Scheme::Pauli => phase2_pauli(rec, obs, m, rng),
    }
}

/// On-disk form of a phase-1 acquisition run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordFile {
    pub scheme: Scheme,
    pub n: usize,
    pub records: Vec<MeasurementRecord>,
    pub copies_consumed: u64,
    pub seed: u64,
}

impl RecordFile {
    pub fn validate(&self) -> Result<()> {
        for (i, rec) in self.records.iter().enumerate() {
            if rec.unitary.scheme() != self.scheme {
                return Err(Error::InvalidInput(format!(
                    "record {i} has scheme {}, file header says {}",
                    rec.unitary.scheme(),
                    self.scheme
                )));
            }
            if rec.outcome.len() != self.n {
                return Err(Error::Dimension(format!(
                    "record {i} outcome has {} bits, file header says {}",
                    rec.outcome.len(),
                    self.n
                )));
            }
            // parsing checks the unitary payload (hex shape, symplectic rows)
            let u = rec.unitary.parse()?;
            if u.n() != self.n {
                return Err(Error::Dimension(format!(
                    "record {i} unitary acts on {} qubits, file header says {}",
                    u.n(),
                    self.n
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: RecordFile = serde_json::from_str(s)?;
        file.validate()?;
        Ok(file)
    }
}
