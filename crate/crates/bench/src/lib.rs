//! Shared fixtures for the criterion benches.

use shadow_core::rng::{derive_seed, stream};
use shadow_core::{acquire, CopyCounter, MeasurementRecord, Observable, QuantumState, Scheme};

/// A GHZ register plus `count` fresh measurement records for it.
pub fn fixture(
    n: usize,
    scheme: Scheme,
    count: usize,
    seed: u64,
) -> (QuantumState, Vec<MeasurementRecord>) {
    let state = QuantumState::ghz(n).expect("register size within caps");
    let counter = CopyCounter::new();
    let mut rng = stream(derive_seed(seed, "bench-fixture", n as u64), "records", 0);
    let records = acquire(&state, scheme, count, &counter, &mut rng).expect("acquisition");
    (state, records)
}

/// The observable each pipeline is asked to estimate: a fidelity
/// projector on clifford records, a two-letter pauli string otherwise.
pub fn contrast_observable(scheme: Scheme, state: &QuantumState) -> Observable {
    match scheme {
        Scheme::Clifford => Observable::fidelity_with(state).expect("projector"),
        Scheme::Pauli => {
            let mut letters = vec!['I'; state.n()];
            letters[0] = 'X';
            letters[state.n() - 1] = 'Z';
            Observable::pauli_from_str(1.0, &letters.iter().collect::<String>())
                .expect("pauli string")
        }
    }
}
