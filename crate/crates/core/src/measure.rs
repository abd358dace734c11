//! Projective measurement of an observable on a known state.
//!
//! The simulator never tracks post-measurement states for observable
//! readout; it only needs the outcome distribution (eigenvalue, Born
//! probability), which each observable kind admits in closed form.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::reduced_density;
use crate::observable::{Observable, ObservableKind};
use crate::qstate::QuantumState;
use crate::tol;

/// Finite outcome distribution of one projective measurement.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    outcomes: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(mut outcomes: Vec<(f64, f64)>) -> Result<Self> {
        let mut total = 0.0;
        for (_, p) in outcomes.iter_mut() {
            if *p < tol::PSD_FLOOR {
                return Err(Error::NotPositive(*p));
            }
            *p = p.max(0.0);
            total += *p;
        }
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::BadTrace(total));
        }
        let mut cumulative = Vec::with_capacity(outcomes.len());
        let mut acc = 0.0;
        for (_, p) in &outcomes {
            acc += p;
            cumulative.push(acc / total);
        }
        Ok(OutcomeDistribution {
            outcomes,
            cumulative,
        })
    }

    pub fn outcomes(&self) -> &[(f64, f64)] {
        &self.outcomes
    }

    pub fn mean(&self) -> f64 {
        self.outcomes.iter().map(|(v, p)| v * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let m2: f64 = self.outcomes.iter().map(|(v, p)| v * v * p).sum();
        (m2 - m * m).max(0.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let idx = self
            .cumulative
            .partition_point(|&c| c < u)
            .min(self.outcomes.len() - 1);
        self.outcomes[idx].0
    }

    /// Distribution of measuring `obs` once on `state`.
    pub fn of_observable(state: &QuantumState, obs: &Observable) -> Result<Self> {
        if state.n() != obs.n() {
            return Err(Error::Dimension(format!(
                "observable on {} qubits, state on {}",
                obs.n(),
                state.n()
            )));
        }
        match obs.kind() {
            ObservableKind::PauliString { coeff, .. } => {
                if obs.locality() == 0 {
                    return Self::new(vec![(*coeff, 1.0)]);
                }
                if *coeff == 0.0 {
                    return Self::new(vec![(0.0, 1.0)]);
                }
                // eigenvalues are +-coeff; <W> fixes the split
                let w = obs.expectation(state)? / coeff;
                let p_plus = ((1.0 + w) / 2.0).clamp(0.0, 1.0);
                Self::new(vec![(*coeff, p_plus), (-coeff, 1.0 - p_plus)])
            }
            ObservableKind::Projector { target } => {
                let f = state.overlap_with(target).clamp(0.0, 1.0);
                Self::new(vec![(1.0, f), (0.0, 1.0 - f)])
            }
            ObservableKind::Dense { .. } => {
                let spec = obs.dense_spectral().unwrap();
                let rho_q = reduced_density(state, obs.support());
                let mut outcomes = Vec::with_capacity(spec.eigenvalues.len());
                for (j, &lambda) in spec.eigenvalues.iter().enumerate() {
                    let v = spec.eigenvectors.column(j);
                    let p: Complex64 = (v.adjoint() * &rho_q * v)[(0, 0)];
                    outcomes.push((lambda, p.re));
                }
                Self::new(outcomes)
            }
        }
    }
}

/// One projective measurement of `obs` on `state`.
pub fn measure_observable<R: Rng + ?Sized>(
    state: &QuantumState,
    obs: &Observable,
    rng: &mut R,
) -> Result<f64> {
    Ok(OutcomeDistribution::of_observable(state, obs)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn z_on_zero_is_deterministic() {
        let s = QuantumState::zero(1).unwrap();
        let o = Observable::pauli_from_str(1.0, "Z").unwrap();
        let d = OutcomeDistribution::of_observable(&s, &o).unwrap();
        assert!((d.mean() - 1.0).abs() < 1e-12);
        assert!(d.variance() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert_eq!(d.sample(&mut rng), 1.0);
        }
    }

    #[test]
    fn x_on_zero_is_fair_coin() {
        let s = QuantumState::zero(1).unwrap();
        let o = Observable::pauli_from_str(2.0, "X").unwrap();
        let d = OutcomeDistribution::of_observable(&s, &o).unwrap();
        assert!(d.mean().abs() < 1e-12);
        assert!((d.variance() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn distribution_mean_matches_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let s = QuantumState::random_pure(3, &mut rng).unwrap();
            for letters in ["XYZ", "ZIZ", "IIX"] {
                let o = Observable::pauli_from_str(-1.5, letters).unwrap();
                let d = OutcomeDistribution::of_observable(&s, &o).unwrap();
                assert!((d.mean() - o.expectation(&s).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dense_path_agrees_with_parity_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = QuantumState::random_pure(3, &mut rng).unwrap();
        let pauli = Observable::pauli_from_str(1.0, "YZ").unwrap();
        let block = pauli.to_matrix(4).unwrap();
        let dense = Observable::dense(3, vec![0, 2], block).unwrap();
        let sparse = Observable::pauli_from_str(1.0, "YIZ").unwrap();
        let dd = OutcomeDistribution::of_observable(&s, &dense).unwrap();
        let ds = OutcomeDistribution::of_observable(&s, &sparse).unwrap();
        assert!((dd.mean() - ds.mean()).abs() < 1e-10);
        assert!((dd.variance() - ds.variance()).abs() < 1e-10);
        // dense eigenvalues ±1 each twice; collect mass by sign
        let plus: f64 = dd
            .outcomes()
            .iter()
            .filter(|(v, _)| *v > 0.0)
            .map(|(_, p)| p)
            .sum();
        let want: f64 = ds
            .outcomes()
            .iter()
            .filter(|(v, _)| *v > 0.0)
            .map(|(_, p)| p)
            .sum();
        assert!((plus - want).abs() < 1e-10);
    }

    #[test]
    fn projector_distribution_is_bernoulli_fidelity() {
        let ghz = QuantumState::ghz(2).unwrap();
        let o = Observable::fidelity_with(&ghz).unwrap();
        let zero = QuantumState::zero(2).unwrap();
        let d = OutcomeDistribution::of_observable(&zero, &o).unwrap();
        assert!((d.mean() - 0.5).abs() < 1e-12);
        assert!((d.variance() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sampling_tracks_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = QuantumState::random_pure(2, &mut rng).unwrap();
        let o = Observable::pauli_from_str(1.0, "XY").unwrap();
        let d = OutcomeDistribution::of_observable(&s, &o).unwrap();
        let trials = 200_000;
        let mut plus = 0usize;
        for _ in 0..trials {
            if d.sample(&mut rng) > 0.0 {
                plus += 1;
            }
        }
        let want = (1.0 + d.mean()) / 2.0;
        assert!((plus as f64 / trials as f64 - want).abs() < 0.005);
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(OutcomeDistribution::new(vec![(1.0, 0.6), (0.0, 0.6)]).is_err());
        assert!(OutcomeDistribution::new(vec![(1.0, 1.5), (0.0, -0.5)]).is_err());
        // tiny negative from roundoff is clamped
        let d = OutcomeDistribution::new(vec![(1.0, 1.0 + 1e-12), (0.0, -1e-12)]).unwrap();
        assert!((d.mean() - 1.0).abs() < 1e-9);
    }
}
