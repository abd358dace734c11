//! Dense quantum states: statevectors for pure states, matrices for
//! mixed ones. Everything is big-endian: qubit 0 owns the most
//! significant bit of a basis index.
//!
//! States are small by design (the register cap keeps amplitude vectors
//! in the tens of kilobytes); all heavy lifting elsewhere goes through
//! tableaux, and dense objects only appear where a test or a baseline
//! estimator genuinely needs them.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::tableau::{CliffordTableau, STATEVECTOR_CAP};
use crate::tol;

#[derive(Clone, Debug)]
enum StateData {
    Pure(DVector<Complex64>),
    Density(DMatrix<Complex64>),
}

#[derive(Clone, Debug)]
pub struct QuantumState {
    n: usize,
    data: StateData,
}

fn check_register(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("register must have >= 1 qubit".into()));
    }
    if n > STATEVECTOR_CAP {
        return Err(Error::TooLarge {
            n,
            cap: STATEVECTOR_CAP,
            what: "dense state",
        });
    }
    Ok(())
}

pub(crate) fn log2_exact(d: usize) -> Result<usize> {
    if d.is_power_of_two() && d > 1 {
        Ok(d.trailing_zeros() as usize)
    } else {
        Err(Error::Dimension(format!(
            "length {d} is not a power of two >= 2"
        )))
    }
}

impl QuantumState {
    pub fn from_statevector(amps: DVector<Complex64>) -> Result<Self> {
        let n = log2_exact(amps.len())?;
        check_register(n)?;
        let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tol::NORM {
            return Err(Error::NotNormalized((norm - 1.0).abs()));
        }
        Ok(QuantumState {
            n,
            data: StateData::Pure(amps),
        })
    }

    pub fn from_density(rho: DMatrix<Complex64>) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::Dimension("density matrix must be square".into()));
        }
        let n = log2_exact(rho.nrows())?;
        check_register(n)?;
        let herm = (&rho - rho.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if herm > tol::HERMITIAN {
            return Err(Error::NotHermitian(herm));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > tol::TRACE || tr.im.abs() > tol::TRACE {
            return Err(Error::BadTrace((tr.re - 1.0).hypot(tr.im)));
        }
        let min_eig = rho
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < tol::PSD_FLOOR {
            return Err(Error::NotPositive(min_eig));
        }
        Ok(QuantumState {
            n,
            data: StateData::Density(rho),
        })
    }

    /// Computational basis state |b>.
    pub fn basis(bits: &BitString) -> Result<Self> {
        check_register(bits.len())?;
        let d = 1usize << bits.len();
        let mut v = DVector::zeros(d);
        v[bits.to_index()] = Complex64::new(1.0, 0.0);
        Ok(QuantumState {
            n: bits.len(),
            data: StateData::Pure(v),
        })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(&BitString::zeros(n))
    }

    pub fn ghz(n: usize) -> Result<Self> {
        check_register(n)?;
        let d = 1usize << n;
        let mut v = DVector::zeros(d);
        let f = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[0] = f;
        v[d - 1] = f;
        Ok(QuantumState {
            n,
            data: StateData::Pure(v),
        })
    }

    pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_register(n)?;
        let d = 1usize << n;
        let mut v = DVector::zeros(d);
        for a in v.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *a = Complex64::new(re, im);
        }
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v /= Complex64::new(norm, 0.0);
        Ok(QuantumState {
            n,
            data: StateData::Pure(v),
        })
    }

    /// Convex mixture of pure or mixed states on the same register.
    pub fn mixture(parts: &[(f64, QuantumState)]) -> Result<Self> {
        let n = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("empty mixture".into()))?
            .1
            .n;
        let d = 1usize << n;
        let mut rho = DMatrix::<Complex64>::zeros(d, d);
        let mut total = 0.0;
        for (w, s) in parts {
            if *w < 0.0 {
                return Err(Error::InvalidInput("negative mixture weight".into()));
            }
            if s.n != n {
                return Err(Error::Dimension("mixture parts differ in size".into()));
            }
            rho += s.to_density().scale(*w);
            total += w;
        }
        if (total - 1.0).abs() > tol::TRACE {
            return Err(Error::InvalidInput(format!(
                "mixture weights sum to {total}"
            )));
        }
        Self::from_density(rho)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn statevector(&self) -> Option<&DVector<Complex64>> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Density(_) => None,
        }
    }

    pub fn to_density(&self) -> DMatrix<Complex64> {
        match &self.data {
            StateData::Pure(v) => v * v.adjoint(),
            StateData::Density(m) => m.clone(),
        }
    }

    /// Diagonal of the density operator: Born weights of basis outcomes.
    pub fn probabilities(&self) -> Vec<f64> {
        match &self.data {
            StateData::Pure(v) => v.iter().map(|c| c.norm_sqr()).collect(),
            StateData::Density(m) => (0..m.nrows()).map(|i| m[(i, i)].re).collect(),
        }
    }

    pub fn sample_computational<R: Rng + ?Sized>(&self, rng: &mut R) -> BitString {
        let probs = self.probabilities();
        let r: f64 = rng.random();
        let mut acc = 0.0;
        for (idx, p) in probs.iter().enumerate() {
            acc += p.max(0.0);
            if r < acc {
                return BitString::from_index(idx, self.n);
            }
        }
        BitString::from_index(probs.len() - 1, self.n)
    }

    pub fn apply_gate(&mut self, g: Gate) {
        match &mut self.data {
            StateData::Pure(v) => g.apply_to_vec(v.as_mut_slice(), self.n),
            StateData::Density(m) => {
                let n = self.n;
                left_apply_gate(m, g, n);
                let mut tmp = m.adjoint();
                left_apply_gate(&mut tmp, g, n);
                *m = tmp.adjoint();
            }
        }
    }

    pub fn apply_gates(&mut self, gates: &[Gate]) {
        for &g in gates {
            self.apply_gate(g);
        }
    }

    pub fn apply_tableau(&mut self, t: &CliffordTableau) {
        assert_eq!(t.n(), self.n);
        self.apply_gates(&t.decompose());
    }

    /// Applies a 2x2 unitary to one qubit.
    pub fn apply_single_qubit(&mut self, q: usize, u: &Matrix2<Complex64>) {
        assert!(q < self.n);
        match &mut self.data {
            StateData::Pure(v) => apply_2x2(v.as_mut_slice(), q, u, self.n),
            StateData::Density(m) => {
                let n = self.n;
                for mut col in m.column_iter_mut() {
                    let slice: &mut [Complex64] = col.as_mut_slice();
                    apply_2x2(slice, q, u, n);
                }
                let mut tmp = m.adjoint();
                for mut col in tmp.column_iter_mut() {
                    apply_2x2(col.as_mut_slice(), q, u, n);
                }
                *m = tmp.adjoint();
            }
        }
    }

    /// Applies a full dense unitary, rejecting non-unitary input.
    pub fn apply_unitary(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        let d = self.dim();
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::Dimension(format!(
                "operator is {}x{}, state dimension is {d}",
                u.nrows(),
                u.ncols()
            )));
        }
        let dev = (u * u.adjoint() - DMatrix::<Complex64>::identity(d, d))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if dev > tol::UNITARY {
            return Err(Error::NotUnitary(dev));
        }
        let out = match &self.data {
            StateData::Pure(v) => {
                let w = u * v;
                let norm: f64 = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > tol::NORM_DRIFT {
                    return Err(Error::NotNormalized((norm - 1.0).abs()));
                }
                QuantumState {
                    n: self.n,
                    data: StateData::Pure(w),
                }
            }
            StateData::Density(m) => {
                let w = u * m * u.adjoint();
                let tr = w.trace();
                if (tr.re - 1.0).abs() > tol::NORM_DRIFT {
                    return Err(Error::BadTrace((tr.re - 1.0).abs()));
                }
                QuantumState {
                    n: self.n,
                    data: StateData::Density(w),
                }
            }
        };
        Ok(out)
    }

    /// <a|self|a> for another pure state, or a-row contraction for
    /// density data. Used by projector measurements.
    pub fn overlap_with(&self, target: &DVector<Complex64>) -> f64 {
        match &self.data {
            StateData::Pure(v) => target.dotc(v).norm_sqr(),
            StateData::Density(m) => {
                let mv = m * target;
                target.dotc(&mv).re
            }
        }
    }
}

fn left_apply_gate(m: &mut DMatrix<Complex64>, g: Gate, n: usize) {
    for mut col in m.column_iter_mut() {
        g.apply_to_vec(col.as_mut_slice(), n);
    }
}

pub(crate) fn apply_2x2(psi: &mut [Complex64], q: usize, u: &Matrix2<Complex64>, n: usize) {
    let s = 1usize << (n - 1 - q);
    let d = psi.len();
    for base in (0..d).step_by(2 * s) {
        for i0 in base..base + s {
            let a = psi[i0];
            let b = psi[i0 + s];
            psi[i0] = u[(0, 0)] * a + u[(0, 1)] * b;
            psi[i0 + s] = u[(1, 0)] * a + u[(1, 1)] * b;
        }
    }
}

/// Declarative state descriptions accepted in experiment configs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Family {
        family: StateFamily,
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Amplitudes {
        amplitudes: Vec<[f64; 2]>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateFamily {
    Zero,
    Ghz,
    RandomPure,
}

impl StateSpec {
    pub fn build(&self) -> Result<QuantumState> {
        match self {
            StateSpec::Family { family, n, seed } => match family {
                StateFamily::Zero => QuantumState::zero(*n),
                StateFamily::Ghz => QuantumState::ghz(*n),
                StateFamily::RandomPure => {
                    let seed = seed.ok_or_else(|| {
                        Error::InvalidInput("random_pure state needs a seed".into())
                    })?;
                    use rand::SeedableRng;
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                    QuantumState::random_pure(*n, &mut rng)
                }
            },
            StateSpec::Amplitudes { amplitudes } => {
                let v = DVector::from_iterator(
                    amplitudes.len(),
                    amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)),
                );
                QuantumState::from_statevector(v)
            }
        }
    }

    pub fn n(&self) -> usize {
        match self {
            StateSpec::Family { n, .. } => *n,
            StateSpec::Amplitudes { amplitudes } => {
                amplitudes.len().max(2).trailing_zeros() as usize
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn basis_state_is_big_endian() {
        let s = QuantumState::basis(&"10".parse().unwrap()).unwrap();
        let v = s.statevector().unwrap();
        assert_eq!(v.len(), 4);
        assert!((v[2].re - 1.0).abs() < 1e-15);
        assert!(v[0].norm() + v[1].norm() + v[3].norm() < 1e-15);
    }

    #[test]
    fn ghz_via_gates_matches_family() {
        let mut s = QuantumState::zero(2).unwrap();
        s.apply_gates(&[Gate::H(0), Gate::Cnot(0, 1)]);
        let v = s.statevector().unwrap();
        let g = QuantumState::ghz(2).unwrap();
        let w = g.statevector().unwrap();
        assert!((v - w).iter().map(|c| c.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn rejects_unnormalized_vectors() {
        let v = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)]);
        assert!(matches!(
            QuantumState::from_statevector(v),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn rejects_bad_density_matrices() {
        // not Hermitian
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5, 0.0),
                Complex64::new(0.3, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        );
        assert!(QuantumState::from_density(m).is_err());
        // negative eigenvalue
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.2, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-0.2, 0.0),
            ],
        );
        assert!(matches!(
            QuantumState::from_density(m),
            Err(Error::NotPositive(_))
        ));
    }

    #[test]
    fn unitary_check_rejects_non_unitary() {
        let s = QuantumState::zero(1).unwrap();
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.9, 0.0),
            ],
        );
        assert!(matches!(s.apply_unitary(&m), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn tableau_application_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let n = rng.random_range(1..=4);
            let t = CliffordTableau::random(n, &mut rng);
            let mut s = QuantumState::random_pure(n, &mut rng).unwrap();
            s.apply_tableau(&t);
            let norm: f64 = s
                .statevector()
                .unwrap()
                .iter()
                .map(|c| c.norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sampling_tracks_born_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=4 {
            let s = QuantumState::random_pure(n, &mut rng).unwrap();
            let probs = s.probabilities();
            let draws = 100_000;
            let mut counts = vec![0u64; 1 << n];
            for _ in 0..draws {
                counts[s.sample_computational(&mut rng).to_index()] += 1;
            }
            let tv: f64 = counts
                .iter()
                .zip(&probs)
                .map(|(&c, &p)| (c as f64 / draws as f64 - p).abs())
                .sum::<f64>()
                / 2.0;
            assert!(tv <= 0.02, "n={n} total variation {tv}");
        }
    }

    #[test]
    fn maximally_mixed_sampling_is_uniform() {
        let d = 4;
        let rho = DMatrix::<Complex64>::identity(d, d).scale(1.0 / d as f64);
        let s = QuantumState::from_density(rho).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 10_000;
        let mut counts = vec![0u64; d];
        for _ in 0..draws {
            counts[s.sample_computational(&mut rng).to_index()] += 1;
        }
        for c in counts {
            let f = c as f64 / draws as f64;
            assert!((f - 0.25).abs() <= 0.02, "frequency {f}");
        }
    }

    #[test]
    fn density_gate_application_matches_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let n = rng.random_range(1..=3);
            let t = CliffordTableau::random(n, &mut rng);
            let pure = QuantumState::random_pure(n, &mut rng).unwrap();
            let mut as_density =
                QuantumState::from_density(pure.to_density()).unwrap();
            let mut as_pure = pure;
            as_pure.apply_tableau(&t);
            as_density.apply_tableau(&t);
            let diff = (as_pure.to_density() - as_density.to_density())
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-9);
        }
    }

    #[test]
    fn state_spec_json_roundtrip() {
        let spec: StateSpec =
            serde_json::from_str(r#"{"family":"ghz","n":3,"seed":1}"#).unwrap();
        let s = spec.build().unwrap();
        assert_eq!(s.n(), 3);

        let spec: StateSpec =
            serde_json::from_str(r#"{"amplitudes":[[0.6,0.0],[0.0,0.8]]}"#).unwrap();
        let s = spec.build().unwrap();
        assert_eq!(s.n(), 1);

        let spec: StateSpec = serde_json::from_str(r#"{"family":"random_pure","n":2}"#).unwrap();
        assert!(spec.build().is_err()); // seed required
    }
}
