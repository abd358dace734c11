//! Observables whose expectation values the estimators reconstruct.
//!
//! Three kinds are supported: weighted Pauli strings, rank-one projectors
//! onto a pure target state (fidelity witnesses), and dense Hermitian
//! blocks acting on an explicit support. Scalar quantities that the
//! planners need repeatedly (trace, Hilbert-Schmidt norm, operator norm,
//! spectral range) are computed once and cached.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::embed_on_support;
use crate::qstate::{QuantumState, StateSpec};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub fn from_char(c: char) -> Result<Self> {
        Ok(match c {
            'I' | 'i' => PauliLetter::I,
            'X' | 'x' => PauliLetter::X,
            'Y' | 'y' => PauliLetter::Y,
            'Z' | 'z' => PauliLetter::Z,
            other => {
                return Err(Error::InvalidInput(format!(
                    "invalid Pauli letter '{other}'"
                )))
            }
        })
    }

    pub fn to_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }

    pub fn matrix(self) -> DMatrix<Complex64> {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let entries = match self {
            PauliLetter::I => [one, z, z, one],
            PauliLetter::X => [z, one, one, z],
            PauliLetter::Y => [z, -i, i, z],
            PauliLetter::Z => [one, z, z, -one],
        };
        DMatrix::from_row_slice(2, 2, &entries)
    }
}

/// Eigendecomposition of a dense block, built lazily.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

#[derive(Debug, Clone)]
pub(crate) enum ObservableKind {
    PauliString {
        coeff: f64,
        letters: Vec<PauliLetter>,
    },
    Projector {
        target: DVector<Complex64>,
    },
    Dense {
        matrix: DMatrix<Complex64>,
        spectral: OnceLock<Spectral>,
    },
}

#[derive(Debug, Clone)]
pub struct Observable {
    n: usize,
    support: Vec<usize>,
    kind: ObservableKind,
}

impl Observable {
    /// Weighted Pauli string; one letter per qubit.
    pub fn pauli(coeff: f64, letters: Vec<PauliLetter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidInput("empty Pauli string".into()));
        }
        if !coeff.is_finite() {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        let support = letters
            .iter()
            .enumerate()
            .filter(|(_, l)| **l != PauliLetter::I)
            .map(|(q, _)| q)
            .collect();
        Ok(Observable {
            n: letters.len(),
            support,
            kind: ObservableKind::PauliString { coeff, letters },
        })
    }

    pub fn pauli_from_str(coeff: f64, s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(PauliLetter::from_char)
            .collect::<Result<Vec<_>>>()?;
        Self::pauli(coeff, letters)
    }

    /// Rank-one projector |t><t| onto a normalized pure state.
    pub fn projector(target: DVector<Complex64>) -> Result<Self> {
        let n = crate::qstate::log2_exact(target.len())?;
        let norm = target.norm();
        if (norm - 1.0).abs() > tol::NORM {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Observable {
            n,
            support: (0..n).collect(),
            kind: ObservableKind::Projector { target },
        })
    }

    pub fn fidelity_with(state: &QuantumState) -> Result<Self> {
        let psi = state
            .statevector()
            .ok_or_else(|| Error::InvalidInput("fidelity target must be pure".into()))?;
        Self::projector(psi.clone())
    }

    /// Dense Hermitian block on the given (sorted, distinct) qubits.
    pub fn dense(n: usize, support: Vec<usize>, matrix: DMatrix<Complex64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidInput("dense observable needs support".into()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) || *support.last().unwrap() >= n {
            return Err(Error::InvalidInput(
                "support must be sorted, distinct and inside the register".into(),
            ));
        }
        let dk = 1usize << support.len();
        if matrix.nrows() != dk || matrix.ncols() != dk {
            return Err(Error::Dimension(format!(
                "dense block is {}x{} but support has {} qubits",
                matrix.nrows(),
                matrix.ncols(),
                support.len()
            )));
        }
        let herm = crate::linalg::max_abs(&(&matrix - matrix.adjoint()));
        if herm > tol::HERMITIAN {
            return Err(Error::NotHermitian(herm));
        }
        Ok(Observable {
            n,
            support,
            kind: ObservableKind::Dense {
                matrix,
                spectral: OnceLock::new(),
            },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Qubits the observable acts on non-trivially (sorted).
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn locality(&self) -> usize {
        self.support.len()
    }

    pub(crate) fn kind(&self) -> &ObservableKind {
        &self.kind
    }

    /// Pauli payload in index space: (flip mask v, phase mask c, #Y, coeff).
    /// Masks address basis-state index bits, so qubit q maps to bit n-1-q.
    pub(crate) fn pauli_index_masks(&self) -> Option<(u64, u64, u32, f64)> {
        match &self.kind {
            ObservableKind::PauliString { coeff, letters } => {
                let n = self.n;
                let mut v = 0u64;
                let mut c = 0u64;
                let mut y = 0u32;
                for (q, l) in letters.iter().enumerate() {
                    let bit = 1u64 << (n - 1 - q);
                    match l {
                        PauliLetter::I => {}
                        PauliLetter::X => v |= bit,
                        PauliLetter::Y => {
                            v |= bit;
                            c |= bit;
                            y += 1;
                        }
                        PauliLetter::Z => c |= bit,
                    }
                }
                Some((v, c, y, *coeff))
            }
            _ => None,
        }
    }

    /// Eigendecomposition of the dense block (cached after first use).
    pub(crate) fn dense_spectral(&self) -> Option<&Spectral> {
        match &self.kind {
            ObservableKind::Dense { matrix, spectral } => Some(spectral.get_or_init(|| {
                let eig = matrix.clone().symmetric_eigen();
                Spectral {
                    eigenvalues: eig.eigenvalues.iter().copied().collect(),
                    eigenvectors: eig.eigenvectors,
                }
            })),
            _ => None,
        }
    }

    /// Trace over the full register.
    pub fn trace(&self) -> f64 {
        match &self.kind {
            ObservableKind::PauliString { coeff, .. } => {
                if self.support.is_empty() {
                    coeff * (1u64 << self.n) as f64
                } else {
                    0.0
                }
            }
            ObservableKind::Projector { .. } => 1.0,
            ObservableKind::Dense { matrix, .. } => {
                let rest = self.n - self.support.len();
                let block: Complex64 = matrix.diagonal().iter().sum();
                block.re * (1u64 << rest) as f64
            }
        }
    }

    /// tr(O^2) over the full register.
    pub fn trace_sq(&self) -> f64 {
        match &self.kind {
            ObservableKind::PauliString { coeff, .. } => coeff * coeff * (1u64 << self.n) as f64,
            ObservableKind::Projector { .. } => 1.0,
            ObservableKind::Dense { matrix, .. } => {
                let rest = self.n - self.support.len();
                let hs: f64 = matrix.iter().map(|c| c.norm_sqr()).sum();
                hs * (1u64 << rest) as f64
            }
        }
    }

    /// Operator norm (largest singular value).
    pub fn inf_norm(&self) -> f64 {
        match &self.kind {
            ObservableKind::PauliString { coeff, .. } => coeff.abs(),
            ObservableKind::Projector { .. } => 1.0,
            ObservableKind::Dense { .. } => {
                let spec = self.dense_spectral().unwrap();
                spec.eigenvalues
                    .iter()
                    .map(|e| e.abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Closed interval containing every eigenvalue of the full operator.
    /// tr(rho O) always lands inside it, so estimates can be clipped here.
    pub fn spectral_range(&self) -> (f64, f64) {
        match &self.kind {
            ObservableKind::PauliString { coeff, .. } => {
                if self.support.is_empty() {
                    (*coeff, *coeff)
                } else {
                    (-coeff.abs(), coeff.abs())
                }
            }
            ObservableKind::Projector { .. } => (0.0, 1.0),
            ObservableKind::Dense { .. } => {
                // tensoring with identity only repeats eigenvalues, so the
                // block spectrum already bounds the full operator
                let spec = self.dense_spectral().unwrap();
                let lo = spec.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = spec
                    .eigenvalues
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        }
    }

    pub fn clamp_to_range(&self, value: f64) -> f64 {
        let (lo, hi) = self.spectral_range();
        value.clamp(lo, hi)
    }

    /// Same observable rewritten on its support alone (register size = k).
    /// Projectors are returned unchanged since their support is the full
    /// register by construction.
    pub fn restrict_to_support(&self) -> Result<Observable> {
        match &self.kind {
            ObservableKind::PauliString { coeff, letters } => {
                let kept: Vec<PauliLetter> = self
                    .support
                    .iter()
                    .map(|&q| letters[q])
                    .collect();
                if kept.is_empty() {
                    return Err(Error::InvalidInput(
                        "identity observable has empty support".into(),
                    ));
                }
                Observable::pauli(*coeff, kept)
            }
            ObservableKind::Projector { .. } => Ok(self.clone()),
            ObservableKind::Dense { matrix, .. } => {
                let k = self.support.len();
                Observable::dense(k, (0..k).collect(), matrix.clone())
            }
        }
    }

    /// Full 2^n x 2^n matrix. Only for small registers (oracles, dense
    /// estimator paths); guarded by the export cap.
    pub fn to_matrix(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        if self.n > cap {
            return Err(Error::TooLarge {
                n: self.n,
                cap,
                what: "dense observable export",
            });
        }
        Ok(match &self.kind {
            ObservableKind::PauliString { coeff, letters } => {
                let mut m = DMatrix::<Complex64>::identity(1, 1);
                for l in letters {
                    m = m.kronecker(&l.matrix());
                }
                m * Complex64::new(*coeff, 0.0)
            }
            ObservableKind::Projector { target } => crate::linalg::outer(target),
            ObservableKind::Dense { matrix, .. } => embed_on_support(matrix, self.n, &self.support),
        })
    }

    /// Exact tr(rho O) against a known state, without forming the full
    /// observable matrix.
    pub fn expectation(&self, state: &QuantumState) -> Result<f64> {
        if state.n() != self.n {
            return Err(Error::Dimension(format!(
                "observable on {} qubits, state on {}",
                self.n,
                state.n()
            )));
        }
        match &self.kind {
            ObservableKind::PauliString { .. } => {
                let (v, c, y, coeff) = self.pauli_index_masks().unwrap();
                Ok(coeff * pauli_expectation(state, v, c, y))
            }
            ObservableKind::Projector { target } => Ok(state.overlap_with(target)),
            ObservableKind::Dense { matrix, .. } => {
                let rho_q = crate::linalg::reduced_density(state, &self.support);
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..matrix.nrows() {
                    for b in 0..matrix.ncols() {
                        acc += rho_q[(a, b)] * matrix[(b, a)];
                    }
                }
                Ok(acc.re)
            }
        }
    }
}

/// <P> for a signed-free Pauli word given by index-space masks.
/// P|x> = i^y (-1)^(parity(c & x)) |x xor v|... applied as <x|P|x xor v>.
fn pauli_expectation(state: &QuantumState, v: u64, c: u64, y: u32) -> f64 {
    let phase_root = Complex64::new(0.0, 1.0).powu(y);
    let amp = |x: usize| -> Complex64 {
        let sign = if ((x as u64 & c).count_ones() & 1) == 1 {
            -1.0
        } else {
            1.0
        };
        phase_root * sign
    };
    if let Some(psi) = state.statevector() {
        let mut acc = Complex64::new(0.0, 0.0);
        for x in 0..psi.len() {
            let xv = x ^ v as usize;
            // <x|P|xv> is nonzero exactly when xv xor v == x
            acc += psi[x].conj() * amp(xv) * psi[xv];
        }
        acc.re
    } else {
        let rho = state.to_density();
        let mut acc = Complex64::new(0.0, 0.0);
        for x in 0..rho.nrows() {
            let xv = x ^ v as usize;
            acc += amp(xv) * rho[(xv, x)];
        }
        acc.re
    }
}

/// Serializable description of an observable.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObservableSpec {
    Pauli {
        #[serde(default = "default_coeff")]
        coeff: f64,
        letters: String,
    },
    Projector {
        #[serde(flatten)]
        target: StateSpec,
    },
    Dense {
        support: Vec<usize>,
        /// Row-major complex entries as [re, im] pairs.
        matrix: Vec<Vec<[f64; 2]>>,
    },
}

fn default_coeff() -> f64 {
    1.0
}

impl ObservableSpec {
    pub fn build(&self, n: usize) -> Result<Observable> {
        match self {
            ObservableSpec::Pauli { coeff, letters } => {
                if letters.len() != n {
                    return Err(Error::Dimension(format!(
                        "Pauli string has {} letters for {} qubits",
                        letters.len(),
                        n
                    )));
                }
                Observable::pauli_from_str(*coeff, letters)
            }
            ObservableSpec::Projector { target } => {
                let state = target.build()?;
                if state.n() != n {
                    return Err(Error::Dimension(format!(
                        "projector target on {} qubits, register has {}",
                        state.n(),
                        n
                    )));
                }
                Observable::fidelity_with(&state)
            }
            ObservableSpec::Dense { support, matrix } => {
                let rows = matrix.len();
                let mut m = DMatrix::<Complex64>::zeros(rows, rows);
                for (i, row) in matrix.iter().enumerate() {
                    if row.len() != rows {
                        return Err(Error::Dimension("dense block is not square".into()));
                    }
                    for (j, e) in row.iter().enumerate() {
                        m[(i, j)] = Complex64::new(e[0], e[1]);
                    }
                }
                Observable::dense(n, support.clone(), m)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn dense_expectation(obs: &Observable, state: &QuantumState) -> f64 {
        let m = obs.to_matrix(8).unwrap();
        let rho = state.to_density();
        (&m * &rho).trace().re
    }

    #[test]
    fn pauli_scalars() {
        let o = Observable::pauli_from_str(0.5, "XIZ").unwrap();
        assert_eq!(o.support(), &[0, 2]);
        assert_eq!(o.locality(), 2);
        assert_eq!(o.trace(), 0.0);
        assert!((o.trace_sq() - 0.25 * 8.0).abs() < 1e-12);
        assert!((o.inf_norm() - 0.5).abs() < 1e-12);
        assert_eq!(o.spectral_range(), (-0.5, 0.5));
    }

    #[test]
    fn identity_string_scalars() {
        let o = Observable::pauli_from_str(2.0, "II").unwrap();
        assert_eq!(o.locality(), 0);
        assert!((o.trace() - 8.0).abs() < 1e-12);
        assert_eq!(o.spectral_range(), (2.0, 2.0));
    }

    #[test]
    fn projector_scalars() {
        let s = QuantumState::ghz(2).unwrap();
        let o = Observable::fidelity_with(&s).unwrap();
        assert!((o.trace() - 1.0).abs() < 1e-12);
        assert!((o.trace_sq() - 1.0).abs() < 1e-12);
        assert!((o.inf_norm() - 1.0).abs() < 1e-12);
        assert_eq!(o.spectral_range(), (0.0, 1.0));
    }

    #[test]
    fn dense_scalars_match_embedding() {
        // random-ish Hermitian 2x2 on qubit 1 of 3
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.3, 0.0),
                Complex64::new(0.1, -0.2),
                Complex64::new(0.1, 0.2),
                Complex64::new(-0.7, 0.0),
            ],
        );
        let o = Observable::dense(3, vec![1], m).unwrap();
        let full = o.to_matrix(8).unwrap();
        assert!((o.trace() - full.trace().re).abs() < 1e-10);
        let sq = (&full * &full).trace().re;
        assert!((o.trace_sq() - sq).abs() < 1e-10);
        let (lo, hi) = o.spectral_range();
        assert!(lo < -0.7 && hi > 0.3);
    }

    #[test]
    fn expectation_matches_dense_oracle() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let state = QuantumState::random_pure(3, &mut rng).unwrap();
            for (coeff, s) in [(1.0, "XYZ"), (-0.5, "IYI"), (2.0, "ZZX"), (1.0, "III")] {
                let o = Observable::pauli_from_str(coeff, s).unwrap();
                let got = o.expectation(&state).unwrap();
                let want = dense_expectation(&o, &state);
                assert!((got - want).abs() < 1e-10, "{s}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn expectation_on_density_matches_pure() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let state = QuantumState::random_pure(3, &mut rng).unwrap();
        let rho = QuantumState::from_density(state.to_density()).unwrap();
        let o = Observable::pauli_from_str(1.0, "YXZ").unwrap();
        assert!((o.expectation(&state).unwrap() - o.expectation(&rho).unwrap()).abs() < 1e-10);
        let p = Observable::fidelity_with(&QuantumState::ghz(3).unwrap()).unwrap();
        assert!((p.expectation(&state).unwrap() - p.expectation(&rho).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn projector_expectation_is_fidelity() {
        let ghz = QuantumState::ghz(3).unwrap();
        let o = Observable::fidelity_with(&ghz).unwrap();
        assert!((o.expectation(&ghz).unwrap() - 1.0).abs() < 1e-12);
        let zero = QuantumState::zero(3).unwrap();
        assert!((o.expectation(&zero).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dense_expectation_via_reduced_density() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let state = QuantumState::random_pure(4, &mut rng).unwrap();
        let block = Observable::pauli_from_str(1.0, "XY")
            .unwrap()
            .to_matrix(4)
            .unwrap();
        let o = Observable::dense(4, vec![1, 3], block).unwrap();
        let got = o.expectation(&state).unwrap();
        let want = dense_expectation(&o, &state);
        assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn restriction_keeps_action_on_support() {
        let o = Observable::pauli_from_str(-2.0, "IXIZ").unwrap();
        let r = o.restrict_to_support().unwrap();
        assert_eq!(r.n(), 2);
        let m = r.to_matrix(4).unwrap();
        let want = Observable::pauli_from_str(-2.0, "XZ")
            .unwrap()
            .to_matrix(4)
            .unwrap();
        assert!(max_abs(&(m - want)) < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Observable::pauli_from_str(1.0, "XQ").is_err());
        assert!(Observable::dense(
            2,
            vec![0, 0],
            DMatrix::<Complex64>::identity(4, 4)
        )
        .is_err());
        let nonherm = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        assert!(Observable::dense(1, vec![0], nonherm).is_err());
    }

    #[test]
    fn spec_roundtrip() {
        let spec: ObservableSpec =
            serde_json::from_str(r#"{"type":"pauli","coeff":0.5,"letters":"XZ"}"#).unwrap();
        let o = spec.build(2).unwrap();
        assert_eq!(o.locality(), 2);
        let spec: ObservableSpec =
            serde_json::from_str(r#"{"type":"projector","family":"ghz","n":2}"#).unwrap();
        let o = spec.build(2).unwrap();
        assert_eq!(o.spectral_range(), (0.0, 1.0));
        let s = 1.0 / 2.0_f64.sqrt();
        let spec: ObservableSpec = serde_json::from_str(&format!(
            r#"{{"type":"projector","amplitudes":[[{s},0],[0,0],[0,0],[{s},0]]}}"#
        ))
        .unwrap();
        let o = spec.build(2).unwrap();
        let bell = QuantumState::ghz(2).unwrap();
        assert!((o.expectation(&bell).unwrap() - 1.0).abs() < 1e-10);
    }
}
