//! Snapshot reconstruction: the classical post-processing that turns one
//! measurement record into an unbiased (generally non-physical) estimate
//! of the state.
//!
//! The measurement ensemble twirls the state into a depolarizing channel,
//! so inverting that channel on the observed post-measurement projector
//! gives a matrix whose ensemble average is the state itself. Both
//! ensembles admit closed forms that never require the 2^n x 2^n matrix:
//! a tensor product of 2x2 factors for Pauli bases, and a rank-one update
//! of the identity for Clifford circuits.

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;

use crate::ensembles::{MeasBasis, MeasurementRecord, SampledUnitary, Scheme};
use crate::error::{Error, Result};
use crate::observable::{Observable, ObservableKind, PauliLetter};
use crate::qstate::{apply_2x2, QuantumState};

/// One reconstructed snapshot. Averaging many of these over the ensemble
/// reproduces the measured state.
#[derive(Debug, Clone)]
pub enum Snapshot {
    /// Tensor product of per-qubit 2x2 factors (Pauli ensemble).
    PauliFactors { factors: Vec<Matrix2<Complex64>> },
    /// (d+1)|phi><phi| - I with |phi> = U^dag |b> (Clifford ensemble).
    CliffordRankOne { phi: QuantumState },
}

/// R^dag |b> for a single-qubit measurement basis.
fn retracted_basis_vector(basis: MeasBasis, bit: bool) -> Vector2<Complex64> {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let sign = if bit { -1.0 } else { 1.0 };
    match basis {
        MeasBasis::Z => {
            let mut v = Vector2::zeros();
            v[usize::from(bit)] = Complex64::new(1.0, 0.0);
            v
        }
        MeasBasis::X => Vector2::new(h, h * sign),
        MeasBasis::Y => Vector2::new(h, Complex64::new(0.0, 1.0) * h * sign),
    }
}

/// 3 R^dag |b><b| R - I, the single-qubit inverse-channel factor.
fn pauli_factor(basis: MeasBasis, bit: bool) -> Matrix2<Complex64> {
    let v = retracted_basis_vector(basis, bit);
    let three = Complex64::new(3.0, 0.0);
    let mut f = Matrix2::zeros();
    for a in 0..2 {
        for b in 0..2 {
            f[(a, b)] = three * v[a] * v[b].conj();
        }
        f[(a, a)] -= Complex64::new(1.0, 0.0);
    }
    f
}

/// Reconstructs the snapshot for one record.
pub fn snapshot_from_record(rec: &MeasurementRecord) -> Result<Snapshot> {
    let unitary = rec.unitary.parse()?;
    if unitary.n() != rec.outcome.len() {
        return Err(Error::Dimension(format!(
            "unitary on {} qubits, outcome has {} bits",
            unitary.n(),
            rec.outcome.len()
        )));
    }
    match unitary {
        SampledUnitary::Pauli { bases } => {
            let factors = bases
                .iter()
                .enumerate()
                .map(|(q, &basis)| pauli_factor(basis, rec.outcome.get(q)))
                .collect();
            Ok(Snapshot::PauliFactors { factors })
        }
        SampledUnitary::Clifford { tableau } => {
            let phi = tableau.adjoint().basis_image(&rec.outcome)?;
            Ok(Snapshot::CliffordRankOne {
                phi: QuantumState::from_statevector(phi)?,
            })
        }
    }
}

impl Snapshot {
    pub fn n(&self) -> usize {
        match self {
            Snapshot::PauliFactors { factors } => factors.len(),
            Snapshot::CliffordRankOne { phi } => phi.n(),
        }
    }

    /// tr(snapshot * O) without forming the full snapshot matrix.
    pub fn estimate(&self, obs: &Observable) -> Result<f64> {
        if obs.n() != self.n() {
            return Err(Error::Dimension(format!(
                "observable on {} qubits, snapshot on {}",
                obs.n(),
                self.n()
            )));
        }
        match self {
            Snapshot::PauliFactors { factors } => match obs.kind() {
                ObservableKind::PauliString { coeff, letters } => {
                    let mut acc = Complex64::new(*coeff, 0.0);
                    for (f, l) in factors.iter().zip(letters) {
                        acc *= trace_product_2x2(f, &l.matrix2());
                    }
                    Ok(acc.re)
                }
                ObservableKind::Projector { target } => {
                    // <t| (tensor of factors) |t>
                    let mut w = target.clone();
                    let n = factors.len();
                    for (q, f) in factors.iter().enumerate() {
                        apply_2x2(w.as_mut_slice(), q, f, n);
                    }
                    Ok(target.dotc(&w).re)
                }
                ObservableKind::Dense { matrix, .. } => {
                    let support = obs.support();
                    let block = kron_factors(factors, support);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..block.nrows() {
                        for b in 0..block.ncols() {
                            acc += block[(a, b)] * matrix[(b, a)];
                        }
                    }
                    let mut rest = Complex64::new(1.0, 0.0);
                    for (q, f) in factors.iter().enumerate() {
                        if !support.contains(&q) {
                            rest *= f.trace();
                        }
                    }
                    Ok((acc * rest).re)
                }
            },
            Snapshot::CliffordRankOne { phi } => {
                let d = (1u64 << phi.n()) as f64;
                let overlap = obs.expectation(phi)?;
                Ok((d + 1.0) * overlap - obs.trace())
            }
        }
    }

    /// Full snapshot matrix; quadratic in dimension, so capped.
    pub fn to_matrix(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        let n = self.n();
        if n > cap {
            return Err(Error::TooLarge {
                n,
                cap,
                what: "dense snapshot export",
            });
        }
        Ok(match self {
            Snapshot::PauliFactors { factors } => {
                kron_factors(factors, &(0..n).collect::<Vec<_>>())
            }
            Snapshot::CliffordRankOne { phi } => {
                let v = phi.statevector().expect("snapshot state is pure");
                let d = v.len();
                let dp1 = Complex64::new(d as f64 + 1.0, 0.0);
                let mut m = crate::linalg::outer(v) * dp1;
                for i in 0..d {
                    m[(i, i)] -= Complex64::new(1.0, 0.0);
                }
                m
            }
        })
    }

    /// tr(snapshot * O) through the dense matrices. Same value as
    /// `estimate` but deliberately quadratic; the benchmark pipeline uses
    /// this to expose the cost of full reconstruction.
    pub fn estimate_dense(&self, obs: &Observable, cap: usize) -> Result<f64> {
        let s = self.to_matrix(cap)?;
        let o = obs.to_matrix(cap)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..s.nrows() {
            for j in 0..s.ncols() {
                acc += s[(i, j)] * o[(j, i)];
            }
        }
        Ok(acc.re)
    }
}

fn trace_product_2x2(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Complex64 {
    a[(0, 0)] * b[(0, 0)]
        + a[(0, 1)] * b[(1, 0)]
        + a[(1, 0)] * b[(0, 1)]
        + a[(1, 1)] * b[(1, 1)]
}

fn kron_factors(factors: &[Matrix2<Complex64>], support: &[usize]) -> DMatrix<Complex64> {
    let mut m = DMatrix::<Complex64>::identity(1, 1);
    for &q in support {
        let f = &factors[q];
        let fd = DMatrix::from_fn(2, 2, |i, j| f[(i, j)]);
        m = m.kronecker(&fd);
    }
    m
}

impl PauliLetter {
    fn matrix2(self) -> Matrix2<Complex64> {
        let m = self.matrix();
        Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
    }
}

/// Global depolarizing map D_p(A) = p A + (1-p) tr(A)/d I.
pub fn depolarize_global(a: &DMatrix<Complex64>, p: f64) -> DMatrix<Complex64> {
    let d = a.nrows();
    let tr = a.trace();
    let mut out = a.scale(p);
    let shift = tr * Complex64::new((1.0 - p) / d as f64, 0.0);
    for i in 0..d {
        out[(i, i)] += shift;
    }
    out
}

/// Applies B -> keep*B + mix*tr(B)*I to every 2x2 block of qubit q.
fn map_qubit_blocks(a: &DMatrix<Complex64>, n: usize, q: usize, keep: f64, mix: f64) -> DMatrix<Complex64> {
    let d = a.nrows();
    let s = 1usize << (n - 1 - q);
    let keep = Complex64::new(keep, 0.0);
    let mix = Complex64::new(mix, 0.0);
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for i in 0..d {
        if i & s != 0 {
            continue;
        }
        for j in 0..d {
            if j & s != 0 {
                continue;
            }
            let tr = a[(i, j)] + a[(i + s, j + s)];
            out[(i, j)] = keep * a[(i, j)] + mix * tr;
            out[(i + s, j + s)] = keep * a[(i + s, j + s)] + mix * tr;
            out[(i, j + s)] = keep * a[(i, j + s)];
            out[(i + s, j)] = keep * a[(i + s, j)];
        }
    }
    out
}

/// Single-qubit depolarizing with strength p applied to every qubit.
pub fn depolarize_local(a: &DMatrix<Complex64>, n: usize, p: f64) -> DMatrix<Complex64> {
    let mut m = a.clone();
    for q in 0..n {
        m = map_qubit_blocks(&m, n, q, p, (1.0 - p) / 2.0);
    }
    m
}

/// Ensemble average of U^dag |b><b| U over one acquisition, as a map of
/// the input state.
pub fn measurement_channel(scheme: Scheme, a: &DMatrix<Complex64>, n: usize) -> DMatrix<Complex64> {
    match scheme {
        Scheme::Pauli => depolarize_local(a, n, 1.0 / 3.0),
        Scheme::Clifford => {
            let d = (1u64 << n) as f64;
            depolarize_global(a, 1.0 / (d + 1.0))
        }
    }
}

/// Exact inverse of `measurement_channel`; linear but not positive.
pub fn measurement_channel_inverse(
    scheme: Scheme,
    a: &DMatrix<Complex64>,
    n: usize,
) -> DMatrix<Complex64> {
    match scheme {
        Scheme::Pauli => {
            let mut m = a.clone();
            for q in 0..n {
                // inverse of keep=1/3, mix=1/3 is keep=3, mix=-1
                m = map_qubit_blocks(&m, n, q, 3.0, -1.0);
            }
            m
        }
        Scheme::Clifford => {
            let d = (1u64 << n) as f64;
            let tr = a.trace();
            let mut out = a.scale(d + 1.0);
            for i in 0..a.nrows() {
                out[(i, i)] -= tr;
            }
            out
        }
    }
}
