//! Index bookkeeping and small dense helpers shared by observables,
//! measurement sampling and the baseline estimator.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::qstate::QuantumState;

/// Splits an n-qubit basis index into (support part, rest part) for a
/// sorted support set, and merges them back. Both parts keep the
/// big-endian convention of the full register.
pub struct SupportIndexer {
    support_strides: Vec<usize>,
    rest_strides: Vec<usize>,
}

impl SupportIndexer {
    pub fn new(n: usize, support: &[usize]) -> Self {
        debug_assert!(support.windows(2).all(|w| w[0] < w[1]));
        let support_strides = support.iter().map(|&q| 1usize << (n - 1 - q)).collect();
        let rest: Vec<usize> = (0..n).filter(|q| !support.contains(q)).collect();
        let rest_strides = rest.iter().map(|&q| 1usize << (n - 1 - q)).collect();
        SupportIndexer {
            support_strides,
            rest_strides,
        }
    }

    pub fn k(&self) -> usize {
        self.support_strides.len()
    }

    pub fn rest_count(&self) -> usize {
        self.rest_strides.len()
    }

    /// Full index from a k-bit support index and an (n-k)-bit rest index.
    pub fn merge(&self, a: usize, r: usize) -> usize {
        let k = self.support_strides.len();
        let m = self.rest_strides.len();
        let mut idx = 0;
        for (j, &stride) in self.support_strides.iter().enumerate() {
            if a >> (k - 1 - j) & 1 == 1 {
                idx |= stride;
            }
        }
        for (j, &stride) in self.rest_strides.iter().enumerate() {
            if r >> (m - 1 - j) & 1 == 1 {
                idx |= stride;
            }
        }
        idx
    }

    /// Support part of a full index.
    pub fn extract(&self, idx: usize) -> usize {
        let k = self.support_strides.len();
        let mut a = 0;
        for (j, &stride) in self.support_strides.iter().enumerate() {
            if idx & stride != 0 {
                a |= 1 << (k - 1 - j);
            }
        }
        a
    }
}

/// Traces out every qubit not in `keep` (sorted positions).
pub fn partial_trace(m: &DMatrix<Complex64>, n: usize, keep: &[usize]) -> DMatrix<Complex64> {
    let ix = SupportIndexer::new(n, keep);
    let dk = 1usize << ix.k();
    let dr = 1usize << ix.rest_count();
    let mut out = DMatrix::<Complex64>::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..dr {
                acc += m[(ix.merge(a, r), ix.merge(b, r))];
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// Reduced density operator on `keep`; avoids forming the full density
/// matrix for pure states.
pub fn reduced_density(state: &QuantumState, keep: &[usize]) -> DMatrix<Complex64> {
    let n = state.n();
    if let Some(psi) = state.statevector() {
        let ix = SupportIndexer::new(n, keep);
        let dk = 1usize << ix.k();
        let dr = 1usize << ix.rest_count();
        let mut out = DMatrix::<Complex64>::zeros(dk, dk);
        for a in 0..dk {
            for b in 0..=a {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..dr {
                    acc += psi[ix.merge(a, r)] * psi[ix.merge(b, r)].conj();
                }
                out[(a, b)] = acc;
                out[(b, a)] = acc.conj();
            }
        }
        out
    } else {
        partial_trace(&state.to_density(), n, keep)
    }
}

/// Places a 2^k operator on the given support qubits, identity elsewhere.
pub fn embed_on_support(
    small: &DMatrix<Complex64>,
    n: usize,
    support: &[usize],
) -> DMatrix<Complex64> {
    let ix = SupportIndexer::new(n, support);
    let d = 1usize << n;
    let dk = small.nrows();
    let dr = 1usize << ix.rest_count();
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for a in 0..dk {
        for b in 0..dk {
            let v = small[(a, b)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            for r in 0..dr {
                out[(ix.merge(a, r), ix.merge(b, r))] = v;
            }
        }
    }
    out
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// tr(O rho) for Hermitian O and rho, as an entrywise contraction.
pub fn frobenius_trace(rho: &DMatrix<Complex64>, obs: &DMatrix<Complex64>) -> f64 {
    rho.iter()
        .zip(obs.iter())
        .map(|(r, o)| (r * o.conj()).re)
        .sum()
}

pub fn outer(v: &DVector<Complex64>) -> DMatrix<Complex64> {
    v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_extract_roundtrip() {
        let ix = SupportIndexer::new(4, &[1, 3]);
        for a in 0..4 {
            for r in 0..4 {
                let idx = ix.merge(a, r);
                assert_eq!(ix.extract(idx), a);
            }
        }
        // qubit 1 carries weight 4, qubit 3 weight 1
        assert_eq!(ix.merge(0b10, 0), 4);
        assert_eq!(ix.merge(0b01, 0), 1);
    }

    #[test]
    fn partial_trace_of_product_state() {
        // |0><0| on qubit 0 tensor I/2 on qubit 1
        let mut m = DMatrix::<Complex64>::zeros(4, 4);
        m[(0, 0)] = Complex64::new(0.5, 0.0);
        m[(1, 1)] = Complex64::new(0.5, 0.0);
        let got = partial_trace(&m, 2, &[0]);
        assert!((got[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(got[(1, 1)].norm() < 1e-12);
        let got = partial_trace(&m, 2, &[1]);
        assert!((got[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((got[(1, 1)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn reduced_density_of_ghz_is_maximally_mixed() {
        let s = QuantumState::ghz(3).unwrap();
        let r = reduced_density(&s, &[1]);
        assert!((r[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((r[(1, 1)].re - 0.5).abs() < 1e-12);
        assert!(r[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn embedding_matches_kron_for_trailing_support() {
        let z = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]));
        let full = embed_on_support(&z, 2, &[1]);
        // I tensor Z
        for i in 0..4 {
            let want = if i % 2 == 0 { 1.0 } else { -1.0 };
            assert!((full[(i, i)].re - want).abs() < 1e-12);
        }
    }
}
