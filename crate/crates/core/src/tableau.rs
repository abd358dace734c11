//! Symplectic tableaux for Clifford unitaries.
//!
//! A tableau stores the conjugated images U X_i U' (rows 0..n, the
//! destabilizer block) and U Z_i U' (rows n..2n, the stabilizer block)
//! as signed Pauli words. Global phase is not represented; every export
//! to a dense matrix is therefore unique only up to a phase.
//!
//! Rows must satisfy the symplectic relations: row i anticommutes with
//! row n+i and commutes with everything else. All constructors enforce
//! this, so the algebra below may assume valid inputs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::pauli::{PhasedPauli, SignedPauli};

/// Dense export is a verification aid, not a simulation path.
pub const DENSE_EXPORT_CAP: usize = 6;

/// Largest register for which amplitude vectors are materialized.
pub const STATEVECTOR_CAP: usize = 14;

/// Bit masks per row live in one u64, capping the register width.
pub const TABLEAU_QUBIT_CAP: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CliffordTableau {
    n: usize,
    rows: Vec<SignedPauli>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1 && n <= TABLEAU_QUBIT_CAP);
        let mut rows = Vec::with_capacity(2 * n);
        for q in 0..n {
            rows.push(SignedPauli {
                x: 1 << q,
                z: 0,
                neg: false,
            });
        }
        for q in 0..n {
            rows.push(SignedPauli {
                x: 0,
                z: 1 << q,
                neg: false,
            });
        }
        CliffordTableau { n, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Image of X_i (i < n) or Z_{i-n} (i >= n) under conjugation.
    pub fn row(&self, i: usize) -> SignedPauli {
        self.rows[i]
    }

    pub fn is_identity(&self) -> bool {
        *self == CliffordTableau::identity(self.n)
    }

    /// Checks the symplectic commutation relations of all row pairs.
    pub fn verify(&self) -> Result<()> {
        if self.rows.len() != 2 * self.n {
            return Err(Error::InvalidTableau("wrong row count".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.is_identity() {
                return Err(Error::InvalidTableau(format!("row {i} is identity")));
            }
            let extra = (row.x | row.z) & !mask_below(self.n);
            if extra != 0 {
                return Err(Error::InvalidTableau(format!(
                    "row {i} has bits beyond qubit {}",
                    self.n - 1
                )));
            }
        }
        for i in 0..2 * self.n {
            for j in i + 1..2 * self.n {
                let anti = !self.rows[i].commutes_with(&self.rows[j]);
                let want = j == i + self.n;
                if anti != want {
                    return Err(Error::InvalidTableau(format!(
                        "rows {i},{j} {} commute",
                        if anti { "do not" } else { "" }
                    )));
                }
            }
        }
        Ok(())
    }

    /// Left-multiplies by a gate: the result represents g * U.
    pub fn apply_gate(&mut self, g: Gate) {
        apply_gate_rows(&mut self.rows, g);
    }

    pub fn apply_gates(&mut self, gates: &[Gate]) {
        for &g in gates {
            self.apply_gate(g);
        }
    }

    pub fn from_gates(n: usize, gates: &[Gate]) -> Self {
        let mut t = CliffordTableau::identity(n);
        t.apply_gates(gates);
        t
    }

    /// Conjugates an arbitrary phased Pauli word: p -> U p U'.
    pub fn conjugate(&self, p: PhasedPauli) -> PhasedPauli {
        let mut acc = PhasedPauli {
            e: p.e,
            x: 0,
            z: 0,
        };
        for q in 0..self.n {
            if p.x >> q & 1 == 1 {
                acc = acc.mul(self.rows[q].to_phased());
            }
        }
        for q in 0..self.n {
            if p.z >> q & 1 == 1 {
                acc = acc.mul(self.rows[self.n + q].to_phased());
            }
        }
        acc
    }

    /// Tableau of the product self * other (other acts first).
    pub fn compose(&self, other: &CliffordTableau) -> CliffordTableau {
        assert_eq!(self.n, other.n, "qubit counts differ");
        let rows = other
            .rows
            .iter()
            .map(|r| self.conjugate(r.to_phased()).to_signed())
            .collect();
        CliffordTableau { n: self.n, rows }
    }

    /// Tableau of the inverse unitary.
    ///
    /// Bits come from the symplectic inverse J M^T J; each sign is fixed
    /// by conjugating the unsigned candidate forward through self, which
    /// must land exactly on the corresponding basis word.
    pub fn adjoint(&self) -> CliffordTableau {
        let n = self.n;
        let entry = |i: usize, col: usize| -> bool {
            let r = self.rows[i];
            if col < n {
                r.x >> col & 1 == 1
            } else {
                r.z >> (col - n) & 1 == 1
            }
        };
        let two_n = 2 * n;
        let mut rows = Vec::with_capacity(two_n);
        for i in 0..two_n {
            let mut x = 0u64;
            let mut z = 0u64;
            for col in 0..two_n {
                let bit = entry((col + n) % two_n, (i + n) % two_n);
                if bit {
                    if col < n {
                        x |= 1 << col;
                    } else {
                        z |= 1 << (col - n);
                    }
                }
            }
            let candidate = SignedPauli { x, z, neg: false };
            let image = self.conjugate(candidate.to_phased()).to_signed();
            let want = if i < n {
                SignedPauli {
                    x: 1 << i,
                    z: 0,
                    neg: false,
                }
            } else {
                SignedPauli {
                    x: 0,
                    z: 1 << (i - n),
                    neg: false,
                }
            };
            assert!(
                image.x == want.x && image.z == want.z,
                "symplectic inverse failed; tableau is corrupt"
            );
            rows.push(SignedPauli {
                neg: image.neg,
                ..candidate
            });
        }
        CliffordTableau { n, rows }
    }

    /// Gate sequence realizing this tableau exactly, signs included.
    /// Applying the returned list in order to the identity tableau
    /// reproduces self.
    pub fn decompose(&self) -> Vec<Gate> {
        let n = self.n;
        let mut work = self.rows.clone();
        let mut gates = Vec::new();
        for llim in 0..n {
            sweep_level(&mut work, llim, n + llim, llim, n, &mut gates);
        }
        debug_assert_eq!(work, CliffordTableau::identity(n).rows);
        gates.iter().rev().map(|g| g.inverse()).collect()
    }

    /// Dense unitary realizing the tableau, unique up to global phase.
    pub fn dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n > DENSE_EXPORT_CAP {
            return Err(Error::TooLarge {
                n: self.n,
                cap: DENSE_EXPORT_CAP,
                what: "dense tableau export",
            });
        }
        let d = 1usize << self.n;
        let gates = self.decompose();
        let mut m = DMatrix::<Complex64>::identity(d, d);
        let mut col = vec![Complex64::new(0.0, 0.0); d];
        for j in 0..d {
            for i in 0..d {
                col[i] = m[(i, j)];
            }
            crate::gates::apply_gates_to_vec(&gates, &mut col, self.n);
            for i in 0..d {
                m[(i, j)] = col[i];
            }
        }
        Ok(m)
    }

    /// Amplitudes of U |b>, computed from the stabilizer description in
    /// O(2^n) time without touching any d x d object.
    pub fn basis_image(&self, bits: &BitString) -> Result<DVector<Complex64>> {
        assert_eq!(bits.len(), self.n);
        let mut stabs: Vec<SignedPauli> = (0..self.n).map(|i| self.rows[self.n + i]).collect();
        for (i, s) in stabs.iter_mut().enumerate() {
            s.neg ^= bits.get(i);
        }
        stabilizer_statevector(&stabs, self.n)
    }

    /// Draws a tableau uniformly from the Clifford group.
    ///
    /// Per level we pick a random signed non-identity Pauli together
    /// with a random anticommuting partner on the remaining qubits and
    /// sweep the pair to (+X_l, +Z_l); the accumulated gates visit every
    /// group element with equal probability.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 1 && n <= TABLEAU_QUBIT_CAP);
        let mut gates = Vec::new();
        for llim in 0..n {
            let p = random_pauli_on(rng, llim, n);
            let q = random_anticommuting(rng, &p, llim, n);
            let mut pair = [p, q];
            sweep_level(&mut pair, 0, 1, llim, n, &mut gates);
        }
        CliffordTableau::from_gates(n, &gates)
    }

    /// Hex encodings of the 2n x 2n bit matrix (row-major, x bits then z
    /// bits per row) and of the 2n phase bits.
    pub fn to_hex(&self) -> (String, String) {
        let mut bits = BitWriter::new();
        for row in &self.rows {
            for q in 0..self.n {
                bits.push(row.x >> q & 1 == 1);
            }
            for q in 0..self.n {
                bits.push(row.z >> q & 1 == 1);
            }
        }
        let mut phases = BitWriter::new();
        for row in &self.rows {
            phases.push(row.neg);
        }
        (hex::encode(bits.finish()), hex::encode(phases.finish()))
    }

    pub fn from_hex(n: usize, tableau_hex: &str, phases_hex: &str) -> Result<Self> {
        if n == 0 || n > TABLEAU_QUBIT_CAP {
            return Err(Error::InvalidTableau(format!("bad qubit count {n}")));
        }
        let matrix_bits = 4 * n * n;
        let phase_bits = 2 * n;
        let matrix = decode_bits(tableau_hex, matrix_bits)?;
        let phases = decode_bits(phases_hex, phase_bits)?;
        let mut rows = Vec::with_capacity(2 * n);
        for i in 0..2 * n {
            let mut x = 0u64;
            let mut z = 0u64;
            for q in 0..n {
                if matrix[i * 2 * n + q] {
                    x |= 1 << q;
                }
                if matrix[i * 2 * n + n + q] {
                    z |= 1 << q;
                }
            }
            rows.push(SignedPauli {
                x,
                z,
                neg: phases[i],
            });
        }
        let t = CliffordTableau { n, rows };
        t.verify()?;
        Ok(t)
    }
}

fn mask_below(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn apply_gate_rows(rows: &mut [SignedPauli], g: Gate) {
    match g {
        Gate::H(q) => {
            let m = 1u64 << q;
            for r in rows {
                let xb = r.x & m != 0;
                let zb = r.z & m != 0;
                r.neg ^= xb && zb;
                if xb != zb {
                    r.x ^= m;
                    r.z ^= m;
                }
            }
        }
        Gate::S(q) => {
            let m = 1u64 << q;
            for r in rows {
                let xb = r.x & m != 0;
                let zb = r.z & m != 0;
                r.neg ^= xb && zb;
                if xb {
                    r.z ^= m;
                }
            }
        }
        Gate::Sdg(q) => {
            let m = 1u64 << q;
            for r in rows {
                let xb = r.x & m != 0;
                let zb = r.z & m != 0;
                r.neg ^= xb && !zb;
                if xb {
                    r.z ^= m;
                }
            }
        }
        Gate::X(q) => {
            let m = 1u64 << q;
            for r in rows {
                r.neg ^= r.z & m != 0;
            }
        }
        Gate::Y(q) => {
            let m = 1u64 << q;
            for r in rows {
                r.neg ^= (r.x & m != 0) ^ (r.z & m != 0);
            }
        }
        Gate::Z(q) => {
            let m = 1u64 << q;
            for r in rows {
                r.neg ^= r.x & m != 0;
            }
        }
        Gate::Cnot(c, t) => {
            let mc = 1u64 << c;
            let mt = 1u64 << t;
            for r in rows {
                let xc = r.x & mc != 0;
                let zc = r.z & mc != 0;
                let xt = r.x & mt != 0;
                let zt = r.z & mt != 0;
                r.neg ^= xc && zt && (xt == zc);
                if xc {
                    r.x ^= mt;
                }
                if zt {
                    r.z ^= mc;
                }
            }
        }
        Gate::Swap(a, b) => {
            let ma = 1u64 << a;
            let mb = 1u64 << b;
            for r in rows {
                if (r.x & ma != 0) != (r.x & mb != 0) {
                    r.x ^= ma | mb;
                }
                if (r.z & ma != 0) != (r.z & mb != 0) {
                    r.z ^= ma | mb;
                }
            }
        }
    }
}

/// Reduces rows[pi] to +X_llim and rows[qi] to +Z_llim, conjugating the
/// whole slice by the emitted gates. rows[pi] must be non-identity on
/// qubits >= llim and rows[qi] must anticommute with it there.
fn sweep_level(
    rows: &mut [SignedPauli],
    pi: usize,
    qi: usize,
    llim: usize,
    n: usize,
    gates: &mut Vec<Gate>,
) {
    let emit = |rows: &mut [SignedPauli], g: Gate, gates: &mut Vec<Gate>| {
        apply_gate_rows(rows, g);
        gates.push(g);
    };

    // Turn every letter of P on the active window into X.
    for q in llim..n {
        let m = 1u64 << q;
        if rows[pi].z & m != 0 {
            let g = if rows[pi].x & m != 0 {
                Gate::S(q)
            } else {
                Gate::H(q)
            };
            emit(rows, g, gates);
        }
    }
    // Collapse the X support onto its smallest qubit with a CNOT tree.
    let mut idxs: Vec<usize> = (llim..n).filter(|&q| rows[pi].x >> q & 1 == 1).collect();
    assert!(!idxs.is_empty(), "pivot row vanished below qubit {llim}");
    while idxs.len() > 1 {
        let mut keep = Vec::with_capacity(idxs.len().div_ceil(2));
        for pair in idxs.chunks(2) {
            if pair.len() == 2 {
                emit(rows, Gate::Cnot(pair[0], pair[1]), gates);
            }
            keep.push(pair[0]);
        }
        idxs = keep;
    }
    if idxs[0] != llim {
        emit(rows, Gate::Swap(llim, idxs[0]), gates);
    }

    // P is now +-X_llim. Bring Q to +-Z_llim the same way if needed.
    let zmask = 1u64 << llim;
    let active = mask_below(n) & !mask_below(llim);
    let q_done =
        rows[qi].x & active == 0 && rows[qi].z & active == zmask;
    if !q_done {
        emit(rows, Gate::H(llim), gates);
        for q in llim..n {
            let m = 1u64 << q;
            if rows[qi].z & m != 0 {
                let g = if rows[qi].x & m != 0 {
                    Gate::S(q)
                } else {
                    Gate::H(q)
                };
                emit(rows, g, gates);
            }
        }
        let mut idxs: Vec<usize> = (llim..n).filter(|&q| rows[qi].x >> q & 1 == 1).collect();
        // Anticommutation with Z_llim guarantees llim stays in the support
        // and, being smallest, is always the surviving CNOT control; the
        // swept pivot row is untouched.
        debug_assert_eq!(idxs.first(), Some(&llim));
        while idxs.len() > 1 {
            let mut keep = Vec::with_capacity(idxs.len().div_ceil(2));
            for pair in idxs.chunks(2) {
                if pair.len() == 2 {
                    emit(rows, Gate::Cnot(pair[0], pair[1]), gates);
                }
                keep.push(pair[0]);
            }
            idxs = keep;
        }
        emit(rows, Gate::H(llim), gates);
    }

    // Clear the signs with a Pauli on the pivot qubit.
    let fix = match (rows[pi].neg, rows[qi].neg) {
        (false, false) => None,
        (false, true) => Some(Gate::X(llim)),
        (true, true) => Some(Gate::Y(llim)),
        (true, false) => Some(Gate::Z(llim)),
    };
    if let Some(g) = fix {
        emit(rows, g, gates);
    }
    debug_assert_eq!(
        rows[pi],
        SignedPauli {
            x: 1 << llim,
            z: 0,
            neg: false
        }
    );
    debug_assert_eq!(
        rows[qi],
        SignedPauli {
            x: 0,
            z: 1 << llim,
            neg: false
        }
    );
}

fn random_pauli_on<R: Rng + ?Sized>(rng: &mut R, llim: usize, n: usize) -> SignedPauli {
    let window = mask_below(n) & !mask_below(llim);
    loop {
        let x = rng.random::<u64>() & window;
        let z = rng.random::<u64>() & window;
        if x | z == 0 {
            continue;
        }
        return SignedPauli {
            x,
            z,
            neg: rng.random_bool(0.5),
        };
    }
}

fn random_anticommuting<R: Rng + ?Sized>(
    rng: &mut R,
    p: &SignedPauli,
    llim: usize,
    n: usize,
) -> SignedPauli {
    let window = mask_below(n) & !mask_below(llim);
    loop {
        let q = SignedPauli {
            x: rng.random::<u64>() & window,
            z: rng.random::<u64>() & window,
            neg: rng.random_bool(0.5),
        };
        if !q.commutes_with(p) {
            return q;
        }
    }
}

#[derive(Default)]
struct BitWriter {
    bytes: Vec<u8>,
    used: u8,
}

impl BitWriter {
    fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, bit: bool) {
        if self.used == 0 {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 1 << (7 - self.used);
        }
        self.used = (self.used + 1) % 8;
    }

    fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

fn decode_bits(hex_str: &str, count: usize) -> Result<Vec<bool>> {
    let bytes = hex::decode(hex_str).map_err(|e| Error::Serialization(e.to_string()))?;
    if bytes.len() != count.div_ceil(8) {
        return Err(Error::Serialization(format!(
            "expected {} bytes for {count} bits, got {}",
            count.div_ceil(8),
            bytes.len()
        )));
    }
    let mut bits = Vec::with_capacity(count);
    for i in 0..count {
        bits.push(bytes[i / 8] >> (7 - i % 8) & 1 == 1);
    }
    // Padding bits must be zero so encodings are canonical.
    for i in count..bytes.len() * 8 {
        if bytes[i / 8] >> (7 - i % 8) & 1 == 1 {
            return Err(Error::Serialization("nonzero padding bits".into()));
        }
    }
    Ok(bits)
}

/// Reverses the low n bits: converts a qubit-indexed mask to a
/// basis-state-indexed mask under the big-endian convention.
fn reverse_bits(mask: u64, n: usize) -> u64 {
    let mut out = 0u64;
    for q in 0..n {
        if mask >> q & 1 == 1 {
            out |= 1 << (n - 1 - q);
        }
    }
    out
}

/// Statevector of the unique state fixed by n independent commuting
/// signed Pauli words. Runs in O(2^n) plus O(n^2) bit operations.
pub fn stabilizer_statevector(stabs: &[SignedPauli], n: usize) -> Result<DVector<Complex64>> {
    if n > STATEVECTOR_CAP {
        return Err(Error::TooLarge {
            n,
            cap: STATEVECTOR_CAP,
            what: "stabilizer state amplitudes",
        });
    }
    assert_eq!(stabs.len(), n);
    // Work in index space so amplitudes can be addressed directly.
    let mut rows: Vec<SignedPauli> = stabs
        .iter()
        .map(|s| SignedPauli {
            x: reverse_bits(s.x, n),
            z: reverse_bits(s.z, n),
            neg: s.neg,
        })
        .collect();

    // Gaussian elimination on the X parts.
    let mut rank = 0usize;
    for col in (0..n).rev() {
        let m = 1u64 << col;
        let Some(pivot) = (rank..n).find(|&i| rows[i].x & m != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        for j in 0..n {
            if j != rank && rows[j].x & m != 0 {
                rows[j] = rows[j]
                    .to_phased()
                    .mul(rows[rank].to_phased())
                    .to_signed();
            }
        }
        rank += 1;
    }

    // The pure-Z rows pin down one support point x0.
    let mut pivots: Vec<(u64, u32, bool)> = Vec::new();
    for row in &rows[rank..] {
        debug_assert_eq!(row.x, 0);
        let mut m = row.z;
        let mut rhs = row.neg;
        for &(pm, pb, pr) in &pivots {
            if m >> pb & 1 == 1 {
                m ^= pm;
                rhs ^= pr;
            }
        }
        if m == 0 {
            if rhs {
                return Err(Error::InvalidTableau(
                    "inconsistent stabilizer constraints".into(),
                ));
            }
            continue;
        }
        let pb = 63 - m.leading_zeros();
        for (pm, _, pr) in pivots.iter_mut() {
            if *pm >> pb & 1 == 1 {
                *pm ^= m;
                *pr ^= rhs;
            }
        }
        pivots.push((m, pb, rhs));
    }
    let mut x0 = 0u64;
    for &(_, pb, rhs) in &pivots {
        if rhs {
            x0 |= 1 << pb;
        }
    }

    // Transport amplitudes over the affine support with a Gray walk.
    let d = 1usize << n;
    let mut amps = DVector::<Complex64>::zeros(d);
    let norm = 1.0 / (1u64 << rank) as f64;
    let norm = norm.sqrt();
    let i_powers = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    let gens: Vec<(u64, u64, Complex64, bool)> = rows[..rank]
        .iter()
        .map(|g| {
            let y = ((g.x & g.z).count_ones() & 3) as usize;
            (g.x, g.z, i_powers[y], g.neg)
        })
        .collect();
    let mut cur = x0;
    let mut amp = Complex64::new(1.0, 0.0);
    amps[cur as usize] = amp * norm;
    for t in 1u64..1 << rank {
        let j = t.trailing_zeros() as usize;
        let (vx, vz, iy, neg) = gens[j];
        let sign = neg ^ ((vz & cur).count_ones() & 1 == 1);
        let lam = if sign { -iy } else { iy };
        cur ^= vx;
        amp *= lam;
        amps[cur as usize] = amp * norm;
    }
    Ok(amps)
}

#[cfg(test)]
mod tests {
    use std::collections::{HashMap, HashSet, VecDeque};

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn letter_matrix(p: (bool, bool), neg: bool) -> DMatrix<Complex64> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let m = match p {
            (false, false) => DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]),
            (true, false) => DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
            (true, true) => DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
            (false, true) => DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
        };
        if neg {
            -m
        } else {
            m
        }
    }

    fn pauli_dense(p: SignedPauli, n: usize) -> DMatrix<Complex64> {
        let mut acc = DMatrix::<Complex64>::identity(1, 1);
        for q in 0..n {
            let letter = letter_matrix((p.x >> q & 1 == 1, p.z >> q & 1 == 1), false);
            acc = acc.kronecker(&letter);
        }
        if p.neg {
            -acc
        } else {
            acc
        }
    }

    fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Compares up to a global phase by aligning the largest entry.
    fn phase_aligned_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        let (mut best, mut idx) = (0.0, (0, 0));
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)].norm() > best {
                    best = a[(i, j)].norm();
                    idx = (i, j);
                }
            }
        }
        let phase = b[idx] / a[idx];
        assert!((phase.norm() - 1.0).abs() < 1e-6, "not phase related");
        max_abs_diff(&(a * phase), b)
    }

    #[test]
    fn identity_tableau_verifies_and_exports() {
        for n in 1..=3 {
            let t = CliffordTableau::identity(n);
            t.verify().unwrap();
            let d = t.dense().unwrap();
            assert!(max_abs_diff(&d, &DMatrix::identity(1 << n, 1 << n)) < 1e-12);
        }
    }

    #[test]
    fn random_tableaux_are_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=4 {
            for _ in 0..2500 {
                CliffordTableau::random(n, &mut rng).verify().unwrap();
            }
        }
    }

    #[test]
    fn decompose_replays_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 1..=5 {
            for _ in 0..40 {
                let t = CliffordTableau::random(n, &mut rng);
                let gates = t.decompose();
                assert_eq!(CliffordTableau::from_gates(n, &gates), t);
            }
        }
    }

    #[test]
    fn dense_realizes_conjugation_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in 1..=3 {
            for _ in 0..25 {
                let t = CliffordTableau::random(n, &mut rng);
                let u = t.dense().unwrap();
                for i in 0..2 * n {
                    let basis = if i < n {
                        SignedPauli { x: 1 << i, z: 0, neg: false }
                    } else {
                        SignedPauli { x: 0, z: 1 << (i - n), neg: false }
                    };
                    let lhs = &u * pauli_dense(basis, n) * u.adjoint();
                    let rhs = pauli_dense(t.row(i), n);
                    assert!(max_abs_diff(&lhs, &rhs) < 1e-9, "row {i} mismatch");
                }
            }
        }
    }

    #[test]
    fn adjoint_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for n in 1..=4 {
            for _ in 0..50 {
                let t = CliffordTableau::random(n, &mut rng);
                let adj = t.adjoint();
                assert!(t.compose(&adj).is_identity());
                assert!(adj.compose(&t).is_identity());
                assert_eq!(adj.adjoint(), t);
            }
        }
    }

    #[test]
    fn adjoint_dense_is_conjugate_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for n in 1..=3 {
            for _ in 0..20 {
                let t = CliffordTableau::random(n, &mut rng);
                let u = t.dense().unwrap();
                let v = t.adjoint().dense().unwrap();
                assert!(phase_aligned_diff(&v, &u.adjoint()) < 1e-9);
            }
        }
    }

    #[test]
    fn compose_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for n in 1..=3 {
            for _ in 0..20 {
                let a = CliffordTableau::random(n, &mut rng);
                let b = CliffordTableau::random(n, &mut rng);
                let ab = a.compose(&b);
                ab.verify().unwrap();
                let lhs = ab.dense().unwrap();
                let rhs = a.dense().unwrap() * b.dense().unwrap();
                assert!(phase_aligned_diff(&lhs, &rhs) < 1e-9);
            }
        }
    }

    #[test]
    fn basis_image_matches_dense_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 1..=5 {
            for _ in 0..20 {
                let t = CliffordTableau::random(n, &mut rng);
                let u = t.dense().unwrap();
                let idx = rng.random_range(0..1usize << n);
                let b = BitString::from_index(idx, n);
                let fast = t.basis_image(&b).unwrap();
                let col = u.column(idx).clone_owned();
                // align phases on the largest amplitude
                let k = (0..fast.len())
                    .max_by(|&a, &bb| fast[a].norm().total_cmp(&fast[bb].norm()))
                    .unwrap();
                let phase = col[k] / fast[k];
                assert!((phase.norm() - 1.0).abs() < 1e-9);
                let diff = (&fast * phase - col).iter().map(|c| c.norm()).fold(0.0, f64::max);
                assert!(diff < 1e-9, "n={n} column mismatch {diff}");
            }
        }
    }

    #[test]
    fn basis_image_norm_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for n in [1, 3, 6, 9] {
            let t = CliffordTableau::random(n, &mut rng);
            let b = BitString::from_index(rng.random_range(0..1usize << n), n);
            let v = t.basis_image(&b).unwrap();
            let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn hex_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for n in [1, 2, 3, 5, 9] {
            for _ in 0..10 {
                let t = CliffordTableau::random(n, &mut rng);
                let (th, ph) = t.to_hex();
                let back = CliffordTableau::from_hex(n, &th, &ph).unwrap();
                assert_eq!(back, t);
            }
        }
    }

    #[test]
    fn from_hex_rejects_garbage() {
        assert!(CliffordTableau::from_hex(1, "zz", "00").is_err());
        assert!(CliffordTableau::from_hex(1, "00", "00").is_err()); // identity rows missing
        assert!(CliffordTableau::from_hex(2, "0000", "00").is_err()); // wrong length
    }

    #[test]
    fn single_qubit_group_has_24_elements_sampled_uniformly() {
        // Enumerate the group by closing {H, S} over the identity.
        let mut seen = HashSet::new();
        let mut queue = VecDeque::from([CliffordTableau::identity(1)]);
        seen.insert(CliffordTableau::identity(1));
        while let Some(t) = queue.pop_front() {
            for g in [Gate::H(0), Gate::S(0)] {
                let mut next = t.clone();
                next.apply_gate(g);
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        assert_eq!(seen.len(), 24);

        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let draws = 100_000;
        let mut counts: HashMap<CliffordTableau, u64> = HashMap::new();
        for _ in 0..draws {
            let t = CliffordTableau::random(1, &mut rng);
            *counts.entry(t).or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        for (t, c) in counts {
            assert!(seen.contains(&t));
            let freq = c as f64 / draws as f64;
            assert!(
                (freq - 1.0 / 24.0).abs() <= 0.01,
                "frequency {freq} out of band"
            );
        }
    }

    #[test]
    fn stabilizer_statevector_of_basis_states() {
        for n in 1..=4 {
            let t = CliffordTableau::identity(n);
            for idx in 0..1usize << n {
                let b = BitString::from_index(idx, n);
                let v = t.basis_image(&b).unwrap();
                for (i, amp) in v.iter().enumerate() {
                    let want = if i == idx { 1.0 } else { 0.0 };
                    assert!((amp - Complex64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn stabilizer_statevector_of_ghz_circuit() {
        // H(0), CNOT(0,1), CNOT(1,2)
        let t = CliffordTableau::from_gates(3, &[Gate::H(0), Gate::Cnot(0, 1), Gate::Cnot(1, 2)]);
        let v = t.basis_image(&BitString::zeros(3)).unwrap();
        let f = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0].norm() - f).abs() < 1e-12);
        assert!((v[7].norm() - f).abs() < 1e-12);
        let mid: f64 = (1..7).map(|i| v[i].norm()).sum();
        assert!(mid < 1e-12);
        // relative phase must be +1 for this circuit
        assert!((v[0] - v[7]).norm() < 1e-12);
    }
}
