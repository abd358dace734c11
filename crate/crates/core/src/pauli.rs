//! Signed Pauli words over up to 64 qubits, packed as bit masks.
//!
//! A `SignedPauli` is (-1)^neg times the Hermitian word with X on the
//! bits of `x`, Z on the bits of `z`, and Y where both are set. Products
//! go through the `i^e X^x Z^z` form so phases stay exact.

/// Hermitian signed Pauli word. Bit q of `x`/`z` refers to qubit q.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Hash)]
pub struct SignedPauli {
    pub x: u64,
    pub z: u64,
    pub neg: bool,
}

/// i^e * X^x * Z^z with e mod 4. Closed under multiplication.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct PhasedPauli {
    pub e: u8,
    pub x: u64,
    pub z: u64,
}

fn parity(word: u64) -> u8 {
    (word.count_ones() & 1) as u8
}

impl SignedPauli {
    pub fn identity() -> Self {
        SignedPauli {
            x: 0,
            z: 0,
            neg: false,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn commutes_with(&self, other: &SignedPauli) -> bool {
        parity(self.x & other.z) == parity(self.z & other.x)
    }

    /// Number of qubits carrying a non-identity letter.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn to_phased(self) -> PhasedPauli {
        let y_count = (self.x & self.z).count_ones() as u8;
        PhasedPauli {
            e: (2 * self.neg as u8 + y_count) & 3,
            x: self.x,
            z: self.z,
        }
    }
}

impl PhasedPauli {
    pub fn identity() -> Self {
        PhasedPauli { e: 0, x: 0, z: 0 }
    }

    pub fn mul(self, rhs: PhasedPauli) -> PhasedPauli {
        // Reordering Z^z1 past X^x2 costs (-1)^{|z1 & x2|}.
        let e = (self.e + rhs.e + 2 * parity(self.z & rhs.x)) & 3;
        PhasedPauli {
            e,
            x: self.x ^ rhs.x,
            z: self.z ^ rhs.z,
        }
    }

    /// Converts back to the Hermitian form; the phase must be +-1.
    pub fn to_signed(self) -> SignedPauli {
        let y_count = ((self.x & self.z).count_ones() & 3) as u8;
        let t = (self.e + 4 - y_count) & 3;
        assert!(t == 0 || t == 2, "phase i^{t} is not Hermitian");
        SignedPauli {
            x: self.x,
            z: self.z,
            neg: t == 2,
        }
    }
}
