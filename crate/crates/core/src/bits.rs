//! Bit strings for measurement outcomes and basis-state labels.
//!
//! Qubit 0 is the most significant bit of a basis-state index, so the
//! string "10" on two qubits labels index 2.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        BitString { bits }
    }

    pub fn zeros(n: usize) -> Self {
        BitString {
            bits: vec![false; n],
        }
    }

    /// Reads the big-endian index back into qubit-ordered bits.
    pub fn from_index(index: usize, n: usize) -> Self {
        let bits = (0..n).map(|q| index >> (n - 1 - q) & 1 == 1).collect();
        BitString { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, q: usize) -> bool {
        self.bits[q]
    }

    pub fn set(&mut self, q: usize, v: bool) {
        self.bits[q] = v;
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    /// Basis-state index with qubit 0 as the most significant bit.
    pub fn to_index(&self) -> usize {
        let n = self.bits.len();
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (q, &b)| acc | (b as usize) << (n - 1 - q))
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        assert_eq!(self.len(), other.len());
        BitString {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        }
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Bits at the given qubit positions, in the order given.
    pub fn select(&self, positions: &[usize]) -> BitString {
        BitString {
            bits: positions.iter().map(|&q| self.bits[q]).collect(),
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidInput(format!(
                    "bit string may only contain 0/1, found {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BitString { bits })
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}
