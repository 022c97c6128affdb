//! Finite binary words.
//!
//! A [`Word`] stores symbols oldest first, so the last element is the most
//! recent observation. Dynamic programs work on packed indices instead: for a
//! word of length `L` the index has the most recent symbol in bit 0 and the
//! oldest in bit `L - 1`. With that layout a context that is shorter than a
//! kernel's memory is zero-padded on the left for free, and appending a new
//! symbol while dropping the oldest one is `((idx << 1) | a) & mask`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest word length that can be packed into an index.
pub const MAX_PACKED_LEN: usize = 63;

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Domain(format!("word symbol {b} is not binary")));
        }
        Ok(Word(bits))
    }

    pub fn zeros(len: usize) -> Self {
        Word(vec![0; len])
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Decodes a packed index of the given length.
    pub fn from_index(index: u64, len: usize) -> Self {
        debug_assert!(len <= MAX_PACKED_LEN);
        Word((0..len).map(|i| ((index >> (len - 1 - i)) & 1) as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn push(&mut self, symbol: u8) {
        debug_assert!(symbol <= 1);
        self.0.push(symbol);
    }

    pub fn extend_from(&mut self, other: &Word) {
        self.0.extend_from_slice(&other.0);
    }

    /// `x_{-p}` for `p >= 1` when the word is read as a context (its last
    /// symbol is `x_{-1}`); positions before the start read as 0.
    pub fn back(&self, p: usize) -> u8 {
        if p == 0 || p > self.0.len() {
            0
        } else {
            self.0[self.0.len() - p]
        }
    }

    /// Packed index of the most recent `len` symbols, zero-padded on the left.
    pub fn suffix_index(&self, len: usize) -> u64 {
        debug_assert!(len <= MAX_PACKED_LEN);
        (1..=len).fold(0u64, |acc, p| acc | (u64::from(self.back(p)) << (p - 1)))
    }

    /// Packed index of the whole word.
    pub fn index(&self) -> u64 {
        self.suffix_index(self.0.len())
    }

    /// The most recent `len` symbols, zero-padded on the left when the word
    /// is shorter.
    pub fn suffix(&self, len: usize) -> Word {
        if len <= self.0.len() {
            Word(self.0[self.0.len() - len..].to_vec())
        } else {
            let mut bits = vec![0; len - self.0.len()];
            bits.extend_from_slice(&self.0);
            Word(bits)
        }
    }

    /// Concatenation `self · other` (other is more recent).
    pub fn concat(&self, other: &Word) -> Word {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        Word(bits)
    }

    /// Complements every symbol.
    pub fn complement(&self) -> Word {
        Word(self.0.iter().map(|b| 1 - b).collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Domain(format!("'{other}' is not a binary symbol"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }
}

/// Appends `symbol` as the most recent bit of a packed index of `len` bits.
#[inline]
pub fn shift_in(index: u64, symbol: u8, len: usize) -> u64 {
    ((index << 1) | u64::from(symbol)) & mask(len)
}

#[inline]
pub fn mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for len in 0..6 {
            for idx in 0..(1u64 << len) {
                let w = Word::from_index(idx, len);
                assert_eq!(w.index(), idx);
            }
        }
    }

    #[test]
    fn most_recent_symbol_is_bit_zero() {
        let w: Word = "011".parse().unwrap();
        assert_eq!(w.index(), 0b011);
        assert_eq!(w.back(1), 1);
        assert_eq!(w.back(3), 0);
        assert_eq!(w.back(4), 0);
        let w: Word = "100".parse().unwrap();
        assert_eq!(w.index(), 0b100);
    }

    #[test]
    fn suffix_pads_with_zeros() {
        let w: Word = "11".parse().unwrap();
        assert_eq!(w.suffix(4).to_string(), "0011");
        assert_eq!(w.suffix(1).to_string(), "1");
        assert_eq!(w.suffix_index(4), 0b0011);
    }

    #[test]
    fn shift_in_drops_oldest() {
        let w: Word = "101".parse().unwrap();
        let shifted = shift_in(w.index(), 0, 3);
        assert_eq!(Word::from_index(shifted, 3).to_string(), "010");
    }

    #[test]
    fn rejects_non_binary() {
        assert!(Word::new(vec![0, 2]).is_err());
        assert!("01x".parse::<Word>().is_err());
    }
}
