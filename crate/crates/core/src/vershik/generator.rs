use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::Word;

/// Deepest supported truncation; `3^-40` is below double precision at 1.
pub const MAX_DEPTH: usize = 40;

/// `R_D = sum_{j=0}^{D} 3^-j x_{-j}`, within `3^-D / 2` of the full sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub depth: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig { depth: 6 }
    }
}

impl GeneratorConfig {
    pub fn new(depth: usize) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::CapExceeded {
                what: "generator depth",
                value: depth,
                cap: MAX_DEPTH,
            });
        }
        Ok(GeneratorConfig { depth })
    }

    /// `sup |R - R_D|`.
    pub fn bound(&self) -> f64 {
        3f64.powi(-(self.depth as i32)) / 2.0
    }

    /// Number of coordinates read, `D + 1`.
    pub fn span(&self) -> usize {
        self.depth + 1
    }

    /// `R_D` of a packed word (bit `j` is `x_{-j}`), oldest term first.
    pub fn value_index(&self, index: u64) -> f64 {
        (0..=self.depth.min(63))
            .rev()
            .map(|j| ((index >> j) & 1) as f64 * 3f64.powi(-(j as i32)))
            .sum()
    }
}

/// `R_D` of a word whose last symbol is `x_0`; missing coordinates read as 0.
pub fn truncated_generator(word: &Word, config: &GeneratorConfig) -> f64 {
    let bits = word.bits();
    (0..=config.depth)
        .rev()
        .filter(|&j| j < bits.len())
        .map(|j| f64::from(bits[bits.len() - 1 - j]) * 3f64.powi(-(j as i32)))
        .sum()
}
