//! Process kernels: the conditional law of the next symbol given the past.
//!
//! Three families are supported. An i.i.d. kernel ignores the past, a Markov
//! kernel of order `k` looks at the last `k` symbols through a table, and a
//! long-memory kernel adds nonnegative weights for every past zero up to a
//! truncation depth:
//!
//! ```text
//! P(0 | x) = c + sum_{p=1}^{P} theta_p * 1(x_{-p} = 0)
//! ```
//!
//! Contexts shorter than the memory are zero-padded on the left.

mod memory;
mod regime;
mod stationary;

use std::fmt;

use crate::error::{Error, Result};
use crate::word::{mask, Word};

pub use memory::{envelope_check, gamma_profile, lower_envelope, Certification, EnvelopeReport, GammaProfile};
pub use regime::{regime_check, Regime, RegimeReport, TailDescriptor, TailFormula};
pub use stationary::{stationary_word_law, WordLaw};

pub const MARKOV_ORDER_CAP: usize = 12;
pub const LONG_MEMORY_CAP: usize = 16;
pub const WORD_LEN_CAP: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub enum Variant {
    Iid { p0: f64 },
    /// `table[i]` is `P(0 | context)` where `i` is the packed index of the
    /// length-`order` context (most recent symbol in bit 0).
    Markov { order: usize, table: Vec<f64> },
    LongMemory { base: f64, weights: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    variant: Variant,
    min_prob: f64,
}

fn open_unit(p: f64) -> bool {
    p > 0.0 && p < 1.0
}

impl Kernel {
    pub fn iid(p0: f64) -> Result<Self> {
        if !open_unit(p0) {
            return Err(Error::InvalidKernel(format!("iid p0 = {p0} is not in (0,1)")));
        }
        Ok(Kernel {
            variant: Variant::Iid { p0 },
            min_prob: p0.min(1.0 - p0),
        })
    }

    pub fn markov(order: usize, table: Vec<f64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidKernel("markov order must be at least 1".into()));
        }
        if order > MARKOV_ORDER_CAP {
            return Err(Error::CapExceeded {
                what: "markov order",
                value: order,
                cap: MARKOV_ORDER_CAP,
            });
        }
        if table.len() != 1 << order {
            return Err(Error::InvalidKernel(format!(
                "markov table of order {order} needs {} entries, got {}",
                1usize << order,
                table.len()
            )));
        }
        if let Some((i, p)) = table.iter().enumerate().find(|(_, &p)| !open_unit(p)) {
            return Err(Error::InvalidKernel(format!(
                "P(0 | {}) = {p} is not in (0,1)",
                Word::from_index(i as u64, order)
            )));
        }
        let min_prob = table
            .iter()
            .map(|&p| p.min(1.0 - p))
            .fold(f64::INFINITY, f64::min);
        Ok(Kernel {
            variant: Variant::Markov { order, table },
            min_prob,
        })
    }

    /// Markov kernel from `(context, P(0 | context))` pairs; every context of
    /// length `order` must appear exactly once.
    pub fn markov_from_contexts<'a>(
        order: usize,
        entries: impl IntoIterator<Item = (&'a Word, f64)>,
    ) -> Result<Self> {
        if order == 0 || order > MARKOV_ORDER_CAP {
            return Self::markov(order, Vec::new());
        }
        let mut table = vec![f64::NAN; 1 << order];
        for (ctx, p) in entries {
            if ctx.len() != order {
                return Err(Error::InvalidKernel(format!(
                    "context '{ctx}' has length {} but the order is {order}",
                    ctx.len()
                )));
            }
            let slot = &mut table[ctx.index() as usize];
            if !slot.is_nan() {
                return Err(Error::InvalidKernel(format!("context '{ctx}' given twice")));
            }
            *slot = p;
        }
        if let Some(i) = table.iter().position(|p| p.is_nan()) {
            return Err(Error::InvalidKernel(format!(
                "context '{}' is missing",
                Word::from_index(i as u64, order)
            )));
        }
        Self::markov(order, table)
    }

    pub fn long_memory(base: f64, weights: Vec<f64>) -> Result<Self> {
        if weights.len() > LONG_MEMORY_CAP {
            return Err(Error::CapExceeded {
                what: "long-memory truncation depth",
                value: weights.len(),
                cap: LONG_MEMORY_CAP,
            });
        }
        if !(base > 0.0) {
            return Err(Error::InvalidKernel(format!("base c = {base} must be positive")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::InvalidKernel(format!("weight {w} is negative")));
        }
        let top = base + weights.iter().sum::<f64>();
        if !(top < 1.0) {
            return Err(Error::InvalidKernel(format!(
                "c + sum(theta) = {top} must be below 1"
            )));
        }
        Ok(Kernel {
            variant: Variant::LongMemory { base, weights },
            min_prob: base.min(1.0 - top),
        })
    }

    /// `{P(0|0) = 0.7, P(0|1) = 0.4}`.
    pub fn markov1_demo() -> Self {
        Self::markov(1, vec![0.7, 0.4]).expect("valid demo kernel")
    }

    /// `c = 0.3, theta = (0.2, 0.1)`.
    pub fn long_memory_demo() -> Self {
        Self::long_memory(0.3, vec![0.2, 0.1]).expect("valid demo kernel")
    }

    pub fn iid_half() -> Self {
        Self::iid(0.5).expect("valid demo kernel")
    }

    /// An order-3 chain whose chance of a zero falls with the number of
    /// recent ones.
    pub fn markov3_demo() -> Self {
        // indices 0..8 are contexts 000, 001, 010, 011, 100, 101, 110, 111
        Self::markov(3, vec![0.8, 0.6, 0.55, 0.35, 0.65, 0.45, 0.4, 0.2])
            .expect("valid demo kernel")
    }

    pub const BUILTIN_NAMES: [&'static str; 4] =
        ["iid-half", "markov1-demo", "markov3-demo", "long-memory-demo"];

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "iid-half" => Some(Self::iid_half()),
            "markov1-demo" => Some(Self::markov1_demo()),
            "markov3-demo" => Some(Self::markov3_demo()),
            "long-memory-demo" => Some(Self::long_memory_demo()),
            _ => None,
        }
    }

    pub fn builtins() -> Vec<(&'static str, Self)> {
        Self::BUILTIN_NAMES
            .iter()
            .map(|&n| (n, Self::builtin(n).expect("listed builtin")))
            .collect()
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    /// Infimum over all contexts of both conditional symbol probabilities.
    pub fn min_prob(&self) -> f64 {
        self.min_prob
    }

    /// Number of past symbols the kernel reads.
    pub fn memory(&self) -> usize {
        match &self.variant {
            Variant::Iid { .. } => 0,
            Variant::Markov { order, .. } => *order,
            Variant::LongMemory { weights, .. } => weights.len(),
        }
    }

    /// Whether stationary laws can be computed exactly for this kernel.
    pub fn is_exact_mode(&self) -> bool {
        !matches!(self.variant, Variant::LongMemory { .. })
    }

    /// `P(0 | context)` for a packed context index (bit 0 = most recent).
    /// Bits beyond the memory are ignored and missing bits read as 0.
    #[inline]
    pub fn prob0(&self, context: u64) -> f64 {
        match &self.variant {
            Variant::Iid { p0 } => *p0,
            Variant::Markov { order, table } => table[(context & mask(*order)) as usize],
            Variant::LongMemory { base, weights } => {
                let mut p = *base;
                for (lag, theta) in weights.iter().enumerate() {
                    if (context >> lag) & 1 == 0 {
                        p += theta;
                    }
                }
                p
            }
        }
    }

    /// `P(0 | context)` where the context's last symbol is the most recent.
    pub fn conditional_prob(&self, context: &Word) -> f64 {
        self.prob0(context.suffix_index(self.memory()))
    }

    /// `P(symbol | context)`.
    #[inline]
    pub fn prob(&self, symbol: u8, context: u64) -> f64 {
        let p0 = self.prob0(context);
        if symbol == 0 {
            p0
        } else {
            1.0 - p0
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.variant {
            Variant::Iid { p0 } => write!(f, "iid(p0={p0})"),
            Variant::Markov { order, table } => {
                write!(f, "markov(order={order};")?;
                for (i, p) in table.iter().enumerate() {
                    let sep = if i == 0 { "" } else { "," };
                    write!(f, "{sep}{}:{p}", Word::from_index(i as u64, *order))?;
                }
                write!(f, ")")
            }
            Variant::LongMemory { base, weights } => {
                write!(f, "long_memory(c={base};theta=")?;
                for (i, w) in weights.iter().enumerate() {
                    let sep = if i == 0 { "" } else { "," };
                    write!(f, "{sep}{w}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iid_is_context_free() {
        let k = Kernel::iid_half();
        assert_eq!(k.conditional_prob(&Word::empty()), 0.5);
        assert_eq!(k.conditional_prob(&"0110".parse().unwrap()), 0.5);
    }

    #[test]
    fn long_memory_substitution_and_padding() {
        let k = Kernel::long_memory_demo();
        // (x_{-2}, x_{-1}) = (0, 1)
        let ctx: Word = "01".parse().unwrap();
        assert!((k.conditional_prob(&ctx) - 0.4).abs() < 1e-15);
        assert!((k.conditional_prob(&Word::empty()) - 0.6).abs() < 1e-15);
        assert!((k.min_prob() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn markov_reads_only_last_k_symbols() {
        let k = Kernel::markov1_demo();
        assert_eq!(k.conditional_prob(&"10".parse().unwrap()), 0.7);
        assert_eq!(k.conditional_prob(&"01".parse().unwrap()), 0.4);
        assert_eq!(k.conditional_prob(&Word::empty()), 0.7);
        let k3 = Kernel::markov3_demo();
        assert_eq!(k3.conditional_prob(&"1011".parse().unwrap()), 0.35);
        assert_eq!(k3.conditional_prob(&"0011".parse().unwrap()), 0.35);
    }

    #[test]
    fn validation() {
        assert!(Kernel::iid(0.0).is_err());
        assert!(Kernel::iid(1.0).is_err());
        assert!(Kernel::markov(1, vec![0.5, 1.0]).is_err());
        assert!(Kernel::markov(2, vec![0.5, 0.5]).is_err());
        assert!(matches!(
            Kernel::markov(13, vec![]),
            Err(Error::CapExceeded { cap: 12, .. })
        ));
        assert!(Kernel::long_memory(0.0, vec![0.1]).is_err());
        assert!(Kernel::long_memory(0.5, vec![0.3, 0.2]).is_err());
        assert!(Kernel::long_memory(0.3, vec![-0.1]).is_err());
        assert!(matches!(
            Kernel::long_memory(0.01, vec![0.001; 17]),
            Err(Error::CapExceeded { cap: 16, .. })
        ));
    }

    #[test]
    fn markov_from_contexts_checks_coverage() {
        let zero: Word = "0".parse().unwrap();
        let one: Word = "1".parse().unwrap();
        let k = Kernel::markov_from_contexts(1, [(&zero, 0.7), (&one, 0.4)]).unwrap();
        assert_eq!(k, Kernel::markov1_demo());
        assert!(Kernel::markov_from_contexts(1, [(&zero, 0.7)]).is_err());
        assert!(Kernel::markov_from_contexts(1, [(&zero, 0.7), (&zero, 0.4)]).is_err());
    }
}
