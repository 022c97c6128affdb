use super::{Kernel, WORD_LEN_CAP};
use crate::error::{Error, Result};
use crate::word::{mask, shift_in, Word};

const TOLERANCE: f64 = 1e-13;
const MAX_ITERATIONS: usize = 100_000;

/// Stationary law of the length-`len` window of the process, indexed by
/// packed word index.
#[derive(Clone, Debug, PartialEq)]
pub struct WordLaw {
    len: usize,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl WordLaw {
    fn from_probs(len: usize, probs: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        WordLaw { len, probs, cdf }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob_index(&self, index: u64) -> f64 {
        self.probs[index as usize]
    }

    pub fn prob(&self, word: &Word) -> f64 {
        assert_eq!(word.len(), self.len, "word length does not match the law");
        self.prob_index(word.index())
    }

    /// Law of the most recent `len - 1` symbols.
    pub fn drop_oldest(&self) -> WordLaw {
        assert!(self.len > 0);
        let keep = self.len - 1;
        let mut probs = vec![0.0; 1 << keep];
        for (idx, p) in self.probs.iter().enumerate() {
            probs[idx & mask(keep) as usize] += p;
        }
        WordLaw::from_probs(keep, probs)
    }

    /// Inverse-CDF draw from a uniform in `[0, 1)`.
    pub fn sample_index(&self, u: f64) -> u64 {
        let total = *self.cdf.last().unwrap_or(&1.0);
        let target = u * total;
        let i = self.cdf.partition_point(|&c| c <= target);
        i.min(self.probs.len() - 1) as u64
    }
}

/// Exact stationary law of length-`len` words for an i.i.d. or Markov kernel,
/// by power iteration of the word-shift chain on words of length
/// `max(order, len)`.
pub fn stationary_word_law(kernel: &Kernel, len: usize) -> Result<WordLaw> {
    if !kernel.is_exact_mode() {
        return Err(Error::Unsupported(
            "stationary laws are exact only for iid and markov kernels; simulate long-memory kernels with a burn-in".into(),
        ));
    }
    if len > WORD_LEN_CAP {
        return Err(Error::CapExceeded {
            what: "word length",
            value: len,
            cap: WORD_LEN_CAP,
        });
    }
    let m = kernel.memory().max(len);
    if m > WORD_LEN_CAP {
        return Err(Error::CapExceeded {
            what: "state word length",
            value: m,
            cap: WORD_LEN_CAP,
        });
    }
    let states = 1usize << m;
    let mut cur = vec![1.0 / states as f64; states];
    let mut next = vec![0.0; states];
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (idx, &mass) in cur.iter().enumerate() {
            let p0 = kernel.prob0(idx as u64);
            next[shift_in(idx as u64, 0, m) as usize] += mass * p0;
            next[shift_in(idx as u64, 1, m) as usize] += mass * (1.0 - p0);
        }
        residual = cur
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut cur, &mut next);
        if residual < TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged {
            iterations: MAX_ITERATIONS,
            residual,
        });
    }
    let total: f64 = cur.iter().sum();
    cur.iter_mut().for_each(|x| *x /= total);
    let mut law = WordLaw::from_probs(m, cur);
    while law.len() > len {
        law = law.drop_oldest();
    }
    Ok(law)
}
