use serde::Serialize;

use super::{regime_check, Kernel, Regime, TailDescriptor};
use crate::error::{Error, Result};
use crate::word::{mask, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    Exact,
    UpperBound,
}

impl Certification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Certification::Exact => "exact",
            Certification::UpperBound => "upper-bound",
        }
    }
}

/// Memory-decay coefficients `gamma_0 ..= gamma_{p_max}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaProfile {
    pub values: Vec<f64>,
    pub certified: Vec<Certification>,
    pub regime: Regime,
}

impl GammaProfile {
    /// Profile from explicit values, e.g. an analytic sequence. Every value
    /// must lie in `[0, 1)`.
    pub fn from_values(values: Vec<f64>, tail: &TailDescriptor) -> Result<Self> {
        if let Some(g) = values.iter().find(|g| !(**g >= 0.0 && **g < 1.0)) {
            return Err(Error::Domain(format!("gamma value {g} is not in [0,1)")));
        }
        let certified = vec![Certification::Exact; values.len()];
        let mut profile = GammaProfile {
            values,
            certified,
            regime: Regime::Undetermined,
        };
        profile.regime = regime_check(&profile, tail, profile.values.len()).verdict;
        Ok(profile)
    }

    pub fn p_max(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// `gamma_p`, falling back to the tail beyond the stored values.
    pub fn gamma_at(&self, p: usize, tail: &TailDescriptor) -> Option<f64> {
        match self.values.get(p) {
            Some(&g) => Some(g),
            None => tail.gamma(p),
        }
    }
}

/// Exact `gamma_p` for `p = 0..=p_max`.
///
/// For `p` below the kernel memory `m` all contexts of length `m` are
/// enumerated and grouped by their last `p` symbols; within a group the
/// smallest ratio `P(i|x) / P(i|y)` is `min_i / max_i` for each symbol. For
/// `p >= m` the conditional law is a function of the shared suffix, so
/// `gamma_p = 0`.
pub fn gamma_profile(kernel: &Kernel, p_max: usize) -> Result<GammaProfile> {
    let m = kernel.memory();
    check_memory_cap(kernel)?;
    let mut values = Vec::with_capacity(p_max + 1);
    for p in 0..=p_max {
        values.push(if p >= m { 0.0 } else { gamma_enumerated(kernel, m, p) });
    }
    let certified = vec![Certification::Exact; values.len()];
    let mut profile = GammaProfile {
        values,
        certified,
        regime: Regime::Undetermined,
    };
    profile.regime = regime_check(&profile, &TailDescriptor::EventuallyZero, p_max + 1).verdict;
    Ok(profile)
}

fn check_memory_cap(kernel: &Kernel) -> Result<()> {
    let cap = if kernel.is_exact_mode() {
        super::MARKOV_ORDER_CAP
    } else {
        super::LONG_MEMORY_CAP
    };
    if kernel.memory() > cap {
        return Err(Error::CapExceeded {
            what: "kernel memory",
            value: kernel.memory(),
            cap,
        });
    }
    Ok(())
}

fn gamma_enumerated(kernel: &Kernel, m: usize, p: usize) -> f64 {
    let groups = 1usize << p;
    let mut lo = vec![f64::INFINITY; groups];
    let mut hi = vec![f64::NEG_INFINITY; groups];
    for ctx in 0..(1u64 << m) {
        let g = (ctx & mask(p)) as usize;
        let p0 = kernel.prob0(ctx);
        lo[g] = lo[g].min(p0);
        hi[g] = hi[g].max(p0);
    }
    let mut min_ratio = 1.0f64;
    for g in 0..groups {
        min_ratio = min_ratio
            .min(lo[g] / hi[g])
            .min((1.0 - hi[g]) / (1.0 - lo[g]));
    }
    (1.0 - min_ratio).max(0.0)
}

/// `a_p(symbol | z)`: the infimum of `P(symbol | x)` over contexts `x` whose
/// most recent `|z|` symbols are `z`.
pub fn lower_envelope(kernel: &Kernel, symbol: u8, z: &Word) -> Result<f64> {
    if symbol > 1 {
        return Err(Error::Domain(format!("symbol {symbol} is not binary")));
    }
    check_memory_cap(kernel)?;
    let m = kernel.memory();
    let p = z.len();
    if p >= m {
        return Ok(kernel.prob(symbol, z.suffix_index(m)));
    }
    let z_idx = z.index();
    let mut inf = f64::INFINITY;
    for prefix in 0..(1u64 << (m - p)) {
        inf = inf.min(kernel.prob(symbol, (prefix << p) | z_idx));
    }
    Ok(inf)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub max_len: usize,
    pub contexts_checked: usize,
    pub violations: usize,
    /// Smallest `a_p(0|z) + a_p(1|z) - (1 - gamma_p)` seen.
    pub min_slack: f64,
}

/// Checks `a_p(0|z) + a_p(1|z) >= 1 - gamma_p` for every context `z` of
/// length `p <= max_len`, up to `tolerance`.
pub fn envelope_check(kernel: &Kernel, max_len: usize, tolerance: f64) -> Result<EnvelopeReport> {
    let profile = gamma_profile(kernel, max_len)?;
    let mut report = EnvelopeReport {
        max_len,
        contexts_checked: 0,
        violations: 0,
        min_slack: f64::INFINITY,
    };
    for p in 0..=max_len {
        for idx in 0..(1u64 << p) {
            let z = Word::from_index(idx, p);
            let slack = lower_envelope(kernel, 0, &z)? + lower_envelope(kernel, 1, &z)? - (1.0 - profile.values[p]);
            report.contexts_checked += 1;
            report.min_slack = report.min_slack.min(slack);
            if slack < -tolerance {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}
