//! Whether the house-of-cards series `sum_l prod_{p<=l} (1 - gamma_p)`
//! diverges. Finitely many coefficients never decide this, so the caller
//! describes the tail beyond the stored values analytically.

use serde::{Deserialize, Serialize};

use super::GammaProfile;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailFormula {
    /// `gamma_p = scale / (p + shift)^exponent`
    PowerLaw { scale: f64, shift: f64, exponent: f64 },
    /// `gamma_p = scale * ratio^p`
    Geometric { scale: f64, ratio: f64 },
    /// `1 - gamma_p = scale * ratio^p`
    ComplementGeometric { scale: f64, ratio: f64 },
}

impl TailFormula {
    pub fn gamma(&self, p: usize) -> f64 {
        let p = p as f64;
        match *self {
            TailFormula::PowerLaw { scale, shift, exponent } => scale / (p + shift).powf(exponent),
            TailFormula::Geometric { scale, ratio } => scale * ratio.powf(p),
            TailFormula::ComplementGeometric { scale, ratio } => 1.0 - scale * ratio.powf(p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tail", rename_all = "snake_case")]
pub enum TailDescriptor {
    EventuallyZero,
    Formula(TailFormula),
    Unknown,
}

impl TailDescriptor {
    /// Tail value at `p`, when known.
    pub fn gamma(&self, p: usize) -> Option<f64> {
        match self {
            TailDescriptor::EventuallyZero => Some(0.0),
            TailDescriptor::Formula(f) => Some(f.gamma(p)),
            TailDescriptor::Unknown => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    DivergesCertified,
    ConvergesCertified,
    Undetermined,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::DivergesCertified => "diverges-certified",
            Regime::ConvergesCertified => "converges-certified",
            Regime::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeReport {
    pub verdict: Regime,
    /// `lim gamma_p = 0`
    pub complete_connections: Option<bool>,
    /// `sum gamma_p < infinity`
    pub summable: Option<bool>,
    /// `sum_{l=0}^{terms-1} prod_{p<=l} (1 - gamma_p)`
    pub partial_sum: f64,
    pub terms: usize,
}

struct TailFacts {
    diverges: Option<bool>,
    complete_connections: Option<bool>,
    summable: Option<bool>,
}

fn tail_facts(tail: &TailDescriptor, first: usize) -> TailFacts {
    let unknown = TailFacts {
        diverges: None,
        complete_connections: None,
        summable: None,
    };
    let eventually_zero = TailFacts {
        diverges: Some(true),
        complete_connections: Some(true),
        summable: Some(true),
    };
    match tail {
        TailDescriptor::EventuallyZero => eventually_zero,
        TailDescriptor::Unknown => unknown,
        TailDescriptor::Formula(f) => match *f {
            TailFormula::Geometric { scale, ratio } => {
                if !(scale >= 0.0) || !(0.0..1.0).contains(&ratio) {
                    return unknown;
                }
                if scale == 0.0 {
                    return eventually_zero;
                }
                if !(f.gamma(first) < 1.0) {
                    // a coefficient equal to 1 kills every later product
                    return TailFacts {
                        diverges: Some(false),
                        ..eventually_zero
                    };
                }
                eventually_zero
            }
            TailFormula::PowerLaw { scale, shift, exponent } => {
                if !(scale >= 0.0) || !(first as f64 + shift > 0.0) || !exponent.is_finite() {
                    return unknown;
                }
                if scale == 0.0 {
                    return eventually_zero;
                }
                if exponent <= 0.0 {
                    // bounded away from zero: products decay at least geometrically
                    return TailFacts {
                        diverges: Some(false),
                        complete_connections: Some(false),
                        summable: Some(false),
                    };
                }
                if !(f.gamma(first) < 1.0) {
                    return TailFacts {
                        diverges: Some(false),
                        complete_connections: Some(true),
                        summable: Some(exponent > 1.0),
                    };
                }
                // prod (1 - scale/(p+shift)^e) behaves like exp(-scale * sum (p+shift)^-e)
                let diverges = if exponent > 1.0 {
                    true
                } else if exponent == 1.0 {
                    scale <= 1.0
                } else {
                    false
                };
                TailFacts {
                    diverges: Some(diverges),
                    complete_connections: Some(true),
                    summable: Some(exponent > 1.0),
                }
            }
            TailFormula::ComplementGeometric { scale, ratio } => {
                if !(scale > 0.0 && scale <= 1.0) || !(ratio > 0.0 && ratio < 1.0) {
                    return unknown;
                }
                TailFacts {
                    diverges: Some(false),
                    complete_connections: Some(false),
                    summable: Some(false),
                }
            }
        },
    }
}

/// Classifies the series for a profile plus a description of `gamma_p` for
/// `p` beyond the profile, and evaluates its first `l_max` partial terms.
pub fn regime_check(profile: &GammaProfile, tail: &TailDescriptor, l_max: usize) -> RegimeReport {
    let first_tail = profile.values.len();
    let facts = tail_facts(tail, first_tail);
    let finite_dead = profile.values.iter().any(|&g| !(g < 1.0));

    let mut partial_sum = 0.0;
    let mut product = 1.0;
    let mut terms = 0;
    for l in 0..l_max {
        let Some(g) = profile.gamma_at(l, tail) else {
            break;
        };
        product *= 1.0 - g;
        partial_sum += product;
        terms += 1;
    }

    let verdict = if finite_dead {
        Regime::ConvergesCertified
    } else {
        match facts.diverges {
            Some(true) => Regime::DivergesCertified,
            Some(false) => Regime::ConvergesCertified,
            None => Regime::Undetermined,
        }
    };
    RegimeReport {
        verdict,
        complete_connections: facts.complete_connections,
        summable: facts.summable,
        partial_sum,
        terms,
    }
}
