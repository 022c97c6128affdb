use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::run_block_packed;
use crate::error::{Error, Result};
use crate::kernel::{stationary_word_law, Kernel, WordLaw};
use crate::reconstruction::{InitMode, PathSampler};
use crate::rng;
use crate::stats::mean_stderr;
use crate::vershik::{optimal_coupling, GeneratorConfig, MetricLadder, Orientation};
use crate::word::{shift_in, Word};

/// Longest window for the exact joint-law enumeration.
pub const JOINT_WINDOW_CAP: usize = 6;

/// Minimum trials for the Monte Carlo side of the generator-error identity.
pub const GENERATOR_CHECK_MIN_TRIALS: usize = 10_000;

fn overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

/// Lebesgue measure of `{w : 1(w > f) = a, x_hat(w) = b}` where the
/// anchored symbol is `1(u > f_hat)` with `u` the oriented `w`.
pub fn step_joint_mass(orientation: Orientation, f: f64, f_hat: f64) -> [[f64; 2]; 2] {
    let hat_zero = match orientation {
        Orientation::Monotone => (0.0, f_hat),
        Orientation::Antitone => (1.0 - f_hat, 1.0),
    };
    let hat_one = match orientation {
        Orientation::Monotone => (f_hat, 1.0),
        Orientation::Antitone => (0.0, 1.0 - f_hat),
    };
    let (x_zero, x_one) = ((0.0, f), (f, 1.0));
    [
        [overlap(x_zero, hat_zero), overlap(x_zero, hat_one)],
        [overlap(x_one, hat_zero), overlap(x_one, hat_one)],
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointLawReport {
    pub window: usize,
    pub anchor: String,
    pub pasts_checked: usize,
    /// Largest total variation between the innovation-driven joint law of
    /// the two windows and the product of coupling tables.
    pub max_tv_joint: f64,
    /// Largest total variation between the anchored window's law and the
    /// kernel's law started from the anchor.
    pub max_tv_marginal: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Exact window laws for every true past of length `L`, by enumeration of
/// all `4^window` joint paths.
pub fn joint_step_law(kernel: &Kernel, config: GeneratorConfig, window: usize, anchor: &Word) -> Result<JointLawReport> {
    if !kernel.is_exact_mode() {
        return Err(Error::Unsupported("the exact joint law needs an iid or markov kernel".into()));
    }
    if window == 0 || window > JOINT_WINDOW_CAP {
        return Err(Error::CapExceeded {
            what: "joint-law window",
            value: window,
            cap: JOINT_WINDOW_CAP,
        });
    }
    let ladder = MetricLadder::build(kernel, config, window - 1)?;
    let len = ladder.len();
    if anchor.len() != len {
        return Err(Error::TableMismatch(format!("anchor has length {}, expected {len}", anchor.len())));
    }
    let hp0 = anchor.index();
    let pasts = 1u64 << len;

    let worst: Vec<(f64, f64)> = (0..pasts)
        .into_par_iter()
        .map(|xp0| {
            let mut tv_joint = 0.0;
            let mut hat_law = vec![0.0; 1 << window];
            // depth-first over joint paths: (step, x past, hat past, hat bits, mass A, mass B)
            let mut stack = vec![(0usize, xp0, hp0, 0usize, 1.0f64, 1.0f64)];
            while let Some((i, xp, hp, bits, a, b)) = stack.pop() {
                if i == window {
                    tv_joint += (a - b).abs();
                    hat_law[bits] += a;
                    continue;
                }
                let o = ladder.orientation(window - 1 - i, xp, hp);
                let (f, fh) = (kernel.prob0(xp), kernel.prob0(hp));
                let geometric = step_joint_mass(o, f, fh);
                let table = optimal_coupling(f, fh, o).q;
                for xa in 0..2u8 {
                    for hb in 0..2u8 {
                        stack.push((
                            i + 1,
                            shift_in(xp, xa, len),
                            shift_in(hp, hb, len),
                            (bits << 1) | hb as usize,
                            a * geometric[xa as usize][hb as usize],
                            b * table[xa as usize][hb as usize],
                        ));
                    }
                }
            }
            let tv_marginal: f64 = hat_law
                .iter()
                .enumerate()
                .map(|(bits, &mass)| {
                    let mut hp = hp0;
                    let mut p = 1.0;
                    for i in (0..window).rev() {
                        let s = ((bits >> i) & 1) as u8;
                        p *= kernel.prob(s, hp);
                        hp = shift_in(hp, s, len);
                    }
                    (mass - p).abs()
                })
                .sum();
            (tv_joint / 2.0, tv_marginal / 2.0)
        })
        .collect();

    let max_tv_joint = worst.iter().map(|w| w.0).fold(0.0, f64::max);
    let max_tv_marginal = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let tolerance = 1e-10;
    Ok(JointLawReport {
        window,
        anchor: anchor.to_string(),
        pasts_checked: pasts as usize,
        max_tv_joint,
        max_tv_marginal,
        tolerance,
        pass: max_tv_joint < tolerance && max_tv_marginal < tolerance,
    })
}

/// `sum_u pi(u) rho~_depth(u, a)` for every anchor `a`, in index order.
pub fn anchor_values(ladder: &MetricLadder, law: &WordLaw, depth: usize) -> Result<Vec<f64>> {
    if law.len() != ladder.len() {
        return Err(Error::TableMismatch(format!(
            "word law of length {} against tables of length {}",
            law.len(),
            ladder.len()
        )));
    }
    if depth > ladder.depth() {
        return Err(Error::TableMismatch(format!("depth {depth} requested, ladder built to {}", ladder.depth())));
    }
    let t = ladder.table(depth);
    let probs = law.probs();
    Ok((0..probs.len() as u64)
        .into_par_iter()
        .map(|a| probs.iter().enumerate().map(|(u, p)| p * t.get(u as u64, a)).sum())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnchorChoice {
    pub anchor: Word,
    pub value: f64,
    pub evaluated: usize,
}

/// Argmin of the anchor integral at depth `|N| + 1` over all words when
/// `candidates >= 2^L`, else over `candidates` draws from the stationary
/// law. Ties go to the first candidate.
pub fn choose_anchor(
    ladder: &MetricLadder,
    law: &WordLaw,
    n: i64,
    delta: f64,
    candidates: usize,
    seed: u64,
) -> Result<AnchorChoice> {
    if n > 0 {
        return Err(Error::Parameter(format!("block start {n} must be <= 0")));
    }
    if candidates == 0 {
        return Err(Error::Parameter("at least one anchor candidate is needed".into()));
    }
    let values = anchor_values(ladder, law, (1 - n) as usize)?;
    let pool: Vec<u64> = if candidates >= values.len() {
        (0..values.len() as u64).collect()
    } else {
        let mut r = rng::stream(seed, "anchor-candidates", (-n) as u64);
        (0..candidates).map(|_| law.sample_index(r.gen())).collect()
    };
    let mut best = pool[0];
    for &c in &pool[1..] {
        if values[c as usize] < values[best as usize] {
            best = c;
        }
    }
    let value = values[best as usize];
    if !(value < delta) {
        return Err(Error::NoAnchor {
            candidates: pool.len(),
            delta,
            best: value,
        });
    }
    Ok(AnchorChoice {
        anchor: Word::from_index(best, ladder.len()),
        value,
        evaluated: pool.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorErrorReport {
    pub n: i64,
    pub anchor: String,
    pub trials: usize,
    /// Mean of `|R_D(X) - R_D(x_hat)|` over coupled runs.
    pub mc: f64,
    pub stderr: f64,
    /// `sum_u pi(u) rho~_{|N|+1}(u, anchor)`.
    pub exact: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Expected generator error of the anchored construction against its exact
/// value from the metric tables.
pub fn generator_error_check(
    kernel: &Kernel,
    n: i64,
    anchor: &Word,
    config: GeneratorConfig,
    trials: usize,
    seed: u64,
) -> Result<GeneratorErrorReport> {
    if !kernel.is_exact_mode() {
        return Err(Error::Unsupported("the exact side needs an iid or markov kernel".into()));
    }
    if n > 0 {
        return Err(Error::Parameter(format!("block start {n} must be <= 0")));
    }
    if trials < GENERATOR_CHECK_MIN_TRIALS {
        return Err(Error::Parameter(format!(
            "generator-error check needs at least {GENERATOR_CHECK_MIN_TRIALS} trials, got {trials}"
        )));
    }
    let depth = (1 - n) as usize;
    let ladder = MetricLadder::build(kernel, config, depth)?;
    let len = ladder.len();
    if anchor.len() != len {
        return Err(Error::TableMismatch(format!("anchor has length {}, expected {len}", anchor.len())));
    }
    let law = stationary_word_law(kernel, len)?;
    let exact = anchor_values(&ladder, &law, depth)?[anchor.index() as usize];

    let sampler = PathSampler::new(kernel.clone(), InitMode::Stationary, len)?;
    let label = format!("generator-error/N={n}");
    let hp = anchor.index();
    let errors: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, &label, t as u64);
            let s = sampler.sample(n, &mut r);
            let xp = s.prefix.suffix_index(len);
            let run = run_block_packed(&ladder, &s.w, s.x.bits(), xp, hp);
            let end = |past: u64, bits: &[u8]| bits.iter().fold(past, |acc, &b| shift_in(acc, b, len));
            let r_x = config.value_index(end(xp, s.x.bits()));
            let r_hat = config.value_index(end(hp, &run.x_hat));
            (r_x - r_hat).abs()
        })
        .collect();
    let (mc, stderr) = mean_stderr(&errors);
    let tolerance = 3.0 * stderr + 3f64.powi(-(config.depth as i32));
    Ok(GeneratorErrorReport {
        n,
        anchor: anchor.to_string(),
        trials,
        mc,
        stderr,
        exact,
        tolerance,
        pass: (mc - exact).abs() <= tolerance,
    })
}
