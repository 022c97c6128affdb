//! Trajectory simulation and reconstruction from innovations.
//!
//! A path on the window `[N0; 0]` is generated forward: at each index the
//! kernel gives `f = P(0 | past)`, one uniform decides the symbol
//! (`x = 0` with probability `f`), a second uniform is `v`, and the
//! innovation `w` is derived from `(f, x, v)`. The reconstruction `x_hat`
//! reruns the recursion `x_hat_n = 1(w_n > P(0 | x_hat past))` from an
//! all-zero prehistory before `N`, using only the innovations.
//!
//! Its failure is bounded by the house-of-cards chain `Z` on `{0, 1, ...}`
//! that climbs from `i` to `i + 1` with probability `1 - gamma_i` and resets
//! to 0 otherwise:
//!
//! ```text
//! P(x_hat[-K; 0] != x[-K; 0]) <= P(Z_{-N} <= K)
//! ```

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::innovation::encode_unchecked;
use crate::kernel::{gamma_profile, stationary_word_law, GammaProfile, Kernel, TailDescriptor, WordLaw};
use crate::rng::{self, StreamRng};
use crate::stats::binomial_stderr;
use crate::word::{shift_in, Word};

/// Longest window a single path may cover.
pub const WINDOW_CAP: usize = 10_000_000;

/// Default burn-in for kernels without an exact stationary law.
pub const DEFAULT_BURN_IN: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum InitMode {
    /// Start from the all-zero context and discard `burn_in` steps.
    ZeroPadded { burn_in: usize },
    /// Draw the initial context from the exact stationary word law.
    Stationary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    /// Window start `N0 <= 0`; entry `i` of the vectors is index `N0 + i`.
    pub n0: i64,
    /// Context immediately before `N0`, most recent symbol last.
    pub prefix: Word,
    pub x: Word,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub seed: Option<u64>,
    pub kernel_id: String,
    pub init: InitMode,
}

impl PathSample {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Prefix followed by the window.
    pub fn full_word(&self) -> Word {
        self.prefix.concat(&self.x)
    }
}

/// Draws paths of a fixed kernel; holds the stationary law when needed.
#[derive(Clone, Debug)]
pub struct PathSampler {
    kernel: Kernel,
    init: InitMode,
    history: usize,
    law: Option<WordLaw>,
    kernel_id: String,
}

impl PathSampler {
    /// `prefix_len` asks for at least that many symbols of context before the
    /// window (the kernel memory is always included).
    pub fn new(kernel: Kernel, init: InitMode, prefix_len: usize) -> Result<Self> {
        let history = kernel.memory().max(prefix_len);
        let law = match init {
            InitMode::Stationary => {
                if !kernel.is_exact_mode() {
                    return Err(Error::Unsupported(format!(
                        "stationary initialisation is unavailable for {kernel}; use zero-padded mode with a burn-in (default {DEFAULT_BURN_IN})"
                    )));
                }
                Some(stationary_word_law(&kernel, history)?)
            }
            InitMode::ZeroPadded { .. } => None,
        };
        let kernel_id = kernel.to_string();
        Ok(PathSampler {
            kernel,
            init,
            history,
            law,
            kernel_id,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn history(&self) -> usize {
        self.history
    }

    fn draw_prefix(&self, rng: &mut StreamRng) -> Word {
        match (&self.law, self.init) {
            (Some(law), _) => Word::from_index(law.sample_index(rng.gen()), self.history),
            (None, InitMode::ZeroPadded { burn_in }) => {
                let mut past = Word::zeros(self.history);
                let mut ctx = 0u64;
                let m = self.kernel.memory();
                for _ in 0..burn_in {
                    let (x, _, _) = step(&self.kernel, ctx, rng);
                    ctx = shift_in(ctx, x, m);
                    past.push(x);
                }
                past.suffix(self.history)
            }
            (None, InitMode::Stationary) => unreachable!("law is computed for stationary mode"),
        }
    }

    /// Path on `[n0; 0]`.
    pub fn sample(&self, n0: i64, rng: &mut StreamRng) -> PathSample {
        assert!(n0 <= 0, "window start must be <= 0");
        let len = (1 - n0) as usize;
        let prefix = self.draw_prefix(rng);
        let m = self.kernel.memory();
        let mut ctx = prefix.suffix_index(m);
        let mut x = Word::empty();
        let mut v = Vec::with_capacity(len);
        let mut w = Vec::with_capacity(len);
        for _ in 0..len {
            let (xi, vi, wi) = step(&self.kernel, ctx, rng);
            ctx = shift_in(ctx, xi, m);
            x.push(xi);
            v.push(vi);
            w.push(wi);
        }
        PathSample {
            n0,
            prefix,
            x,
            v,
            w,
            seed: None,
            kernel_id: self.kernel_id.clone(),
            init: self.init,
        }
    }
}

#[inline]
fn step(kernel: &Kernel, ctx: u64, rng: &mut StreamRng) -> (u8, f64, f64) {
    let f = kernel.prob0(ctx);
    let choose: f64 = rng.gen();
    let x = u8::from(choose >= f);
    let v: f64 = rng.gen();
    (x, v, encode_unchecked(f, x, v))
}

/// Simulates the window `[n0; 0]` deterministically from `seed`.
pub fn simulate_path(kernel: &Kernel, n0: i64, seed: u64, init: InitMode) -> Result<PathSample> {
    if n0 > 0 {
        return Err(Error::Parameter(format!("window start {n0} must be <= 0")));
    }
    if (1 - n0) as usize > WINDOW_CAP {
        return Err(Error::CapExceeded {
            what: "window length",
            value: (1 - n0) as usize,
            cap: WINDOW_CAP,
        });
    }
    let sampler = PathSampler::new(kernel.clone(), init, 0)?;
    let mut rng = rng::stream(seed, "path", 0);
    let mut sample = sampler.sample(n0, &mut rng);
    sample.seed = Some(seed);
    Ok(sample)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionResult {
    pub n: i64,
    pub k: usize,
    /// `x_hat` on `[N; 0]`.
    pub x_hat: Word,
    /// `L_t` for `t` in `[N; 0]`: length of the agreement run of `x_hat`
    /// (zero before `N`) and `x` ending at `t`, counted inside `[N0; t]`.
    pub agreement: Vec<usize>,
    /// Whether `x_hat` and `x` differ somewhere on `[-K; 0]`.
    pub disagree: bool,
    /// `sum_{t=N}^{0} 3^t x_hat_t`; exact because `x_hat` vanishes before `N`.
    pub s_n: f64,
}

impl ReconstructionResult {
    pub fn l0(&self) -> usize {
        *self.agreement.last().expect("window is non-empty")
    }
}

/// Reruns the recursion on `[n; 0]` from the sample's innovations.
pub fn window_reconstruct(
    kernel: &Kernel,
    sample: &PathSample,
    n: i64,
    k: usize,
) -> Result<ReconstructionResult> {
    if n < sample.n0 || n > 0 {
        return Err(Error::Parameter(format!(
            "reconstruction start {n} outside the sampled window [{}; 0]",
            sample.n0
        )));
    }
    let m = kernel.memory();
    let offset = (n - sample.n0) as usize;
    let mut ctx = 0u64;
    let mut x_hat = Word::empty();
    for &w in &sample.w[offset..] {
        let xh = u8::from(w > kernel.prob0(ctx));
        ctx = shift_in(ctx, xh, m);
        x_hat.push(xh);
    }

    let truth = sample.x.bits();
    let mut run = 0usize;
    let mut agreement = Vec::with_capacity(x_hat.len());
    for (i, &xi) in truth.iter().enumerate() {
        let xh = if i < offset { 0 } else { x_hat.bits()[i - offset] };
        run = if xh == xi { run + 1 } else { 0 };
        if i >= offset {
            agreement.push(run);
        }
    }

    let len = truth.len();
    let checked = (k + 1).min(len);
    let disagree = (len - checked..len).any(|i| {
        let xh = if i < offset { 0 } else { x_hat.bits()[i - offset] };
        xh != truth[i]
    });

    let s_n = x_hat
        .bits()
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let t = n + i as i64;
            f64::from(b) * 3f64.powi(t as i32)
        })
        .sum();

    Ok(ReconstructionResult {
        n,
        k,
        x_hat,
        agreement,
        disagree,
        s_n,
    })
}

/// Law of `Z_q` for the house-of-cards chain started at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct ResetChainDist {
    pub q: usize,
    pub probs: Vec<f64>,
}

impl ResetChainDist {
    pub fn prob_le(&self, k: usize) -> f64 {
        self.probs.iter().take(k + 1).sum()
    }

    pub fn prob_gt(&self, m: usize) -> f64 {
        self.probs.iter().skip(m + 1).sum()
    }
}

/// Exact law of `Z_q` by forward dynamic programming.
pub fn house_of_cards_dist(
    profile: &GammaProfile,
    tail: &TailDescriptor,
    q: usize,
) -> Result<ResetChainDist> {
    let gammas: Vec<f64> = (0..q)
        .map(|i| {
            profile.gamma_at(i, tail).ok_or(Error::ProfileCoverage {
                covered: profile.p_max(),
                needed: i,
            })
        })
        .collect::<Result<_>>()?;
    let mut cur = vec![1.0];
    for s in 0..q {
        let mut next = vec![0.0; s + 2];
        let mut reset = 0.0;
        for (i, &mass) in cur.iter().enumerate() {
            next[i + 1] = mass * (1.0 - gammas[i]);
            reset += mass * gammas[i];
        }
        next[0] = reset;
        cur = next;
    }
    Ok(ResetChainDist { q, probs: cur })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisagreementRow {
    pub n: i64,
    pub k: usize,
    pub trials: usize,
    pub freq: f64,
    pub stderr: f64,
    pub dp_bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisagreementTable {
    pub rows: Vec<DisagreementRow>,
    /// For burn-in initialisation: `P(Z_B <= window)`, a bound on the
    /// distance between the simulated and the stationary window law.
    pub init_bias_bound: Option<f64>,
}

impl DisagreementTable {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

fn init_for(kernel: &Kernel, burn_in: usize) -> InitMode {
    if kernel.is_exact_mode() {
        InitMode::Stationary
    } else {
        InitMode::ZeroPadded { burn_in }
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 1000 {
        return Err(Error::Parameter(format!(
            "Monte Carlo experiments need at least 1000 trials, got {trials}"
        )));
    }
    Ok(())
}

fn check_window(n: i64, k: usize) -> Result<()> {
    if n > 0 || ((-n) as usize) < k {
        return Err(Error::Parameter(format!(
            "window start {n} must satisfy N <= -K = -{k}"
        )));
    }
    if (1 - n) as usize > WINDOW_CAP {
        return Err(Error::CapExceeded {
            what: "window length",
            value: (1 - n) as usize,
            cap: WINDOW_CAP,
        });
    }
    Ok(())
}

/// Monte Carlo frequency of `x_hat[-K; 0] != x[-K; 0]` for each `N`, against
/// the exact bound `P(Z_{-N} <= K)`.
pub fn disagreement_experiment(
    kernel: &Kernel,
    k: usize,
    ns: &[i64],
    trials: usize,
    seed: u64,
    burn_in: usize,
) -> Result<DisagreementTable> {
    check_trials(trials)?;
    for &n in ns {
        check_window(n, k)?;
    }
    let deepest = ns.iter().map(|n| (-n) as usize).max().unwrap_or(0);
    let profile = gamma_profile(kernel, deepest.max(burn_in))?;
    let tail = TailDescriptor::EventuallyZero;
    let init = init_for(kernel, burn_in);
    let sampler = PathSampler::new(kernel.clone(), init, 0)?;

    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let label = format!("disagreement/N={n}");
        let hits: usize = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng::stream(seed, &label, t as u64);
                let sample = sampler.sample(n, &mut rng);
                let rec = window_reconstruct(kernel, &sample, n, k).expect("window checked");
                usize::from(rec.disagree)
            })
            .sum();
        let freq = hits as f64 / trials as f64;
        let stderr = binomial_stderr(freq, trials);
        let dp_bound = house_of_cards_dist(&profile, &tail, (-n) as usize)?.prob_le(k);
        rows.push(DisagreementRow {
            n,
            k,
            trials,
            freq,
            stderr,
            dp_bound,
            pass: freq <= dp_bound + 3.0 * stderr,
        });
    }
    let init_bias_bound = match init {
        InitMode::ZeroPadded { burn_in } => {
            let window = deepest + 1 + kernel.memory();
            Some(house_of_cards_dist(&profile, &tail, burn_in)?.prob_le(window))
        }
        InitMode::Stationary => None,
    };
    Ok(DisagreementTable {
        rows,
        init_bias_bound,
    })
}

/// `P(L_0 > M)` against `P(Z_{-N} > M)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailRow {
    pub m: usize,
    pub mc: f64,
    pub stderr: f64,
    pub exact: f64,
    pub pass: bool,
}

/// Frequency of `L_t = l + 1` given `L_{t-1} = l`, against `1 - gamma_l`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRow {
    pub l: usize,
    pub count: usize,
    pub freq: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominationReport {
    pub n: i64,
    pub trials: usize,
    pub tail: Vec<TailRow>,
    pub steps: Vec<StepRow>,
    /// Trials where `{L_0 <= K}` and the direct comparison on `[-K; 0]`
    /// disagreed, for every `K` in the window; always 0.
    pub event_mismatches: usize,
}

impl DominationReport {
    pub fn pass(&self) -> bool {
        self.event_mismatches == 0
            && self.tail.iter().all(|r| r.pass)
            && self.steps.iter().all(|r| r.pass)
    }
}

/// Stochastic domination of the agreement length by the house-of-cards
/// chain, and the per-step success probabilities behind it.
pub fn domination_experiment(
    kernel: &Kernel,
    n: i64,
    m_max: usize,
    trials: usize,
    seed: u64,
    burn_in: usize,
) -> Result<DominationReport> {
    check_trials(trials)?;
    check_window(n, 0)?;
    let q = (-n) as usize;
    let profile = gamma_profile(kernel, q + 1)?;
    let tail = TailDescriptor::EventuallyZero;
    let sampler = PathSampler::new(kernel.clone(), init_for(kernel, burn_in), 0)?;
    let len = q + 1;
    let label = format!("domination/N={n}");

    struct Trial {
        l0: usize,
        transitions: Vec<(usize, bool)>,
        mismatches: usize,
    }
    let outcomes: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(seed, &label, t as u64);
            let sample = sampler.sample(n, &mut rng);
            let rec = window_reconstruct(kernel, &sample, n, 0).expect("window checked");
            let transitions = rec
                .agreement
                .windows(2)
                .map(|p| (p[0], p[1] == p[0] + 1))
                .collect();
            let l0 = rec.l0();
            let mismatches = (0..len)
                .filter(|&kk| {
                    let direct = (len - 1 - kk..len).any(|i| rec.x_hat.bits()[i] != sample.x.bits()[i]);
                    direct != (l0 <= kk)
                })
                .count();
            Trial {
                l0,
                transitions,
                mismatches,
            }
        })
        .collect();

    let z = house_of_cards_dist(&profile, &tail, q)?;
    let tail_rows = (0..=m_max)
        .map(|m| {
            let count = outcomes.iter().filter(|o| o.l0 > m).count();
            let mc = count as f64 / trials as f64;
            let exact = z.prob_gt(m);
            let stderr = binomial_stderr(mc, trials).max(binomial_stderr(exact, trials));
            TailRow {
                m,
                mc,
                stderr,
                exact,
                pass: mc >= exact - 3.0 * stderr,
            }
        })
        .collect();

    let mut counts = vec![(0usize, 0usize); len + 1];
    for o in &outcomes {
        for &(l, success) in &o.transitions {
            counts[l].0 += 1;
            counts[l].1 += usize::from(success);
        }
    }
    let steps = counts
        .iter()
        .enumerate()
        .filter(|(_, c)| c.0 > 0)
        .map(|(l, &(count, succ))| {
            let freq = succ as f64 / count as f64;
            let bound = 1.0 - profile.gamma_at(l, &tail).unwrap_or(0.0);
            let stderr = binomial_stderr(freq, count).max(binomial_stderr(bound, count));
            StepRow {
                l,
                count,
                freq,
                stderr,
                bound,
                pass: freq >= bound - 3.0 * stderr,
            }
        })
        .collect();

    Ok(DominationReport {
        n,
        trials,
        tail: tail_rows,
        steps,
        event_mismatches: outcomes.iter().map(|o| o.mismatches).sum(),
    })
}
