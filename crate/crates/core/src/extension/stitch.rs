//! Finitely many stitched blocks.
//!
//! Block `j` covers `[M_{j+1}; M_j - 1]` with `M_0 = 1`, `M_1 = N_0` and
//! `M_{j+1} = M_j + N_j - 1`. For a Markov kernel of order `k <= D + 1` the
//! truncated generator `R_D` is an exact function of `U[M_j; 0]` and the
//! `L = D + 1` symbols before `M_j`, so `K_j = M_j - L`. The estimate
//! `S_j` feeds the anchored symbols of block `j` in place of the true past
//! and therefore equals `R_D` unless they differ on `[K_j; M_j - 1]`. Any
//! such difference moves `R_D` of that past by at least `3^-D / 2`, so the
//! block threshold `alpha < 3^{1-L} delta_j / 2` bounds
//! `P(S_j != R_D)` by `delta_j`.

use rayon::prelude::*;
use serde::Serialize;

use super::checks::choose_anchor;
use super::{reconstruct_packed, run_block_packed};
use crate::error::{Error, Result};
use crate::kernel::{stationary_word_law, Kernel, WordLaw};
use crate::reconstruction::{InitMode, PathSampler};
use crate::rng;
use crate::stats::{binomial_stderr, dkw_radius, ks_uniform, uniform_audit, AuditReport, AuditThresholds};
use crate::vershik::alpha::weighted_mean;
use crate::vershik::{GeneratorConfig, MetricLadder, Orientation, DEFAULT_PAIR_LEN_CAP};
use crate::word::{shift_in, Word};

/// Default deepest metric table searched for a block.
pub const DEFAULT_MAX_DEPTH: usize = 60;

/// Family-wise level of the per-orientation uniformity bands.
pub const STRATUM_LEVEL: f64 = 0.001;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockPlan {
    pub j: usize,
    /// Block start `N_j` in the shifted frame.
    pub n: i64,
    /// `M_j`.
    pub m: i64,
    /// `K_j = M_j - L`.
    pub k: i64,
    pub delta: f64,
    /// `delta_0` for the first block, `3^{1-L} delta_j / 2` afterwards.
    pub threshold: f64,
    /// `alpha_{|N_j|+1}`.
    pub alpha_used: f64,
    pub anchor: Word,
    pub anchor_value: f64,
}

impl BlockPlan {
    /// First original index covered, `M_{j+1}`.
    pub fn start(&self) -> i64 {
        self.m + self.n - 1
    }

    pub fn steps(&self) -> usize {
        (1 - self.n) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtensionSchedule {
    pub deltas: Vec<f64>,
    pub word_len: usize,
    pub blocks: Vec<BlockPlan>,
}

impl ExtensionSchedule {
    /// `M_{J+1}`, the first index of the stitched window.
    pub fn window_start(&self) -> i64 {
        self.blocks.last().map_or(1, |b| b.start())
    }
}

fn check_inputs(kernel: &Kernel, config: &GeneratorConfig, deltas: &[f64]) -> Result<()> {
    if !kernel.is_exact_mode() {
        return Err(Error::Unsupported("stitching needs an iid or markov kernel".into()));
    }
    if kernel.memory() > config.span() {
        return Err(Error::Unsupported(format!(
            "stitching needs kernel memory <= D + 1 = {}, got {}",
            config.span(),
            kernel.memory()
        )));
    }
    if deltas.is_empty() {
        return Err(Error::Parameter("the tolerance schedule is empty".into()));
    }
    for (j, pair) in deltas.windows(2).enumerate() {
        if !(pair[1] < pair[0]) {
            return Err(Error::Parameter(format!(
                "tolerances must strictly decrease: delta_{} = {} >= delta_{j} = {}",
                j + 1,
                pair[1],
                pair[0]
            )));
        }
    }
    let floor = 3f64.powi(-(config.depth as i32));
    if let Some((j, d)) = deltas.iter().enumerate().find(|(_, &d)| !(d >= floor)) {
        return Err(Error::Parameter(format!(
            "D = {} is too small for delta_{j} = {d}: truncation needs 3^-D <= delta",
            config.depth
        )));
    }
    Ok(())
}

/// Block lengths, anchors and index bookkeeping, computed before any trial.
pub fn plan_schedule(
    kernel: &Kernel,
    config: GeneratorConfig,
    deltas: &[f64],
    candidates: usize,
    max_depth: usize,
    seed: u64,
) -> Result<(ExtensionSchedule, MetricLadder, WordLaw)> {
    check_inputs(kernel, &config, deltas)?;
    let mut ladder = MetricLadder::new(kernel, config, DEFAULT_PAIR_LEN_CAP)?;
    let len = ladder.len();
    let law = stationary_word_law(kernel, len)?;
    let mut blocks = Vec::with_capacity(deltas.len());
    let mut m = 1i64;
    for (j, &delta) in deltas.iter().enumerate() {
        let threshold = if j == 0 {
            delta
        } else {
            3f64.powi(1 - len as i32) * delta / 2.0
        };
        let mut found = None;
        for p in 1..=max_depth {
            ladder.extend_to(p)?;
            let alpha = weighted_mean(ladder.table(p), &law);
            if !(alpha < threshold) {
                continue;
            }
            let n = 1 - p as i64;
            match choose_anchor(&ladder, &law, n, threshold, candidates, seed) {
                Ok(choice) => {
                    found = Some((n, alpha, choice));
                    break;
                }
                Err(Error::NoAnchor { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        let (n, alpha_used, choice) = found.ok_or(Error::ThresholdUnreachable {
            block: j,
            threshold,
            max_depth,
        })?;
        blocks.push(BlockPlan {
            j,
            n,
            m,
            k: m - len as i64,
            delta,
            threshold,
            alpha_used,
            anchor: choice.anchor,
            anchor_value: choice.value,
        });
        m += n - 1;
    }
    Ok((
        ExtensionSchedule {
            deltas: deltas.to_vec(),
            word_len: len,
            blocks,
        },
        ladder,
        law,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StitchRow {
    pub j: usize,
    pub n: i64,
    pub m: i64,
    pub k: i64,
    pub delta: f64,
    pub alpha_used: f64,
    pub anchor: String,
    pub exceed_freq: f64,
    pub stderr: f64,
    pub pass: bool,
}

/// Uniformity of the stitched innovations produced under one orientation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StratumRow {
    pub orientation: i8,
    pub count: usize,
    pub ks: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StitchReport {
    pub schedule: ExtensionSchedule,
    pub trials: usize,
    pub rows: Vec<StitchRow>,
    pub audit: AuditReport,
    pub strata: Vec<StratumRow>,
}

impl StitchReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass) && self.audit.pass() && self.strata.iter().all(|s| s.pass)
    }
}

fn push_bits(past: u64, bits: &[u8], len: usize) -> u64 {
    bits.iter().fold(past, |acc, &b| shift_in(acc, b, len))
}

struct TrialOutcome {
    exceed: Vec<bool>,
    u: Vec<f64>,
    orientation: Vec<Orientation>,
}

fn run_trial(
    schedule: &ExtensionSchedule,
    ladder: &MetricLadder,
    sampler: &PathSampler,
    config: &GeneratorConfig,
    seed: u64,
    t: usize,
) -> TrialOutcome {
    let len = schedule.word_len;
    let start = schedule.window_start();
    let mut r = rng::stream(seed, "stitch", t as u64);
    let s = sampler.sample(start, &mut r);
    let mut full = s.prefix.suffix(len).bits().to_vec();
    full.extend_from_slice(s.x.bits());
    let pos = |index: i64| len + (index - start) as usize;
    let r_true = config.value_index(push_bits(0, &full[full.len() - len..], len));

    let blocks = &schedule.blocks;
    let mut runs = Vec::with_capacity(blocks.len());
    let mut pasts = Vec::with_capacity(blocks.len());
    for b in blocks {
        let (lo, hi) = (pos(b.start()), pos(b.m - 1) + 1);
        let past = push_bits(0, &full[lo - len..lo], len);
        let w = &s.w[lo - len..hi - len];
        runs.push(run_block_packed(ladder, w, &full[lo..hi], past, b.anchor.index()));
        pasts.push(past);
    }

    let mut exceed = Vec::with_capacity(blocks.len());
    for (j, b) in blocks.iter().enumerate() {
        let mut past = if j == 0 {
            pasts[0]
        } else {
            push_bits(b.anchor.index(), &runs[j].x_hat, len)
        };
        let first = if j == 0 { 0 } else { j - 1 };
        for i in (0..=first).rev() {
            let (x, _) = reconstruct_packed(ladder, &runs[i].u, past, blocks[i].anchor.index());
            past = push_bits(past, &x, len);
        }
        exceed.push((config.value_index(past) - r_true).abs() > b.delta);
    }

    let mut u = Vec::new();
    let mut orientation = Vec::new();
    for run in runs.iter().rev() {
        u.extend_from_slice(&run.u);
        orientation.extend_from_slice(&run.orientation);
    }
    TrialOutcome { exceed, u, orientation }
}

/// Plans the schedule, runs `trials` independent stitched windows and
/// reports `P(|S_j - R_D| > delta_j)` per block with uniformity audits of
/// the pooled innovations.
#[allow(clippy::too_many_arguments)]
pub fn stitch_blocks(
    kernel: &Kernel,
    config: GeneratorConfig,
    deltas: &[f64],
    trials: usize,
    seed: u64,
    candidates: usize,
    max_depth: usize,
    thresholds: &AuditThresholds,
) -> Result<StitchReport> {
    if trials < 1000 {
        return Err(Error::Parameter(format!("stitching needs at least 1000 trials, got {trials}")));
    }
    let (schedule, ladder, _) = plan_schedule(kernel, config, deltas, candidates, max_depth, seed)?;
    let sampler = PathSampler::new(kernel.clone(), InitMode::Stationary, schedule.word_len)?;
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(&schedule, &ladder, &sampler, &config, seed, t))
        .collect();

    let rows = schedule
        .blocks
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let hits = outcomes.iter().filter(|o| o.exceed[j]).count();
            let freq = hits as f64 / trials as f64;
            let stderr = binomial_stderr(freq, trials);
            StitchRow {
                j,
                n: b.n,
                m: b.m,
                k: b.k,
                delta: b.delta,
                alpha_used: b.alpha_used,
                anchor: b.anchor.to_string(),
                exceed_freq: freq,
                stderr,
                pass: freq <= b.delta + 3.0 * stderr,
            }
        })
        .collect();

    let pooled: Vec<f64> = outcomes.iter().flat_map(|o| o.u.iter().copied()).collect();
    let audit = uniform_audit(&pooled, thresholds);
    let strata = [Orientation::Monotone, Orientation::Antitone]
        .iter()
        .map(|&o| {
            let values: Vec<f64> = outcomes
                .iter()
                .flat_map(|t| t.u.iter().zip(&t.orientation).filter(|(_, &oi)| oi == o).map(|(&u, _)| u))
                .collect();
            let count = values.len();
            let (ks, threshold) = if count == 0 {
                (0.0, 1.0)
            } else {
                (ks_uniform(&values), dkw_radius(count, STRATUM_LEVEL))
            };
            StratumRow {
                orientation: o.sign(),
                count,
                ks,
                threshold,
                pass: ks < threshold,
            }
        })
        .collect();

    Ok(StitchReport {
        schedule,
        trials,
        rows,
        audit,
        strata,
    })
}
