use rayon::prelude::*;
use serde::Serialize;

use super::generator::GeneratorConfig;
use super::metric::{MetricLadder, MetricTable};
use crate::error::{Error, Result};
use crate::kernel::{stationary_word_law, Kernel, Variant, WordLaw};
use crate::reconstruction::{InitMode, PathSampler};
use crate::rng;
use crate::stats::mean_stderr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    Exact,
    MonteCarlo,
}

impl AlphaMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlphaMode::Exact => "exact",
            AlphaMode::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaRow {
    pub p: usize,
    pub alpha: f64,
    pub mode: AlphaMode,
    pub stderr: Option<f64>,
    pub bound: Option<f64>,
    /// `alpha_p <= alpha_{p-1}`; informational only.
    pub monotone: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaTable {
    pub depth: usize,
    pub word_len: usize,
    pub truncation_bound: f64,
    pub rows: Vec<AlphaRow>,
}

impl AlphaTable {
    pub fn alpha(&self, p: usize) -> Option<f64> {
        self.rows.get(p).map(|r| r.alpha)
    }

    pub fn monotone(&self) -> bool {
        self.rows.iter().all(|r| r.monotone)
    }
}

/// `sup_{u,v} rho~_p(u, v) = sum_{j=p}^{D} 3^-j` for i.i.d. kernels.
pub fn iid_alpha_bound(p: usize, depth: usize) -> f64 {
    (p..=depth).rev().map(|j| 3f64.powi(-(j as i32))).sum()
}

/// `sum_{u,v} pi(u) pi(v) t(u, v)`: rows in parallel, each summed in index
/// order, rows added in index order.
pub fn weighted_mean(table: &MetricTable, law: &WordLaw) -> f64 {
    let probs = law.probs();
    let rows: Vec<f64> = (0..probs.len())
        .into_par_iter()
        .map(|u| {
            probs
                .iter()
                .enumerate()
                .map(|(v, pv)| pv * table.get(u as u64, v as u64))
                .sum::<f64>()
                * probs[u]
        })
        .collect();
    rows.iter().sum()
}

fn bound_for(kernel: &Kernel, p: usize, depth: usize) -> Option<f64> {
    matches!(kernel.variant(), Variant::Iid { .. }).then(|| iid_alpha_bound(p, depth))
}

fn finish(mut rows: Vec<AlphaRow>) -> Vec<AlphaRow> {
    for p in 1..rows.len() {
        let prev = rows[p - 1].alpha;
        rows[p].monotone = rows[p].alpha <= prev * (1.0 + 1e-12) + 1e-15;
    }
    rows
}

/// Exact `alpha_0, ..., alpha_{p_max}` for i.i.d. and Markov kernels.
pub fn alpha_sequence(kernel: &Kernel, config: GeneratorConfig, p_max: usize) -> Result<AlphaTable> {
    if !kernel.is_exact_mode() {
        return Err(Error::Unsupported(
            "exact alpha needs an iid or markov kernel; use the Monte Carlo mode".into(),
        ));
    }
    let ladder = MetricLadder::build(kernel, config, p_max)?;
    let law = stationary_word_law(kernel, ladder.len())?;
    let rows = (0..=p_max)
        .map(|p| AlphaRow {
            p,
            alpha: weighted_mean(ladder.table(p), &law),
            mode: AlphaMode::Exact,
            stderr: None,
            bound: bound_for(kernel, p, config.depth),
            monotone: true,
        })
        .collect();
    Ok(AlphaTable {
        depth: config.depth,
        word_len: ladder.len(),
        truncation_bound: config.bound(),
        rows: finish(rows),
    })
}

/// `alpha_p` estimated over `pairs` independent pairs of simulated pasts,
/// the same pairs for every `p`.
pub fn alpha_sequence_mc(
    kernel: &Kernel,
    config: GeneratorConfig,
    p_max: usize,
    pairs: usize,
    seed: u64,
    burn_in: usize,
) -> Result<AlphaTable> {
    if pairs < 2 {
        return Err(Error::Parameter(format!("Monte Carlo alpha needs at least 2 pairs, got {pairs}")));
    }
    let ladder = MetricLadder::build(kernel, config, p_max)?;
    let len = ladder.len();
    let init = if kernel.is_exact_mode() {
        InitMode::Stationary
    } else {
        InitMode::ZeroPadded { burn_in }
    };
    let sampler = PathSampler::new(kernel.clone(), init, 0)?;
    let draw = |label: &str, i: usize| {
        let mut r = rng::stream(seed, label, i as u64);
        sampler.sample(-(len as i64 - 1), &mut r).x.index()
    };
    let samples: Vec<(u64, u64)> = (0..pairs)
        .into_par_iter()
        .map(|i| (draw("alpha-mc/x", i), draw("alpha-mc/y", i)))
        .collect();
    let rows = (0..=p_max)
        .map(|p| {
            let t = ladder.table(p);
            let values: Vec<f64> = samples.iter().map(|&(u, v)| t.get(u, v)).collect();
            let (alpha, stderr) = mean_stderr(&values);
            AlphaRow {
                p,
                alpha,
                mode: AlphaMode::MonteCarlo,
                stderr: Some(stderr),
                bound: bound_for(kernel, p, config.depth),
                monotone: true,
            }
        })
        .collect();
    Ok(AlphaTable {
        depth: config.depth,
        word_len: len,
        truncation_bound: config.bound(),
        rows: finish(rows),
    })
}
