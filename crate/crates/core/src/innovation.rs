//! Innovation encoding.
//!
//! Given `f = P(X_n = 0 | past)`, the symbol `x` and an independent uniform
//! `v`, the innovation is
//!
//! ```text
//! w = f * v            if x = 0
//! w = 1 - (1 - f) * v  if x = 1
//! ```
//!
//! and it is uniform on `[0, 1]` and independent of the past. The inverse
//! reads `x = 1(w > f)`, so `w = f` decodes to `x = 0, v = 1`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::reconstruction::{InitMode, PathSampler};
use crate::rng;
use crate::stats::{uniform_audit, AuditReport, AuditThresholds};

/// One index of an encoded path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InnovationTriple {
    pub f: f64,
    pub x: u8,
    pub v: f64,
    pub w: f64,
}

impl InnovationTriple {
    pub fn new(f: f64, x: u8, v: f64) -> Result<Self> {
        let w = encode_w(f, x, v)?;
        Ok(InnovationTriple { f, x, v, w })
    }
}

fn check_f(f: f64) -> Result<()> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("f = {f} is not in (0,1)")))
    }
}

pub fn encode_w(f: f64, x: u8, v: f64) -> Result<f64> {
    check_f(f)?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("v = {v} is not in [0,1]")));
    }
    Ok(encode_unchecked(f, x, v))
}

#[inline]
pub(crate) fn encode_unchecked(f: f64, x: u8, v: f64) -> f64 {
    if x == 0 {
        f * v
    } else {
        1.0 - (1.0 - f) * v
    }
}

pub fn decode_xv(f: f64, w: f64) -> Result<(u8, f64)> {
    check_f(f)?;
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Domain(format!("w = {w} is not in [0,1]")));
    }
    Ok(if w > f {
        (1, (1.0 - w) / (1.0 - f))
    } else {
        (0, w / f)
    })
}

/// Samples per independently simulated batch in [`innovation_audit`].
pub const AUDIT_BATCH: usize = 10_000;

/// Burn-in used when a kernel has no exact stationary law.
pub const AUDIT_BURN_IN: usize = 200;

/// Simulates `n_samples` innovations in independent batches and runs the
/// uniformity/independence checks on the concatenation.
pub fn innovation_audit(
    kernel: &Kernel,
    n_samples: usize,
    seed: u64,
    thresholds: &AuditThresholds,
) -> Result<AuditReport> {
    if n_samples < 1000 {
        return Err(Error::Parameter(format!(
            "innovation audit needs at least 1000 samples, got {n_samples}"
        )));
    }
    let w = innovation_samples(kernel, n_samples, seed)?;
    Ok(uniform_audit(&w, thresholds))
}

/// The innovation sequence used by [`innovation_audit`].
pub fn innovation_samples(kernel: &Kernel, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    let init = if kernel.is_exact_mode() {
        InitMode::Stationary
    } else {
        InitMode::ZeroPadded { burn_in: AUDIT_BURN_IN }
    };
    let sampler = PathSampler::new(kernel.clone(), init, 0)?;
    let batches = n_samples.div_ceil(AUDIT_BATCH);
    let chunks: Vec<Vec<f64>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let len = AUDIT_BATCH.min(n_samples - b * AUDIT_BATCH);
            let mut rng = rng::stream(seed, "innovation-audit", b as u64);
            sampler.sample(-(len as i64 - 1), &mut rng).w
        })
        .collect();
    Ok(chunks.concat())
}
