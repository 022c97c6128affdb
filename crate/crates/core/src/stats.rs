//! Uniformity and independence statistics for innovation sequences.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Cells per axis of the pair histogram.
const PAIR_BINS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRow {
    pub statistic: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AuditReport {
    pub samples: usize,
    pub rows: Vec<AuditRow>,
}

impl AuditReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, statistic: &str) -> Option<&AuditRow> {
        self.rows.iter().find(|r| r.statistic == statistic)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct AuditThresholds {
    pub ks_distance: f64,
    pub lag1_correlation: f64,
    pub chi_square_pvalue: f64,
}

impl Default for AuditThresholds {
    fn default() -> Self {
        AuditThresholds {
            ks_distance: 0.01,
            lag1_correlation: 0.01,
            chi_square_pvalue: 0.001,
        }
    }
}

/// Sup-distance between the empirical CDF and the uniform CDF on `[0, 1]`.
pub fn ks_uniform(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Dvoretzky–Kiefer–Wolfowitz radius: `P(D_n > eps) <= alpha`.
pub fn dkw_radius(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Sample correlation of `(v_i, v_{i+1})`.
pub fn lag1_correlation(values: &[f64]) -> f64 {
    if values.len() < 3 {
        return 0.0;
    }
    let a = &values[..values.len() - 1];
    let b = &values[1..];
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Chi-square statistic of non-overlapping consecutive pairs on a 10x10 grid,
/// with its degrees of freedom.
pub fn pair_chi_square(values: &[f64]) -> (f64, usize) {
    let cells = PAIR_BINS * PAIR_BINS;
    let pairs = values.len() / 2;
    let mut counts = vec![0u64; cells];
    let bin = |v: f64| ((v * PAIR_BINS as f64) as usize).min(PAIR_BINS - 1);
    for pair in values.chunks_exact(2) {
        counts[bin(pair[0]) * PAIR_BINS + bin(pair[1])] += 1;
    }
    let expected = pairs as f64 / cells as f64;
    let stat = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    (stat, cells - 1)
}

/// The three fixed checks: uniform marginal, no lag-1 correlation, uniform
/// pair law.
pub fn uniform_audit(values: &[f64], thresholds: &AuditThresholds) -> AuditReport {
    let ks = ks_uniform(values);
    let corr = lag1_correlation(values);
    let (chi, dof) = pair_chi_square(values);
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    let pvalue = dist.sf(chi);
    let critical = dist.inverse_cdf(1.0 - thresholds.chi_square_pvalue);
    AuditReport {
        samples: values.len(),
        rows: vec![
            AuditRow {
                statistic: "ks_distance".into(),
                value: ks,
                threshold: thresholds.ks_distance,
                pass: ks < thresholds.ks_distance,
            },
            AuditRow {
                statistic: "lag1_correlation".into(),
                value: corr,
                threshold: thresholds.lag1_correlation,
                pass: corr.abs() < thresholds.lag1_correlation,
            },
            AuditRow {
                statistic: "pair_chi_square".into(),
                value: chi,
                threshold: critical,
                pass: chi < critical,
            },
            AuditRow {
                statistic: "pair_chi_square_pvalue".into(),
                value: pvalue,
                threshold: thresholds.chi_square_pvalue,
                pass: pvalue > thresholds.chi_square_pvalue,
            },
        ],
    }
}

/// Binomial standard error of a frequency.
pub fn binomial_stderr(freq: f64, trials: usize) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    (freq * (1.0 - freq) / trials as f64).sqrt()
}

/// Mean and standard error of the mean, summed in slice order.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_a_perfect_grid() {
        let n = 1000;
        let values: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((ks_uniform(&values) - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn ks_detects_a_skewed_sample() {
        let values: Vec<f64> = (0..1000).map(|i| (i as f64 / 1000.0).powi(2)).collect();
        assert!(ks_uniform(&values) > 0.2);
    }

    #[test]
    fn correlation_of_a_trend() {
        let values: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert!(lag1_correlation(&values) > 0.99);
    }

    #[test]
    fn chi_square_of_balanced_pairs_is_zero() {
        let mut values = Vec::new();
        for a in 0..10 {
            for b in 0..10 {
                values.push(a as f64 / 10.0 + 0.05);
                values.push(b as f64 / 10.0 + 0.05);
            }
        }
        let (chi, dof) = pair_chi_square(&values);
        assert_eq!(dof, 99);
        assert!(chi.abs() < 1e-12);
    }

    #[test]
    fn mean_and_stderr() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0]);
        assert!((m - 2.0).abs() < 1e-15);
        assert!((s - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
