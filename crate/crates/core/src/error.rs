use thiserror::Error;

/// Errors raised by the library. Statistical verdicts are never errors; they
/// are reported as rows with a pass/fail flag.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} exceeds the enumeration cap of {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("power iteration did not converge after {iterations} iterations (last sup-change {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("gamma profile covers states 0..={covered} but state {needed} was requested and the tail is unknown")]
    ProfileCoverage { covered: usize, needed: usize },

    #[error("metric table mismatch: {0}")]
    TableMismatch(String),

    #[error("threshold {threshold:e} unreachable for block {block}: needs metric depth beyond {max_depth}")]
    ThresholdUnreachable {
        block: usize,
        threshold: f64,
        max_depth: usize,
    },

    #[error("no anchor among {candidates} candidates achieves {delta:e} (best {best:e}); try a larger |N|")]
    NoAnchor {
        candidates: usize,
        delta: f64,
        best: f64,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
