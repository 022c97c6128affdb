//! Configuration, dispatch and output files for reproducible experiments.
//!
//! An experiment is a JSON document naming a kernel and the numeric
//! parameters of one experiment kind. Every random draw derives from the
//! seed through labelled streams, so the emitted files depend only on the
//! configuration bytes and the seed.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::extension::{generator_error_check, joint_step_law, stitch::DEFAULT_MAX_DEPTH, stitch_blocks};
use crate::innovation::innovation_audit;
use crate::kernel::{envelope_check, gamma_profile, regime_check, Kernel, TailDescriptor};
use crate::reconstruction::{disagreement_experiment, domination_experiment, DEFAULT_BURN_IN};
use crate::report::{self, emit_report, Cell, Format, Table};
use crate::stats::AuditThresholds;
use crate::vershik::{alpha_sequence, alpha_sequence_mc, GeneratorConfig};
use crate::word::Word;

/// Largest generator depth accepted by the configuration.
pub const MAX_CONFIG_DEPTH: usize = 12;
/// Largest metric depth accepted for `p_max`.
pub const MAX_CONFIG_P: usize = 200;
/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "STANDARDNESS_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Gamma,
    Audit,
    Reconstruct,
    Vershik,
    Extend,
    Stitch,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Gamma => "gamma",
            ExperimentKind::Audit => "audit",
            ExperimentKind::Reconstruct => "reconstruct",
            ExperimentKind::Vershik => "vershik",
            ExperimentKind::Extend => "extend",
            ExperimentKind::Stitch => "stitch",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Iid {
        p0: f64,
    },
    /// `table` maps each context (oldest symbol first) to `P(0 | context)`.
    Markov {
        order: usize,
        table: BTreeMap<String, f64>,
    },
    LongMemory {
        base: f64,
        weights: Vec<f64>,
    },
    Builtin {
        name: String,
    },
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel, Error> {
        match self {
            KernelSpec::Iid { p0 } => Kernel::iid(*p0),
            KernelSpec::Markov { order, table } => {
                let words = table
                    .keys()
                    .map(|k| k.parse::<Word>())
                    .collect::<Result<Vec<_>, _>>()?;
                Kernel::markov_from_contexts(*order, words.iter().zip(table.values().copied()))
            }
            KernelSpec::LongMemory { base, weights } => Kernel::long_memory(*base, weights.clone()),
            KernelSpec::Builtin { name } => Kernel::builtin(name).ok_or_else(|| {
                Error::InvalidKernel(format!(
                    "unknown builtin '{name}'; known: {}",
                    Kernel::BUILTIN_NAMES.join(", ")
                ))
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaModeSpec {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    /// When present it must match the requested kind.
    pub experiment: Option<ExperimentKind>,
    #[serde(default)]
    pub seed: u64,
    pub output: Option<String>,
    pub k: Option<usize>,
    pub n_list: Option<Vec<i64>>,
    pub n: Option<i64>,
    pub depth: Option<usize>,
    pub p_max: Option<usize>,
    pub trials: Option<usize>,
    pub deltas: Option<Vec<f64>>,
    pub blocks: Option<usize>,
    pub candidates: Option<usize>,
    pub samples: Option<usize>,
    pub burn_in: Option<usize>,
    pub m_max: Option<usize>,
    pub window: Option<usize>,
    pub anchor: Option<String>,
    pub mode: Option<AlphaModeSpec>,
    pub pairs: Option<usize>,
    pub max_depth: Option<usize>,
    pub envelope_len: Option<usize>,
    pub audit: Option<AuditThresholds>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HarnessError {
    Config(String),
    Io(String),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(m) => write!(f, "config error: {m}"),
            HarnessError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<Error> for HarnessError {
    fn from(e: Error) -> Self {
        HarnessError::Config(e.to_string())
    }
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

/// Parses a configuration; messages carry the JSON line and column.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    serde_json::from_str(text).map_err(|e| config_err(format!("line {} column {}: {e}", e.line(), e.column())))
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn require<T: Copy>(value: Option<T>, name: &str, kind: ExperimentKind) -> Result<T, HarnessError> {
    value.ok_or_else(|| config_err(format!("field '{name}' is required for the {} experiment", kind.as_str())))
}

fn positive(value: usize, name: &str) -> Result<usize, HarnessError> {
    if value == 0 {
        return Err(config_err(format!("field '{name}' must be positive")));
    }
    Ok(value)
}

/// Verdict of one emitted table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub failing_rows: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    /// `(file name, contents)` in emission order; the manifest comes last.
    pub files: Vec<(String, String)>,
    pub tables: Vec<(String, Table)>,
    pub checks: Vec<CheckResult>,
}

impl RunOutput {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Default)]
struct Builder {
    tables: Vec<(String, Table)>,
    checks: Vec<CheckResult>,
}

impl Builder {
    fn table(&mut self, name: &str, table: Table) {
        let failing = table.failures();
        if table.columns.contains(&"verdict") {
            self.checks.push(CheckResult {
                name: name.to_string(),
                pass: failing.is_empty(),
                failing_rows: failing,
            });
        }
        self.tables.push((name.to_string(), table));
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    library: &'static str,
    version: &'static str,
    experiment: &'static str,
    seed: u64,
    config: &'a ExperimentConfig,
    files: Vec<String>,
    checks: &'a [CheckResult],
    pass: bool,
}

/// Runs one experiment and renders every output file in memory.
pub fn run_experiment(config: &ExperimentConfig, kind: ExperimentKind) -> Result<RunOutput, HarnessError> {
    if let Some(declared) = config.experiment {
        if declared != kind {
            return Err(config_err(format!(
                "config declares experiment '{}' but '{}' was requested",
                declared.as_str(),
                kind.as_str()
            )));
        }
    }
    let kernel = config.kernel.build()?;
    let depth = config.depth.unwrap_or(6);
    if depth > MAX_CONFIG_DEPTH {
        return Err(config_err(format!("field 'depth' = {depth} exceeds {MAX_CONFIG_DEPTH}")));
    }
    let generator = GeneratorConfig::new(depth)?;
    let seed = config.seed;
    let burn_in = config.burn_in.unwrap_or(DEFAULT_BURN_IN);
    let thresholds = config.audit.unwrap_or_default();
    let mut out = Builder::default();

    match kind {
        ExperimentKind::Gamma => {
            let p_max = require(config.p_max, "p_max", kind)?;
            let profile = gamma_profile(&kernel, p_max)?;
            out.table("gamma", report::gamma_table(&profile));
            let regime = regime_check(&profile, &TailDescriptor::EventuallyZero, p_max + 1);
            let mut t = Table::new(vec!["verdict_regime", "gamma_to_zero", "summable", "partial_sum", "terms"]);
            let flag = |b: Option<bool>| Cell::Text(b.map_or("unknown", |v| if v { "yes" } else { "no" }).into());
            t.push(vec![
                regime.verdict.as_str().into(),
                flag(regime.complete_connections),
                flag(regime.summable),
                regime.partial_sum.into(),
                regime.terms.into(),
            ]);
            out.table("regime", t);
            let len = config.envelope_len.unwrap_or(8);
            let env = envelope_check(&kernel, len, 1e-12)?;
            let mut t = Table::new(vec!["max_len", "contexts", "violations", "min_slack", "verdict"]);
            t.push(vec![
                env.max_len.into(),
                env.contexts_checked.into(),
                env.violations.into(),
                env.min_slack.into(),
                (env.violations == 0).into(),
            ]);
            out.table("envelope", t);
        }
        ExperimentKind::Audit => {
            let samples = positive(config.samples.unwrap_or(100_000), "samples")?;
            let report = innovation_audit(&kernel, samples, seed, &thresholds)?;
            out.table("audit", report::audit_table(&report));
        }
        ExperimentKind::Reconstruct => {
            let k = require(config.k, "k", kind)?;
            let ns = config
                .n_list
                .clone()
                .ok_or_else(|| config_err("field 'n_list' is required for the reconstruct experiment"))?;
            if ns.is_empty() {
                return Err(config_err("field 'n_list' must not be empty"));
            }
            let trials = positive(config.trials.unwrap_or(100_000), "trials")?;
            let table = disagreement_experiment(&kernel, k, &ns, trials, seed, burn_in)?;
            out.table("reconstruct", report::disagreement_table(&table));
            if let Some(m_max) = config.m_max {
                let deepest = *ns.iter().min().expect("non-empty");
                let dom = domination_experiment(&kernel, deepest, m_max, trials, seed, burn_in)?;
                out.table("domination", report::domination_tail_table(&dom));
                out.table("domination_steps", report::domination_step_table(&dom));
                let mut t = Table::new(vec!["N", "trials", "event_mismatches", "verdict"]);
                t.push(vec![dom.n.into(), dom.trials.into(), dom.event_mismatches.into(), (dom.event_mismatches == 0).into()]);
                out.table("disagreement_events", t);
            }
            if let Some(bias) = table.init_bias_bound {
                let mut t = Table::new(vec!["burn_in", "init_bias_bound"]);
                t.push(vec![burn_in.into(), bias.into()]);
                out.table("burn_in", t);
            }
        }
        ExperimentKind::Vershik => {
            let p_max = require(config.p_max, "p_max", kind)?;
            if p_max > MAX_CONFIG_P {
                return Err(config_err(format!("field 'p_max' = {p_max} exceeds {MAX_CONFIG_P}")));
            }
            let mode = config.mode.unwrap_or(if kernel.is_exact_mode() {
                AlphaModeSpec::Exact
            } else {
                AlphaModeSpec::MonteCarlo
            });
            let table = match mode {
                AlphaModeSpec::Exact => alpha_sequence(&kernel, generator, p_max)?,
                AlphaModeSpec::MonteCarlo => {
                    let pairs = positive(config.pairs.unwrap_or(100_000), "pairs")?;
                    alpha_sequence_mc(&kernel, generator, p_max, pairs, seed, burn_in)?
                }
            };
            out.table("alpha", report::alpha_table(&table));
        }
        ExperimentKind::Extend => {
            let n = require(config.n, "n", kind)?;
            let len = kernel.memory().max(generator.span());
            let anchor = match &config.anchor {
                Some(s) => s.parse::<Word>()?,
                None => Word::zeros(len),
            };
            let window = config.window.unwrap_or(4);
            let trials = config.trials.unwrap_or(100_000);
            let joint = joint_step_law(&kernel, generator, window, &anchor)?;
            let gen = generator_error_check(&kernel, n, &anchor, generator, trials, seed)?;
            out.table("extend", report::extend_table(&joint, &gen));
        }
        ExperimentKind::Stitch => {
            let deltas = match &config.deltas {
                Some(d) => d.clone(),
                None => {
                    let blocks = positive(config.blocks.unwrap_or(3), "blocks")?;
                    (0..blocks).map(|j| 0.2 * 0.5f64.powi(j as i32)).collect()
                }
            };
            let trials = config.trials.unwrap_or(10_000);
            let candidates = positive(config.candidates.unwrap_or(256), "candidates")?;
            let max_depth = positive(config.max_depth.unwrap_or(DEFAULT_MAX_DEPTH), "max_depth")?;
            if max_depth > MAX_CONFIG_P {
                return Err(config_err(format!("field 'max_depth' = {max_depth} exceeds {MAX_CONFIG_P}")));
            }
            let report = stitch_blocks(&kernel, generator, &deltas, trials, seed, candidates, max_depth, &thresholds)?;
            out.table("stitch", report::stitch_table(&report));
            out.table("stitch_audit", report::stitch_audit_table(&report));
        }
    }

    let mut files: Vec<(String, String)> = out
        .tables
        .iter()
        .map(|(name, t)| (format!("{name}.csv"), emit_report(t, Format::Csv)))
        .collect();
    let manifest = Manifest {
        library: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        experiment: kind.as_str(),
        seed,
        config,
        files: files.iter().map(|f| f.0.clone()).collect(),
        checks: &out.checks,
        pass: out.checks.iter().all(|c| c.pass),
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| HarnessError::Io(e.to_string()))?;
    text.push('\n');
    files.push(("manifest.json".into(), text));
    Ok(RunOutput {
        files,
        tables: out.tables,
        checks: out.checks,
    })
}

/// Writes every file of a finished run into `dir`.
pub fn write_outputs(dir: &Path, output: &RunOutput) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    for (name, contents) in &output.files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Worker-thread count from an explicit flag, else the environment.
pub fn thread_count(flag: Option<usize>) -> Result<Option<usize>, HarnessError> {
    if let Some(n) = flag {
        return positive(n, "--threads").map(Some);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| config_err(format!("{THREADS_ENV}='{v}' is not a positive integer"))),
        Err(_) => Ok(None),
    }
}
