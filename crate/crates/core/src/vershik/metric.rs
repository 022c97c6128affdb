use std::io::{self, Write};

use rayon::prelude::*;

use super::coupling::{lambda_from_costs, optimal_coupling, Coupling2x2, Orientation};
use super::generator::GeneratorConfig;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::word::{mask, shift_in, Word};

/// Default cap on the pair-state word length (`4^8` pairs).
pub const DEFAULT_PAIR_LEN_CAP: usize = 8;
/// Largest accepted cap (`4^10` pairs, 8 MB per table).
pub const PAIR_LEN_HARD_CAP: usize = 10;

/// `rho~_p(u, v)` for every ordered pair of length-`len` pasts, stored at
/// `(u << len) | v` with packed indices.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricTable {
    depth: usize,
    len: usize,
    values: Vec<f64>,
}

impl MetricTable {
    /// `rho~_0(u, v) = |R_D(u) - R_D(v)|`.
    pub fn base(len: usize, config: &GeneratorConfig) -> Result<Self> {
        check_len(len, PAIR_LEN_HARD_CAP)?;
        if config.span() > len {
            return Err(Error::TableMismatch(format!(
                "word length {len} is shorter than the generator span {}",
                config.span()
            )));
        }
        let r: Vec<f64> = (0..1u64 << len).map(|i| config.value_index(i)).collect();
        let n = r.len();
        let values = (0..n * n).map(|k| (r[k / n] - r[k % n]).abs()).collect();
        Ok(MetricTable { depth: 0, len, values })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, u: u64, v: u64) -> f64 {
        self.values[((u << self.len) | v) as usize]
    }

    pub fn get_words(&self, u: &Word, v: &Word) -> Result<f64> {
        self.check_word(u)?;
        self.check_word(v)?;
        Ok(self.get(u.index(), v.index()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        if w.len() != self.len {
            return Err(Error::TableMismatch(format!(
                "word of length {} against a table of length {}",
                w.len(),
                self.len
            )));
        }
        Ok(())
    }

    /// Costs `rho~(ext(u, a), ext(v, b))` of one coupled extension step.
    #[inline]
    fn step_costs(&self, u: u64, v: u64) -> [[f64; 2]; 2] {
        let l = self.len;
        let (u0, u1) = (shift_in(u, 0, l), shift_in(u, 1, l));
        let (v0, v1) = (shift_in(v, 0, l), shift_in(v, 1, l));
        [[self.get(u0, v0), self.get(u0, v1)], [self.get(u1, v0), self.get(u1, v1)]]
    }

    /// Text form: one `u v value` line per pair, words oldest symbol first.
    pub fn dump<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let n = 1u64 << self.len;
        for u in 0..n {
            let uw = Word::from_index(u, self.len);
            for v in 0..n {
                writeln!(out, "{} {} {:.16e}", uw, Word::from_index(v, self.len), self.get(u, v))?;
            }
        }
        Ok(())
    }
}

fn check_len(len: usize, cap: usize) -> Result<()> {
    if len > cap {
        return Err(Error::CapExceeded {
            what: "pair-state word length",
            value: len,
            cap,
        });
    }
    Ok(())
}

/// Orientation of the coupling that extends `(x, y)` optimally for the costs
/// in `rho_prev`.
pub fn lambda_sign(rho_prev: &MetricTable, x: &Word, y: &Word) -> Result<Orientation> {
    rho_prev.check_word(x)?;
    rho_prev.check_word(y)?;
    let c = rho_prev.step_costs(x.index(), y.index());
    Ok(lambda_from_costs(c[0][0], c[0][1], c[1][0], c[1][1]))
}

#[inline]
fn step_coupling(prev: &MetricTable, kernel: &Kernel, u: u64, v: u64) -> (Coupling2x2, [[f64; 2]; 2]) {
    let c = prev.step_costs(u, v);
    let o = lambda_from_costs(c[0][0], c[0][1], c[1][0], c[1][1]);
    (optimal_coupling(kernel.prob0(u), kernel.prob0(v), o), c)
}

/// `rho~_{p}` from `rho~_{p-1}`. Entries are evaluated on the ordered pair
/// `(min, max)` so the table is exactly symmetric.
pub fn rho_step(rho_prev: &MetricTable, kernel: &Kernel) -> Result<MetricTable> {
    let len = rho_prev.len;
    if kernel.memory() > len {
        return Err(Error::TableMismatch(format!(
            "kernel memory {} exceeds the table word length {len}",
            kernel.memory()
        )));
    }
    let n = 1usize << len;
    let values = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (a, b) = ((k / n) as u64, (k % n) as u64);
            let (u, v) = if a <= b { (a, b) } else { (b, a) };
            if u == v {
                return 0.0;
            }
            let (coupling, cost) = step_coupling(rho_prev, kernel, u, v);
            coupling.expect(cost)
        })
        .collect();
    Ok(MetricTable {
        depth: rho_prev.depth + 1,
        len,
        values,
    })
}

/// The tables `rho~_0, ..., rho~_p` for one kernel and generator.
#[derive(Clone, Debug)]
pub struct MetricLadder {
    kernel: Kernel,
    config: GeneratorConfig,
    tables: Vec<MetricTable>,
}

impl MetricLadder {
    /// Word length `L = max(memory, D + 1)`, refused beyond `cap`.
    pub fn new(kernel: &Kernel, config: GeneratorConfig, cap: usize) -> Result<Self> {
        if cap > PAIR_LEN_HARD_CAP {
            return Err(Error::CapExceeded {
                what: "pair-state length cap",
                value: cap,
                cap: PAIR_LEN_HARD_CAP,
            });
        }
        let len = kernel.memory().max(config.span());
        check_len(len, cap)?;
        Ok(MetricLadder {
            kernel: kernel.clone(),
            config,
            tables: vec![MetricTable::base(len, &config)?],
        })
    }

    pub fn build(kernel: &Kernel, config: GeneratorConfig, depth: usize) -> Result<Self> {
        let mut ladder = MetricLadder::new(kernel, config, DEFAULT_PAIR_LEN_CAP)?;
        ladder.extend_to(depth)?;
        Ok(ladder)
    }

    pub fn extend_to(&mut self, depth: usize) -> Result<()> {
        while self.tables.len() <= depth {
            let next = rho_step(self.tables.last().expect("base table"), &self.kernel)?;
            self.tables.push(next);
        }
        Ok(())
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.tables[0].len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Deepest table built.
    pub fn depth(&self) -> usize {
        self.tables.len() - 1
    }

    pub fn table(&self, depth: usize) -> &MetricTable {
        &self.tables[depth]
    }

    pub fn tables(&self) -> &[MetricTable] {
        &self.tables
    }

    /// Orientation for extending `(u, v)` when `rho~_depth` is the cost.
    #[inline]
    pub fn orientation(&self, depth: usize, u: u64, v: u64) -> Orientation {
        let c = self.tables[depth].step_costs(u, v);
        lambda_from_costs(c[0][0], c[0][1], c[1][0], c[1][1])
    }

    /// Coupling used for `rho~_{depth + 1}(u, v)`.
    pub fn coupling(&self, depth: usize, u: u64, v: u64) -> Coupling2x2 {
        step_coupling(&self.tables[depth], &self.kernel, u, v).0
    }

    /// `rho_p(x, y)` on windows ending at 0: the newest `p` coordinates are
    /// dropped and the pasts are padded with zeros on the old side.
    pub fn rho_untilded(&self, x: &Word, y: &Word, p: usize) -> Result<f64> {
        let t = self.tables.get(p).ok_or_else(|| {
            Error::TableMismatch(format!("depth {p} requested, ladder built to {}", self.depth()))
        })?;
        t.check_word(x)?;
        t.check_word(y)?;
        let drop = |w: &Word| if p >= 64 { 0 } else { (w.index() >> p) & mask(t.len) };
        Ok(t.get(drop(x), drop(y)))
    }
}
