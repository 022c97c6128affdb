//! Product-type extension driven by orientation-flipped innovations.
//!
//! For a window `[N; 0]` and an anchor past `x_hat` before `N`, each step
//! `t` reads the orientation `lambda` of the optimal coupling between the
//! true past and the anchored past (from `rho~_{|t|}`), sets `U_t = W_t` or
//! `1 - W_t` accordingly, and advances `x_hat_t = 1(U_t > P(0 | x_hat past))`.
//! The `U` are i.i.d. uniform, `x_hat` depends on `U` only, and the true
//! window is recovered from `U` and the true past through `G`.

pub mod checks;
pub mod stitch;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::vershik::{MetricLadder, Orientation};
use crate::word::{shift_in, Word};

pub use checks::{
    anchor_values, choose_anchor, generator_error_check, joint_step_law, step_joint_mass, AnchorChoice,
    GeneratorErrorReport, JointLawReport,
};
pub use stitch::{plan_schedule, stitch_blocks, BlockPlan, ExtensionSchedule, StitchReport, StitchRow, StratumRow};

/// `u = w` for the monotone orientation, `1 - w` for the antitone one.
#[inline]
pub fn flip(w: f64, orientation: Orientation) -> f64 {
    match orientation {
        Orientation::Monotone => w,
        Orientation::Antitone => 1.0 - w,
    }
}

/// One step: the oriented innovation and the next anchored symbol.
pub fn u_step(w: f64, orientation: Orientation, x_hat_context: &Word, kernel: &Kernel) -> Result<(f64, u8)> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Domain(format!("w = {w} is not in [0,1]")));
    }
    let u = flip(w, orientation);
    Ok((u, u8::from(u > kernel.conditional_prob(x_hat_context))))
}

/// `G(lambda, u, x) = 1(u > f)` or `1(1 - u > f)` with `f = P(0 | x)`.
#[inline]
pub fn g_map(orientation: Orientation, u: f64, f: f64) -> u8 {
    u8::from(flip(u, orientation) > f)
}

/// Innovations, anchored trajectory and orientations of one block.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockRun {
    pub u: Vec<f64>,
    pub x_hat: Vec<u8>,
    pub orientation: Vec<Orientation>,
}

fn check_ladder(ladder: &MetricLadder, steps: usize) -> Result<()> {
    if steps == 0 {
        return Err(Error::Parameter("a block needs at least one step".into()));
    }
    if ladder.depth() + 1 < steps {
        return Err(Error::TableMismatch(format!(
            "{steps} steps need metric depth {}, ladder built to {}",
            steps - 1,
            ladder.depth()
        )));
    }
    Ok(())
}

fn check_past(ladder: &MetricLadder, w: &Word, what: &str) -> Result<u64> {
    if w.len() != ladder.len() {
        return Err(Error::TableMismatch(format!(
            "{what} has length {}, expected {}",
            w.len(),
            ladder.len()
        )));
    }
    Ok(w.index())
}

/// Block on packed pasts of length `ladder.len()`; step `i` of `n` uses
/// depth `n - 1 - i`.
pub(crate) fn run_block_packed(ladder: &MetricLadder, w: &[f64], x: &[u8], x_past: u64, anchor: u64) -> BlockRun {
    let (kernel, len, n) = (ladder.kernel(), ladder.len(), w.len());
    let (mut xp, mut hp) = (x_past, anchor);
    let mut run = BlockRun {
        u: Vec::with_capacity(n),
        x_hat: Vec::with_capacity(n),
        orientation: Vec::with_capacity(n),
    };
    for i in 0..n {
        let o = ladder.orientation(n - 1 - i, xp, hp);
        let u = flip(w[i], o);
        let xh = u8::from(u > kernel.prob0(hp));
        xp = shift_in(xp, x[i], len);
        hp = shift_in(hp, xh, len);
        run.u.push(u);
        run.x_hat.push(xh);
        run.orientation.push(o);
    }
    run
}

/// `(x, x_hat)` regenerated from the innovations and both pasts.
pub(crate) fn reconstruct_packed(ladder: &MetricLadder, u: &[f64], x_past: u64, anchor: u64) -> (Vec<u8>, Vec<u8>) {
    let (kernel, len, n) = (ladder.kernel(), ladder.len(), u.len());
    let (mut xp, mut hp) = (x_past, anchor);
    let mut x = Vec::with_capacity(n);
    let mut x_hat = Vec::with_capacity(n);
    for (i, &ui) in u.iter().enumerate() {
        let o = ladder.orientation(n - 1 - i, xp, hp);
        let xi = g_map(o, ui, kernel.prob0(xp));
        let xh = u8::from(ui > kernel.prob0(hp));
        xp = shift_in(xp, xi, len);
        hp = shift_in(hp, xh, len);
        x.push(xi);
        x_hat.push(xh);
    }
    (x, x_hat)
}

/// Runs the construction on `[N; 0]` with `N = 1 - w.len()`.
pub fn run_block(ladder: &MetricLadder, w: &[f64], x: &Word, true_past: &Word, anchor: &Word) -> Result<BlockRun> {
    check_ladder(ladder, w.len())?;
    if x.len() != w.len() {
        return Err(Error::Parameter(format!(
            "{} innovations for a window of {} symbols",
            w.len(),
            x.len()
        )));
    }
    if let Some(bad) = w.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("w = {bad} is not in [0,1]")));
    }
    let xp = check_past(ladder, true_past, "true past")?;
    let hp = check_past(ladder, anchor, "anchor")?;
    Ok(run_block_packed(ladder, w, x.bits(), xp, hp))
}

/// `(X[N; 0], x_hat[N; 0])` from `U[N; 0]`, the true past and the anchor.
pub fn reconstruct_from_u(ladder: &MetricLadder, u: &[f64], true_past: &Word, anchor: &Word) -> Result<(Word, Word)> {
    check_ladder(ladder, u.len())?;
    let xp = check_past(ladder, true_past, "true past")?;
    let hp = check_past(ladder, anchor, "anchor")?;
    let (x, x_hat) = reconstruct_packed(ladder, u, xp, hp);
    Ok((Word::new(x)?, Word::new(x_hat)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reconstruction::{simulate_path, window_reconstruct, InitMode};
    use crate::vershik::GeneratorConfig;

    fn ladder(kernel: &Kernel, d: usize, depth: usize) -> MetricLadder {
        MetricLadder::build(kernel, GeneratorConfig::new(d).unwrap(), depth).unwrap()
    }

    #[test]
    fn step_examples() {
        let k = Kernel::markov1_demo();
        let (u, _) = u_step(0.2, Orientation::Antitone, &Word::zeros(1), &k).unwrap();
        assert!((u - 0.8).abs() < 1e-15);
        assert_eq!(u_step(0.9, Orientation::Monotone, &Word::zeros(1), &k).unwrap(), (0.9, 1));
        assert!(u_step(1.2, Orientation::Monotone, &Word::zeros(1), &k).is_err());
        assert_eq!(g_map(Orientation::Antitone, 0.2, 0.7), 1);
        assert_eq!(g_map(Orientation::Monotone, 0.2, 0.7), 0);
    }

    #[test]
    fn round_trip_reproduces_the_window() {
        for k in [Kernel::markov1_demo(), Kernel::markov3_demo()] {
            let l = ladder(&k, 4, 12);
            for seed in 0..50 {
                let s = simulate_path(&k, -12, seed, InitMode::Stationary).unwrap();
                let past = s.prefix.suffix(l.len());
                let anchor = Word::from_index(seed % 32, l.len());
                let run = run_block(&l, &s.w, &s.x, &past, &anchor).unwrap();
                let (x, x_hat) = reconstruct_from_u(&l, &run.u, &past, &anchor).unwrap();
                assert_eq!(x, s.x);
                assert_eq!(x_hat.bits(), &run.x_hat[..]);
            }
        }
    }

    #[test]
    fn iid_orientation_is_monotone() {
        let k = Kernel::iid(0.3).unwrap();
        let l = ladder(&k, 3, 8);
        let s = simulate_path(&k, -8, 1, InitMode::Stationary).unwrap();
        let past = Word::zeros(l.len());
        let run = run_block(&l, &s.w, &s.x, &past, &Word::new(vec![1; 4]).unwrap()).unwrap();
        assert!(run.orientation.iter().all(|&o| o == Orientation::Monotone));
        assert_eq!(run.u, s.w);
        assert_eq!(run.x_hat, s.x.bits());
    }

    #[test]
    fn monotone_runs_match_the_innovation_reconstruction() {
        let k = Kernel::markov1_demo();
        let l = ladder(&k, 4, 10);
        let mut compared = 0;
        for seed in 0..300 {
            let s = simulate_path(&k, -10, seed, InitMode::Stationary).unwrap();
            let run = run_block(&l, &s.w, &s.x, &s.prefix.suffix(l.len()), &Word::zeros(l.len())).unwrap();
            if run.orientation.iter().all(|&o| o == Orientation::Monotone) {
                let rec = window_reconstruct(&k, &s, -10, 0).unwrap();
                assert_eq!(rec.x_hat.bits(), &run.x_hat[..]);
                compared += 1;
            }
        }
        assert!(compared > 0);
    }

    #[test]
    fn shape_errors() {
        let k = Kernel::markov1_demo();
        let l = ladder(&k, 2, 3);
        let x = Word::zeros(5);
        let w = vec![0.5; 5];
        assert!(matches!(run_block(&l, &w, &x, &Word::zeros(3), &Word::zeros(3)), Err(Error::TableMismatch(_))));
        assert!(run_block(&l, &w[..4], &x, &Word::zeros(3), &Word::zeros(3)).is_err());
        assert!(run_block(&l, &w[..4], &Word::zeros(4), &Word::zeros(2), &Word::zeros(3)).is_err());
        assert!(reconstruct_from_u(&l, &[], &Word::zeros(3), &Word::zeros(3)).is_err());
    }
}
