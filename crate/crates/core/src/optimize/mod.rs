//! Pulse optimizers over piecewise-constant controls: quasi-Newton with
//! strong Wolfe line search, monotonic sequential updates, and the
//! multi-start campaign controller.

mod batch;
mod bfgs;
mod sequential;

pub use batch::{
    batch_campaign, batch_init, batch_stats, BatchConfig, BatchStats, HistogramBin, Method,
};
pub use bfgs::bfgs_run;
pub use sequential::sequential_run;

use serde::{Deserialize, Serialize};

use crate::propagate::PiecewiseControl;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminationReason {
    Threshold,
    MaxIters,
    Stalled,
    LineSearchFailure,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimizeOpts {
    /// Iteration cap (sweeps for the sequential method).
    pub max_iters: usize,
    /// Success threshold on the error 1 − F.
    pub threshold: f64,
    /// Armijo constant of the line search.
    pub c1: f64,
    /// Curvature constant of the line search.
    pub c2: f64,
    /// Stall window (iterations) and relative-gain floor.
    pub stall_window: usize,
    pub stall_eps: f64,
    /// Keep iterating after the threshold until the stall rule fires; the
    /// refinement stage that pushes successful runs to their floor.
    pub refine_after_threshold: bool,
    /// Line-search evaluation budget per iteration.
    pub max_line_search: usize,
}

impl Default for OptimizeOpts {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            threshold: 1e-4,
            c1: 1e-4,
            c2: 0.9,
            stall_window: 50,
            stall_eps: 1e-9,
            refine_after_threshold: false,
            max_line_search: 40,
        }
    }
}

/// One optimization run: history and termination bookkeeping.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub seed: u64,
    pub init: PiecewiseControl,
    pub final_control: PiecewiseControl,
    /// Error 1 − F at the initial point and after every iteration.
    pub error_history: Vec<f64>,
    pub terminal_error: f64,
    pub iterations: usize,
    pub termination: TerminationReason,
    /// First iteration at which the error crossed the threshold.
    pub threshold_crossing: Option<usize>,
    pub wall_time_s: f64,
    /// Count of quasi-Newton updates skipped for lack of positive curvature
    /// (zero in healthy runs; the Wolfe conditions enforce it).
    pub curvature_skips: usize,
}

impl RunRecord {
    pub fn success(&self, threshold: f64) -> bool {
        self.terminal_error < threshold
    }
}

/// Shared stall detector: relative gain over the trailing window.
pub(crate) fn stalled(history: &[f64], window: usize, eps: f64) -> bool {
    if history.len() <= window {
        return false;
    }
    let old = history[history.len() - 1 - window];
    let new = history[history.len() - 1];
    (old - new) <= eps * old.abs().max(1e-300)
}
