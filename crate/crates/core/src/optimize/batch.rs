//! Multi-start campaigns: independent seeded runs, aggregated statistics,
//! deterministic given the seed base.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bfgs_run, sequential_run, OptimizeOpts, RunRecord};
use crate::error::Result;
use crate::grouplandscape::Objective;
use crate::propagate::PiecewiseControl;
use crate::qcore::random;
use crate::sysmodel::ControlSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Bfgs,
    Sequential,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchConfig {
    pub runs: usize,
    pub seed_base: u64,
    pub method: Method,
    pub opts: OptimizeOpts,
    /// Standard deviation of the i.i.d. normal initial amplitudes.
    pub init_std: f64,
    pub keep_histories: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            runs: 100,
            seed_base: 0,
            method: Method::Bfgs,
            opts: OptimizeOpts::default(),
            init_std: 1.0,
            keep_histories: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub runs: usize,
    pub threshold: f64,
    pub success_count: usize,
    /// Terminal error per run, by run index.
    pub terminal_errors: Vec<f64>,
    pub iterations: Vec<usize>,
    /// Log-spaced error histogram.
    pub histogram: Vec<HistogramBin>,
    /// (error level, number of runs at or below it), sorted ascending.
    pub cumulative: Vec<(f64, usize)>,
    /// Full error histories when requested.
    pub histories: Option<Vec<Vec<f64>>>,
}

/// Draws the standard-normal initial control for run `index`.
pub fn batch_init(
    template: &PiecewiseControl,
    seed_base: u64,
    index: usize,
    std: f64,
) -> PiecewiseControl {
    let mut rng = random::rng(seed_base.wrapping_add(index as u64));
    let mut init = template.clone();
    for v in init.values_mut().iter_mut() {
        *v = std * rng.sample::<f64, _>(rand_distr::StandardNormal);
    }
    init
}

fn log_histogram(errors: &[f64], bins: usize) -> Vec<HistogramBin> {
    let floor = 1e-16_f64;
    let lo = errors
        .iter()
        .fold(f64::INFINITY, |a, &x| a.min(x.max(floor)))
        .log10()
        .floor();
    let hi = errors
        .iter()
        .fold(floor, |a: f64, &x| a.max(x.max(floor)))
        .log10()
        .ceil()
        .max(lo + 1.0);
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|k| HistogramBin {
            lo: 10f64.powf(lo + k as f64 * width),
            hi: 10f64.powf(lo + (k + 1) as f64 * width),
            count: 0,
        })
        .collect();
    for &e in errors {
        let x = e.max(floor).log10();
        let k = (((x - lo) / width) as usize).min(bins - 1);
        out[k].count += 1;
    }
    out
}

/// Runs `config.runs` independent optimizations of the problem defined by
/// `template` (grid shape, horizon, variable-time flag) and aggregates them.
/// Bit-identical output for identical configs.
pub fn batch_campaign(
    sys: &ControlSystem,
    obj: &Objective,
    template: &PiecewiseControl,
    config: &BatchConfig,
) -> Result<Vec<RunRecord>> {
    let records: Vec<Result<RunRecord>> = (0..config.runs)
        .into_par_iter()
        .map(|i| {
            let init = batch_init(template, config.seed_base, i, config.init_std);
            let mut rec = match config.method {
                Method::Bfgs => bfgs_run(sys, obj, &init, &config.opts)?,
                Method::Sequential => sequential_run(sys, obj, &init, &config.opts)?,
            };
            rec.seed = config.seed_base.wrapping_add(i as u64);
            Ok(rec)
        })
        .collect();
    records.into_iter().collect()
}

/// Aggregates run records into campaign statistics.
pub fn batch_stats(records: &[RunRecord], threshold: f64, keep_histories: bool) -> BatchStats {
    let terminal_errors: Vec<f64> = records.iter().map(|r| r.terminal_error).collect();
    let iterations: Vec<usize> = records.iter().map(|r| r.iterations).collect();
    let success_count = terminal_errors.iter().filter(|&&e| e < threshold).count();
    let mut sorted = terminal_errors.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cumulative: Vec<(f64, usize)> = sorted
        .iter()
        .enumerate()
        .map(|(k, &e)| (e, k + 1))
        .collect();
    BatchStats {
        runs: records.len(),
        threshold,
        success_count,
        histogram: log_histogram(&terminal_errors, 32),
        terminal_errors,
        iterations,
        cumulative,
        histories: keep_histories.then(|| {
            records
                .iter()
                .map(|r| r.error_history.clone())
                .collect()
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouplandscape::GateGroup;
    use crate::propagate::propagate;
    use crate::qcore::{random, HermitianOperator, UnitaryMatrix};
    use rand::Rng;

    fn small_problem() -> (ControlSystem, Objective, PiecewiseControl) {
        let h0 = HermitianOperator::new(crate::qcore::pauli_z()).unwrap();
        let h1 = HermitianOperator::new(crate::qcore::pauli_x()).unwrap();
        let sys = ControlSystem::new(h0, vec![h1]).unwrap();
        let mut truth = PiecewiseControl::zeros(1, 6, 1.0);
        let mut rng = random::rng(8);
        for v in truth.values_mut().iter_mut() {
            *v = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let v = propagate(&sys, &truth).unwrap().endpoint().clone();
        let obj = Objective::gate(UnitaryMatrix::new(v).unwrap(), GateGroup::U).unwrap();
        let template = PiecewiseControl::zeros(1, 6, 1.0);
        (sys, obj, template)
    }

    #[test]
    fn identical_seeds_give_bit_identical_stats() {
        let (sys, obj, template) = small_problem();
        let config = BatchConfig {
            runs: 5,
            seed_base: 42,
            ..Default::default()
        };
        let r1 = batch_campaign(&sys, &obj, &template, &config).unwrap();
        let r2 = batch_campaign(&sys, &obj, &template, &config).unwrap();
        let s1 = batch_stats(&r1, config.opts.threshold, true);
        let s2 = batch_stats(&r2, config.opts.threshold, true);
        assert_eq!(s1, s2);
    }

    #[test]
    fn success_counting_matches_threshold_rule() {
        let (sys, obj, template) = small_problem();
        let config = BatchConfig {
            runs: 8,
            seed_base: 3,
            ..Default::default()
        };
        let recs = batch_campaign(&sys, &obj, &template, &config).unwrap();
        let stats = batch_stats(&recs, 1e-4, false);
        let manual = recs.iter().filter(|r| r.terminal_error < 1e-4).count();
        assert_eq!(stats.success_count, manual);
        assert_eq!(stats.cumulative.len(), 8);
        assert_eq!(stats.cumulative.last().unwrap().1, 8);
        let total: usize = stats.histogram.iter().map(|b| b.count).sum();
        assert_eq!(total, 8);
    }
}
