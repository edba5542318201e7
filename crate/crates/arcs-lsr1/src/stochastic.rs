//! Mini-batch training loop around any [`Optimizer`]: seeded epoch shuffles,
//! per-batch inner iterations, and monotone batch-size growth driven by a
//! periodic full-loss stall test.

use std::time::Instant;


use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problems::{BatchView, Objective};
use crate::solver::Optimizer;

/// Grid axes used by the stock hyperparameter sweep.
pub const SWEEP_MEMORIES: [usize; 6] = [5, 10, 15, 20, 50, 100];
pub const SWEEP_MAX_ITERS: [usize; 4] = [1, 10, 15, 20];
pub const SWEEP_BATCHES: [usize; 4] = [128, 256, 512, 1024];

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchSchedule {
    pub initial_batch: usize,
    /// Upper bound for growth; clamped to the dataset size at run time.
    pub max_batch: usize,
    pub growth_factor: f64,
    /// Every this many optimizer iterations the full training loss is
    /// evaluated and compared against the previous full evaluation.
    pub full_eval_period: usize,
    pub stall_tolerance: f64,
    /// How many optimizer steps are applied to each sampled batch.
    pub max_iters_per_batch: usize,
    pub seed: u64,
}

impl Default for BatchSchedule {
    fn default() -> Self {
        BatchSchedule {
            initial_batch: 128,
            max_batch: usize::MAX,
            growth_factor: 2.0,
            full_eval_period: 10,
            stall_tolerance: 1e-4,
            max_iters_per_batch: 1,
            seed: 0,
        }
    }
}

impl BatchSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.initial_batch == 0 {
            return Err(Error::invalid("schedule: initial_batch must be at least 1"));
        }
        if self.max_batch < self.initial_batch {
            return Err(Error::invalid("schedule: max_batch must be >= initial_batch"));
        }
        if !(self.growth_factor > 1.0) {
            return Err(Error::invalid("schedule: growth_factor must exceed 1"));
        }
        if self.full_eval_period <= 1 {
            return Err(Error::invalid("schedule: full_eval_period must exceed 1"));
        }
        if !(self.stall_tolerance > 0.0) {
            return Err(Error::invalid("schedule: stall_tolerance must be positive"));
        }
        if self.max_iters_per_batch == 0 {
            return Err(Error::invalid("schedule: max_iters_per_batch must be at least 1"));
        }
        Ok(())
    }
}

/// One optimizer step inside the loop. `f` is the mini-batch loss at the
/// start of the step; full-dataset metrics live on the epoch records.
#[derive(Debug, Clone)]
pub struct IterRecord {
    pub iter: usize,
    pub epoch: usize,
    pub f: f64,
    pub grad_norm: f64,
    pub step_norm: f64,
    pub mu: Option<f64>,
    pub rho: Option<f64>,
    pub batch_size: usize,
}

#[derive(Debug, Clone)]
pub struct EpochRecord {
    pub epoch: usize,
    pub f_train: f64,
    pub f_test: Option<f64>,
    pub accuracy: Option<f64>,
    pub batch_size: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct StochasticTrace {
    pub iters: Vec<IterRecord>,
    pub epochs: Vec<EpochRecord>,
    /// Set when a requested batch size was larger than the dataset.
    pub clamped: bool,
}

impl StochasticTrace {
    pub fn final_epoch(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }
}

/// Runs `epochs` passes over the training set. Each epoch shuffles the
/// sample indices with the schedule's seed stream, walks them in batches of
/// the current size, and applies up to `max_iters_per_batch` optimizer steps
/// per batch. Because the optimizer evaluates both gradient endpoints of a
/// step on the objective it is handed, every quasi-Newton pair is built from
/// one batch; pairs never mix batches.
///
/// Batch growth: every `full_eval_period` optimizer iterations the full
/// training loss is evaluated; if it failed to improve by at least
/// `stall_tolerance` since the previous evaluation, the batch size grows by
/// `growth_factor` (capped at the dataset size). Growth decisions see only
/// these periodic values; the per-epoch metrics are reporting-only.
pub fn run_epochs(
    obj: &dyn Objective,
    test_obj: Option<&dyn Objective>,
    opt: &mut dyn Optimizer,
    schedule: &BatchSchedule,
    epochs: usize,
) -> Result<StochasticTrace> {
    schedule.validate()?;
    let n = obj
        .dataset_size()
        .ok_or_else(|| Error::invalid("run_epochs: objective has no batch decomposition"))?;
    if n == 0 {
        return Err(Error::invalid("run_epochs: empty dataset"));
    }

    let mut trace = StochasticTrace::default();
    let mut d = schedule.initial_batch;
    let mut d_max = schedule.max_batch.min(n);
    if schedule.initial_batch > n {
        eprintln!(
            "warning: initial batch {} exceeds dataset size {}; clamping",
            schedule.initial_batch, n
        );
        d = n;
        trace.clamped = true;
    }
    if d_max < d {
        d_max = d;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let mut indices: Vec<usize> = (0..n).collect();
    let full: Vec<usize> = (0..n).collect();
    let test_indices: Vec<usize> =
        test_obj.and_then(|t| t.dataset_size()).map(|m| (0..m).collect()).unwrap_or_default();

    let mut iter = 0usize;
    let mut last_full = obj.value_batch(opt.theta(), &full);

    for epoch in 0..epochs {
        let t0 = Instant::now();
        indices.shuffle(&mut rng);
        let epoch_d = d;
        let mut start = 0;
        while start < n {
            let end = (start + d).min(n);
            let batch = &indices[start..end];
            let view = BatchView { obj, batch };
            for _ in 0..schedule.max_iters_per_batch {
                let info = opt.step(&view)?;
                iter += 1;
                trace.iters.push(IterRecord {
                    iter,
                    epoch,
                    f: info.f,
                    grad_norm: info.grad_norm,
                    step_norm: info.step_norm,
                    mu: info.mu,
                    rho: info.rho,
                    batch_size: batch.len(),
                });
                if iter % schedule.full_eval_period == 0 {
                    let f_full = obj.value_batch(opt.theta(), &full);
                    if f_full > last_full - schedule.stall_tolerance {
                        let grown = (d as f64 * schedule.growth_factor).ceil() as usize;
                        d = grown.min(d_max);
                    }
                    last_full = f_full;
                }
            }
            start = end;
        }
        let f_train = obj.value_batch(opt.theta(), &full);
        let (f_test, accuracy) = match test_obj {
            Some(t) => (
                Some(t.value_batch(opt.theta(), &test_indices)),
                t.accuracy(opt.theta(), &test_indices),
            ),
            None => (None, obj.accuracy(opt.theta(), &full)),
        };
        trace.epochs.push(EpochRecord {
            epoch,
            f_train,
            f_test,
            accuracy,
            batch_size: epoch_d,
            wall_seconds: t0.elapsed().as_secs_f64(),
        });
    }
    Ok(trace)
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub memory: usize,
    pub max_iters_per_batch: usize,
    pub batch: usize,
    pub f_train: f64,
    pub f_test: Option<f64>,
    pub accuracy: Option<f64>,
}

/// Cartesian-product sweep over history size, per-batch iteration count and
/// batch size. Every cell gets a fresh optimizer from the factory and the
/// same seed, so two cells with identical settings produce identical traces.
pub fn hyperparameter_sweep(
    obj: &dyn Objective,
    test_obj: Option<&dyn Objective>,
    opt_factory: &dyn Fn(usize) -> Result<Box<dyn Optimizer>>,
    base: &BatchSchedule,
    memories: &[usize],
    max_iters: &[usize],
    batches: &[usize],
    epochs: usize,
) -> Result<Vec<SweepCell>> {
    if memories.is_empty() || max_iters.is_empty() || batches.is_empty() {
        return Err(Error::invalid("sweep: every grid axis needs at least one value"));
    }
    let mut cells = Vec::with_capacity(memories.len() * max_iters.len() * batches.len());
    for &m in memories {
        for &mi in max_iters {
            for &b in batches {
                let mut opt = opt_factory(m)?;
                let schedule = BatchSchedule {
                    initial_batch: b,
                    max_iters_per_batch: mi,
                    ..base.clone()
                };
                let trace = run_epochs(obj, test_obj, opt.as_mut(), &schedule, epochs)?;
                let last = trace
                    .final_epoch()
                    .ok_or_else(|| Error::invalid("sweep: zero epochs requested"))?;
                cells.push(SweepCell {
                    memory: m,
                    max_iters_per_batch: mi,
                    batch: b,
                    f_train: last.f_train,
                    f_test: last.f_test,
                    accuracy: last.accuracy,
                });
            }
        }
    }
    Ok(cells)
}
