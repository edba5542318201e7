//! Demonstrates the monotone batch-growth rule: when the periodic full-loss
//! check stops improving, the batch doubles until it covers the dataset and
//! the loop reduces to deterministic full-batch steps.

use arcs_lsr1::baselines::BaselineConfig;
use arcs_lsr1::problems::Objective;
use arcs_lsr1::stochastic::{run_epochs, BatchSchedule};
use ndarray::Array1;

/// A flat objective: no step ever improves the loss, so every check stalls.
struct Plateau;

impl Objective for Plateau {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, _: &Array1<f64>) -> f64 {
        1.0
    }
    fn gradient(&self, _: &Array1<f64>) -> Array1<f64> {
        Array1::zeros(2)
    }
    fn dataset_size(&self) -> Option<usize> {
        Some(256)
    }
}

fn main() {
    let mut opt = BaselineConfig::sgd_momentum().build(Array1::zeros(2)).unwrap();
    let schedule = BatchSchedule {
        initial_batch: 8,
        full_eval_period: 4,
        ..BatchSchedule::default()
    };
    let trace = run_epochs(&Plateau, None, opt.as_mut(), &schedule, 8).unwrap();
    for e in &trace.epochs {
        println!("epoch {}  batch size {}", e.epoch, e.batch_size);
    }
}
