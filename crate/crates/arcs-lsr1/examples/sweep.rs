//! Small hyperparameter sweep over history size, per-batch iterations and
//! batch size on the synthetic two-blob logistic problem.

use arcs_lsr1::problems::{synth_blobs, BlobSpec, LogisticRegression, Objective, Subset};
use arcs_lsr1::solver::{ArcsConfig, ArcsSolver, Optimizer};
use arcs_lsr1::stochastic::{hyperparameter_sweep, BatchSchedule};
use ndarray::Array1;
use std::sync::Arc;

fn main() {
    let data = synth_blobs(&BlobSpec::default()).unwrap();
    let (train_idx, test_idx) = (data.train_idx.clone(), data.test_idx.clone());
    let obj: Arc<dyn Objective> = Arc::new(LogisticRegression::new(data, 1e-4).unwrap());
    let train = Subset::new(obj.clone(), train_idx).unwrap();
    let test = Subset::new(obj.clone(), test_idx).unwrap();
    let n = obj.dim();

    let factory = move |memory: usize| -> arcs_lsr1::Result<Box<dyn Optimizer>> {
        let cfg = ArcsConfig { memory, ..ArcsConfig::default() };
        Ok(Box::new(ArcsSolver::new(cfg, Array1::zeros(n))?))
    };
    let base = BatchSchedule { initial_batch: 16, seed: 0, ..BatchSchedule::default() };
    let cells = hyperparameter_sweep(
        &train,
        Some(&test),
        &factory,
        &base,
        &[5, 10],
        &[1, 10],
        &[16, 64],
        10,
    )
    .unwrap();

    println!("{:>6} {:>9} {:>5} {:>10} {:>9}", "memory", "max_iters", "batch", "f_train", "accuracy");
    for c in &cells {
        println!(
            "{:>6} {:>9} {:>5} {:>10.5} {:>9.3}",
            c.memory,
            c.max_iters_per_batch,
            c.batch,
            c.f_train,
            c.accuracy.unwrap_or(f64::NAN)
        );
    }
}
