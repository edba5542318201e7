//! Train the 2953-parameter flower classifier with mini-batches and print
//! per-epoch train loss and held-out accuracy.
//!
//! Data directory defaults to `data/`; override with ARCS_DATA_DIR.

use arcs_lsr1::bench::{build_problem, ProblemSpec};
use arcs_lsr1::solver::{ArcsConfig, ArcsSolver};
use arcs_lsr1::stochastic::{run_epochs, BatchSchedule};

fn main() {
    let seed = 0;
    let spec = ProblemSpec {
        name: "iris_mlp".into(),
        n: None,
        cond: None,
        count: None,
        data: None,
        l2: None,
    };
    let prob = build_problem(&spec, seed).unwrap();
    let mut opt = ArcsSolver::new(ArcsConfig::default(), prob.theta0.clone()).unwrap();
    let schedule = BatchSchedule {
        initial_batch: 32,
        max_iters_per_batch: 10,
        seed,
        ..BatchSchedule::default()
    };
    let trace =
        run_epochs(prob.train.as_ref(), prob.test.as_deref(), &mut opt, &schedule, 20).unwrap();
    for e in &trace.epochs {
        println!(
            "epoch {:2}  train loss {:.4}  test accuracy {:.3}  batch {}",
            e.epoch,
            e.f_train,
            e.accuracy.unwrap_or(f64::NAN),
            e.batch_size
        );
    }
}
