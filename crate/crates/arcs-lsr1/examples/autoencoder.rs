//! Reconstruction benchmark: a 64-32-64 autoencoder on synthetic digit
//! glyphs, cubic-regularized L-SR1 against SGD with momentum at equal
//! epochs and seed.

use arcs_lsr1::baselines::BaselineConfig;
use arcs_lsr1::bench::{build_problem, ProblemSpec};
use arcs_lsr1::solver::{ArcsConfig, ArcsSolver, Optimizer};
use arcs_lsr1::stochastic::{run_epochs, BatchSchedule};

fn final_mse(seed: u64, use_sr1: bool, epochs: usize) -> f64 {
    let spec = ProblemSpec {
        name: "autoencoder_digits".into(),
        n: None,
        cond: None,
        count: Some(1000),
        data: None,
        l2: None,
    };
    let prob = build_problem(&spec, seed).unwrap();
    let mut opt: Box<dyn Optimizer> = if use_sr1 {
        Box::new(ArcsSolver::new(ArcsConfig::default(), prob.theta0.clone()).unwrap())
    } else {
        BaselineConfig::sgd_momentum().build(prob.theta0.clone()).unwrap()
    };
    let schedule = BatchSchedule {
        initial_batch: 128,
        max_iters_per_batch: if use_sr1 { 10 } else { 1 },
        seed,
        ..BatchSchedule::default()
    };
    let trace =
        run_epochs(prob.train.as_ref(), prob.test.as_deref(), opt.as_mut(), &schedule, epochs)
            .unwrap();
    trace.final_epoch().unwrap().f_train
}

fn main() {
    let epochs = 50;
    for seed in [0u64, 1, 2] {
        let ours = final_mse(seed, true, epochs);
        let sgd = final_mse(seed, false, epochs);
        println!("seed {seed}: arcs_lsr1 MSE {ours:.6}  sgd_momentum MSE {sgd:.6}");
    }
}
