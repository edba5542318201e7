//! Run every optimizer on the same deterministic problem and tabulate how
//! far each gets in a fixed iteration budget.

use arcs_lsr1::baselines::BaselineConfig;
use arcs_lsr1::problems::Rosenbrock;
use arcs_lsr1::solver::{minimize, ArcsConfig, ArcsSolver, Optimizer};
use ndarray::array;

fn main() {
    let obj = Rosenbrock::new(2).unwrap();
    let theta0 = array![-1.2, 1.0];
    let budget = 500;

    let mut runs: Vec<Box<dyn Optimizer>> = vec![
        Box::new(ArcsSolver::new(ArcsConfig::default(), theta0.clone()).unwrap()),
        BaselineConfig::lbfgs().build(theta0.clone()).unwrap(),
        BaselineConfig::adam().build(theta0.clone()).unwrap(),
        BaselineConfig::sgd_momentum().build(theta0.clone()).unwrap(),
        BaselineConfig::rmsprop().build(theta0.clone()).unwrap(),
        BaselineConfig::adagrad().build(theta0.clone()).unwrap(),
    ];

    println!("{:<14} {:>6} {:>12} {:>12}", "method", "iters", "f_final", "|g|_final");
    for opt in runs.iter_mut() {
        let name = opt.name();
        let res = minimize(opt.as_mut(), &obj, budget, 1e-10).unwrap();
        println!("{:<14} {:>6} {:>12.3e} {:>12.3e}", name, res.iters, res.f, res.grad_norm);
    }
}
