//! Minimize a convex quadratic with the cubic-regularized L-SR1 solver and
//! print the iteration trace.

use arcs_lsr1::problems::{Quadratic, QuadraticMatrix};
use arcs_lsr1::solver::{minimize, ArcsConfig, ArcsSolver};
use ndarray::Array1;

fn main() {
    let n = 50;
    let cond: f64 = 10.0;
    let diag = Array1::from_shape_fn(n, |i| cond.powf(i as f64 / (n - 1) as f64));
    // Minimizer at the all-ones vector.
    let obj = Quadratic::new(QuadraticMatrix::Diagonal(diag.clone()), diag, 0.0).unwrap();

    let mut opt = ArcsSolver::new(ArcsConfig::default(), Array1::zeros(n)).unwrap();
    let res = minimize(&mut opt, &obj, 200, 1e-6).unwrap();

    for (i, step) in res.trace.iter().enumerate().step_by(5) {
        println!(
            "iter {i:3}  f = {:+.6e}  |g| = {:.3e}  mu = {:.3e}",
            step.f,
            step.grad_norm,
            step.mu.unwrap()
        );
    }
    println!(
        "\nstopped after {} iterations ({:?}), |g| = {:.3e}",
        res.iters, res.stop, res.grad_norm
    );
}
