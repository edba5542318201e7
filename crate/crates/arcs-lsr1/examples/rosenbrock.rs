//! The classic curved-valley test: Rosenbrock in two dimensions from the
//! standard start (-1.2, 1).

use arcs_lsr1::problems::Rosenbrock;
use arcs_lsr1::solver::{minimize, ArcsConfig, ArcsSolver};
use ndarray::array;

fn main() {
    let obj = Rosenbrock::new(2).unwrap();
    let mut opt = ArcsSolver::new(ArcsConfig::default(), array![-1.2, 1.0]).unwrap();
    let res = minimize(&mut opt, &obj, 1000, 0.0).unwrap();
    println!(
        "f = {:.3e} at ({:.6}, {:.6}) after {} iterations ({:?})",
        res.f, res.theta[0], res.theta[1], res.iters, res.stop
    );
}
