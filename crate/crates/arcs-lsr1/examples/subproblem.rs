//! The cubic-regularized subproblem has a closed-form solution in the
//! eigenbasis of the memory. This example solves one scalar instance with
//! negative curvature and verifies it against a brute-force grid.

use arcs_lsr1::subproblem::scalar_cubic_min;

fn main() {
    let (gbar, lam, mu) = (0.3, -0.8, 0.5);
    let s = scalar_cubic_min(gbar, lam, mu).unwrap();
    let phi = |t: f64| gbar * t + 0.5 * lam * t * t + mu / 3.0 * t.abs().powi(3);
    println!("closed form: s* = {s:.6}, model value {:.6}", phi(s));

    let mut best = (0.0, f64::INFINITY);
    for i in 0..=200_000 {
        let t = -5.0 + 10.0 * i as f64 / 200_000.0;
        if phi(t) < best.1 {
            best = (t, phi(t));
        }
    }
    println!("grid search: s* = {:.6}, model value {:.6}", best.0, best.1);
}
