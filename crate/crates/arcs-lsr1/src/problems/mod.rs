//! Objective-function suite: analytic test functions, logistic regression,
//! small fully-connected networks with hand-derived backpropagation, and
//! dataset loading.

mod data;
mod logistic;
mod mlp;

pub use data::{load_idx, load_iris, synth_blobs, synth_digits, BlobSpec, Dataset, Targets};
pub use logistic::LogisticRegression;
pub use mlp::{Activation, Loss, Mlp, MlpSpec};

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// The value/gradient interface every problem implements. Objectives are
/// immutable after construction; value and gradient calls are re-entrant.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, theta: &Array1<f64>) -> f64;
    fn gradient(&self, theta: &Array1<f64>) -> Array1<f64>;

    /// Number of samples behind the objective, when it is an empirical sum.
    fn dataset_size(&self) -> Option<usize> {
        None
    }

    /// Mean loss over the given sample indices. Defaults to the full value
    /// for objectives without a batch decomposition.
    fn value_batch(&self, theta: &Array1<f64>, batch: &[usize]) -> f64 {
        let _ = batch;
        self.value(theta)
    }

    fn gradient_batch(&self, theta: &Array1<f64>, batch: &[usize]) -> Array1<f64> {
        let _ = batch;
        self.gradient(theta)
    }

    /// Classification accuracy over the given indices, when meaningful.
    fn accuracy(&self, theta: &Array1<f64>, indices: &[usize]) -> Option<f64> {
        let _ = (theta, indices);
        None
    }
}

/// Restriction of an objective to a fixed mini-batch, presented as a full
/// objective so any optimizer can run on it unchanged.
pub struct BatchView<'a> {
    pub obj: &'a dyn Objective,
    pub batch: &'a [usize],
}

impl Objective for BatchView<'_> {
    fn dim(&self) -> usize {
        self.obj.dim()
    }
    fn value(&self, theta: &Array1<f64>) -> f64 {
        self.obj.value_batch(theta, self.batch)
    }
    fn gradient(&self, theta: &Array1<f64>) -> Array1<f64> {
        self.obj.gradient_batch(theta, self.batch)
    }
}

/// A fixed subset of an empirical objective (e.g. the train or test rows of
/// a split dataset), re-exposed as a complete objective with its own sample
/// numbering so the mini-batch driver can shuffle within it.
pub struct Subset {
    obj: std::sync::Arc<dyn Objective>,
    indices: Vec<usize>,
}

impl Subset {
    pub fn new(obj: std::sync::Arc<dyn Objective>, indices: Vec<usize>) -> Result<Self> {
        let n = obj
            .dataset_size()
            .ok_or_else(|| Error::invalid("subset: objective has no samples"))?;
        if indices.iter().any(|&i| i >= n) {
            return Err(Error::invalid("subset: index out of range"));
        }
        Ok(Subset { obj, indices })
    }

    fn remap(&self, batch: &[usize]) -> Vec<usize> {
        batch.iter().map(|&i| self.indices[i]).collect()
    }
}

impl Objective for Subset {
    fn dim(&self) -> usize {
        self.obj.dim()
    }
    fn value(&self, theta: &Array1<f64>) -> f64 {
        self.obj.value_batch(theta, &self.indices)
    }
    fn gradient(&self, theta: &Array1<f64>) -> Array1<f64> {
        self.obj.gradient_batch(theta, &self.indices)
    }
    fn dataset_size(&self) -> Option<usize> {
        Some(self.indices.len())
    }
    fn value_batch(&self, theta: &Array1<f64>, batch: &[usize]) -> f64 {
        self.obj.value_batch(theta, &self.remap(batch))
    }
    fn gradient_batch(&self, theta: &Array1<f64>, batch: &[usize]) -> Array1<f64> {
        self.obj.gradient_batch(theta, &self.remap(batch))
    }
    fn accuracy(&self, theta: &Array1<f64>, indices: &[usize]) -> Option<f64> {
        self.obj.accuracy(theta, &self.remap(indices))
    }
}

/// Quadratic ½ xᵀA x − bᵀx + c with either a diagonal or a dense matrix.
pub enum QuadraticMatrix {
    Diagonal(Array1<f64>),
    Dense(Array2<f64>),
}

pub struct Quadratic {
    a: QuadraticMatrix,
    b: Array1<f64>,
    c: f64,
}

impl Quadratic {
    pub fn new(a: QuadraticMatrix, b: Array1<f64>, c: f64) -> Result<Self> {
        let n = b.len();
        match &a {
            QuadraticMatrix::Diagonal(d) if d.len() != n => {
                return Err(Error::invalid("quadratic: diagonal length mismatch"))
            }
            QuadraticMatrix::Dense(m) if m.dim() != (n, n) => {
                return Err(Error::invalid("quadratic: matrix shape mismatch"))
            }
            _ => {}
        }
        Ok(Quadratic { a, b, c })
    }

    /// ½‖x − center‖², the standard shifted-sphere instance.
    pub fn shifted_sphere(center: Array1<f64>) -> Self {
        let n = center.len();
        let c = 0.5 * center.dot(&center);
        Quadratic { a: QuadraticMatrix::Diagonal(Array1::ones(n)), b: center, c }
    }

    fn apply_a(&self, x: &Array1<f64>) -> Array1<f64> {
        match &self.a {
            QuadraticMatrix::Diagonal(d) => x * d,
            QuadraticMatrix::Dense(m) => m.dot(x),
        }
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn value(&self, x: &Array1<f64>) -> f64 {
        0.5 * x.dot(&self.apply_a(x)) - self.b.dot(x) + self.c
    }
    fn gradient(&self, x: &Array1<f64>) -> Array1<f64> {
        self.apply_a(x) - &self.b
    }
}

/// Generalized Rosenbrock function in n ≥ 2 dimensions.
pub struct Rosenbrock {
    n: usize,
}

impl Rosenbrock {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("rosenbrock: need n >= 2"));
        }
        Ok(Rosenbrock { n })
    }
}

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &Array1<f64>) -> f64 {
        let mut f = 0.0;
        for i in 0..self.n - 1 {
            let t = x[i + 1] - x[i] * x[i];
            f += 100.0 * t * t + (1.0 - x[i]) * (1.0 - x[i]);
        }
        f
    }
    fn gradient(&self, x: &Array1<f64>) -> Array1<f64> {
        let mut g = Array1::zeros(self.n);
        for i in 0..self.n - 1 {
            let t = x[i + 1] - x[i] * x[i];
            g[i] += -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
            g[i + 1] += 200.0 * t;
        }
        g
    }
}

/// Central finite-difference conformance check shared by every objective:
/// at `points` random points the analytic gradient must match central
/// differences (h = 1e-6·max(1, |θ_i|)) within the given relative error.
/// Returns the worst relative error observed.
pub fn check_gradient(
    obj: &dyn Objective,
    seed: u64,
    points: usize,
    rel_tol: f64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = obj.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let theta = Array1::from_shape_fn(n, |_| rng.gen_range(-0.5..0.5));
        let g = obj.gradient(&theta);
        let g_norm = g.dot(&g).sqrt();
        let mut fd = Array1::zeros(n);
        for i in 0..n {
            let h = 1e-6 * theta[i].abs().max(1.0);
            let mut tp = theta.clone();
            tp[i] += h;
            let mut tm = theta.clone();
            tm[i] -= h;
            fd[i] = (obj.value(&tp) - obj.value(&tm)) / (2.0 * h);
        }
        let diff = (&g - &fd).mapv(f64::abs);
        let denom = g_norm.max(1.0);
        let rel = diff.iter().cloned().fold(0.0, f64::max) / denom;
        worst = worst.max(rel);
        if rel > rel_tol {
            return Err(Error::numeric(format!(
                "gradient conformance failed: relative error {rel:.3e} > {rel_tol:.1e}"
            )));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn quadratic_identity_values() {
        let q = Quadratic::new(
            QuadraticMatrix::Diagonal(Array1::ones(3)),
            Array1::zeros(3),
            0.0,
        )
        .unwrap();
        let e1 = array![1.0, 0.0, 0.0];
        assert!((q.value(&e1) - 0.5).abs() < 1e-15);
        let g = q.gradient(&e1);
        assert!((g[0] - 1.0).abs() < 1e-15 && g[1] == 0.0);
    }

    #[test]
    fn rosenbrock_minimum() {
        let r = Rosenbrock::new(2).unwrap();
        let x = array![1.0, 1.0];
        assert_eq!(r.value(&x), 0.0);
        assert!(r.gradient(&x).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rosenbrock_rejects_n1() {
        assert!(Rosenbrock::new(1).is_err());
    }

    #[test]
    fn analytic_gradients_conform() {
        let q = Quadratic::new(
            QuadraticMatrix::Dense(array![[2.0, 0.5], [0.5, 3.0]]),
            array![1.0, -1.0],
            0.3,
        )
        .unwrap();
        check_gradient(&q, 1, 10, 1e-5).unwrap();
        let r = Rosenbrock::new(4).unwrap();
        check_gradient(&r, 2, 10, 1e-5).unwrap();
    }
}
