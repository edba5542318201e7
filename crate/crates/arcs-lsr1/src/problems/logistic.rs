//! Multinomial logistic regression with optional L2 weight penalty.
//! Parameters are the C×d weight matrix (row-major) followed by C biases.

use ndarray::Array1;

use super::{Dataset, Objective, Targets};
use crate::error::{Error, Result};

pub struct LogisticRegression {
    dataset: Dataset,
    classes: usize,
    features: usize,
    l2: f64,
}

impl LogisticRegression {
    pub fn new(dataset: Dataset, l2: f64) -> Result<Self> {
        let classes = dataset
            .num_classes()
            .ok_or_else(|| Error::invalid("logistic regression needs class targets"))?;
        if l2 < 0.0 {
            return Err(Error::invalid("l2 penalty must be nonnegative"));
        }
        let features = dataset.feature_dim();
        Ok(LogisticRegression { dataset, classes, features, l2 })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    fn label(&self, i: usize) -> usize {
        match &self.dataset.targets {
            Targets::Classes(c) => c[i],
            Targets::Vectors(_) => unreachable!(),
        }
    }

    fn logits(&self, theta: &Array1<f64>, x: &Array1<f64>) -> Vec<f64> {
        let d = self.features;
        (0..self.classes)
            .map(|c| {
                let mut z = theta[self.classes * d + c];
                for j in 0..d {
                    z += theta[c * d + j] * x[j];
                }
                z
            })
            .collect()
    }

    fn softmax(logits: &[f64]) -> Vec<f64> {
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
        let sum: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / sum).collect()
    }

    fn l2_term(&self, theta: &Array1<f64>) -> f64 {
        let w = &theta.as_slice().unwrap()[..self.classes * self.features];
        0.5 * self.l2 * w.iter().map(|v| v * v).sum::<f64>()
    }
}

impl Objective for LogisticRegression {
    fn dim(&self) -> usize {
        self.classes * self.features + self.classes
    }

    fn value(&self, theta: &Array1<f64>) -> f64 {
        let all: Vec<usize> = (0..self.dataset.len()).collect();
        self.value_batch(theta, &all)
    }

    fn gradient(&self, theta: &Array1<f64>) -> Array1<f64> {
        let all: Vec<usize> = (0..self.dataset.len()).collect();
        self.gradient_batch(theta, &all)
    }

    fn dataset_size(&self) -> Option<usize> {
        Some(self.dataset.len())
    }

    fn value_batch(&self, theta: &Array1<f64>, batch: &[usize]) -> f64 {
        let mut loss = 0.0;
        for &i in batch {
            let probs = Self::softmax(&self.logits(theta, &self.dataset.inputs[i]));
            loss -= probs[self.label(i)].max(1e-300).ln();
        }
        loss / batch.len().max(1) as f64 + self.l2_term(theta)
    }

    fn gradient_batch(&self, theta: &Array1<f64>, batch: &[usize]) -> Array1<f64> {
        let d = self.features;
        let mut g = Array1::zeros(self.dim());
        for &i in batch {
            let x = &self.dataset.inputs[i];
            let probs = Self::softmax(&self.logits(theta, x));
            for c in 0..self.classes {
                let err = probs[c] - if c == self.label(i) { 1.0 } else { 0.0 };
                for j in 0..d {
                    g[c * d + j] += err * x[j];
                }
                g[self.classes * d + c] += err;
            }
        }
        let scale = 1.0 / batch.len().max(1) as f64;
        g.mapv_inplace(|v| v * scale);
        for c in 0..self.classes {
            for j in 0..d {
                g[c * d + j] += self.l2 * theta[c * d + j];
            }
        }
        g
    }

    fn accuracy(&self, theta: &Array1<f64>, indices: &[usize]) -> Option<f64> {
        if indices.is_empty() {
            return None;
        }
        let mut correct = 0usize;
        for &i in indices {
            let logits = self.logits(theta, &self.dataset.inputs[i]);
            let pred = logits
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(c, _)| c)
                .unwrap();
            if pred == self.label(i) {
                correct += 1;
            }
        }
        Some(correct as f64 / indices.len() as f64)
    }
}
