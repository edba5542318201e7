//! Small fully-connected networks with hand-derived backpropagation.
//! Classifier (softmax cross-entropy on logits) or autoencoder/regression
//! (elementwise-mean MSE with a sigmoid output layer).

use ndarray::Array1;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{Dataset, Objective, Targets};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    SoftmaxCrossEntropy,
    Mse,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MlpSpec {
    /// Layer widths including input and output, e.g. [4, 50, 50, 3].
    pub widths: Vec<usize>,
    pub activation: Activation,
    pub loss: Loss,
    pub seed: u64,
}

impl MlpSpec {
    /// Three fully connected layers sized to exactly 2953 parameters for the
    /// four-feature, three-class flower classification task.
    pub fn iris(seed: u64) -> Self {
        let spec = MlpSpec {
            widths: vec![4, 50, 50, 3],
            activation: Activation::Relu,
            loss: Loss::SoftmaxCrossEntropy,
            seed,
        };
        assert_eq!(spec.param_count(), 2953);
        spec
    }

    pub fn param_count(&self) -> usize {
        self.widths.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }
}

pub struct Mlp {
    spec: MlpSpec,
    dataset: Dataset,
}

impl Mlp {
    pub fn new(spec: MlpSpec, dataset: Dataset) -> Result<Self> {
        if spec.widths.len() < 2 {
            return Err(Error::invalid("mlp: need at least input and output widths"));
        }
        if dataset.feature_dim() != spec.widths[0] {
            return Err(Error::invalid(format!(
                "mlp: input width {} != feature dim {}",
                spec.widths[0],
                dataset.feature_dim()
            )));
        }
        let out = *spec.widths.last().unwrap();
        match (&dataset.targets, spec.loss) {
            (Targets::Classes(c), Loss::SoftmaxCrossEntropy) => {
                let max = c.iter().max().copied().unwrap_or(0);
                if max >= out {
                    return Err(Error::invalid(format!(
                        "mlp: class {max} out of range for output width {out}"
                    )));
                }
            }
            (Targets::Vectors(v), Loss::Mse) => {
                if v.first().map(|t| t.len()) != Some(out) {
                    return Err(Error::invalid("mlp: target vector length != output width"));
                }
            }
            _ => return Err(Error::invalid("mlp: loss does not match target kind")),
        }
        Ok(Mlp { spec, dataset })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    /// Seeded uniform initialization in [-0.05, 0.05].
    pub fn init_params(&self) -> Array1<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
        Array1::from_shape_fn(self.spec.param_count(), |_| rng.gen_range(-0.05..0.05))
    }

    fn layer_count(&self) -> usize {
        self.spec.widths.len() - 1
    }

    fn layer_offset(&self, layer: usize) -> usize {
        self.spec.widths[..=layer].windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    fn activate(&self, z: f64) -> f64 {
        match self.spec.activation {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }

    fn activate_deriv(&self, z: f64, a: f64) -> f64 {
        match self.spec.activation {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Tanh => 1.0 - a * a,
        }
    }

    /// Forward pass keeping pre-activations and activations for backprop.
    fn forward(&self, theta: &Array1<f64>, x: &Array1<f64>) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let l = self.layer_count();
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(l);
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(l + 1);
        acts.push(x.to_vec());
        let mut offset = 0usize;
        for layer in 0..l {
            let n_in = self.spec.widths[layer];
            let n_out = self.spec.widths[layer + 1];
            let prev = &acts[layer];
            let mut z = vec![0.0; n_out];
            for o in 0..n_out {
                let mut acc = theta[offset + n_in * n_out + o];
                let wrow = offset + o * n_in;
                for i in 0..n_in {
                    acc += theta[wrow + i] * prev[i];
                }
                z[o] = acc;
            }
            let last = layer == l - 1;
            let a: Vec<f64> = if last {
                match self.spec.loss {
                    Loss::SoftmaxCrossEntropy => z.clone(), // logits
                    Loss::Mse => z.iter().map(|&v| 1.0 / (1.0 + (-v).exp())).collect(),
                }
            } else {
                z.iter().map(|&v| self.activate(v)).collect()
            };
            zs.push(z);
            acts.push(a);
            offset += (n_in + 1) * n_out;
        }
        (zs, acts)
    }

    fn sample_loss(&self, output: &[f64], i: usize) -> f64 {
        match (&self.dataset.targets, self.spec.loss) {
            (Targets::Classes(c), Loss::SoftmaxCrossEntropy) => {
                let m = output.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lse = m + output.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
                lse - output[c[i]]
            }
            (Targets::Vectors(t), Loss::Mse) => {
                let t = &t[i];
                output
                    .iter()
                    .zip(t.iter())
                    .map(|(o, t)| (o - t) * (o - t))
                    .sum::<f64>()
                    / output.len() as f64
            }
            _ => unreachable!(),
        }
    }

    /// dL/d(output pre-activation) for one sample.
    fn output_delta(&self, output: &[f64], zs_last: &[f64], i: usize) -> Vec<f64> {
        match (&self.dataset.targets, self.spec.loss) {
            (Targets::Classes(c), Loss::SoftmaxCrossEntropy) => {
                let m = output.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = output.iter().map(|z| (z - m).exp()).collect();
                let sum: f64 = exps.iter().sum();
                let mut delta: Vec<f64> = exps.iter().map(|e| e / sum).collect();
                delta[c[i]] -= 1.0;
                delta
            }
            (Targets::Vectors(t), Loss::Mse) => {
                let _ = zs_last;
                let t = &t[i];
                let n = output.len() as f64;
                // Chain through the sigmoid output.
                output
                    .iter()
                    .zip(t.iter())
                    .map(|(o, t)| 2.0 * (o - t) / n * o * (1.0 - o))
                    .collect()
            }
            _ => unreachable!(),
        }
    }

    fn accumulate_sample_gradient(
        &self,
        theta: &Array1<f64>,
        i: usize,
        grad: &mut Array1<f64>,
    ) -> f64 {
        let l = self.layer_count();
        let (zs, acts) = self.forward(theta, &self.dataset.inputs[i]);
        let loss = self.sample_loss(&acts[l], i);
        let mut delta = self.output_delta(&acts[l], &zs[l - 1], i);
        for layer in (0..l).rev() {
            let n_in = self.spec.widths[layer];
            let n_out = self.spec.widths[layer + 1];
            let offset = self.layer_offset(layer);
            let prev = &acts[layer];
            for o in 0..n_out {
                let wrow = offset + o * n_in;
                for inp in 0..n_in {
                    grad[wrow + inp] += delta[o] * prev[inp];
                }
                grad[offset + n_in * n_out + o] += delta[o];
            }
            if layer > 0 {
                let mut next_delta = vec![0.0; n_in];
                for inp in 0..n_in {
                    let mut acc = 0.0;
                    for o in 0..n_out {
                        acc += theta[offset + o * n_in + inp] * delta[o];
                    }
                    next_delta[inp] =
                        acc * self.activate_deriv(zs[layer - 1][inp], acts[layer][inp]);
                }
                delta = next_delta;
            }
        }
        loss
    }
}

impl Objective for Mlp {
    fn dim(&self) -> usize {
        self.spec.param_count()
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
        let l = self.layer_count();
        let mut loss = 0.0;
        for &i in batch {
            let (_, acts) = self.forward(theta, &self.dataset.inputs[i]);
            loss += self.sample_loss(&acts[l], i);
        }
        loss / batch.len().max(1) as f64
    }

    fn gradient_batch(&self, theta: &Array1<f64>, batch: &[usize]) -> Array1<f64> {
        let mut grad = Array1::zeros(self.dim());
        for &i in batch {
            self.accumulate_sample_gradient(theta, i, &mut grad);
        }
        let scale = 1.0 / batch.len().max(1) as f64;
        grad.mapv_inplace(|v| v * scale);
        grad
    }

    fn accuracy(&self, theta: &Array1<f64>, indices: &[usize]) -> Option<f64> {
        let classes = match &self.dataset.targets {
            Targets::Classes(c) => c,
            Targets::Vectors(_) => return None,
        };
        if indices.is_empty() {
            return None;
        }
        let l = self.layer_count();
        let mut correct = 0usize;
        for &i in indices {
            let (_, acts) = self.forward(theta, &self.dataset.inputs[i]);
            let out = &acts[l];
            let pred = out
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(c, _)| c)
                .unwrap();
            if pred == classes[i] {
                correct += 1;
            }
        }
        Some(correct as f64 / indices.len() as f64)
    }
}
