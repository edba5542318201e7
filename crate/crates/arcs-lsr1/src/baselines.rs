//! Reference optimizers for the comparison harness: SGD with momentum,
//! AdaGrad, RMSProp, Adam, and line-search L-BFGS.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::problems::Objective;
use crate::solver::{Optimizer, StepInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SgdMomentum,
    Adagrad,
    Rmsprop,
    Adam,
    Lbfgs,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::SgdMomentum => "sgd_momentum",
            Method::Adagrad => "adagrad",
            Method::Rmsprop => "rmsprop",
            Method::Adam => "adam",
            Method::Lbfgs => "lbfgs",
        }
    }
}

/// Hyperparameters for every baseline; only the fields the chosen method
/// consults are validated and used.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub method: Method,
    pub learning_rate: f64,
    pub momentum: f64,
    pub eps_perturbation: f64,
    pub alpha_rms: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub lbfgs_memory: usize,
    pub lbfgs_tol: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            method: Method::SgdMomentum,
            learning_rate: 0.1,
            momentum: 0.9,
            eps_perturbation: 1e-8,
            alpha_rms: 0.99,
            beta1: 0.9,
            beta2: 0.999,
            lbfgs_memory: 10,
            lbfgs_tol: 1e-9,
        }
    }
}

impl BaselineConfig {
    /// Momentum 0.9, learning rate 0.1.
    pub fn sgd_momentum() -> Self {
        BaselineConfig { method: Method::SgdMomentum, ..Default::default() }
    }

    /// Learning rate 1e-2, perturbation 1e-10, accumulator starts at 0.
    pub fn adagrad() -> Self {
        BaselineConfig {
            method: Method::Adagrad,
            learning_rate: 1e-2,
            eps_perturbation: 1e-10,
            ..Default::default()
        }
    }

    /// Learning rate 1e-2, α = 0.99, perturbation 1e-8.
    pub fn rmsprop() -> Self {
        BaselineConfig {
            method: Method::Rmsprop,
            learning_rate: 1e-2,
            eps_perturbation: 1e-8,
            ..Default::default()
        }
    }

    /// Learning rate 1e-3, β = (0.9, 0.999), perturbation 1e-6.
    pub fn adam() -> Self {
        BaselineConfig {
            method: Method::Adam,
            learning_rate: 1e-3,
            eps_perturbation: 1e-6,
            ..Default::default()
        }
    }

    /// Unit initial step with backtracking, tolerance 1e-9.
    pub fn lbfgs() -> Self {
        BaselineConfig { method: Method::Lbfgs, learning_rate: 1.0, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("baseline: learning_rate must be positive"));
        }
        match self.method {
            Method::SgdMomentum => {
                if !(0.0..1.0).contains(&self.momentum) {
                    return Err(Error::invalid("baseline: momentum must be in [0, 1)"));
                }
            }
            Method::Adagrad | Method::Rmsprop | Method::Adam => {
                if !(self.eps_perturbation > 0.0) {
                    return Err(Error::invalid("baseline: eps_perturbation must be positive"));
                }
                if self.method == Method::Rmsprop && !(0.0 < self.alpha_rms && self.alpha_rms < 1.0)
                {
                    return Err(Error::invalid("baseline: alpha_rms must be in (0, 1)"));
                }
                if self.method == Method::Adam
                    && !((0.0 < self.beta1 && self.beta1 < 1.0)
                        && (0.0 < self.beta2 && self.beta2 < 1.0))
                {
                    return Err(Error::invalid("baseline: betas must be in (0, 1)"));
                }
            }
            Method::Lbfgs => {
                if self.lbfgs_memory == 0 {
                    return Err(Error::invalid("baseline: lbfgs_memory must be at least 1"));
                }
                if !(self.lbfgs_tol > 0.0) {
                    return Err(Error::invalid("baseline: lbfgs_tol must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn build(&self, theta0: Array1<f64>) -> Result<Box<dyn Optimizer>> {
        self.validate()?;
        Ok(match self.method {
            Method::Lbfgs => Box::new(Lbfgs::new(self.clone(), theta0)?),
            _ => Box::new(FirstOrder::new(self.clone(), theta0)?),
        })
    }
}

/// SGD-with-momentum, AdaGrad, RMSProp and Adam share one state struct;
/// unused accumulators stay zero.
pub struct FirstOrder {
    cfg: BaselineConfig,
    theta: Array1<f64>,
    velocity: Array1<f64>,
    accum: Array1<f64>,
    moment1: Array1<f64>,
    moment2: Array1<f64>,
    t: u64,
}

impl FirstOrder {
    pub fn new(cfg: BaselineConfig, theta0: Array1<f64>) -> Result<Self> {
        cfg.validate()?;
        if cfg.method == Method::Lbfgs {
            return Err(Error::invalid("FirstOrder does not run lbfgs"));
        }
        let n = theta0.len();
        Ok(FirstOrder {
            cfg,
            theta: theta0,
            velocity: Array1::zeros(n),
            accum: Array1::zeros(n),
            moment1: Array1::zeros(n),
            moment2: Array1::zeros(n),
            t: 0,
        })
    }
}

impl Optimizer for FirstOrder {
    fn theta(&self) -> &Array1<f64> {
        &self.theta
    }

    fn name(&self) -> &'static str {
        self.cfg.method.name()
    }

    fn step(&mut self, obj: &dyn Objective) -> Result<StepInfo> {
        let f = obj.value(&self.theta);
        let g = obj.gradient(&self.theta);
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("baseline: non-finite objective"));
        }
        let grad_norm = g.dot(&g).sqrt();
        let lr = self.cfg.learning_rate;
        let eps = self.cfg.eps_perturbation;
        let update: Array1<f64> = match self.cfg.method {
            Method::SgdMomentum => {
                // v ← βv − lr·g; θ ← θ + v.
                self.velocity = &self.velocity * self.cfg.momentum - &(&g * lr);
                self.velocity.clone()
            }
            Method::Adagrad => {
                self.accum = &self.accum + &g.mapv(|v| v * v);
                -(&g * lr) / self.accum.mapv(|a| a.sqrt() + eps)
            }
            Method::Rmsprop => {
                let a = self.cfg.alpha_rms;
                self.accum = &self.accum * a + &g.mapv(|v| (1.0 - a) * v * v);
                -(&g * lr) / self.accum.mapv(|a| a.sqrt() + eps)
            }
            Method::Adam => {
                self.t += 1;
                let (b1, b2) = (self.cfg.beta1, self.cfg.beta2);
                self.moment1 = &self.moment1 * b1 + &(&g * (1.0 - b1));
                self.moment2 = &self.moment2 * b2 + &g.mapv(|v| (1.0 - b2) * v * v);
                let mhat = &self.moment1 / (1.0 - b1.powi(self.t as i32));
                let vhat = &self.moment2 / (1.0 - b2.powi(self.t as i32));
                -(mhat * lr) / vhat.mapv(|v| v.sqrt() + eps)
            }
            Method::Lbfgs => unreachable!(),
        };
        let step_norm = update.dot(&update).sqrt();
        self.theta = &self.theta + &update;
        Ok(StepInfo {
            f,
            grad_norm,
            step_norm,
            mu: None,
            rho: None,
            accepted: true,
            converged: false,
        })
    }
}

/// Two-loop-recursion L-BFGS with backtracking Armijo line search.
pub struct Lbfgs {
    cfg: BaselineConfig,
    theta: Array1<f64>,
    s_hist: Vec<Array1<f64>>,
    y_hist: Vec<Array1<f64>>,
}

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 50;
const CURVATURE_EPS: f64 = 1e-10;

impl Lbfgs {
    pub fn new(cfg: BaselineConfig, theta0: Array1<f64>) -> Result<Self> {
        cfg.validate()?;
        if cfg.method != Method::Lbfgs {
            return Err(Error::invalid("Lbfgs requires method = lbfgs"));
        }
        Ok(Lbfgs { cfg, theta: theta0, s_hist: Vec::new(), y_hist: Vec::new() })
    }

    pub fn history_len(&self) -> usize {
        self.s_hist.len()
    }

    /// H·(−g) via the standard two-loop recursion with γ = sᵀy/yᵀy scaling.
    fn direction(&self, g: &Array1<f64>) -> Array1<f64> {
        let k = self.s_hist.len();
        if k == 0 {
            return -g;
        }
        let mut q = g.clone();
        let mut alphas = vec![0.0; k];
        let mut rhos = vec![0.0; k];
        for i in (0..k).rev() {
            rhos[i] = 1.0 / self.y_hist[i].dot(&self.s_hist[i]);
            alphas[i] = rhos[i] * self.s_hist[i].dot(&q);
            q = &q - &(&self.y_hist[i] * alphas[i]);
        }
        let last = k - 1;
        let gamma = self.s_hist[last].dot(&self.y_hist[last])
            / self.y_hist[last].dot(&self.y_hist[last]);
        let mut r = q * gamma;
        for i in 0..k {
            let beta = rhos[i] * self.y_hist[i].dot(&r);
            r = &r + &(&self.s_hist[i] * (alphas[i] - beta));
        }
        -r
    }
}

impl Optimizer for Lbfgs {
    fn theta(&self) -> &Array1<f64> {
        &self.theta
    }

    fn name(&self) -> &'static str {
        "lbfgs"
    }

    fn step(&mut self, obj: &dyn Objective) -> Result<StepInfo> {
        let f0 = obj.value(&self.theta);
        let g = obj.gradient(&self.theta);
        if !f0.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("lbfgs: non-finite objective"));
        }
        let grad_norm = g.dot(&g).sqrt();
        if grad_norm <= self.cfg.lbfgs_tol {
            return Ok(StepInfo {
                f: f0,
                grad_norm,
                step_norm: 0.0,
                mu: None,
                rho: None,
                accepted: false,
                converged: true,
            });
        }
        let mut d = self.direction(&g);
        let mut gd = g.dot(&d);
        if !(gd < 0.0) {
            // History produced a non-descent direction; fall back to steepest
            // descent and start the memory over.
            self.s_hist.clear();
            self.y_hist.clear();
            d = -&g;
            gd = -grad_norm * grad_norm;
        }

        let mut alpha = self.cfg.learning_rate;
        let mut accepted = false;
        let mut trial = self.theta.clone();
        for _ in 0..=MAX_HALVINGS {
            trial = &self.theta + &(&d * alpha);
            let f_trial = obj.value(&trial);
            if f_trial.is_finite() && f_trial <= f0 + ARMIJO_C * alpha * gd {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Line-search failure: skip the step and clear history.
            self.s_hist.clear();
            self.y_hist.clear();
            return Ok(StepInfo {
                f: f0,
                grad_norm,
                step_norm: 0.0,
                mu: None,
                rho: None,
                accepted: false,
                converged: false,
            });
        }

        let g_new = obj.gradient(&trial);
        let s = &trial - &self.theta;
        let y = &g_new - &g;
        let step_norm = s.dot(&s).sqrt();
        let (s_norm, y_norm) = (step_norm, y.dot(&y).sqrt());
        if s.dot(&y) > CURVATURE_EPS * s_norm * y_norm {
            if self.s_hist.len() == self.cfg.lbfgs_memory {
                self.s_hist.remove(0);
                self.y_hist.remove(0);
            }
            self.s_hist.push(s);
            self.y_hist.push(y);
        } else {
            // Armijo alone does not guarantee positive curvature; a failed
            // check means the stored model no longer reflects the local
            // Hessian, and keeping it can freeze the iteration on a tiny
            // stale direction. Restart from steepest descent instead.
            self.s_hist.clear();
            self.y_hist.clear();
        }
        self.theta = trial;
        Ok(StepInfo {
            f: f0,
            grad_norm,
            step_norm,
            mu: None,
            rho: None,
            accepted: true,
            converged: false,
        })
    }
}
