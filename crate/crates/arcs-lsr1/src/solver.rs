//! The adaptive cubic-regularization driver: limited-memory SR1 curvature,
//! closed-form subproblem in the shape-changing norm, ratio-test acceptance
//! and regularization-weight update.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::lsr1::{build_compact_guarded, spectral_shift, BView, PairBuffer};
use crate::problems::Objective;
use crate::subproblem::{solve, ParallelCurvature};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArcsConfig {
    /// Initial regularization weight μ₀.
    pub mu0: f64,
    /// Acceptance threshold η₁: steps with ρ ≥ η₁ move the iterate.
    pub eta1: f64,
    /// Very-successful threshold η₂: ρ > η₂ halves μ.
    pub eta2: f64,
    /// μ-growth factors γ₁ < γ₂; moderate steps scale μ by ½(1+γ₁),
    /// rejected steps by ½(γ₁+γ₂).
    pub gamma1: f64,
    pub gamma2: f64,
    /// Number of curvature pairs kept.
    pub memory: usize,
    /// Relative threshold ε in the SR1 pair-acceptance test |sᵀr| > ε‖s‖‖r‖.
    pub pair_accept_eps: f64,
    /// Termination threshold ε̃ in ‖s‖ < ε̃‖y − Bs‖.
    pub step_tol: f64,
    /// Stop when ‖∇f‖ drops to this value.
    pub grad_tol: f64,
    /// Clamp interval for the spectral shift δ.
    pub delta_min: f64,
    pub delta_max: f64,
    /// Initial δ used before any pair is stored.
    pub delta0: f64,
    /// Which curvature enters the parallel scalar problems.
    pub parallel_curvature: ParallelCurvature,
    /// Floor keeping μ positive no matter how many steps succeed.
    pub mu_min: f64,
}

impl Default for ArcsConfig {
    fn default() -> Self {
        ArcsConfig {
            mu0: 1.0,
            eta1: 0.1,
            eta2: 0.75,
            gamma1: 1.0,
            gamma2: 2.0,
            memory: 10,
            pair_accept_eps: 1e-8,
            step_tol: 1e-9,
            grad_tol: 1e-8,
            delta_min: 1e-8,
            delta_max: 1e8,
            delta0: 1.0,
            parallel_curvature: ParallelCurvature::Shifted,
            mu_min: 1e-300,
        }
    }
}

impl ArcsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu0 > 0.0) {
            return Err(Error::invalid("arcs: mu0 must be positive"));
        }
        if !(0.0 < self.eta1 && self.eta1 <= self.eta2 && self.eta2 < 1.0) {
            return Err(Error::invalid("arcs: need 0 < eta1 <= eta2 < 1"));
        }
        if !(self.gamma1 >= 1.0 && self.gamma2 >= self.gamma1) {
            return Err(Error::invalid("arcs: need 1 <= gamma1 <= gamma2"));
        }
        if self.memory == 0 {
            return Err(Error::invalid("arcs: memory must be at least 1"));
        }
        if !(self.delta_min > 0.0 && self.delta_max >= self.delta_min) {
            return Err(Error::invalid("arcs: bad delta bounds"));
        }
        Ok(())
    }
}

/// Why a minimization run stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    /// ‖s‖ < ε̃‖y − Bs‖ for the last trial step.
    SmallStep,
    GradTol,
    NumericFailure(String),
}

/// What one optimizer step did; shared by every method so the drivers can
/// log a uniform trace. μ and ρ are only meaningful for the cubic solver.
#[derive(Debug, Clone)]
pub struct StepInfo {
    /// Objective value at the iterate the step started from.
    pub f: f64,
    pub grad_norm: f64,
    pub step_norm: f64,
    pub mu: Option<f64>,
    pub rho: Option<f64>,
    pub accepted: bool,
    /// The step-versus-secant termination test fired.
    pub converged: bool,
}

/// Anything that can advance one iterate on an objective. Implementations
/// own the iterate; the objective may change between calls (mini-batching),
/// so each step evaluates what it needs at the current iterate.
pub trait Optimizer {
    fn theta(&self) -> &Array1<f64>;
    fn step(&mut self, obj: &dyn Objective) -> Result<StepInfo>;
    fn name(&self) -> &'static str;
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub theta: Array1<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iters: usize,
    pub stop: StopReason,
    pub trace: Vec<StepInfo>,
}

/// Runs any optimizer on a fixed objective until its own convergence test,
/// the gradient tolerance, or the iteration cap fires.
pub fn minimize(
    opt: &mut dyn Optimizer,
    obj: &dyn Objective,
    max_iters: usize,
    grad_tol: f64,
) -> Result<RunResult> {
    let mut trace = Vec::new();
    let mut stop = StopReason::MaxIters;
    for _ in 0..max_iters {
        let info = match opt.step(obj) {
            Ok(i) => i,
            Err(Error::NumericFailure(m)) => {
                stop = StopReason::NumericFailure(m);
                break;
            }
            Err(e) => return Err(e),
        };
        let converged = info.converged;
        let small_grad = info.grad_norm <= grad_tol;
        trace.push(info);
        if small_grad {
            stop = StopReason::GradTol;
            break;
        }
        if converged {
            stop = StopReason::SmallStep;
            break;
        }
    }
    let theta = opt.theta().clone();
    let f = obj.value(&theta);
    let g = obj.gradient(&theta);
    Ok(RunResult {
        grad_norm: g.dot(&g).sqrt(),
        f,
        iters: trace.len(),
        stop,
        trace,
        theta,
    })
}

pub struct ArcsSolver {
    config: ArcsConfig,
    theta: Array1<f64>,
    mu: f64,
    delta: f64,
    pairs: PairBuffer,
    steps_taken: usize,
    last_b_frob: Option<f64>,
}

impl ArcsSolver {
    pub fn new(config: ArcsConfig, theta0: Array1<f64>) -> Result<Self> {
        config.validate()?;
        // More pairs than dimensions makes Ψ rank-deficient by construction.
        let pairs = PairBuffer::new(config.memory.min(theta0.len()), config.pair_accept_eps);
        let mu = config.mu0;
        let delta = config.delta0.clamp(config.delta_min, config.delta_max);
        Ok(ArcsSolver { config, theta: theta0, mu, delta, pairs, steps_taken: 0, last_b_frob: None })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn config(&self) -> &ArcsConfig {
        &self.config
    }

    /// Forgets stored curvature (used when the underlying objective changes
    /// so drastically that old pairs are meaningless).
    pub fn reset_memory(&mut self) {
        self.pairs.clear();
    }

    /// ‖B‖_F of the approximation used by the most recent step, computed
    /// from its spectral factors.
    pub fn b_frob(&self) -> Option<f64> {
        self.last_b_frob
    }

    /// Dense oracle view of the current Hessian approximation (small n
    /// only). Errs when the compact middle matrix is singular at the current
    /// shift, which the stepping path resolves by dropping pairs.
    pub fn dense_b_oracle(&self) -> Result<Array2<f64>> {
        if self.pairs.is_empty() {
            return Ok(Array2::<f64>::eye(self.theta.len()) * self.delta);
        }
        crate::lsr1::build_compact(&self.pairs, self.delta)?.dense_b()
    }

    fn update_mu(&mut self, rho: f64) {
        let c = &self.config;
        self.mu = if rho > c.eta2 {
            0.5 * self.mu
        } else if rho >= c.eta1 {
            0.5 * (1.0 + c.gamma1) * self.mu
        } else {
            0.5 * (c.gamma1 + c.gamma2) * self.mu
        };
        self.mu = self.mu.max(c.mu_min);
    }
}

impl Optimizer for ArcsSolver {
    fn theta(&self) -> &Array1<f64> {
        &self.theta
    }

    fn name(&self) -> &'static str {
        "arcs-lsr1"
    }

    fn step(&mut self, obj: &dyn Objective) -> Result<StepInfo> {
        let n = self.theta.len();
        if obj.dim() != n {
            return Err(Error::invalid("arcs: objective dimension mismatch"));
        }
        let f0 = obj.value(&self.theta);
        let g = obj.gradient(&self.theta);
        if !f0.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("arcs: non-finite objective at current iterate"));
        }
        let grad_norm = g.dot(&g).sqrt();

        // With a single stored pair the 1×1 generalized eigenproblem returns
        // exactly that pair's Rayleigh quotient, which zeroes the middle
        // matrix and would shed the pair; keep the previous δ until a second
        // pair makes the shift informative.
        if self.pairs.len() >= 2 {
            let shift = spectral_shift(
                &self.pairs,
                (self.config.delta_min, self.config.delta_max),
                Some(self.delta),
            )?;
            self.delta = shift.delta;
        }
        // Frobenius cap the theory guarantees: every stored pair passed the
        // acceptance test and no terminated step contributed, so the
        // recursive build stays within √n·δ_max + m/(ε·ε̃). A rebuild at a
        // shifted δ can exceed it when the middle matrix is near-singular;
        // shed the oldest pair until the approximation is representable.
        let b_cap = (n as f64).sqrt() * self.config.delta_max
            + self.config.memory as f64
                / (self.config.pair_accept_eps * self.config.step_tol);
        let (compact, eig) = loop {
            let compact = build_compact_guarded(&mut self.pairs, self.delta, n)?;
            let eig = compact.partial_eig()?;
            let k = eig.rank();
            let mut sq = (n - k) as f64 * eig.delta * eig.delta;
            for l in eig.lam_hat.iter() {
                let v = eig.delta + l;
                sq += v * v;
            }
            let b_frob = sq.sqrt();
            if b_frob <= b_cap || self.pairs.is_empty() {
                self.last_b_frob = Some(b_frob);
                break (compact, eig);
            }
            self.pairs.drop_oldest();
        };
        let sol = solve(&g, &eig, self.mu, self.config.parallel_curvature)?;
        let s = sol.step;
        let step_norm = s.dot(&s).sqrt();
        if step_norm == 0.0 {
            // Stationary point of the model (only happens at g = 0); there
            // is nothing to evaluate, pair or accept.
            return Ok(StepInfo {
                f: f0,
                grad_norm,
                step_norm,
                mu: Some(self.mu),
                rho: None,
                accepted: false,
                converged: false,
            });
        }

        let trial = &self.theta + &s;
        let f_trial = obj.value(&trial);
        let g_trial = obj.gradient(&trial);
        let trial_finite = f_trial.is_finite() && g_trial.iter().all(|v| v.is_finite());

        let mut secant_res_norm = None;
        let mut pair_accepted = false;
        if trial_finite {
            let y = &g_trial - &g;
            let bs = BView::Compact(&compact).apply(&s)?;
            let r = &y - &bs;
            secant_res_norm = Some(r.dot(&r).sqrt());
            // The pair is offered whether or not the step is accepted, but a
            // secant whose curvature falls outside the representable shift
            // range [−δ_max, δ_max] (a far-away trial point on a stiff
            // function) would only poison the model.
            let rayleigh = s.dot(&y) / (step_norm * step_norm);
            if rayleigh.is_finite() && rayleigh.abs() <= self.config.delta_max {
                pair_accepted = self.pairs.try_add_pair(&s, &y, &BView::Compact(&compact))?;
            }
        }
        let _ = pair_accepted;

        let rho = if trial_finite && sol.pred_reduction > 0.0 {
            (f0 - f_trial) / sol.pred_reduction
        } else {
            f64::NEG_INFINITY
        };
        let accepted = rho >= self.config.eta1;
        // Secant-based termination: ‖s‖ < ε̃‖y − Bs‖. Checked only for steps
        // that actually move the iterate; at a rejected far-away trial point
        // the secant residual says nothing about stationarity.
        let converged = accepted
            && self.steps_taken > 0
            && matches!(secant_res_norm, Some(r) if step_norm < self.config.step_tol * r);
        if accepted {
            self.theta = trial;
        }
        self.update_mu(rho);
        self.steps_taken += 1;

        Ok(StepInfo {
            f: f0,
            grad_norm,
            step_norm,
            mu: Some(self.mu),
            rho: if rho.is_finite() { Some(rho) } else { None },
            accepted,
            converged,
        })
    }
}
