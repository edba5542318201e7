//! Config parsing, trace CSV output and the command implementations behind
//! the `bench` binary: single runs, multi-optimizer comparisons, grid
//! sweeps, and the invariant check battery.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{BaselineConfig, Method};
use crate::dense;
use crate::error::{Error, Result};
use crate::lsr1::{build_compact, BView, PairBuffer};
use crate::problems::{
    load_iris, synth_blobs, synth_digits, Activation, LogisticRegression, Loss, Mlp, MlpSpec,
    Objective, Quadratic, QuadraticMatrix, Rosenbrock, Subset,
};
use crate::solver::{minimize, ArcsConfig, ArcsSolver, Optimizer, RunResult, StopReason};
use crate::stochastic::{
    hyperparameter_sweep, run_epochs, BatchSchedule, StochasticTrace, SWEEP_BATCHES,
    SWEEP_MAX_ITERS, SWEEP_MEMORIES,
};
use crate::subproblem::scalar_cubic_min;

/// Overrides the default `data/` directory for dataset files.
pub const DATA_DIR_ENV: &str = "ARCS_DATA_DIR";

pub const CSV_HEADER: &str =
    "iter,epoch,f_train,f_test,accuracy,grad_norm,mu,batch_size,rho,step_norm,wall_seconds";

#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
    /// Epoch count for mini-batch runs (requires a [schedule] section).
    #[serde(default)]
    pub epochs: Option<usize>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub optimizer: Option<OptimizerSpec>,
    /// Used by `compare`; `run` takes the single [optimizer] block.
    #[serde(default)]
    pub optimizers: Option<Vec<OptimizerSpec>>,
    #[serde(default)]
    pub schedule: Option<BatchSchedule>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

fn default_max_iters() -> usize {
    1000
}

fn default_grad_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    /// quadratic | rosenbrock | sphere | logistic_blobs | iris_mlp |
    /// autoencoder_digits
    pub name: String,
    #[serde(default)]
    pub n: Option<usize>,
    /// Condition number of the diagonal quadratic.
    #[serde(default)]
    pub cond: Option<f64>,
    /// Image count for the autoencoder problem.
    #[serde(default)]
    pub count: Option<usize>,
    /// Explicit dataset file; otherwise resolved under the data directory.
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub l2: Option<f64>,
}

#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    /// arcs_lsr1 | sgd_momentum | adagrad | rmsprop | adam | lbfgs
    pub name: String,
    #[serde(default)]
    pub arcs: Option<ArcsConfig>,
    #[serde(default)]
    pub baseline: Option<BaselineConfig>,
}

#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_memories")]
    pub memories: Vec<usize>,
    #[serde(default = "default_sweep_iters")]
    pub max_iters: Vec<usize>,
    #[serde(default = "default_batches")]
    pub batches: Vec<usize>,
    #[serde(default = "default_sweep_epochs")]
    pub epochs: usize,
}

fn default_memories() -> Vec<usize> {
    SWEEP_MEMORIES.to_vec()
}

fn default_sweep_iters() -> Vec<usize> {
    SWEEP_MAX_ITERS.to_vec()
}

fn default_batches() -> Vec<usize> {
    SWEEP_BATCHES.to_vec()
}

fn default_sweep_epochs() -> usize {
    5
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::invalid(format!("config {}: {e}", path.display())))
}

pub fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data"))
}

/// A constructed problem: training objective, optional held-out objective
/// sharing the same parameter vector, and the starting iterate.
pub struct BuiltProblem {
    pub label: String,
    pub train: Arc<dyn Objective>,
    pub test: Option<Arc<dyn Objective>>,
    pub theta0: Array1<f64>,
}

pub fn build_problem(spec: &ProblemSpec, seed: u64) -> Result<BuiltProblem> {
    let need_n = || {
        spec.n.ok_or_else(|| {
            Error::invalid(format!("problem.n: required for '{}'", spec.name))
        })
    };
    match spec.name.as_str() {
        "sphere" => {
            let n = need_n()?;
            Ok(BuiltProblem {
                label: format!("sphere{n}"),
                train: Arc::new(Quadratic::shifted_sphere(Array1::ones(n))),
                test: None,
                theta0: Array1::zeros(n),
            })
        }
        "quadratic" => {
            let n = need_n()?;
            let cond = spec.cond.unwrap_or(10.0);
            if !(cond >= 1.0) {
                return Err(Error::invalid("problem.cond: must be at least 1"));
            }
            // Log-spaced spectrum in [1, cond]; minimizer at the all-ones
            // vector.
            let diag = Array1::from_shape_fn(n, |i| {
                if n == 1 {
                    1.0
                } else {
                    cond.powf(i as f64 / (n - 1) as f64)
                }
            });
            let b = diag.clone();
            Ok(BuiltProblem {
                label: format!("quadratic{n}"),
                train: Arc::new(Quadratic::new(QuadraticMatrix::Diagonal(diag), b, 0.0)?),
                test: None,
                theta0: Array1::zeros(n),
            })
        }
        "rosenbrock" => {
            let n = need_n()?;
            let theta0 =
                Array1::from_shape_fn(n, |i| if i % 2 == 0 { -1.2 } else { 1.0 });
            Ok(BuiltProblem {
                label: format!("rosenbrock{n}"),
                train: Arc::new(Rosenbrock::new(n)?),
                test: None,
                theta0,
            })
        }
        "logistic_blobs" => {
            let mut blob = crate::problems::BlobSpec::default();
            blob.seed = seed;
            let data = synth_blobs(&blob)?;
            let (train_idx, test_idx) = (data.train_idx.clone(), data.test_idx.clone());
            let obj: Arc<dyn Objective> =
                Arc::new(LogisticRegression::new(data, spec.l2.unwrap_or(1e-4))?);
            let theta0 = Array1::zeros(obj.dim());
            Ok(BuiltProblem {
                label: "logistic_blobs".into(),
                train: Arc::new(Subset::new(obj.clone(), train_idx)?),
                test: Some(Arc::new(Subset::new(obj, test_idx)?)),
                theta0,
            })
        }
        "iris_mlp" => {
            let path = spec
                .data
                .clone()
                .unwrap_or_else(|| data_dir().join("iris.csv"));
            let data = load_iris(&path, seed)?;
            let (train_idx, test_idx) = (data.train_idx.clone(), data.test_idx.clone());
            let mlp = Mlp::new(MlpSpec::iris(seed), data)?;
            let theta0 = mlp.init_params();
            let obj: Arc<dyn Objective> = Arc::new(mlp);
            Ok(BuiltProblem {
                label: "iris_mlp".into(),
                train: Arc::new(Subset::new(obj.clone(), train_idx)?),
                test: Some(Arc::new(Subset::new(obj, test_idx)?)),
                theta0,
            })
        }
        "autoencoder_digits" => {
            let count = spec.count.unwrap_or(1000);
            let data = synth_digits(count, seed)?.into_autoencoder();
            let (train_idx, test_idx) = (data.train_idx.clone(), data.test_idx.clone());
            let mlp_spec = MlpSpec {
                widths: vec![64, 32, 64],
                activation: Activation::Tanh,
                loss: Loss::Mse,
                seed,
            };
            let mlp = Mlp::new(mlp_spec, data)?;
            let theta0 = mlp.init_params();
            let obj: Arc<dyn Objective> = Arc::new(mlp);
            Ok(BuiltProblem {
                label: "autoencoder_digits".into(),
                train: Arc::new(Subset::new(obj.clone(), train_idx)?),
                test: Some(Arc::new(Subset::new(obj, test_idx)?)),
                theta0,
            })
        }
        other => Err(Error::invalid(format!("problem.name: unknown problem '{other}'"))),
    }
}

pub fn build_optimizer(spec: &OptimizerSpec, theta0: Array1<f64>) -> Result<Box<dyn Optimizer>> {
    let method = match spec.name.as_str() {
        "arcs_lsr1" => {
            let cfg = spec.arcs.clone().unwrap_or_default();
            return Ok(Box::new(ArcsSolver::new(cfg, theta0)?));
        }
        "sgd_momentum" => Method::SgdMomentum,
        "adagrad" => Method::Adagrad,
        "rmsprop" => Method::Rmsprop,
        "adam" => Method::Adam,
        "lbfgs" => Method::Lbfgs,
        other => {
            return Err(Error::invalid(format!(
                "optimizer.name: unknown optimizer '{other}'"
            )))
        }
    };
    let cfg = match &spec.baseline {
        Some(b) => BaselineConfig { method, ..b.clone() },
        None => BaselineConfig {
            method,
            ..match method {
                Method::SgdMomentum => BaselineConfig::sgd_momentum(),
                Method::Adagrad => BaselineConfig::adagrad(),
                Method::Rmsprop => BaselineConfig::rmsprop(),
                Method::Adam => BaselineConfig::adam(),
                Method::Lbfgs => BaselineConfig::lbfgs(),
            }
        },
    };
    cfg.build(theta0)
}

fn fmt(v: f64) -> String {
    format!("{v:.12}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Trace rows for a full-batch run. Wall time is deliberately left blank so
/// a fixed seed reproduces the file byte for byte.
pub fn deterministic_csv(result: &RunResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (i, step) in result.trace.iter().enumerate() {
        out.push_str(&format!(
            "{},,{},,,{},{},,{},{},\n",
            i + 1,
            fmt(step.f),
            fmt(step.grad_norm),
            fmt_opt(step.mu),
            fmt_opt(step.rho),
            fmt(step.step_norm),
        ));
    }
    out
}

/// Trace rows for a mini-batch run: one row per optimizer iteration, with
/// the full-dataset metrics attached to the last iteration of each epoch.
pub fn stochastic_csv(trace: &StochasticTrace) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (i, row) in trace.iters.iter().enumerate() {
        let last_of_epoch =
            trace.iters.get(i + 1).map(|n| n.epoch != row.epoch).unwrap_or(true);
        let epoch_rec = if last_of_epoch {
            trace.epochs.iter().find(|e| e.epoch == row.epoch)
        } else {
            None
        };
        let (f_train, f_test, acc) = match epoch_rec {
            Some(e) => (fmt(e.f_train), fmt_opt(e.f_test), fmt_opt(e.accuracy)),
            None => (fmt(row.f), String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},\n",
            row.iter,
            row.epoch,
            f_train,
            f_test,
            acc,
            fmt(row.grad_norm),
            fmt_opt(row.mu),
            row.batch_size,
            fmt_opt(row.rho),
            fmt(row.step_norm),
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub problem: String,
    pub optimizer: String,
    pub iters: usize,
    pub f_final: f64,
    pub grad_norm: Option<f64>,
    pub accuracy: Option<f64>,
    pub wall_seconds: f64,
    pub csv_path: PathBuf,
    pub stop: Option<StopReason>,
}

impl RunSummary {
    pub fn line(&self) -> String {
        let mut s = format!(
            "{} / {}: iters={} f={:.6e}",
            self.problem, self.optimizer, self.iters, self.f_final
        );
        if let Some(g) = self.grad_norm {
            s.push_str(&format!(" grad_norm={g:.6e}"));
        }
        if let Some(a) = self.accuracy {
            s.push_str(&format!(" accuracy={:.4}", a));
        }
        if let Some(stop) = &self.stop {
            s.push_str(&format!(" stop={stop:?}"));
        }
        s.push_str(&format!(" wall={:.3}s", self.wall_seconds));
        s
    }
}

fn execute(
    cfg: &RunConfig,
    problem: &BuiltProblem,
    opt_spec: &OptimizerSpec,
    out_dir: &Path,
) -> Result<RunSummary> {
    let mut opt = build_optimizer(opt_spec, problem.theta0.clone())?;
    let csv_path = out_dir.join(format!("{}_{}.csv", problem.label, opt_spec.name));
    let t0 = Instant::now();
    let summary = match (&cfg.schedule, problem.train.dataset_size()) {
        (Some(schedule), Some(_)) => {
            let mut schedule = schedule.clone();
            schedule.seed = cfg.seed;
            let epochs = cfg.epochs.unwrap_or(10);
            let trace = run_epochs(
                problem.train.as_ref(),
                problem.test.as_deref(),
                opt.as_mut(),
                &schedule,
                epochs,
            )?;
            fs::write(&csv_path, stochastic_csv(&trace))?;
            let last = trace
                .final_epoch()
                .ok_or_else(|| Error::invalid("run: epochs must be positive"))?;
            RunSummary {
                problem: problem.label.clone(),
                optimizer: opt_spec.name.clone(),
                iters: trace.iters.len(),
                f_final: last.f_train,
                grad_norm: None,
                accuracy: last.accuracy,
                wall_seconds: t0.elapsed().as_secs_f64(),
                csv_path,
                stop: None,
            }
        }
        (Some(_), None) => {
            return Err(Error::invalid(format!(
                "schedule: problem '{}' has no batch decomposition",
                problem.label
            )))
        }
        (None, _) => {
            let result = minimize(opt.as_mut(), problem.train.as_ref(), cfg.max_iters, cfg.grad_tol)?;
            fs::write(&csv_path, deterministic_csv(&result))?;
            if let StopReason::NumericFailure(msg) = &result.stop {
                return Err(Error::numeric(format!(
                    "numeric failure at iteration {}: {msg} (partial trace in {})",
                    result.iters + 1,
                    csv_path.display()
                )));
            }
            RunSummary {
                problem: problem.label.clone(),
                optimizer: opt_spec.name.clone(),
                iters: result.iters,
                f_final: result.f,
                grad_norm: Some(result.grad_norm),
                accuracy: None,
                wall_seconds: t0.elapsed().as_secs_f64(),
                csv_path,
                stop: Some(result.stop),
            }
        }
    };
    Ok(summary)
}

fn resolve_out_dir(cfg: &RunConfig, override_dir: Option<&Path>) -> Result<PathBuf> {
    let dir = override_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn cmd_run(
    config_path: &Path,
    seed: Option<u64>,
    out_dir: Option<&Path>,
) -> Result<RunSummary> {
    let mut cfg = load_config(config_path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let opt_spec = cfg
        .optimizer
        .clone()
        .ok_or_else(|| Error::invalid("config: run requires an [optimizer] section"))?;
    let problem = build_problem(&cfg.problem, cfg.seed)?;
    let dir = resolve_out_dir(&cfg, out_dir)?;
    let summary = execute(&cfg, &problem, &opt_spec, &dir)?;
    println!("{}", summary.line());
    Ok(summary)
}

pub fn cmd_compare(
    config_path: &Path,
    seed: Option<u64>,
    out_dir: Option<&Path>,
) -> Result<Vec<RunSummary>> {
    let mut cfg = load_config(config_path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let specs = match (&cfg.optimizers, &cfg.optimizer) {
        (Some(v), _) if !v.is_empty() => v.clone(),
        (None, Some(single)) => vec![single.clone()],
        _ => return Err(Error::invalid("config: compare requires an [[optimizers]] list")),
    };
    let problem = build_problem(&cfg.problem, cfg.seed)?;
    let dir = resolve_out_dir(&cfg, out_dir)?;
    let mut summaries = Vec::with_capacity(specs.len());
    for spec in &specs {
        // A diverging optimizer shouldn't abort the whole comparison; its
        // partial trace is already on disk.
        match execute(&cfg, &problem, spec, &dir) {
            Ok(s) => {
                println!("{}", s.line());
                summaries.push(s);
            }
            Err(Error::NumericFailure(msg)) => eprintln!("{}: {msg}", spec.name),
            Err(e) => return Err(e),
        }
    }
    println!("optimizer,iters,f_final,accuracy,wall_seconds");
    for s in &summaries {
        println!(
            "{},{},{:.6e},{},{:.3}",
            s.optimizer,
            s.iters,
            s.f_final,
            s.accuracy.map(|a| format!("{a:.4}")).unwrap_or_default(),
            s.wall_seconds
        );
    }
    Ok(summaries)
}

pub fn cmd_sweep(
    config_path: &Path,
    seed: Option<u64>,
    out_dir: Option<&Path>,
) -> Result<PathBuf> {
    let mut cfg = load_config(config_path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let sweep = cfg.sweep.clone().unwrap_or(SweepSpec {
        memories: default_memories(),
        max_iters: default_sweep_iters(),
        batches: default_batches(),
        epochs: default_sweep_epochs(),
    });
    let problem = build_problem(&cfg.problem, cfg.seed)?;
    if problem.train.dataset_size().is_none() {
        return Err(Error::invalid(format!(
            "sweep: problem '{}' has no batch decomposition",
            problem.label
        )));
    }
    let base = {
        let mut s = cfg.schedule.clone().unwrap_or_default();
        s.seed = cfg.seed;
        s
    };
    let arcs_base = cfg
        .optimizer
        .as_ref()
        .and_then(|o| o.arcs.clone())
        .unwrap_or_default();
    let theta0 = problem.theta0.clone();
    let factory = move |memory: usize| -> Result<Box<dyn Optimizer>> {
        let cfg = ArcsConfig { memory, ..arcs_base.clone() };
        Ok(Box::new(ArcsSolver::new(cfg, theta0.clone())?))
    };
    let cells = hyperparameter_sweep(
        problem.train.as_ref(),
        problem.test.as_deref(),
        &factory,
        &base,
        &sweep.memories,
        &sweep.max_iters,
        &sweep.batches,
        sweep.epochs,
    )?;
    let dir = resolve_out_dir(&cfg, out_dir)?;
    let path = dir.join(format!("{}_sweep.csv", problem.label));
    let mut out = String::from("memory,max_iters,batch,f_train,f_test,accuracy\n");
    for c in &cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.memory,
            c.max_iters_per_batch,
            c.batch,
            fmt(c.f_train),
            fmt_opt(c.f_test),
            fmt_opt(c.accuracy),
        ));
    }
    fs::write(&path, out)?;
    println!("sweep: {} cells -> {}", cells.len(), path.display());
    Ok(path)
}

// ---------------------------------------------------------------------------
// Check battery.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckLevel {
    Fast,
    Full,
}

#[derive(Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub outcome: std::result::Result<(), String>,
}

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| rng.gen_range(-1.0..1.0))
}

fn rand_spd(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let m = Array2::from_shape_fn((n, n), |_| rng.gen_range(-1.0..1.0));
    let mut a = m.t().dot(&m);
    for i in 0..n {
        a[(i, i)] += 0.5;
    }
    a
}

/// Fills a pair buffer from curvature pairs of a fixed symmetric matrix and
/// mirrors the accepted updates into a dense recursive SR1 build.
fn compact_vs_recursive(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let n = rng.gen_range(3..=8);
    let m = rng.gen_range(1..=5usize.min(n));
    let a = rand_spd(rng, n);
    let delta = rng.gen_range(0.05..0.5);
    let mut buf = PairBuffer::new(m, 1e-8);
    let mut dense_b = Array2::<f64>::eye(n) * delta;
    let mut stored: Vec<(Array1<f64>, Array1<f64>)> = Vec::new();
    for _ in 0..m {
        let s = rand_vec(rng, n);
        let y = a.dot(&s);
        let compact;
        let view = if buf.is_empty() {
            BView::Scaled(delta)
        } else {
            compact = build_compact(&buf, delta).map_err(|e| e.to_string())?;
            BView::Compact(&compact)
        };
        let added = buf.try_add_pair(&s, &y, &view).map_err(|e| e.to_string())?;
        if added {
            stored.push((s, y));
        }
    }
    // Rebuild the dense B with the same final pair set; the recursion is
    // order-dependent, so replay exactly the accepted pairs.
    for (s, y) in &stored {
        let r = y - &dense_b.dot(s);
        let denom = r.dot(s);
        let r_norm = r.dot(&r).sqrt();
        let s_norm = s.dot(s).sqrt();
        if denom.abs() > 1e-8 * s_norm * r_norm {
            dense_b = &dense_b + &(dense::outer(&r, &r) / denom);
        }
    }
    let compact = build_compact(&buf, delta).map_err(|e| e.to_string())?;
    let from_compact = compact.dense_b().map_err(|e| e.to_string())?;
    let diff = dense::frob(&(&from_compact - &dense_b));
    let denom = dense::frob(&dense_b).max(1.0);
    if diff / denom < 1e-9 {
        Ok(())
    } else {
        Err(format!("relative mismatch {:.3e}", diff / denom))
    }
}

fn check_compact_oracle() -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..50 {
        compact_vs_recursive(&mut rng).map_err(|e| format!("trial {trial}: {e}"))?;
    }
    Ok(())
}

fn check_eig_fidelity() -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..25 {
        let n = rng.gen_range(3..=8);
        let m = rng.gen_range(1..=3usize.min(n));
        let a = rand_spd(&mut rng, n);
        let delta = rng.gen_range(0.05..0.5);
        let mut buf = PairBuffer::new(m, 1e-8);
        for _ in 0..m {
            let s = rand_vec(&mut rng, n);
            let y = a.dot(&s);
            let compact;
            let view = if buf.is_empty() {
                BView::Scaled(delta)
            } else {
                compact = build_compact(&buf, delta).map_err(|e| e.to_string())?;
                BView::Compact(&compact)
            };
            buf.try_add_pair(&s, &y, &view).map_err(|e| e.to_string())?;
        }
        let compact = build_compact(&buf, delta).map_err(|e| e.to_string())?;
        let eig = compact.partial_eig().map_err(|e| e.to_string())?;
        let dense_full = compact.dense_b().map_err(|e| e.to_string())?;
        let (_, mut dense_vals) = dense::sym_eig(&dense_full).map_err(|e| e.to_string())?;
        let mut expected: Vec<f64> = eig.lam_hat.iter().map(|l| l + delta).collect();
        expected.extend(std::iter::repeat(delta).take(n - eig.rank()));
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut dv: Vec<f64> = dense_vals.iter().copied().collect();
        dv.sort_by(|a, b| a.partial_cmp(b).unwrap());
        dense_vals = Array1::from(dv.clone());
        for (e, d) in expected.iter().zip(dense_vals.iter()) {
            if (e - d).abs() > 1e-8 * (1.0 + d.abs()) {
                return Err(format!("trial {trial}: eigenvalue {e} vs {d}"));
            }
        }
        let q = &eig.upar;
        let gram = q.t().dot(q);
        let ortho = dense::frob(&(&gram - &Array2::<f64>::eye(eig.rank())));
        if ortho > 1e-10 {
            return Err(format!("trial {trial}: basis orthogonality {ortho:.3e}"));
        }
    }
    Ok(())
}

fn check_subproblem_grid() -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for trial in 0..20 {
        let gbar = match trial % 4 {
            0 => 0.0,
            _ => rng.gen_range(-2.0..2.0),
        };
        let lam = rng.gen_range(-1.5..1.5);
        let mu = rng.gen_range(0.05..2.0);
        let s = scalar_cubic_min(gbar, lam, mu).map_err(|e| e.to_string())?;
        let phi =
            |t: f64| gbar * t + 0.5 * lam * t * t + mu / 3.0 * t.abs().powi(3);
        let v = phi(s);
        let span = 2.0 * (s.abs() + 1.0);
        for i in 0..=10_000 {
            let t = -span + 2.0 * span * i as f64 / 10_000.0;
            if phi(t) < v - 1e-10 {
                return Err(format!(
                    "trial {trial}: grid point {t} beats closed form ({} < {v})",
                    phi(t)
                ));
            }
        }
    }
    Ok(())
}

fn check_holder_sandwich() -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for trial in 0..200 {
        let n = rng.gen_range(2..=10);
        let m = Array2::from_shape_fn((n, n), |_| rng.gen_range(-1.0..1.0));
        let (q, _) = dense::qr_thin(&m).map_err(|e| e.to_string())?;
        let s = rand_vec(&mut rng, n);
        let coords = q.t().dot(&s);
        let l2 = s.dot(&s).sqrt();
        let l3 = coords.iter().map(|c| c.abs().powi(3)).sum::<f64>().powf(1.0 / 3.0);
        let lower = (n as f64).powf(-1.0 / 6.0) * l2;
        if !(lower <= l3 * (1.0 + 1e-12) && l3 <= l2 * (1.0 + 1e-12)) {
            return Err(format!("trial {trial}: {lower} <= {l3} <= {l2} violated"));
        }
    }
    Ok(())
}

fn check_batch_growth() -> std::result::Result<(), String> {
    struct Flat;
    impl Objective for Flat {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, _: &Array1<f64>) -> f64 {
            1.0
        }
        fn gradient(&self, _: &Array1<f64>) -> Array1<f64> {
            Array1::zeros(2)
        }
        fn dataset_size(&self) -> Option<usize> {
            Some(64)
        }
    }
    let mut opt = BaselineConfig::sgd_momentum()
        .build(Array1::zeros(2))
        .map_err(|e| e.to_string())?;
    let schedule = BatchSchedule {
        initial_batch: 4,
        full_eval_period: 2,
        ..BatchSchedule::default()
    };
    let trace =
        run_epochs(&Flat, None, opt.as_mut(), &schedule, 6).map_err(|e| e.to_string())?;
    let last = trace.epochs.last().unwrap().batch_size;
    if last != 64 {
        return Err(format!("constant loss only grew the batch to {last}"));
    }
    Ok(())
}

fn fd_gradient_check(
    obj: &dyn Objective,
    theta: &Array1<f64>,
    points: usize,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<(), String> {
    let g = obj.gradient(theta);
    let h = 1e-6;
    for _ in 0..points {
        let i = rng.gen_range(0..theta.len());
        let mut p = theta.clone();
        p[i] += h;
        let fp = obj.value(&p);
        p[i] -= 2.0 * h;
        let fm = obj.value(&p);
        let fd = (fp - fm) / (2.0 * h);
        let denom = g[i].abs().max(fd.abs()).max(1.0);
        if (fd - g[i]).abs() / denom > tol {
            return Err(format!("coordinate {i}: analytic {} vs fd {fd}", g[i]));
        }
    }
    Ok(())
}

fn check_gradients() -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let blob = crate::problems::BlobSpec::default();
    let logistic =
        LogisticRegression::new(synth_blobs(&blob).map_err(|e| e.to_string())?, 1e-4)
            .map_err(|e| e.to_string())?;
    let digits = synth_digits(60, 3).map_err(|e| e.to_string())?;
    let classifier = Mlp::new(
        MlpSpec {
            widths: vec![64, 12, 10],
            activation: Activation::Tanh,
            loss: Loss::SoftmaxCrossEntropy,
            seed: 3,
        },
        digits.clone(),
    )
    .map_err(|e| e.to_string())?;
    let auto = Mlp::new(
        MlpSpec { widths: vec![64, 8, 64], activation: Activation::Tanh, loss: Loss::Mse, seed: 3 },
        digits.into_autoencoder(),
    )
    .map_err(|e| e.to_string())?;
    let rosen = Rosenbrock::new(4).map_err(|e| e.to_string())?;
    let objs: Vec<(&str, &dyn Objective)> = vec![
        ("rosenbrock", &rosen),
        ("logistic", &logistic),
        ("mlp_classifier", &classifier),
        ("mlp_autoencoder", &auto),
    ];
    for (name, obj) in objs {
        let theta = rand_vec(&mut rng, obj.dim()) * 0.2;
        fd_gradient_check(obj, &theta, 10, 1e-5, &mut rng)
            .map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(())
}

fn check_convergence() -> std::result::Result<(), String> {
    let prob = build_problem(
        &ProblemSpec {
            name: "quadratic".into(),
            n: Some(50),
            cond: None,
            count: None,
            data: None,
            l2: None,
        },
        0,
    )
    .map_err(|e| e.to_string())?;
    let mut opt =
        ArcsSolver::new(ArcsConfig::default(), prob.theta0.clone()).map_err(|e| e.to_string())?;
    let res =
        minimize(&mut opt, prob.train.as_ref(), 200, 1e-5).map_err(|e| e.to_string())?;
    if res.grad_norm > 1e-5 {
        return Err(format!("quadratic: grad {} after {} iters", res.grad_norm, res.iters));
    }
    let ros = Rosenbrock::new(2).map_err(|e| e.to_string())?;
    let mut opt = ArcsSolver::new(ArcsConfig::default(), ndarray::array![-1.2, 1.0])
        .map_err(|e| e.to_string())?;
    let res = minimize(&mut opt, &ros, 1000, 0.0).map_err(|e| e.to_string())?;
    if res.f > 1e-8 {
        return Err(format!("rosenbrock: f {} after {} iters", res.f, res.iters));
    }
    Ok(())
}

fn check_sr1_recovery() -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for trial in 0..10 {
        let n = rng.gen_range(3..=8);
        let a = rand_spd(&mut rng, n);
        let delta = 0.1;
        let mut buf = PairBuffer::new(n, 1e-8);
        for _ in 0..n {
            let s = rand_vec(&mut rng, n);
            let y = a.dot(&s);
            let compact;
            let view = if buf.is_empty() {
                BView::Scaled(delta)
            } else {
                compact = build_compact(&buf, delta).map_err(|e| e.to_string())?;
                BView::Compact(&compact)
            };
            buf.try_add_pair(&s, &y, &view).map_err(|e| e.to_string())?;
        }
        if buf.len() < n {
            continue; // some pairs rejected; recovery only promised after n accepted
        }
        let b = build_compact(&buf, delta)
            .and_then(|c| c.dense_b())
            .map_err(|e| e.to_string())?;
        let rel = dense::frob(&(&b - &a)) / dense::frob(&a);
        if rel > 1e-6 {
            return Err(format!("trial {trial}: relative error {rel:.3e}"));
        }
    }
    Ok(())
}

fn check_determinism() -> std::result::Result<(), String> {
    let blob = crate::problems::BlobSpec::default();
    let run = || -> Result<String> {
        let data = synth_blobs(&blob)?;
        let obj = LogisticRegression::new(data, 1e-4)?;
        let n = obj.dim();
        let mut opt = ArcsSolver::new(ArcsConfig::default(), Array1::zeros(n))?;
        let schedule = BatchSchedule { initial_batch: 16, seed: 5, ..BatchSchedule::default() };
        let trace = run_epochs(&obj, None, &mut opt, &schedule, 3)?;
        Ok(stochastic_csv(&trace))
    };
    let a = run().map_err(|e| e.to_string())?;
    let b = run().map_err(|e| e.to_string())?;
    if a != b {
        return Err("identical seed produced different CSVs".into());
    }
    if !a.starts_with(CSV_HEADER) {
        return Err("CSV header mismatch".into());
    }
    Ok(())
}

pub fn cmd_check(level: CheckLevel) -> Vec<CheckResult> {
    let mut checks: Vec<(&'static str, fn() -> std::result::Result<(), String>)> = vec![
        ("compact_representation_oracle", check_compact_oracle),
        ("eigendecomposition_fidelity", check_eig_fidelity),
        ("subproblem_grid_optimality", check_subproblem_grid),
        ("holder_norm_sandwich", check_holder_sandwich),
        ("batch_growth_mechanism", check_batch_growth),
        ("gradient_conformance", check_gradients),
    ];
    if level == CheckLevel::Full {
        checks.push(("deterministic_convergence", check_convergence));
        checks.push(("sr1_exact_recovery", check_sr1_recovery));
        checks.push(("trace_determinism", check_determinism));
    }
    checks
        .into_iter()
        .map(|(name, f)| CheckResult { name, outcome: f() })
        .collect()
}
