//! Limited-memory SR1 history: pair acceptance, spectral shift, compact
//! representation B = δI + Ψ M⁻¹ Ψᵀ, and the partial eigendecomposition
//! consumed by the cubic subproblem solver. The perpendicular eigenbasis is
//! never materialized.

use ndarray::{Array1, Array2};

use crate::dense::{self, frob};
use crate::error::{Error, Result};

/// A view of the current Hessian approximation that can be applied to a
/// vector, used by the pair-acceptance test.
pub enum BView<'a> {
    /// B = δ·I (empty history).
    Scaled(f64),
    Compact(&'a CompactSr1),
}

impl BView<'_> {
    pub fn apply(&self, v: &Array1<f64>) -> Result<Array1<f64>> {
        match self {
            BView::Scaled(delta) => Ok(v * *delta),
            BView::Compact(c) => c.apply(v),
        }
    }
}

/// Bounded FIFO store of accepted quasi-Newton pairs (S, Y).
#[derive(Debug, Clone)]
pub struct PairBuffer {
    capacity: usize,
    accept_eps: f64,
    s: Vec<Array1<f64>>,
    y: Vec<Array1<f64>>,
}

impl PairBuffer {
    pub fn new(capacity: usize, accept_eps: f64) -> Self {
        assert!(capacity > 0, "memory parameter must be positive");
        assert!(accept_eps > 0.0, "acceptance epsilon must be positive");
        PairBuffer { capacity, accept_eps, s: Vec::new(), y: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn accept_eps(&self) -> f64 {
        self.accept_eps
    }

    pub fn s_matrix(&self) -> Array2<f64> {
        dense::stack_columns(&self.s)
    }

    pub fn y_matrix(&self) -> Array2<f64> {
        dense::stack_columns(&self.y)
    }

    pub fn drop_oldest(&mut self) {
        if !self.s.is_empty() {
            self.s.remove(0);
            self.y.remove(0);
        }
    }

    pub fn clear(&mut self) {
        self.s.clear();
        self.y.clear();
    }

    /// Offers a candidate pair. It is stored only when the SR1 acceptance
    /// test |sᵀ(y − Bs)| > ε‖s‖‖y − Bs‖ holds strictly against the current
    /// approximation; the oldest pair is evicted at capacity.
    pub fn try_add_pair(
        &mut self,
        s: &Array1<f64>,
        y: &Array1<f64>,
        current_b: &BView,
    ) -> Result<bool> {
        if !s.iter().all(|v| v.is_finite()) || !y.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("try_add_pair: non-finite pair"));
        }
        if s.len() != y.len() {
            return Err(Error::invalid("try_add_pair: s and y length mismatch"));
        }
        if let Some(first) = self.s.first() {
            if first.len() != s.len() {
                return Err(Error::invalid("try_add_pair: dimension differs from stored pairs"));
            }
        }
        let s_norm = s.dot(s).sqrt();
        if s_norm == 0.0 {
            return Err(Error::invalid("try_add_pair: zero step"));
        }
        let resid = y - &current_b.apply(s)?;
        let r_norm = resid.dot(&resid).sqrt();
        let inner = s.dot(&resid).abs();
        if inner > self.accept_eps * s_norm * r_norm {
            if self.s.len() == self.capacity {
                self.drop_oldest();
            }
            // B and the spectral-shift eigenproblem are invariant to scaling
            // a pair; store unit-step pairs so SᵀS stays well conditioned
            // even when step lengths span many orders of magnitude.
            self.s.push(s / s_norm);
            self.y.push(y / s_norm);
            Ok(true)
        } else {
            Ok(false)
        }
    }
}

/// The compact SR1 factors: B = δI + Ψ Mmat⁻¹ Ψᵀ with Ψ = Y − δS and
/// Mmat = D + L + Lᵀ − δ SᵀS. A zero-column Ψ represents B = δI.
#[derive(Debug, Clone)]
pub struct CompactSr1 {
    pub delta: f64,
    /// n×k, possibly k = 0.
    pub psi: Array2<f64>,
    /// k×k.
    pub mmat: Array2<f64>,
}

/// Spectral form of B: eigenvalues δ + λ̂_i on the range of U∥ and δ on its
/// orthogonal complement.
#[derive(Debug, Clone)]
pub struct LsrEigFactors {
    pub delta: f64,
    /// n×k with orthonormal columns (k = 0 when the history is empty).
    pub upar: Array2<f64>,
    /// Eigenvalues of the Ψ-range block, ascending.
    pub lam_hat: Array1<f64>,
}

impl LsrEigFactors {
    pub fn rank(&self) -> usize {
        self.lam_hat.len()
    }

    pub fn scaled(delta: f64, n: usize) -> Self {
        LsrEigFactors { delta, upar: Array2::zeros((n, 0)), lam_hat: Array1::zeros(0) }
    }
}

impl CompactSr1 {
    pub fn scaled(delta: f64, n: usize) -> Self {
        CompactSr1 { delta, psi: Array2::zeros((n, 0)), mmat: Array2::zeros((0, 0)) }
    }

    pub fn dim(&self) -> usize {
        self.psi.nrows()
    }

    pub fn rank(&self) -> usize {
        self.psi.ncols()
    }

    /// Matrix-free product B·v in O(mn + m³); never forms an n×n matrix.
    pub fn apply(&self, v: &Array1<f64>) -> Result<Array1<f64>> {
        if v.len() != self.dim() {
            return Err(Error::invalid("apply_b: dimension mismatch"));
        }
        let mut out = v * self.delta;
        if self.rank() > 0 {
            let pt_v = self.psi.t().dot(v);
            let rhs = pt_v.insert_axis(ndarray::Axis(1));
            let (sol, _) = dense::solve_small(&self.mmat, &rhs)?;
            let sol = sol.column(0).to_owned();
            out = out + self.psi.dot(&sol);
        }
        Ok(out)
    }

    /// Explicit δI + Ψ M⁻¹ Ψᵀ, guarded to small n. Test-oracle path only.
    pub fn dense_b(&self) -> Result<Array2<f64>> {
        let n = self.dim();
        if n > 64 {
            return Err(Error::invalid("dense_b is an oracle guarded to n <= 64"));
        }
        let mut b = Array2::<f64>::eye(n) * self.delta;
        if self.rank() > 0 {
            let (minv_pt, _) = dense::solve_small(&self.mmat, &self.psi.t().to_owned())?;
            b = b + self.psi.dot(&minv_pt);
        }
        Ok(b)
    }

    /// Partial eigendecomposition: Ψ = QR, R M⁻¹ Rᵀ = P Λ̂ Pᵀ, U∥ = QP.
    pub fn partial_eig(&self) -> Result<LsrEigFactors> {
        if self.rank() == 0 {
            return Ok(LsrEigFactors::scaled(self.delta, self.dim()));
        }
        let (q, r) = dense::qr_thin(&self.psi)?;
        let (minv_rt, _) = dense::solve_small(&self.mmat, &r.t().to_owned())?;
        let rmr = r.dot(&minv_rt);
        let rmr = (&rmr + &rmr.t()) * 0.5;
        let (p, lam_hat) = dense::sym_eig(&rmr)?;
        let upar = q.dot(&p);
        Ok(LsrEigFactors { delta: self.delta, upar, lam_hat })
    }
}

/// Outcome of the spectral-shift computation.
#[derive(Debug, Clone, Copy)]
pub struct ShiftOutcome {
    pub delta: f64,
    /// True when SᵀS failed its positive-definiteness check and the previous
    /// δ (or δ_min) was reused.
    pub fallback: bool,
}

/// Computes δ_k = clamp(min generalized eigenvalue of (SᵀY, SᵀS), δ_min, δ_max).
/// SᵀY is symmetrized first; on a degenerate metric the previous δ is reused.
pub fn spectral_shift(
    buf: &PairBuffer,
    bounds: (f64, f64),
    previous: Option<f64>,
) -> Result<ShiftOutcome> {
    if buf.is_empty() {
        return Err(Error::invalid("spectral_shift: empty pair buffer"));
    }
    let (delta_min, delta_max) = bounds;
    let s = buf.s_matrix();
    let y = buf.y_matrix();
    let sty = dense::gram(&s, &y);
    let sts = dense::gram(&s, &s);
    match dense::gen_sym_eig(&sty, &sts) {
        Ok(lam) => {
            let delta = lam[0].clamp(delta_min, delta_max);
            Ok(ShiftOutcome { delta, fallback: false })
        }
        Err(Error::IllConditionedMetric(_)) => {
            let delta = previous.unwrap_or(delta_min).clamp(delta_min, delta_max);
            Ok(ShiftOutcome { delta, fallback: true })
        }
        Err(e) => Err(e),
    }
}

/// Condition-estimate threshold above which the compact middle matrix is
/// treated as singular and history is shed.
pub const MMAT_COND_LIMIT: f64 = 1e12;

/// Builds the compact representation for the current buffer contents.
/// Fails with `SingularMemory` when Mmat's condition estimate exceeds the
/// guard; callers drop the oldest pair and retry (see `build_compact_guarded`).
pub fn build_compact(buf: &PairBuffer, delta: f64) -> Result<CompactSr1> {
    if buf.is_empty() {
        return Err(Error::invalid("build_compact: empty pair buffer"));
    }
    let s = buf.s_matrix();
    let y = buf.y_matrix();
    let k = buf.len();
    let psi = &y - &(&s * delta);
    // Ψ ≈ 0 means B ≡ δI already explains the stored curvature; the middle
    // matrix is then meaningless (and typically singular).
    if frob(&psi) <= 1e-12 * frob(&y).max(1.0) {
        return Ok(CompactSr1::scaled(delta, s.nrows()));
    }
    let sty = dense::gram(&s, &y);
    let sts = dense::gram(&s, &s);
    let mut mmat = Array2::<f64>::zeros((k, k));
    for i in 0..k {
        for j in 0..k {
            // D + L + Lᵀ from SᵀY, minus δ SᵀS.
            let dl = if i >= j { sty[[i, j]] } else { sty[[j, i]] };
            mmat[[i, j]] = dl - delta * sts[[i, j]];
        }
    }
    let cond = dense::condition_estimate(&mmat);
    if cond > MMAT_COND_LIMIT {
        return Err(Error::SingularMemory(format!("Mmat condition estimate {cond:.3e}")));
    }
    // The pivot-ratio estimate is scale-invariant and blind to a uniformly
    // tiny M (e.g. the 1×1 case where δ equals the pair's Rayleigh quotient
    // and sᵀΨ cancels exactly); catch that against the natural ‖Ψ‖‖S‖ scale.
    let scale = frob(&psi) * frob(&s);
    if frob(&mmat) <= 1e-12 * scale {
        return Err(Error::SingularMemory(format!(
            "Mmat norm {:.3e} below scale {scale:.3e}",
            frob(&mmat)
        )));
    }
    Ok(CompactSr1 { delta, psi, mmat })
}

/// Builds the compact form, shedding the oldest pair on a singular middle
/// matrix. Clears the buffer entirely if even a single pair is degenerate;
/// the returned factors then encode B = δI.
pub fn build_compact_guarded(buf: &mut PairBuffer, delta: f64, n: usize) -> Result<CompactSr1> {
    loop {
        if buf.is_empty() {
            return Ok(CompactSr1::scaled(delta, n));
        }
        match build_compact(buf, delta) {
            Ok(c) => return Ok(c),
            Err(Error::SingularMemory(_)) => {
                if buf.len() == 1 {
                    buf.clear();
                    return Ok(CompactSr1::scaled(delta, n));
                }
                buf.drop_oldest();
            }
            Err(e) => return Err(e),
        }
    }
}
