//! Small dense linear-algebra kernels: thin QR, symmetric and
//! generalized-symmetric eigensolves, and pivoted linear solves.
//!
//! Everything here is sized for n×k and k×k problems with k bounded by the
//! quasi-Newton memory parameter, so plain loops beat a BLAS round trip.

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};

pub fn frob(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_finite_mat(a: &Array2<f64>, name: &str) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} contains non-finite entries")))
    }
}

/// Thin QR factorization of an n×k matrix (n ≥ k) via Householder
/// reflections. The diagonal of R is made nonnegative so the factors are
/// deterministic. Rank-deficient input is allowed; Q always has orthonormal
/// columns.
pub fn qr_thin(a: &Array2<f64>) -> Result<(Array2<f64>, Array2<f64>)> {
    let (n, k) = a.dim();
    if n < k {
        return Err(Error::invalid(format!("qr_thin: need n >= k, got {n}x{k}")));
    }
    check_finite_mat(a, "qr_thin input")?;

    let mut m = a.clone();
    // Householder vectors, one per column (empty when the column is already zero).
    let mut reflectors: Vec<Array1<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let mut v = Array1::<f64>::zeros(n - j);
        for i in j..n {
            v[i - j] = m[[i, j]];
        }
        let norm = v.dot(&v).sqrt();
        if norm <= f64::EPSILON * frob(a).max(1.0) {
            reflectors.push(Array1::zeros(0));
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = v.dot(&v).sqrt();
        if vnorm == 0.0 {
            reflectors.push(Array1::zeros(0));
            continue;
        }
        v /= vnorm;
        // Apply I - 2vvᵀ to the trailing block.
        for c in j..k {
            let mut dot = 0.0;
            for i in j..n {
                dot += v[i - j] * m[[i, c]];
            }
            for i in j..n {
                m[[i, c]] -= 2.0 * dot * v[i - j];
            }
        }
        reflectors.push(v);
    }

    let mut r = Array2::<f64>::zeros((k, k));
    for i in 0..k {
        for j in i..k {
            r[[i, j]] = m[[i, j]];
        }
    }

    // Thin Q: apply the reflectors in reverse to the first k identity columns.
    let mut q = Array2::<f64>::zeros((n, k));
    for j in 0..k {
        q[[j, j]] = 1.0;
    }
    for (j, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        for c in 0..k {
            let mut dot = 0.0;
            for i in j..n {
                dot += v[i - j] * q[[i, c]];
            }
            for i in j..n {
                q[[i, c]] -= 2.0 * dot * v[i - j];
            }
        }
    }

    // Sign convention: diag(R) >= 0.
    for j in 0..k {
        if r[[j, j]] < 0.0 {
            for c in j..k {
                r[[j, c]] = -r[[j, c]];
            }
            for i in 0..n {
                q[[i, j]] = -q[[i, j]];
            }
        }
    }
    Ok((q, r))
}

/// Eigendecomposition of a symmetric k×k matrix by cyclic Jacobi rotations.
/// Returns an orthogonal matrix and the eigenvalues sorted ascending, with
/// the eigenvector columns permuted to match.
pub fn sym_eig(a: &Array2<f64>) -> Result<(Array2<f64>, Array1<f64>)> {
    let (k, k2) = a.dim();
    if k != k2 {
        return Err(Error::invalid(format!("sym_eig: matrix is {k}x{k2}, not square")));
    }
    check_finite_mat(a, "sym_eig input")?;
    let norm = frob(a);
    let asym = {
        let d = a - &a.t();
        frob(&d)
    };
    if asym > 1e-10 * norm.max(1.0) {
        return Err(Error::invalid(format!(
            "sym_eig: input asymmetry {asym:.3e} exceeds 1e-10 relative"
        )));
    }
    let mut m = (a + &a.t()) * 0.5;
    let mut v = Array2::<f64>::eye(k);
    if k <= 1 {
        let lam = if k == 1 { Array1::from(vec![m[[0, 0]]]) } else { Array1::zeros(0) };
        return Ok((v, lam));
    }

    let tol = 1e-15 * norm.max(1.0);
    let max_sweeps = 128;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut off = 0.0;
        for i in 0..k {
            for j in (i + 1)..k {
                off += m[[i, j]] * m[[i, j]];
            }
        }
        if off.sqrt() <= tol {
            converged = true;
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = m[[p, q]];
                if apq.abs() <= tol / (k as f64) {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..k {
                    let mip = m[[i, p]];
                    let miq = m[[i, q]];
                    m[[i, p]] = c * mip - s * miq;
                    m[[i, q]] = s * mip + c * miq;
                }
                for i in 0..k {
                    let mpi = m[[p, i]];
                    let mqi = m[[q, i]];
                    m[[p, i]] = c * mpi - s * mqi;
                    m[[q, i]] = s * mpi + c * mqi;
                }
                for i in 0..k {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::numeric("sym_eig: Jacobi sweep limit reached"));
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| m[[i, i]].partial_cmp(&m[[j, j]]).unwrap());
    let lam = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut p = Array2::<f64>::zeros((k, k));
    for (col, &src) in order.iter().enumerate() {
        for row in 0..k {
            p[[row, col]] = v[[row, src]];
        }
    }
    Ok((p, lam))
}

/// Generalized symmetric eigenvalues of the pencil (A, B) with B symmetric
/// positive definite: solves A u = λ B u by whitening A with B's
/// eigendecomposition. A is symmetrized internally. Returns the eigenvalues
/// ascending.
pub fn gen_sym_eig(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array1<f64>> {
    let k = a.nrows();
    if a.dim() != b.dim() || a.nrows() != a.ncols() {
        return Err(Error::invalid("gen_sym_eig: dimension mismatch"));
    }
    let a_sym = (a + &a.t()) * 0.5;
    let b_sym = (b + &b.t()) * 0.5;
    let (vb, db) = sym_eig(&b_sym)?;
    let trace: f64 = (0..k).map(|i| b_sym[[i, i]]).sum();
    let floor = 1e-12 * trace / k.max(1) as f64;
    if db.iter().any(|&d| d <= floor) {
        return Err(Error::IllConditionedMetric(format!(
            "metric min eigenvalue {:.3e} below floor {:.3e}",
            db.iter().cloned().fold(f64::INFINITY, f64::min),
            floor
        )));
    }
    // W = V D^{-1/2}; the pencil eigenvalues are those of Wᵀ A W.
    let mut w = vb;
    for j in 0..k {
        let scale = 1.0 / db[j].sqrt();
        w.column_mut(j).mapv_inplace(|x| x * scale);
    }
    let c = w.t().dot(&a_sym).dot(&w);
    let c = (&c + &c.t()) * 0.5;
    let (_, lam) = sym_eig(&c)?;
    Ok(lam)
}

/// Solves A X = RHS for a square k×k system by LU with partial pivoting.
/// Returns the solution together with a cheap condition estimate
/// (max/min pivot magnitude) for the caller's singularity guard.
pub fn solve_small(a: &Array2<f64>, rhs: &Array2<f64>) -> Result<(Array2<f64>, f64)> {
    let k = a.nrows();
    if a.ncols() != k || rhs.nrows() != k {
        return Err(Error::invalid("solve_small: dimension mismatch"));
    }
    check_finite_mat(a, "solve_small lhs")?;
    check_finite_mat(rhs, "solve_small rhs")?;
    let p = rhs.ncols();
    let mut lu = a.clone();
    let mut x = rhs.clone();
    let anorm = frob(a);
    let pivot_tol = 1e-14 * anorm;

    let mut pivots: Vec<f64> = Vec::with_capacity(k);
    for col in 0..k {
        let mut best = col;
        for row in (col + 1)..k {
            if lu[[row, col]].abs() > lu[[best, col]].abs() {
                best = row;
            }
        }
        if best != col {
            for j in 0..k {
                lu.swap([col, j], [best, j]);
            }
            for j in 0..p {
                x.swap([col, j], [best, j]);
            }
        }
        let piv = lu[[col, col]];
        if piv.abs() <= pivot_tol {
            return Err(Error::SingularSystem { cond: f64::INFINITY });
        }
        pivots.push(piv.abs());
        for row in (col + 1)..k {
            let factor = lu[[row, col]] / piv;
            lu[[row, col]] = factor;
            for j in (col + 1)..k {
                let upd = factor * lu[[col, j]];
                lu[[row, j]] -= upd;
            }
            for j in 0..p {
                let upd = factor * x[[col, j]];
                x[[row, j]] -= upd;
            }
        }
    }
    // Back substitution.
    for col in (0..k).rev() {
        for j in 0..p {
            let mut acc = x[[col, j]];
            for c in (col + 1)..k {
                acc -= lu[[col, c]] * x[[c, j]];
            }
            x[[col, j]] = acc / lu[[col, col]];
        }
    }
    let pmax = pivots.iter().cloned().fold(0.0, f64::max);
    let pmin = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond = if pmin > 0.0 { pmax / pmin } else { f64::INFINITY };
    Ok((x, cond))
}

/// Condition estimate of a square matrix without solving anything, used by
/// the memory module's singularity guard.
pub fn condition_estimate(a: &Array2<f64>) -> f64 {
    match solve_small(a, &Array2::<f64>::eye(a.nrows())) {
        Ok((_, cond)) => cond,
        Err(_) => f64::INFINITY,
    }
}

/// Column-stacks a slice of equal-length vectors into an n×k matrix.
pub fn stack_columns(cols: &[Array1<f64>]) -> Array2<f64> {
    if cols.is_empty() {
        return Array2::zeros((0, 0));
    }
    let n = cols[0].len();
    let mut out = Array2::zeros((n, cols.len()));
    for (j, c) in cols.iter().enumerate() {
        out.column_mut(j).assign(c);
    }
    out
}

pub fn matvec(a: &Array2<f64>, v: &Array1<f64>) -> Array1<f64> {
    a.dot(v)
}

/// Gram matrix AᵀB for column-stacked histories.
pub fn gram(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    a.t().dot(b)
}

pub fn outer(u: &Array1<f64>, v: &Array1<f64>) -> Array2<f64> {
    let n = u.len();
    let m = v.len();
    let mut out = Array2::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            out[[i, j]] = u[i] * v[j];
        }
    }
    out
}

#[allow(dead_code)]
pub fn sum_axis0(a: &Array2<f64>) -> Array1<f64> {
    a.sum_axis(Axis(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rand_mat(rng: &mut impl Rng, n: usize, k: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, k), |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn qr_identity() {
        let a = Array2::<f64>::eye(3);
        let (q, r) = qr_thin(&a).unwrap();
        assert!(frob(&(&q - &Array2::<f64>::eye(3))) < 1e-12);
        assert!(frob(&(&r - &Array2::<f64>::eye(3))) < 1e-12);
    }

    #[test]
    fn qr_hand_column() {
        let a = array![[3.0], [4.0]];
        let (q, r) = qr_thin(&a).unwrap();
        assert!((q[[0, 0]] - 0.6).abs() < 1e-12);
        assert!((q[[1, 0]] - 0.8).abs() < 1e-12);
        assert!((r[[0, 0]] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn qr_rejects_wide() {
        let a = Array2::<f64>::zeros((2, 3));
        assert!(matches!(qr_thin(&a), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn qr_random_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.gen_range(4..=64);
            let k = rng.gen_range(1..=10.min(n));
            let a = rand_mat(&mut rng, n, k);
            let (q, r) = qr_thin(&a).unwrap();
            let recon = q.dot(&r);
            assert!(frob(&(&recon - &a)) <= 1e-12 * frob(&a).max(1.0));
            let qtq = q.t().dot(&q);
            assert!(frob(&(&qtq - &Array2::<f64>::eye(k))) <= 1e-12);
            for j in 0..k {
                assert!(r[[j, j]] >= 0.0);
            }
        }
    }

    #[test]
    fn qr_rank_deficient() {
        // Duplicate columns: Q must stay orthonormal and QR must reconstruct.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = Array1::from_shape_fn(6, |_| rng.gen_range(-1.0..1.0));
        let a = stack_columns(&[c.clone(), c.clone(), c]);
        let (q, r) = qr_thin(&a).unwrap();
        assert!(frob(&(&q.dot(&r) - &a)) <= 1e-12 * frob(&a).max(1.0));
        assert!(frob(&(&q.t().dot(&q) - &Array2::<f64>::eye(3))) <= 1e-12);
    }

    #[test]
    fn eig_diagonal() {
        let a = array![[5.0, 0.0], [0.0, 2.0]];
        let (p, lam) = sym_eig(&a).unwrap();
        assert!((lam[0] - 2.0).abs() < 1e-12);
        assert!((lam[1] - 5.0).abs() < 1e-12);
        // P is a permutation up to signs.
        assert!((p[[0, 0]].abs() - 0.0).abs() < 1e-12);
        assert!((p[[1, 0]].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_offdiagonal_pair() {
        let a = array![[0.0, 1.0], [1.0, 0.0]];
        let (_, lam) = sym_eig(&a).unwrap();
        assert!((lam[0] + 1.0).abs() < 1e-12);
        assert!((lam[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let m = rand_mat(&mut rng, 5, 5);
            let a = (&m + &m.t()) * 0.5;
            let (p, lam) = sym_eig(&a).unwrap();
            let mut d = Array2::<f64>::zeros((5, 5));
            for i in 0..5 {
                d[[i, i]] = lam[i];
            }
            let recon = p.dot(&d).dot(&p.t());
            assert!(frob(&(&recon - &a)) < 1e-10 * frob(&a).max(1.0));
            let trace: f64 = (0..5).map(|i| a[[i, i]]).sum();
            assert!((trace - lam.sum()).abs() <= 1e-10 * frob(&a).max(1.0));
        }
    }

    #[test]
    fn eig_rejects_nonfinite() {
        let a = array![[f64::NAN, 0.0], [0.0, 1.0]];
        assert!(sym_eig(&a).is_err());
    }

    #[test]
    fn gen_eig_identity_metric() {
        let a = array![[3.0, 0.0], [0.0, 5.0]];
        let b = Array2::<f64>::eye(2);
        let lam = gen_sym_eig(&a, &b).unwrap();
        assert!((lam[0] - 3.0).abs() < 1e-10);
        assert!((lam[1] - 5.0).abs() < 1e-10);
    }

    #[test]
    fn gen_eig_proportional() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let m = rand_mat(&mut rng, 3, 3);
        let b = m.t().dot(&m) + Array2::<f64>::eye(3);
        let a = &b * 2.0;
        let lam = gen_sym_eig(&a, &b).unwrap();
        for &l in lam.iter() {
            assert!((l - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gen_eig_matches_cholesky_whitening_oracle() {
        // Independent oracle: explicit Cholesky of B, then sym_eig(L⁻¹ A L⁻ᵀ).
        fn cholesky(b: &Array2<f64>) -> Array2<f64> {
            let k = b.nrows();
            let mut l = Array2::<f64>::zeros((k, k));
            for i in 0..k {
                for j in 0..=i {
                    let mut sum = b[[i, j]];
                    for c in 0..j {
                        sum -= l[[i, c]] * l[[j, c]];
                    }
                    if i == j {
                        l[[i, j]] = sum.sqrt();
                    } else {
                        l[[i, j]] = sum / l[[j, j]];
                    }
                }
            }
            l
        }
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let k = 4;
            let m = rand_mat(&mut rng, k, k);
            let b = m.t().dot(&m) + Array2::<f64>::eye(k);
            let s = rand_mat(&mut rng, k, k);
            let a = (&s + &s.t()) * 0.5;
            let lam = gen_sym_eig(&a, &b).unwrap();

            let l = cholesky(&b);
            // Solve L W = A, then L Z = Wᵀ (forward substitutions).
            let fwd = |l: &Array2<f64>, rhs: &Array2<f64>| {
                let mut x = rhs.clone();
                for col in 0..x.ncols() {
                    for i in 0..k {
                        let mut acc = x[[i, col]];
                        for c in 0..i {
                            acc -= l[[i, c]] * x[[c, col]];
                        }
                        x[[i, col]] = acc / l[[i, i]];
                    }
                }
                x
            };
            let w = fwd(&l, &a);
            let z = fwd(&l, &w.t().to_owned());
            let z = (&z + &z.t()) * 0.5;
            let (_, lam_oracle) = sym_eig(&z).unwrap();
            for i in 0..k {
                assert!(
                    (lam[i] - lam_oracle[i]).abs() < 1e-9,
                    "gen eig {} vs oracle {}",
                    lam[i],
                    lam_oracle[i]
                );
            }
        }
    }

    #[test]
    fn gen_eig_rejects_indefinite_metric() {
        let a = Array2::<f64>::eye(2);
        let b = array![[1.0, 0.0], [0.0, -1.0]];
        assert!(matches!(gen_sym_eig(&a, &b), Err(Error::IllConditionedMetric(_))));
    }

    #[test]
    fn solve_identity() {
        let a = Array2::<f64>::eye(3);
        let x = array![[1.0], [2.0], [3.0]];
        let (sol, cond) = solve_small(&a, &x).unwrap();
        assert!(frob(&(&sol - &x)) < 1e-14);
        assert!((cond - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solve_diagonal() {
        let a = array![[2.0, 0.0], [0.0, 4.0]];
        let rhs = array![[2.0], [8.0]];
        let (sol, _) = solve_small(&a, &rhs).unwrap();
        assert!((sol[[0, 0]] - 1.0).abs() < 1e-14);
        assert!((sol[[1, 0]] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn solve_singular_detected() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        let rhs = array![[1.0], [1.0]];
        assert!(matches!(solve_small(&a, &rhs), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn solve_random_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = rand_mat(&mut rng, 5, 5) + Array2::<f64>::eye(5) * 3.0;
            let x = rand_mat(&mut rng, 5, 2);
            let rhs = a.dot(&x);
            let (sol, _) = solve_small(&a, &rhs).unwrap();
            let resid = frob(&(&a.dot(&sol) - &rhs));
            assert!(resid <= 1e-10 * frob(&a) * frob(&sol).max(1.0));
        }
    }
}
