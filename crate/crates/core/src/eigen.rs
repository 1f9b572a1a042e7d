//! Eigensolvers for the complex-symmetric pencil `(K, M)`.
//!
//! [`eig_all`] reduces to the standard problem `M⁻¹K` and calls a dense
//! complex eigensolver. [`eig_near`] runs shift-invert Arnoldi on
//! `(K − σM)⁻¹M` with full (twice classical Gram–Schmidt) reorthogonalization.
//! Both report the true residual `‖Kv − μMv‖ / ((‖K‖ + |μ|‖M‖)‖v‖)` per pair.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::ShiftedSolver;
use crate::sparse::{dot_h, dot_u, norm2, BandLu, CsrMatrix};
use crate::{Error, Result, C64};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_DENSE_CAP: usize = 6000;
pub const DEFAULT_MAX_ITER: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum EigenMode {
    All,
    Near { shift: C64, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRequest {
    #[serde(flatten)]
    pub mode: EigenMode,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Maximum Krylov dimension for the iterative path.
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

fn default_dense_cap() -> usize {
    DEFAULT_DENSE_CAP
}

impl EigenRequest {
    pub fn all() -> Self {
        Self {
            mode: EigenMode::All,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }

    pub fn near(shift: C64, k: usize) -> Self {
        Self {
            mode: EigenMode::Near { shift, k },
            ..Self::all()
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Argument(format!("eigen tolerance must be positive, got {}", self.tol)));
        }
        if let EigenMode::Near { k, .. } = self.mode {
            if k == 0 || k > dim {
                return Err(Error::Argument(format!("requested {k} eigenvalues of a dimension-{dim} pencil")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenResult {
    pub eigenvalues: Vec<C64>,
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Vec<C64>>>,
    pub residuals: Vec<f64>,
    /// False when the iterative path stopped before `requested` pairs converged.
    pub converged: bool,
    pub requested: usize,
    pub shift: Option<C64>,
    pub krylov_dim: Option<usize>,
}

impl EigenResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Dispatches on [`EigenRequest::mode`].
pub fn solve(k: &CsrMatrix, m: &CsrMatrix, req: &EigenRequest) -> Result<EigenResult> {
    req.validate(k.nrows())?;
    match req.mode {
        EigenMode::All => eig_all_capped(k, m, req.tol, req.dense_cap),
        EigenMode::Near { shift, k: count } => eig_near_with(k, m, shift, count, req.tol, req.max_iter),
    }
}

/// Relative pair residual used by both solvers.
pub fn pair_residual(k: &CsrMatrix, m: &CsrMatrix, mu: C64, v: &[C64], norms: (f64, f64)) -> f64 {
    let kv = k.mul_vec(v);
    let mv = m.mul_vec(v);
    let r: Vec<C64> = kv.iter().zip(&mv).map(|(a, b)| a - mu * b).collect();
    norm2(&r) / ((norms.0 + mu.norm() * norms.1) * norm2(v))
}

fn check_square(k: &CsrMatrix, m: &CsrMatrix) -> Result<usize> {
    let n = k.nrows();
    for (r, c) in [(k.nrows(), k.ncols()), (m.nrows(), m.ncols())] {
        if r != n || c != n {
            return Err(Error::Dimension { expected: n, found: if r != n { r } else { c } });
        }
    }
    if n == 0 {
        return Err(Error::Argument("empty pencil".into()));
    }
    Ok(n)
}

fn order_re_im(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// All eigenvalues of the pencil, sorted by `(Re, Im)`.
pub fn eig_all(k: &CsrMatrix, m: &CsrMatrix, tol: f64) -> Result<EigenResult> {
    eig_all_capped(k, m, tol, DEFAULT_DENSE_CAP)
}

pub fn eig_all_capped(k: &CsrMatrix, m: &CsrMatrix, tol: f64, cap: usize) -> Result<EigenResult> {
    let n = check_square(k, m)?;
    if n > cap {
        return Err(Error::Argument(format!(
            "dimension {n} exceeds the dense cap {cap}; request near-mode eigenvalues instead"
        )));
    }
    let mlu = BandLu::factor(m).map_err(|e| Error::Numerical(format!("mass matrix is singular: {e}")))?;
    if mlu.pivot_ratio() < 1e-12 {
        return Err(Error::Numerical(format!(
            "mass matrix is numerically singular (pivot ratio {:e})",
            mlu.pivot_ratio()
        )));
    }
    // A = M⁻¹K column by column
    let kt = k.transpose();
    let mut a = Mat::<C64>::zeros(n, n);
    let mut col = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        col.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
        for (i, v) in kt.row(j) {
            col[i] = v;
        }
        mlu.solve_in_place(&mut col);
        for i in 0..n {
            a[(i, j)] = col[i];
        }
    }
    let eig = a
        .eigen()
        .map_err(|e| Error::Numerical(format!("dense eigensolver failed: {e:?}")))?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let norms = (k.norm_inf(), m.norm_inf());
    let mut pairs: Vec<(C64, Vec<C64>, f64)> = (0..n)
        .map(|j| {
            let mu = s[j];
            let v: Vec<C64> = (0..n).map(|i| u[(i, j)]).collect();
            let res = pair_residual(k, m, mu, &v, norms);
            (mu, v, res)
        })
        .collect();
    for pair in pairs.iter_mut().filter(|p| !(p.2 <= tol)) {
        refine_pair(k, m, pair, norms);
        if !(pair.2 <= tol) {
            return Err(Error::Numerical(format!(
                "dense eigenpair at μ = {} has residual {:e} above {tol:e}",
                pair.0, pair.2
            )));
        }
    }
    pairs.sort_by(|a, b| order_re_im(&a.0, &b.0));
    Ok(EigenResult {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        residuals: pairs.iter().map(|p| p.2).collect(),
        eigenvectors: Some(pairs.into_iter().map(|p| p.1).collect()),
        converged: true,
        requested: n,
        shift: None,
        krylov_dim: None,
    })
}

/// Two steps of inverse iteration with the bilinear Rayleigh quotient.
fn refine_pair(k: &CsrMatrix, m: &CsrMatrix, pair: &mut (C64, Vec<C64>, f64), norms: (f64, f64)) {
    for _ in 0..2 {
        let mut shift = pair.0;
        let lu = match BandLu::factor(&k.linear_combination(C64::new(1.0, 0.0), m, -shift)) {
            Ok(lu) => lu,
            Err(_) => {
                shift += C64::new(1e-12 * (1.0 + shift.norm()), 0.0);
                match BandLu::factor(&k.linear_combination(C64::new(1.0, 0.0), m, -shift)) {
                    Ok(lu) => lu,
                    Err(_) => return,
                }
            }
        };
        let mut x = lu.solve(&m.mul_vec(&pair.1));
        let nx = norm2(&x);
        if !(nx.is_finite() && nx > 0.0) {
            return;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let mu = dot_u(&x, &k.mul_vec(&x)) / dot_u(&x, &m.mul_vec(&x));
        let res = pair_residual(k, m, mu, &x, norms);
        if res < pair.2 {
            *pair = (mu, x, res);
        }
    }
}

/// `k` eigenvalues nearest `shift`, sorted by distance then `(Re, Im)`.
pub fn eig_near(k: &CsrMatrix, m: &CsrMatrix, shift: C64, count: usize, tol: f64) -> Result<EigenResult> {
    eig_near_with(k, m, shift, count, tol, DEFAULT_MAX_ITER)
}

pub fn eig_near_with(
    k: &CsrMatrix,
    m: &CsrMatrix,
    shift: C64,
    count: usize,
    tol: f64,
    max_iter: usize,
) -> Result<EigenResult> {
    let n = check_square(k, m)?;
    if count == 0 || count > n {
        return Err(Error::Argument(format!("requested {count} eigenvalues of a dimension-{n} pencil")));
    }
    let solver = ShiftedSolver::new(k, m, shift)?;
    let norms = (k.norm_inf(), m.norm_inf());
    let max_dim = max_iter.max(count + 2).min(n);
    let first_check = (2 * count + 10).min(max_dim);
    let check_every = 10;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_a7e0);
    let mut v0: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let nv = norm2(&v0);
    v0.iter_mut().for_each(|x| *x /= nv);

    let mut basis: Vec<Vec<C64>> = vec![v0];
    // h[j] holds column j of the Hessenberg matrix (length j + 2)
    let mut h: Vec<Vec<C64>> = Vec::new();
    let mut best: Vec<(C64, Vec<C64>, f64)>;
    let mut breakdown = false;

    loop {
        let j = h.len();
        let (mut w, _) = solver.apply(m, &basis[j])?;
        let mut hcol = vec![C64::new(0.0, 0.0); j + 2];
        for _ in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let c = dot_h(q, &w);
                hcol[i] += c;
                w.iter_mut().zip(q).for_each(|(w, q)| *w -= c * q);
            }
        }
        let beta = norm2(&w);
        hcol[j + 1] = C64::new(beta, 0.0);
        h.push(hcol);
        let dim = h.len();
        let scale = h.iter().flat_map(|c| c.iter()).map(|z| z.norm()).fold(0.0, f64::max);
        if beta <= 1e-13 * scale || dim == n {
            breakdown = true;
        } else {
            w.iter_mut().for_each(|x| *x /= beta);
            basis.push(w);
        }

        let at_check = dim >= first_check && (dim - first_check).is_multiple_of(check_every);
        if at_check || breakdown || dim >= max_dim {
            best = ritz_pairs(k, m, &basis[..dim], &h, shift, count, norms)?;
            let done = best.len() >= count && best.iter().take(count).all(|p| p.2 <= tol);
            if done || breakdown || dim >= max_dim {
                break;
            }
        }
    }

    let krylov_dim = h.len();
    best.truncate(count);
    let converged_all = best.len() == count && best.iter().all(|p| p.2 <= tol);
    best.retain(|p| p.2 <= tol);
    if !converged_all {
        log::warn!(
            "shift-invert Arnoldi at σ = {shift}: {} of {count} pairs converged with Krylov dimension {krylov_dim}",
            best.len()
        );
    }
    best.sort_by(|a, b| {
        (a.0 - shift)
            .norm()
            .total_cmp(&(b.0 - shift).norm())
            .then_with(|| order_re_im(&a.0, &b.0))
    });
    Ok(EigenResult {
        eigenvalues: best.iter().map(|p| p.0).collect(),
        residuals: best.iter().map(|p| p.2).collect(),
        eigenvectors: Some(best.into_iter().map(|p| p.1).collect()),
        converged: converged_all,
        requested: count,
        shift: Some(shift),
        krylov_dim: Some(krylov_dim),
    })
}

/// Ritz pairs for the `count` largest `|θ|`, mapped back to `μ = σ + 1/θ`.
fn ritz_pairs(
    k: &CsrMatrix,
    m: &CsrMatrix,
    basis: &[Vec<C64>],
    h: &[Vec<C64>],
    shift: C64,
    count: usize,
    norms: (f64, f64),
) -> Result<Vec<(C64, Vec<C64>, f64)>> {
    let d = h.len();
    let hm = Mat::<C64>::from_fn(d, d, |i, j| if i < h[j].len() { h[j][i] } else { C64::new(0.0, 0.0) });
    let eig = hm
        .eigen()
        .map_err(|e| Error::Numerical(format!("Hessenberg eigensolve failed: {e:?}")))?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let mut idx: Vec<usize> = (0..d).filter(|&i| s[i].norm() > 0.0).collect();
    idx.sort_by(|&a, &b| s[b].norm().total_cmp(&s[a].norm()).then(a.cmp(&b)));
    let n = basis[0].len();
    Ok(idx
        .into_iter()
        .take(count)
        .map(|i| {
            let mu = shift + s[i].inv();
            let mut y = vec![C64::new(0.0, 0.0); n];
            for (jj, q) in basis.iter().enumerate() {
                let c = u[(jj, i)];
                y.iter_mut().zip(q).for_each(|(y, q)| *y += c * q);
            }
            let res = pair_residual(k, m, mu, &y, norms);
            (mu, y, res)
        })
        .collect())
}
