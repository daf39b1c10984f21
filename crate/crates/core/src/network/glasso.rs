//! Graphical lasso with EBIC model selection over a log-spaced lambda path.
//!
//! The solver is the block coordinate descent of Friedman, Hastie and
//! Tibshirani: each column of the covariance estimate `W` is updated by a
//! lasso regression against the remaining columns. The diagonal is not
//! penalized, so `W_ii = S_ii` throughout.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{CorrelationMatrix, Network, NetworkMethod};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlassoOptions {
    /// EBIC hyperparameter; 0 gives the ordinary BIC.
    pub gamma: f64,
    pub n_lambda: usize,
    pub lambda_min_ratio: f64,
    /// Outer coordinate-descent sweeps allowed per lambda.
    pub max_iter: usize,
    /// Convergence threshold on the mean absolute change of the
    /// off-diagonal `W` entries during a sweep.
    pub tol: f64,
}

impl Default for GlassoOptions {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            n_lambda: 100,
            lambda_min_ratio: 0.1,
            max_iter: 10_000,
            tol: 1e-6,
        }
    }
}

/// Where on the lambda path the EBIC minimum was found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlassoSelection {
    pub lambda: f64,
    pub lambda_index: usize,
    pub ebic: f64,
    pub n_edges: usize,
    pub n_obs: usize,
    pub gamma: f64,
}

/// Solution of the penalized problem at one lambda.
#[derive(Debug, Clone)]
pub struct GlassoFit {
    pub lambda: f64,
    pub precision: DMatrix<f64>,
    pub covariance: DMatrix<f64>,
    pub sweeps: usize,
}

impl GlassoFit {
    /// Number of nonzero off-diagonal entries in the upper triangle.
    pub fn n_edges(&self) -> usize {
        let p = self.precision.nrows();
        (0..p)
            .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
            .filter(|&(i, j)| self.precision[(i, j)] != 0.0)
            .count()
    }

    /// Partial correlations `-theta_ij / sqrt(theta_ii theta_jj)`, zero diagonal.
    pub fn partial_correlations(&self) -> DMatrix<f64> {
        let t = &self.precision;
        let p = t.nrows();
        DMatrix::from_fn(p, p, |i, j| {
            if i == j || t[(i, j)] == 0.0 {
                0.0
            } else {
                (-t[(i, j)] / (t[(i, i)] * t[(j, j)]).sqrt()).clamp(-1.0, 1.0)
            }
        })
    }
}

fn soft_threshold(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Reusable buffers for the exact solve on a fixed support.
#[derive(Default)]
struct Scratch {
    active: Vec<usize>,
    matrix: Vec<f64>,
    rhs: Vec<f64>,
    u: Vec<f64>,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// In-place Cholesky of the row-major `m x m` matrix `a` followed by a solve
/// of `a x = b` (result in `b`). False when `a` is not positive definite.
fn cholesky_solve(a: &mut [f64], b: &mut [f64], m: usize) -> bool {
    let (a, b) = (&mut a[..m * m], &mut b[..m]);
    for i in 0..m {
        let (done, rest) = a.split_at_mut(i * m);
        let row_i = &mut rest[..m];
        for k in 0..i {
            let row_k = &done[k * m..k * m + k + 1];
            row_i[k] = (row_i[k] - dot(&row_i[..k], &row_k[..k])) / row_k[k];
        }
        let sum = row_i[i] - dot(&row_i[..i], &row_i[..i]);
        if sum <= 0.0 {
            return false;
        }
        row_i[i] = sum.sqrt();
    }
    for (i, row) in a.chunks_exact(m).enumerate() {
        b[i] = (b[i] - dot(&row[..i], &b[..i])) / row[i];
    }
    for i in (0..m).rev() {
        let mut sum = b[i];
        for (row, &bl) in a[(i + 1) * m..].chunks_exact(m).zip(&b[i + 1..]) {
            sum -= row[i] * bl;
        }
        b[i] = sum / a[i * m + i];
    }
    true
}

/// Solve `W_AA beta_A = s_A - lambda sign(beta_A)` on the current support `A`
/// of `beta` for column `j`. On success (signs preserved, off-support
/// gradients within `lambda`) `beta` and `u = W beta` are updated in place.
#[allow(clippy::too_many_arguments)]
fn exact_support_solve(
    w: &[f64],
    s: &[f64],
    p: usize,
    j: usize,
    lambda: f64,
    beta: &mut [f64],
    u: &mut [f64],
    scratch: &mut Scratch,
) -> bool {
    let Scratch {
        active,
        matrix,
        rhs,
        u: new_u,
    } = scratch;
    active.clear();
    active.extend((0..p).filter(|&k| k != j && beta[k] != 0.0));
    let m = active.len();
    if m == 0 {
        return false;
    }
    matrix.clear();
    for &a in active.iter() {
        let row = &w[a * p..(a + 1) * p];
        matrix.extend(active.iter().map(|&b| row[b]));
    }
    rhs.clear();
    rhs.extend(active.iter().map(|&k| s[k * p + j] - lambda * beta[k].signum()));
    if !cholesky_solve(matrix, rhs, m) {
        return false;
    }
    if active.iter().zip(rhs.iter()).any(|(&k, &v)| v == 0.0 || v.signum() != beta[k].signum()) {
        return false;
    }
    new_u.clear();
    new_u.resize(p, 0.0);
    for (&k, &v) in active.iter().zip(rhs.iter()) {
        let row = &w[k * p..(k + 1) * p];
        for (ul, wl) in new_u.iter_mut().zip(row) {
            *ul += wl * v;
        }
    }
    let slack = lambda * (1.0 + 1e-12);
    for (k, (&bk, &uk)) in beta.iter().zip(new_u.iter()).enumerate() {
        if k != j && bk == 0.0 && (s[k * p + j] - uk).abs() > slack {
            return false;
        }
    }
    for (&k, &v) in active.iter().zip(rhs.iter()) {
        beta[k] = v;
    }
    u.copy_from_slice(new_u);
    true
}

/// Block coordinate descent state; kept between lambdas for warm starts.
struct Solver<'a> {
    s: &'a [f64],
    p: usize,
    /// Covariance estimate, row-major (symmetric).
    w: Vec<f64>,
    /// Regression coefficients; column `j` lives at `b[j*p..(j+1)*p]`.
    b: Vec<f64>,
    u: Vec<f64>,
    signs: Vec<i8>,
    scratch: Scratch,
}

impl<'a> Solver<'a> {
    fn new(s: &'a [f64], p: usize) -> Self {
        Self {
            s,
            p,
            w: s.to_vec(),
            b: vec![0.0; p * p],
            u: vec![0.0; p],
            signs: vec![0; p],
            scratch: Scratch::default(),
        }
    }

    /// Run sweeps until the mean absolute change of the off-diagonal `W`
    /// entries is below `tol`.
    /// Returns the number of sweeps, or `None` on hitting `max_iter`.
    fn solve(&mut self, lambda: f64, max_iter: usize, tol: f64) -> Option<usize> {
        let p = self.p;
        let inner_tol = tol * 0.1;
        for sweep in 1..=max_iter {
            let mut max_delta = 0.0f64;
            for j in 0..p {
                let beta = &mut self.b[j * p..(j + 1) * p];
                let w = &mut self.w;
                let u = &mut self.u;

                // With a warm start the support and signs usually carry over,
                // so try the exact solve before any coordinate pass.
                if !exact_support_solve(w, self.s, p, j, lambda, beta, u, &mut self.scratch) {
                    // u = W beta over the support (beta_j is always 0)
                    let support = &mut self.scratch.active;
                    support.clear();
                    support.extend((0..p).filter(|&k| beta[k] != 0.0));
                    u.fill(0.0);
                    for &l in support.iter() {
                        let bl = beta[l];
                        for (uk, wl) in u.iter_mut().zip(&w[l * p..(l + 1) * p]) {
                            *uk += wl * bl;
                        }
                    }
                    for (sg, b) in self.signs.iter_mut().zip(beta.iter()) {
                        *sg = sign(*b);
                    }

                    // Coordinate passes until the sign pattern repeats, then an
                    // exact solve on that support, accepted if it satisfies the
                    // lasso optimality conditions.
                    for _ in 0..max_iter {
                        let mut dmax = 0.0f64;
                        for k in 0..p {
                            if k == j {
                                continue;
                            }
                            let wkk = w[k * p + k];
                            let old = beta[k];
                            let r = self.s[k * p + j] - (u[k] - wkk * old);
                            let new = soft_threshold(r, lambda) / wkk;
                            if new != old {
                                let d = new - old;
                                beta[k] = new;
                                let row = &w[k * p..(k + 1) * p];
                                for (ul, wl) in u.iter_mut().zip(row) {
                                    *ul += wl * d;
                                }
                                dmax = dmax.max(d.abs());
                            }
                        }
                        if dmax < inner_tol {
                            break;
                        }
                        let mut same = true;
                        for (sg, b) in self.signs.iter_mut().zip(beta.iter()) {
                            let now = sign(*b);
                            same &= *sg == now;
                            *sg = now;
                        }
                        if same && exact_support_solve(w, self.s, p, j, lambda, beta, u, &mut self.scratch) {
                            break;
                        }
                    }
                }

                for k in 0..p {
                    if k == j {
                        continue;
                    }
                    let new = u[k];
                    max_delta += (new - w[k * p + j]).abs();
                    w[k * p + j] = new;
                    w[j * p + k] = new;
                }
            }
            if max_delta / ((p * (p - 1)).max(1) as f64) < tol {
                return Some(sweep);
            }
        }
        None
    }

    fn fit(&self, lambda: f64, sweeps: usize) -> GlassoFit {
        let p = self.p;
        let mut theta = DMatrix::zeros(p, p);
        for j in 0..p {
            let beta = &self.b[j * p..(j + 1) * p];
            let dot: f64 = (0..p)
                .filter(|&k| k != j)
                .map(|k| self.w[k * p + j] * beta[k])
                .sum();
            let tjj = 1.0 / (self.w[j * p + j] - dot);
            theta[(j, j)] = tjj;
            for k in 0..p {
                if k != j {
                    theta[(k, j)] = -beta[k] * tjj;
                }
            }
        }
        for i in 0..p {
            for j in (i + 1)..p {
                let v = 0.5 * (theta[(i, j)] + theta[(j, i)]);
                theta[(i, j)] = v;
                theta[(j, i)] = v;
            }
        }
        GlassoFit {
            lambda,
            precision: theta,
            covariance: DMatrix::from_row_slice(p, p, &self.w),
            sweeps,
        }
    }
}

/// Solve the graphical lasso at a single `lambda` from a cold start.
pub fn glasso(s: &DMatrix<f64>, lambda: f64, opts: &GlassoOptions) -> Result<GlassoFit> {
    let p = s.nrows();
    let flat: Vec<f64> = s.transpose().as_slice().to_vec();
    let mut solver = Solver::new(&flat, p);
    let sweeps = solver
        .solve(lambda, opts.max_iter, opts.tol)
        .ok_or(Error::NonConvergence { lambda_index: 0 })?;
    Ok(solver.fit(lambda, sweeps))
}

/// Log-spaced lambdas from `max |s_ij|` (off-diagonal) down to `ratio` times that.
pub fn lambda_grid(s: &DMatrix<f64>, n_lambda: usize, ratio: f64) -> Vec<f64> {
    let p = s.nrows();
    let mut lambda_max = 0.0f64;
    for i in 0..p {
        for j in (i + 1)..p {
            lambda_max = lambda_max.max(s[(i, j)].abs());
        }
    }
    if n_lambda <= 1 {
        return vec![lambda_max];
    }
    let lambda_min = lambda_max * ratio;
    let (lo, hi) = (lambda_min.ln(), lambda_max.ln());
    (0..n_lambda)
        .map(|k| {
            if k == 0 {
                lambda_max
            } else if k == n_lambda - 1 {
                lambda_min
            } else {
                (hi + (lo - hi) * k as f64 / (n_lambda - 1) as f64).exp()
            }
        })
        .collect()
}

/// Gaussian log-likelihood (up to a constant): `n/2 (log det K - tr(S K))`.
/// Returns `-inf` when `K` is not positive definite.
pub fn gaussian_loglik(s: &DMatrix<f64>, k: &DMatrix<f64>, n: usize) -> f64 {
    let Some(chol) = k.clone().cholesky() else {
        return f64::NEG_INFINITY;
    };
    let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let trace: f64 = s.component_mul(k).sum();
    n as f64 / 2.0 * (log_det - trace)
}

/// `-2 loglik + E log n + 4 E gamma log p`.
pub fn ebic(loglik: f64, n_edges: usize, n_obs: usize, p: usize, gamma: f64) -> f64 {
    let e = n_edges as f64;
    -2.0 * loglik + e * (n_obs as f64).ln() + 4.0 * e * gamma * (p as f64).ln()
}

/// Fit the whole lambda path (warm-started, largest lambda first) and
/// return each fit with its EBIC.
pub fn ebic_glasso_path(
    c: &CorrelationMatrix,
    n_obs: usize,
    opts: &GlassoOptions,
) -> Result<Vec<(GlassoFit, f64)>> {
    if n_obs < 3 {
        return Err(Error::Input(format!("EBIC needs at least 3 observations, got {n_obs}")));
    }
    let s = c.values();
    let p = s.nrows();
    let flat: Vec<f64> = s.transpose().as_slice().to_vec();
    let mut solver = Solver::new(&flat, p);
    let grid = lambda_grid(s, opts.n_lambda, opts.lambda_min_ratio);
    let mut out = Vec::with_capacity(grid.len());
    for (idx, &lambda) in grid.iter().enumerate() {
        let sweeps = solver
            .solve(lambda, opts.max_iter, opts.tol)
            .ok_or(Error::NonConvergence { lambda_index: idx })?;
        let fit = solver.fit(lambda, sweeps);
        let ll = gaussian_loglik(s, &fit.precision, n_obs);
        let score = ebic(ll, fit.n_edges(), n_obs, p, opts.gamma);
        out.push((fit, score));
    }
    Ok(out)
}

/// EBIC-selected graphical lasso network of partial correlations.
///
/// Ties in EBIC keep the larger lambda (sparser network).
pub fn ebic_glasso(c: &CorrelationMatrix, n_obs: usize, opts: &GlassoOptions) -> Result<Network> {
    let p = c.dim();
    let path = ebic_glasso_path(c, n_obs, opts)?;
    let (best_idx, (best_fit, best_ebic)) = path
        .iter()
        .enumerate()
        .fold(None::<(usize, &(GlassoFit, f64))>, |acc, (i, cand)| match acc {
            Some((_, cur)) if cand.1 >= cur.1 => acc,
            _ => Some((i, cand)),
        })
        .ok_or_else(|| Error::Input("empty lambda path".into()))?;
    let weights = if p == 0 {
        DMatrix::zeros(0, 0)
    } else {
        best_fit.partial_correlations()
    };
    let selection = GlassoSelection {
        lambda: best_fit.lambda,
        lambda_index: best_idx,
        ebic: *best_ebic,
        n_edges: best_fit.n_edges(),
        n_obs,
        gamma: opts.gamma,
    };
    Ok(Network::from_parts(
        weights,
        c.item_ids().to_vec(),
        NetworkMethod::Glasso,
        Some(selection),
    ))
}
