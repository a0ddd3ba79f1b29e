//! Maximum pseudo-likelihood estimation.
//!
//! The pseudo-likelihood multiplies each node's full conditional over all
//! nodes of all triplets, so fitting reduces to a regression that treats the
//! pooled nodes as independent rows:
//!
//! * Ising: no-intercept logistic regression of `(y_i + 1) / 2` on five
//!   features whose coefficients are `2 * (alpha0, alpha1, beta0, beta1, gamma)`,
//!   solved by Newton/IRLS.
//! * Gaussian: least squares of `y_i` on `[1, z_i, treated neighbors, neighbor mean]`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{ExperimentDataset, Response, Triplet};
use crate::error::{Error, Result};
use crate::ggm::{self, GgmParams};
use crate::graph::{Assignment, Graph};
use crate::ising::{self, IsingParams};
use crate::linalg::Cholesky;

pub const NUM_FEATURES: usize = 5;

/// One node's regression row.
///
/// Features: `f1 = 1{z_i=0}`, `f2 = 1{z_i=1}`, `f3 = 1{z_i=0} S_A(i)`,
/// `f4 = 1{z_i=1} S_B(i)`, `f5 = 1{z_i=0} S_B(i) + 1{z_i=1} S_A(i)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignRow {
    pub features: [f64; NUM_FEATURES],
    pub label: f64,
}

/// Logistic coefficients are twice the Ising parameters.
const COEFF_SCALE: f64 = 2.0;

pub fn ising_to_coefficients(p: &IsingParams) -> [f64; NUM_FEATURES] {
    p.to_array().map(|v| COEFF_SCALE * v)
}

pub fn coefficients_to_ising(c: &[f64; NUM_FEATURES]) -> IsingParams {
    IsingParams::from_array(c.map(|v| v / COEFF_SCALE))
}

/// Rows for one triplet, appended to `out`.
pub fn append_triplet_design(t: &Triplet, out: &mut Vec<DesignRow>) -> Result<()> {
    let y = t.response.as_spins().ok_or_else(|| Error::Validation("Ising design needs spin responses".into()))?;
    append_design(&t.graph, &t.assignment, y, out);
    Ok(())
}

/// Rows for one network given its parts; lengths must already agree.
pub fn append_design(graph: &Graph, z: &Assignment, y: &[i8], out: &mut Vec<DesignRow>) {
    out.reserve(y.len());
    for (i, &yi) in y.iter().enumerate() {
        let (s_a, s_b) = ising::neighbor_sums(graph, z, y, i);
        let features = if z.is_treated(i) { [0.0, 1.0, 0.0, s_b, s_a] } else { [1.0, 0.0, s_a, 0.0, s_b] };
        out.push(DesignRow { features, label: if yi > 0 { 1.0 } else { 0.0 } });
    }
}

pub fn build_ising_design(dataset: &ExperimentDataset) -> Result<Vec<DesignRow>> {
    let mut rows = Vec::with_capacity(dataset.total_nodes());
    for (k, t) in dataset.triplets.iter().enumerate() {
        append_triplet_design(t, &mut rows).map_err(|e| match e {
            Error::Validation(m) => Error::Validation(format!("triplet {k}: {m}")),
            other => other,
        })?;
    }
    Ok(rows)
}

/// CSV with header `f1,f2,f3,f4,f5,label`.
pub fn write_design_csv<W: Write>(rows: &[DesignRow], mut out: W) -> Result<()> {
    writeln!(out, "f1,f2,f3,f4,f5,label")?;
    for r in rows {
        let f = &r.features;
        writeln!(out, "{},{},{},{},{},{}", f[0], f[1], f[2], f[3], f[4], r.label)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IrlsOptions {
    /// Convergence threshold on the max-norm of the log-likelihood gradient.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Diagonal loading added to a singular Hessian.
    pub ridge: f64,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        IrlsOptions { tolerance: 1e-8, max_iterations: 100, ridge: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult<P> {
    pub params: P,
    pub converged: bool,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    /// Set when the Hessian was singular and had to be ridge-loaded.
    pub ridge_applied: bool,
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

struct Moments {
    loglik: f64,
    gradient: [f64; NUM_FEATURES],
    hessian: Vec<Vec<f64>>,
}

fn logistic_moments(rows: &[DesignRow], coef: &[f64; NUM_FEATURES], with_hessian: bool) -> Moments {
    let mut loglik = 0.0;
    let mut gradient = [0.0; NUM_FEATURES];
    let mut h = [[0.0; NUM_FEATURES]; NUM_FEATURES];
    for r in rows {
        let eta: f64 = r.features.iter().zip(coef).map(|(x, c)| x * c).sum();
        let p = ising::logistic(eta);
        loglik -= if r.label > 0.5 { softplus(-eta) } else { softplus(eta) };
        let resid = r.label - p;
        let w = p * (1.0 - p);
        for a in 0..NUM_FEATURES {
            let xa = r.features[a];
            if xa == 0.0 {
                continue;
            }
            gradient[a] += xa * resid;
            if with_hessian {
                for b in 0..=a {
                    h[a][b] += w * xa * r.features[b];
                }
            }
        }
    }
    let mut hessian = vec![vec![0.0; NUM_FEATURES]; NUM_FEATURES];
    for a in 0..NUM_FEATURES {
        for b in 0..=a {
            hessian[a][b] = h[a][b];
            hessian[b][a] = h[a][b];
        }
    }
    Moments { loglik, gradient, hessian }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Newton/IRLS maximization of the no-intercept logistic log-likelihood.
///
/// Returns the Ising parameters (coefficients halved). A fit that exhausts
/// `max_iterations` comes back with `converged = false`.
pub fn fit_logistic_irls(rows: &[DesignRow], opts: &IrlsOptions) -> Result<FitResult<IsingParams>> {
    if rows.len() < NUM_FEATURES {
        return Err(Error::InvalidParameter(format!("need at least {NUM_FEATURES} rows to fit, got {}", rows.len())));
    }
    if let Some(k) = rows.iter().position(|r| !r.features.iter().all(|v| v.is_finite())) {
        return Err(Error::Validation(format!("design row {k} has non-finite features")));
    }
    if !(opts.tolerance > 0.0) || !(opts.ridge > 0.0) {
        return Err(Error::InvalidParameter("tolerance and ridge must be positive".into()));
    }

    let mut coef = [0.0; NUM_FEATURES];
    let mut ridge_applied = false;
    let mut iterations = 0;
    let mut m = logistic_moments(rows, &coef, true);
    let mut converged = max_norm(&m.gradient) <= opts.tolerance;

    while !converged && iterations < opts.max_iterations {
        let step = match Cholesky::new(&m.hessian) {
            Ok(ch) => ch.solve(&m.gradient),
            Err(_) => {
                ridge_applied = true;
                ridge_solve(&m.hessian, &m.gradient, opts.ridge)
            }
        };

        // Halve the step until the log-likelihood does not decrease.
        let mut scale = 1.0;
        let mut next = m.loglik;
        let mut candidate = coef;
        for _ in 0..40 {
            for a in 0..NUM_FEATURES {
                candidate[a] = coef[a] + scale * step[a];
            }
            next = logistic_moments(rows, &candidate, false).loglik;
            if next >= m.loglik - 1e-12 * m.loglik.abs().max(1.0) {
                break;
            }
            scale *= 0.5;
        }
        iterations += 1;
        if !next.is_finite() {
            break;
        }
        coef = candidate;
        m = logistic_moments(rows, &coef, true);
        converged = max_norm(&m.gradient) <= opts.tolerance;
    }

    Ok(FitResult {
        params: coefficients_to_ising(&coef),
        converged,
        iterations,
        final_gradient_norm: max_norm(&m.gradient),
        ridge_applied,
    })
}

fn ridge_solve(h: &[Vec<f64>], g: &[f64], ridge: f64) -> Vec<f64> {
    let mut lambda = ridge;
    loop {
        let mut loaded = h.to_vec();
        for (a, row) in loaded.iter_mut().enumerate() {
            row[a] += lambda;
        }
        if let Ok(ch) = Cholesky::new(&loaded) {
            return ch.solve(g);
        }
        lambda *= 10.0;
    }
}

/// Builds the design for every triplet and fits the Ising model.
pub fn fit_ising(dataset: &ExperimentDataset, opts: &IrlsOptions) -> Result<FitResult<IsingParams>> {
    fit_logistic_irls(&build_ising_design(dataset)?, opts)
}

pub const GGM_COLUMNS: [&str; 4] = ["intercept", "treatment", "treated_neighbors", "neighbor_mean_response"];

/// Least-squares fit of the Gaussian model.
pub fn fit_ggm_ols(dataset: &ExperimentDataset) -> Result<FitResult<GgmParams>> {
    let mut x = Vec::with_capacity(dataset.total_nodes());
    let mut yv = Vec::with_capacity(dataset.total_nodes());
    for (k, t) in dataset.triplets.iter().enumerate() {
        let y = match &t.response {
            Response::Real(y) => y,
            Response::Spin(_) => {
                return Err(Error::Validation(format!("triplet {k}: GGM fit needs real-valued responses")))
            }
        };
        for (i, &yi) in y.iter().enumerate() {
            let (treated, mean) = ggm::neighbor_terms(&t.graph, &t.assignment, y, i);
            let zi = if t.assignment.is_treated(i) { 1.0 } else { 0.0 };
            x.push([1.0, zi, treated, mean]);
            yv.push(yi);
        }
    }
    let p = GGM_COLUMNS.len();
    if x.len() < p {
        return Err(Error::InvalidParameter(format!("need at least {p} nodes to fit, got {}", x.len())));
    }

    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (row, &y) in x.iter().zip(&yv) {
        for a in 0..p {
            xty[a] += row[a] * y;
            for b in 0..p {
                xtx[a][b] += row[a] * row[b];
            }
        }
    }
    let coef = Cholesky::new(&xtx)
        .map_err(|cols| Error::RankDeficient { columns: cols.iter().map(|&c| GGM_COLUMNS[c].to_string()).collect() })?
        .solve(&xty);

    let mut rss = 0.0;
    let mut grad = vec![0.0; p];
    for (row, &y) in x.iter().zip(&yv) {
        let r = y - row.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>();
        rss += r * r;
        for a in 0..p {
            grad[a] += row[a] * r;
        }
    }
    let dof = if x.len() > p { x.len() - p } else { x.len() };
    let params = GgmParams {
        alpha0: coef[0],
        alpha1: coef[0] + coef[1],
        beta: coef[2],
        gamma: coef[3],
        sigma: (rss / dof as f64).sqrt(),
    };
    Ok(FitResult { params, converged: true, iterations: 1, final_gradient_norm: max_norm(&grad), ridge_applied: false })
}
