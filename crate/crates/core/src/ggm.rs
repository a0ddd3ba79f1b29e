//! Gaussian additive linear model for real-valued responses.
//!
//! Each node's response, given its neighborhood, is normal with mean
//! `alpha0 + (alpha1 - alpha0) z_i + beta * sum_{j in n(i)} z_j + gamma * mean_{j in n(i)} y_j`
//! and standard deviation `sigma`. The neighbor mean of an isolated node is 0.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Assignment, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GgmParams {
    pub alpha0: f64,
    pub alpha1: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sigma: f64,
}

impl GgmParams {
    pub fn new(alpha0: f64, alpha1: f64, beta: f64, gamma: f64, sigma: f64) -> Result<Self> {
        let p = GgmParams { alpha0, alpha1, beta, gamma, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha0, self.alpha1, self.beta, self.gamma, self.sigma];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(format!("GGM parameters must be finite: {self:?}")));
        }
        if self.sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!("GGM sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    /// The neighbor-mean feedback can make the implied joint improper.
    pub fn may_be_nonstationary(&self) -> bool {
        self.gamma.abs() >= 1.0
    }

    pub const NAMES: [&'static str; 5] = ["alpha0", "alpha1", "beta", "gamma", "sigma"];

    pub fn to_array(&self) -> [f64; 5] {
        [self.alpha0, self.alpha1, self.beta, self.gamma, self.sigma]
    }
}

/// Number of treated neighbors and mean neighbor response (0 when isolated).
pub fn neighbor_terms(graph: &Graph, z: &Assignment, y: &[f64], i: usize) -> (f64, f64) {
    let nb = graph.neighbors(i);
    let treated = nb.iter().filter(|&&j| z.is_treated(j)).count() as f64;
    let mean = if nb.is_empty() { 0.0 } else { nb.iter().map(|&j| y[j]).sum::<f64>() / nb.len() as f64 };
    (treated, mean)
}

pub(crate) fn conditional_mean_unchecked(
    params: &GgmParams,
    graph: &Graph,
    z: &Assignment,
    y: &[f64],
    i: usize,
) -> f64 {
    let (treated, mean) = neighbor_terms(graph, z, y, i);
    let base = if z.is_treated(i) { params.alpha1 } else { params.alpha0 };
    base + params.beta * treated + params.gamma * mean
}

fn check(graph: &Graph, z: &Assignment, y: &[f64], i: usize) -> Result<()> {
    let n = graph.num_nodes();
    if z.len() != n || y.len() != n {
        return Err(Error::Validation(format!(
            "assignment/response lengths {}/{} do not match {n} nodes",
            z.len(),
            y.len()
        )));
    }
    graph.check_node(i)
}

pub fn ggm_conditional_mean(params: &GgmParams, graph: &Graph, z: &Assignment, y: &[f64], i: usize) -> Result<f64> {
    check(graph, z, y, i)?;
    Ok(conditional_mean_unchecked(params, graph, z, y, i))
}

/// One draw from node `i`'s full conditional.
pub fn ggm_sample_node<R: Rng + ?Sized>(
    params: &GgmParams,
    graph: &Graph,
    z: &Assignment,
    y: &[f64],
    i: usize,
    rng: &mut R,
) -> Result<f64> {
    check(graph, z, y, i)?;
    params.validate()?;
    Ok(sample_unchecked(params, graph, z, y, i, rng))
}

pub(crate) fn sample_unchecked<R: Rng + ?Sized>(
    params: &GgmParams,
    graph: &Graph,
    z: &Assignment,
    y: &[f64],
    i: usize,
    rng: &mut R,
) -> f64 {
    let mean = conditional_mean_unchecked(params, graph, z, y, i);
    // sigma > 0 and finite is checked by GgmParams::validate.
    let noise = Normal::new(0.0, params.sigma).expect("validated sigma");
    mean + noise.sample(rng)
}
