//! Ising/logistic Markov random field for ±1 responses.
//!
//! The unnormalized log-density of a response vector `y` given assignment `z`
//! on graph `G` is
//!
//! ```text
//! alpha0 * sum_{i in A} y_i + alpha1 * sum_{i in B} y_i
//!   + beta0 * sum_{(i,j) in E, i,j in A} y_i y_j
//!   + beta1 * sum_{(i,j) in E, i,j in B} y_i y_j
//!   + gamma * sum_{(i,j) in E, i in A, j in B} y_i y_j
//! ```
//!
//! with every undirected edge counted once. Conditioning on the rest of the
//! graph gives `P(y_i = +1 | ...) = logistic(2 * h_i)` where the local field
//! `h_i` is `alpha_g + beta_g * S_same(i) + gamma * S_other(i)` for node group
//! `g` and neighbor spin sums `S_same`, `S_other` split by group.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Assignment, Graph};

/// Largest graph the enumeration oracle accepts.
pub const MAX_EXACT_NODES: usize = 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingParams {
    pub alpha0: f64,
    pub alpha1: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub gamma: f64,
}

impl IsingParams {
    pub fn new(alpha0: f64, alpha1: f64, beta0: f64, beta1: f64, gamma: f64) -> Result<Self> {
        let p = IsingParams { alpha0, alpha1, beta0, beta1, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_array().iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("Ising parameters must be finite: {self:?}")))
        }
    }

    /// `[alpha0, alpha1, beta0, beta1, gamma]`.
    pub fn to_array(&self) -> [f64; 5] {
        [self.alpha0, self.alpha1, self.beta0, self.beta1, self.gamma]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        IsingParams { alpha0: a[0], alpha1: a[1], beta0: a[2], beta1: a[3], gamma: a[4] }
    }

    pub const NAMES: [&'static str; 5] = ["alpha0", "alpha1", "beta0", "beta1", "gamma"];

    /// The same model with the roles of groups A and B exchanged.
    pub fn swapped_groups(&self) -> Self {
        IsingParams {
            alpha0: self.alpha1,
            alpha1: self.alpha0,
            beta0: self.beta1,
            beta1: self.beta0,
            gamma: self.gamma,
        }
    }

    fn node_coeff(&self, group: u8) -> (f64, f64) {
        if group == 0 {
            (self.alpha0, self.beta0)
        } else {
            (self.alpha1, self.beta1)
        }
    }
}

/// Numerically stable `1 / (1 + exp(-x))`.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Sums of neighbor responses split by the neighbors' group: `(S_A, S_B)`.
pub fn neighbor_sums<T: Copy + Into<f64>>(graph: &Graph, z: &Assignment, y: &[T], i: usize) -> (f64, f64) {
    let mut sums = [0.0, 0.0];
    for &j in graph.neighbors(i) {
        sums[z.group(j) as usize] += y[j].into();
    }
    (sums[0], sums[1])
}

/// Local field `h_i`; the full conditional is `P(y_i=+1) = logistic(2 h_i)`.
pub(crate) fn local_field<T: Copy + Into<f64>>(
    params: &IsingParams,
    graph: &Graph,
    z: &Assignment,
    y: &[T],
    i: usize,
) -> f64 {
    let (s_a, s_b) = neighbor_sums(graph, z, y, i);
    let g = z.group(i);
    let (alpha, beta) = params.node_coeff(g);
    let (same, other) = if g == 0 { (s_a, s_b) } else { (s_b, s_a) };
    alpha + beta * same + params.gamma * other
}

fn check_lengths(graph: &Graph, z: &Assignment, y_len: Option<usize>) -> Result<()> {
    let n = graph.num_nodes();
    if z.len() != n {
        return Err(Error::Validation(format!("assignment has length {}, graph has {n} nodes", z.len())));
    }
    if let Some(len) = y_len.filter(|&len| len != n) {
        return Err(Error::Validation(format!("response has length {len}, graph has {n} nodes")));
    }
    Ok(())
}

fn check_spins(y: &[i8]) -> Result<()> {
    match y.iter().position(|&v| v != 1 && v != -1) {
        Some(pos) => Err(Error::Validation(format!("response entry {pos} is {}, expected ±1", y[pos]))),
        None => Ok(()),
    }
}

fn log_potential_unchecked<T: Copy + Into<f64>>(params: &IsingParams, graph: &Graph, z: &Assignment, y: &[T]) -> f64 {
    let mut node = [0.0, 0.0];
    for (i, &yi) in y.iter().enumerate() {
        node[z.group(i) as usize] += yi.into();
    }
    let mut pair = [0.0, 0.0, 0.0];
    for &(u, v) in graph.edges() {
        let prod = y[u].into() * y[v].into();
        let slot = match (z.group(u), z.group(v)) {
            (0, 0) => 0,
            (1, 1) => 1,
            _ => 2,
        };
        pair[slot] += prod;
    }
    params.alpha0 * node[0]
        + params.alpha1 * node[1]
        + params.beta0 * pair[0]
        + params.beta1 * pair[1]
        + params.gamma * pair[2]
}

/// Unnormalized log-density of `y`.
pub fn log_potential(params: &IsingParams, graph: &Graph, z: &Assignment, y: &[i8]) -> Result<f64> {
    check_lengths(graph, z, Some(y.len()))?;
    check_spins(y)?;
    Ok(log_potential_unchecked(params, graph, z, y))
}

/// `P(y_i = +1 | y_-i, z)`.
pub fn conditional_prob_positive(
    params: &IsingParams,
    graph: &Graph,
    z: &Assignment,
    y: &[i8],
    i: usize,
) -> Result<f64> {
    check_lengths(graph, z, Some(y.len()))?;
    graph.check_node(i)?;
    check_spins(y)?;
    Ok(logistic(2.0 * local_field(params, graph, z, y, i)))
}

/// Probability of every spin configuration, by full enumeration.
///
/// State `s` (an integer in `0..2^n`) has `y_i = +1` iff bit `i` of `s` is set.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    num_nodes: usize,
    probs: Vec<f64>,
}

impl ExactDistribution {
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob_of(&self, y: &[i8]) -> f64 {
        self.probs[state_index(y)]
    }

    /// `E[(1/n) sum_i y_i]`.
    pub fn mean_response(&self) -> f64 {
        let n = self.num_nodes as f64;
        self.probs
            .iter()
            .enumerate()
            .map(|(s, &p)| {
                let ones = s.count_ones() as f64;
                p * (2.0 * ones - n) / n
            })
            .sum()
    }

    /// Total variation distance to a vector of state frequencies.
    pub fn total_variation(&self, freqs: &[f64]) -> f64 {
        assert_eq!(freqs.len(), self.probs.len());
        0.5 * self.probs.iter().zip(freqs).map(|(p, q)| (p - q).abs()).sum::<f64>()
    }
}

/// Integer index of a spin vector (bit `i` set iff `y_i = +1`).
pub fn state_index<T: Copy + Into<f64>>(y: &[T]) -> usize {
    y.iter().enumerate().filter(|(_, &v)| v.into() > 0.0).fold(0usize, |acc, (i, _)| acc | (1 << i))
}

/// Spin vector of a state index.
pub fn state_spins(index: usize, num_nodes: usize) -> Vec<i8> {
    (0..num_nodes).map(|i| if index >> i & 1 == 1 { 1 } else { -1 }).collect()
}

pub fn exact_distribution(params: &IsingParams, graph: &Graph, z: &Assignment) -> Result<ExactDistribution> {
    check_lengths(graph, z, None)?;
    let n = graph.num_nodes();
    if n > MAX_EXACT_NODES {
        return Err(Error::Capacity(format!(
            "exact enumeration supports at most {MAX_EXACT_NODES} nodes, graph has {n}"
        )));
    }
    let mut y = vec![0i8; n];
    let mut logs = Vec::with_capacity(1 << n);
    for s in 0..(1usize << n) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = if s >> i & 1 == 1 { 1 } else { -1 };
        }
        logs.push(log_potential_unchecked(params, graph, z, &y));
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(ExactDistribution { num_nodes: n, probs })
}

/// Exact `E[(1/|V|) sum_i Y_i]` under the model.
pub fn exact_mean_response(params: &IsingParams, graph: &Graph, z: &Assignment) -> Result<f64> {
    Ok(exact_distribution(params, graph, z)?.mean_response())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn pair_in_a() -> (Graph, Assignment) {
        (Graph::new(2, [(0, 1)]).unwrap(), Assignment::uniform(2, 0))
    }

    #[test]
    fn log_potential_hand_values() {
        let (g, z) = pair_in_a();
        let p = IsingParams { beta0: 0.5, ..Default::default() };
        assert_eq!(log_potential(&p, &g, &z, &[1, 1]).unwrap(), 0.5);
        assert_eq!(log_potential(&p, &g, &z, &[1, -1]).unwrap(), -0.5);
        assert_eq!(log_potential(&IsingParams::default(), &g, &z, &[1, -1]).unwrap(), 0.0);
    }

    #[test]
    fn log_potential_rejects_bad_input() {
        let (g, z) = pair_in_a();
        let p = IsingParams::default();
        assert!(log_potential(&p, &g, &z, &[1]).is_err());
        assert!(log_potential(&p, &g, &z, &[1, 0]).is_err());
    }

    #[test]
    fn isolated_node_conditionals() {
        let g = Graph::empty(1).unwrap();
        let p = IsingParams { alpha1: 0.1, ..Default::default() };
        let b = conditional_prob_positive(&p, &g, &Assignment::uniform(1, 1), &[1], 0).unwrap();
        assert!(close(b, 0.549_833_997_312_478, 1e-12));
        assert!((b - 0.55).abs() < 5e-3);
        let a = conditional_prob_positive(&p, &g, &Assignment::uniform(1, 0), &[-1], 0).unwrap();
        assert_eq!(a, 0.5);
    }

    #[test]
    fn mixed_neighborhood_conditional() {
        // Node 0 in A with A-neighbors 1, 2 at +1 and B-neighbor 3 at -1.
        let g = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let z = Assignment::new(vec![0, 0, 0, 1]).unwrap();
        let p = IsingParams { alpha0: 0.0, alpha1: 0.0, beta0: 0.01, beta1: 0.0, gamma: 0.01 };
        let prob = conditional_prob_positive(&p, &g, &z, &[1, 1, 1, -1], 0).unwrap();
        assert!(close(prob, logistic(0.02), 1e-15));
        assert!(close(prob, 0.504_999_833_340, 1e-11));
    }

    #[test]
    fn conditional_rejects_bad_node() {
        let (g, z) = pair_in_a();
        let err = conditional_prob_positive(&IsingParams::default(), &g, &z, &[1, 1], 2).unwrap_err();
        assert!(matches!(err, Error::NodeIndex { index: 2, num_nodes: 2 }));
    }

    #[test]
    fn logistic_is_stable() {
        assert_eq!(logistic(800.0), 1.0);
        assert_eq!(logistic(-800.0), 0.0);
        assert!(logistic(-745.0) > 0.0);
        assert!(close(logistic(0.0), 0.5, 0.0));
        assert!(close(logit(0.6), 0.405_465_108_108_164_4, 1e-15));
    }

    #[test]
    fn exact_pair_distribution() {
        let (g, z) = pair_in_a();
        let p = IsingParams { beta0: 0.5, ..Default::default() };
        let d = exact_distribution(&p, &g, &z).unwrap();
        let e = 0.5f64.exp();
        let same = e / (2.0 * e + 2.0 / e);
        assert!(close(d.prob_of(&[1, 1]), same, 1e-15));
        assert!(close(d.prob_of(&[-1, -1]), same, 1e-15));
        assert!(close(d.prob_of(&[1, -1]), 0.134_470_710_684_998, 1e-12));
        assert!(close(same, 0.365_529_289_315_002, 1e-12));
        assert!(close(d.mean_response(), 0.0, 1e-15));
    }

    #[test]
    fn exact_uniform_when_params_zero() {
        let g = Graph::cycle(5).unwrap();
        let z = Assignment::new(vec![0, 1, 0, 1, 1]).unwrap();
        let d = exact_distribution(&IsingParams::default(), &g, &z).unwrap();
        assert!(d.probs().iter().all(|&p| close(p, 1.0 / 32.0, 1e-15)));
        assert!(close(d.probs().iter().sum::<f64>(), 1.0, 1e-12));
    }

    #[test]
    fn exact_isolated_marginals() {
        let p = IsingParams { alpha1: 0.1, ..Default::default() };
        let d = exact_distribution(&p, &Graph::empty(1).unwrap(), &Assignment::uniform(1, 1)).unwrap();
        assert!(close(d.prob_of(&[1]), logistic(0.2), 1e-15));
        let m = exact_mean_response(&p, &Graph::empty(6).unwrap(), &Assignment::uniform(6, 1)).unwrap();
        assert!(close(m, 0.1f64.tanh(), 1e-14));
        assert!(close(m, 0.099_667_994_624_955_8, 1e-14));
    }

    #[test]
    fn exact_rejects_large_graphs() {
        let g = Graph::empty(21).unwrap();
        let err = exact_distribution(&IsingParams::default(), &g, &Assignment::uniform(21, 0)).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));
    }

    #[test]
    fn state_index_round_trip() {
        for s in 0..64 {
            assert_eq!(state_index(&state_spins(s, 6)), s);
        }
    }
}
