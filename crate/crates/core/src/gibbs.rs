//! Systematic-scan Gibbs sampling over per-node full conditionals.
//!
//! A sweep visits nodes `0..n` in order and redraws each one from its full
//! conditional given the current values of its neighbors. The same engine
//! generates simulated experiment responses and drives the counterfactual
//! chains used for treatment-effect estimation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Response;
use crate::error::{Error, Result};
use crate::ggm::{self, GgmParams};
use crate::graph::{Assignment, Graph};
use crate::ising::{self, IsingParams};

/// A model that can redraw one node given the rest of the state.
pub trait FullConditional: Sync {
    /// State used by [`Init::Random`].
    fn random_init<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64>;

    fn sample_node<R: Rng + ?Sized>(&self, graph: &Graph, z: &Assignment, state: &[f64], i: usize, rng: &mut R) -> f64;

    fn to_response(&self, state: Vec<f64>) -> Result<Response>;

    fn validate(&self) -> Result<()>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsingModel(pub IsingParams);

impl FullConditional for IsingModel {
    fn random_init<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
    }

    fn sample_node<R: Rng + ?Sized>(&self, graph: &Graph, z: &Assignment, state: &[f64], i: usize, rng: &mut R) -> f64 {
        let p = ising::logistic(2.0 * ising::local_field(&self.0, graph, z, state, i));
        if rng.random::<f64>() < p {
            1.0
        } else {
            -1.0
        }
    }

    fn to_response(&self, state: Vec<f64>) -> Result<Response> {
        Response::spins(state.into_iter().map(|v| if v > 0.0 { 1 } else { -1 }).collect())
    }

    fn validate(&self) -> Result<()> {
        self.0.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GgmModel(pub GgmParams);

impl FullConditional for GgmModel {
    fn random_init<R: Rng + ?Sized>(&self, n: usize, _rng: &mut R) -> Vec<f64> {
        vec![0.0; n]
    }

    fn sample_node<R: Rng + ?Sized>(&self, graph: &Graph, z: &Assignment, state: &[f64], i: usize, rng: &mut R) -> f64 {
        ggm::sample_unchecked(&self.0, graph, z, state, i, rng)
    }

    fn to_response(&self, state: Vec<f64>) -> Result<Response> {
        Response::reals(state)
    }

    fn validate(&self) -> Result<()> {
        self.0.validate()
    }
}

/// Starting state of a chain.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// Uniform random spins for the Ising model, zeros for the Gaussian model.
    #[default]
    Random,
    AllPositive,
    Given(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GibbsConfig {
    pub burnin_sweeps: usize,
    pub n_samples: usize,
    pub thinning_sweeps: usize,
    pub init: Init,
    /// Keep every recorded state, not just its mean.
    pub keep_states: bool,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self::ate_estimation()
    }
}

impl GibbsConfig {
    /// Schedule for simulating observed responses: the final state after burn-in.
    pub fn data_generation() -> Self {
        GibbsConfig { burnin_sweeps: 200, n_samples: 1, thinning_sweeps: 1, init: Init::Random, keep_states: false }
    }

    /// Schedule for counterfactual mean-response estimation.
    pub fn ate_estimation() -> Self {
        GibbsConfig { burnin_sweeps: 500, n_samples: 1000, thinning_sweeps: 1, init: Init::Random, keep_states: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be positive".into()));
        }
        if self.thinning_sweeps == 0 {
            return Err(Error::InvalidParameter("thinning_sweeps must be positive".into()));
        }
        Ok(())
    }

    pub fn total_sweeps(&self) -> usize {
        self.burnin_sweeps + self.n_samples * self.thinning_sweeps
    }
}

/// A running chain. Exposes single-site updates for callers that need
/// finer-grained observation than whole sweeps.
pub struct Chain<'a, M, R: ?Sized> {
    model: &'a M,
    graph: &'a Graph,
    z: &'a Assignment,
    state: Vec<f64>,
    rng: &'a mut R,
}

impl<'a, M: FullConditional, R: Rng + ?Sized> Chain<'a, M, R> {
    pub fn new(model: &'a M, graph: &'a Graph, z: &'a Assignment, init: &Init, rng: &'a mut R) -> Result<Self> {
        model.validate()?;
        let n = graph.num_nodes();
        if z.len() != n {
            return Err(Error::Validation(format!("assignment has length {}, graph has {n} nodes", z.len())));
        }
        let state = match init {
            Init::Random => model.random_init(n, rng),
            Init::AllPositive => vec![1.0; n],
            Init::Given(s) => {
                if s.len() != n {
                    return Err(Error::Validation(format!(
                        "initial state has length {}, graph has {n} nodes",
                        s.len()
                    )));
                }
                s.clone()
            }
        };
        Ok(Chain { model, graph, z, state, rng })
    }

    pub fn update_node(&mut self, i: usize) {
        let v = self.model.sample_node(self.graph, self.z, &self.state, i, self.rng);
        self.state[i] = v;
    }

    pub fn sweep(&mut self) {
        for i in 0..self.state.len() {
            self.update_node(i);
        }
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn mean_response(&self) -> f64 {
        self.state.iter().sum::<f64>() / self.state.len() as f64
    }

    pub fn into_state(self) -> Vec<f64> {
        self.state
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainOutput {
    /// `(1/n) sum_i y_i` of each recorded sample.
    pub mean_responses: Vec<f64>,
    /// Recorded states; empty unless `keep_states` was set.
    pub samples: Vec<Vec<f64>>,
    pub final_state: Vec<f64>,
}

impl ChainOutput {
    pub fn mean(&self) -> f64 {
        self.mean_responses.iter().sum::<f64>() / self.mean_responses.len() as f64
    }
}

pub fn gibbs_run<M: FullConditional, R: Rng + ?Sized>(
    model: &M,
    graph: &Graph,
    z: &Assignment,
    config: &GibbsConfig,
    rng: &mut R,
) -> Result<ChainOutput> {
    config.validate()?;
    let mut chain = Chain::new(model, graph, z, &config.init, rng)?;
    for _ in 0..config.burnin_sweeps {
        chain.sweep();
    }
    let mut mean_responses = Vec::with_capacity(config.n_samples);
    let mut samples = Vec::new();
    for _ in 0..config.n_samples {
        for _ in 0..config.thinning_sweeps {
            chain.sweep();
        }
        mean_responses.push(chain.mean_response());
        if config.keep_states {
            samples.push(chain.state().to_vec());
        }
    }
    Ok(ChainOutput { mean_responses, samples, final_state: chain.into_state() })
}

/// Observed responses: the chain's final state.
pub fn simulate_responses<M: FullConditional, R: Rng + ?Sized>(
    model: &M,
    graph: &Graph,
    z: &Assignment,
    config: &GibbsConfig,
    rng: &mut R,
) -> Result<Response> {
    let out = gibbs_run(model, graph, z, config, rng)?;
    model.to_response(out.final_state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::watts_strogatz;
    use crate::rng::seeded;

    #[test]
    fn sample_count_and_thinning() {
        let g = Graph::cycle(5).unwrap();
        let z = Assignment::uniform(5, 0);
        let cfg =
            GibbsConfig { burnin_sweeps: 3, n_samples: 7, thinning_sweeps: 4, init: Init::Random, keep_states: true };
        let out = gibbs_run(&IsingModel(IsingParams::default()), &g, &z, &cfg, &mut seeded(0)).unwrap();
        assert_eq!(out.mean_responses.len(), 7);
        assert_eq!(out.samples.len(), 7);
        assert_eq!(cfg.total_sweeps(), 31);
        assert_eq!(out.samples.last().unwrap(), &out.final_state);
    }

    #[test]
    fn zero_params_have_zero_mean() {
        let g = watts_strogatz(20, 4, 0.2, &mut seeded(1)).unwrap();
        let z = Assignment::uniform(20, 1);
        let cfg = GibbsConfig { burnin_sweeps: 10, n_samples: 10_000, ..GibbsConfig::ate_estimation() };
        let out = gibbs_run(&IsingModel(IsingParams::default()), &g, &z, &cfg, &mut seeded(2)).unwrap();
        assert!(out.mean().abs() < 0.02, "{}", out.mean());
    }

    #[test]
    fn isolated_nodes_match_tanh() {
        let g = Graph::empty(10).unwrap();
        let z = Assignment::uniform(10, 1);
        let p = IsingParams { alpha1: 0.1, ..Default::default() };
        let cfg = GibbsConfig { burnin_sweeps: 10, n_samples: 20_000, ..GibbsConfig::ate_estimation() };
        let out = gibbs_run(&IsingModel(p), &g, &z, &cfg, &mut seeded(3)).unwrap();
        assert!((out.mean() - 0.1f64.tanh()).abs() < 0.01, "{}", out.mean());
    }

    #[test]
    fn strong_field_saturates() {
        let g = watts_strogatz(100, 4, 0.1, &mut seeded(4)).unwrap();
        let z = crate::graph::bernoulli_assignment(100, 0.5, &mut seeded(5)).unwrap();
        let p = IsingParams { alpha0: 10.0, alpha1: 10.0, ..Default::default() };
        let y = simulate_responses(&IsingModel(p), &g, &z, &GibbsConfig::data_generation(), &mut seeded(6)).unwrap();
        assert!(y.as_spins().unwrap().iter().all(|&v| v == 1));
    }

    #[test]
    fn simulation_is_deterministic() {
        let g = watts_strogatz(100, 4, 0.1, &mut seeded(4)).unwrap();
        let z = crate::graph::bernoulli_assignment(100, 0.5, &mut seeded(5)).unwrap();
        let p = IsingParams { alpha0: 0.0, alpha1: 0.1, beta0: 0.01, beta1: 0.01, gamma: 0.01 };
        let cfg = GibbsConfig::data_generation();
        let a = simulate_responses(&IsingModel(p), &g, &z, &cfg, &mut seeded(8)).unwrap();
        let b = simulate_responses(&IsingModel(p), &g, &z, &cfg, &mut seeded(8)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
    }

    #[test]
    fn ggm_chain_starts_from_zero_and_stays_finite() {
        let g = Graph::cycle(6).unwrap();
        let z = Assignment::new(vec![0, 1, 0, 1, 0, 1]).unwrap();
        let m = GgmModel(GgmParams::new(1.0, 2.0, 0.1, 0.5, 0.3).unwrap());
        let cfg =
            GibbsConfig { burnin_sweeps: 0, n_samples: 50, thinning_sweeps: 1, init: Init::Random, keep_states: false };
        let out = gibbs_run(&m, &g, &z, &cfg, &mut seeded(1)).unwrap();
        assert!(out.final_state.iter().all(|v| v.is_finite()));
        let mut rng = seeded(1);
        let chain = Chain::new(&m, &g, &z, &Init::Random, &mut rng).unwrap();
        assert_eq!(chain.state(), &[0.0; 6]);
    }

    #[test]
    fn rejects_bad_config() {
        let g = Graph::empty(2).unwrap();
        let z = Assignment::uniform(2, 0);
        let m = IsingModel(IsingParams::default());
        let cfg = GibbsConfig { n_samples: 0, ..GibbsConfig::default() };
        assert!(gibbs_run(&m, &g, &z, &cfg, &mut seeded(0)).is_err());
        let cfg = GibbsConfig { init: Init::Given(vec![1.0]), ..GibbsConfig::default() };
        assert!(gibbs_run(&m, &g, &z, &cfg, &mut seeded(0)).is_err());
    }
}
