//! End-to-end simulation scenarios: configuration, data generation and the
//! run report produced by `netab scenario`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_test, BootstrapOptions, BootstrapResult, StatisticKind};
use crate::dataset::{ExperimentDataset, Triplet};
use crate::effects::{self, AteEstimate, DatasetAte, WelchTest};
use crate::error::{Error, Result};
use crate::ggm::GgmParams;
use crate::gibbs::{simulate_responses, FullConditional, GgmModel, GibbsConfig, IsingModel};
use crate::graph::{bernoulli_assignment, watts_strogatz};
use crate::inference::{self, FitResult, IrlsOptions};
use crate::ising::{IsingParams, MAX_EXACT_NODES};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ising,
    Ggm,
}

/// Parameters of either model family. Serialized without a tag; the field
/// names tell the two apart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelParams {
    Ising(IsingParams),
    Ggm(GgmParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Ising(_) => ModelKind::Ising,
            ModelParams::Ggm(_) => ModelKind::Ggm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Ising(p) => p.validate(),
            ModelParams::Ggm(p) => p.validate(),
        }
    }

    fn named_values(&self) -> Vec<(&'static str, f64)> {
        match self {
            ModelParams::Ising(p) => IsingParams::NAMES.iter().copied().zip(p.to_array()).collect(),
            ModelParams::Ggm(p) => GgmParams::NAMES.iter().copied().zip(p.to_array()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    /// Ring-lattice degree (even).
    pub k: usize,
    pub p_rewire: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig { k: 4, p_rewire: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainSchedules {
    /// Used to simulate observed responses.
    pub data: GibbsConfig,
    /// Used for each counterfactual chain of the ATE estimate.
    pub ate: GibbsConfig,
}

impl Default for ChainSchedules {
    fn default() -> Self {
        ChainSchedules { data: GibbsConfig::data_generation(), ate: GibbsConfig::ate_estimation() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub n_boot: usize,
    pub statistic: StatisticKind,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { n_boot: 200, statistic: StatisticKind::AlphaDiff }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub model: ModelKind,
    pub true_params: ModelParams,
    pub k_networks: usize,
    pub nodes_per_network: usize,
    #[serde(default)]
    pub graph: GraphConfig,
    pub treatment_proportion: f64,
    #[serde(default)]
    pub gibbs: ChainSchedules,
    #[serde(default)]
    pub fit: IrlsOptions,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    pub master_seed: u64,
}

/// Ring-lattice degree of the preset scenarios. Denser neighborhoods make the
/// per-edge effects (0.01 to 0.05 per neighbor) estimable from 10,000 nodes;
/// at degree 4 the spread of the fitted `beta1 - beta0` is about 0.024.
pub const PRESET_DEGREE: usize = 20;

impl ScenarioConfig {
    fn ising(name: &str, params: IsingParams, statistic: StatisticKind) -> Self {
        ScenarioConfig {
            name: name.to_string(),
            model: ModelKind::Ising,
            true_params: ModelParams::Ising(params),
            k_networks: 100,
            nodes_per_network: 100,
            graph: GraphConfig { k: PRESET_DEGREE, p_rewire: 0.1 },
            treatment_proportion: 0.5,
            gibbs: ChainSchedules::default(),
            fit: IrlsOptions::default(),
            bootstrap: BootstrapConfig { n_boot: 200, statistic },
            master_seed: 20160802,
        }
    }

    /// Different treatment effect, same network effect.
    pub fn scenario_one() -> Self {
        let p = IsingParams { alpha0: 0.0, alpha1: 0.1, beta0: 0.01, beta1: 0.01, gamma: 0.01 };
        Self::ising("scenario-1", p, StatisticKind::AlphaDiff)
    }

    /// A/A test: same treatment effect, same network effect.
    pub fn scenario_two() -> Self {
        let p = IsingParams { alpha0: 0.05, alpha1: 0.05, beta0: 0.01, beta1: 0.01, gamma: 0.01 };
        Self::ising("scenario-2", p, StatisticKind::AlphaDiff)
    }

    /// Same treatment effect, stronger network effect in group B.
    pub fn scenario_three() -> Self {
        let p = IsingParams { alpha0: 0.05, alpha1: 0.05, beta0: 0.01, beta1: 0.05, gamma: 0.01 };
        Self::ising("scenario-3", p, StatisticKind::BetaDiff)
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "1" | "scenario-1" | "scenario1" => Ok(Self::scenario_one()),
            "2" | "scenario-2" | "scenario2" => Ok(Self::scenario_two()),
            "3" | "scenario-3" | "scenario3" => Ok(Self::scenario_three()),
            other => Err(Error::InvalidParameter(format!("unknown preset `{other}` (expected 1, 2 or 3)"))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::from_json(e, "config"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.model != self.true_params.kind() {
            return Err(Error::InvalidParameter(format!(
                "model is {:?} but true_params look like {:?} parameters",
                self.model,
                self.true_params.kind()
            )));
        }
        self.true_params.validate()?;
        if self.k_networks == 0 || self.nodes_per_network == 0 {
            return Err(Error::InvalidParameter("k_networks and nodes_per_network must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.treatment_proportion) {
            return Err(Error::InvalidParameter(format!(
                "treatment_proportion {} not in [0,1]",
                self.treatment_proportion
            )));
        }
        if self.bootstrap.n_boot == 0 {
            return Err(Error::InvalidParameter("bootstrap.n_boot must be positive".into()));
        }
        self.gibbs.data.validate()?;
        self.gibbs.ate.validate()
    }
}

/// Seed layout under the master seed.
const GENERATE_STREAM: u64 = 1;
const ATE_STREAM: u64 = 2;
const BOOTSTRAP_STREAM: u64 = 3;
const ATE_TRUE_STREAM: u64 = 4;

/// Samples `K` triplets: network `k` draws its graph, assignment and
/// responses, in that order, from stream `k` of the generation seed.
pub fn generate_dataset(config: &ScenarioConfig) -> Result<ExperimentDataset> {
    config.validate()?;
    let seed = rng::child_seed(config.master_seed, GENERATE_STREAM);
    let triplets = (0..config.k_networks)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(seed, k as u64);
            let graph = watts_strogatz(config.nodes_per_network, config.graph.k, config.graph.p_rewire, &mut rng)?;
            let z = bernoulli_assignment(graph.num_nodes(), config.treatment_proportion, &mut rng)?;
            let y = match config.true_params {
                ModelParams::Ising(p) => simulate_responses(&IsingModel(p), &graph, &z, &config.gibbs.data, &mut rng)?,
                ModelParams::Ggm(p) => simulate_responses(&GgmModel(p), &graph, &z, &config.gibbs.data, &mut rng)?,
            };
            Triplet::new(graph, z, y)
        })
        .collect::<Result<Vec<_>>>()?;
    ExperimentDataset::new(triplets)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub networks: usize,
    pub nodes: usize,
    pub edges: usize,
    pub group_a: usize,
    pub group_b: usize,
}

impl DatasetSummary {
    pub fn of(d: &ExperimentDataset) -> Self {
        let group_b: usize = d.triplets.iter().map(|t| t.assignment.num_treated()).sum();
        let nodes = d.total_nodes();
        DatasetSummary {
            networks: d.len(),
            nodes,
            edges: d.triplets.iter().map(|t| t.graph.num_edges()).sum(),
            group_a: nodes - group_b,
            group_b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub params: ModelParams,
    pub converged: bool,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub ridge_applied: bool,
}

impl FitSummary {
    fn from_fit<P>(fit: FitResult<P>, wrap: impl Fn(P) -> ModelParams) -> Self {
        FitSummary {
            params: wrap(fit.params),
            converged: fit.converged,
            iterations: fit.iterations,
            final_gradient_norm: fit.final_gradient_norm,
            ridge_applied: fit.ridge_applied,
        }
    }
}

/// Fits whichever model family the dataset's responses belong to.
pub fn fit_dataset(dataset: &ExperimentDataset, opts: &IrlsOptions) -> Result<FitSummary> {
    if dataset.is_spin() {
        Ok(FitSummary::from_fit(inference::fit_ising(dataset, opts)?, ModelParams::Ising))
    } else {
        Ok(FitSummary::from_fit(inference::fit_ggm_ols(dataset)?, ModelParams::Ggm))
    }
}

/// Pooled Gibbs ATE for either model family.
pub fn gibbs_ate(
    params: &ModelParams,
    dataset: &ExperimentDataset,
    config: &GibbsConfig,
    seed: u64,
) -> Result<DatasetAte> {
    fn run<M: FullConditional>(m: &M, d: &ExperimentDataset, c: &GibbsConfig, s: u64) -> Result<DatasetAte> {
        effects::estimate_ate_dataset(m, d, c, s)
    }
    match params {
        ModelParams::Ising(p) => run(&IsingModel(*p), dataset, config, seed),
        ModelParams::Ggm(p) => run(&GgmModel(*p), dataset, config, seed),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamRow {
    pub name: String,
    pub true_value: f64,
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AteReport {
    /// Gibbs ATE of the fitted model, per network and averaged.
    pub fitted: DatasetAte,
    /// Gibbs ATE of the generating model, for comparison.
    pub true_model: DatasetAte,
    /// Exact ATE of the fitted Ising model when networks are small enough.
    pub exact: Option<AteEstimate>,
    pub naive: AteEstimate,
    pub naive_t_test: WelchTest,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub generate_ms: u64,
    pub fit_ms: u64,
    pub ate_ms: u64,
    pub bootstrap_ms: u64,
    pub total_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ScenarioConfig,
    pub dataset: DatasetSummary,
    pub fit: FitSummary,
    pub parameters: Vec<ParamRow>,
    pub ate: AteReport,
    /// Absent for the Gaussian model.
    pub bootstrap: Option<BootstrapResult>,
    pub timing: Timing,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with timing zeroed, for reproducibility comparisons.
    pub fn to_json_without_timing(&self) -> String {
        let mut r = self.clone();
        r.timing = Timing::default();
        r.to_json()
    }
}

fn elapsed_ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

/// Everything after data generation.
pub fn analyze(config: &ScenarioConfig, dataset: &ExperimentDataset) -> Result<(RunReport, Timing)> {
    let mut timing = Timing::default();

    let t = Instant::now();
    let fit = fit_dataset(dataset, &config.fit)?;
    timing.fit_ms = elapsed_ms(t);

    let parameters = config
        .true_params
        .named_values()
        .into_iter()
        .zip(fit.params.named_values())
        .map(|((name, true_value), (_, estimate))| ParamRow { name: name.to_string(), true_value, estimate })
        .collect();

    let t = Instant::now();
    let fitted = gibbs_ate(&fit.params, dataset, &config.gibbs.ate, rng::child_seed(config.master_seed, ATE_STREAM))?;
    let true_model = gibbs_ate(
        &config.true_params,
        dataset,
        &config.gibbs.ate,
        rng::child_seed(config.master_seed, ATE_TRUE_STREAM),
    )?;
    let small = dataset.triplets.iter().all(|t| t.num_nodes() <= MAX_EXACT_NODES);
    let exact = match (&fit.params, small) {
        (ModelParams::Ising(p), true) => Some(effects::estimate_ate_dataset_exact(p, dataset)?.pooled),
        _ => None,
    };
    let ate = AteReport {
        fitted,
        true_model,
        exact,
        naive: effects::naive_ate(dataset)?,
        naive_t_test: effects::welch_t_test(dataset)?,
    };
    timing.ate_ms = elapsed_ms(t);

    let t = Instant::now();
    let bootstrap = match config.model {
        ModelKind::Ising => {
            let opts = BootstrapOptions {
                n_boot: config.bootstrap.n_boot,
                statistic: config.bootstrap.statistic,
                irls: config.fit.clone(),
                ate: config.gibbs.ate.clone(),
                ..BootstrapOptions::default()
            };
            Some(bootstrap_test(dataset, &opts, rng::child_seed(config.master_seed, BOOTSTRAP_STREAM))?)
        }
        ModelKind::Ggm => None,
    };
    timing.bootstrap_ms = elapsed_ms(t);

    let report = RunReport {
        config: config.clone(),
        dataset: DatasetSummary::of(dataset),
        fit,
        parameters,
        ate,
        bootstrap,
        timing: Timing::default(),
    };
    Ok((report, timing))
}

/// All five steps: generate, fit, ATE, bootstrap, report.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    let start = Instant::now();
    let t = Instant::now();
    let dataset = generate_dataset(config)?;
    let generate_ms = elapsed_ms(t);
    let (mut report, mut timing) = analyze(config, &dataset)?;
    timing.generate_ms = generate_ms;
    timing.total_ms = elapsed_ms(start);
    report.timing = timing;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ScenarioConfig {
        let mut c = ScenarioConfig::scenario_one();
        c.k_networks = 3;
        c.nodes_per_network = 12;
        c.bootstrap.n_boot = 5;
        c.graph = GraphConfig::default();
        c.gibbs.ate = GibbsConfig { burnin_sweeps: 20, n_samples: 40, ..GibbsConfig::ate_estimation() };
        c
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = ScenarioConfig::scenario_three();
        assert_eq!(ScenarioConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let text = r#"{"model":"ising","true_params":{"alpha0":0,"alpha1":0.1,"beta0":0.01,"beta1":0.01,"gamma":0.01},
            "k_networks":2,"nodes_per_network":10,"treatment_proportion":0.5,"master_seed":1}"#;
        let c = ScenarioConfig::from_json(text).unwrap();
        assert_eq!(c.graph, GraphConfig::default());
        assert_eq!(c.gibbs.data.burnin_sweeps, 200);
        assert_eq!(c.gibbs.ate.burnin_sweeps, 500);
    }

    #[test]
    fn mismatched_model_is_rejected() {
        let mut c = ScenarioConfig::scenario_one();
        c.model = ModelKind::Ggm;
        assert!(c.validate().is_err());
        let text = r#"{"model":"ising","true_params":{"alpha0":0},"k_networks":2,"nodes_per_network":10,
            "treatment_proportion":0.5,"master_seed":1}"#;
        assert!(matches!(ScenarioConfig::from_json(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn generation_is_deterministic_and_shaped() {
        let c = tiny();
        let a = generate_dataset(&c).unwrap();
        assert_eq!(a, generate_dataset(&c).unwrap());
        assert_eq!(a.len(), 3);
        assert!(a.triplets.iter().all(|t| t.num_nodes() == 12 && t.graph.num_edges() == 24));
        let mut other = c.clone();
        other.master_seed += 1;
        assert_ne!(a, generate_dataset(&other).unwrap());
    }

    #[test]
    fn small_run_reports_exact_ate() {
        let r = run_scenario(&tiny()).unwrap();
        assert!(r.ate.exact.is_some());
        assert_eq!(r.parameters.len(), 5);
        assert_eq!(r.bootstrap.as_ref().unwrap().n_boot, 5);
        assert_eq!(r.to_json_without_timing(), run_scenario(&tiny()).unwrap().to_json_without_timing());
    }

    #[test]
    fn ggm_run_skips_bootstrap() {
        let mut c = tiny();
        c.model = ModelKind::Ggm;
        c.true_params = ModelParams::Ggm(GgmParams::new(1.0, 1.5, 0.1, 0.3, 0.5).unwrap());
        let r = run_scenario(&c).unwrap();
        assert!(r.bootstrap.is_none());
        assert!(r.ate.exact.is_none());
        assert!(matches!(r.fit.params, ModelParams::Ggm(_)));
    }
}
