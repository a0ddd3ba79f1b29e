//! Average treatment effect: the expected mean response with every node in
//! group B minus the same with every node in group A.
//!
//! Under a uniform assignment no edge crosses groups, so the spill-over
//! coefficient drops out and each counterfactual is an ordinary Ising (or
//! Gaussian) model with that group's coefficients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::ExperimentDataset;
use crate::error::{Error, Result};
use crate::gibbs::{gibbs_run, FullConditional, GibbsConfig};
use crate::graph::{Assignment, Graph};
use crate::ising::{self, IsingParams};
use crate::rng;

/// Number of batches used for the Monte Carlo standard error.
pub const SE_BATCHES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AteMethod {
    Gibbs,
    Exact,
    Naive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AteEstimate {
    pub value: f64,
    /// Zero for exact estimates.
    pub mc_standard_error: f64,
    pub n_samples: usize,
    pub method: AteMethod,
}

/// Batch-means standard error of the mean of a correlated series.
pub fn batch_means_se(xs: &[f64], batches: usize) -> f64 {
    let n = xs.len();
    let batches = batches.min(n);
    if batches < 2 {
        return 0.0;
    }
    let size = n / batches;
    let means: Vec<f64> = xs.chunks_exact(size).take(batches).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

/// Two independent counterfactual chains (all-A on stream 0, all-B on
/// stream 1 of `seed`), run concurrently.
pub fn estimate_ate_gibbs<M: FullConditional>(
    model: &M,
    graph: &Graph,
    config: &GibbsConfig,
    seed: u64,
) -> Result<AteEstimate> {
    let n = graph.num_nodes();
    let all_a = Assignment::uniform(n, 0);
    let all_b = Assignment::uniform(n, 1);
    let (control, treated) = rayon::join(
        || gibbs_run(model, graph, &all_a, config, &mut rng::stream(seed, 0)),
        || gibbs_run(model, graph, &all_b, config, &mut rng::stream(seed, 1)),
    );
    let (control, treated) = (control?, treated?);
    let se_a = batch_means_se(&control.mean_responses, SE_BATCHES);
    let se_b = batch_means_se(&treated.mean_responses, SE_BATCHES);
    Ok(AteEstimate {
        value: treated.mean() - control.mean(),
        mc_standard_error: (se_a * se_a + se_b * se_b).sqrt(),
        n_samples: config.n_samples,
        method: AteMethod::Gibbs,
    })
}

/// Exact ATE by enumeration (at most [`ising::MAX_EXACT_NODES`] nodes).
pub fn estimate_ate_exact(params: &IsingParams, graph: &Graph) -> Result<AteEstimate> {
    let n = graph.num_nodes();
    let treated = ising::exact_mean_response(params, graph, &Assignment::uniform(n, 1))?;
    let control = ising::exact_mean_response(params, graph, &Assignment::uniform(n, 0))?;
    Ok(AteEstimate { value: treated - control, mc_standard_error: 0.0, n_samples: 0, method: AteMethod::Exact })
}

/// ATE per network and averaged over networks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetAte {
    pub per_graph: Vec<AteEstimate>,
    pub pooled: AteEstimate,
}

impl DatasetAte {
    fn pool(per_graph: Vec<AteEstimate>, method: AteMethod) -> Self {
        let k = per_graph.len() as f64;
        let value = per_graph.iter().map(|e| e.value).sum::<f64>() / k;
        let se = per_graph.iter().map(|e| e.mc_standard_error.powi(2)).sum::<f64>().sqrt() / k;
        let n_samples = per_graph.iter().map(|e| e.n_samples).sum();
        DatasetAte { pooled: AteEstimate { value, mc_standard_error: se, n_samples, method }, per_graph }
    }
}

/// Gibbs ATE on every network of a dataset; network `k` uses seed
/// `child_seed(seed, k)`.
pub fn estimate_ate_dataset<M: FullConditional>(
    model: &M,
    dataset: &ExperimentDataset,
    config: &GibbsConfig,
    seed: u64,
) -> Result<DatasetAte> {
    let per_graph = dataset
        .triplets
        .par_iter()
        .enumerate()
        .map(|(k, t)| estimate_ate_gibbs(model, &t.graph, config, rng::child_seed(seed, k as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DatasetAte::pool(per_graph, AteMethod::Gibbs))
}

/// Exact ATE on every network of a dataset.
pub fn estimate_ate_dataset_exact(params: &IsingParams, dataset: &ExperimentDataset) -> Result<DatasetAte> {
    let per_graph =
        dataset.triplets.iter().map(|t| estimate_ate_exact(params, &t.graph)).collect::<Result<Vec<_>>>()?;
    Ok(DatasetAte::pool(per_graph, AteMethod::Exact))
}

struct GroupStats {
    n: usize,
    mean: f64,
    var: f64,
}

fn pooled_groups(dataset: &ExperimentDataset) -> [GroupStats; 2] {
    let mut sums = [0.0; 2];
    let mut counts = [0usize; 2];
    for t in &dataset.triplets {
        let y = t.response.to_f64();
        for (i, v) in y.iter().enumerate() {
            let g = t.assignment.group(i) as usize;
            sums[g] += v;
            counts[g] += 1;
        }
    }
    let means = [0, 1].map(|g| if counts[g] > 0 { sums[g] / counts[g] as f64 } else { f64::NAN });
    let mut ss = [0.0; 2];
    for t in &dataset.triplets {
        let y = t.response.to_f64();
        for (i, v) in y.iter().enumerate() {
            let g = t.assignment.group(i) as usize;
            ss[g] += (v - means[g]).powi(2);
        }
    }
    [0, 1].map(|g| GroupStats {
        n: counts[g],
        mean: means[g],
        var: if counts[g] > 1 { ss[g] / (counts[g] - 1) as f64 } else { 0.0 },
    })
}

/// Difference of pooled group means (B minus A), treating nodes as independent.
pub fn naive_ate(dataset: &ExperimentDataset) -> Result<AteEstimate> {
    let [a, b] = pooled_groups(dataset);
    if a.n == 0 || b.n == 0 {
        return Err(Error::EmptyGroup(format!("group A has {} nodes, group B has {}", a.n, b.n)));
    }
    Ok(AteEstimate {
        value: b.mean - a.mean,
        mc_standard_error: (a.var / a.n as f64 + b.var / b.n as f64).sqrt(),
        n_samples: a.n + b.n,
        method: AteMethod::Naive,
    })
}

/// Welch two-sample t-test of group B against group A.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub mean_difference: f64,
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    /// Two-sided.
    pub p_value: f64,
}

pub fn welch_t_test(dataset: &ExperimentDataset) -> Result<WelchTest> {
    let [a, b] = pooled_groups(dataset);
    if a.n < 2 || b.n < 2 {
        return Err(Error::EmptyGroup(format!("t-test needs at least 2 nodes per group, got A={} B={}", a.n, b.n)));
    }
    let diff = b.mean - a.mean;
    let va = a.var / a.n as f64;
    let vb = b.var / b.n as f64;
    let se2 = va + vb;
    if se2 == 0.0 {
        let p = if diff == 0.0 { 1.0 } else { 0.0 };
        let t = if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY };
        return Ok(WelchTest { mean_difference: diff, t_statistic: t, degrees_of_freedom: f64::INFINITY, p_value: p });
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.n - 1) as f64 + vb * vb / (b.n - 1) as f64);
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(WelchTest { mean_difference: diff, t_statistic: t, degrees_of_freedom: df, p_value: p })
}

/// p-value of [`welch_t_test`].
pub fn naive_t_test(dataset: &ExperimentDataset) -> Result<f64> {
    Ok(welch_t_test(dataset)?.p_value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Response, Triplet};
    use crate::gibbs::IsingModel;

    fn real_dataset(z: Vec<u8>, y: Vec<f64>) -> ExperimentDataset {
        let n = z.len();
        let t = Triplet::new(Graph::empty(n).unwrap(), Assignment::new(z).unwrap(), Response::Real(y)).unwrap();
        ExperimentDataset::new(vec![t]).unwrap()
    }

    #[test]
    fn naive_difference_of_means() {
        let d = real_dataset(vec![0, 0, 1, 1], vec![0.1, 0.3, 0.2, 0.4]);
        let ate = naive_ate(&d).unwrap();
        assert!((ate.value - 0.1).abs() < 1e-15);
        assert_eq!(ate.method, AteMethod::Naive);
    }

    #[test]
    fn identical_groups_have_p_one() {
        let d = real_dataset(vec![0, 0, 0, 1, 1, 1], vec![1.0, 2.0, 4.0, 4.0, 1.0, 2.0]);
        let p = naive_t_test(&d).unwrap();
        assert!((p - 1.0).abs() < 1e-12, "{p}");
    }

    #[test]
    fn welch_matches_reference() {
        // scipy.stats.ttest_ind([2,4,6,8,10], [1,2,3,4], equal_var=False)
        let d = real_dataset(vec![0, 0, 0, 0, 1, 1, 1, 1, 1], vec![1.0, 2.0, 3.0, 4.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        let w = welch_t_test(&d).unwrap();
        assert!((w.t_statistic - 2.251_436_323_159_369_5).abs() < 1e-12, "{w:?}");
        assert!((w.degrees_of_freedom - 5.520_787_746_170_677).abs() < 1e-9, "{w:?}");
        assert!((w.p_value - 0.069_133_593_192_392_36).abs() < 1e-8, "{w:?}");
    }

    #[test]
    fn empty_group_is_an_error() {
        let d = real_dataset(vec![0, 0], vec![1.0, 2.0]);
        assert!(matches!(naive_ate(&d), Err(Error::EmptyGroup(_))));
        assert!(naive_t_test(&d).is_err());
    }

    #[test]
    fn exact_ate_isolated_nodes() {
        let p = IsingParams { alpha1: 0.1, ..Default::default() };
        let e = estimate_ate_exact(&p, &Graph::empty(7).unwrap()).unwrap();
        assert!((e.value - 0.1f64.tanh()).abs() < 1e-12);
        assert_eq!(e.mc_standard_error, 0.0);
        assert_eq!(estimate_ate_exact(&IsingParams::default(), &Graph::cycle(5).unwrap()).unwrap().value, 0.0);
    }

    #[test]
    fn exact_ate_cycle_sign() {
        let p = IsingParams { alpha0: 0.0, alpha1: 0.05, beta0: 0.3, beta1: 0.3, gamma: 0.0 };
        let e = estimate_ate_exact(&p, &Graph::cycle(6).unwrap()).unwrap();
        assert!(e.value > 0.0, "{e:?}");
    }

    #[test]
    fn gibbs_ate_null_and_tanh() {
        let g = Graph::empty(10).unwrap();
        let cfg = GibbsConfig { burnin_sweeps: 50, n_samples: 4000, ..GibbsConfig::ate_estimation() };
        let same = IsingParams { alpha0: 0.2, alpha1: 0.2, beta0: 0.1, beta1: 0.1, gamma: 0.4 };
        let e = estimate_ate_gibbs(&IsingModel(same), &Graph::cycle(10).unwrap(), &cfg, 3).unwrap();
        assert!(e.value.abs() <= 3.0 * e.mc_standard_error, "{e:?}");
        let p = IsingParams { alpha1: 0.1, ..Default::default() };
        let e = estimate_ate_gibbs(&IsingModel(p), &g, &cfg, 4).unwrap();
        assert!((e.value - 0.1f64.tanh()).abs() <= 3.0 * e.mc_standard_error, "{e:?}");
        assert!(e.mc_standard_error > 0.0);
    }

    #[test]
    fn batch_means_of_constant_is_zero() {
        assert_eq!(batch_means_se(&[0.5; 100], 20), 0.0);
        assert_eq!(batch_means_se(&[1.0], 20), 0.0);
    }
}
