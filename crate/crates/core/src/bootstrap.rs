//! Shuffle bootstrap for the treatment effect.
//!
//! The observed statistic comes from the model fitted to the data as
//! collected. Each replicate permutes the assignment vector of every network
//! independently (keeping its group sizes), refits, and recomputes the
//! statistic. The p-value is the add-one upper-tail fraction
//! `(1 + #{null >= observed}) / (replicates + 1)`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::ExperimentDataset;
use crate::effects::estimate_ate_dataset;
use crate::error::{Error, Result};
use crate::gibbs::{GibbsConfig, IsingModel};
use crate::graph::Assignment;
use crate::inference::{append_design, fit_logistic_irls, DesignRow, FitResult, IrlsOptions};
use crate::ising::IsingParams;
use crate::rng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// Pooled Gibbs ATE of the fitted model.
    Ate,
    /// `alpha1 - alpha0`.
    #[default]
    AlphaDiff,
    /// `beta1 - beta0`.
    BetaDiff,
}

impl StatisticKind {
    pub fn needs_gibbs(self) -> bool {
        self == StatisticKind::Ate
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatisticKind::Ate => "ate",
            StatisticKind::AlphaDiff => "alpha_diff",
            StatisticKind::BetaDiff => "beta_diff",
        })
    }
}

impl FromStr for StatisticKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "ate" => Ok(StatisticKind::Ate),
            "alpha_diff" => Ok(StatisticKind::AlphaDiff),
            "beta_diff" => Ok(StatisticKind::BetaDiff),
            _ => {
                Err(Error::InvalidParameter(format!("unknown statistic `{s}` (expected ate, alpha-diff or beta-diff)")))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapOptions {
    pub n_boot: usize,
    pub statistic: StatisticKind,
    pub irls: IrlsOptions,
    /// Chain schedule for the `ate` statistic.
    pub ate: GibbsConfig,
    /// Abort when more than this fraction of replicate fits fail.
    pub max_failure_fraction: f64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions {
            n_boot: 200,
            statistic: StatisticKind::AlphaDiff,
            irls: IrlsOptions::default(),
            ate: GibbsConfig::ate_estimation(),
            max_failure_fraction: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub statistic_kind: StatisticKind,
    pub observed_stat: f64,
    pub observed_params: IsingParams,
    /// Statistics of the converged replicates, in replicate order.
    pub null_stats: Vec<f64>,
    /// One-sided, upper tail.
    pub p_value: f64,
    /// Twice the smaller add-one tail, capped at 1.
    pub p_value_two_sided: f64,
    pub n_boot: usize,
    /// Replicates whose fit did not converge; excluded from `null_stats`.
    pub n_failed: usize,
}

/// Uniformly random permutation of `z` (group sizes preserved).
pub fn shuffle_assignment<R: Rng + ?Sized>(z: &Assignment, rng: &mut R) -> Assignment {
    let mut out = z.clone();
    out.as_mut_slice().shuffle(rng);
    out
}

/// Add-one upper-tail p-value.
pub fn upper_p_value(observed: f64, null: &[f64]) -> f64 {
    let hits = null.iter().filter(|&&s| s >= observed).count();
    (1 + hits) as f64 / (null.len() + 1) as f64
}

/// Add-one two-sided p-value: twice the smaller tail, at most 1.
pub fn two_sided_p_value(observed: f64, null: &[f64]) -> f64 {
    let upper = upper_p_value(observed, null);
    let lower_hits = null.iter().filter(|&&s| s <= observed).count();
    let lower = (1 + lower_hits) as f64 / (null.len() + 1) as f64;
    (2.0 * upper.min(lower)).min(1.0)
}

fn statistic(
    kind: StatisticKind,
    params: &IsingParams,
    dataset: &ExperimentDataset,
    ate: &GibbsConfig,
    seed: u64,
) -> Result<f64> {
    Ok(match kind {
        StatisticKind::AlphaDiff => params.alpha1 - params.alpha0,
        StatisticKind::BetaDiff => params.beta1 - params.beta0,
        StatisticKind::Ate => estimate_ate_dataset(&IsingModel(*params), dataset, ate, seed)?.pooled.value,
    })
}

fn fit_with_assignments(
    dataset: &ExperimentDataset,
    assignments: &[Assignment],
    opts: &IrlsOptions,
) -> Result<FitResult<IsingParams>> {
    let mut rows: Vec<DesignRow> = Vec::with_capacity(dataset.total_nodes());
    for (t, z) in dataset.triplets.iter().zip(assignments) {
        let y = t.response.as_spins().ok_or_else(|| Error::Validation("bootstrap needs spin responses".into()))?;
        append_design(&t.graph, z, y, &mut rows);
    }
    fit_logistic_irls(&rows, opts)
}

/// Runs the shuffle bootstrap.
///
/// Replicate `r` (0-based) shuffles with `stream(master_seed, r + 1)` and, for
/// the `ate` statistic, runs its chains from `child_seed(master_seed, r + 1)`;
/// the observed statistic uses index 0. Results are therefore identical for
/// any thread count.
pub fn bootstrap_test(
    dataset: &ExperimentDataset,
    opts: &BootstrapOptions,
    master_seed: u64,
) -> Result<BootstrapResult> {
    if opts.n_boot == 0 {
        return Err(Error::InvalidParameter("n_boot must be at least 1".into()));
    }
    dataset.validate()?;
    if !dataset.is_spin() {
        return Err(Error::Validation("bootstrap needs spin (Ising) responses".into()));
    }
    if opts.statistic.needs_gibbs() {
        opts.ate.validate()?;
    }

    let original: Vec<Assignment> = dataset.triplets.iter().map(|t| t.assignment.clone()).collect();
    let fit = fit_with_assignments(dataset, &original, &opts.irls)?;
    if !fit.converged {
        return Err(Error::Convergence(format!(
            "fit on the observed data stopped after {} iterations with gradient norm {:.3e}",
            fit.iterations, fit.final_gradient_norm
        )));
    }
    let observed = statistic(opts.statistic, &fit.params, dataset, &opts.ate, rng::child_seed(master_seed, 0))?;

    let replicates: Vec<Option<f64>> = (0..opts.n_boot)
        .into_par_iter()
        .map(|r| -> Result<Option<f64>> {
            let index = r as u64 + 1;
            let mut rng = rng::stream(master_seed, index);
            let shuffled: Vec<Assignment> = original.iter().map(|z| shuffle_assignment(z, &mut rng)).collect();
            let fit = fit_with_assignments(dataset, &shuffled, &opts.irls)?;
            if !fit.converged {
                return Ok(None);
            }
            let stat = statistic(opts.statistic, &fit.params, dataset, &opts.ate, rng::child_seed(master_seed, index))?;
            Ok(Some(stat))
        })
        .collect::<Result<_>>()?;

    let n_failed = replicates.iter().filter(|r| r.is_none()).count();
    if n_failed as f64 > opts.max_failure_fraction * opts.n_boot as f64 {
        return Err(Error::BootstrapAborted { failed: n_failed, total: opts.n_boot });
    }
    let null_stats: Vec<f64> = replicates.into_iter().flatten().collect();
    Ok(BootstrapResult {
        statistic_kind: opts.statistic,
        observed_stat: observed,
        observed_params: fit.params,
        p_value: upper_p_value(observed, &null_stats),
        p_value_two_sided: two_sided_p_value(observed, &null_stats),
        null_stats,
        n_boot: opts.n_boot,
        n_failed,
    })
}
