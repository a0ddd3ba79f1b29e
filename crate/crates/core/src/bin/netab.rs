//! `netab`: generate networked experiments, fit response models, estimate
//! treatment effects and run shuffle-bootstrap tests.
//!
//! Results go to `--out` (or stdout) as JSON; progress and summaries go to
//! stderr. Runtime errors print `{"error": kind, "message": ...}` on stderr
//! and exit with status 1; usage errors exit with status 2.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use netab::bootstrap::{bootstrap_test, BootstrapOptions, BootstrapResult, StatisticKind};
use netab::effects::{self, AteEstimate, DatasetAte};
use netab::error::{Error, Result};
use netab::gibbs::GibbsConfig;
use netab::inference::{build_ising_design, write_design_csv, IrlsOptions};
use netab::ising::MAX_EXACT_NODES;
use netab::plot;
use netab::scenario::{self, DatasetSummary, ModelParams, ScenarioConfig};
use netab::ExperimentDataset;

/// Seed used by `ate` and `test` when neither `--seed` nor NETAB_SEED is set.
const DEFAULT_SEED: u64 = 20160802;

#[derive(Parser)]
#[command(name = "netab", version, about = "Network A/B testing under interference")]
struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset of (graph, assignment, response) triplets.
    Generate {
        #[command(flatten)]
        source: ConfigSource,
        #[command(flatten)]
        seed: SeedArg,
        /// Dataset JSON destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the response model by maximum pseudo-likelihood.
    Fit {
        dataset: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the logistic design matrix (Ising data only).
        #[arg(long)]
        design_csv: Option<PathBuf>,
    },
    /// Estimate the average treatment effect with two counterfactual chains.
    Ate {
        dataset: PathBuf,
        /// Model parameters (raw, or the output of `fit`); fitted when omitted.
        #[arg(long)]
        params: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = GibbsConfig::ate_estimation().burnin_sweeps)]
        burnin: usize,
        #[arg(long, default_value_t = GibbsConfig::ate_estimation().n_samples)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shuffle-bootstrap test of the treatment effect.
    Test {
        dataset: PathBuf,
        #[arg(long, default_value_t = StatisticKind::AlphaDiff, value_parser = parse_statistic)]
        statistic: StatisticKind,
        #[arg(long, default_value_t = 200)]
        n_boot: usize,
        #[command(flatten)]
        seed: SeedArg,
        /// Result JSON; the null sample, histogram and chart are written
        /// next to it as `<stem>.null.csv`, `<stem>.hist.csv`, `<stem>.svg`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also draw the null histogram as SVG (needs --out).
        #[arg(long, requires = "out")]
        svg: bool,
    },
    /// Run generate, fit, ATE and bootstrap for one configuration.
    Scenario {
        #[command(flatten)]
        source: ConfigSource,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, value_parser = parse_statistic)]
        statistic: Option<StatisticKind>,
        #[arg(long)]
        n_boot: Option<usize>,
        /// Report JSON; bootstrap side files are written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, requires = "out")]
        svg: bool,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ConfigSource {
    /// Scenario configuration JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario: 1, 2 or 3.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct SeedArg {
    /// Master seed; overrides the configuration's.
    #[arg(long, env = "NETAB_SEED")]
    seed: Option<u64>,
}

fn parse_statistic(s: &str) -> std::result::Result<StatisticKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate { source, seed, out } => {
            let config = load_config(&source, seed.seed)?;
            let dataset = scenario::generate_dataset(&config)?;
            print_summary(&DatasetSummary::of(&dataset));
            emit(out.as_deref(), &dataset.to_json()?)
        }
        Command::Fit { dataset, out, design_csv } => {
            let dataset = ExperimentDataset::load(&dataset)?;
            if let Some(path) = design_csv {
                let rows = build_ising_design(&dataset)?;
                write_design_csv(&rows, fs::File::create(&path)?)?;
            }
            let fit = scenario::fit_dataset(&dataset, &IrlsOptions::default())?;
            warn_if_nonstationary(&fit.params);
            if !fit.converged {
                eprintln!("warning: fit stopped after {} iterations without converging", fit.iterations);
            }
            emit(out.as_deref(), &to_json(&fit))
        }
        Command::Ate { dataset, params, seed, burnin, samples, out } => {
            let dataset = ExperimentDataset::load(&dataset)?;
            let (params, fitted) = match params {
                Some(path) => (load_params(&path)?, false),
                None => (scenario::fit_dataset(&dataset, &IrlsOptions::default())?.params, true),
            };
            warn_if_nonstationary(&params);
            let config = GibbsConfig { burnin_sweeps: burnin, n_samples: samples, ..GibbsConfig::ate_estimation() };
            let gibbs = scenario::gibbs_ate(&params, &dataset, &config, seed.seed.unwrap_or(DEFAULT_SEED))?;
            let small = dataset.triplets.iter().all(|t| t.num_nodes() <= MAX_EXACT_NODES);
            let exact = match params {
                ModelParams::Ising(p) if small => Some(effects::estimate_ate_dataset_exact(&p, &dataset)?),
                _ => None,
            };
            let report = AteOutput { params, fitted, gibbs, exact, naive: effects::naive_ate(&dataset)? };
            eprintln!(
                "ATE {:.6} (MC s.e. {:.2e}); naive difference in means {:.6}",
                report.gibbs.pooled.value, report.gibbs.pooled.mc_standard_error, report.naive.value
            );
            emit(out.as_deref(), &to_json(&report))
        }
        Command::Test { dataset, statistic, n_boot, seed, out, svg } => {
            let dataset = ExperimentDataset::load(&dataset)?;
            let opts = BootstrapOptions { n_boot, statistic, ..BootstrapOptions::default() };
            let result = bootstrap_test(&dataset, &opts, seed.seed.unwrap_or(DEFAULT_SEED))?;
            print_bootstrap(&result);
            emit(out.as_deref(), &to_json(&result))?;
            match out {
                Some(path) => write_null_files(&path, &result, svg),
                None => Ok(()),
            }
        }
        Command::Scenario { source, seed, statistic, n_boot, out, svg } => {
            let mut config = load_config(&source, seed.seed)?;
            if let Some(s) = statistic {
                config.bootstrap.statistic = s;
            }
            if let Some(n) = n_boot {
                config.bootstrap.n_boot = n;
            }
            config.validate()?;
            let report = scenario::run_scenario(&config)?;
            print_summary(&report.dataset);
            for row in &report.parameters {
                eprintln!("  {:<7} true {:>9.5}  estimate {:>9.5}", row.name, row.true_value, row.estimate);
            }
            eprintln!(
                "ATE fitted {:.6} (MC s.e. {:.2e}), true model {:.6}, naive {:.6}",
                report.ate.fitted.pooled.value,
                report.ate.fitted.pooled.mc_standard_error,
                report.ate.true_model.pooled.value,
                report.ate.naive.value
            );
            if let Some(b) = &report.bootstrap {
                print_bootstrap(b);
            }
            emit(out.as_deref(), &report.to_json())?;
            match (&out, &report.bootstrap) {
                (Some(path), Some(b)) => write_null_files(path, b, svg),
                _ => Ok(()),
            }
        }
    }
}

#[derive(Serialize)]
struct AteOutput {
    params: ModelParams,
    /// Whether `params` were fitted from the dataset rather than supplied.
    fitted: bool,
    gibbs: DatasetAte,
    /// Present for Ising parameters when every network is small enough.
    exact: Option<DatasetAte>,
    naive: AteEstimate,
}

fn load_config(source: &ConfigSource, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut config = match (&source.config, &source.preset) {
        (Some(path), _) => ScenarioConfig::from_json(&read(path)?)?,
        (None, Some(name)) => ScenarioConfig::preset(name)?,
        (None, None) => unreachable!("clap requires one config source"),
    };
    if let Some(s) = seed {
        config.master_seed = s;
    }
    warn_if_nonstationary(&config.true_params);
    Ok(config)
}

fn load_params(path: &Path) -> Result<ModelParams> {
    let value: serde_json::Value = serde_json::from_str(&read(path)?).map_err(|e| parse_error(path, e))?;
    let inner = match value.get("params") {
        Some(p) => p.clone(),
        None => value,
    };
    let params: ModelParams = serde_json::from_value(inner).map_err(|e| parse_error(path, e))?;
    params.validate()?;
    Ok(params)
}

fn parse_error(path: &Path, e: serde_json::Error) -> Error {
    Error::Parse { context: path.display().to_string(), message: e.to_string() }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn emit(out: Option<&Path>, json: &str) -> Result<()> {
    match out {
        Some(path) => write(path, &format!("{json}\n")),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output types serialize")
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn write_null_files(out: &Path, result: &BootstrapResult, svg: bool) -> Result<()> {
    let bins = plot::histogram(&result.null_stats, result.observed_stat, plot::DEFAULT_BINS);
    write(&sibling(out, ".null.csv"), &plot::values_csv("null_stat", &result.null_stats))?;
    write(&sibling(out, ".hist.csv"), &plot::histogram_csv(&bins))?;
    if svg {
        let title = format!(
            "{} null distribution ({} replicates), observed {:.4}, p = {:.3}",
            result.statistic_kind,
            result.null_stats.len(),
            result.observed_stat,
            result.p_value
        );
        write(&sibling(out, ".svg"), &plot::histogram_svg(&bins, result.observed_stat, &title))?;
    }
    Ok(())
}

fn warn_if_nonstationary(params: &ModelParams) {
    if let ModelParams::Ggm(p) = params {
        if p.may_be_nonstationary() {
            eprintln!(
                "warning: |gamma| = {} >= 1; the Gaussian model may have no stationary distribution",
                p.gamma.abs()
            );
        }
    }
}

fn print_summary(s: &DatasetSummary) {
    eprintln!(
        "{} networks, {} nodes, {} edges; group A {} / group B {}",
        s.networks, s.nodes, s.edges, s.group_a, s.group_b
    );
}

fn print_bootstrap(b: &BootstrapResult) {
    eprintln!(
        "{} observed {:.6}; p = {:.4} (two-sided {:.4}); {} replicates, {} failed",
        b.statistic_kind, b.observed_stat, b.p_value, b.p_value_two_sided, b.n_boot, b.n_failed
    );
}
