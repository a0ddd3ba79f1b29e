//! C interface to `netab`.
//!
//! Conventions:
//!
//! * Every fallible function returns a [`NetabStatus`]; results come back
//!   through out-pointers that are written only on success.
//! * On failure, [`netab_last_error_message`] describes the most recent error
//!   on the calling thread.
//! * Graphs, datasets and bootstrap results are opaque handles released by
//!   the matching `*_free` function. Freeing NULL is a no-op.
//! * Panics never cross the boundary; they are reported as
//!   [`NetabStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use netab::bootstrap::{bootstrap_test, BootstrapOptions, BootstrapResult, StatisticKind};
use netab::effects::{estimate_ate_dataset, estimate_ate_exact, estimate_ate_gibbs};
use netab::gibbs::{GibbsConfig, IsingModel};
use netab::graph::watts_strogatz;
use netab::inference::{fit_ising, IrlsOptions};
use netab::rng::seeded;
use netab::scenario::{generate_dataset, GraphConfig, ModelKind, ModelParams, ScenarioConfig};
use netab::{Error, ExperimentDataset, Graph, IsingParams};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NetabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Validation = 3,
    Parse = 4,
    NodeIndex = 5,
    Capacity = 6,
    RankDeficient = 7,
    Convergence = 8,
    EmptyGroup = 9,
    BootstrapAborted = 10,
    Io = 11,
    Panic = 12,
}

impl From<&Error> for NetabStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => NetabStatus::InvalidParameter,
            Error::Validation(_) => NetabStatus::Validation,
            Error::Parse { .. } => NetabStatus::Parse,
            Error::NodeIndex { .. } => NetabStatus::NodeIndex,
            Error::Capacity(_) => NetabStatus::Capacity,
            Error::RankDeficient { .. } => NetabStatus::RankDeficient,
            Error::Convergence(_) => NetabStatus::Convergence,
            Error::EmptyGroup(_) => NetabStatus::EmptyGroup,
            Error::BootstrapAborted { .. } => NetabStatus::BootstrapAborted,
            Error::Io(_) => NetabStatus::Io,
        }
    }
}

/// Statistic compared against its shuffle-bootstrap null distribution.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NetabStatistic {
    /// Average treatment effect of the fitted model (runs Gibbs chains).
    Ate = 0,
    /// `alpha1 - alpha0`.
    AlphaDiff = 1,
    /// `beta1 - beta0`.
    BetaDiff = 2,
}

fn statistic_kind(code: i32) -> Result<StatisticKind, Error> {
    match code {
        c if c == NetabStatistic::Ate as i32 => Ok(StatisticKind::Ate),
        c if c == NetabStatistic::AlphaDiff as i32 => Ok(StatisticKind::AlphaDiff),
        c if c == NetabStatistic::BetaDiff as i32 => Ok(StatisticKind::BetaDiff),
        other => Err(Error::InvalidParameter(format!("unknown statistic code {other}"))),
    }
}

/// Ising response-model parameters.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NetabIsingParams {
    pub alpha0: f64,
    pub alpha1: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub gamma: f64,
}

impl From<NetabIsingParams> for IsingParams {
    fn from(p: NetabIsingParams) -> Self {
        IsingParams { alpha0: p.alpha0, alpha1: p.alpha1, beta0: p.beta0, beta1: p.beta1, gamma: p.gamma }
    }
}

impl From<IsingParams> for NetabIsingParams {
    fn from(p: IsingParams) -> Self {
        NetabIsingParams { alpha0: p.alpha0, alpha1: p.alpha1, beta0: p.beta0, beta1: p.beta1, gamma: p.gamma }
    }
}

/// Treatment-effect estimate with its Monte Carlo standard error (0 when exact).
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NetabAte {
    pub value: f64,
    pub mc_standard_error: f64,
}

/// Opaque collection of (graph, assignment, response) triplets.
pub struct NetabDataset {
    inner: ExperimentDataset,
}

/// Opaque undirected simple graph.
pub struct NetabGraph {
    inner: Graph,
}

/// Opaque outcome of a shuffle-bootstrap test.
pub struct NetabBootstrapResult {
    inner: BootstrapResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> FfiResult<()>) -> NetabStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            NetabStatus::Ok
        }
        Ok(Err(Failure::Null(name))) => {
            set_last_error(&format!("null pointer passed as `{name}`"));
            NetabStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            NetabStatus::from(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            NetabStatus::Panic
        }
    }
}

unsafe fn reference<'a, T>(p: *const T, name: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn out_slot<'a, T>(p: *mut T, name: &'static str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or(Failure::Null(name))
}

unsafe fn string<'a>(p: *const c_char, name: &'static str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidParameter(format!("`{name}` is not valid UTF-8"))))
}

fn ate_config(burnin_sweeps: usize, n_samples: usize) -> GibbsConfig {
    GibbsConfig { burnin_sweeps, n_samples, ..GibbsConfig::ate_estimation() }
}

/// Message for the most recent failure on this thread, or "" after a
/// successful call. The pointer stays valid until the next call into this
/// library on the same thread.
#[no_mangle]
pub extern "C" fn netab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn netab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---------------------------------------------------------------------------
// Graphs
// ---------------------------------------------------------------------------

/// Watts-Strogatz small-world graph: ring lattice of even degree `k` with
/// each edge rewired with probability `p_rewire`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn netab_graph_watts_strogatz(
    n: usize,
    k: usize,
    p_rewire: f64,
    seed: u64,
    out: *mut *mut NetabGraph,
) -> NetabStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        let inner = watts_strogatz(n, k, p_rewire, &mut seeded(seed))?;
        *out = Box::into_raw(Box::new(NetabGraph { inner }));
        Ok(())
    })
}

/// Graph from `num_edges` endpoint pairs `(us[i], vs[i])`.
///
/// # Safety
/// `us` and `vs` must each point to `num_edges` readable values (they may be
/// NULL when `num_edges` is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn netab_graph_from_edges(
    num_nodes: usize,
    us: *const usize,
    vs: *const usize,
    num_edges: usize,
    out: *mut *mut NetabGraph,
) -> NetabStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        let (us, vs) = if num_edges == 0 {
            (&[][..], &[][..])
        } else {
            if us.is_null() {
                return Err(Failure::Null("us"));
            }
            if vs.is_null() {
                return Err(Failure::Null("vs"));
            }
            (std::slice::from_raw_parts(us, num_edges), std::slice::from_raw_parts(vs, num_edges))
        };
        let inner = Graph::new(num_nodes, us.iter().copied().zip(vs.iter().copied()))?;
        *out = Box::into_raw(Box::new(NetabGraph { inner }));
        Ok(())
    })
}

/// Number of nodes; 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn netab_graph_num_nodes(graph: *const NetabGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.num_nodes())
}

/// Number of edges; 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn netab_graph_num_edges(graph: *const NetabGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.num_edges())
}

/// Copies up to `capacity` edges (sorted, `u < v`) into `us`/`vs` and
/// stores the number copied in `written`.
///
/// # Safety
/// `us` and `vs` must have room for `capacity` values; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn netab_graph_edges(
    graph: *const NetabGraph,
    us: *mut usize,
    vs: *mut usize,
    capacity: usize,
    written: *mut usize,
) -> NetabStatus {
    guard(|| {
        let g = reference(graph, "graph")?;
        let written = out_slot(written, "written")?;
        let edges = g.inner.edges();
        let count = edges.len().min(capacity);
        if count > 0 {
            if us.is_null() {
                return Err(Failure::Null("us"));
            }
            if vs.is_null() {
                return Err(Failure::Null("vs"));
            }
            for (i, &(u, v)) in edges[..count].iter().enumerate() {
                *us.add(i) = u;
                *vs.add(i) = v;
            }
        }
        *written = count;
        Ok(())
    })
}

/// Exact ATE by enumerating all states (at most 20 nodes).
///
/// # Safety
/// `graph`, `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn netab_graph_ate_exact(
    graph: *const NetabGraph,
    params: *const NetabIsingParams,
    out: *mut NetabAte,
) -> NetabStatus {
    guard(|| {
        let g = reference(graph, "graph")?;
        let p: IsingParams = (*reference(params, "params")?).into();
        let out = out_slot(out, "out")?;
        let est = estimate_ate_exact(&p, &g.inner)?;
        *out = NetabAte { value: est.value, mc_standard_error: 0.0 };
        Ok(())
    })
}

/// ATE from two counterfactual Gibbs chains on one graph.
///
/// # Safety
/// `graph`, `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn netab_graph_ate_gibbs(
    graph: *const NetabGraph,
    params: *const NetabIsingParams,
    burnin_sweeps: usize,
    n_samples: usize,
    seed: u64,
    out: *mut NetabAte,
) -> NetabStatus {
    guard(|| {
        let g = reference(graph, "graph")?;
        let p: IsingParams = (*reference(params, "params")?).into();
        let out = out_slot(out, "out")?;
        let est = estimate_ate_gibbs(&IsingModel(p), &g.inner, &ate_config(burnin_sweeps, n_samples), seed)?;
        *out = NetabAte { value: est.value, mc_standard_error: est.mc_standard_error };
        Ok(())
    })
}

/// Releases a graph. NULL is ignored.
///
/// # Safety
/// `graph` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn netab_graph_free(graph: *mut NetabGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

/// Simulates `k_networks` Watts-Strogatz networks of `nodes_per_network`
/// nodes (ring degree `degree`, rewiring `p_rewire`), Bernoulli(`treatment_p`)
/// assignments and Ising responses from `params`.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn netab_dataset_generate_ising(
    params: *const NetabIsingParams,
    k_networks: usize,
    nodes_per_network: usize,
    degree: usize,
    p_rewire: f64,
    treatment_p: f64,
    seed: u64,
    out: *mut *mut NetabDataset,
) -> NetabStatus {
    guard(|| {
        let p: IsingParams = (*reference(params, "params")?).into();
        let out = out_slot(out, "out")?;
        let mut config = ScenarioConfig::scenario_one();
        config.model = ModelKind::Ising;
        config.true_params = ModelParams::Ising(p);
        config.k_networks = k_networks;
        config.nodes_per_network = nodes_per_network;
        config.graph = GraphConfig { k: degree, p_rewire };
        config.treatment_proportion = treatment_p;
        config.master_seed = seed;
        let inner = generate_dataset(&config)?;
        *out = Box::into_raw(Box::new(NetabDataset { inner }));
        Ok(())
    })
}

/// Parses a dataset from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn netab_dataset_from_json(json: *const c_char, out: *mut *mut NetabDataset) -> NetabStatus {
    guard(|| {
        let text = string(json, "json")?;
        let out = out_slot(out, "out")?;
        let inner = ExperimentDataset::from_json(text)?;
        *out = Box::into_raw(Box::new(NetabDataset { inner }));
        Ok(())
    })
}

/// Reads a dataset JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn netab_dataset_load(path: *const c_char, out: *mut *mut NetabDataset) -> NetabStatus {
    guard(|| {
        let path = string(path, "path")?;
        let out = out_slot(out, "out")?;
        let inner = ExperimentDataset::load(path)?;
        *out = Box::into_raw(Box::new(NetabDataset { inner }));
        Ok(())
    })
}

/// Writes a dataset as JSON.
///
/// # Safety
/// `dataset` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn netab_dataset_save(dataset: *const NetabDataset, path: *const c_char) -> NetabStatus {
    guard(|| {
        let d = reference(dataset, "dataset")?;
        let path = string(path, "path")?;
        d.inner.save(path)?;
        Ok(())
    })
}

/// Number of networks; 0 for NULL.
///
/// # Safety
/// `dataset` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn netab_dataset_num_networks(dataset: *const NetabDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.inner.len())
}

/// Total nodes over all networks; 0 for NULL.
///
/// # Safety
/// `dataset` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn netab_dataset_num_nodes(dataset: *const NetabDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.inner.total_nodes())
}

/// Maximum pseudo-likelihood fit of the Ising model. `converged` (may be
/// NULL) receives 1 when the solver met its tolerance.
///
/// # Safety
/// `dataset` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn netab_dataset_fit_ising(
    dataset: *const NetabDataset,
    out: *mut NetabIsingParams,
    converged: *mut c_int,
) -> NetabStatus {
    guard(|| {
        let d = reference(dataset, "dataset")?;
        let out = out_slot(out, "out")?;
        let fit = fit_ising(&d.inner, &IrlsOptions::default())?;
        *out = fit.params.into();
        if let Some(c) = converged.as_mut() {
            *c = c_int::from(fit.converged);
        }
        Ok(())
    })
}

/// Gibbs ATE averaged over the dataset's networks.
///
/// # Safety
/// `dataset`, `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn netab_dataset_ate_gibbs(
    dataset: *const NetabDataset,
    params: *const NetabIsingParams,
    burnin_sweeps: usize,
    n_samples: usize,
    seed: u64,
    out: *mut NetabAte,
) -> NetabStatus {
    guard(|| {
        let d = reference(dataset, "dataset")?;
        let p: IsingParams = (*reference(params, "params")?).into();
        let out = out_slot(out, "out")?;
        let est = estimate_ate_dataset(&IsingModel(p), &d.inner, &ate_config(burnin_sweeps, n_samples), seed)?;
        *out = NetabAte { value: est.pooled.value, mc_standard_error: est.pooled.mc_standard_error };
        Ok(())
    })
}

/// Releases a dataset. NULL is ignored.
///
/// # Safety
/// `dataset` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn netab_dataset_free(dataset: *mut NetabDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

// ---------------------------------------------------------------------------
// Bootstrap
// ---------------------------------------------------------------------------

/// Shuffle-bootstrap test with `n_boot` replicates. `statistic` is one of
/// the `NetabStatistic` values.
///
/// # Safety
/// `dataset` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn netab_bootstrap_test(
    dataset: *const NetabDataset,
    statistic: i32,
    n_boot: usize,
    seed: u64,
    out: *mut *mut NetabBootstrapResult,
) -> NetabStatus {
    guard(|| {
        let d = reference(dataset, "dataset")?;
        let out = out_slot(out, "out")?;
        let opts = BootstrapOptions { n_boot, statistic: statistic_kind(statistic)?, ..BootstrapOptions::default() };
        let inner = bootstrap_test(&d.inner, &opts, seed)?;
        *out = Box::into_raw(Box::new(NetabBootstrapResult { inner }));
        Ok(())
    })
}

/// One-sided (upper tail) add-one p-value; NaN for NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn netab_bootstrap_p_value(result: *const NetabBootstrapResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.p_value)
}

/// Two-sided p-value; NaN for NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn netab_bootstrap_p_value_two_sided(result: *const NetabBootstrapResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.p_value_two_sided)
}

/// Statistic of the unshuffled data; NaN for NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn netab_bootstrap_observed(result: *const NetabBootstrapResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.observed_stat)
}

/// Parameters fitted to the unshuffled data.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn netab_bootstrap_observed_params(
    result: *const NetabBootstrapResult,
    out: *mut NetabIsingParams,
) -> NetabStatus {
    guard(|| {
        let r = reference(result, "result")?;
        *out_slot(out, "out")? = r.inner.observed_params.into();
        Ok(())
    })
}

/// Replicates whose fit failed to converge; 0 for NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn netab_bootstrap_num_failed(result: *const NetabBootstrapResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.n_failed)
}

/// Number of null statistics (converged replicates); 0 for NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn netab_bootstrap_null_len(result: *const NetabBootstrapResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.null_stats.len())
}

/// Copies up to `capacity` null statistics into `buffer`; returns the number
/// copied (0 for NULL arguments).
///
/// # Safety
/// `buffer` must have room for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn netab_bootstrap_null_stats(
    result: *const NetabBootstrapResult,
    buffer: *mut f64,
    capacity: usize,
) -> usize {
    let (Some(r), false) = (result.as_ref(), buffer.is_null()) else {
        return 0;
    };
    let count = r.inner.null_stats.len().min(capacity);
    ptr::copy_nonoverlapping(r.inner.null_stats.as_ptr(), buffer, count);
    count
}

/// Releases a bootstrap result. NULL is ignored.
///
/// # Safety
/// `result` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn netab_bootstrap_free(result: *mut NetabBootstrapResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
