#ifndef NETAB_H
#define NETAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Statistic compared against its shuffle-bootstrap null distribution.
 */
typedef enum NetabStatistic {
  /**
   * Average treatment effect of the fitted model (runs Gibbs chains).
   */
  NETAB_STATISTIC_ATE = 0,
  /**
   * `alpha1 - alpha0`.
   */
  NETAB_STATISTIC_ALPHA_DIFF = 1,
  /**
   * `beta1 - beta0`.
   */
  NETAB_STATISTIC_BETA_DIFF = 2,
} NetabStatistic;

/**
 * Result code of every fallible call.
 */
typedef enum NetabStatus {
  NETAB_STATUS_OK = 0,
  NETAB_STATUS_NULL_POINTER = 1,
  NETAB_STATUS_INVALID_PARAMETER = 2,
  NETAB_STATUS_VALIDATION = 3,
  NETAB_STATUS_PARSE = 4,
  NETAB_STATUS_NODE_INDEX = 5,
  NETAB_STATUS_CAPACITY = 6,
  NETAB_STATUS_RANK_DEFICIENT = 7,
  NETAB_STATUS_CONVERGENCE = 8,
  NETAB_STATUS_EMPTY_GROUP = 9,
  NETAB_STATUS_BOOTSTRAP_ABORTED = 10,
  NETAB_STATUS_IO = 11,
  NETAB_STATUS_PANIC = 12,
} NetabStatus;

/**
 * Opaque outcome of a shuffle-bootstrap test.
 */
typedef struct NetabBootstrapResult NetabBootstrapResult;

/**
 * Opaque collection of (graph, assignment, response) triplets.
 */
typedef struct NetabDataset NetabDataset;

/**
 * Opaque undirected simple graph.
 */
typedef struct NetabGraph NetabGraph;

/**
 * Ising response-model parameters.
 */
typedef struct NetabIsingParams {
  double alpha0;
  double alpha1;
  double beta0;
  double beta1;
  double gamma;
} NetabIsingParams;

/**
 * Treatment-effect estimate with its Monte Carlo standard error (0 when exact).
 */
typedef struct NetabAte {
  double value;
  double mc_standard_error;
} NetabAte;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or "" after a
 * successful call. The pointer stays valid until the next call into this
 * library on the same thread.
 */
const char *netab_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *netab_version(void);

/**
 * Watts-Strogatz small-world graph: ring lattice of even degree `k` with
 * each edge rewired with probability `p_rewire`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum NetabStatus netab_graph_watts_strogatz(size_t n,
                                            size_t k,
                                            double p_rewire,
                                            uint64_t seed,
                                            struct NetabGraph **out);

/**
 * Graph from `num_edges` endpoint pairs `(us[i], vs[i])`.
 *
 * # Safety
 * `us` and `vs` must each point to `num_edges` readable values (they may be
 * NULL when `num_edges` is 0); `out` must be writable.
 */
enum NetabStatus netab_graph_from_edges(size_t num_nodes,
                                        const size_t *us,
                                        const size_t *vs,
                                        size_t num_edges,
                                        struct NetabGraph **out);

/**
 * Number of nodes; 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t netab_graph_num_nodes(const struct NetabGraph *graph);

/**
 * Number of edges; 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t netab_graph_num_edges(const struct NetabGraph *graph);

/**
 * Copies up to `capacity` edges (sorted, `u < v`) into `us`/`vs` and
 * stores the number copied in `written`.
 *
 * # Safety
 * `us` and `vs` must have room for `capacity` values; `written` must be writable.
 */
enum NetabStatus netab_graph_edges(const struct NetabGraph *graph,
                                   size_t *us,
                                   size_t *vs,
                                   size_t capacity,
                                   size_t *written);

/**
 * Exact ATE by enumerating all states (at most 20 nodes).
 *
 * # Safety
 * `graph`, `params` and `out` must be valid pointers.
 */
enum NetabStatus netab_graph_ate_exact(const struct NetabGraph *graph,
                                       const struct NetabIsingParams *params,
                                       struct NetabAte *out);

/**
 * ATE from two counterfactual Gibbs chains on one graph.
 *
 * # Safety
 * `graph`, `params` and `out` must be valid pointers.
 */
enum NetabStatus netab_graph_ate_gibbs(const struct NetabGraph *graph,
                                       const struct NetabIsingParams *params,
                                       size_t burnin_sweeps,
                                       size_t n_samples,
                                       uint64_t seed,
                                       struct NetabAte *out);

/**
 * Releases a graph. NULL is ignored.
 *
 * # Safety
 * `graph` must be NULL or a handle not yet freed.
 */
void netab_graph_free(struct NetabGraph *graph);

/**
 * Simulates `k_networks` Watts-Strogatz networks of `nodes_per_network`
 * nodes (ring degree `degree`, rewiring `p_rewire`), Bernoulli(`treatment_p`)
 * assignments and Ising responses from `params`.
 *
 * # Safety
 * `params` and `out` must be valid pointers.
 */
enum NetabStatus netab_dataset_generate_ising(const struct NetabIsingParams *params,
                                              size_t k_networks,
                                              size_t nodes_per_network,
                                              size_t degree,
                                              double p_rewire,
                                              double treatment_p,
                                              uint64_t seed,
                                              struct NetabDataset **out);

/**
 * Parses a dataset from its JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum NetabStatus netab_dataset_from_json(const char *json, struct NetabDataset **out);

/**
 * Reads a dataset JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum NetabStatus netab_dataset_load(const char *path, struct NetabDataset **out);

/**
 * Writes a dataset as JSON.
 *
 * # Safety
 * `dataset` must be a live handle and `path` a NUL-terminated string.
 */
enum NetabStatus netab_dataset_save(const struct NetabDataset *dataset, const char *path);

/**
 * Number of networks; 0 for NULL.
 *
 * # Safety
 * `dataset` must be NULL or a live handle.
 */
size_t netab_dataset_num_networks(const struct NetabDataset *dataset);

/**
 * Total nodes over all networks; 0 for NULL.
 *
 * # Safety
 * `dataset` must be NULL or a live handle.
 */
size_t netab_dataset_num_nodes(const struct NetabDataset *dataset);

/**
 * Maximum pseudo-likelihood fit of the Ising model. `converged` (may be
 * NULL) receives 1 when the solver met its tolerance.
 *
 * # Safety
 * `dataset` must be a live handle; `out` must be writable.
 */
enum NetabStatus netab_dataset_fit_ising(const struct NetabDataset *dataset,
                                         struct NetabIsingParams *out,
                                         int *converged);

/**
 * Gibbs ATE averaged over the dataset's networks.
 *
 * # Safety
 * `dataset`, `params` and `out` must be valid pointers.
 */
enum NetabStatus netab_dataset_ate_gibbs(const struct NetabDataset *dataset,
                                         const struct NetabIsingParams *params,
                                         size_t burnin_sweeps,
                                         size_t n_samples,
                                         uint64_t seed,
                                         struct NetabAte *out);

/**
 * Releases a dataset. NULL is ignored.
 *
 * # Safety
 * `dataset` must be NULL or a handle not yet freed.
 */
void netab_dataset_free(struct NetabDataset *dataset);

/**
 * Shuffle-bootstrap test with `n_boot` replicates. `statistic` is one of
 * the `NetabStatistic` values.
 *
 * # Safety
 * `dataset` must be a live handle; `out` must be writable.
 */
enum NetabStatus netab_bootstrap_test(const struct NetabDataset *dataset,
                                      int32_t statistic,
                                      size_t n_boot,
                                      uint64_t seed,
                                      struct NetabBootstrapResult **out);

/**
 * One-sided (upper tail) add-one p-value; NaN for NULL.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
double netab_bootstrap_p_value(const struct NetabBootstrapResult *result);

/**
 * Two-sided p-value; NaN for NULL.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
double netab_bootstrap_p_value_two_sided(const struct NetabBootstrapResult *result);

/**
 * Statistic of the unshuffled data; NaN for NULL.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
double netab_bootstrap_observed(const struct NetabBootstrapResult *result);

/**
 * Parameters fitted to the unshuffled data.
 *
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum NetabStatus netab_bootstrap_observed_params(const struct NetabBootstrapResult *result,
                                                 struct NetabIsingParams *out);

/**
 * Replicates whose fit failed to converge; 0 for NULL.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
size_t netab_bootstrap_num_failed(const struct NetabBootstrapResult *result);

/**
 * Number of null statistics (converged replicates); 0 for NULL.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
size_t netab_bootstrap_null_len(const struct NetabBootstrapResult *result);

/**
 * Copies up to `capacity` null statistics into `buffer`; returns the number
 * copied (0 for NULL arguments).
 *
 * # Safety
 * `buffer` must have room for `capacity` doubles.
 */
size_t netab_bootstrap_null_stats(const struct NetabBootstrapResult *result,
                                  double *buffer,
                                  size_t capacity);

/**
 * Releases a bootstrap result. NULL is ignored.
 *
 * # Safety
 * `result` must be NULL or a handle not yet freed.
 */
void netab_bootstrap_free(struct NetabBootstrapResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETAB_H */
