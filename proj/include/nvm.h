/*
 * nvm — noisy voter model toolkit.
 *
 * C interface to the simulation/exact-computation core. All functions
 * return a status code; on failure nvm_last_error() describes the problem
 * (the message is thread-local). Objects are opaque handles released with
 * their matching _free function; strings returned through char** are
 * malloc'd JSON or text and are released with nvm_string_free.
 *
 * Everything is deterministic in the supplied seeds: reruns give
 * bit-identical results regardless of thread count (see THREADS below).
 */
#ifndef NVM_H
#define NVM_H

#include <stdint.h>

#define NVM_VERSION "0.1.0"

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nvm_status {
    NVM_OK = 0,
    NVM_ERR_PARAM = 1,    /* invalid argument / precondition violation */
    NVM_ERR_CAPACITY = 2, /* instance exceeds a documented size cap */
    NVM_ERR_NUMERIC = 3,  /* solver or sampler failed to reach its target */
    NVM_ERR_IO = 4        /* unreadable/unwritable file or malformed text */
} nvm_status;

typedef struct nvm_graph nvm_graph;
typedef struct nvm_trace nvm_trace;

const char* nvm_last_error(void);
void nvm_string_free(char* s);
void nvm_set_threads(int n); /* overrides the THREADS env var; 0 = auto */

/* ------------------------------------------------------------------ */
/* Graphs                                                              */
/* ------------------------------------------------------------------ */

/* Family descriptors: "complete:5", "cycle:6", "bipartite:2,3" (root in the
 * first part), "star:5" (center root), "star:5:leaf", "tree:2,3" (arity,
 * height), "path:4", "random:64:7" (n, seed), "lattice:2", or
 * "file:<path>" to load a stored edge list. */
nvm_status nvm_graph_build(const char* family, nvm_graph** out);
nvm_status nvm_graph_random(int32_t n, uint64_t seed, nvm_graph** out);
nvm_status nvm_graph_from_edge_list(const char* text, nvm_graph** out);
nvm_status nvm_graph_to_edge_list(const nvm_graph* g, char** text_out);
void nvm_graph_free(nvm_graph* g);

int32_t nvm_graph_vertex_count(const nvm_graph* g);
int64_t nvm_graph_edge_count(const nvm_graph* g);
int32_t nvm_graph_root(const nvm_graph* g);
int32_t nvm_graph_degree(const nvm_graph* g, int32_t v);
const char* nvm_graph_family(const nvm_graph* g);
int32_t nvm_graph_is_lattice(const nvm_graph* g);
int32_t nvm_graph_lattice_dim(const nvm_graph* g);

/* Neighbor list of v; *count receives the degree. Fails if cap < degree. */
nvm_status nvm_graph_neighbors(const nvm_graph* g, int32_t v, int32_t* buf, int32_t cap,
                               int32_t* count);
/* The 2*dim lattice neighbors of point[dim], written consecutively into
 * buf[2*dim*dim] in axis order (+e1, -e1, +e2, ...). */
nvm_status nvm_lattice_neighbors(int32_t dim, const int64_t* point, int64_t* buf);

/* ------------------------------------------------------------------ */
/* Forward simulation                                                  */
/* ------------------------------------------------------------------ */

nvm_status nvm_simulate(const nvm_graph* g, double epsilon, int64_t t_max, uint64_t seed,
                        nvm_trace** out);
void nvm_trace_free(nvm_trace* t);
int64_t nvm_trace_length(const nvm_trace* t);
int64_t nvm_trace_burn_in(const nvm_trace* t);
int32_t nvm_trace_bit(const nvm_trace* t, int64_t i);
double nvm_trace_epsilon(const nvm_trace* t);

/* Raw packed bit file plus JSON sidecar. */
nvm_status nvm_trace_write(const nvm_trace* t, const char* bits_path, const char* sidecar_path);
nvm_status nvm_trace_read(const char* bits_path, const char* sidecar_path, nvm_trace** out);

/* Sliding-window frequencies as a JSON object {"0101": freq, ...}. */
nvm_status nvm_window_distribution_json(const nvm_trace* t, int32_t w, char** json_out);
/* Two-sample chi-squared p-value over spaced window counts. */
nvm_status nvm_window_chi2(const nvm_trace* a, const nvm_trace* b, int32_t w, double* p_value);

/* ------------------------------------------------------------------ */
/* Trace statistics                                                    */
/* ------------------------------------------------------------------ */

/* mode: 0 plain(d), 1 thinned(d, kappa), 2 quadruple(d, d2, d3). */
nvm_status nvm_repetition_stat(const nvm_trace* t, int32_t mode, int32_t d, int32_t d2_or_kappa,
                               int32_t d3, double* value, double* batch_stderr, int64_t* terms);
nvm_status nvm_pd_hat(const nvm_trace* t, int32_t d, double* value, double* stderr_out,
                      double* bias_bound);
nvm_status nvm_choose_kappa(double epsilon, int32_t d, double p_hat, int32_t* kappa);
nvm_status nvm_variance_profile_json(const nvm_trace* t, int32_t d, char** json_out);
nvm_status nvm_clt_report_json(const nvm_trace* t, int32_t d, int32_t kappa, int64_t batches,
                               char** json_out);
nvm_status nvm_triple_identity(const nvm_trace* t, int32_t d1, int32_t d2, double* residual,
                               double* combined_stderr);

/* ------------------------------------------------------------------ */
/* Backward-path (genealogy) estimators                                */
/* ------------------------------------------------------------------ */

/* All requested pattern events for up to 4 birth offsets, as JSON:
 * {"events": {"meet_0_2": {"value":..,"stderr":..}, ...},
 *  "partitions": [...], "horizon":.., "truncation_bound":..}. */
nvm_status nvm_meeting_probs_json(const nvm_graph* g, double epsilon, const int32_t* offsets,
                                  int32_t n_offsets, int64_t replicas, double tolerance,
                                  uint64_t seed, char** json_out);
/* Convenience: the pairwise event for offsets {0, d}. */
nvm_status nvm_estimate_pd(const nvm_graph* g, double epsilon, int32_t d, int64_t replicas,
                           double tolerance, uint64_t seed, double* value, double* stderr_out,
                           double* truncation_bound);
nvm_status nvm_estimate_a2(const nvm_graph* g, double epsilon, int64_t replicas, uint64_t seed,
                           double* value, double* stderr_out);
/* Exact finite-t pattern probabilities (|V| <= 4, t + max offset <= 8). */
nvm_status nvm_exact_enumeration_json(const nvm_graph* g, double epsilon, const int32_t* offsets,
                                      int32_t n_offsets, int32_t t, char** json_out);
/* Exact limiting pattern probabilities via the absorbing chain. */
nvm_status nvm_joint_exact_json(const nvm_graph* g, double epsilon, const int32_t* offsets,
                                int32_t n_offsets, char** json_out);
/* pairwise[6] = {p_d1, p_d2, p_d3, p_{d2-d1}, p_{d3-d1}, p_{d3-d2}},
 * tildes[3] in the order (d1,d2,d3), (d2,d1,d3), (d3,d1,d2). */
nvm_status nvm_q_from_components(const double* pairwise, double p_triple, const double* tildes,
                                 int32_t d1, int32_t d2, int32_t d3, double* q);

/* ------------------------------------------------------------------ */
/* Exact oracles                                                       */
/* ------------------------------------------------------------------ */

nvm_status nvm_pd_exact(const nvm_graph* g, double epsilon, int32_t d, double* out);
nvm_status nvm_meet_probability(const nvm_graph* g, double epsilon, int32_t a, int32_t b,
                                double* out);
nvm_status nvm_closed_forms_complete(int32_t n, double epsilon, double* p1, double* p2);
nvm_status nvm_closed_form_bipartite(int32_t n, int32_t m, double epsilon, int32_t d,
                                     double* out);
nvm_status nvm_cubic_coeffs(int64_t n1, int64_t m1, int64_t n2, int64_t m2, double coeffs[4]);
nvm_status nvm_a2_formula(const nvm_graph* g, double* out);
/* f_defined is 0 for height 1, where the reported f is the convention 1. */
nvm_status nvm_tree_p2(int32_t k, int32_t h, double epsilon, double* p2, double* f,
                       int32_t* f_defined);
nvm_status nvm_lattice_p2(int32_t d, double epsilon, int64_t replicas, uint64_t seed,
                          double* value, double* stderr_out);

/* ------------------------------------------------------------------ */
/* Experiments                                                         */
/* ------------------------------------------------------------------ */

nvm_status nvm_compare_json(const char* spec_a, const char* spec_b, double epsilon, int32_t d,
                            int64_t t_budget, double significance, uint64_t seed,
                            char** json_out);
nvm_status nvm_sweep_json(const char* spec_a, const char* spec_b, int32_t d, const double* grid,
                          int32_t n_grid, char** json_out);
nvm_status nvm_bipartite_quadruple(int64_t alpha_num, int64_t alpha_den, int64_t n1,
                                   int64_t out[4]); /* n1, m1, n2, m2 */
/* found=0 with status NVM_OK means no interior crossing (or a degenerate
 * identical pair). */
nvm_status nvm_find_crossing(int64_t n1, int64_t m1, int64_t n2, int64_t m2, double tol,
                             int32_t* found, double* eps_star, double* cubic_residual);
nvm_status nvm_random_a2_experiment_json(int32_t n, uint64_t seed1, uint64_t seed2,
                                         char** json_out);
/* mode: "exact_small" or "monte_carlo". */
nvm_status nvm_quadruple_experiment_json(int64_t n1, int64_t m1, int64_t n2, int64_t m2,
                                         double eps_star, const char* mode, int64_t t_budget,
                                         uint64_t seed, char** json_out);

/* ------------------------------------------------------------------ */
/* Verification                                                        */
/* ------------------------------------------------------------------ */

/* Runs the acceptance suite (criteria 1..14, or a single one when
 * criterion != 0), printing one PASS/FAIL line per criterion. Writes a CSV
 * of results when csv_path is non-NULL. *failures receives the number of
 * failed criteria. */
nvm_status nvm_verify(int32_t criterion, const char* csv_path, int32_t* failures);

#ifdef __cplusplus
}
#endif

#endif /* NVM_H */
