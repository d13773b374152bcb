/*
 * C interface to the hitmix library.
 *
 * Every object is an opaque handle created by a *_load / *_compute / *_run
 * function and released with the matching *_free. Functions that can fail
 * return an hm_status; on failure hm_last_error() describes the problem for
 * the calling thread until its next failing call. Output handles are only
 * written on success.
 */
#ifndef HITMIX_HITMIX_H
#define HITMIX_HITMIX_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(HITMIX_BUILDING_LIBRARY)
#    define HM_API __declspec(dllexport)
#  else
#    define HM_API __declspec(dllimport)
#  endif
#elif defined(__GNUC__)
#  define HM_API __attribute__((visibility("default")))
#else
#  define HM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hm_status {
  HM_OK = 0,
  HM_ERR_INVALID_ARGUMENT = 1,
  HM_ERR_PARSE = 2,
  HM_ERR_IO = 3,
  HM_ERR_NOT_CONVERGED = 4,
  HM_ERR_UNREACHABLE = 5,
  HM_ERR_NUMERICAL = 6,
  HM_ERR_INTERNAL = 99
} hm_status;

HM_API const char* hm_last_error(void);
HM_API const char* hm_status_name(hm_status status);
HM_API const char* hm_version(void);

/* ---- graphs and seed sets ---------------------------------------------- */

typedef struct hm_graph hm_graph;
typedef struct hm_seeds hm_seeds;

/* SNAP-style edge list: '#' comments, "u v" per line, dense 0-based ids. */
HM_API hm_status hm_graph_load_file(const char* path, hm_graph** out);
HM_API hm_status hm_graph_load_text(const char* text, size_t length, hm_graph** out);
HM_API hm_status hm_graph_from_edges(size_t n_vertices, size_t n_edges, const uint32_t* us,
                                     const uint32_t* vs, hm_graph** out);
HM_API void hm_graph_free(hm_graph* graph);
HM_API size_t hm_graph_num_vertices(const hm_graph* graph);
HM_API uint64_t hm_graph_num_edges(const hm_graph* graph);
HM_API hm_status hm_graph_degree(const hm_graph* graph, uint32_t vertex, uint64_t* degree);

HM_API hm_status hm_seeds_load_file(const hm_graph* graph, const char* path, hm_seeds** out);
HM_API hm_status hm_seeds_from_array(const hm_graph* graph, const uint32_t* ids, size_t n,
                                     hm_seeds** out);
HM_API void hm_seeds_free(hm_seeds* seeds);
HM_API size_t hm_seeds_count(const hm_seeds* seeds);

/* ---- hitting-time moments ---------------------------------------------- */

typedef struct hm_cg_options {
  double rel_tol;       /* default 1e-10 */
  uint64_t max_iters;   /* 0 selects max(1000, 10 * unknowns) */
  int random_start;     /* nonzero: seeded random start vector */
  uint64_t start_seed;
} hm_cg_options;

HM_API void hm_cg_options_init(hm_cg_options* options);

typedef struct hm_moments hm_moments;

HM_API hm_status hm_moments_compute(const hm_graph* graph, const hm_seeds* seeds,
                                    const hm_cg_options* options, hm_moments** out);
HM_API void hm_moments_free(hm_moments* moments);
/* One row per non-seed vertex, ascending vertex id. */
HM_API size_t hm_moments_count(const hm_moments* moments);
HM_API size_t hm_moments_unreachable(const hm_moments* moments);
HM_API hm_status hm_moments_row(const hm_moments* moments, size_t row, uint32_t* vertex,
                                double* mean, double* variance, int* reachable);
/* order is 1 (mean system) or 2 (second-moment system). */
HM_API hm_status hm_moments_cg_stats(const hm_moments* moments, unsigned order,
                                     uint64_t* iterations, double* rel_residual, int* converged);
/* Writes the TSV atomically; a NULL path or "-" writes to stdout. */
HM_API hm_status hm_moments_write_tsv(const hm_moments* moments, const char* path);

/* ---- seed-set expansion ------------------------------------------------ */

typedef struct hm_expand_options {
  uint64_t samples_per_vertex; /* default 25 */
  const uint32_t* clusters;    /* NULL selects {2, 3, 4, 5} */
  size_t n_clusters;
  double tau;                  /* default 0.5 */
  uint64_t em_max_iters;       /* default 500 */
  double em_rel_tol;           /* default 1e-8 */
  double sigma2_floor;         /* default 1e-8 */
  int bic_counts_vertices;     /* nonzero: BIC sample size is the vertex count */
  uint64_t seed;
  hm_cg_options cg;
} hm_expand_options;

HM_API void hm_expand_options_init(hm_expand_options* options);

typedef struct hm_membership hm_membership;

HM_API hm_status hm_expand(const hm_graph* graph, const hm_seeds* seeds,
                           const hm_expand_options* options, hm_membership** out);
HM_API void hm_membership_free(hm_membership* membership);
HM_API size_t hm_membership_count(const hm_membership* membership);
HM_API hm_status hm_membership_row(const hm_membership* membership, size_t row, uint32_t* vertex,
                                   double* posterior, int* in_goal, int* reachable);
HM_API size_t hm_membership_selected_clusters(const hm_membership* membership);
HM_API size_t hm_membership_num_fits(const hm_membership* membership);
/* A candidate whose EM failed reports bic = +inf and log_likelihood = NaN. */
HM_API hm_status hm_membership_fit(const hm_membership* membership, size_t index,
                                   uint64_t* clusters, double* bic, uint64_t* em_iterations,
                                   int* converged, double* log_likelihood);
HM_API hm_status hm_membership_cg_stats(const hm_membership* membership, unsigned order,
                                        uint64_t* iterations, double* rel_residual,
                                        int* converged);
/* Wall-clock seconds for the moment, sampling and mixture stages. */
HM_API hm_status hm_membership_stage_seconds(const hm_membership* membership, double* moments,
                                             double* sampling, double* mixture);
HM_API hm_status hm_membership_write_tsv(const hm_membership* membership, const char* path);
HM_API hm_status hm_membership_write_json(const hm_membership* membership, const char* path);

/* ---- stochastic block model benchmark ---------------------------------- */

typedef struct hm_sbm_spec hm_sbm_spec;
typedef struct hm_sbm_result hm_sbm_result;

typedef struct hm_sbm_condition {
  const char* label; /* owned by the result */
  double ari_mean, ari_p5, ari_p95;
  double f1_mean, f1_p5, f1_p95;
  uint64_t completed;
  uint64_t failures;
  uint64_t disconnected_runs;
} hm_sbm_condition;

HM_API hm_status hm_sbm_spec_load_file(const char* path, hm_sbm_spec** out);
HM_API void hm_sbm_spec_free(hm_sbm_spec* spec);
HM_API hm_status hm_sbm_spec_set_seed(hm_sbm_spec* spec, uint64_t seed);
/* Returns nonzero and fills seed when the spec carries one. */
HM_API int hm_sbm_spec_get_seed(const hm_sbm_spec* spec, uint64_t* seed);
HM_API hm_status hm_sbm_spec_set_workers(hm_sbm_spec* spec, uint64_t workers);

HM_API hm_status hm_sbm_run(const hm_sbm_spec* spec, hm_sbm_result** out);
HM_API void hm_sbm_result_free(hm_sbm_result* result);
HM_API uint64_t hm_sbm_result_seed(const hm_sbm_result* result);
HM_API size_t hm_sbm_result_num_conditions(const hm_sbm_result* result);
HM_API hm_status hm_sbm_result_condition(const hm_sbm_result* result, size_t index,
                                         hm_sbm_condition* out);
HM_API hm_status hm_sbm_result_write_runs_csv(const hm_sbm_result* result, const char* path);
HM_API hm_status hm_sbm_result_write_summary_csv(const hm_sbm_result* result, const char* path);

/* ---- evaluation and utilities ------------------------------------------ */

typedef struct hm_eval_scores {
  double ari;
  double precision;
  double recall;
  double f1;
  uint64_t n_items;
} hm_eval_scores;

HM_API hm_status hm_adjusted_rand_index(const int64_t* a, const int64_t* b, size_t n, double* ari);
HM_API hm_status hm_eval_label_files(const char* predicted_path, const char* truth_path,
                                     hm_eval_scores* scores);
/* JSON rendering of the scores, written to path (NULL or "-" for stdout). */
HM_API hm_status hm_eval_write_json(const hm_eval_scores* scores, const char* path);

/* Maps string vertex names to dense ids. seeds_in/seeds_out may be NULL. */
HM_API hm_status hm_relabel_files(const char* edges_in, const char* edges_out,
                                  const char* mapping_out, const char* seeds_in,
                                  const char* seeds_out);

#ifdef __cplusplus
}
#endif

#endif /* HITMIX_HITMIX_H */
