#ifndef TELECLUST_H
#define TELECLUST_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(TELECLUST_BUILDING_LIBRARY)
#define TC_API __attribute__((visibility("default")))
#else
#define TC_API
#endif

/* Every fallible call returns a status; on failure tc_last_error() holds a
   message for the calling thread until its next failing call. */
typedef enum {
  TC_OK = 0,
  TC_ERR_INVALID = 2,
  TC_ERR_NUMERICAL = 3,
  TC_ERR_IO = 4,
  TC_ERR_INTERNAL = 5
} tc_status;

TC_API const char* tc_version(void);
TC_API const char* tc_last_error(void);
/* Releases strings returned through char** out-parameters. */
TC_API void tc_string_free(char* s);
/* 16-hex-digit FNV-1a digest of a file's bytes. */
TC_API tc_status tc_file_digest(const char* path, char** out);

/* ---- partitions --------------------------------------------------------
   Label arrays hold n arbitrary integers; they are canonicalized first. */

TC_API tc_status tc_canonicalize(const int* labels, size_t n, int* out, int* num_clusters);
TC_API tc_status tc_rand_index(const int* a, const int* b, size_t n, double* out);
TC_API tc_status tc_binder_count(const int* a, const int* b, size_t n, uint64_t* out);
TC_API tc_status tc_variation_of_information(const int* a, const int* b, size_t n, double* out);
TC_API tc_status tc_tari(const int* a, const int* b, size_t n, double er_indep, double* out);
TC_API tc_status tc_misallocation(const int* estimate, const int* truth, size_t n, int* out);
/* Number of set partitions of n <= 10 subjects, by enumeration. */
TC_API tc_status tc_count_partitions(int n, uint64_t* out);

/* ---- partition laws ---------------------------------------------------- */

typedef enum {
  TC_PRIOR_POINT_MASS = 0,
  TC_PRIOR_SHIFTED_POISSON = 1,
  TC_PRIOR_GEOMETRIC = 2,
  TC_PRIOR_TABLE = 3
} tc_prior_kind;

/* value is the point mass, the Poisson rate or the geometric success
   probability; table priors use weights[0..num_weights) for M = 1, 2, ... */
typedef struct {
  tc_prior_kind kind;
  double value;
  const double* weights;
  size_t num_weights;
} tc_count_prior;

typedef struct {
  double gamma0, gamma, alpha0, alpha;
} tc_hdp_params;

typedef struct {
  double gamma, alpha, omega;
  tc_count_prior m_prior, s_prior;
} tc_mfm_params;

typedef struct {
  double tau, er, eb, er_indep;
} tc_dependence;

typedef struct tc_engine tc_engine;

/* cap bounds the sample size accepted by the evaluators. */
TC_API tc_status tc_engine_create(int cap, tc_engine** out);
TC_API void tc_engine_destroy(tc_engine* engine);

TC_API tc_status tc_hdp_log_eppf(const tc_engine* e, const int* p, size_t n, const tc_hdp_params* params, double* out);
TC_API tc_status tc_hdp_log_cond_eppf(const tc_engine* e, const int* p2, const int* p1, size_t n,
                                      const tc_hdp_params* params, double* out);
TC_API tc_status tc_thdp_log_teppf(const tc_engine* e, const int* p1, const int* p2, size_t n,
                                   const tc_hdp_params* params, double* out);
TC_API tc_status tc_mfm_log_v(const tc_engine* e, int n, int k, double gamma, const tc_count_prior* prior, double* out);
TC_API tc_status tc_mfm_log_eppf(const tc_engine* e, const int* p, size_t n, double gamma, const tc_count_prior* prior,
                                 double* out);
TC_API tc_status tc_ua_log_cond_eppf(const tc_engine* e, const int* p2, const int* p1, size_t n,
                                     const tc_mfm_params* params, double* out);
TC_API tc_status tc_ua_log_teppf(const tc_engine* e, const int* p1, const int* p2, size_t n,
                                 const tc_mfm_params* params, double* out);
/* CSV "n,K,log_V" for 1 <= K <= n <= max_n. */
TC_API tc_status tc_mfm_dump_log_v(const tc_engine* e, int max_n, double gamma, const tc_count_prior* prior,
                                   const char* path);

/* Closed forms. */
TC_API tc_status tc_thdp_dependence(const tc_hdp_params* params, tc_dependence* out);
TC_API tc_status tc_ua_dependence(const tc_mfm_params* params, tc_dependence* out);
/* Exhaustive evaluation of the joint law at sample size 2 <= n <= 6. */
TC_API tc_status tc_thdp_dependence_enumerated(const tc_engine* e, const tc_hdp_params* params, int n,
                                               tc_dependence* out);
TC_API tc_status tc_ua_dependence_enumerated(const tc_engine* e, const tc_mfm_params* params, int n,
                                             tc_dependence* out);

/* ---- datasets ---------------------------------------------------------- */

typedef struct tc_dataset tc_dataset;

/* scenario: "s1", "s2" or "toy"; layers <= 0 keeps the scenario default. */
TC_API tc_status tc_dataset_simulate(const char* scenario, uint64_t seed, int layers, tc_dataset** out);
TC_API tc_status tc_dataset_read(const char* dir, tc_dataset** out);
TC_API tc_status tc_dataset_write(const tc_dataset* ds, const char* dir);
TC_API void tc_dataset_destroy(tc_dataset* ds);
TC_API size_t tc_dataset_num_subjects(const tc_dataset* ds);
TC_API int tc_dataset_num_layers(const tc_dataset* ds);
TC_API int tc_dataset_has_truth(const tc_dataset* ds);
/* Canonical true labels of one layer into out[0..n). */
TC_API tc_status tc_dataset_truth(const tc_dataset* ds, int layer, int* out);

/* ---- model configuration ----------------------------------------------- */

typedef struct tc_model tc_model;

TC_API tc_status tc_model_parse(const char* json_text, tc_model** out);
TC_API tc_status tc_model_load(const char* path, tc_model** out);
TC_API void tc_model_destroy(tc_model* model);
TC_API tc_status tc_model_to_json(const tc_model* model, char** out);
TC_API tc_status tc_model_set_seed(tc_model* model, uint64_t seed);
/* Negative arguments leave the current value. */
TC_API tc_status tc_model_set_mcmc(tc_model* model, long iterations, long burn_in, long thin);

/* ---- inference --------------------------------------------------------- */

typedef struct tc_traces tc_traces;

/* Runs num_chains independent chains on threads workers (<= 0: default,
   overridable with TELECLUST_THREADS). */
TC_API tc_status tc_fit(const tc_model* model, const tc_dataset* ds, int num_chains, int threads, tc_traces** out);
/* Reads chain_<k>.csv / chain_<k>.json from a directory. */
TC_API tc_status tc_traces_read(const char* dir, tc_traces** out);
TC_API tc_status tc_traces_write(const tc_traces* traces, const char* dir);
TC_API void tc_traces_destroy(tc_traces* traces);
TC_API int tc_traces_num_chains(const tc_traces* traces);
TC_API int tc_traces_num_layers(const tc_traces* traces);
TC_API size_t tc_traces_num_subjects(const tc_traces* traces);
TC_API size_t tc_traces_num_draws(const tc_traces* traces, int chain);
TC_API tc_status tc_traces_draw(const tc_traces* traces, int chain, size_t draw, int layer, int* out);

typedef struct {
  /* Optional ground truth for the Rand and misallocation table. */
  const tc_dataset* truth;
  /* Candidate cap for the min-VI search; 0 scores every visited partition. */
  size_t max_candidates;
  int write_similarity;
} tc_summary_options;

/* Writes the summary files to out_dir; summary_json (may be NULL) receives
   the summary document. */
TC_API tc_status tc_summarize(const tc_traces* traces, const tc_summary_options* options, const char* out_dir,
                              char** summary_json);

/* Min-VI point estimate of one layer over all chains. */
TC_API tc_status tc_min_vi(const tc_traces* traces, int layer, size_t max_candidates, int* out, double* expected_loss);
/* L x L posterior-mean Rand matrix, row-major into out[0..L*L). */
TC_API tc_status tc_posterior_rand_matrix(const tc_traces* traces, double* out);

#ifdef __cplusplus
}
#endif

#endif
