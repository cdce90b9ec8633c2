#ifndef SENSTIR_CAPI_H
#define SENSTIR_CAPI_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. E_INVALID covers bad arguments and configuration, E_DATA
 * covers malformed or inconsistent inputs, E_NUMERIC covers failed numerics
 * (non-convergence, singular systems), E_IO covers file problems. */
typedef enum senstir_status {
  SENSTIR_OK = 0,
  SENSTIR_E_INVALID = 1,
  SENSTIR_E_DATA = 2,
  SENSTIR_E_NUMERIC = 3,
  SENSTIR_E_IO = 4
} senstir_status;

/* Message for the most recent failure on the calling thread ("" if none).
 * Valid until the next senstir_* call on the same thread. */
const char* senstir_last_error(void);

typedef struct senstir_dataset senstir_dataset;
typedef struct senstir_dataset_builder senstir_dataset_builder;
typedef struct senstir_metric senstir_metric;
typedef struct senstir_model senstir_model;

/* ---------- datasets ---------- */

/* Synthetic two-feature corpus; stream_label ("train", "test", ...) selects a
 * named substream of the seed so splits are independent but reproducible. */
senstir_status senstir_dataset_synthetic(uint64_t seed, const char* stream_label,
                                         int num_queries, int items_per_query,
                                         double majority_prob, senstir_dataset** out);

/* JSON-lines dataset files. */
senstir_status senstir_dataset_load(const char* path, senstir_dataset** out);
senstir_status senstir_dataset_save(const senstir_dataset* data, const char* path);

/* Queries sampled with replacement from the pooled items of `pool`. In
 * stratified mode each slot draws a relevant item with probability
 * target_relevant / query_size. */
senstir_status senstir_dataset_from_pool(const senstir_dataset* pool, int query_size,
                                         int num_queries, int stratified,
                                         double target_relevant, uint64_t seed,
                                         senstir_dataset** out);

/* LETOR text import. require_max_rel / sample_docs take -1 for "unset";
 * binary_feature_ids are 1-based ids left out of standardization. When
 * stats_in_path is non-null its statistics are applied instead of fitting new
 * ones; when stats_out_path is non-null the statistics used are saved there. */
senstir_status senstir_dataset_letor(const char* path, int min_docs, int require_max_rel,
                                     int sample_docs, const int* binary_feature_ids,
                                     int num_binary_ids, int standardize,
                                     const char* stats_in_path, const char* stats_out_path,
                                     uint64_t seed, senstir_dataset** out);

int senstir_dataset_num_queries(const senstir_dataset* data);
int senstir_dataset_feature_dim(const senstir_dataset* data);
int senstir_dataset_has_groups(const senstir_dataset* data);
void senstir_dataset_free(senstir_dataset* data);

/* Incremental construction: add_query opens a query, add_item appends to the
 * most recently added one (group -1 means "no group"). finish validates and
 * consumes the builder. */
senstir_status senstir_dataset_builder_new(senstir_dataset_builder** out);
senstir_status senstir_dataset_builder_add_query(senstir_dataset_builder* b,
                                                 const char* query_id);
senstir_status senstir_dataset_builder_add_item(senstir_dataset_builder* b,
                                                const double* features, int dim, double rel,
                                                int group);
senstir_status senstir_dataset_builder_finish(senstir_dataset_builder* b,
                                              senstir_dataset** out);
void senstir_dataset_builder_free(senstir_dataset_builder* b);

/* ---------- fair metrics ---------- */

/* Fits a sensitive subspace on the dataset's items. method is "logistic" or
 * "ridge"; target_column -1 targets the group label, otherwise the given
 * feature column is predicted from the remaining ones and its coefficient is
 * embedded with a zero at that column. extra_basis_columns adds coordinate
 * directions to the span. mode is "euclidean" or "squared". */
senstir_status senstir_metric_fit(const senstir_dataset* data, const char* method,
                                  int target_column, const int* extra_basis_columns,
                                  int num_extra, const char* mode, senstir_metric** out);

senstir_status senstir_metric_save(const senstir_metric* metric, const char* path);
senstir_status senstir_metric_load(const char* path, senstir_metric** out);
int senstir_metric_dim(const senstir_metric* metric);
int senstir_metric_rank(const senstir_metric* metric);
void senstir_metric_free(senstir_metric* metric);

/* ---------- training ---------- */

typedef struct senstir_train_config {
  int epochs;
  int batch_size;
  int mc_samples;
  double rho;
  double epsilon;
  double lambda_init;
  double lambda_step;
  double theta_step;
  int attack_subspace_steps;
  double attack_subspace_lr;
  int attack_full_steps;
  double attack_full_lr;
  double fair_start_frac;
  double l2;
  double weight_init_range;
  uint64_t seed;
  int use_sgd;            /* 0 = adaptive-moment optimizer */
  int warm_start_attacks; /* persist per-slot attack state across epochs */
} senstir_train_config;

void senstir_train_config_defaults(senstir_train_config* cfg);

/* variant is one of "senstir", "baseline", "project", "random"; metric may be
 * null unless the variant needs one (project, or senstir with rho > 0). */
senstir_status senstir_train(const senstir_train_config* cfg, const senstir_dataset* data,
                             const senstir_metric* metric, const char* variant,
                             senstir_model** out);

senstir_status senstir_model_save(const senstir_model* model, const char* path);
senstir_status senstir_model_load(const char* path, senstir_model** out);
int senstir_model_feature_dim(const senstir_model* model);
senstir_status senstir_model_theta(const senstir_model* model, double* out, int len);
const char* senstir_model_variant(const senstir_model* model);
double senstir_model_rho(const senstir_model* model);
double senstir_model_epsilon(const senstir_model* model);
uint64_t senstir_model_seed(const senstir_model* model);
int senstir_model_history_len(const senstir_model* model);
/* field: "mean_utility", "mean_dq", "lambda" or "regularizer". */
senstir_status senstir_model_history(const senstir_model* model, const char* field,
                                     double* out, int len);
/* ||B^T theta|| / ||(I - B B^T) theta||; needs a stored subspace. */
senstir_status senstir_model_weight_ratio(const senstir_model* model, double* out);
void senstir_model_free(senstir_model* model);

/* ---------- evaluation ---------- */

typedef struct senstir_eval_options {
  int pl_samples;
  /* null/"none", "group-flip:<column>" or "nearest-fair-neighbor" */
  const char* hypothetical;
  int exposure;
  int tau_by_item_index; /* weighted tau by item index instead of rank */
  uint64_t seed;
} senstir_eval_options;

void senstir_eval_options_defaults(senstir_eval_options* opt);

/* Absent values (no hypothetical, exposure not requested) come back as NaN. */
typedef struct senstir_eval_summary {
  double ndcg_stochastic;
  double kendall_tau;
  double kendall_tau_weighted;
  double exposure_disparity;
} senstir_eval_summary;

/* metric may be null; nearest-fair-neighbor then falls back to the subspace
 * stored in the model. */
senstir_status senstir_evaluate(const senstir_model* model, const senstir_dataset* data,
                                const senstir_metric* metric,
                                const senstir_eval_options* opt,
                                senstir_eval_summary* out);

/* ---------- reports ---------- */

/* NaN in an optional column prints as an empty cell; the weight_ratio column
 * appears only when some row sets it to a non-NaN value. */
typedef struct senstir_report_row {
  const char* variant;
  double rho;
  double epsilon;
  uint64_t seed;
  double ndcg_stochastic;
  double kendall_tau;
  double kendall_tau_weighted;
  double exposure_disparity;
  double weight_ratio;
} senstir_report_row;

senstir_status senstir_report_write(const char* path, const senstir_report_row* rows,
                                    int num_rows);

/* ---------- implicit feedback ---------- */

/* Simulates position-biased clicks per query (logged ranking = item order,
 * evaluated ranking = by relevance) and writes a CSV comparing the naive and
 * the inverse-propensity estimate of the evaluated ranking's value against
 * the known truth. Columns: query_id,items,truth,basic_mean,ips_mean,
 * basic_abs_err,ips_abs_err. Relevances must be binary. */
senstir_status senstir_ips_eval(const senstir_dataset* data, double eta, double floor,
                                int draws, uint64_t seed, const char* out_csv);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SENSTIR_CAPI_H */
