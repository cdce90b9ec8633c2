#pragma once

#include <optional>
#include <string>
#include <vector>

#include "senstir/core.hpp"
#include "senstir/fair_metric.hpp"
#include "senstir/rng.hpp"
#include "senstir/trainer.hpp"

namespace senstir {

// Two-feature synthetic ranking task: relevance is the clipped sum of two
// uniform draws, but the second feature is zeroed out ("corrupted") for
// minority-group items while their relevance still reflects the uncorrupted
// value.
struct SyntheticSpec {
  int num_queries = 100;
  int items_per_query = 10;
  double majority_prob = 0.8;
  double feature_lo = 0.0, feature_hi = 3.0;  // z1, z2 ~ U[feature_lo, feature_hi]
  double rel_lo = 0.0, rel_hi = 5.0;          // rel = clip(z1 + z2, rel_lo, rel_hi)
};

// Per item the stream is consumed in a fixed order: group, z1, z2.
// Majority items carry group 0, minority group 1.
Dataset gen_synthetic(const SyntheticSpec& spec, RandomStream& rng);

// Queries assembled by sampling individuals from a fixed pool with
// replacement. In stratified mode each slot draws from the relevant (rel > 0)
// subpool with probability target_relevant / query_size, otherwise from the
// non-relevant subpool, fixing the expected relevant count per query.
struct PoolSpec {
  std::vector<Item> pool;
  int query_size = 10;
  int num_queries = 0;
  bool stratified = false;
  double target_relevant = 4.0;  // expected relevant items per query (stratified mode)
};

Dataset build_queries_from_pool(const PoolSpec& spec, RandomStream& rng);

// Column-wise affine normalization fitted on one dataset (the training split)
// and applied to any other. Columns listed in skip_columns (declared binary
// indicators) pass through unchanged; constant columns are centered only.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // population sd, 1 where skipped or degenerate
  std::vector<int> skip_columns;

  static Standardizer fit(const Dataset& data, const std::vector<int>& skip_columns = {});
  Dataset apply(const Dataset& data) const;
};

void save_standardizer(const std::string& path, const Standardizer& s);
Standardizer load_standardizer(const std::string& path);

struct LetorOptions {
  int min_docs = 1;                     // queries with fewer documents are dropped
  std::optional<int> require_max_rel;   // drop queries lacking this relevance grade
  std::optional<int> sample_docs;       // per-query subsample size (without replacement)
  std::vector<int> binary_feature_ids;  // 1-based ids excluded from standardization
  bool standardize = true;
  // When set, these statistics are applied instead of fitting new ones
  // (evaluation splits reuse the training split's standardizer).
  std::optional<Standardizer> reuse_stats;
};

struct LetorResult {
  Dataset data;
  Standardizer standardizer;
};

// Text format: `<rel> qid:<id> <fid>:<val> ... # comment`, one document per
// line, features sparse over 1-based ids. Queries keep file order (order of
// first appearance); filters run in the order min_docs, require_max_rel,
// sample_docs; the subsample is re-drawn until it contains a document of the
// required grade. Statistics are fitted after filtering.
LetorResult parse_letor(const std::string& path, const LetorOptions& opt, RandomStream& rng);
LetorResult parse_letor_text(const std::string& text, const LetorOptions& opt, RandomStream& rng);

// JSON-lines dataset cache: {"query_id": ..., "items": [{"features": [...],
// "rel": r, "group": g?}]}, one query per line.
void save_dataset_jsonl(const std::string& path, const Dataset& data);
Dataset load_dataset_jsonl(const std::string& path);

// Trained-policy artifact; round-trips bit-exactly through JSON.
struct Model {
  int schema_version = 1;
  LinearPolicy policy;
  std::optional<SensitiveSubspace> subspace;
  MetricMode metric_mode = MetricMode::euclidean;
  TrainVariant variant = TrainVariant::baseline;
  TrainConfig config;
  TrainHistory history;
};

void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

// Fitted fair-metric artifact (basis plus distance mode).
struct MetricModel {
  int schema_version = 1;
  SensitiveSubspace subspace;
  MetricMode mode = MetricMode::euclidean;
};

void save_metric(const std::string& path, const MetricModel& metric);
MetricModel load_metric(const std::string& path);

const char* variant_name(TrainVariant v);
TrainVariant variant_from_name(const std::string& name);
const char* metric_mode_name(MetricMode m);
MetricMode metric_mode_from_name(const std::string& name);

// One evaluation record. Optional fields print as empty CSV cells; the
// weight_ratio column is emitted only when some row carries it.
struct ReportRow {
  std::string variant;
  double rho = 0.0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  double ndcg_stochastic = 0.0;
  std::optional<double> kendall_tau;
  std::optional<double> kendall_tau_weighted;
  std::optional<double> exposure_disparity;
  std::optional<double> weight_ratio;
};

void write_report(const std::string& path, const std::vector<ReportRow>& rows);

}  // namespace senstir
