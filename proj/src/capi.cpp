#include "senstir/capi.h"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "senstir/data.hpp"
#include "senstir/errors.hpp"
#include "senstir/eval.hpp"
#include "senstir/ips.hpp"
#include "senstir/trainer.hpp"

struct senstir_dataset {
  senstir::Dataset data;
};

struct senstir_dataset_builder {
  std::vector<senstir::Query> queries;
};

struct senstir_metric {
  senstir::MetricModel model;
};

struct senstir_model {
  senstir::Model model;
};

namespace {

thread_local std::string tl_error;

senstir_status map_code(senstir::ErrorCode code) {
  using senstir::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_config:
    case ErrorCode::too_large:
    case ErrorCode::baseline_needs_samples:
    case ErrorCode::stale_plan:
      return SENSTIR_E_INVALID;
    case ErrorCode::io_error:
      return SENSTIR_E_IO;
    case ErrorCode::non_finite_score:
    case ErrorCode::singular_system:
    case ErrorCode::no_convergence:
      return SENSTIR_E_NUMERIC;
    default:
      return SENSTIR_E_DATA;
  }
}

template <typename F>
senstir_status wrap(F&& body) noexcept {
  try {
    body();
    tl_error.clear();
    return SENSTIR_OK;
  } catch (const senstir::Error& e) {
    tl_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    tl_error = e.what();
    return SENSTIR_E_INVALID;
  }
}

void check(bool ok, const char* message) {
  senstir::require(ok, senstir::ErrorCode::invalid_config, message);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

senstir::FairItemMetric make_item_metric(const senstir::MetricModel& m) {
  return senstir::FairItemMetric(m.subspace, m.mode);
}

}  // namespace

extern "C" {

const char* senstir_last_error(void) { return tl_error.c_str(); }

senstir_status senstir_dataset_synthetic(uint64_t seed, const char* stream_label,
                                         int num_queries, int items_per_query,
                                         double majority_prob, senstir_dataset** out) {
  return wrap([&] {
    check(out != nullptr, "null output pointer");
    senstir::SyntheticSpec spec;
    spec.num_queries = num_queries;
    spec.items_per_query = items_per_query;
    spec.majority_prob = majority_prob;
    senstir::RandomStream rng = senstir::RandomStream(seed).sub("data");
    if (stream_label && *stream_label) rng = rng.sub(stream_label);
    *out = new senstir_dataset{senstir::gen_synthetic(spec, rng)};
  });
}

senstir_status senstir_dataset_load(const char* path, senstir_dataset** out) {
  return wrap([&] {
    check(path != nullptr && out != nullptr, "null argument");
    *out = new senstir_dataset{senstir::load_dataset_jsonl(path)};
  });
}

senstir_status senstir_dataset_save(const senstir_dataset* data, const char* path) {
  return wrap([&] {
    check(data != nullptr && path != nullptr, "null argument");
    senstir::save_dataset_jsonl(path, data->data);
  });
}

senstir_status senstir_dataset_from_pool(const senstir_dataset* pool, int query_size,
                                         int num_queries, int stratified,
                                         double target_relevant, uint64_t seed,
                                         senstir_dataset** out) {
  return wrap([&] {
    check(pool != nullptr && out != nullptr, "null argument");
    senstir::PoolSpec spec;
    for (const auto& q : pool->data.queries)
      spec.pool.insert(spec.pool.end(), q.items.begin(), q.items.end());
    spec.query_size = query_size;
    spec.num_queries = num_queries;
    spec.stratified = stratified != 0;
    spec.target_relevant = target_relevant;
    senstir::RandomStream rng = senstir::RandomStream(seed).sub("data").sub("pool");
    *out = new senstir_dataset{senstir::build_queries_from_pool(spec, rng)};
  });
}

senstir_status senstir_dataset_letor(const char* path, int min_docs, int require_max_rel,
                                     int sample_docs, const int* binary_feature_ids,
                                     int num_binary_ids, int standardize,
                                     const char* stats_in_path, const char* stats_out_path,
                                     uint64_t seed, senstir_dataset** out) {
  return wrap([&] {
    check(path != nullptr && out != nullptr, "null argument");
    check(num_binary_ids == 0 || binary_feature_ids != nullptr,
          "null binary feature id list");
    senstir::LetorOptions opt;
    opt.min_docs = min_docs;
    if (require_max_rel >= 0) opt.require_max_rel = require_max_rel;
    if (sample_docs >= 0) opt.sample_docs = sample_docs;
    opt.binary_feature_ids.assign(binary_feature_ids, binary_feature_ids + num_binary_ids);
    opt.standardize = standardize != 0;
    if (stats_in_path && *stats_in_path)
      opt.reuse_stats = senstir::load_standardizer(stats_in_path);
    senstir::RandomStream rng = senstir::RandomStream(seed).sub("data").sub("letor");
    senstir::LetorResult result = senstir::parse_letor(path, opt, rng);
    if (stats_out_path && *stats_out_path)
      senstir::save_standardizer(stats_out_path, result.standardizer);
    *out = new senstir_dataset{std::move(result.data)};
  });
}

int senstir_dataset_num_queries(const senstir_dataset* data) {
  return data ? static_cast<int>(data->data.queries.size()) : 0;
}

int senstir_dataset_feature_dim(const senstir_dataset* data) {
  return data ? data->data.feature_dim : 0;
}

int senstir_dataset_has_groups(const senstir_dataset* data) {
  return data && data->data.has_groups ? 1 : 0;
}

void senstir_dataset_free(senstir_dataset* data) { delete data; }

senstir_status senstir_dataset_builder_new(senstir_dataset_builder** out) {
  return wrap([&] {
    check(out != nullptr, "null output pointer");
    *out = new senstir_dataset_builder{};
  });
}

senstir_status senstir_dataset_builder_add_query(senstir_dataset_builder* b,
                                                 const char* query_id) {
  return wrap([&] {
    check(b != nullptr && query_id != nullptr, "null argument");
    senstir::Query q;
    q.id = query_id;
    b->queries.push_back(std::move(q));
  });
}

senstir_status senstir_dataset_builder_add_item(senstir_dataset_builder* b,
                                                const double* features, int dim, double rel,
                                                int group) {
  return wrap([&] {
    check(b != nullptr && features != nullptr, "null argument");
    check(!b->queries.empty(), "add_query must come before add_item");
    check(dim >= 1, "feature dimension must be >= 1");
    senstir::Item item;
    item.features = Eigen::Map<const Eigen::VectorXd>(features, dim);
    item.relevance = rel;
    if (group >= 0) item.group = group;
    b->queries.back().items.push_back(std::move(item));
  });
}

senstir_status senstir_dataset_builder_finish(senstir_dataset_builder* b,
                                              senstir_dataset** out) {
  return wrap([&] {
    check(b != nullptr && out != nullptr, "null argument");
    *out = new senstir_dataset{senstir::make_dataset(std::move(b->queries))};
    delete b;
  });
}

void senstir_dataset_builder_free(senstir_dataset_builder* b) { delete b; }

senstir_status senstir_metric_fit(const senstir_dataset* data, const char* method,
                                  int target_column, const int* extra_basis_columns,
                                  int num_extra, const char* mode, senstir_metric** out) {
  return wrap([&] {
    check(data != nullptr && method != nullptr && mode != nullptr && out != nullptr,
          "null argument");
    check(num_extra == 0 || extra_basis_columns != nullptr, "null extra basis list");
    const senstir::Dataset& ds = data->data;
    const int p = ds.feature_dim;
    check(p >= 2, "need at least two features to carve out a sensitive subspace");
    const bool by_group = target_column < 0;
    if (by_group)
      senstir::require(ds.has_groups, senstir::ErrorCode::missing_groups,
                       "group target needs group annotations");
    else
      check(target_column < p, "target column out of range");

    std::size_t n = 0;
    for (const auto& q : ds.queries) n += q.items.size();
    const int xdim = by_group ? p : p - 1;
    Eigen::MatrixXd X(n, xdim);
    Eigen::VectorXd y(n);
    std::vector<int> labels(n);
    std::size_t row = 0;
    for (const auto& q : ds.queries)
      for (const auto& item : q.items) {
        if (by_group) {
          X.row(row) = item.features.transpose();
          y[row] = static_cast<double>(*item.group);
          labels[row] = *item.group;
        } else {
          int c = 0;
          for (int f = 0; f < p; ++f)
            if (f != target_column) X(row, c++) = item.features[f];
          const double v = item.features[target_column];
          y[row] = v;
          labels[row] = v != 0.0 ? 1 : 0;
        }
        ++row;
      }

    std::vector<Eigen::VectorXd> extra;
    for (int i = 0; i < num_extra; ++i) {
      const int c = extra_basis_columns[i];
      check(c >= 0 && c < p, "extra basis column out of range");
      extra.push_back(Eigen::VectorXd::Unit(p, c));
    }

    senstir::SensitiveSubspace subspace;
    const std::string method_name(method);
    if (method_name == "logistic") {
      if (!by_group)
        for (std::size_t i = 0; i < n; ++i)
          check(y[i] == 0.0 || y[i] == 1.0, "logistic target column must be binary");
      const senstir::LogisticFit fit = senstir::fit_logistic(X, labels, {});
      Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
      if (by_group) {
        w = fit.weights;
      } else {
        int c = 0;
        for (int f = 0; f < p; ++f)
          if (f != target_column) w[f] = fit.weights[c++];
      }
      std::vector<Eigen::VectorXd> spanning{w};
      spanning.insert(spanning.end(), extra.begin(), extra.end());
      subspace = senstir::make_subspace(spanning);
    } else if (method_name == "ridge") {
      senstir::RidgeFitOptions opt;
      opt.extra_basis = extra;
      if (!by_group) {
        opt.embed_dim = p;
        opt.target_coordinate = target_column;
      }
      subspace = senstir::fit_subspace_ridge(X, y, opt);
    } else {
      check(false, "method must be 'logistic' or 'ridge'");
    }

    senstir::MetricModel model;
    model.subspace = std::move(subspace);
    model.mode = senstir::metric_mode_from_name(mode);
    make_item_metric(model);  // validates orthonormality and rank before handing it out
    *out = new senstir_metric{std::move(model)};
  });
}

senstir_status senstir_metric_save(const senstir_metric* metric, const char* path) {
  return wrap([&] {
    check(metric != nullptr && path != nullptr, "null argument");
    senstir::save_metric(path, metric->model);
  });
}

senstir_status senstir_metric_load(const char* path, senstir_metric** out) {
  return wrap([&] {
    check(path != nullptr && out != nullptr, "null argument");
    senstir::MetricModel model = senstir::load_metric(path);
    make_item_metric(model);
    *out = new senstir_metric{std::move(model)};
  });
}

int senstir_metric_dim(const senstir_metric* metric) {
  return metric ? metric->model.subspace.dim() : 0;
}

int senstir_metric_rank(const senstir_metric* metric) {
  return metric ? metric->model.subspace.rank() : 0;
}

void senstir_metric_free(senstir_metric* metric) { delete metric; }

void senstir_train_config_defaults(senstir_train_config* cfg) {
  if (!cfg) return;
  const senstir::TrainConfig d;
  cfg->epochs = d.epochs;
  cfg->batch_size = d.batch_size;
  cfg->mc_samples = d.mc_samples;
  cfg->rho = d.rho;
  cfg->epsilon = d.epsilon;
  cfg->lambda_init = d.lambda_init;
  cfg->lambda_step = d.lambda_step;
  cfg->theta_step = d.theta_step;
  cfg->attack_subspace_steps = d.attack_subspace_steps;
  cfg->attack_subspace_lr = d.attack_subspace_lr;
  cfg->attack_full_steps = d.attack_full_steps;
  cfg->attack_full_lr = d.attack_full_lr;
  cfg->fair_start_frac = d.fair_start_frac;
  cfg->l2 = d.l2;
  cfg->weight_init_range = d.weight_init_range;
  cfg->seed = d.seed;
  cfg->use_sgd = d.optimizer == senstir::OptimizerKind::sgd ? 1 : 0;
  cfg->warm_start_attacks = d.warm_start_attacks ? 1 : 0;
}

senstir_status senstir_train(const senstir_train_config* cfg, const senstir_dataset* data,
                             const senstir_metric* metric, const char* variant,
                             senstir_model** out) {
  return wrap([&] {
    check(cfg != nullptr && data != nullptr && variant != nullptr && out != nullptr,
          "null argument");
    senstir::TrainConfig c;
    c.epochs = cfg->epochs;
    c.batch_size = cfg->batch_size;
    c.mc_samples = cfg->mc_samples;
    c.rho = cfg->rho;
    c.epsilon = cfg->epsilon;
    c.lambda_init = cfg->lambda_init;
    c.lambda_step = cfg->lambda_step;
    c.theta_step = cfg->theta_step;
    c.attack_subspace_steps = cfg->attack_subspace_steps;
    c.attack_subspace_lr = cfg->attack_subspace_lr;
    c.attack_full_steps = cfg->attack_full_steps;
    c.attack_full_lr = cfg->attack_full_lr;
    c.fair_start_frac = cfg->fair_start_frac;
    c.l2 = cfg->l2;
    c.weight_init_range = cfg->weight_init_range;
    c.seed = cfg->seed;
    c.optimizer = cfg->use_sgd ? senstir::OptimizerKind::sgd : senstir::OptimizerKind::adam;
    c.warm_start_attacks = cfg->warm_start_attacks != 0;

    const senstir::TrainVariant v = senstir::variant_from_name(variant);
    std::optional<senstir::FairItemMetric> m;
    if (metric) m.emplace(make_item_metric(metric->model));
    senstir::TrainResult result =
        senstir::train(c, data->data, m ? &*m : nullptr, v);

    senstir::Model model;
    model.policy = std::move(result.policy);
    if (metric) {
      model.subspace = metric->model.subspace;
      model.metric_mode = metric->model.mode;
    }
    model.variant = v;
    model.config = c;
    model.history = std::move(result.history);
    *out = new senstir_model{std::move(model)};
  });
}

senstir_status senstir_model_save(const senstir_model* model, const char* path) {
  return wrap([&] {
    check(model != nullptr && path != nullptr, "null argument");
    senstir::save_model(path, model->model);
  });
}

senstir_status senstir_model_load(const char* path, senstir_model** out) {
  return wrap([&] {
    check(path != nullptr && out != nullptr, "null argument");
    *out = new senstir_model{senstir::load_model(path)};
  });
}

int senstir_model_feature_dim(const senstir_model* model) {
  return model ? static_cast<int>(model->model.policy.theta.size()) : 0;
}

senstir_status senstir_model_theta(const senstir_model* model, double* out, int len) {
  return wrap([&] {
    check(model != nullptr && out != nullptr, "null argument");
    check(len == static_cast<int>(model->model.policy.theta.size()),
          "output length does not match feature_dim");
    Eigen::Map<Eigen::VectorXd>(out, len) = model->model.policy.theta;
  });
}

const char* senstir_model_variant(const senstir_model* model) {
  return model ? senstir::variant_name(model->model.variant) : "";
}

double senstir_model_rho(const senstir_model* model) {
  return model ? model->model.config.rho : 0.0;
}

double senstir_model_epsilon(const senstir_model* model) {
  return model ? model->model.config.epsilon : 0.0;
}

uint64_t senstir_model_seed(const senstir_model* model) {
  return model ? model->model.config.seed : 0;
}

int senstir_model_history_len(const senstir_model* model) {
  return model ? static_cast<int>(model->model.history.mean_utility.size()) : 0;
}

senstir_status senstir_model_history(const senstir_model* model, const char* field,
                                     double* out, int len) {
  return wrap([&] {
    check(model != nullptr && field != nullptr && out != nullptr, "null argument");
    const senstir::TrainHistory& h = model->model.history;
    const std::vector<double>* src = nullptr;
    if (std::strcmp(field, "mean_utility") == 0) src = &h.mean_utility;
    else if (std::strcmp(field, "mean_dq") == 0) src = &h.mean_dq;
    else if (std::strcmp(field, "lambda") == 0) src = &h.lambda;
    else if (std::strcmp(field, "regularizer") == 0) src = &h.regularizer;
    check(src != nullptr, "unknown history field");
    check(len == static_cast<int>(src->size()), "output length does not match history");
    std::copy(src->begin(), src->end(), out);
  });
}

senstir_status senstir_model_weight_ratio(const senstir_model* model, double* out) {
  return wrap([&] {
    check(model != nullptr && out != nullptr, "null argument");
    check(model->model.subspace.has_value(), "model carries no sensitive subspace");
    *out = senstir::sensitive_weight_ratio(model->model.policy, *model->model.subspace);
  });
}

void senstir_model_free(senstir_model* model) { delete model; }

void senstir_eval_options_defaults(senstir_eval_options* opt) {
  if (!opt) return;
  opt->pl_samples = 25;
  opt->hypothetical = nullptr;
  opt->exposure = 0;
  opt->tau_by_item_index = 0;
  opt->seed = 0;
}

senstir_status senstir_evaluate(const senstir_model* model, const senstir_dataset* data,
                                const senstir_metric* metric,
                                const senstir_eval_options* opt,
                                senstir_eval_summary* out) {
  return wrap([&] {
    check(model != nullptr && data != nullptr && opt != nullptr && out != nullptr,
          "null argument");
    senstir::EvalOptions options;
    options.pl_samples = opt->pl_samples;
    options.exposure = opt->exposure != 0;
    options.tau_weighting = opt->tau_by_item_index ? senstir::TauWeighting::item_index
                                                   : senstir::TauWeighting::rank_in_reference;
    options.seed = opt->seed;
    if (opt->hypothetical && *opt->hypothetical &&
        std::strcmp(opt->hypothetical, "none") != 0) {
      const std::string_view h = opt->hypothetical;
      if (h == "nearest-fair-neighbor") {
        options.hypothetical = senstir::HypotheticalMode::nearest_fair_neighbor;
      } else if (h.substr(0, 11) == "group-flip:") {
        options.hypothetical = senstir::HypotheticalMode::group_flip;
        const std::string_view col = h.substr(11);
        int value = -1;
        const auto res = std::from_chars(col.data(), col.data() + col.size(), value);
        check(res.ec == std::errc{} && res.ptr == col.data() + col.size(),
              "group-flip needs a column index");
        options.flip_column = value;
      } else {
        check(false, "hypothetical must be none, group-flip:<column> or "
                     "nearest-fair-neighbor");
      }
    }

    std::optional<senstir::FairItemMetric> m;
    if (metric)
      m.emplace(make_item_metric(metric->model));
    else if (model->model.subspace)
      m.emplace(*model->model.subspace, model->model.metric_mode);

    const senstir::EvalSummary summary =
        senstir::evaluate(model->model.policy, data->data, m ? &*m : nullptr, options);
    const double nan = std::nan("");
    out->ndcg_stochastic = summary.ndcg_stochastic;
    out->kendall_tau = summary.kendall_tau.value_or(nan);
    out->kendall_tau_weighted = summary.kendall_tau_weighted.value_or(nan);
    out->exposure_disparity = summary.exposure_disparity.value_or(nan);
  });
}

senstir_status senstir_report_write(const char* path, const senstir_report_row* rows,
                                    int num_rows) {
  return wrap([&] {
    check(path != nullptr, "null path");
    check(num_rows == 0 || rows != nullptr, "null rows");
    std::vector<senstir::ReportRow> converted(num_rows);
    for (int i = 0; i < num_rows; ++i) {
      const senstir_report_row& r = rows[i];
      check(r.variant != nullptr, "null variant in report row");
      senstir::ReportRow& c = converted[i];
      c.variant = r.variant;
      c.rho = r.rho;
      c.epsilon = r.epsilon;
      c.seed = r.seed;
      c.ndcg_stochastic = r.ndcg_stochastic;
      if (!std::isnan(r.kendall_tau)) c.kendall_tau = r.kendall_tau;
      if (!std::isnan(r.kendall_tau_weighted)) c.kendall_tau_weighted = r.kendall_tau_weighted;
      if (!std::isnan(r.exposure_disparity)) c.exposure_disparity = r.exposure_disparity;
      if (!std::isnan(r.weight_ratio)) c.weight_ratio = r.weight_ratio;
    }
    senstir::write_report(path, converted);
  });
}

senstir_status senstir_ips_eval(const senstir_dataset* data, double eta, double floor,
                                int draws, uint64_t seed, const char* out_csv) {
  return wrap([&] {
    check(data != nullptr && out_csv != nullptr, "null argument");
    check(draws >= 1, "draws must be >= 1");
    senstir::PropensityModel propensity;
    propensity.eta = eta;
    propensity.floor = floor;
    propensity.examine_prob(1);  // validates eta and floor

    std::ofstream out(out_csv, std::ios::binary);
    senstir::require(out.is_open(), senstir::ErrorCode::io_error,
                     std::string("cannot open for writing: ") + out_csv);
    out << "query_id,items,truth,basic_mean,ips_mean,basic_abs_err,ips_abs_err\n";
    senstir::RandomStream clicks_stream = senstir::RandomStream(seed).sub("clicks");
    for (const senstir::Query& q : data->data.queries) {
      const std::vector<double> rels = q.relevances();
      const senstir::Ranking logged = senstir::Ranking::identity(q.size());
      const senstir::Ranking evaluated = senstir::ideal_ranking(q);
      const double truth = senstir::expected_ips_delta(evaluated, rels);
      senstir::RandomStream rng = clicks_stream.sub(q.id);
      double basic_sum = 0.0, ips_sum = 0.0;
      for (int d = 0; d < draws; ++d) {
        const senstir::ClickVector clicks =
            senstir::simulate_clicks(rels, logged, propensity, rng);
        basic_sum += senstir::basic_delta(evaluated, clicks);
        ips_sum += senstir::ips_delta(evaluated, clicks, logged, propensity);
      }
      const double basic_mean = basic_sum / draws;
      const double ips_mean = ips_sum / draws;
      out << q.id << ',' << q.size() << ',' << format_double(truth) << ','
          << format_double(basic_mean) << ',' << format_double(ips_mean) << ','
          << format_double(std::abs(basic_mean - truth)) << ','
          << format_double(std::abs(ips_mean - truth)) << '\n';
    }
    senstir::require(out.good(), senstir::ErrorCode::io_error,
                     std::string("write failed: ") + out_csv);
  });
}

}  // extern "C"
