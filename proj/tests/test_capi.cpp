// Exercises the C interface end to end against the shared library.
#include <senstir/capi.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

int failures = 0;

#define CHECK(cond)                                                    \
  do {                                                                 \
    if (!(cond)) {                                                     \
      std::fprintf(stderr, "FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

std::string tmp_path(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / "senstir_capi_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

senstir_dataset* binary_dataset() {
  senstir_dataset_builder* b = nullptr;
  CHECK(senstir_dataset_builder_new(&b) == SENSTIR_OK);
  for (int qi = 0; qi < 3; ++qi) {
    const std::string id = "q" + std::to_string(qi);
    CHECK(senstir_dataset_builder_add_query(b, id.c_str()) == SENSTIR_OK);
    for (int j = 0; j < 4; ++j) {
      const double features[2] = {0.1 * j + qi, 1.0 - 0.2 * j};
      CHECK(senstir_dataset_builder_add_item(b, features, 2, (j + qi) % 2, j % 2) ==
            SENSTIR_OK);
    }
  }
  senstir_dataset* data = nullptr;
  CHECK(senstir_dataset_builder_finish(b, &data) == SENSTIR_OK);
  return data;
}

void test_defaults() {
  senstir_train_config cfg;
  senstir_train_config_defaults(&cfg);
  CHECK(cfg.epochs == 2000);
  CHECK(cfg.batch_size == 1);
  CHECK(cfg.mc_samples == 10);
  CHECK(cfg.rho == 0.0);
  CHECK(cfg.epsilon == 0.001);
  CHECK(cfg.lambda_init == 2.0);
  CHECK(cfg.lambda_step == 1.0);
  CHECK(cfg.theta_step == 0.001);
  CHECK(cfg.attack_subspace_steps == 20);
  CHECK(cfg.attack_full_steps == 20);
  CHECK(cfg.fair_start_frac == 0.0);
  CHECK(cfg.weight_init_range == 1e-4);
  CHECK(cfg.use_sgd == 0);
  CHECK(cfg.warm_start_attacks == 1);

  senstir_eval_options opt;
  senstir_eval_options_defaults(&opt);
  CHECK(opt.pl_samples == 25);
  CHECK(opt.hypothetical == nullptr);
  CHECK(opt.exposure == 0);
  CHECK(opt.tau_by_item_index == 0);
  CHECK(opt.seed == 0);
}

void test_datasets() {
  senstir_dataset* train = nullptr;
  senstir_dataset* test = nullptr;
  CHECK(senstir_dataset_synthetic(7, "train", 20, 10, 0.8, &train) == SENSTIR_OK);
  CHECK(senstir_dataset_synthetic(7, "test", 20, 10, 0.8, &test) == SENSTIR_OK);
  CHECK(senstir_dataset_num_queries(train) == 20);
  CHECK(senstir_dataset_feature_dim(train) == 2);
  CHECK(senstir_dataset_has_groups(train) == 1);

  const std::string a = tmp_path("train.jsonl");
  const std::string b = tmp_path("test.jsonl");
  CHECK(senstir_dataset_save(train, a.c_str()) == SENSTIR_OK);
  CHECK(senstir_dataset_save(test, b.c_str()) == SENSTIR_OK);
  CHECK(slurp(a) != slurp(b));  // named substreams give independent splits

  senstir_dataset* again = nullptr;
  CHECK(senstir_dataset_synthetic(7, "train", 20, 10, 0.8, &again) == SENSTIR_OK);
  const std::string c = tmp_path("train_again.jsonl");
  CHECK(senstir_dataset_save(again, c.c_str()) == SENSTIR_OK);
  CHECK(slurp(a) == slurp(c));  // and reproducible ones

  senstir_dataset* loaded = nullptr;
  CHECK(senstir_dataset_load(a.c_str(), &loaded) == SENSTIR_OK);
  CHECK(senstir_dataset_num_queries(loaded) == 20);
  const std::string d = tmp_path("reload.jsonl");
  CHECK(senstir_dataset_save(loaded, d.c_str()) == SENSTIR_OK);
  CHECK(slurp(a) == slurp(d));  // byte-identical round trip

  senstir_dataset* pooled = nullptr;
  CHECK(senstir_dataset_from_pool(train, 5, 8, 0, 0.0, 3, &pooled) == SENSTIR_OK);
  CHECK(senstir_dataset_num_queries(pooled) == 8);
  CHECK(senstir_dataset_feature_dim(pooled) == 2);

  CHECK(senstir_dataset_synthetic(7, "x", 0, 10, 0.8, &again) == SENSTIR_E_INVALID);
  CHECK(std::strlen(senstir_last_error()) > 0);
  senstir_dataset* missing = nullptr;
  CHECK(senstir_dataset_load(tmp_path("nope.jsonl").c_str(), &missing) == SENSTIR_E_IO);
  CHECK(senstir_dataset_load(nullptr, &missing) == SENSTIR_E_INVALID);
  CHECK(senstir_dataset_save(train, nullptr) == SENSTIR_E_INVALID);

  senstir_dataset_free(pooled);
  senstir_dataset_free(loaded);
  senstir_dataset_free(again);
  senstir_dataset_free(test);
  senstir_dataset_free(train);
  senstir_dataset_free(nullptr);  // must be a no-op
}

void test_builder() {
  senstir_dataset_builder* b = nullptr;
  CHECK(senstir_dataset_builder_new(&b) == SENSTIR_OK);
  const double features[2] = {1.0, 2.0};
  CHECK(senstir_dataset_builder_add_item(b, features, 2, 1.0, -1) == SENSTIR_E_INVALID);
  CHECK(std::strstr(senstir_last_error(), "add_query") != nullptr);
  CHECK(senstir_dataset_builder_add_query(b, "q0") == SENSTIR_OK);
  CHECK(senstir_dataset_builder_add_item(b, features, 2, 1.0, -1) == SENSTIR_OK);
  CHECK(senstir_dataset_builder_add_item(b, features, 2, 0.0, -1) == SENSTIR_OK);
  senstir_dataset* data = nullptr;
  CHECK(senstir_dataset_builder_finish(b, &data) == SENSTIR_OK);
  CHECK(senstir_dataset_num_queries(data) == 1);
  CHECK(senstir_dataset_feature_dim(data) == 2);
  CHECK(senstir_dataset_has_groups(data) == 0);  // group -1 means unannotated
  senstir_dataset_free(data);

  // inconsistent feature dimensions surface at finish
  CHECK(senstir_dataset_builder_new(&b) == SENSTIR_OK);
  CHECK(senstir_dataset_builder_add_query(b, "q0") == SENSTIR_OK);
  CHECK(senstir_dataset_builder_add_item(b, features, 2, 1.0, 0) == SENSTIR_OK);
  const double one = 5.0;
  CHECK(senstir_dataset_builder_add_item(b, &one, 1, 0.0, 1) == SENSTIR_OK);
  CHECK(senstir_dataset_builder_finish(b, &data) == SENSTIR_E_DATA);
  senstir_dataset_builder_free(b);
}

void test_metric_and_train() {
  senstir_dataset* train = nullptr;
  senstir_dataset* test = nullptr;
  CHECK(senstir_dataset_synthetic(11, "train", 40, 10, 0.8, &train) == SENSTIR_OK);
  CHECK(senstir_dataset_synthetic(11, "test", 20, 10, 0.8, &test) == SENSTIR_OK);

  senstir_metric* metric = nullptr;
  CHECK(senstir_metric_fit(train, "logistic", -1, nullptr, 0, "euclidean", &metric) ==
        SENSTIR_OK);
  CHECK(senstir_metric_dim(metric) == 2);
  CHECK(senstir_metric_rank(metric) == 1);

  const std::string metric_path = tmp_path("metric.json");
  CHECK(senstir_metric_save(metric, metric_path.c_str()) == SENSTIR_OK);
  senstir_metric* metric2 = nullptr;
  CHECK(senstir_metric_load(metric_path.c_str(), &metric2) == SENSTIR_OK);
  CHECK(senstir_metric_dim(metric2) == 2);
  CHECK(senstir_metric_rank(metric2) == 1);

  senstir_metric* ridge = nullptr;
  CHECK(senstir_metric_fit(train, "ridge", -1, nullptr, 0, "squared", &ridge) == SENSTIR_OK);
  CHECK(senstir_metric_rank(ridge) == 1);
  senstir_metric_free(ridge);

  // an extra axis on top of the fitted direction would span all of a
  // two-feature space, leaving nothing for the fair metric to compare
  const int extra[1] = {0};
  senstir_metric* full_span = nullptr;
  CHECK(senstir_metric_fit(train, "logistic", -1, extra, 1, "euclidean", &full_span) ==
        SENSTIR_E_DATA);

  // with a third feature the extra basis column widens the subspace
  senstir_dataset_builder* b = nullptr;
  CHECK(senstir_dataset_builder_new(&b) == SENSTIR_OK);
  CHECK(senstir_dataset_builder_add_query(b, "w0") == SENSTIR_OK);
  for (int j = 0; j < 12; ++j) {
    const double a = 0.3 * j - 1.5;
    const double features[3] = {a, (j % 3) - 1.0, 0.5 * a};
    CHECK(senstir_dataset_builder_add_item(b, features, 3, j % 2, -1) == SENSTIR_OK);
  }
  senstir_dataset* wide = nullptr;
  CHECK(senstir_dataset_builder_finish(b, &wide) == SENSTIR_OK);
  const int extra_mid[1] = {1};
  senstir_metric* rank2 = nullptr;
  CHECK(senstir_metric_fit(wide, "ridge", 2, extra_mid, 1, "squared", &rank2) == SENSTIR_OK);
  CHECK(senstir_metric_dim(rank2) == 3);
  CHECK(senstir_metric_rank(rank2) == 2);
  senstir_metric_free(rank2);
  senstir_dataset_free(wide);

  senstir_metric* bad = nullptr;
  CHECK(senstir_metric_fit(train, "pca", -1, nullptr, 0, "euclidean", &bad) ==
        SENSTIR_E_INVALID);

  senstir_train_config cfg;
  senstir_train_config_defaults(&cfg);
  cfg.epochs = 40;
  cfg.mc_samples = 3;
  cfg.rho = 0.001;
  cfg.seed = 5;
  senstir_model* model = nullptr;
  CHECK(senstir_train(&cfg, train, metric, "senstir", &model) == SENSTIR_OK);
  CHECK(senstir_model_feature_dim(model) == 2);
  CHECK(senstir_model_history_len(model) == 40);
  CHECK(std::strcmp(senstir_model_variant(model), "senstir") == 0);
  CHECK(senstir_model_rho(model) == 0.001);
  CHECK(senstir_model_epsilon(model) == 0.001);
  CHECK(senstir_model_seed(model) == 5);

  double theta[2] = {0.0, 0.0};
  CHECK(senstir_model_theta(model, theta, 2) == SENSTIR_OK);
  CHECK(std::isfinite(theta[0]) && std::isfinite(theta[1]));
  CHECK(senstir_model_theta(model, theta, 3) == SENSTIR_E_INVALID);

  double history[40];
  CHECK(senstir_model_history(model, "lambda", history, 40) == SENSTIR_OK);
  for (int i = 0; i < 40; ++i) CHECK(history[i] >= 0.0);
  CHECK(senstir_model_history(model, "mean_dq", history, 40) == SENSTIR_OK);
  CHECK(senstir_model_history(model, "nope", history, 40) == SENSTIR_E_INVALID);
  CHECK(senstir_model_history(model, "lambda", history, 7) == SENSTIR_E_INVALID);

  double ratio = -1.0;
  CHECK(senstir_model_weight_ratio(model, &ratio) == SENSTIR_OK);
  CHECK(ratio >= 0.0);

  const std::string model_path = tmp_path("model.json");
  CHECK(senstir_model_save(model, model_path.c_str()) == SENSTIR_OK);
  senstir_model* reloaded = nullptr;
  CHECK(senstir_model_load(model_path.c_str(), &reloaded) == SENSTIR_OK);
  double theta2[2] = {0.0, 0.0};
  CHECK(senstir_model_theta(reloaded, theta2, 2) == SENSTIR_OK);
  CHECK(theta[0] == theta2[0] && theta[1] == theta2[1]);
  CHECK(std::strcmp(senstir_model_variant(reloaded), "senstir") == 0);

  // training the senstir variant with rho > 0 demands a metric
  senstir_model* no_metric = nullptr;
  CHECK(senstir_train(&cfg, train, nullptr, "senstir", &no_metric) == SENSTIR_E_INVALID);
  CHECK(senstir_train(&cfg, train, metric, "frobnicate", &no_metric) == SENSTIR_E_INVALID);
  CHECK(senstir_train(nullptr, train, metric, "senstir", &no_metric) == SENSTIR_E_INVALID);

  senstir_eval_options opt;
  senstir_eval_options_defaults(&opt);
  opt.pl_samples = 10;
  senstir_eval_summary summary;
  CHECK(senstir_evaluate(model, test, metric2, &opt, &summary) == SENSTIR_OK);
  CHECK(summary.ndcg_stochastic > 0.0 && summary.ndcg_stochastic <= 1.0);
  CHECK(std::isnan(summary.kendall_tau));
  CHECK(std::isnan(summary.exposure_disparity));

  opt.hypothetical = "nearest-fair-neighbor";
  opt.exposure = 1;
  // metric omitted: evaluation falls back to the subspace stored in the model
  CHECK(senstir_evaluate(model, test, nullptr, &opt, &summary) == SENSTIR_OK);
  CHECK(summary.kendall_tau >= -1.0 && summary.kendall_tau <= 1.0);
  CHECK(summary.kendall_tau_weighted >= -1.0 && summary.kendall_tau_weighted <= 1.0);
  CHECK(summary.exposure_disparity >= 0.0);

  opt.hypothetical = "group-flip:1";
  CHECK(senstir_evaluate(model, test, nullptr, &opt, &summary) == SENSTIR_OK);
  opt.hypothetical = "group-flip:x";
  CHECK(senstir_evaluate(model, test, nullptr, &opt, &summary) == SENSTIR_E_INVALID);
  opt.hypothetical = "sideways";
  CHECK(senstir_evaluate(model, test, nullptr, &opt, &summary) == SENSTIR_E_INVALID);

  // a model without a stored subspace cannot run nearest-fair-neighbor bare
  senstir_train_config base_cfg;
  senstir_train_config_defaults(&base_cfg);
  base_cfg.epochs = 5;
  base_cfg.mc_samples = 2;
  senstir_model* baseline = nullptr;
  CHECK(senstir_train(&base_cfg, train, nullptr, "baseline", &baseline) == SENSTIR_OK);
  opt.hypothetical = "nearest-fair-neighbor";
  opt.exposure = 0;
  CHECK(senstir_evaluate(baseline, test, nullptr, &opt, &summary) == SENSTIR_E_INVALID);
  double no_ratio = 0.0;
  CHECK(senstir_model_weight_ratio(baseline, &no_ratio) == SENSTIR_E_INVALID);

  senstir_model_free(baseline);
  senstir_model_free(reloaded);
  senstir_model_free(model);
  senstir_metric_free(metric2);
  senstir_metric_free(metric);
  senstir_dataset_free(test);
  senstir_dataset_free(train);
}

void test_report() {
  const std::string path = tmp_path("report.csv");
  CHECK(senstir_report_write(path.c_str(), nullptr, 0) == SENSTIR_OK);
  CHECK(slurp(path) ==
        "variant,rho,epsilon,seed,ndcg_stochastic,kendall_tau,kendall_tau_weighted,"
        "exposure_disparity\n");

  const double nan = std::nan("");
  senstir_report_row rows[2];
  rows[0] = {"baseline", 0.0, 0.001, 1, 0.9, nan, nan, nan, nan};
  rows[1] = {"senstir", 0.001, 0.001, 1, 0.85, 0.75, 0.5, 0.125, 0.25};
  CHECK(senstir_report_write(path.c_str(), rows, 2) == SENSTIR_OK);
  const std::string text = slurp(path);
  CHECK(text.find(",weight_ratio\n") != std::string::npos);
  CHECK(text.find("baseline,0,0.001,1,0.9,,,,\n") != std::string::npos);
  CHECK(text.find("senstir,0.001,0.001,1,0.85,0.75,0.5,0.125,0.25\n") != std::string::npos);

  CHECK(senstir_report_write(nullptr, rows, 2) == SENSTIR_E_INVALID);
  CHECK(senstir_report_write(path.c_str(), nullptr, 2) == SENSTIR_E_INVALID);
  rows[0].variant = nullptr;
  CHECK(senstir_report_write(path.c_str(), rows, 2) == SENSTIR_E_INVALID);
}

void test_ips() {
  senstir_dataset* data = binary_dataset();
  const std::string path = tmp_path("ips.csv");
  CHECK(senstir_ips_eval(data, 1.0, 0.1, 200, 9, path.c_str()) == SENSTIR_OK);
  const std::string text = slurp(path);
  CHECK(text.find("query_id,items,truth,basic_mean,ips_mean,basic_abs_err,ips_abs_err\n") == 0);
  int lines = 0;
  for (char ch : text) lines += ch == '\n';
  CHECK(lines == 1 + senstir_dataset_num_queries(data));

  CHECK(senstir_ips_eval(data, -1.0, 0.1, 10, 9, path.c_str()) == SENSTIR_E_INVALID);
  CHECK(senstir_ips_eval(data, 1.0, 0.0, 10, 9, path.c_str()) == SENSTIR_E_INVALID);
  CHECK(senstir_ips_eval(data, 1.0, 0.1, 0, 9, path.c_str()) == SENSTIR_E_INVALID);
  CHECK(senstir_ips_eval(nullptr, 1.0, 0.1, 10, 9, path.c_str()) == SENSTIR_E_INVALID);
  senstir_dataset_free(data);

  // graded relevances cannot drive the binary click model
  senstir_dataset* graded = nullptr;
  CHECK(senstir_dataset_synthetic(3, "x", 4, 5, 0.8, &graded) == SENSTIR_OK);
  CHECK(senstir_ips_eval(graded, 1.0, 0.1, 10, 9, path.c_str()) == SENSTIR_E_DATA);
  senstir_dataset_free(graded);
}

void test_last_error_lifecycle() {
  senstir_dataset* data = nullptr;
  CHECK(senstir_dataset_synthetic(1, "x", 0, 5, 0.8, &data) == SENSTIR_E_INVALID);
  CHECK(std::strlen(senstir_last_error()) > 0);
  CHECK(senstir_dataset_synthetic(1, "x", 2, 5, 0.8, &data) == SENSTIR_OK);
  CHECK(std::strlen(senstir_last_error()) == 0);  // cleared by the next success
  senstir_dataset_free(data);
}

}  // namespace

int main() {
  test_defaults();
  test_datasets();
  test_builder();
  test_metric_and_train();
  test_report();
  test_ips();
  test_last_error_lifecycle();
  if (failures > 0) {
    std::fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  std::puts("all C API checks passed");
  return 0;
}
