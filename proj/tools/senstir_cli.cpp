#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "senstir/capi.h"

namespace {

using nlohmann::json;

int exit_code_for(senstir_status st) {
  switch (st) {
    case SENSTIR_OK: return 0;
    case SENSTIR_E_INVALID: return 2;
    case SENSTIR_E_NUMERIC: return 4;
    default: return 3;  // data and io problems
  }
}

int fail_status(senstir_status st) {
  std::cerr << "error: " << senstir_last_error() << "\n";
  return exit_code_for(st);
}

#define TRY(expr)                                                      \
  do {                                                                 \
    if (const senstir_status st_ = (expr); st_ != SENSTIR_OK)          \
      return fail_status(st_);                                         \
  } while (0)

using DatasetPtr = std::unique_ptr<senstir_dataset, void (*)(senstir_dataset*)>;
using MetricPtr = std::unique_ptr<senstir_metric, void (*)(senstir_metric*)>;
using ModelPtr = std::unique_ptr<senstir_model, void (*)(senstir_model*)>;

DatasetPtr own(senstir_dataset* p) { return {p, senstir_dataset_free}; }
MetricPtr own(senstir_metric* p) { return {p, senstir_metric_free}; }
ModelPtr own(senstir_model* p) { return {p, senstir_model_free}; }

std::string fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) return "unreadable";
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a:") + hex;
}

// One manifest per command: what ran, with which knobs, on which inputs
// (content-hashed), producing which files. Reruns differ only in wall time.
struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  json config = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  Manifest(std::string cmd, std::uint64_t s) : command(std::move(cmd)), seed(s) {}

  int write(const std::string& path) const {
    json j;
    j["command"] = command;
    j["seed"] = seed;
    j["config"] = config;
    json in = json::object();
    for (const std::string& p : inputs) in[p] = fnv1a_file(p);
    j["inputs"] = std::move(in);
    j["outputs"] = outputs;
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    j["wall_time_seconds"] = elapsed.count();
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) {
      std::cerr << "error: cannot write manifest " << path << "\n";
      return 3;
    }
    out << j.dump(2) << '\n';
    return 0;
  }
};

std::vector<std::string> split(const std::string& text, char delim) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, delim)) parts.push_back(part);
  if (!text.empty() && text.back() == delim) parts.push_back("");
  return parts;
}

// ---------------------------------------------------------------- synth-gen

int cmd_synth_gen(const std::string& out_base, int queries, int items, double majority_prob,
                  std::uint64_t seed) {
  Manifest manifest("synth-gen", seed);
  manifest.config = {{"queries", queries},
                     {"items", items},
                     {"majority_prob", majority_prob},
                     {"seed", seed}};
  const std::string train_path = out_base + ".train.jsonl";
  const std::string test_path = out_base + ".test.jsonl";
  for (const auto& [label, path] : {std::pair{"train", train_path}, {"test", test_path}}) {
    senstir_dataset* raw = nullptr;
    TRY(senstir_dataset_synthetic(seed, label, queries, items, majority_prob, &raw));
    auto data = own(raw);
    TRY(senstir_dataset_save(data.get(), path.c_str()));
    manifest.outputs.push_back(path);
  }
  return manifest.write(out_base + ".manifest.json");
}

// ---------------------------------------------------------------- pool-build

int cmd_pool_build(const std::string& pool_path, const std::string& out, int queries,
                   int query_size, bool stratified, double target_relevant,
                   std::uint64_t seed) {
  Manifest manifest("pool-build", seed);
  manifest.config = {{"pool", pool_path},       {"queries", queries},
                     {"query_size", query_size}, {"stratified", stratified},
                     {"target_relevant", target_relevant}, {"seed", seed}};
  manifest.inputs = {pool_path};
  senstir_dataset* raw = nullptr;
  TRY(senstir_dataset_load(pool_path.c_str(), &raw));
  auto pool = own(raw);
  senstir_dataset* built = nullptr;
  TRY(senstir_dataset_from_pool(pool.get(), query_size, queries, stratified ? 1 : 0,
                                target_relevant, seed, &built));
  auto data = own(built);
  TRY(senstir_dataset_save(data.get(), out.c_str()));
  manifest.outputs = {out};
  return manifest.write(out + ".manifest.json");
}

// --------------------------------------------------------------- german-prep

// Generic tabular preprocessing in the German-credit style: declared
// categoricals are one-hot encoded (a missing token becomes its own
// category), declared numerics are standardized, the label column becomes a
// binary relevance and the group column a binary group. The result is a
// single-query "pool" dataset plus a column-layout file.
int cmd_german_prep(const std::string& csv_path, const std::string& out, char delimiter,
                    const std::string& label_col, const std::string& positive_label,
                    const std::string& group_col, const std::string& group_positive,
                    const std::vector<std::string>& categorical,
                    const std::vector<std::string>& numeric, const std::string& missing_token) {
  Manifest manifest("german-prep", 0);
  manifest.config = {{"csv", csv_path},
                     {"label", label_col},
                     {"positive_label", positive_label},
                     {"group", group_col},
                     {"group_positive", group_positive},
                     {"categorical", categorical},
                     {"numeric", numeric},
                     {"missing_token", missing_token},
                     {"delimiter", std::string(1, delimiter)}};
  manifest.inputs = {csv_path};

  std::ifstream in(csv_path, std::ios::binary);
  if (!in.is_open()) {
    std::cerr << "error: cannot open " << csv_path << "\n";
    return 3;
  }
  std::string line;
  if (!std::getline(in, line)) {
    std::cerr << "error: empty csv\n";
    return 3;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split(line, delimiter);
  std::map<std::string, int> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) col_index[header[i]] = static_cast<int>(i);
  const auto find_col = [&](const std::string& name) -> int {
    const auto it = col_index.find(name);
    if (it == col_index.end()) {
      std::cerr << "error: csv has no column '" << name << "'\n";
      return -1;
    }
    return it->second;
  };
  const int label_idx = find_col(label_col);
  const int group_idx = group_col.empty() ? -2 : find_col(group_col);
  if (label_idx < 0 || group_idx == -1) return 3;
  std::vector<int> cat_idx, num_idx;
  for (const auto& c : categorical) {
    const int i = find_col(c);
    if (i < 0) return 3;
    cat_idx.push_back(i);
  }
  for (const auto& c : numeric) {
    const int i = find_col(c);
    if (i < 0) return 3;
    num_idx.push_back(i);
  }

  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line, delimiter);
    if (cells.size() != header.size()) {
      std::cerr << "error: line " << line_no << " has " << cells.size() << " cells, expected "
                << header.size() << "\n";
      return 3;
    }
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) {
    std::cerr << "error: csv has no data rows\n";
    return 3;
  }

  // Category vocabularies in sorted order; the missing token is just another
  // category when present.
  std::vector<std::vector<std::string>> vocab(cat_idx.size());
  for (std::size_t c = 0; c < cat_idx.size(); ++c) {
    std::set<std::string> values;
    for (const auto& row : rows) values.insert(row[cat_idx[c]]);
    vocab[c].assign(values.begin(), values.end());
  }

  const std::size_t dim = num_idx.size() +
                          [&] {
                            std::size_t total = 0;
                            for (const auto& v : vocab) total += v.size();
                            return total;
                          }();
  std::vector<std::vector<double>> features(rows.size(), std::vector<double>(dim, 0.0));
  std::vector<double> rels(rows.size());
  std::vector<int> groups(rows.size(), -1);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    std::size_t f = 0;
    for (std::size_t c = 0; c < num_idx.size(); ++c, ++f) {
      const std::string& cell = row[num_idx[c]];
      try {
        features[r][f] = std::stod(cell);
      } catch (const std::exception&) {
        std::cerr << "error: line " << r + 2 << ": numeric column '" << numeric[c]
                  << "' has non-numeric value '" << cell << "'\n";
        return 3;
      }
    }
    for (std::size_t c = 0; c < cat_idx.size(); ++c) {
      const auto& values = vocab[c];
      const auto it = std::find(values.begin(), values.end(), row[cat_idx[c]]);
      features[r][f + (it - values.begin())] = 1.0;
      f += values.size();
    }
    rels[r] = row[label_idx] == positive_label ? 1.0 : 0.0;
    if (group_idx >= 0) groups[r] = row[group_idx] == group_positive ? 1 : 0;
  }

  // Standardize the numeric block (mean 0, population sd 1).
  for (std::size_t c = 0; c < num_idx.size(); ++c) {
    double mean = 0.0;
    for (const auto& fr : features) mean += fr[c];
    mean /= rows.size();
    double var = 0.0;
    for (const auto& fr : features) var += (fr[c] - mean) * (fr[c] - mean);
    const double sd = std::sqrt(var / rows.size());
    const double scale = sd < 1e-12 ? 1.0 : sd;
    for (auto& fr : features) fr[c] = (fr[c] - mean) / scale;
  }

  senstir_dataset_builder* builder = nullptr;
  TRY(senstir_dataset_builder_new(&builder));
  TRY(senstir_dataset_builder_add_query(builder, "pool"));
  for (std::size_t r = 0; r < rows.size(); ++r)
    TRY(senstir_dataset_builder_add_item(builder, features[r].data(),
                                         static_cast<int>(dim), rels[r], groups[r]));
  senstir_dataset* raw = nullptr;
  TRY(senstir_dataset_builder_finish(builder, &raw));
  auto data = own(raw);
  TRY(senstir_dataset_save(data.get(), out.c_str()));

  json columns = json::array();
  for (const auto& n : numeric) columns.push_back(n);
  for (std::size_t c = 0; c < cat_idx.size(); ++c)
    for (const auto& v : vocab[c]) columns.push_back(categorical[c] + "=" + v);
  const std::string columns_path = out + ".columns.json";
  {
    std::ofstream cols(columns_path, std::ios::binary);
    if (!cols.is_open()) {
      std::cerr << "error: cannot write " << columns_path << "\n";
      return 3;
    }
    cols << columns.dump(2) << '\n';
  }
  manifest.outputs = {out, columns_path};
  return manifest.write(out + ".manifest.json");
}

// -------------------------------------------------------------- letor-import

int cmd_letor_import(const std::string& in, const std::string& out, int min_docs,
                     int require_max_rel, int sample_docs, const std::vector<int>& binary_ids,
                     bool standardize, const std::string& stats_in,
                     const std::string& stats_out, std::uint64_t seed) {
  Manifest manifest("letor-import", seed);
  manifest.config = {{"in", in},
                     {"min_docs", min_docs},
                     {"require_max_rel", require_max_rel},
                     {"sample_docs", sample_docs},
                     {"binary_ids", binary_ids},
                     {"standardize", standardize},
                     {"stats_in", stats_in},
                     {"seed", seed}};
  manifest.inputs = {in};
  if (!stats_in.empty()) manifest.inputs.push_back(stats_in);
  senstir_dataset* raw = nullptr;
  TRY(senstir_dataset_letor(in.c_str(), min_docs, require_max_rel, sample_docs,
                            binary_ids.data(), static_cast<int>(binary_ids.size()),
                            standardize ? 1 : 0, stats_in.empty() ? nullptr : stats_in.c_str(),
                            stats_out.empty() ? nullptr : stats_out.c_str(), seed, &raw));
  auto data = own(raw);
  TRY(senstir_dataset_save(data.get(), out.c_str()));
  manifest.outputs = {out};
  if (!stats_out.empty()) manifest.outputs.push_back(stats_out);
  return manifest.write(out + ".manifest.json");
}

// ---------------------------------------------------------------- metric-fit

int cmd_metric_fit(const std::string& data_path, const std::string& target,
                   const std::string& method, const std::vector<int>& extra_basis,
                   const std::string& mode, const std::string& out) {
  int target_column = -1;
  if (target != "group") {
    if (target.rfind("column:", 0) != 0) {
      std::cerr << "error: --target must be 'group' or 'column:<index>'\n";
      return 2;
    }
    try {
      target_column = std::stoi(target.substr(7));
    } catch (const std::exception&) {
      std::cerr << "error: bad column index in --target\n";
      return 2;
    }
    if (target_column < 0) {
      std::cerr << "error: bad column index in --target\n";
      return 2;
    }
  }
  Manifest manifest("metric-fit", 0);
  manifest.config = {{"data", data_path}, {"target", target},       {"method", method},
                     {"extra_basis", extra_basis}, {"mode", mode}};
  manifest.inputs = {data_path};
  senstir_dataset* raw = nullptr;
  TRY(senstir_dataset_load(data_path.c_str(), &raw));
  auto data = own(raw);
  senstir_metric* fitted = nullptr;
  TRY(senstir_metric_fit(data.get(), method.c_str(), target_column, extra_basis.data(),
                         static_cast<int>(extra_basis.size()), mode.c_str(), &fitted));
  auto metric = own(fitted);
  TRY(senstir_metric_save(metric.get(), out.c_str()));
  std::cout << "fitted subspace rank " << senstir_metric_rank(metric.get()) << " in dimension "
            << senstir_metric_dim(metric.get()) << "\n";
  manifest.outputs = {out};
  return manifest.write(out + ".manifest.json");
}

// --------------------------------------------------------------------- train

struct TrainFlags {
  std::string data, metric, variant = "senstir", out;
  senstir_train_config cfg{};
};

int run_train(const TrainFlags& f, senstir_model** out_model) {
  senstir_dataset* raw = nullptr;
  TRY(senstir_dataset_load(f.data.c_str(), &raw));
  auto data = own(raw);
  MetricPtr metric(nullptr, senstir_metric_free);
  if (!f.metric.empty()) {
    senstir_metric* m = nullptr;
    TRY(senstir_metric_load(f.metric.c_str(), &m));
    metric = own(m);
  }
  senstir_train_config cfg = f.cfg;
  if (f.variant != "senstir" && cfg.rho != 0.0) {
    std::cerr << "warning: --rho is ignored for variant " << f.variant << "\n";
    cfg.rho = 0.0;
  }
  TRY(senstir_train(&cfg, data.get(), metric.get(), f.variant.c_str(), out_model));
  return 0;
}

int cmd_train(const TrainFlags& f) {
  Manifest manifest("train", f.cfg.seed);
  manifest.config = {{"data", f.data},        {"metric", f.metric},
                     {"variant", f.variant},  {"rho", f.cfg.rho},
                     {"epsilon", f.cfg.epsilon}, {"epochs", f.cfg.epochs},
                     {"batch_size", f.cfg.batch_size}, {"mc_samples", f.cfg.mc_samples},
                     {"seed", f.cfg.seed}};
  manifest.inputs = {f.data};
  if (!f.metric.empty()) manifest.inputs.push_back(f.metric);
  senstir_model* raw = nullptr;
  if (const int rc = run_train(f, &raw); rc != 0) return rc;
  auto model = own(raw);
  TRY(senstir_model_save(model.get(), f.out.c_str()));
  manifest.outputs = {f.out};
  return manifest.write(f.out + ".manifest.json");
}

// ---------------------------------------------------------------------- eval

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const std::string& metric_path, int samples, const std::string& hypothetical,
             bool exposure, bool tau_by_item_index, std::uint64_t seed,
             const std::string& out) {
  Manifest manifest("eval", seed);
  manifest.config = {{"model", model_path},   {"data", data_path},
                     {"metric", metric_path}, {"samples", samples},
                     {"hypothetical", hypothetical}, {"exposure", exposure},
                     {"tau_by_item_index", tau_by_item_index}, {"seed", seed}};
  manifest.inputs = {model_path, data_path};
  if (!metric_path.empty()) manifest.inputs.push_back(metric_path);

  senstir_model* raw_model = nullptr;
  TRY(senstir_model_load(model_path.c_str(), &raw_model));
  auto model = own(raw_model);
  senstir_dataset* raw_data = nullptr;
  TRY(senstir_dataset_load(data_path.c_str(), &raw_data));
  auto data = own(raw_data);
  MetricPtr metric(nullptr, senstir_metric_free);
  if (!metric_path.empty()) {
    senstir_metric* m = nullptr;
    TRY(senstir_metric_load(metric_path.c_str(), &m));
    metric = own(m);
  }

  senstir_eval_options opt;
  senstir_eval_options_defaults(&opt);
  opt.pl_samples = samples;
  opt.hypothetical = hypothetical.empty() ? nullptr : hypothetical.c_str();
  opt.exposure = exposure ? 1 : 0;
  opt.tau_by_item_index = tau_by_item_index ? 1 : 0;
  opt.seed = seed;
  senstir_eval_summary summary{};
  TRY(senstir_evaluate(model.get(), data.get(), metric.get(), &opt, &summary));

  senstir_report_row row{};
  row.variant = senstir_model_variant(model.get());
  row.rho = senstir_model_rho(model.get());
  row.epsilon = senstir_model_epsilon(model.get());
  row.seed = senstir_model_seed(model.get());
  row.ndcg_stochastic = summary.ndcg_stochastic;
  row.kendall_tau = summary.kendall_tau;
  row.kendall_tau_weighted = summary.kendall_tau_weighted;
  row.exposure_disparity = summary.exposure_disparity;
  row.weight_ratio = std::nan("");
  TRY(senstir_report_write(out.c_str(), &row, 1));
  manifest.outputs = {out};
  return manifest.write(out + ".manifest.json");
}

// --------------------------------------------------------------------- sweep

int cmd_sweep(const TrainFlags& base, const std::string& eval_data_path,
              std::vector<double> rho_grid, int samples, const std::string& hypothetical,
              bool exposure, std::uint64_t eval_seed, const std::string& out) {
  if (rho_grid.empty()) {
    std::cerr << "error: --rho-grid must not be empty\n";
    return 2;
  }
  if (base.metric.empty()) {
    std::cerr << "error: sweep requires --metric\n";
    return 2;
  }
  std::sort(rho_grid.begin(), rho_grid.end());
  Manifest manifest("sweep", base.cfg.seed);
  manifest.config = {{"data", base.data},           {"eval_data", eval_data_path},
                     {"metric", base.metric},       {"rho_grid", rho_grid},
                     {"epochs", base.cfg.epochs},   {"samples", samples},
                     {"hypothetical", hypothetical}, {"exposure", exposure},
                     {"seed", base.cfg.seed},       {"eval_seed", eval_seed}};
  manifest.inputs = {base.data, eval_data_path, base.metric};

  senstir_dataset* raw_eval = nullptr;
  TRY(senstir_dataset_load(eval_data_path.c_str(), &raw_eval));
  auto eval_data = own(raw_eval);

  std::vector<senstir_report_row> rows;
  std::vector<std::string> variants(rho_grid.size());
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    TrainFlags f = base;
    f.variant = "senstir";
    f.cfg.rho = rho_grid[i];
    senstir_model* raw_model = nullptr;
    if (const int rc = run_train(f, &raw_model); rc != 0) return rc;
    auto model = own(raw_model);

    senstir_eval_options opt;
    senstir_eval_options_defaults(&opt);
    opt.pl_samples = samples;
    opt.hypothetical = hypothetical.empty() ? nullptr : hypothetical.c_str();
    opt.exposure = exposure ? 1 : 0;
    opt.seed = eval_seed;
    senstir_eval_summary summary{};
    TRY(senstir_evaluate(model.get(), eval_data.get(), nullptr, &opt, &summary));
    double weight_ratio = std::nan("");
    TRY(senstir_model_weight_ratio(model.get(), &weight_ratio));

    variants[i] = senstir_model_variant(model.get());
    senstir_report_row row{};
    row.variant = variants[i].c_str();
    row.rho = rho_grid[i];
    row.epsilon = base.cfg.epsilon;
    row.seed = base.cfg.seed;
    row.ndcg_stochastic = summary.ndcg_stochastic;
    row.kendall_tau = summary.kendall_tau;
    row.kendall_tau_weighted = summary.kendall_tau_weighted;
    row.exposure_disparity = summary.exposure_disparity;
    row.weight_ratio = weight_ratio;
    rows.push_back(row);
  }
  TRY(senstir_report_write(out.c_str(), rows.data(), static_cast<int>(rows.size())));
  manifest.outputs = {out};
  return manifest.write(out + ".manifest.json");
}

// ------------------------------------------------------------------ ips-eval

int cmd_ips_eval(const std::string& data_path, double eta, double floor, int draws,
                 std::uint64_t seed, const std::string& out) {
  Manifest manifest("ips-eval", seed);
  manifest.config = {{"data", data_path}, {"eta", eta},   {"floor", floor},
                     {"draws", draws},    {"seed", seed}};
  manifest.inputs = {data_path};
  senstir_dataset* raw = nullptr;
  TRY(senstir_dataset_load(data_path.c_str(), &raw));
  auto data = own(raw);
  TRY(senstir_ips_eval(data.get(), eta, floor, draws, seed, out.c_str()));
  manifest.outputs = {out};
  return manifest.write(out + ".manifest.json");
}

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  senstir_train_config_defaults(&f.cfg);
  cmd->add_option("--data", f.data, "training dataset (JSON lines)")->required();
  cmd->add_option("--metric", f.metric, "fitted fair-metric file");
  cmd->add_option("--rho", f.cfg.rho, "fair regularization strength");
  cmd->add_option("--epsilon", f.cfg.epsilon, "transport budget");
  cmd->add_option("--epochs", f.cfg.epochs, "number of minibatch updates");
  cmd->add_option("--batch-size", f.cfg.batch_size, "queries per batch");
  cmd->add_option("--mc-samples", f.cfg.mc_samples, "Monte-Carlo draws per query");
  cmd->add_option("--lambda-init", f.cfg.lambda_init, "initial dual variable");
  cmd->add_option("--lambda-step", f.cfg.lambda_step, "dual step size");
  cmd->add_option("--theta-step", f.cfg.theta_step, "policy learning rate");
  cmd->add_option("--attack-subspace-steps", f.cfg.attack_subspace_steps,
                  "subspace attack steps");
  cmd->add_option("--attack-subspace-lr", f.cfg.attack_subspace_lr, "subspace attack rate");
  cmd->add_option("--attack-full-steps", f.cfg.attack_full_steps, "full attack steps");
  cmd->add_option("--attack-full-lr", f.cfg.attack_full_lr, "full attack rate");
  cmd->add_option("--fair-start-frac", f.cfg.fair_start_frac,
                  "fraction of epochs trained before the fair term starts");
  cmd->add_option("--l2", f.cfg.l2, "weight decay");
  cmd->add_option("--weight-init-range", f.cfg.weight_init_range, "uniform init half-width");
  cmd->add_option("--seed", f.cfg.seed, "random seed");
  cmd->add_flag_callback("--sgd", [&f] { f.cfg.use_sgd = 1; }, "plain SGD instead of Adam");
  cmd->add_flag_callback("--no-warm-start-attacks", [&f] { f.cfg.warm_start_attacks = 0; },
                         "restart each attack from scratch every epoch");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"senstir: individually fair learning-to-rank"};
  app.require_subcommand(1);
  std::function<int()> run;

  // synth-gen
  {
    auto* cmd = app.add_subcommand("synth-gen", "generate the synthetic train/test corpus");
    auto out = std::make_shared<std::string>();
    auto queries = std::make_shared<int>(100);
    auto items = std::make_shared<int>(10);
    auto majority = std::make_shared<double>(0.8);
    auto seed = std::make_shared<std::uint64_t>(0);
    cmd->add_option("--out", *out, "output base path")->required();
    cmd->add_option("--queries", *queries, "queries per split");
    cmd->add_option("--items", *items, "items per query");
    cmd->add_option("--majority-prob", *majority, "majority group probability");
    cmd->add_option("--seed", *seed, "random seed");
    cmd->callback([=, &run] {
      run = [=] { return cmd_synth_gen(*out, *queries, *items, *majority, *seed); };
    });
  }

  // pool-build
  {
    auto* cmd = app.add_subcommand("pool-build", "sample queries from a pool dataset");
    auto pool = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto queries = std::make_shared<int>(0);
    auto query_size = std::make_shared<int>(10);
    auto stratified = std::make_shared<bool>(false);
    auto target = std::make_shared<double>(4.0);
    auto seed = std::make_shared<std::uint64_t>(0);
    cmd->add_option("--pool", *pool, "pool dataset (JSON lines)")->required();
    cmd->add_option("--out", *out, "output dataset path")->required();
    cmd->add_option("--queries", *queries, "number of queries")->required();
    cmd->add_option("--query-size", *query_size, "items per query");
    cmd->add_flag("--stratified", *stratified, "fix the expected relevant count per query");
    cmd->add_option("--target-relevant", *target, "expected relevant items per query");
    cmd->add_option("--seed", *seed, "random seed");
    cmd->callback([=, &run] {
      run = [=] {
        return cmd_pool_build(*pool, *out, *queries, *query_size, *stratified, *target, *seed);
      };
    });
  }

  // german-prep
  {
    auto* cmd = app.add_subcommand(
        "german-prep", "preprocess a labeled CSV into a pool dataset (one-hot + standardize)");
    auto csv = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto delim = std::make_shared<std::string>(",");
    auto label = std::make_shared<std::string>();
    auto positive = std::make_shared<std::string>("1");
    auto group = std::make_shared<std::string>();
    auto group_positive = std::make_shared<std::string>("1");
    auto categorical = std::make_shared<std::vector<std::string>>();
    auto numeric = std::make_shared<std::vector<std::string>>();
    auto missing = std::make_shared<std::string>("NA");
    cmd->add_option("--csv", *csv, "input CSV with a header row")->required();
    cmd->add_option("--out", *out, "output pool dataset path")->required();
    cmd->add_option("--delimiter", *delim, "cell delimiter (one character)");
    cmd->add_option("--label", *label, "label column name")->required();
    cmd->add_option("--positive-label", *positive, "label value mapped to relevance 1");
    cmd->add_option("--group", *group, "group column name (optional)");
    cmd->add_option("--group-positive", *group_positive, "group value mapped to group 1");
    cmd->add_option("--categorical", *categorical, "categorical columns")->delimiter(',');
    cmd->add_option("--numeric", *numeric, "numeric columns to standardize")->delimiter(',');
    cmd->add_option("--missing-token", *missing, "token treated as its own category");
    cmd->callback([=, &run] {
      run = [=]() -> int {
        if (delim->size() != 1) {
          std::cerr << "error: --delimiter must be one character\n";
          return 2;
        }
        return cmd_german_prep(*csv, *out, (*delim)[0], *label, *positive, *group,
                               *group_positive, *categorical, *numeric, *missing);
      };
    });
  }

  // letor-import
  {
    auto* cmd = app.add_subcommand("letor-import", "parse a LETOR text file into a dataset");
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto min_docs = std::make_shared<int>(1);
    auto require_max_rel = std::make_shared<int>(-1);
    auto sample_docs = std::make_shared<int>(-1);
    auto binary_ids = std::make_shared<std::vector<int>>();
    auto no_standardize = std::make_shared<bool>(false);
    auto stats_in = std::make_shared<std::string>();
    auto stats_out = std::make_shared<std::string>();
    auto seed = std::make_shared<std::uint64_t>(0);
    cmd->add_option("--in", *in, "LETOR text file")->required();
    cmd->add_option("--out", *out, "output dataset path")->required();
    cmd->add_option("--min-docs", *min_docs, "drop queries with fewer documents");
    cmd->add_option("--require-max-rel", *require_max_rel,
                    "drop queries lacking this relevance grade (-1 = off)");
    cmd->add_option("--sample-docs", *sample_docs, "per-query subsample size (-1 = off)");
    cmd->add_option("--binary-ids", *binary_ids, "1-based feature ids left unstandardized")
        ->delimiter(',');
    cmd->add_flag("--no-standardize", *no_standardize, "keep raw feature values");
    cmd->add_option("--stats-in", *stats_in, "reuse standardizer statistics from this file");
    cmd->add_option("--stats-out", *stats_out, "save fitted standardizer statistics here");
    cmd->add_option("--seed", *seed, "random seed for subsampling");
    cmd->callback([=, &run] {
      run = [=] {
        return cmd_letor_import(*in, *out, *min_docs, *require_max_rel, *sample_docs,
                                *binary_ids, !*no_standardize, *stats_in, *stats_out, *seed);
      };
    });
  }

  // metric-fit
  {
    auto* cmd = app.add_subcommand("metric-fit", "fit a sensitive subspace / fair metric");
    auto data = std::make_shared<std::string>();
    auto target = std::make_shared<std::string>();
    auto method = std::make_shared<std::string>("logistic");
    auto extra = std::make_shared<std::vector<int>>();
    auto mode = std::make_shared<std::string>("euclidean");
    auto out = std::make_shared<std::string>();
    cmd->add_option("--data", *data, "dataset (JSON lines)")->required();
    cmd->add_option("--target", *target, "'group' or 'column:<index>'")->required();
    cmd->add_option("--method", *method, "logistic or ridge");
    cmd->add_option("--extra-basis", *extra, "feature columns added as basis directions")
        ->delimiter(',');
    cmd->add_option("--mode", *mode, "euclidean or squared item distance");
    cmd->add_option("--out", *out, "output metric path")->required();
    cmd->callback([=, &run] {
      run = [=] { return cmd_metric_fit(*data, *target, *method, *extra, *mode, *out); };
    });
  }

  // train
  {
    auto* cmd = app.add_subcommand("train", "train a ranking policy");
    auto flags = std::make_shared<TrainFlags>();
    add_train_flags(cmd, *flags);
    cmd->add_option("--variant", flags->variant, "senstir, baseline, project or random");
    cmd->add_option("--out", flags->out, "output model path")->required();
    cmd->callback([=, &run] {
      run = [=] { return cmd_train(*flags); };
    });
  }

  // eval
  {
    auto* cmd = app.add_subcommand("eval", "evaluate a model on a dataset");
    auto model = std::make_shared<std::string>();
    auto data = std::make_shared<std::string>();
    auto metric = std::make_shared<std::string>();
    auto samples = std::make_shared<int>(25);
    auto hypothetical = std::make_shared<std::string>();
    auto exposure = std::make_shared<bool>(false);
    auto tau_item = std::make_shared<bool>(false);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--model", *model, "model file")->required();
    cmd->add_option("--data", *data, "dataset (JSON lines)")->required();
    cmd->add_option("--metric", *metric, "fair-metric file (else the model's subspace)");
    cmd->add_option("--samples", *samples, "Plackett-Luce draws per query");
    cmd->add_option("--hypothetical", *hypothetical,
                    "none, group-flip:<column> or nearest-fair-neighbor");
    cmd->add_flag("--exposure", *exposure, "also compute group exposure disparity");
    cmd->add_flag("--tau-by-item-index", *tau_item, "weighted tau by item index");
    cmd->add_option("--seed", *seed, "sampling seed");
    cmd->add_option("--out", *out, "output report CSV")->required();
    cmd->callback([=, &run] {
      run = [=] {
        return cmd_eval(*model, *data, *metric, *samples, *hypothetical, *exposure, *tau_item,
                        *seed, *out);
      };
    });
  }

  // sweep
  {
    auto* cmd = app.add_subcommand("sweep", "train and evaluate across a rho grid");
    auto flags = std::make_shared<TrainFlags>();
    add_train_flags(cmd, *flags);
    auto eval_data = std::make_shared<std::string>();
    auto rho_grid = std::make_shared<std::vector<double>>();
    auto samples = std::make_shared<int>(25);
    auto hypothetical = std::make_shared<std::string>("nearest-fair-neighbor");
    auto exposure = std::make_shared<bool>(false);
    auto eval_seed = std::make_shared<std::uint64_t>(0);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--eval-data", *eval_data, "held-out dataset")->required();
    cmd->add_option("--rho-grid", *rho_grid, "rho values to sweep")
        ->delimiter(',')
        ->required();
    cmd->add_option("--samples", *samples, "Plackett-Luce draws per query");
    cmd->add_option("--hypothetical", *hypothetical,
                    "hypothetical used for the stability columns");
    cmd->add_flag("--exposure", *exposure, "also compute group exposure disparity");
    cmd->add_option("--eval-seed", *eval_seed, "sampling seed for evaluation");
    cmd->add_option("--out", *out, "output report CSV")->required();
    cmd->callback([=, &run] {
      run = [=] {
        return cmd_sweep(*flags, *eval_data, *rho_grid, *samples, *hypothetical, *exposure,
                         *eval_seed, *out);
      };
    });
  }

  // ips-eval
  {
    auto* cmd = app.add_subcommand("ips-eval",
                                   "compare naive and inverse-propensity estimates on "
                                   "simulated clicks");
    auto data = std::make_shared<std::string>();
    auto eta = std::make_shared<double>(1.0);
    auto floor = std::make_shared<double>(1e-6);
    auto draws = std::make_shared<int>(0);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--data", *data, "dataset with binary relevances")->required();
    cmd->add_option("--eta", *eta, "propensity exponent");
    cmd->add_option("--floor", *floor, "propensity floor");
    cmd->add_option("--draws", *draws, "click simulations per query")->required();
    cmd->add_option("--seed", *seed, "random seed");
    cmd->add_option("--out", *out, "output CSV")->required();
    cmd->callback([=, &run] {
      run = [=] { return cmd_ips_eval(*data, *eta, *floor, *draws, *seed, *out); };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return run ? run() : 2;
}
