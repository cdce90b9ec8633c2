#include "senstir/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace senstir {

using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.is_open(), ErrorCode::io_error, "cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.is_open(), ErrorCode::io_error, "cannot open for reading: " + path);
  return in;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd json_to_vector(const json& arr, const char* what) {
  require(arr.is_array(), ErrorCode::parse_error, std::string(what) + " must be an array");
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    require(arr[i].is_number(), ErrorCode::parse_error, std::string(what) + " must be numeric");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

json doubles_to_json(const std::vector<double>& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

std::vector<double> json_to_doubles(const json& arr, const char* what) {
  require(arr.is_array(), ErrorCode::parse_error, std::string(what) + " must be an array");
  std::vector<double> v;
  v.reserve(arr.size());
  for (const auto& x : arr) {
    require(x.is_number(), ErrorCode::parse_error, std::string(what) + " must be numeric");
    v.push_back(x.get<double>());
  }
  return v;
}

[[noreturn]] void parse_fail(std::size_t line, std::size_t column, const std::string& reason) {
  fail(ErrorCode::parse_error,
       "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + reason);
}

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based position in the line
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    tokens.push_back({line.substr(start, i - start), start + 1});
  }
  return tokens;
}

bool parse_full_double(std::string_view text, double& out) {
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

bool parse_full_int(std::string_view text, int& out) {
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

}  // namespace

Dataset gen_synthetic(const SyntheticSpec& spec, RandomStream& rng) {
  require(spec.num_queries >= 1, ErrorCode::invalid_config, "num_queries must be >= 1");
  require(spec.items_per_query >= 1, ErrorCode::invalid_config, "items_per_query must be >= 1");
  require(spec.majority_prob >= 0.0 && spec.majority_prob <= 1.0, ErrorCode::invalid_config,
          "majority_prob must lie in [0, 1]");
  require(spec.feature_lo <= spec.feature_hi && spec.rel_lo <= spec.rel_hi,
          ErrorCode::invalid_config, "empty feature or relevance range");

  std::vector<Query> queries(spec.num_queries);
  for (int qi = 0; qi < spec.num_queries; ++qi) {
    Query& q = queries[qi];
    q.id = "q" + std::to_string(qi);
    q.items.resize(spec.items_per_query);
    for (Item& item : q.items) {
      const bool majority = rng.bernoulli(spec.majority_prob);
      const double z1 = rng.uniform(spec.feature_lo, spec.feature_hi);
      const double z2 = rng.uniform(spec.feature_lo, spec.feature_hi);
      item.features = Eigen::Vector2d(z1, majority ? z2 : 0.0);
      item.relevance = std::clamp(z1 + z2, spec.rel_lo, spec.rel_hi);
      item.group = majority ? 0 : 1;
    }
  }
  return make_dataset(std::move(queries));
}

Dataset build_queries_from_pool(const PoolSpec& spec, RandomStream& rng) {
  require(!spec.pool.empty(), ErrorCode::empty_pool, "pool is empty");
  require(spec.query_size >= 1, ErrorCode::invalid_config, "query_size must be >= 1");
  require(spec.num_queries >= 1, ErrorCode::invalid_config, "num_queries must be >= 1");

  std::vector<std::size_t> relevant, irrelevant;
  double rel_prob = 0.0;
  if (spec.stratified) {
    require(spec.target_relevant >= 0.0 && spec.target_relevant <= spec.query_size,
            ErrorCode::invalid_config, "target_relevant must lie in [0, query_size]");
    for (std::size_t i = 0; i < spec.pool.size(); ++i)
      (spec.pool[i].relevance > 0.0 ? relevant : irrelevant).push_back(i);
    rel_prob = spec.target_relevant / spec.query_size;
    require(rel_prob == 0.0 || !relevant.empty(), ErrorCode::empty_pool,
            "pool has no relevant items");
    require(rel_prob == 1.0 || !irrelevant.empty(), ErrorCode::empty_pool,
            "pool has no non-relevant items");
  }

  std::vector<Query> queries(spec.num_queries);
  for (int qi = 0; qi < spec.num_queries; ++qi) {
    Query& q = queries[qi];
    q.id = "q" + std::to_string(qi);
    q.items.reserve(spec.query_size);
    for (int j = 0; j < spec.query_size; ++j) {
      std::size_t idx;
      if (spec.stratified) {
        const auto& bucket = rng.bernoulli(rel_prob) ? relevant : irrelevant;
        idx = bucket[rng.uniform_index(bucket.size())];
      } else {
        idx = rng.uniform_index(spec.pool.size());
      }
      q.items.push_back(spec.pool[idx]);
    }
  }
  return make_dataset(std::move(queries));
}

Standardizer Standardizer::fit(const Dataset& data, const std::vector<int>& skip_columns) {
  require(data.feature_dim >= 1 && !data.queries.empty(), ErrorCode::invalid_config,
          "cannot fit a standardizer on an empty dataset");
  const int p = data.feature_dim;
  for (int c : skip_columns)
    require(c >= 0 && c < p, ErrorCode::invalid_config, "skip column out of range");

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  std::size_t n = 0;
  for (const Query& q : data.queries)
    for (const Item& item : q.items) {
      mean += item.features;
      ++n;
    }
  mean /= static_cast<double>(n);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(p);
  for (const Query& q : data.queries)
    for (const Item& item : q.items) var += (item.features - mean).cwiseAbs2();
  var /= static_cast<double>(n);

  Standardizer s;
  s.mean = mean;
  s.scale = var.cwiseSqrt();
  for (int c = 0; c < p; ++c)
    if (s.scale[c] < 1e-12) s.scale[c] = 1.0;
  s.skip_columns = skip_columns;
  std::sort(s.skip_columns.begin(), s.skip_columns.end());
  for (int c : s.skip_columns) {
    s.mean[c] = 0.0;
    s.scale[c] = 1.0;
  }
  return s;
}

Dataset Standardizer::apply(const Dataset& data) const {
  require(data.feature_dim == mean.size() && scale.size() == mean.size(),
          ErrorCode::dimension_mismatch, "standardizer does not match the dataset dimension");
  std::vector<Query> queries = data.queries;
  for (Query& q : queries)
    for (Item& item : q.items)
      item.features = (item.features - mean).cwiseQuotient(scale);
  return make_dataset(std::move(queries));
}

void save_standardizer(const std::string& path, const Standardizer& s) {
  json j;
  j["mean"] = vector_to_json(s.mean);
  j["scale"] = vector_to_json(s.scale);
  j["skip_columns"] = s.skip_columns;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  require(out.good(), ErrorCode::io_error, "write failed: " + path);
}

Standardizer load_standardizer(const std::string& path) {
  auto in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::io_error, "malformed standardizer file " + path + ": " + e.what());
  }
  Standardizer s;
  s.mean = json_to_vector(j.at("mean"), "mean");
  s.scale = json_to_vector(j.at("scale"), "scale");
  s.skip_columns = j.at("skip_columns").get<std::vector<int>>();
  require(s.mean.size() == s.scale.size(), ErrorCode::parse_error,
          "standardizer mean/scale length mismatch");
  return s;
}

namespace {

struct RawDoc {
  double rel = 0.0;
  std::vector<std::pair<int, double>> features;  // 1-based ids
};

struct RawQuery {
  std::string id;
  std::vector<RawDoc> docs;
};

std::vector<RawQuery> parse_letor_lines(std::istream& in, int& max_fid) {
  std::vector<RawQuery> queries;
  std::unordered_map<std::string, std::size_t> index_of;
  max_fid = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view content = line;
    if (const auto hash = content.find('#'); hash != std::string_view::npos)
      content = content.substr(0, hash);
    const auto tokens = tokenize(content);
    if (tokens.empty()) continue;
    if (tokens.size() < 2) parse_fail(line_no, tokens[0].column, "expected `<rel> qid:<id> ...`");

    RawDoc doc;
    if (!parse_full_double(tokens[0].text, doc.rel) || !std::isfinite(doc.rel) || doc.rel < 0.0)
      parse_fail(line_no, tokens[0].column,
                 "invalid relevance '" + std::string(tokens[0].text) + "'");

    const std::string_view qid_tok = tokens[1].text;
    if (qid_tok.substr(0, 4) != "qid:" || qid_tok.size() == 4)
      parse_fail(line_no, tokens[1].column, "expected qid:<id>");
    const std::string qid(qid_tok.substr(4));

    std::unordered_set<int> seen;
    for (std::size_t t = 2; t < tokens.size(); ++t) {
      const std::string_view tok = tokens[t].text;
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
        parse_fail(line_no, tokens[t].column,
                   "expected <feature_id>:<value>, got '" + std::string(tok) + "'");
      int fid = 0;
      if (!parse_full_int(tok.substr(0, colon), fid) || fid < 1)
        parse_fail(line_no, tokens[t].column,
                   "invalid feature id '" + std::string(tok.substr(0, colon)) + "'");
      double value = 0.0;
      if (!parse_full_double(tok.substr(colon + 1), value) || !std::isfinite(value))
        parse_fail(line_no, tokens[t].column + colon + 1,
                   "invalid feature value '" + std::string(tok.substr(colon + 1)) + "'");
      if (!seen.insert(fid).second)
        parse_fail(line_no, tokens[t].column, "duplicate feature id " + std::to_string(fid));
      doc.features.emplace_back(fid, value);
      max_fid = std::max(max_fid, fid);
    }

    const auto [it, fresh] = index_of.emplace(qid, queries.size());
    if (fresh) queries.push_back(RawQuery{qid, {}});
    queries[it->second].docs.push_back(std::move(doc));
  }
  return queries;
}

LetorResult finish_letor(std::vector<RawQuery> raw, int max_fid, const LetorOptions& opt,
                         RandomStream& rng) {
  require(opt.min_docs >= 1, ErrorCode::invalid_config, "min_docs must be >= 1");
  if (opt.sample_docs) require(*opt.sample_docs >= 1, ErrorCode::invalid_config,
                               "sample_docs must be >= 1");
  require(!raw.empty(), ErrorCode::empty_after_filter, "no documents in input");
  require(max_fid >= 1, ErrorCode::empty_after_filter, "no features in input");

  std::erase_if(raw, [&](const RawQuery& q) {
    return static_cast<int>(q.docs.size()) < opt.min_docs;
  });
  require(!raw.empty(), ErrorCode::empty_after_filter, "no queries left after min_docs filter");

  if (opt.require_max_rel) {
    const double grade = static_cast<double>(*opt.require_max_rel);
    std::erase_if(raw, [&](const RawQuery& q) {
      return std::none_of(q.docs.begin(), q.docs.end(),
                          [&](const RawDoc& d) { return d.rel == grade; });
    });
    require(!raw.empty(), ErrorCode::empty_after_filter,
            "no queries left after require_max_rel filter");
  }

  if (opt.sample_docs) {
    const int k = *opt.sample_docs;
    for (RawQuery& q : raw) {
      const int m = static_cast<int>(q.docs.size());
      if (m <= k) continue;
      std::vector<int> pick;
      for (int attempt = 0;; ++attempt) {
        require(attempt < 1000000, ErrorCode::no_convergence,
                "document subsampling failed to hit the required grade");
        std::vector<int> idx(m);
        for (int i = 0; i < m; ++i) idx[i] = i;
        for (int i = 0; i < k; ++i)
          std::swap(idx[i], idx[i + rng.uniform_index(static_cast<std::size_t>(m - i))]);
        idx.resize(k);
        if (opt.require_max_rel) {
          const double grade = static_cast<double>(*opt.require_max_rel);
          if (std::none_of(idx.begin(), idx.end(),
                           [&](int i) { return q.docs[i].rel == grade; }))
            continue;
        }
        pick = std::move(idx);
        break;
      }
      std::sort(pick.begin(), pick.end());
      std::vector<RawDoc> kept;
      kept.reserve(k);
      for (int i : pick) kept.push_back(std::move(q.docs[i]));
      q.docs = std::move(kept);
    }
  }

  std::vector<Query> queries;
  queries.reserve(raw.size());
  for (RawQuery& rq : raw) {
    Query q;
    q.id = std::move(rq.id);
    q.items.reserve(rq.docs.size());
    for (const RawDoc& d : rq.docs) {
      Item item;
      item.features = Eigen::VectorXd::Zero(max_fid);
      for (const auto& [fid, value] : d.features) item.features[fid - 1] = value;
      item.relevance = d.rel;
      q.items.push_back(std::move(item));
    }
    queries.push_back(std::move(q));
  }

  LetorResult result;
  result.data = make_dataset(std::move(queries));
  if (opt.standardize) {
    if (opt.reuse_stats) {
      result.standardizer = *opt.reuse_stats;
    } else {
      std::vector<int> skip;
      skip.reserve(opt.binary_feature_ids.size());
      for (int fid : opt.binary_feature_ids) {
        require(fid >= 1 && fid <= max_fid, ErrorCode::invalid_config,
                "binary feature id out of range");
        skip.push_back(fid - 1);
      }
      result.standardizer = Standardizer::fit(result.data, skip);
    }
    result.data = result.standardizer.apply(result.data);
  } else {
    result.standardizer.mean = Eigen::VectorXd::Zero(max_fid);
    result.standardizer.scale = Eigen::VectorXd::Ones(max_fid);
  }
  return result;
}

}  // namespace

LetorResult parse_letor(const std::string& path, const LetorOptions& opt, RandomStream& rng) {
  auto in = open_in(path);
  int max_fid = 0;
  auto raw = parse_letor_lines(in, max_fid);
  return finish_letor(std::move(raw), max_fid, opt, rng);
}

LetorResult parse_letor_text(const std::string& text, const LetorOptions& opt,
                             RandomStream& rng) {
  std::istringstream in(text);
  int max_fid = 0;
  auto raw = parse_letor_lines(in, max_fid);
  return finish_letor(std::move(raw), max_fid, opt, rng);
}

void save_dataset_jsonl(const std::string& path, const Dataset& data) {
  auto out = open_out(path);
  for (const Query& q : data.queries) {
    json j;
    j["query_id"] = q.id;
    json items = json::array();
    for (const Item& item : q.items) {
      json ji;
      ji["features"] = vector_to_json(item.features);
      ji["rel"] = item.relevance;
      if (item.group) ji["group"] = *item.group;
      items.push_back(std::move(ji));
    }
    j["items"] = std::move(items);
    out << j.dump() << '\n';
  }
  require(out.good(), ErrorCode::io_error, "write failed: " + path);
}

Dataset load_dataset_jsonl(const std::string& path) {
  auto in = open_in(path);
  std::vector<Query> queries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      parse_fail(line_no, 1, std::string("malformed JSON: ") + e.what());
    }
    Query q;
    try {
      q.id = j.at("query_id").get<std::string>();
      for (const auto& ji : j.at("items")) {
        Item item;
        item.features = json_to_vector(ji.at("features"), "features");
        item.relevance = ji.at("rel").get<double>();
        if (ji.contains("group")) item.group = ji.at("group").get<int>();
        q.items.push_back(std::move(item));
      }
    } catch (const json::exception& e) {
      parse_fail(line_no, 1, std::string("bad dataset record: ") + e.what());
    }
    queries.push_back(std::move(q));
  }
  return make_dataset(std::move(queries));
}

void save_metric(const std::string& path, const MetricModel& metric) {
  json j;
  j["schema_version"] = metric.schema_version;
  json cols = json::array();
  for (Eigen::Index c = 0; c < metric.subspace.basis.cols(); ++c)
    cols.push_back(vector_to_json(metric.subspace.basis.col(c)));
  j["subspace_basis"] = std::move(cols);
  j["metric_mode"] = metric_mode_name(metric.mode);
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  require(out.good(), ErrorCode::io_error, "write failed: " + path);
}

MetricModel load_metric(const std::string& path) {
  auto in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::io_error, "malformed metric file " + path + ": " + e.what());
  }
  try {
    require(j.contains("schema_version") && j["schema_version"].is_number_integer(),
            ErrorCode::io_error, "metric file lacks a schema_version");
    const int version = j["schema_version"].get<int>();
    require(version == 1, ErrorCode::schema_version_mismatch,
            "unsupported schema_version " + std::to_string(version));
    MetricModel m;
    m.schema_version = version;
    const json& cols = j.at("subspace_basis");
    require(cols.is_array() && !cols.empty(), ErrorCode::parse_error,
            "subspace_basis must be a non-empty array");
    m.subspace.basis.resize(json_to_vector(cols[0], "subspace_basis").size(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const Eigen::VectorXd col = json_to_vector(cols[c], "subspace_basis");
      require(col.size() == m.subspace.basis.rows(), ErrorCode::parse_error,
              "ragged subspace_basis");
      m.subspace.basis.col(static_cast<Eigen::Index>(c)) = col;
    }
    m.mode = metric_mode_from_name(j.at("metric_mode").get<std::string>());
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("bad metric file: ") + e.what());
  }
}

const char* variant_name(TrainVariant v) {
  switch (v) {
    case TrainVariant::senstir: return "senstir";
    case TrainVariant::baseline: return "baseline";
    case TrainVariant::project: return "project";
    case TrainVariant::random: return "random";
  }
  fail(ErrorCode::invalid_config, "unknown variant");
}

TrainVariant variant_from_name(const std::string& name) {
  if (name == "senstir") return TrainVariant::senstir;
  if (name == "baseline") return TrainVariant::baseline;
  if (name == "project") return TrainVariant::project;
  if (name == "random") return TrainVariant::random;
  fail(ErrorCode::invalid_config, "unknown variant '" + name + "'");
}

const char* metric_mode_name(MetricMode m) {
  return m == MetricMode::euclidean ? "euclidean" : "squared";
}

MetricMode metric_mode_from_name(const std::string& name) {
  if (name == "euclidean") return MetricMode::euclidean;
  if (name == "squared") return MetricMode::squared;
  fail(ErrorCode::invalid_config, "unknown metric mode '" + name + "'");
}

namespace {

const char* optimizer_name(OptimizerKind k) {
  return k == OptimizerKind::adam ? "adam" : "sgd";
}

OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd") return OptimizerKind::sgd;
  fail(ErrorCode::invalid_config, "unknown optimizer '" + name + "'");
}

json config_to_json(const TrainConfig& c) {
  json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["mc_samples"] = c.mc_samples;
  j["rho"] = c.rho;
  j["epsilon"] = c.epsilon;
  j["lambda_init"] = c.lambda_init;
  j["lambda_step"] = c.lambda_step;
  j["theta_step"] = c.theta_step;
  j["attack_subspace_steps"] = c.attack_subspace_steps;
  j["attack_subspace_lr"] = c.attack_subspace_lr;
  j["attack_full_steps"] = c.attack_full_steps;
  j["attack_full_lr"] = c.attack_full_lr;
  j["fair_start_frac"] = c.fair_start_frac;
  j["l2"] = c.l2;
  j["weight_init_range"] = c.weight_init_range;
  j["seed"] = c.seed;
  j["optimizer"] = optimizer_name(c.optimizer);
  j["warm_start_attacks"] = c.warm_start_attacks;
  return j;
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.mc_samples = j.at("mc_samples").get<int>();
  c.rho = j.at("rho").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.lambda_init = j.at("lambda_init").get<double>();
  c.lambda_step = j.at("lambda_step").get<double>();
  c.theta_step = j.at("theta_step").get<double>();
  c.attack_subspace_steps = j.at("attack_subspace_steps").get<int>();
  c.attack_subspace_lr = j.at("attack_subspace_lr").get<double>();
  c.attack_full_steps = j.at("attack_full_steps").get<int>();
  c.attack_full_lr = j.at("attack_full_lr").get<double>();
  c.fair_start_frac = j.at("fair_start_frac").get<double>();
  c.l2 = j.at("l2").get<double>();
  c.weight_init_range = j.at("weight_init_range").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.optimizer = optimizer_from_name(j.at("optimizer").get<std::string>());
  c.warm_start_attacks = j.at("warm_start_attacks").get<bool>();
  return c;
}

}  // namespace

void save_model(const std::string& path, const Model& model) {
  json j;
  j["schema_version"] = model.schema_version;
  j["feature_dim"] = static_cast<int>(model.policy.theta.size());
  j["theta"] = vector_to_json(model.policy.theta);
  if (model.subspace) {
    json cols = json::array();
    for (Eigen::Index c = 0; c < model.subspace->basis.cols(); ++c)
      cols.push_back(vector_to_json(model.subspace->basis.col(c)));
    j["subspace_basis"] = std::move(cols);
  } else {
    j["subspace_basis"] = nullptr;
  }
  j["metric_mode"] = metric_mode_name(model.metric_mode);
  j["variant"] = variant_name(model.variant);
  j["seed"] = model.config.seed;
  j["config"] = config_to_json(model.config);
  json metrics;
  metrics["mean_utility"] = doubles_to_json(model.history.mean_utility);
  metrics["mean_dq"] = doubles_to_json(model.history.mean_dq);
  metrics["lambda"] = doubles_to_json(model.history.lambda);
  metrics["regularizer"] = doubles_to_json(model.history.regularizer);
  j["train_metrics"] = std::move(metrics);

  auto out = open_out(path);
  out << j.dump(2) << '\n';
  require(out.good(), ErrorCode::io_error, "write failed: " + path);
}

Model load_model(const std::string& path) {
  auto in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::io_error, "malformed model file " + path + ": " + e.what());
  }
  try {
    require(j.contains("schema_version") && j["schema_version"].is_number_integer(),
            ErrorCode::io_error, "model file lacks a schema_version");
    const int version = j["schema_version"].get<int>();
    require(version == 1, ErrorCode::schema_version_mismatch,
            "unsupported schema_version " + std::to_string(version));

    Model model;
    model.schema_version = version;
    model.policy.theta = json_to_vector(j.at("theta"), "theta");
    require(j.at("feature_dim").get<int>() == static_cast<int>(model.policy.theta.size()),
            ErrorCode::parse_error, "feature_dim does not match theta length");
    if (!j.at("subspace_basis").is_null()) {
      const json& cols = j.at("subspace_basis");
      require(cols.is_array() && !cols.empty(), ErrorCode::parse_error,
              "subspace_basis must be a non-empty array");
      SensitiveSubspace sub;
      sub.basis.resize(json_to_vector(cols[0], "subspace_basis").size(), cols.size());
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const Eigen::VectorXd col = json_to_vector(cols[c], "subspace_basis");
        require(col.size() == sub.basis.rows(), ErrorCode::parse_error,
                "ragged subspace_basis");
        sub.basis.col(static_cast<Eigen::Index>(c)) = col;
      }
      model.subspace = std::move(sub);
    }
    model.metric_mode = metric_mode_from_name(j.at("metric_mode").get<std::string>());
    model.variant = variant_from_name(j.at("variant").get<std::string>());
    model.config = config_from_json(j.at("config"));
    const json& metrics = j.at("train_metrics");
    model.history.mean_utility = json_to_doubles(metrics.at("mean_utility"), "mean_utility");
    model.history.mean_dq = json_to_doubles(metrics.at("mean_dq"), "mean_dq");
    model.history.lambda = json_to_doubles(metrics.at("lambda"), "lambda");
    model.history.regularizer = json_to_doubles(metrics.at("regularizer"), "regularizer");
    return model;
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("bad model file: ") + e.what());
  }
}

void write_report(const std::string& path, const std::vector<ReportRow>& rows) {
  const bool with_weight_ratio = std::any_of(
      rows.begin(), rows.end(), [](const ReportRow& r) { return r.weight_ratio.has_value(); });
  auto out = open_out(path);
  out << "variant,rho,epsilon,seed,ndcg_stochastic,kendall_tau,kendall_tau_weighted,"
         "exposure_disparity";
  if (with_weight_ratio) out << ",weight_ratio";
  out << '\n';
  const auto cell = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  for (const ReportRow& r : rows) {
    out << r.variant << ',' << format_double(r.rho) << ',' << format_double(r.epsilon) << ','
        << r.seed << ',' << format_double(r.ndcg_stochastic) << ',' << cell(r.kendall_tau)
        << ',' << cell(r.kendall_tau_weighted) << ',' << cell(r.exposure_disparity);
    if (with_weight_ratio) out << ',' << cell(r.weight_ratio);
    out << '\n';
  }
  require(out.good(), ErrorCode::io_error, "write failed: " + path);
}

}  // namespace senstir
