#include "raresage/machines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "raresage/error.hpp"
#include "raresage/io.hpp"
#include "raresage/rng.hpp"

namespace raresage {

namespace {

constexpr int kMachineFormatVersion = 1;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

/// Index of the largest score (first on ties) and its margin over the runner-up.
std::pair<std::size_t, double> best_with_margin(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  double second = -INFINITY;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i != best) second = std::max(second, scores[i]);
  }
  return {best, scores[best] - second};
}

}  // namespace

const char* to_string(MachineKind kind) {
  switch (kind) {
    case MachineKind::centroid: return "centroid";
    case MachineKind::logistic: return "logistic";
    case MachineKind::svm_linear: return "svm_linear";
  }
  return "?";
}

const char* to_string(FeatureMapKind kind) {
  switch (kind) {
    case FeatureMapKind::identity: return "identity";
    case FeatureMapKind::standardize: return "standardize";
    case FeatureMapKind::projection: return "projection";
    case FeatureMapKind::lookup: return "lookup";
  }
  return "?";
}

MachineKind parse_machine_kind(const std::string& name) {
  if (name == "centroid") return MachineKind::centroid;
  if (name == "logistic") return MachineKind::logistic;
  if (name == "svm_linear") return MachineKind::svm_linear;
  throw ConfigError("unknown machine kind '" + name + "' (expected centroid|logistic|svm_linear)");
}

FeatureMapKind parse_feature_map(const std::string& name) {
  if (name == "identity") return FeatureMapKind::identity;
  if (name == "standardize") return FeatureMapKind::standardize;
  if (name == "projection") return FeatureMapKind::projection;
  if (name == "lookup") return FeatureMapKind::lookup;
  throw ConfigError("unknown feature map '" + name + "'");
}

FeatureMapKind default_feature_map(MachineKind kind) {
  return kind == MachineKind::centroid ? FeatureMapKind::standardize : FeatureMapKind::projection;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// Machine

void Machine::require_trained() const {
  if (!trained_) throw StateError("machine is not trained");
}

void Machine::check_dim(const Observation& obs) const {
  if (obs.features.size() != input_dim_) {
    throw ValidationError("dimension mismatch: observation '" + obs.id + "' has " +
                          std::to_string(obs.features.size()) + " features, machine expects " +
                          std::to_string(input_dim_));
  }
}

std::vector<double> Machine::select(const Observation& obs) const {
  check_dim(obs);
  if (columns_.empty()) return obs.features;
  std::vector<double> x;
  x.reserve(columns_.size());
  for (auto c : columns_) x.push_back(obs.features[c]);
  return x;
}

std::vector<double> Machine::standardized(const Observation& obs) const {
  auto x = select(obs);
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - mean_[j]) / scale_[j];
  return x;
}

std::vector<double> Machine::linear_scores(const std::vector<double>& z) const {
  std::vector<double> s(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    s[r] = dot(std::span(weights_).subspan(r * cols_, cols_), z) + bias_[r];
  }
  return s;
}

std::vector<double> Machine::decision_scores(const Observation& obs) const {
  require_trained();
  if (kind_ == MachineKind::centroid) {
    const auto x = select(obs);
    std::vector<double> s(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) {
        const double d = x[j] - weights_[r * cols_ + j];
        d2 += d * d;
      }
      s[r] = -std::sqrt(d2);
    }
    return s;
  }
  auto s = linear_scores(standardized(obs));
  if (kind_ == MachineKind::svm_linear && labels_.supers.size() == 2) return {s[0], -s[0]};
  return s;
}

Prediction Machine::predict(const Observation& obs) const {
  const auto scores = decision_scores(obs);
  Prediction p;
  if (kind_ == MachineKind::svm_linear && labels_.supers.size() == 2) {
    // One hyperplane: its signed distance is the score; s == 0 goes to super 0.
    const double s = scores[0];
    p.super_label = labels_.supers[s >= 0.0 ? 0 : 1].name;
    p.score = std::abs(s);
  } else {
    auto [best, margin] = best_with_margin(scores);
    p.super_label = labels_.supers[best].name;
    p.score = margin;
  }
  p.confidence = sigmoid(p.score / temperature_);
  return p;
}

std::vector<double> Machine::map_features(const Observation& obs) const {
  require_trained();
  switch (map_kind_) {
    case FeatureMapKind::identity: return select(obs);
    case FeatureMapKind::standardize: return standardized(obs);
    case FeatureMapKind::projection: return linear_scores(standardized(obs));
    case FeatureMapKind::lookup: {
      auto it = lookup_.find(obs.id);
      if (it == lookup_.end()) throw ValidationError("lookup feature map has no entry for '" + obs.id + "'");
      return it->second;
    }
  }
  return {};
}

Machine Machine::with_lookup_map(std::map<std::string, std::vector<double>> table) const {
  require_trained();
  if (table.empty()) throw ValidationError("empty lookup table");
  const auto d = table.begin()->second.size();
  for (const auto& [id, v] : table) {
    if (v.size() != d) throw ValidationError("lookup table rows differ in length at '" + id + "'");
  }
  Machine m = *this;
  m.map_kind_ = FeatureMapKind::lookup;
  m.lookup_ = std::move(table);
  return m;
}

Machine Machine::with_feature_map(FeatureMapKind kind) const {
  require_trained();
  if (kind == FeatureMapKind::lookup) throw ConfigError("lookup map needs a table");
  if (kind == FeatureMapKind::projection && kind_ == MachineKind::centroid) {
    throw ConfigError("centroid machines have no learned projection");
  }
  Machine m = *this;
  m.map_kind_ = kind;
  m.lookup_.clear();
  return m;
}

// ---------------------------------------------------------------------------
// training

namespace {

struct Prepared {
  std::vector<std::vector<double>> raw;  // selected columns
  std::vector<std::vector<double>> z;    // standardized
  std::vector<std::size_t> y;            // super index
  std::vector<std::size_t> counts;
};

void fit_centroids(const Prepared& p, std::vector<double>& weights, std::size_t k, std::size_t d) {
  weights.assign(k * d, 0.0);
  for (std::size_t i = 0; i < p.raw.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) weights[p.y[i] * d + j] += p.raw[i][j];
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < d; ++j) weights[c * d + j] /= static_cast<double>(p.counts[c]);
  }
}

std::vector<double> sample_weights(const Prepared& p, bool balanced) {
  const double n = static_cast<double>(p.y.size());
  const double k = static_cast<double>(p.counts.size());
  std::vector<double> w(p.y.size(), 1.0);
  if (balanced) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = n / (k * static_cast<double>(p.counts[p.y[i]]));
  }
  return w;
}

void fit_logistic(const Prepared& p, const TrainConfig& cfg, std::vector<double>& weights,
                  std::vector<double>& bias, std::size_t k, std::size_t d) {
  weights.assign(k * d, 0.0);
  bias.assign(k, 0.0);
  const auto sw = sample_weights(p, cfg.balanced);
  const double total_w = std::accumulate(sw.begin(), sw.end(), 0.0);
  std::vector<double> gw(k * d), gb(k), logits(k);
  for (std::size_t epoch = 0; epoch < cfg.logistic_epochs; ++epoch) {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    for (std::size_t i = 0; i < p.z.size(); ++i) {
      double mx = -INFINITY;
      for (std::size_t c = 0; c < k; ++c) {
        logits[c] = dot(std::span(weights).subspan(c * d, d), p.z[i]) + bias[c];
        mx = std::max(mx, logits[c]);
      }
      double norm = 0.0;
      for (auto& l : logits) norm += (l = std::exp(l - mx));
      for (std::size_t c = 0; c < k; ++c) {
        const double g = sw[i] * (logits[c] / norm - (p.y[i] == c ? 1.0 : 0.0));
        for (std::size_t j = 0; j < d; ++j) gw[c * d + j] += g * p.z[i][j];
        gb[c] += g;
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t j = 0; j < d; ++j) {
        auto& w = weights[c * d + j];
        w -= cfg.logistic_rate * (gw[c * d + j] / total_w + cfg.logistic_l2 * w);
      }
      bias[c] -= cfg.logistic_rate * gb[c] / total_w;
    }
  }
}

/// Hinge loss + (λ/2)|w|² by stochastic subgradient descent, step
/// η_t = η0 / (1 + η0 λ t), epoch order from a seeded shuffle.
void fit_hyperplane(const Prepared& p, const std::vector<double>& target, const TrainConfig& cfg,
                    Rng& rng, std::span<double> w, double& b) {
  const std::size_t n = p.z.size();
  std::size_t n_pos = 0;
  for (double t : target) n_pos += t > 0 ? 1 : 0;
  const double w_pos = cfg.balanced ? static_cast<double>(n) / (2.0 * static_cast<double>(n_pos)) : 1.0;
  const double w_neg = cfg.balanced ? static_cast<double>(n) / (2.0 * static_cast<double>(n - n_pos)) : 1.0;

  std::fill(w.begin(), w.end(), 0.0);
  b = 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < cfg.svm_epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (auto i : order) {
      ++t;
      const double eta = cfg.svm_eta0 / (1.0 + cfg.svm_eta0 * cfg.svm_lambda * static_cast<double>(t));
      const double y = target[i];
      const double margin = y * (dot(w, p.z[i]) + b);
      const double shrink = 1.0 - eta * cfg.svm_lambda;
      for (auto& wj : w) wj *= shrink;
      if (margin < 1.0) {
        const double c = eta * y * (y > 0 ? w_pos : w_neg);
        for (std::size_t j = 0; j < w.size(); ++j) w[j] += c * p.z[i][j];
        b += c;
      }
    }
  }
}

}  // namespace

Machine train(MachineKind kind, const Dataset& ds, const LabelSet& labels, const TrainConfig& cfg) {
  if (!ds.fully_labeled()) throw ValidationError("training data contains unlabeled observations");
  const Dataset relabeled = relabel(ds, labels);
  const Dataset sel = select_columns(relabeled, cfg.columns);
  const std::size_t k = labels.supers.size();
  const std::size_t d = sel.dim();
  if (k < 2) throw TrainingError("need at least two supers to train, got " + std::to_string(k));
  if (!(cfg.temperature > 0.0)) throw ConfigError("confidence temperature must be positive");

  Prepared p;
  p.counts.assign(k, 0);
  for (const auto& o : sel.observations()) {
    const auto c = sel.class_index(*o.label);
    p.y.push_back(c);
    p.counts[c]++;
    p.raw.push_back(o.features);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (p.counts[c] == 0) {
      throw TrainingError("super '" + labels.supers[c].name + "' has no training examples");
    }
  }

  Machine m;
  m.kind_ = kind;
  m.labels_ = labels;
  m.columns_ = cfg.columns;
  m.input_dim_ = ds.dim();
  m.seed_ = cfg.seed;
  m.temperature_ = cfg.temperature;
  m.map_kind_ = cfg.feature_map.value_or(default_feature_map(kind));
  if (m.map_kind_ == FeatureMapKind::lookup) throw ConfigError("lookup map is attached after training");
  if (m.map_kind_ == FeatureMapKind::projection && kind == MachineKind::centroid) {
    throw ConfigError("centroid machines have no learned projection");
  }

  // Under balanced training the standardizer sees the same class weights,
  // so a scarce super does not set the scale of every feature it differs on.
  const auto sw = sample_weights(p, cfg.balanced);
  const double total = std::accumulate(sw.begin(), sw.end(), 0.0);
  m.mean_.assign(d, 0.0);
  m.scale_.assign(d, 0.0);
  for (std::size_t i = 0; i < p.raw.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) m.mean_[j] += sw[i] * p.raw[i][j];
  }
  for (auto& v : m.mean_) v /= total;
  for (std::size_t i = 0; i < p.raw.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double e = p.raw[i][j] - m.mean_[j];
      m.scale_[j] += sw[i] * e * e;
    }
  }
  for (auto& v : m.scale_) {
    v = std::sqrt(v / total);
    if (v < 1e-12) v = 1.0;
  }
  for (const auto& x : p.raw) {
    std::vector<double> z(d);
    for (std::size_t j = 0; j < d; ++j) z[j] = (x[j] - m.mean_[j]) / m.scale_[j];
    p.z.push_back(std::move(z));
  }

  m.cols_ = d;
  switch (kind) {
    case MachineKind::centroid:
      m.rows_ = k;
      fit_centroids(p, m.weights_, k, d);
      m.bias_.assign(k, 0.0);
      break;
    case MachineKind::logistic:
      m.rows_ = k;
      fit_logistic(p, cfg, m.weights_, m.bias_, k, d);
      break;
    case MachineKind::svm_linear: {
      Rng rng(derive_seed(cfg.seed, 0x5356u));
      m.rows_ = k == 2 ? 1 : k;
      m.weights_.assign(m.rows_ * d, 0.0);
      m.bias_.assign(m.rows_, 0.0);
      for (std::size_t r = 0; r < m.rows_; ++r) {
        std::vector<double> target(p.y.size());
        for (std::size_t i = 0; i < p.y.size(); ++i) target[i] = p.y[i] == r ? 1.0 : -1.0;
        fit_hyperplane(p, target, cfg, rng, std::span(m.weights_).subspan(r * d, d), m.bias_[r]);
      }
      break;
    }
  }
  for (double v : m.weights_) {
    if (!std::isfinite(v)) throw TrainingError("training diverged (non-finite weights)");
  }
  m.trained_ = true;
  return m;
}

// ---------------------------------------------------------------------------
// serialization

nlohmann::json Machine::to_json() const {
  require_trained();
  nlohmann::json ls = nlohmann::json::array();
  for (const auto& s : labels_.supers) ls.push_back({{"name", s.name}, {"members", s.members}});
  nlohmann::json j = {
      {"format_version", kMachineFormatVersion},
      {"kind", to_string(kind_)},
      {"label_set", ls},
      {"feature_map", to_string(map_kind_)},
      {"columns", columns_},
      {"input_dim", input_dim_},
      {"seed", seed_},
      {"temperature", temperature_},
      {"mean", mean_},
      {"scale", scale_},
      {"rows", rows_},
      {"cols", cols_},
      {"weights", weights_},
      {"bias", bias_},
  };
  if (map_kind_ == FeatureMapKind::lookup) {
    nlohmann::json table = nlohmann::json::object();
    for (const auto& [id, v] : lookup_) table[id] = v;
    j["lookup"] = table;
  }
  return j;
}

Machine Machine::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kMachineFormatVersion) {
      throw FormatError("unsupported machine format_version " + j.at("format_version").dump());
    }
    Machine m;
    m.kind_ = parse_machine_kind(j.at("kind").get<std::string>());
    for (const auto& s : j.at("label_set")) {
      m.labels_.supers.push_back(
          {s.at("name").get<std::string>(), s.at("members").get<std::vector<std::string>>()});
    }
    m.map_kind_ = parse_feature_map(j.at("feature_map").get<std::string>());
    m.columns_ = j.at("columns").get<std::vector<std::size_t>>();
    m.input_dim_ = j.at("input_dim").get<std::size_t>();
    m.seed_ = j.at("seed").get<std::uint64_t>();
    m.temperature_ = j.at("temperature").get<double>();
    m.mean_ = j.at("mean").get<std::vector<double>>();
    m.scale_ = j.at("scale").get<std::vector<double>>();
    m.rows_ = j.at("rows").get<std::size_t>();
    m.cols_ = j.at("cols").get<std::size_t>();
    m.weights_ = j.at("weights").get<std::vector<double>>();
    m.bias_ = j.at("bias").get<std::vector<double>>();
    if (m.weights_.size() != m.rows_ * m.cols_ || m.bias_.size() != m.rows_ ||
        m.mean_.size() != m.cols_ || m.scale_.size() != m.cols_) {
      throw FormatError("machine weight arrays do not match rows/cols");
    }
    if (m.map_kind_ == FeatureMapKind::lookup) {
      for (const auto& [id, v] : j.at("lookup").items()) m.lookup_[id] = v.get<std::vector<double>>();
    }
    m.trained_ = true;
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed machine: ") + e.what());
  }
}

void save_machine(const std::filesystem::path& path, const Machine& m) {
  write_text_atomic(path, m.to_json().dump(2) + "\n");
}

Machine load_machine(const std::filesystem::path& path) {
  const auto text = read_text(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return Machine::from_json(j);
}

std::map<std::string, std::vector<double>> load_lookup_table(const std::filesystem::path& path) {
  const auto ds = load_embeddings(path, LoadOptions{.allow_unlabeled = true});
  std::map<std::string, std::vector<double>> table;
  for (const auto& o : ds.observations()) table[o.id] = o.features;
  return table;
}

// ---------------------------------------------------------------------------
// orchestration

double machine_entropy(const Machine& m, const Dataset& ds, const std::string& rare_class,
                       std::size_t k, Metric metric) {
  ds.class_index(rare_class);
  std::vector<std::vector<double>> pts;
  for (auto i : ds.indices_of(rare_class)) pts.push_back(m.map_features(ds[i]));
  return point_entropy(pts, k, metric);
}

OrchestrationResult orchestrate(std::span<const Machine> roster, const Dataset& ds,
                                const std::string& rare_class, std::size_t k, Metric metric) {
  if (roster.empty()) throw ValidationError("empty machine roster");
  for (const auto& m : roster) {
    if (!(m.label_set() == roster.front().label_set())) {
      throw ValidationError("roster machines do not share one label set");
    }
  }
  OrchestrationResult r;
  for (const auto& m : roster) r.theta.push_back(machine_entropy(m, ds, rare_class, k, metric));
  for (std::size_t i = 1; i < r.theta.size(); ++i) {
    if (r.theta[i] < r.theta[r.selected]) r.selected = i;
  }
  return r;
}

}  // namespace raresage
