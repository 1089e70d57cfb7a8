#include "raresage/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "raresage/error.hpp"
#include "raresage/rng.hpp"
#include "raresage/split.hpp"

namespace raresage {

// ---------------------------------------------------------------------------
// confusion matrix

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> classes)
    : classes_(std::move(classes)), n_(classes_.size()), counts_(n_ * n_, 0) {
  if (classes_.empty()) throw ValidationError("confusion matrix needs at least one class");
  std::set<std::string> seen(classes_.begin(), classes_.end());
  if (seen.size() != classes_.size()) throw ValidationError("duplicate class in confusion matrix");
}

std::size_t ConfusionMatrix::index(const std::string& cls) const {
  auto it = std::find(classes_.begin(), classes_.end(), cls);
  if (it == classes_.end()) throw ValidationError("unknown label '" + cls + "'");
  return static_cast<std::size_t>(it - classes_.begin());
}

std::size_t ConfusionMatrix::at(const std::string& truth, const std::string& predicted) const {
  return at(index(truth), index(predicted));
}

void ConfusionMatrix::add(const std::string& truth, const std::string& predicted) {
  ++counts_[index(truth) * n_ + index(predicted)];
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < n_; ++i) t += at(i, i);
  return t;
}

ConfusionMatrix score(std::span<const std::string> preds, std::span<const std::string> truths,
                      std::vector<std::string> classes) {
  if (preds.size() != truths.size()) {
    throw ValidationError("length mismatch: " + std::to_string(preds.size()) + " predictions, " +
                          std::to_string(truths.size()) + " truths");
  }
  if (preds.empty()) throw ValidationError("nothing to score");
  ConfusionMatrix cm(std::move(classes));
  for (std::size_t i = 0; i < preds.size(); ++i) cm.add(truths[i], preds[i]);
  return cm;
}

// ---------------------------------------------------------------------------
// reports

Rate ratio(std::size_t num, std::size_t den) {
  if (den == 0) return {0.0, true};
  return {static_cast<double>(num) / static_cast<double>(den), false};
}

Rate f1_of(const Rate& p, const Rate& s) {
  const double sum = p.value + s.value;
  if (sum == 0.0) return {0.0, true};
  return {2.0 * p.value * s.value / sum, false};
}

const ClassMetrics& EvalReport::metrics_of(const std::string& cls) const {
  for (const auto& m : per_class) {
    if (m.cls == cls) return m;
  }
  throw ValidationError("class '" + cls + "' not in report");
}

EvalReport report(const ConfusionMatrix& cm, const std::string& rare_class) {
  const std::size_t n = cm.classes().size();
  EvalReport r;
  r.total = cm.total();
  if (r.total == 0) throw ValidationError("empty confusion matrix");
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(r.total);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t row = 0, col = 0;
    for (std::size_t j = 0; j < n; ++j) {
      row += cm.at(c, j);
      col += cm.at(j, c);
    }
    const std::size_t tp = cm.at(c, c);
    ClassMetrics m;
    m.cls = cm.classes()[c];
    m.support = row;
    m.precision = ratio(tp, col);
    m.sensitivity = ratio(tp, row);
    m.f1 = f1_of(m.precision, m.sensitivity);
    r.per_class.push_back(m);
  }
  r.rare_class = rare_class;
  if (rare_class.empty()) {
    r.rare_f1 = r.ppv = r.npv = r.specificity = Rate{0.0, true};
    return r;
  }
  const std::size_t rc = cm.index(rare_class);
  const auto& m = r.per_class[rc];
  std::size_t tp = cm.at(rc, rc), fp = 0, fn = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == rc) continue;
    fp += cm.at(j, rc);
    fn += cm.at(rc, j);
  }
  const std::size_t tn = r.total - tp - fp - fn;
  r.rare_f1 = m.f1;
  r.ppv = m.precision;
  r.npv = ratio(tn, tn + fn);
  r.specificity = ratio(tn, tn + fp);
  return r;
}

// ---------------------------------------------------------------------------
// harnesses

namespace {

std::set<std::string> domain_ids(const Dataset& ds) {
  std::set<std::string> out;
  for (const auto& o : ds.observations()) out.insert(o.domain_id);
  return out;
}

std::vector<std::string> union_classes(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> out = a;
  for (const auto& c : b) {
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

std::vector<std::string> truths_of(const Dataset& ds) {
  std::vector<std::string> out;
  for (const auto& o : ds.observations()) out.push_back(*o.label);
  return out;
}

struct Direction {
  EvalReport report;
  std::size_t stages = 0;
};

Direction run_direction(const Dataset& train_ds, const Dataset& test_ds, const PipelineConfig& cfg,
                        const std::string& rare, bool timing) {
  const auto start = std::chrono::steady_clock::now();
  const auto model = fit(train_ds, cfg);
  const auto preds = predict_all(model, test_ds);
  const auto cm = score(preds, truths_of(test_ds), union_classes(train_ds.classes(), test_ds.classes()));
  Direction d;
  d.report = report(cm, rare);
  d.stages = model.stages.size();
  if (timing) {
    d.report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return d;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

using Extractor = double (*)(const EvalReport&);

struct NamedExtractor {
  const char* name;
  Extractor get;
};

double rare_precision(const EvalReport& r) {
  return r.rare_class.empty() ? 0.0 : r.metrics_of(r.rare_class).precision.value;
}
double rare_sensitivity(const EvalReport& r) {
  return r.rare_class.empty() ? 0.0 : r.metrics_of(r.rare_class).sensitivity.value;
}

constexpr NamedExtractor kSummaryMetrics[] = {
    {"accuracy", [](const EvalReport& r) { return r.accuracy; }},
    {"rare_precision", rare_precision},
    {"rare_sensitivity", rare_sensitivity},
    {"rare_f1", [](const EvalReport& r) { return r.rare_f1.value; }},
    {"ppv", [](const EvalReport& r) { return r.ppv.value; }},
    {"npv", [](const EvalReport& r) { return r.npv.value; }},
    {"specificity", [](const EvalReport& r) { return r.specificity.value; }},
};

}  // namespace

std::optional<std::string> rarest_class(const Dataset& ds, const PipelineConfig& cfg) {
  const Dataset emb = select_columns(ds.compact_classes(), cfg.embedding_columns);
  return identify_rare(entropy_profile(emb, cfg.k, cfg.metric), cfg.multiplier).rarest;
}

AcrossTrialResult across_trial(const Dataset& train_ds, const Dataset& test_ds, const PipelineConfig& cfg,
                               std::optional<std::string> rare_class, bool timing) {
  const auto a = domain_ids(train_ds);
  for (const auto& d : domain_ids(test_ds)) {
    if (a.count(d)) throw ValidationError("train and test share domain id '" + d + "'");
  }
  if (!test_ds.fully_labeled()) throw ValidationError("test set has unlabeled observations");

  AcrossTrialResult r;
  if (!rare_class) rare_class = rarest_class(train_ds, cfg);
  if (!rare_class) rare_class = rarest_class(test_ds, cfg);
  r.rare_class = rare_class.value_or("");

  auto fwd = run_direction(train_ds, test_ds, cfg, r.rare_class, timing);
  r.forward = fwd.report;
  r.forward_stages = fwd.stages;
  auto bwd = run_direction(test_ds, train_ds, cfg, r.rare_class, timing);
  r.backward = bwd.report;
  r.backward_stages = bwd.stages;
  r.average_f1 = (r.forward.rare_f1.value + r.backward->rare_f1.value) / 2.0;
  return r;
}

AggregatedResult aggregated_trial(const std::map<std::string, Dataset>& domains, std::size_t folds,
                                  std::size_t repeats, const PipelineConfig& cfg, std::uint64_t seed,
                                  std::optional<std::string> rare_class) {
  if (folds < 2) throw ConfigError("need at least 2 folds, got " + std::to_string(folds));
  if (repeats < 1) throw ConfigError("need at least 1 repeat");
  if (domains.size() < 2) throw ValidationError("aggregated trial needs at least two domains");

  AggregatedResult out;
  out.folds = folds;
  out.repeats = repeats;
  out.seed = seed;
  std::size_t d_index = 0;
  for (const auto& [held, test_ds] : domains) {
    if (!test_ds.fully_labeled()) throw ValidationError("domain '" + held + "' has unlabeled observations");
    std::vector<Observation> pooled;
    std::vector<std::string> classes;
    for (const auto& [name, ds] : domains) {
      if (name == held) continue;
      classes = union_classes(classes, ds.classes());
      pooled.insert(pooled.end(), ds.observations().begin(), ds.observations().end());
    }
    const Dataset pool = Dataset(std::move(pooled), classes).compact_classes();
    for (const auto& c : pool.classes()) {
      const auto n = pool.count_of(c);
      if (n < folds) {
        throw StratificationError("class '" + c + "' has " + std::to_string(n) + " members outside domain '" +
                                  held + "', fewer than " + std::to_string(folds) + " folds");
      }
    }

    HeldOutResult h;
    h.held_out = held;
    h.rare_class = rare_class ? *rare_class : rarest_class(pool, cfg).value_or("");
    const auto cm_classes = union_classes(pool.classes(), test_ds.classes());
    const auto truths = truths_of(test_ds);
    const std::uint64_t d_seed = derive_seed(seed, d_index++);
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto fold = stratified_folds(pool, folds, derive_seed(d_seed, r));
      for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < pool.size(); ++i) {
          if (fold[i] != f) keep.push_back(i);
        }
        const auto model = fit(pool.subset(keep), cfg);
        const auto preds = predict_all(model, test_ds);
        h.reports.push_back(report(score(preds, truths, cm_classes), h.rare_class));
      }
    }
    for (const auto& m : kSummaryMetrics) {
      std::vector<double> v;
      for (const auto& rep : h.reports) v.push_back(m.get(rep));
      h.summary.push_back({m.name, mean_of(v), sample_std(v)});
    }
    out.domains.push_back(std::move(h));
  }
  return out;
}

std::vector<double> default_roc_grid() {
  std::vector<double> g;
  for (int i = 2; i <= 19; ++i) g.push_back(static_cast<double>(i) / 20.0);
  return g;
}

std::vector<RocPoint> roc_sweep(const RareSaGeModel& model, const Dataset& test_ds,
                                std::span<const double> grid, std::optional<std::string> rare_class) {
  if (grid.empty()) throw ValidationError("empty threshold grid");
  for (double t : grid) {
    if (!(t > 0.0 && t <= 1.0)) throw ValidationError("threshold " + format_double(t) + " outside (0, 1]");
  }
  if (!test_ds.fully_labeled()) throw ValidationError("test set has unlabeled observations");
  if (!rare_class) {
    if (model.stages.empty()) throw UndefinedError("model has no stages, so no rare class to sweep");
    rare_class = model.stages.front().rare_class;
  }
  std::vector<RocPoint> out;
  for (double t : grid) {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    RocPoint p;
    p.t_c = t;
    for (const auto& o : test_ds.observations()) {
      const auto tr = trace_prediction(model, o, t);
      const bool pos = *o.label == *rare_class;
      const bool hit = tr.label == *rare_class;
      if (pos && hit) ++tp;
      else if (pos) ++fn;
      else if (hit) ++fp;
      else ++tn;
      p.override_count += tr.overridden;
    }
    p.sensitivity = ratio(tp, tp + fn);
    p.specificity = ratio(tn, tn + fp);
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

const char* flag_of(const Rate& r) { return r.undefined ? "zero_denominator" : ""; }

void row(std::string& out, const std::string& metric, const std::string& cls, const std::string& value,
         const std::string& flag = "") {
  out += metric + "," + cls + "," + value + "," + flag + "\n";
}

void report_rows(std::string& out, const EvalReport& r, const std::string& prefix) {
  row(out, prefix + "total", "", std::to_string(r.total));
  row(out, prefix + "accuracy", "", format_double(r.accuracy));
  for (const auto& m : r.per_class) {
    row(out, prefix + "support", m.cls, std::to_string(m.support));
    row(out, prefix + "precision", m.cls, format_double(m.precision.value), flag_of(m.precision));
    row(out, prefix + "sensitivity", m.cls, format_double(m.sensitivity.value), flag_of(m.sensitivity));
    row(out, prefix + "f1", m.cls, format_double(m.f1.value), flag_of(m.f1));
  }
  const std::string flag_no_rare = r.rare_class.empty() ? "no_rare_class" : "";
  auto rare_row = [&](const char* name, const Rate& v) {
    row(out, prefix + name, r.rare_class, format_double(v.value), r.rare_class.empty() ? flag_no_rare : flag_of(v));
  };
  rare_row("rare_f1", r.rare_f1);
  rare_row("ppv", r.ppv);
  rare_row("npv", r.npv);
  rare_row("specificity", r.specificity);
  if (r.runtime_seconds) row(out, prefix + "runtime_seconds", "", format_double(*r.runtime_seconds));
}

nlohmann::json rate_json(const Rate& r) { return {{"value", r.value}, {"undefined", r.undefined}}; }

}  // namespace

std::string report_csv(const EvalReport& r) {
  std::string out = "metric,class,value,flag\n";
  report_rows(out, r, "");
  return out;
}

nlohmann::json report_json(const EvalReport& r) {
  auto per = nlohmann::json::array();
  for (const auto& m : r.per_class) {
    per.push_back({{"class", m.cls},
                   {"support", m.support},
                   {"precision", rate_json(m.precision)},
                   {"sensitivity", rate_json(m.sensitivity)},
                   {"f1", rate_json(m.f1)}});
  }
  nlohmann::json j{
      {"total", r.total},
      {"accuracy", r.accuracy},
      {"per_class", per},
      {"rare_class", r.rare_class.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.rare_class)},
      {"rare_f1", rate_json(r.rare_f1)},
      {"ppv", rate_json(r.ppv)},
      {"npv", rate_json(r.npv)},
      {"specificity", rate_json(r.specificity)},
  };
  if (r.runtime_seconds) j["runtime_seconds"] = *r.runtime_seconds;
  return j;
}

std::string across_csv(const AcrossTrialResult& r) {
  std::string out = "metric,class,value,flag\n";
  row(out, "forward/stages", "", std::to_string(r.forward_stages), r.forward_stages ? "" : "no_rare_class");
  report_rows(out, r.forward, "forward/");
  if (r.backward) {
    row(out, "backward/stages", "", std::to_string(*r.backward_stages),
        *r.backward_stages ? "" : "no_rare_class");
    report_rows(out, *r.backward, "backward/");
  }
  row(out, "average_f1", r.rare_class, format_double(r.average_f1), r.rare_class.empty() ? "no_rare_class" : "");
  return out;
}

nlohmann::json across_json(const AcrossTrialResult& r) {
  nlohmann::json j{
      {"rare_class", r.rare_class.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.rare_class)},
      {"forward", report_json(r.forward)},
      {"forward_stages", r.forward_stages},
      {"average_f1", r.average_f1},
  };
  if (r.backward) {
    j["backward"] = report_json(*r.backward);
    j["backward_stages"] = *r.backward_stages;
  }
  return j;
}

std::string aggregated_csv(const AggregatedResult& r) {
  std::string out = "metric,class,value,flag\n";
  for (const auto& d : r.domains) {
    const std::string flag = d.rare_class.empty() ? "no_rare_class" : "";
    row(out, d.held_out + "/reports", d.rare_class, std::to_string(d.reports.size()), flag);
    for (const auto& s : d.summary) {
      row(out, d.held_out + "/" + s.metric + "_mean", d.rare_class, format_double(s.mean), flag);
      row(out, d.held_out + "/" + s.metric + "_std", d.rare_class, format_double(s.stddev), flag);
    }
  }
  return out;
}

nlohmann::json aggregated_json(const AggregatedResult& r) {
  auto domains = nlohmann::json::array();
  for (const auto& d : r.domains) {
    auto reports = nlohmann::json::array();
    for (const auto& rep : d.reports) reports.push_back(report_json(rep));
    auto summary = nlohmann::json::object();
    for (const auto& s : d.summary) summary[s.metric] = {{"mean", s.mean}, {"std", s.stddev}};
    domains.push_back({{"held_out", d.held_out},
                       {"rare_class", d.rare_class.empty() ? nlohmann::json(nullptr) : nlohmann::json(d.rare_class)},
                       {"summary", summary},
                       {"reports", reports}});
  }
  return {{"folds", r.folds}, {"repeats", r.repeats}, {"seed", r.seed}, {"domains", domains}};
}

std::string roc_csv(std::span<const RocPoint> points) {
  std::string out = "t_c,sensitivity,specificity,override_count\n";
  for (const auto& p : points) {
    out += format_double(p.t_c) + "," + format_double(p.sensitivity.value) + "," +
           format_double(p.specificity.value) + "," + std::to_string(p.override_count) + "\n";
  }
  return out;
}

nlohmann::json roc_json(std::span<const RocPoint> points) {
  auto a = nlohmann::json::array();
  for (const auto& p : points) {
    a.push_back({{"t_c", p.t_c},
                 {"sensitivity", rate_json(p.sensitivity)},
                 {"specificity", rate_json(p.specificity)},
                 {"override_count", p.override_count}});
  }
  return a;
}

}  // namespace raresage
