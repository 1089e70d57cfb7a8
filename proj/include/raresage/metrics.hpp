#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "raresage/data_model.hpp"
#include "raresage/pipeline.hpp"

namespace raresage {

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> classes);

  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t index(const std::string& cls) const;
  /// counts[true][predicted]
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * n_ + predicted]; }
  std::size_t at(const std::string& truth, const std::string& predicted) const;
  void add(const std::string& truth, const std::string& predicted);
  std::size_t total() const;
  std::size_t trace() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::vector<std::string> classes_;
  std::size_t n_ = 0;
  std::vector<std::size_t> counts_;
};

/// Throws ValidationError on empty input, a length mismatch, or a label not in C.
ConfusionMatrix score(std::span<const std::string> preds, std::span<const std::string> truths,
                      std::vector<std::string> classes);

/// A rate whose denominator may vanish; such a rate is 0 and flagged.
struct Rate {
  double value = 0.0;
  bool undefined = false;

  friend bool operator==(const Rate&, const Rate&) = default;
};

Rate ratio(std::size_t num, std::size_t den);
/// Harmonic mean of two rates; undefined when either input is or both are 0.
Rate f1_of(const Rate& precision, const Rate& sensitivity);

struct ClassMetrics {
  std::string cls;
  std::size_t support = 0;
  Rate precision;
  Rate sensitivity;
  Rate f1;
};

struct EvalReport {
  std::size_t total = 0;
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  /// Positive class of the binary summaries; empty when no class is rare.
  std::string rare_class;
  Rate rare_f1;
  Rate ppv;
  Rate npv;
  Rate specificity;
  std::optional<double> runtime_seconds;

  const ClassMetrics& metrics_of(const std::string& cls) const;
};

/// Per-class rates plus rare-vs-rest PPV, NPV and specificity.
EvalReport report(const ConfusionMatrix& cm, const std::string& rare_class);

struct AcrossTrialResult {
  std::string rare_class;
  EvalReport forward;  // train -> test
  std::optional<EvalReport> backward;  // test -> train, when both are labeled
  std::size_t forward_stages = 0;
  std::optional<std::size_t> backward_stages;
  /// Mean of the available rare-class F1 values.
  double average_f1 = 0.0;
};

/// Rare class of a training set under `cfg`: the rarest class of its entropy
/// profile on the embedding columns, if any.
std::optional<std::string> rarest_class(const Dataset& ds, const PipelineConfig& cfg);

/// Fits on train, scores on test, and the reverse when test is labeled.
/// Throws ValidationError when the two sets share a domain id.
AcrossTrialResult across_trial(const Dataset& train_ds, const Dataset& test_ds, const PipelineConfig& cfg,
                               std::optional<std::string> rare_class = std::nullopt, bool timing = false);

struct MetricSummary {
  std::string metric;
  double mean = 0.0;
  /// Sample standard deviation (n - 1); 0 for a single report.
  double stddev = 0.0;
};

struct HeldOutResult {
  std::string held_out;
  std::string rare_class;
  /// One report per (repeat, fold), repeat-major.
  std::vector<EvalReport> reports;
  std::vector<MetricSummary> summary;
};

struct AggregatedResult {
  std::size_t folds = 0;
  std::size_t repeats = 0;
  std::uint64_t seed = 0;
  std::vector<HeldOutResult> domains;
};

/// Leave-one-domain-out with stratified k-fold x repeats on the pooled rest.
/// Throws ConfigError for folds < 2 or repeats < 1, ValidationError for fewer
/// than two domains, StratificationError when a class cannot appear in every fold.
AggregatedResult aggregated_trial(const std::map<std::string, Dataset>& domains, std::size_t folds,
                                  std::size_t repeats, const PipelineConfig& cfg, std::uint64_t seed,
                                  std::optional<std::string> rare_class = std::nullopt);

struct RocPoint {
  double t_c = 0.0;
  Rate sensitivity;
  Rate specificity;
  std::size_t override_count = 0;
};

/// 0.10, 0.15, ..., 0.95.
std::vector<double> default_roc_grid();

/// Re-runs prediction at every threshold; positive = `rare_class`, or the
/// first stage's rare class when none is given.
std::vector<RocPoint> roc_sweep(const RareSaGeModel& model, const Dataset& test_ds,
                                std::span<const double> grid,
                                std::optional<std::string> rare_class = std::nullopt);

// Report serialization.
std::string report_csv(const EvalReport& r);
nlohmann::json report_json(const EvalReport& r);
std::string across_csv(const AcrossTrialResult& r);
nlohmann::json across_json(const AcrossTrialResult& r);
std::string aggregated_csv(const AggregatedResult& r);
nlohmann::json aggregated_json(const AggregatedResult& r);
std::string roc_csv(std::span<const RocPoint> points);
nlohmann::json roc_json(std::span<const RocPoint> points);

}  // namespace raresage
