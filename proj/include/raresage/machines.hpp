#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "raresage/data_model.hpp"
#include "raresage/label_set.hpp"
#include "raresage/rarity.hpp"

namespace raresage {

enum class MachineKind { centroid, logistic, svm_linear };

/// Representation F used when scoring a machine by rare-class entropy.
enum class FeatureMapKind {
  identity,     // selected raw columns
  standardize,  // per-column z-scores fitted on training data
  projection,   // decision scores of the trained linear layer
  lookup,       // externally supplied embedding per observation id
};

const char* to_string(MachineKind kind);
const char* to_string(FeatureMapKind kind);
MachineKind parse_machine_kind(const std::string& name);
FeatureMapKind parse_feature_map(const std::string& name);
/// Default F per family: centroid -> standardize, logistic/svm -> projection.
FeatureMapKind default_feature_map(MachineKind kind);

struct TrainConfig {
  std::uint64_t seed = 0;
  /// Input columns the machine reads; empty means all.
  std::vector<std::size_t> columns;
  std::optional<FeatureMapKind> feature_map;

  std::size_t logistic_epochs = 300;
  double logistic_rate = 0.5;
  double logistic_l2 = 1e-4;

  std::size_t svm_epochs = 40;
  double svm_lambda = 1e-3;
  double svm_eta0 = 0.5;

  /// Weight samples by n / (k * n_super) so scarce supers are not ignored.
  bool balanced = true;
  /// Fixed sigmoid temperature of the confidence map.
  double temperature = 1.0;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct Prediction {
  std::string super_label;
  /// sigmoid(score / temperature), in [0.5, 1) for every built-in family.
  double confidence = 0.0;
  /// Decision score of the predicted super (margin over the runner-up).
  double score = 0.0;
};

double sigmoid(double x);

class Machine {
 public:
  /// Untrained; predict and map_features throw StateError.
  Machine() = default;

  bool trained() const { return trained_; }
  MachineKind kind() const { return kind_; }
  const LabelSet& label_set() const { return labels_; }
  FeatureMapKind feature_map() const { return map_kind_; }
  const std::vector<std::size_t>& columns() const { return columns_; }
  std::size_t input_dim() const { return input_dim_; }
  std::uint64_t seed() const { return seed_; }
  double temperature() const { return temperature_; }

  /// One raw score per super; higher is more likely. Binary linear machines
  /// hold one hyperplane s and report (s, -s).
  std::vector<double> decision_scores(const Observation& obs) const;
  Prediction predict(const Observation& obs) const;

  /// F applied to one observation.
  std::vector<double> map_features(const Observation& obs) const;

  /// Copy that scores with an external per-id embedding as F.
  Machine with_lookup_map(std::map<std::string, std::vector<double>> table) const;
  /// Copy with a different built-in F (lookup requires with_lookup_map).
  Machine with_feature_map(FeatureMapKind kind) const;

  nlohmann::json to_json() const;
  static Machine from_json(const nlohmann::json& j);

  friend bool operator==(const Machine&, const Machine&) = default;

  friend Machine train(MachineKind kind, const Dataset& ds, const LabelSet& labels,
                       const TrainConfig& cfg);

 private:
  std::vector<double> select(const Observation& obs) const;
  std::vector<double> standardized(const Observation& obs) const;
  std::vector<double> linear_scores(const std::vector<double>& z) const;
  void require_trained() const;
  void check_dim(const Observation& obs) const;

  bool trained_ = false;
  MachineKind kind_ = MachineKind::centroid;
  LabelSet labels_;
  FeatureMapKind map_kind_ = FeatureMapKind::identity;
  std::vector<std::size_t> columns_;
  std::size_t input_dim_ = 0;
  std::uint64_t seed_ = 0;
  double temperature_ = 1.0;

  std::vector<double> mean_;
  std::vector<double> scale_;
  /// Row-major, rows x cols. Centroids for `centroid`, hyperplanes otherwise.
  std::vector<double> weights_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> bias_;
  std::map<std::string, std::vector<double>> lookup_;
};

/// Fits `kind` on ds with every label mapped through `labels`.
/// Throws ValidationError for an invalid label set or unlabeled rows and
/// TrainingError when fewer than two supers have examples.
Machine train(MachineKind kind, const Dataset& ds, const LabelSet& labels, const TrainConfig& cfg);

void save_machine(const std::filesystem::path& path, const Machine& m);
Machine load_machine(const std::filesystem::path& path);

/// Per-id table from an embeddings CSV (labels ignored).
std::map<std::string, std::vector<double>> load_lookup_table(const std::filesystem::path& path);

/// Class entropy of `rare_class` after mapping its observations through F.
double machine_entropy(const Machine& m, const Dataset& ds, const std::string& rare_class,
                       std::size_t k = kDefaultNeighbors, Metric metric = Metric::euclidean);

struct OrchestrationResult {
  std::size_t selected = 0;
  std::vector<double> theta;
};

/// Index of the roster member with least rare-class entropy; ties go to the
/// earlier member. All members must share one label set.
OrchestrationResult orchestrate(std::span<const Machine> roster, const Dataset& ds,
                                const std::string& rare_class, std::size_t k = kDefaultNeighbors,
                                Metric metric = Metric::euclidean);

}  // namespace raresage
