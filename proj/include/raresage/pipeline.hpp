#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "raresage/data_model.hpp"
#include "raresage/machines.hpp"
#include "raresage/rarity.hpp"

namespace raresage {

inline constexpr const char* kOverlapSuper = "OVERLAP";
inline constexpr const char* kNotOverlapSuper = "NOT_OVERLAP";
inline constexpr const char* kRareSuperName = "RARE";
inline constexpr const char* kNonRareSuperName = "NONRARE";

struct PipelineConfig {
  std::size_t k = kDefaultNeighbors;
  double multiplier = 1.0;
  double t_c = 0.9;
  Metric metric = Metric::euclidean;
  std::vector<MachineKind> dl_roster{MachineKind::centroid, MachineKind::logistic,
                                     MachineKind::svm_linear};
  /// Empty: the stage's knowledge machine is drawn from dl_roster instead.
  std::vector<MachineKind> k_roster{MachineKind::svm_linear};
  std::size_t max_stages = 4;
  std::uint64_t seed = 0;
  /// Columns seen by rarity analysis, data-driven machines and the residual.
  std::vector<std::size_t> embedding_columns;
  /// Columns seen by knowledge machines; empty means embedding_columns.
  std::vector<std::size_t> knowledge_columns;
  /// Hold-out share for per-stage accuracy and residual selection.
  double validation_fraction = 0.2;
  /// Training hyperparameters; seed and columns are set per machine.
  TrainConfig train;

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

struct RosterEntropy {
  std::vector<MachineKind> kinds;
  /// Rare-class entropy in each member's feature space.
  std::vector<double> theta;
  std::size_t selected = 0;

  friend bool operator==(const RosterEntropy&, const RosterEntropy&) = default;
};

struct StagePlan {
  std::string rare_class;
  std::string overlap_class;
  /// What "non-rare" resolves to: the working classes other than the rare and
  /// overlap class, or just the overlap class when nothing else is left.
  std::vector<std::string> non_rare_classes;
  Machine dl_machine;  // {OVERLAP, NOT_OVERLAP}
  Machine k_machine;   // {RARE, NONRARE}
  RosterEntropy dl_entropy;
  RosterEntropy k_entropy;
  /// θ per working class (embedding columns) when the stage was planned.
  EntropyProfile profile;
  /// Accuracy of the stage's three-way routing on a seeded hold-out split;
  /// empty when the split leaves a super without training examples.
  std::optional<double> validation_accuracy;

  friend bool operator==(const StagePlan&, const StagePlan&) = default;
};

struct RareSaGeModel {
  PipelineConfig config;
  std::vector<std::string> classes;
  std::size_t input_dim = 0;
  std::vector<StagePlan> stages;
  /// Trained when two or more classes remain after staging.
  std::optional<Machine> residual_machine;
  /// Sole remaining class when only one is left.
  std::optional<std::string> residual_class;

  /// Classes covered by the residual stage.
  std::vector<std::string> residual_classes;

  nlohmann::json to_json() const;
  static RareSaGeModel from_json(const nlohmann::json& j);

  friend bool operator==(const RareSaGeModel&, const RareSaGeModel&) = default;
};

using LogSink = std::function<void(const std::string&)>;

/// Plans one stage on the working set, or returns nothing when no class is
/// rare. Throws ValidationError for fewer than two classes.
std::optional<StagePlan> plan_stage(const Dataset& ds, const PipelineConfig& cfg,
                                    std::size_t stage_index = 0);

/// Iterative staging, then the residual machine over whatever remains.
RareSaGeModel fit(const Dataset& ds, const PipelineConfig& cfg, const LogSink& log = {});

enum class FuseOutcome { rare, overlap, non_rare };

const char* to_string(FuseOutcome outcome);

/// OVERLAP + RARE above t_c overrides to rare; OVERLAP otherwise keeps the
/// overlap class; NOT_OVERLAP defers to the knowledge machine.
FuseOutcome fuse(const std::string& dl_super, const Prediction& eke, double t_c);

struct PredictionTrace {
  std::string label;
  /// Stage that produced the label; stages.size() for the residual.
  std::size_t stage = 0;
  FuseOutcome outcome = FuseOutcome::non_rare;
  /// True when the knowledge override relabeled an OVERLAP verdict as rare.
  bool overridden = false;
};

/// Walks the stages with threshold `t_c`. Throws ValidationError on a
/// dimension mismatch.
PredictionTrace trace_prediction(const RareSaGeModel& model, const Observation& obs, double t_c);

/// trace_prediction at the model's configured threshold.
std::string predict_label(const RareSaGeModel& model, const Observation& obs);

std::vector<std::string> predict_all(const RareSaGeModel& model, const Dataset& ds);

void save_model(const std::filesystem::path& path, const RareSaGeModel& model);
RareSaGeModel load_model(const std::filesystem::path& path);

}  // namespace raresage
