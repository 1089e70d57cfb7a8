#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "raresage/knowledge/activation.hpp"
#include "raresage/knowledge/geometry.hpp"
#include "raresage/machines.hpp"

namespace raresage::soz {

/// One independent component as seen by the knowledge machine: anatomy as
/// polygons in pixel coordinates, activation voxels, and the BOLD time course.
struct Scene {
  int width = 0;
  int height = 0;
  Polygon brain;
  std::vector<Polygon> gray;
  std::vector<Polygon> white;
  std::vector<Polygon> vascular;
  std::vector<Voxel> activation;
  std::vector<double> bold;

  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Throws ValidationError unless polygons are simple with >= 3 vertices,
/// voxels lie on the grid, and the BOLD series is finite with length >= 16.
void validate_scene(const Scene& scene);

nlohmann::json scene_to_json(const Scene& scene);
/// `bold` may be an array or a path to a one-column CSV, resolved against `base_dir`.
Scene scene_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
Scene load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const Scene& scene);

struct Thresholds {
  double gray = 0.5;
  double white = 0.1;
  double vascular = 0.1;
  double sine = 0.6;
  double wavelet = 0.6;
  ClusterParams clusters;
};

struct PropositionVector {
  bool p1 = false;  // one surviving cluster, completely inside the brain
  bool ps = false;  // BOLD sparse in the sine domain
  bool pa = false;  // BOLD sparse in the wavelet domain
  bool pg = false;  // activation primarily in gray matter
  bool pw = false;  // activation overlaps white matter
  bool pv = false;  // activation overlaps vascular regions

  std::size_t cluster_count = 0;
  double gray_fraction = 0.0;
  double white_fraction = 0.0;
  double vascular_fraction = 0.0;
  double gini_sine = 0.0;
  double gini_wavelet = 0.0;

  friend bool operator==(const PropositionVector&, const PropositionVector&) = default;
};

/// Fraction of voxel centres with nonzero winding number in any region polygon.
double region_fraction(std::span<const Voxel> voxels, std::span<const Polygon> region);
double region_fraction(const Cluster& cluster, std::span<const Polygon> region);

/// Fractions are over the voxels of all surviving clusters. A scene with no
/// surviving cluster has zero fractions and ps = pa = false; the sparsity
/// measures are not computed for it. An all-zero spectrum or wavelet detail
/// vector maps to a zero Gini value (not sparse).
PropositionVector evaluate_propositions(const Scene& scene, const Thresholds& thresholds = {});

/// p1 ∧ ¬ps ∧ pa ∧ [pg ∧ (¬pw ∨ (pw ∧ pv))]
bool kappa_soz(bool p1, bool ps, bool pa, bool pg, bool pw, bool pv);
bool kappa_soz(const PropositionVector& pv);

/// 0/1 valuations (p1, ps, pa, pg, pw, pv), then unless `boolean_only` the raw
/// features (cluster_count, gray, white, vascular, gini_sine, gini_wavelet).
std::vector<double> knowledge_features(const PropositionVector& pv, bool boolean_only = false);
std::vector<std::string> knowledge_feature_names(bool boolean_only = false);

inline constexpr const char* kRareSuper = "RARE";
inline constexpr const char* kNonRareSuper = "NONRARE";

struct EkeConfig {
  bool boolean_only = false;
  TrainConfig train;
};

/// Expert knowledge extractor: linear SVM over proposition features with
/// label set {RARE, NONRARE}. `rare[i]` labels scenes[i].
Machine train_eke(std::span<const Scene> scenes, std::span<const bool> rare,
                  const Thresholds& thresholds = {}, const EkeConfig& config = {});

/// Observation for an EKE machine built from a scene.
Observation eke_observation(const Scene& scene, const Thresholds& thresholds, bool boolean_only,
                            std::string id = "scene");

}  // namespace raresage::soz
