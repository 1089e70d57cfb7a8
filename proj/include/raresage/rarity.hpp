#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "raresage/data_model.hpp"

namespace raresage {

enum class Metric { euclidean, cosine };

const char* to_string(Metric metric);
Metric parse_metric(const std::string& name);

/// Distances below this are clamped so every density stays finite.
inline constexpr double kMinDistance = 1e-12;

/// Neighbour count used when none is configured; capped per class at |c|-1.
inline constexpr std::size_t kDefaultNeighbors = 10;

double distance(std::span<const double> a, std::span<const double> b, Metric metric);

/// Mean inverse distance to the k nearest other points of `points` (k capped
/// at n-1). Ties in neighbour selection resolve by index; they cannot change
/// the value since tied candidates share a distance.
std::vector<double> knn_densities(std::span<const std::vector<double>> points, std::size_t k,
                                  Metric metric = Metric::euclidean);

/// Shannon entropy (bits) of the normalized densities. 0 log 0 := 0.
double density_entropy(std::span<const double> densities);

/// Class entropy of a point cloud; 0 for fewer than two points.
double point_entropy(std::span<const std::vector<double>> points, std::size_t k,
                     Metric metric = Metric::euclidean);

/// Density of observation `index` (which must be labeled `cls`) among its class.
/// Throws DegenerateClassError when the class has fewer than two members.
double knn_density(const Dataset& ds, const std::string& cls, std::size_t index, std::size_t k,
                   Metric metric = Metric::euclidean);

double class_entropy(const Dataset& ds, const std::string& cls, std::size_t k,
                     Metric metric = Metric::euclidean);

struct EntropyProfile {
  std::vector<std::string> classes;
  std::vector<double> theta;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t k = kDefaultNeighbors;
  Metric metric = Metric::euclidean;

  double theta_of(const std::string& cls) const;

  friend bool operator==(const EntropyProfile&, const EntropyProfile&) = default;
};

/// Population mean and standard deviation over `theta`.
EntropyProfile profile_from_thetas(std::vector<std::string> classes, std::vector<double> theta,
                                   std::size_t k = kDefaultNeighbors,
                                   Metric metric = Metric::euclidean);

/// One θ per class of ds. Throws ValidationError on an empty class.
EntropyProfile entropy_profile(const Dataset& ds, std::size_t k = kDefaultNeighbors,
                               Metric metric = Metric::euclidean);

struct RarityVerdict {
  std::vector<std::string> rare_classes;
  double multiplier = 1.0;
  /// |θ_c - θ_M| per class, profile order.
  std::vector<double> deviation;
  /// Largest deviation among rare classes; ties go to the earlier class.
  std::optional<std::string> rarest;

  bool is_rare(const std::string& cls) const;
};

/// c is rare iff |θ_c - θ_M| > multiplier * σ_θ. Deviations that exceed the
/// bound by less than 1e-12 of the largest |θ| are treated as rounding noise.
RarityVerdict identify_rare(const EntropyProfile& profile, double multiplier = 1.0);

std::vector<double> class_centroid(const Dataset& ds, const std::string& cls);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct OverlapResult {
  std::string overlap_class;
  /// Similarity to the rare centroid for every other class, in class order.
  std::vector<std::pair<std::string, double>> similarity;
};

/// Argmax over precomputed similarities; ties resolve to the earliest entry.
OverlapResult select_overlap(std::vector<std::pair<std::string, double>> similarity);

/// Overlap class = other class whose centroid has the largest cosine
/// similarity with the rare class centroid.
OverlapResult find_overlap_class(const Dataset& ds, const std::string& rare_class);

}  // namespace raresage
