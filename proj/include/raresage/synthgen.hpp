#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "raresage/data_model.hpp"
#include "raresage/knowledge/propositions.hpp"

namespace raresage::synth {

struct ClassSpec {
  std::string name;
  std::size_t count = 1;
  std::vector<double> mean;
  /// Per-axis standard deviation.
  double scale = 1.0;
  /// Sub-clusters; mode centres sit `mode_spread` from the mean in seeded
  /// random directions shared by both domains.
  std::size_t modes = 1;
  double mode_spread = 0.0;
  /// Mean offset applied in domain B; empty means none.
  std::vector<double> shift;
  /// Covariance multiplier in domain B (standard deviation scales by its root).
  double cov_multiplier = 1.0;
};

struct DomainSpec {
  std::size_t dim = 2;
  std::uint64_t seed = 0;
  std::string domain_a = "A";
  std::string domain_b = "B";
  std::vector<ClassSpec> classes;

  /// Throws ConfigError on counts < 1, scales <= 0, dim < 2 or vector lengths != dim.
  void validate() const;
};

/// INI text: a [domain] section (dim, seed, domain_a, domain_b) followed by
/// one [class.NAME] section per class, in output order.
DomainSpec parse_domain_spec(std::istream& in);
DomainSpec load_domain_spec(const std::filesystem::path& path);

std::pair<Dataset, Dataset> gen_domains(const DomainSpec& spec);

enum class BoldKind { sine, transient, white };

const char* to_string(BoldKind kind);
/// Throws ConfigError for an unknown name.
BoldKind parse_bold_kind(const std::string& name);

/// sine: 1-3 sinusoids on exact DFT bins; transient: 1-2 rectangular pulses
/// on a zero baseline; white: Gaussian noise. Needs length >= 16.
std::vector<double> gen_bold(BoldKind kind, std::size_t length, std::uint64_t seed);

enum class SceneKind { soz, rsn, noise };

const char* to_string(SceneKind kind);
SceneKind parse_scene_kind(const std::string& name);

struct SceneSpec {
  SceneKind kind = SceneKind::soz;
  int width = 192;
  int height = 192;
  std::size_t bold_length = 128;
  /// Kind default when unset: soz -> transient, rsn -> sine, noise -> white.
  std::optional<BoldKind> bold;
  std::uint64_t seed = 0;
};

/// Anatomy: elliptic brain, four gray patches, a central white region and two
/// midline vascular strips.
///   soz:   one blob of 145-200 voxels inside a gray patch, transient BOLD,
///          plus a few isolated voxels that DBSCAN discards.
///   rsn:   two lateral blobs, mostly outside gray matter, sine BOLD.
///   noise: two blobs straddling the brain edge over the vascular strips, white BOLD.
soz::Scene gen_scene(const SceneSpec& spec);

struct SdgSpec {
  std::uint64_t seed = 0;
  std::size_t noise_count = 80;
  std::size_t soz_count = 16;
  std::size_t rsn_count = 80;
  /// Offset of the Noise embedding mean in domain B (along axis 1).
  double noise_shift = -3.0;
  bool boolean_only = false;
};

inline constexpr std::size_t kSdgEmbeddingDim = 4;

/// Two domains whose rows carry a 4-d embedding followed by knowledge
/// features from a generated scene per row. Classes: Noise, SOZ, RSN. In
/// domain B the Noise embedding moves onto SOZ territory while scenes keep
/// their kind, so knowledge features are domain-invariant.
std::pair<Dataset, Dataset> gen_sdg_pair(const SdgSpec& spec);

}  // namespace raresage::synth
