#include "raresage/knowledge/propositions.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "raresage/error.hpp"
#include "raresage/io.hpp"
#include "raresage/knowledge/sparsity.hpp"

namespace raresage::soz {

// ---------------------------------------------------------------------------
// scene validation and io

void validate_scene(const Scene& scene) {
  if (scene.width <= 0 || scene.height <= 0) throw ValidationError("scene size must be positive");
  auto check = [](const Polygon& p, const std::string& what) {
    if (p.size() < 3) throw ValidationError(what + " polygon has fewer than 3 vertices");
    for (const auto& v : p) {
      if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw ValidationError(what + " polygon has a non-finite vertex");
    }
    if (!is_simple(p)) throw ValidationError(what + " polygon is not simple");
  };
  check(scene.brain, "brain");
  for (const auto& p : scene.gray) check(p, "gray");
  for (const auto& p : scene.white) check(p, "white");
  for (const auto& p : scene.vascular) check(p, "vascular");
  const int vw = scene.width / kVoxelPixels;
  const int vh = scene.height / kVoxelPixels;
  for (const auto& v : scene.activation) {
    if (v.x < 0 || v.y < 0 || v.x >= vw || v.y >= vh) {
      throw ValidationError("activation voxel (" + std::to_string(v.x) + "," + std::to_string(v.y) +
                            ") outside the voxel grid");
    }
  }
  if (scene.bold.size() < 16) throw ValidationError("BOLD series shorter than 16 samples");
  for (double b : scene.bold) {
    if (!std::isfinite(b)) throw ValidationError("BOLD series has a non-finite value");
  }
}

namespace {

nlohmann::json polygon_json(const Polygon& p) {
  auto a = nlohmann::json::array();
  for (const auto& v : p) a.push_back({v.x, v.y});
  return a;
}

Polygon polygon_from(const nlohmann::json& j) {
  Polygon p;
  for (const auto& v : j) p.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  return p;
}

std::vector<Polygon> polygons_from(const nlohmann::json& j) {
  std::vector<Polygon> out;
  for (const auto& p : j) out.push_back(polygon_from(p));
  return out;
}

std::vector<double> load_bold_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<double> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      const double v = std::stod(line, &used);
      if (used != line.size()) throw std::invalid_argument(line);
      out.push_back(v);
    } catch (const std::exception&) {
      if (row == 1) continue;  // header
      throw FormatError(path.string() + " row " + std::to_string(row) + ": not a number");
    }
  }
  return out;
}

}  // namespace

nlohmann::json scene_to_json(const Scene& scene) {
  auto polys = [](const std::vector<Polygon>& ps) {
    auto a = nlohmann::json::array();
    for (const auto& p : ps) a.push_back(polygon_json(p));
    return a;
  };
  auto act = nlohmann::json::array();
  for (const auto& v : scene.activation) act.push_back({v.x, v.y});
  return {
      {"width", scene.width},
      {"height", scene.height},
      {"brain", polygon_json(scene.brain)},
      {"gray", polys(scene.gray)},
      {"white", polys(scene.white)},
      {"vascular", polys(scene.vascular)},
      {"activation", act},
      {"bold", scene.bold},
  };
}

Scene scene_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  try {
    Scene s;
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    s.brain = polygon_from(j.at("brain"));
    s.gray = polygons_from(j.value("gray", nlohmann::json::array()));
    s.white = polygons_from(j.value("white", nlohmann::json::array()));
    s.vascular = polygons_from(j.value("vascular", nlohmann::json::array()));
    for (const auto& v : j.at("activation")) s.activation.push_back({v.at(0).get<int>(), v.at(1).get<int>()});
    const auto& bold = j.at("bold");
    if (bold.is_string()) {
      s.bold = load_bold_csv(base_dir / bold.get<std::string>());
    } else {
      s.bold = bold.get<std::vector<double>>();
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed scene: ") + e.what());
  }
}

Scene load_scene(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  auto scene = scene_from_json(j, path.parent_path());
  validate_scene(scene);
  return scene;
}

void save_scene(const std::filesystem::path& path, const Scene& scene) {
  write_text_atomic(path, scene_to_json(scene).dump() + "\n");
}

// ---------------------------------------------------------------------------
// propositions

double region_fraction(std::span<const Voxel> voxels, std::span<const Polygon> region) {
  if (voxels.empty()) throw ValidationError("region fraction of an empty cluster");
  std::vector<BoundingBox> boxes;
  boxes.reserve(region.size());
  for (const auto& p : region) boxes.push_back(bounding_box(p));
  std::size_t hits = 0;
  for (const auto& v : voxels) {
    const Point c = voxel_center(v);
    for (std::size_t r = 0; r < region.size(); ++r) {
      if (boxes[r].contains(c) && inside(c, region[r])) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(voxels.size());
}

double region_fraction(const Cluster& cluster, std::span<const Polygon> region) {
  return region_fraction(cluster.voxels, region);
}

PropositionVector evaluate_propositions(const Scene& scene, const Thresholds& t) {
  PropositionVector pv;
  const auto clusters = cluster_activation(scene.activation, t.clusters);
  pv.cluster_count = clusters.size();
  if (clusters.empty()) return pv;

  if (clusters.size() == 1) {
    const auto box = bounding_box(scene.brain);
    pv.p1 = true;
    for (const auto& v : clusters.front().voxels) {
      const Point c = voxel_center(v);
      if (!box.contains(c) || !inside(c, scene.brain)) {
        pv.p1 = false;
        break;
      }
    }
  }

  std::vector<Voxel> active;
  for (const auto& cl : clusters) active.insert(active.end(), cl.voxels.begin(), cl.voxels.end());
  pv.gray_fraction = region_fraction(active, scene.gray);
  pv.white_fraction = region_fraction(active, scene.white);
  pv.vascular_fraction = region_fraction(active, scene.vascular);
  pv.pg = pv.gray_fraction >= t.gray;
  pv.pw = pv.white_fraction >= t.white;
  pv.pv = pv.vascular_fraction >= t.vascular;

  // A series with nothing to be sparse about is not sparse.
  try {
    pv.gini_sine = sine_sparsity(scene.bold);
  } catch (const UndefinedError&) {
    pv.gini_sine = 0.0;
  }
  try {
    pv.gini_wavelet = wavelet_sparsity(scene.bold);
  } catch (const UndefinedError&) {
    pv.gini_wavelet = 0.0;
  }
  pv.ps = pv.gini_sine >= t.sine;
  pv.pa = pv.gini_wavelet >= t.wavelet;
  return pv;
}

bool kappa_soz(bool p1, bool ps, bool pa, bool pg, bool pw, bool pv) {
  return p1 && !ps && pa && (pg && (!pw || (pw && pv)));
}

bool kappa_soz(const PropositionVector& v) { return kappa_soz(v.p1, v.ps, v.pa, v.pg, v.pw, v.pv); }

std::vector<double> knowledge_features(const PropositionVector& pv, bool boolean_only) {
  std::vector<double> f{
      pv.p1 ? 1.0 : 0.0, pv.ps ? 1.0 : 0.0, pv.pa ? 1.0 : 0.0,
      pv.pg ? 1.0 : 0.0, pv.pw ? 1.0 : 0.0, pv.pv ? 1.0 : 0.0,
  };
  if (!boolean_only) {
    f.insert(f.end(), {static_cast<double>(pv.cluster_count), pv.gray_fraction, pv.white_fraction,
                       pv.vascular_fraction, pv.gini_sine, pv.gini_wavelet});
  }
  return f;
}

std::vector<std::string> knowledge_feature_names(bool boolean_only) {
  std::vector<std::string> names{"p1", "ps", "pa", "pg", "pw", "pv"};
  if (!boolean_only) {
    names.insert(names.end(), {"cluster_count", "gray_fraction", "white_fraction",
                               "vascular_fraction", "gini_sine", "gini_wavelet"});
  }
  return names;
}

Observation eke_observation(const Scene& scene, const Thresholds& thresholds, bool boolean_only,
                            std::string id) {
  Observation o;
  o.id = std::move(id);
  o.features = knowledge_features(evaluate_propositions(scene, thresholds), boolean_only);
  return o;
}

Machine train_eke(std::span<const Scene> scenes, std::span<const bool> rare,
                  const Thresholds& thresholds, const EkeConfig& config) {
  if (scenes.size() != rare.size()) throw ValidationError("one label per scene required");
  if (scenes.empty()) throw TrainingError("no scenes to train on");
  std::vector<Observation> obs;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    auto o = eke_observation(scenes[i], thresholds, config.boolean_only, "scene" + std::to_string(i));
    o.label = rare[i] ? kRareSuper : kNonRareSuper;
    obs.push_back(std::move(o));
  }
  const std::vector<std::string> classes{kRareSuper, kNonRareSuper};
  const Dataset ds(std::move(obs), classes);
  return train(MachineKind::svm_linear, ds, identity_label_set(classes), config.train);
}

}  // namespace raresage::soz
