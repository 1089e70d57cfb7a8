#include "raresage/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "raresage/error.hpp"
#include "raresage/io.hpp"
#include "raresage/rng.hpp"

namespace raresage::synth {

namespace {

constexpr std::uint64_t kTagDomainA = 0xA;
constexpr std::uint64_t kTagDomainB = 0xB;
constexpr std::uint64_t kTagModes = 0x40;
constexpr std::uint64_t kTagBold = 0xB01D;
constexpr std::uint64_t kTagScene = 0x5CE;

std::vector<double> parse_vector(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError(what + ": '" + item + "' is not a number");
    }
  }
  return out;
}

std::string domain_id_of(const std::string& domain, std::size_t i) {
  std::string n = std::to_string(i);
  return domain + "-" + std::string(n.size() < 5 ? 5 - n.size() : 0, '0') + n;
}

}  // namespace

// ---------------------------------------------------------------------------
// embedding domains

void DomainSpec::validate() const {
  if (dim < 2) throw ConfigError("domain dim must be at least 2");
  if (classes.empty()) throw ConfigError("domain spec has no classes");
  if (domain_a == domain_b) throw ConfigError("domain ids must differ");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto& c = classes[i];
    const std::string tag = "class '" + c.name + "'";
    if (c.name.empty()) throw ConfigError("class name is empty");
    for (std::size_t j = 0; j < i; ++j) {
      if (classes[j].name == c.name) throw ConfigError(tag + " is defined twice");
    }
    if (c.count < 1) throw ConfigError(tag + ": count must be at least 1");
    if (c.mean.size() != dim) throw ConfigError(tag + ": mean has " + std::to_string(c.mean.size()) + " entries, dim is " + std::to_string(dim));
    if (!c.shift.empty() && c.shift.size() != dim) throw ConfigError(tag + ": shift length differs from dim");
    if (!(c.scale > 0.0)) throw ConfigError(tag + ": scale must be positive");
    if (c.modes < 1) throw ConfigError(tag + ": modes must be at least 1");
    if (!(c.mode_spread >= 0.0)) throw ConfigError(tag + ": mode_spread must be non-negative");
    if (!(c.cov_multiplier > 0.0)) throw ConfigError(tag + ": cov_multiplier must be positive");
  }
}

DomainSpec parse_domain_spec(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("domain spec: ") + e.what());
  }
  DomainSpec spec;
  try {
    for (const auto& [section, body] : tree) {
      if (section == "domain") {
        spec.dim = body.get<std::size_t>("dim", spec.dim);
        spec.seed = body.get<std::uint64_t>("seed", spec.seed);
        spec.domain_a = body.get<std::string>("domain_a", spec.domain_a);
        spec.domain_b = body.get<std::string>("domain_b", spec.domain_b);
      } else if (section.rfind("class.", 0) == 0) {
        ClassSpec c;
        c.name = section.substr(6);
        c.count = body.get<std::size_t>("count");
        c.mean = parse_vector(body.get<std::string>("mean"), section + ".mean");
        c.scale = body.get<double>("scale", c.scale);
        c.modes = body.get<std::size_t>("modes", c.modes);
        c.mode_spread = body.get<double>("mode_spread", c.mode_spread);
        if (auto s = body.get_optional<std::string>("shift")) c.shift = parse_vector(*s, section + ".shift");
        c.cov_multiplier = body.get<double>("cov_multiplier", c.cov_multiplier);
        spec.classes.push_back(std::move(c));
      } else {
        throw ConfigError("domain spec: unknown section [" + section + "]");
      }
    }
  } catch (const pt::ptree_error& e) {
    throw ConfigError(std::string("domain spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

DomainSpec load_domain_spec(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  return parse_domain_spec(in);
}

std::pair<Dataset, Dataset> gen_domains(const DomainSpec& spec) {
  spec.validate();
  const std::size_t d = spec.dim;

  // Mode centres, shared by both domains.
  std::vector<std::vector<std::vector<double>>> centres;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    const auto& cs = spec.classes[c];
    Rng rng(derive_seed(spec.seed, kTagModes + c));
    std::vector<std::vector<double>> modes;
    for (std::size_t m = 0; m < cs.modes; ++m) {
      std::vector<double> dir(d);
      double norm = 0.0;
      for (auto& v : dir) {
        v = rng.normal();
        norm += v * v;
      }
      norm = std::sqrt(norm);
      std::vector<double> centre = cs.mean;
      if (cs.modes > 1 && norm > 0.0) {
        for (std::size_t j = 0; j < d; ++j) centre[j] += cs.mode_spread * dir[j] / norm;
      }
      modes.push_back(std::move(centre));
    }
    centres.push_back(std::move(modes));
  }

  auto draw = [&](bool shifted) {
    const std::string& domain = shifted ? spec.domain_b : spec.domain_a;
    Rng rng(derive_seed(spec.seed, shifted ? kTagDomainB : kTagDomainA));
    std::vector<Observation> obs;
    std::vector<std::string> names;
    std::size_t running = 0;
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
      const auto& cs = spec.classes[c];
      names.push_back(cs.name);
      const double sd = cs.scale * (shifted ? std::sqrt(cs.cov_multiplier) : 1.0);
      for (std::size_t i = 0; i < cs.count; ++i) {
        const auto& centre = centres[c][i % cs.modes];
        Observation o;
        o.id = domain_id_of(domain, running++);
        o.domain_id = domain;
        o.label = cs.name;
        o.features.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
          const double off = shifted && !cs.shift.empty() ? cs.shift[j] : 0.0;
          o.features[j] = centre[j] + off + sd * rng.normal();
        }
        obs.push_back(std::move(o));
      }
    }
    return Dataset(std::move(obs), std::move(names));
  };
  return {draw(false), draw(true)};
}

// ---------------------------------------------------------------------------
// BOLD signals

const char* to_string(BoldKind kind) {
  switch (kind) {
    case BoldKind::sine: return "sine";
    case BoldKind::transient: return "transient";
    case BoldKind::white: return "white";
  }
  return "?";
}

BoldKind parse_bold_kind(const std::string& name) {
  if (name == "sine") return BoldKind::sine;
  if (name == "transient") return BoldKind::transient;
  if (name == "white") return BoldKind::white;
  throw ConfigError("unknown signal kind '" + name + "' (expected sine|transient|white)");
}

std::vector<double> gen_bold(BoldKind kind, std::size_t length, std::uint64_t seed) {
  if (length < 16) throw ValidationError("BOLD length must be at least 16");
  Rng rng(seed);
  std::vector<double> x(length, 0.0);
  const double n = static_cast<double>(length);
  switch (kind) {
    case BoldKind::sine: {
      // Bins from n/16 up to n/4 keep the Haar details spread out.
      const std::size_t lo = std::max<std::size_t>(2, length / 16);
      const std::size_t hi = std::max<std::size_t>(lo + 3, length / 4);
      std::vector<std::size_t> bins;
      const std::size_t count = 1 + rng.index(3);
      while (bins.size() < count) {
        const std::size_t b = lo + rng.index(hi - lo);
        if (std::find(bins.begin(), bins.end(), b) == bins.end()) bins.push_back(b);
      }
      for (auto b : bins) {
        const double amp = rng.uniform(0.5, 1.5);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (std::size_t t = 0; t < length; ++t) {
          x[t] += amp * std::cos(2.0 * std::numbers::pi * static_cast<double>(b * t) / n + phase);
        }
      }
      break;
    }
    case BoldKind::transient: {
      const std::size_t pulses = 1 + rng.index(2);
      for (std::size_t p = 0; p < pulses; ++p) {
        const std::size_t width = std::min<std::size_t>(3 + rng.index(4), length);
        const std::size_t start = rng.index(length - width + 1);
        const double amp = rng.uniform(1.0, 2.0);
        for (std::size_t t = start; t < start + width; ++t) x[t] += amp;
      }
      break;
    }
    case BoldKind::white:
      for (auto& v : x) v = rng.normal();
      break;
  }
  return x;
}

// ---------------------------------------------------------------------------
// scenes

const char* to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::soz: return "soz";
    case SceneKind::rsn: return "rsn";
    case SceneKind::noise: return "noise";
  }
  return "?";
}

SceneKind parse_scene_kind(const std::string& name) {
  if (name == "soz") return SceneKind::soz;
  if (name == "rsn") return SceneKind::rsn;
  if (name == "noise") return SceneKind::noise;
  throw ConfigError("unknown scene kind '" + name + "' (expected soz|rsn|noise)");
}

namespace {

constexpr std::size_t kPolygonVertices = 64;

/// Voxels whose centres lie within `radius` px of `centre`, with a ragged
/// edge that only ever shrinks the disc.
void add_blob(std::vector<soz::Voxel>& out, soz::Point centre, double radius, int vw, int vh, Rng& rng,
              double ragged = 1.5) {
  const int x0 = std::max(0, static_cast<int>(std::floor((centre.x - radius) / soz::kVoxelPixels)) - 1);
  const int x1 = std::min(vw - 1, static_cast<int>(std::ceil((centre.x + radius) / soz::kVoxelPixels)) + 1);
  const int y0 = std::max(0, static_cast<int>(std::floor((centre.y - radius) / soz::kVoxelPixels)) - 1);
  const int y1 = std::min(vh - 1, static_cast<int>(std::ceil((centre.y + radius) / soz::kVoxelPixels)) + 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const auto c = soz::voxel_center({x, y});
      const double r = std::hypot(c.x - centre.x, c.y - centre.y);
      if (r <= radius - ragged * rng.uniform()) out.push_back({x, y});
    }
  }
}

}  // namespace

soz::Scene gen_scene(const SceneSpec& spec) {
  if (spec.width < 96 || spec.height < 96) throw ValidationError("scene grid must be at least 96x96 pixels");
  if (spec.bold_length < 16) throw ValidationError("BOLD length must be at least 16");
  Rng rng(derive_seed(spec.seed, kTagScene));
  soz::Scene s;
  s.width = spec.width;
  s.height = spec.height;
  const int vw = s.width / soz::kVoxelPixels;
  const int vh = s.height / soz::kVoxelPixels;

  // Geometry scales with the grid; the defaults are laid out for 192 px.
  const double unit = std::min(s.width, s.height) / 192.0;
  const soz::Point mid{s.width / 2.0, s.height / 2.0};
  const double rx = (78.0 + rng.uniform(0.0, 4.0)) * unit;
  const double ry = (86.0 + rng.uniform(0.0, 4.0)) * unit;
  s.brain = soz::ellipse_polygon(mid, rx, ry, kPolygonVertices, rng.uniform(0.0, 0.1));

  const double patch_r = (29.0 + rng.uniform(0.0, 2.0)) * unit;
  const double patch_d = 45.0 * unit;
  std::vector<soz::Point> patch_centres;
  for (int q = 0; q < 4; ++q) {
    const double a = std::numbers::pi / 4.0 + q * std::numbers::pi / 2.0;
    const soz::Point c{mid.x + patch_d * std::cos(a), mid.y + patch_d * std::sin(a)};
    patch_centres.push_back(c);
    s.gray.push_back(soz::ellipse_polygon(c, patch_r, patch_r, kPolygonVertices));
  }
  s.white.push_back(soz::ellipse_polygon(mid, 12.0 * unit, 12.0 * unit, kPolygonVertices));
  const double half = 6.0 * unit;
  const double top = mid.y - ry;
  const double bottom = mid.y + ry;
  s.vascular.push_back({{mid.x - half, top - 6 * unit}, {mid.x + half, top - 6 * unit},
                        {mid.x + half, top + 36 * unit}, {mid.x - half, top + 36 * unit}});
  s.vascular.push_back({{mid.x - half, bottom - 36 * unit}, {mid.x + half, bottom - 36 * unit},
                        {mid.x + half, bottom + 6 * unit}, {mid.x - half, bottom + 6 * unit}});

  BoldKind bold = BoldKind::transient;
  switch (spec.kind) {
    case SceneKind::soz: {
      const auto& pc = patch_centres[rng.index(4)];
      const double r = (7.3 + rng.uniform(0.0, 0.7)) * soz::kVoxelPixels * unit;
      const double slack = std::max(0.0, patch_r - r - 1.5 * unit);
      const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double d = std::min(slack, 4.0 * unit) * rng.uniform();
      add_blob(s.activation, {pc.x + d * std::cos(a), pc.y + d * std::sin(a)}, r, vw, vh, rng, 1.5 * unit);
      // Scattered single voxels inside the brain; too sparse to survive.
      const std::size_t stray = rng.index(6);
      for (std::size_t i = 0; i < stray; ++i) {
        const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double u = 0.3 + 0.5 * rng.uniform();
        const soz::Point p{mid.x + u * rx * std::cos(t), mid.y + u * ry * std::sin(t)};
        s.activation.push_back({static_cast<int>(p.x) / soz::kVoxelPixels, static_cast<int>(p.y) / soz::kVoxelPixels});
      }
      bold = BoldKind::transient;
      break;
    }
    case SceneKind::rsn: {
      for (int side : {-1, 1}) {
        const double r = (7.2 + rng.uniform(0.0, 0.8)) * soz::kVoxelPixels * unit;
        const soz::Point c{mid.x + side * (52.0 + rng.uniform(-2.0, 2.0)) * unit,
                           mid.y + rng.uniform(-4.0, 4.0) * unit};
        add_blob(s.activation, c, r, vw, vh, rng, 1.5 * unit);
      }
      bold = BoldKind::sine;
      break;
    }
    case SceneKind::noise: {
      // Peripheral blobs on both midline strips, each straddling the brain edge.
      for (double y : {top + 3.0 * unit, bottom - 3.0 * unit}) {
        const double r = (7.8 + rng.uniform(0.0, 0.7)) * soz::kVoxelPixels * unit;
        add_blob(s.activation, {mid.x + rng.uniform(-4.0, 4.0) * unit, y}, r, vw, vh, rng, 1.5 * unit);
      }
      bold = BoldKind::white;
      break;
    }
  }
  s.bold = gen_bold(spec.bold.value_or(bold), spec.bold_length, derive_seed(spec.seed, kTagBold));
  soz::validate_scene(s);
  return s;
}

// ---------------------------------------------------------------------------
// SDG pair

std::pair<Dataset, Dataset> gen_sdg_pair(const SdgSpec& spec) {
  if (spec.noise_count < 1 || spec.soz_count < 1 || spec.rsn_count < 1) {
    throw ConfigError("every SDG class needs at least one member");
  }
  DomainSpec d;
  d.dim = kSdgEmbeddingDim;
  d.seed = spec.seed;
  d.classes = {
      {"Noise", spec.noise_count, {4.0, 1.5, 0.0, 0.0}, 0.7, 1, 0.0, {0.0, spec.noise_shift, 0.0, 0.0}, 1.0},
      {"SOZ", spec.soz_count, {4.0, -1.5, 0.0, 0.0}, 0.7, 1, 0.0, {}, 1.0},
      {"RSN", spec.rsn_count, {0.0, 5.0, 0.0, 0.0}, 0.7, 1, 0.0, {}, 1.0},
  };
  auto [a, b] = gen_domains(d);

  const soz::Thresholds thresholds;
  auto attach = [&](const Dataset& ds, std::uint64_t tag) {
    std::vector<Observation> obs;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      Observation o = ds[i];
      SceneSpec ss;
      ss.kind = *o.label == "Noise" ? SceneKind::noise : *o.label == "SOZ" ? SceneKind::soz : SceneKind::rsn;
      ss.seed = derive_seed(derive_seed(spec.seed, tag), i);
      const auto k = soz::knowledge_features(soz::evaluate_propositions(gen_scene(ss), thresholds),
                                             spec.boolean_only);
      o.features.insert(o.features.end(), k.begin(), k.end());
      obs.push_back(std::move(o));
    }
    return Dataset(std::move(obs), ds.classes());
  };
  return {attach(a, kTagDomainA), attach(b, kTagDomainB)};
}

}  // namespace raresage::synth
