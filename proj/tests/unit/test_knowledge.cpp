#include <doctest.h>

#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>

#include "../oracles.hpp"
#include "helpers.hpp"
#include "raresage/error.hpp"
#include "raresage/io.hpp"
#include "raresage/knowledge/activation.hpp"
#include "raresage/knowledge/contour.hpp"
#include "raresage/knowledge/geometry.hpp"
#include "raresage/knowledge/propositions.hpp"
#include "raresage/knowledge/sparsity.hpp"
#include "raresage/rng.hpp"
#include "raresage/synthgen.hpp"

using namespace raresage;
using namespace raresage::soz;
using doctest::Approx;

namespace {

const Polygon kUnitSquare{{0, 0}, {1, 0}, {1, 1}, {0, 1}};

// L-shape: 4x4 square with the top-right 2x2 notch removed.
const Polygon kLShape{{0, 0}, {4, 0}, {4, 2}, {2, 2}, {2, 4}, {0, 4}};

std::vector<std::pair<double, double>> pairs(const Polygon& p) {
  std::vector<std::pair<double, double>> out;
  for (auto q : p) out.emplace_back(q.x, q.y);
  return out;
}

std::vector<Voxel> block(int x0, int y0, int w, int h) {
  std::vector<Voxel> out;
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) out.push_back({x, y});
  return out;
}

std::vector<double> sinusoid(std::size_t n, double bin, double amp = 1.0) {
  std::vector<double> s(n);
  for (std::size_t t = 0; t < n; ++t) s[t] = amp * std::sin(2.0 * std::numbers::pi * bin * double(t) / double(n));
  return s;
}

std::vector<double> white(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> s(n);
  for (auto& v : s) v = rng.normal();
  return s;
}

Scene synth_scene(synth::SceneKind kind, std::uint64_t seed) {
  synth::SceneSpec spec;
  spec.kind = kind;
  spec.seed = seed;
  return synth::gen_scene(spec);
}

}  // namespace

TEST_CASE("winding number basics") {
  CHECK(winding_number({0.5, 0.5}, kUnitSquare) == 1);
  CHECK(winding_number({2, 2}, kUnitSquare) == 0);
  Polygon cw(kUnitSquare.rbegin(), kUnitSquare.rend());
  CHECK(winding_number({0.5, 0.5}, cw) == -1);
  CHECK(inside({0.5, 0.5}, cw));
  CHECK_THROWS_AS(winding_number({0, 0}, Polygon{{0, 0}, {1, 1}}), ValidationError);
}

TEST_CASE("L-shaped hexagon: notch is outside") {
  CHECK_FALSE(inside({3, 3}, kLShape));
  CHECK(oracle::ray_inside(3, 3, pairs(kLShape)) == false);
  CHECK(inside({1, 3}, kLShape));
  CHECK(inside({3, 1}, kLShape));
}

TEST_CASE("winding number agrees with ray casting on random star polygons") {
  Rng rng(99);
  std::size_t disagreements = 0, tried = 0;
  while (tried < 2000) {
    const std::size_t n = 3 + rng.index(12);
    std::vector<double> ang(n);
    for (auto& a : ang) a = rng.uniform(0, 2 * std::numbers::pi);
    std::sort(ang.begin(), ang.end());
    Polygon poly;
    for (double a : ang) {
      const double r = rng.uniform(0.2, 2.0);
      poly.push_back({r * std::cos(a), r * std::sin(a)});
    }
    if (!is_simple(poly)) continue;
    const double px = rng.uniform(-2.5, 2.5), py = rng.uniform(-2.5, 2.5);
    const auto pp = pairs(poly);
    double dmin = 1e9;
    for (std::size_t i = 0; i < n; ++i) dmin = std::min(dmin, oracle::seg_dist(px, py, pp[i], pp[(i + 1) % n]));
    if (dmin < 1e-6) continue;
    ++tried;
    disagreements += inside({px, py}, poly) != oracle::ray_inside(px, py, pp);
  }
  CHECK(disagreements == 0);
}

TEST_CASE("simplicity check") {
  CHECK(is_simple(kLShape));
  CHECK_FALSE(is_simple(Polygon{{0, 0}, {2, 2}, {2, 0}, {0, 2}}));
}

TEST_CASE("contour of a filled disk") {
  GrayImage img{120, 120, std::vector<double>(120 * 120, 0.0)};
  const double cx = 60, cy = 60, r = 35;
  for (std::size_t y = 0; y < 120; ++y)
    for (std::size_t x = 0; x < 120; ++x)
      if (std::hypot(x + 0.5 - cx, y + 0.5 - cy) <= r) img.pixels[y * 120 + x] = 1.0;
  const auto poly = extract_brain_contour(img);
  REQUIRE(poly.size() >= 3);
  std::size_t wrong = 0;
  for (std::size_t y = 0; y < 120; ++y)
    for (std::size_t x = 0; x < 120; ++x) {
      const Point p{x + 0.5, y + 0.5};
      const double d = std::hypot(p.x - cx, p.y - cy);
      if (d < r - 2 && !inside(p, poly)) ++wrong;
      if (d > r + 2 && inside(p, poly)) ++wrong;
    }
  CHECK(wrong == 0);
}

TEST_CASE("contour of a filled rectangle") {
  GrayImage img{100, 90, std::vector<double>(100 * 90, 0.0)};
  for (std::size_t y = 30; y < 60; ++y)
    for (std::size_t x = 20; x < 70; ++x) img.pixels[y * 100 + x] = 200.0;
  const auto bb = bounding_box(extract_brain_contour(img));
  CHECK(std::abs(bb.min_x - 20) <= 1.0);
  CHECK(std::abs(bb.max_x - 70) <= 1.0);
  CHECK(std::abs(bb.min_y - 30) <= 1.0);
  CHECK(std::abs(bb.max_y - 60) <= 1.0);
}

TEST_CASE("contour of a constant image is undefined") {
  GrayImage img{20, 20, std::vector<double>(400, 3.0)};
  CHECK_THROWS_AS(extract_brain_contour(img), UndefinedError);
}

TEST_CASE("dbscan examples") {
  CHECK(cluster_activation(std::vector<Voxel>{}).empty());

  const std::vector<Voxel> v{{0, 0}, {0, 1}, {1, 1}, {5, 5}};
  ClusterParams p;
  p.min_size = 3;
  const auto c = cluster_activation(v, p);
  REQUIRE(c.size() == 1);
  CHECK(c[0].indices == std::vector<std::size_t>{0, 1, 2});

  auto big = block(0, 0, 20, 10);       // 200
  const auto small = block(40, 40, 10, 10);  // 100
  big.insert(big.end(), small.begin(), small.end());
  const auto survivors = cluster_activation(big);
  REQUIRE(survivors.size() == 1);
  CHECK(survivors[0].voxels.size() == 200);
  CHECK(oracle::dbscan([&] {
          std::vector<oracle::Vox> o;
          for (auto q : big) o.push_back({q.x, q.y});
          return o;
        }(),
                       1, 2, 135)
            .size() == 1);
}

TEST_CASE("dbscan agrees with the naive reference") {
  Rng rng(5);
  std::size_t mismatches = 0;
  for (int t = 0; t < 40; ++t) {
    const int side = 5 + static_cast<int>(rng.index(30));
    const std::size_t n = 1 + rng.index(400);
    std::vector<Voxel> v;
    std::vector<oracle::Vox> o;
    for (std::size_t i = 0; i < n; ++i) {
      const int x = static_cast<int>(rng.index(side)), y = static_cast<int>(rng.index(side));
      v.push_back({x, y});
      o.push_back({x, y});
    }
    ClusterParams p;
    p.eps = 1 + static_cast<int>(rng.index(2));
    p.min_pts = 2 + rng.index(4);
    p.min_size = 1 + rng.index(60);
    std::vector<std::vector<std::size_t>> got;
    for (const auto& c : cluster_activation(v, p)) got.push_back(c.indices);
    std::sort(got.begin(), got.end());
    mismatches += got != oracle::dbscan(o, p.eps, p.min_pts, p.min_size);
  }
  CHECK(mismatches == 0);
}

TEST_CASE("region fractions") {
  const auto row = block(0, 0, 10, 1);  // centres x = 1.5 .. 28.5
  const Polygon left{{0, 0}, {21, 0}, {21, 10}, {0, 10}};
  const std::vector<Polygon> region{left};
  CHECK(region_fraction(row, region) == Approx(0.7));

  const std::vector<Polygon> wide{{{-5, -5}, {100, -5}, {100, 50}, {-5, 50}}};
  CHECK(region_fraction(row, wide) == 1.0);
  const std::vector<Polygon> far{{{200, 200}, {210, 200}, {210, 210}}};
  CHECK(region_fraction(row, far) == 0.0);
}

TEST_CASE("gini index") {
  CHECK(gini_index(std::vector<double>{2, 2, 2, 2, 2}) == 0.0);
  CHECK(gini_index(std::vector<double>{0, 0, 1, 0}) == 0.75);
  CHECK_THROWS_AS(gini_index(std::vector<double>{0, 0, 0}), UndefinedError);
  CHECK_THROWS_AS(gini_index(std::vector<double>{1, -1}), ValidationError);
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> v(1 + rng.index(50));
    for (auto& x : v) x = rng.uniform() * 10;
    std::vector<double> doubled;
    for (double x : v) doubled.push_back(2 * x);
    CHECK(gini_index(v) == Approx(oracle::gini(v)).epsilon(1e-12));
    CHECK(std::abs(gini_index(doubled) - gini_index(v)) < 1e-12);
  }
}

TEST_CASE("spectrum magnitudes match a direct DFT") {
  const auto s = white(100, 8);
  const auto fast = spectrum_magnitudes(s);
  const auto slow = oracle::dft_magnitudes(s);
  REQUIRE(fast.size() == slow.size());
  for (std::size_t k = 0; k < fast.size(); ++k) CHECK(fast[k] == Approx(slow[k]).epsilon(1e-9));
}

TEST_CASE("sine-domain sparsity") {
  CHECK(sine_sparsity(sinusoid(64, 5)) >= 0.95);
  std::vector<double> impulse(64, 0.0);
  impulse[0] = 1.0;
  CHECK(sine_sparsity(impulse) <= 0.05);
  for (std::uint64_t seed = 0; seed < 10; ++seed) CHECK(sine_sparsity(sinusoid(128, 7)) > sine_sparsity(white(128, seed)));
  CHECK_THROWS(sine_sparsity(std::vector<double>(8, 1.0)));
}

TEST_CASE("haar details") {
  const auto d = haar_details(std::vector<double>{1, 1, 1, 1});
  for (double x : d) CHECK(x == 0.0);
  const auto e = haar_details(std::vector<double>{1, -1, 0, 0});
  CHECK(e[0] == Approx(std::sqrt(2.0)));
  CHECK(pad_pow2(std::vector<double>(20, 1.0)).size() == 32);
  CHECK(pad_pow2(std::vector<double>(3, 1.0)).size() == 16);
}

TEST_CASE("wavelet-domain sparsity") {
  std::vector<double> pulse(128, 0.0);
  for (std::size_t t = 40; t < 48; ++t) pulse[t] = 1.0;
  CHECK(wavelet_sparsity(pulse) >= 0.8);
  CHECK_THROWS_AS(wavelet_sparsity(std::vector<double>(16, 4.0)), UndefinedError);
  for (std::uint64_t seed = 0; seed < 10; ++seed) CHECK(wavelet_sparsity(white(128, seed)) < wavelet_sparsity(pulse));
}

TEST_CASE("kappa truth table against the prose rule") {
  std::size_t mismatches = 0;
  for (unsigned m = 0; m < 64; ++m) {
    const bool b[6] = {bool(m & 1), bool(m & 2), bool(m & 4), bool(m & 8), bool(m & 16), bool(m & 32)};
    mismatches += kappa_soz(b[0], b[1], b[2], b[3], b[4], b[5]) != oracle::soz_rule(b[0], b[1], b[2], b[3], b[4], b[5]);
  }
  CHECK(mismatches == 0);
  CHECK(kappa_soz(true, false, true, true, false, false));
  CHECK_FALSE(kappa_soz(true, false, true, true, true, false));
  CHECK(kappa_soz(true, false, true, true, true, true));
}

TEST_CASE("propositions on generated scenes") {
  const auto soz_pv = evaluate_propositions(synth_scene(synth::SceneKind::soz, 1));
  CHECK(soz_pv.p1);
  CHECK_FALSE(soz_pv.ps);
  CHECK(soz_pv.pa);
  CHECK(soz_pv.pg);
  CHECK_FALSE(soz_pv.pw);
  CHECK_FALSE(soz_pv.pv);
  CHECK(kappa_soz(soz_pv));

  const auto rsn_pv = evaluate_propositions(synth_scene(synth::SceneKind::rsn, 1));
  CHECK(rsn_pv.cluster_count >= 2);
  CHECK_FALSE(rsn_pv.p1);
}

TEST_CASE("two surviving clusters make p1 false") {
  auto s = synth_scene(synth::SceneKind::soz, 4);
  const auto pv = evaluate_propositions(s);
  REQUIRE(pv.p1);
  // Mirror the blob across the vertical midline; both copies stay in the brain.
  const auto c = cluster_activation(s.activation)[0];
  const int cols = s.width / kVoxelPixels;
  for (auto v : c.voxels) s.activation.push_back({cols - 1 - v.x, v.y});
  const auto two = evaluate_propositions(s);
  CHECK(two.cluster_count == 2);
  CHECK_FALSE(two.p1);
}

TEST_CASE("zero activation: everything off") {
  auto s = synth_scene(synth::SceneKind::soz, 2);
  s.activation.clear();
  const auto pv = evaluate_propositions(s);
  CHECK(pv == PropositionVector{});
}

TEST_CASE("scene files") {
  const auto dir = testutil::scratch("scenes");
  const auto s = synth_scene(synth::SceneKind::noise, 3);
  save_scene(dir / "a.json", s);
  save_scene(dir / "b.json", synth_scene(synth::SceneKind::noise, 3));
  CHECK(read_text(dir / "a.json") == read_text(dir / "b.json"));
  CHECK(load_scene(dir / "a.json") == s);

  // BOLD from a side CSV.
  auto j = scene_to_json(s);
  {
    std::ofstream csv(dir / "bold.csv");
    csv << "bold\n";
    for (double v : s.bold) csv << format_double(v) << "\n";
  }
  j["bold"] = "bold.csv";
  CHECK(scene_from_json(j, dir).bold == s.bold);

  auto bad = s;
  bad.bold.resize(8);
  CHECK_THROWS_AS(validate_scene(bad), ValidationError);
}

TEST_CASE("knowledge feature layout") {
  CHECK(knowledge_feature_names().size() == 12);
  CHECK(knowledge_feature_names(true).size() == 6);
  PropositionVector pv;
  pv.p1 = true;
  pv.cluster_count = 3;
  const auto f = knowledge_features(pv);
  CHECK(f[0] == 1.0);
  CHECK(f[6] == 3.0);
}

TEST_CASE("expert knowledge extractor") {
  std::vector<Scene> scenes;
  for (std::uint64_t s = 0; s < 12; ++s)
    for (auto k : {synth::SceneKind::soz, synth::SceneKind::rsn, synth::SceneKind::noise})
      scenes.push_back(synth_scene(k, 100 + s));
  // Sine BOLD on a soz layout breaks kappa through ps only.
  for (std::uint64_t s = 0; s < 6; ++s) {
    synth::SceneSpec spec;
    spec.seed = 500 + s;
    spec.bold = synth::BoldKind::sine;
    scenes.push_back(synth::gen_scene(spec));
  }
  const std::size_t n = scenes.size();
  auto label = std::make_unique<bool[]>(n);
  auto flipped = std::make_unique<bool[]>(n);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    label[i] = kappa_soz(evaluate_propositions(scenes[i]));
    flipped[i] = !label[i];
    positives += label[i];
  }
  REQUIRE(positives > 0);
  REQUIRE(positives < scenes.size());

  for (bool boolean_only : {false, true}) {
    EkeConfig cfg;
    cfg.boolean_only = boolean_only;
    for (const bool* y : {label.get(), flipped.get()}) {
      const auto m = train_eke(scenes, std::span<const bool>(y, n), {}, cfg);
      std::size_t hit = 0;
      for (std::size_t i = 0; i < scenes.size(); ++i) {
        const auto p = m.predict(eke_observation(scenes[i], {}, boolean_only));
        hit += (p.super_label == kRareSuper) == y[i];
      }
      CHECK(hit == scenes.size());
    }
  }
  auto all = std::make_unique<bool[]>(n);
  std::fill_n(all.get(), n, true);
  CHECK_THROWS_AS(train_eke(scenes, std::span<const bool>(all.get(), n)), TrainingError);
}
