#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "raresage/error.hpp"
#include "raresage/io.hpp"
#include "raresage/knowledge/sparsity.hpp"
#include "raresage/rarity.hpp"
#include "raresage/synthgen.hpp"

using namespace raresage;
using namespace raresage::synth;

namespace {

std::string csv_of(const Dataset& ds) {
  std::ostringstream out;
  write_embeddings(out, ds);
  return out.str();
}

}  // namespace

TEST_CASE("domain spec from INI") {
  std::istringstream in(
      "[domain]\ndim = 2\nseed = 5\n"
      "[class.Noise]\ncount = 10\nmean = 0,0\nscale = 1\n"
      "[class.SOZ]\ncount = 3\nmean = 4,4\nscale = 0.5\nmodes = 3\nmode_spread = 2\nshift = 1,0\ncov_multiplier = 2\n");
  const auto spec = parse_domain_spec(in);
  REQUIRE(spec.classes.size() == 2);
  CHECK(spec.classes[1].name == "SOZ");
  CHECK(spec.classes[1].modes == 3);
  CHECK(spec.classes[1].shift == std::vector<double>{1, 0});
  const auto [a, b] = gen_domains(spec);
  CHECK(a.count_of("Noise") == 10);
  CHECK(b.count_of("SOZ") == 3);
  CHECK(a[0].domain_id == "A");
  CHECK(b[0].domain_id == "B");

  std::istringstream bad("[domain]\ndim = 2\n[class.X]\ncount = 0\nmean = 0,0\n");
  CHECK_THROWS_AS(parse_domain_spec(bad).validate(), ConfigError);
  std::istringstream wrong_len("[domain]\ndim = 3\n[class.X]\ncount = 2\nmean = 0,0\n");
  CHECK_THROWS_AS(gen_domains(parse_domain_spec(wrong_len)), ConfigError);
}

TEST_CASE("zero shift: same parameters, different draws") {
  DomainSpec d;
  d.dim = 2;
  d.seed = 9;
  d.classes = {{"X", 400, {3, -2}, 1.0}};
  const auto [a, b] = gen_domains(d);
  CHECK(a[0].features != b[0].features);
  const auto ca = class_centroid(a, "X"), cb = class_centroid(b, "X");
  for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(ca[j] - cb[j]) < 0.3);
}

TEST_CASE("domain generation is a pure function of its inputs") {
  DomainSpec d;
  d.dim = 3;
  d.seed = 21;
  d.classes = {{"X", 30, {0, 0, 0}, 1.0}, {"Y", 7, {1, 2, 3}, 0.2, 2, 1.5, {1, 1, 1}, 4.0}};
  const auto [a1, b1] = gen_domains(d);
  const auto [a2, b2] = gen_domains(d);
  CHECK(csv_of(a1) == csv_of(a2));
  CHECK(csv_of(b1) == csv_of(b2));
  d.seed = 22;
  CHECK(csv_of(gen_domains(d).first) != csv_of(a1));
}

TEST_CASE("wide multimodal rare class is flagged rare") {
  std::size_t hits = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    DomainSpec d;
    d.dim = 4;
    d.seed = s;
    d.classes = {{"A", 120, {0, 0, 0, 0}, 1.0},
                 {"B", 120, {6, 0, 0, 0}, 1.0},
                 {"C", 120, {0, 6, 0, 0}, 1.0},
                 {"R", 40, {6, 6, 0, 0}, std::sqrt(10.0), 3, 4.0}};
    const auto v = identify_rare(entropy_profile(gen_domains(d).first), 1.0);
    hits += v.rare_classes == std::vector<std::string>{"R"};
  }
  CHECK(hits >= 95);
}

TEST_CASE("bold signals") {
  for (std::uint64_t s = 0; s < 30; ++s) {
    CAPTURE(s);
    CHECK(soz::sine_sparsity(gen_bold(BoldKind::sine, 128, s)) >= 0.9);
    const auto tr = gen_bold(BoldKind::transient, 128, s);
    CHECK(soz::wavelet_sparsity(tr) > soz::sine_sparsity(tr));
    CHECK(soz::sine_sparsity(gen_bold(BoldKind::white, 128, s)) <= 0.4);
  }
  CHECK(gen_bold(BoldKind::white, 64, 1) == gen_bold(BoldKind::white, 64, 1));
  CHECK_THROWS(gen_bold(BoldKind::sine, 8, 1));
  CHECK_THROWS_AS(parse_bold_kind("pink"), ConfigError);
}

TEST_CASE("scenes by kind") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    SceneSpec spec;
    spec.seed = s;
    spec.kind = SceneKind::soz;
    CHECK(soz::kappa_soz(soz::evaluate_propositions(gen_scene(spec))));
    spec.kind = SceneKind::rsn;
    CHECK_FALSE(soz::evaluate_propositions(gen_scene(spec)).p1);
    spec.kind = SceneKind::noise;
    const auto pv = soz::evaluate_propositions(gen_scene(spec));
    CHECK(pv.pv);
    CHECK_FALSE(soz::kappa_soz(pv));
  }
}

TEST_CASE("scene files are reproducible") {
  const auto dir = testutil::scratch("synth_scenes");
  SceneSpec spec;
  spec.seed = 77;
  spec.kind = SceneKind::rsn;
  soz::save_scene(dir / "a.json", gen_scene(spec));
  soz::save_scene(dir / "b.json", gen_scene(spec));
  CHECK(read_text(dir / "a.json") == read_text(dir / "b.json"));
  soz::validate_scene(gen_scene(spec));
}

TEST_CASE("paired SOZ-style domains") {
  SdgSpec spec;
  spec.seed = 3;
  spec.noise_count = 20;
  spec.soz_count = 5;
  spec.rsn_count = 20;
  const auto [a, b] = gen_sdg_pair(spec);
  CHECK(a.dim() == kSdgEmbeddingDim + 12);
  CHECK(a.count_of("SOZ") == 5);
  CHECK(b.count_of("Noise") == 20);
  // Knowledge columns of SOZ rows satisfy the rule in both domains.
  for (const auto* ds : {&a, &b})
    for (auto i : ds->indices_of("SOZ")) CHECK((*ds)[i].features[kSdgEmbeddingDim] == 1.0);

  spec.boolean_only = true;
  CHECK(gen_sdg_pair(spec).first.dim() == kSdgEmbeddingDim + 6);
  CHECK(csv_of(gen_sdg_pair(spec).second) == csv_of(gen_sdg_pair(spec).second));
}
