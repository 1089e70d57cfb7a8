#include <doctest.h>

#include "../oracles.hpp"
#include "helpers.hpp"
#include "raresage/error.hpp"
#include "raresage/pipeline.hpp"
#include "raresage/rarity.hpp"
#include "raresage/rng.hpp"
#include "raresage/synthgen.hpp"

using namespace raresage;

namespace {

void blob(std::vector<testutil::Row>& rows, Rng& rng, const std::string& label, std::size_t n,
          std::vector<double> mean, double sd) {
  for (std::size_t i = 0; i < n; ++i) {
    auto x = mean;
    for (auto& v : x) v += sd * rng.normal();
    rows.push_back({label, x});
  }
}

// C is the big class (high theta) and its centroid points the same way as A's.
// Column 2 is a knowledge column on which only C is lit.
Dataset three_class(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<testutil::Row> rows;
  blob(rows, rng, "A", 30, {5, -1, 0}, 0.5);
  blob(rows, rng, "B", 30, {-1, 5, 0}, 0.5);
  blob(rows, rng, "C", 200, {5, 1, 5}, 0.5);
  return testutil::make_ds(rows);
}

PipelineConfig split_cfg() {
  PipelineConfig cfg;
  cfg.embedding_columns = {0, 1};
  cfg.knowledge_columns = {2};
  return cfg;
}

Observation at(std::vector<double> x) { return {"q", "Z", std::nullopt, std::move(x)}; }

}  // namespace

TEST_CASE("plan: high-entropy outlier class with its nearest centroid as overlap") {
  const auto ds = three_class(1);
  const std::vector<std::size_t> emb{0, 1};
  const auto p = entropy_profile(select_columns(ds, emb));
  REQUIRE(p.theta_of("C") > p.theta_of("A"));
  REQUIRE(p.theta_of("C") > p.theta_of("B"));
  const auto plan = plan_stage(ds, split_cfg());
  REQUIRE(plan.has_value());
  CHECK(plan->rare_class == "C");
  CHECK(plan->overlap_class == "A");
  CHECK(plan->non_rare_classes == std::vector<std::string>{"B"});
  CHECK(plan->dl_machine.label_set().names() == std::vector<std::string>{kOverlapSuper, kNotOverlapSuper});
  CHECK(plan->k_machine.label_set().names() == std::vector<std::string>{kRareSuperName, kNonRareSuperName});
  CHECK(plan->k_machine.columns() == std::vector<std::size_t>{2});
}

TEST_CASE("plan: two classes force the overlap choice") {
  Rng rng(4);
  std::vector<testutil::Row> rows;
  blob(rows, rng, "rare", 8, {3, 3}, 0.4);
  blob(rows, rng, "other", 120, {0, 4}, 1.0);
  const auto ds = testutil::make_ds(rows);
  PipelineConfig cfg;
  cfg.multiplier = 0.5;
  const auto plan = plan_stage(ds, cfg);
  REQUIRE(plan.has_value());
  CHECK(plan->overlap_class == (plan->rare_class == "rare" ? "other" : "rare"));
  CHECK(plan->non_rare_classes == std::vector<std::string>{plan->overlap_class});
}

TEST_CASE("plan: equal entropies mean no rare class") {
  std::vector<testutil::Row> rows;
  for (const char* c : {"A", "B", "C"})
    for (double x : {0.0, 1.0, 2.5, 6.0}) rows.push_back({c, {x, c[0] * 1.0}});
  const auto ds = testutil::make_ds(rows);
  CHECK_FALSE(plan_stage(ds, {}).has_value());

  const auto m = fit(ds, {});
  CHECK(m.stages.empty());
  REQUIRE(m.residual_machine.has_value());
  for (const auto& o : ds.observations()) CHECK(predict_label(m, o) == m.residual_machine->predict(o).super_label);
}

TEST_CASE("fit logs a warning when nothing is rare") {
  std::vector<testutil::Row> rows;
  for (const char* c : {"A", "B"})
    for (double x : {0.0, 1.0, 2.5}) rows.push_back({c, {x, c[0] * 1.0}});
  std::vector<std::string> lines;
  fit(testutil::make_ds(rows), {}, [&](const std::string& l) { lines.push_back(l); });
  bool warned = false;
  for (const auto& l : lines) warned |= l.rfind("warning:", 0) == 0;
  CHECK(warned);
}

TEST_CASE("fuse rule table") {
  const double grid[] = {0.0, 0.5, 0.89, 0.9, 0.900001, 0.95, 0.999};
  std::size_t mismatches = 0;
  for (bool overlap : {true, false})
    for (bool rare : {true, false})
      for (double c : grid) {
        const Prediction eke{rare ? kRareSuperName : kNonRareSuperName, c, 0.0};
        const auto got = fuse(overlap ? kOverlapSuper : kNotOverlapSuper, eke, 0.9);
        mismatches += to_string(got) != oracle::fuse_table(overlap, rare, c, 0.9);
      }
  CHECK(mismatches == 0);
  CHECK(fuse(kOverlapSuper, {kRareSuperName, 0.9, 0.0}, 0.9) == FuseOutcome::overlap);
  CHECK_THROWS_AS(fuse("MAYBE", {kRareSuperName, 0.9, 0.0}, 0.9), ValidationError);
  CHECK_THROWS_AS(fuse(kOverlapSuper, {"X", 0.9, 0.0}, 0.9), ValidationError);
}

TEST_CASE("routing: rare centroid, overlap territory, the rest") {
  const auto ds = three_class(2);
  const auto m = fit(ds, split_cfg());
  REQUIRE(m.stages.size() == 1);
  const auto& st = m.stages[0];
  REQUIRE(st.rare_class == "C");

  const auto rare = trace_prediction(m, at(class_centroid(ds, "C")), m.config.t_c);
  CHECK(rare.label == "C");
  CHECK(rare.outcome == FuseOutcome::rare);

  const auto ov_obs = at(class_centroid(ds, "A"));
  const auto eke = st.k_machine.predict(ov_obs);
  CHECK((eke.super_label == kNonRareSuperName || eke.confidence <= m.config.t_c));
  const auto ov = trace_prediction(m, ov_obs, m.config.t_c);
  CHECK(ov.label == "A");
  CHECK(ov.outcome == FuseOutcome::overlap);
  CHECK_FALSE(ov.overridden);

  CHECK(predict_label(m, at(class_centroid(ds, "B"))) == "B");
}

TEST_CASE("dimension mismatch is named") {
  const auto m = fit(three_class(3), split_cfg());
  try {
    trace_prediction(m, at({1.0, 2.0}), 0.9);
    FAIL("expected a throw");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("dimension mismatch") != std::string::npos);
  }
}

TEST_CASE("SOZ-style synthetic data: one stage, two residual classes") {
  synth::SdgSpec spec;
  spec.seed = 12;
  const auto [a, b] = synth::gen_sdg_pair(spec);
  PipelineConfig cfg;
  cfg.embedding_columns = {0, 1, 2, 3};
  for (std::size_t i = 4; i < a.dim(); ++i) cfg.knowledge_columns.push_back(i);
  const auto m = fit(a, cfg);
  REQUIRE(m.stages.size() == 1);
  CHECK(m.stages[0].rare_class == "SOZ");
  CHECK(m.residual_classes.size() == 2);
  CHECK(m.residual_machine.has_value());
}

TEST_CASE("five classes peel off in entropy order") {
  synth::DomainSpec d;
  d.dim = 3;
  d.seed = 8;
  d.classes = {{"0", 200, {0, 0, 0}, 1.0}, {"1", 180, {8, 0, 0}, 1.0}, {"2", 60, {0, 8, 0}, 1.0},
               {"3", 30, {8, 8, 0}, 1.0},  {"4", 10, {4, 4, 6}, 1.0}};
  const auto ds = synth::gen_domains(d).first;
  const auto m = fit(ds, {});
  std::vector<std::string> order;
  for (const auto& s : m.stages) order.push_back(s.rare_class);
  CHECK(order == std::vector<std::string>{"4", "3", "2"});
  CHECK(m.residual_classes == std::vector<std::string>{"0", "1"});
}

TEST_CASE("max_stages caps the staging") {
  synth::DomainSpec d;
  d.dim = 3;
  d.seed = 8;
  d.classes = {{"0", 200, {0, 0, 0}, 1.0}, {"1", 180, {8, 0, 0}, 1.0}, {"2", 60, {0, 8, 0}, 1.0},
               {"3", 30, {8, 8, 0}, 1.0},  {"4", 10, {4, 4, 6}, 1.0}};
  PipelineConfig cfg;
  cfg.max_stages = 1;
  const auto m = fit(synth::gen_domains(d).first, cfg);
  CHECK(m.stages.size() == 1);
  CHECK(m.residual_classes.size() == 4);
}

TEST_CASE("model persistence and determinism") {
  const auto ds = three_class(5);
  const auto m1 = fit(ds, split_cfg());
  const auto m2 = fit(ds, split_cfg());
  CHECK(m1 == m2);
  CHECK(RareSaGeModel::from_json(m1.to_json()) == m1);
  const auto dir = testutil::scratch("pipeline");
  save_model(dir / "m.json", m1);
  const auto back = load_model(dir / "m.json");
  CHECK(back == m1);
  CHECK(predict_all(back, ds) == predict_all(m1, ds));
}

TEST_CASE("config validation") {
  PipelineConfig cfg;
  cfg.t_c = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.dl_roster.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.k = 0;
  CHECK_THROWS_AS(fit(three_class(1), cfg), ConfigError);
}
