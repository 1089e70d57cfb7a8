#include <doctest.h>

#include <sstream>

#include "../oracles.hpp"
#include "helpers.hpp"
#include "raresage/config.hpp"
#include "raresage/error.hpp"
#include "raresage/label_set.hpp"
#include "raresage/rng.hpp"
#include "raresage/split.hpp"

using namespace raresage;

namespace {

Dataset parse(const std::string& text, LoadOptions opt = {}) {
  std::istringstream in(text);
  return parse_embeddings(in, opt, "mem.csv");
}

template <typename E>
std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  }
  return "<no throw>";
}

}  // namespace

TEST_CASE("embeddings csv: three rows, two features") {
  const auto ds = parse("id,domain,class,f0,f1\na,A,Noise,0,1\nb,A,SOZ,1,2\nc,B,RSN,2,3\n");
  CHECK(ds.size() == 3);
  CHECK(ds.dim() == 2);
  CHECK(ds.classes() == std::vector<std::string>{"Noise", "SOZ", "RSN"});
  CHECK(ds[2].domain_id == "B");
}

TEST_CASE("embeddings csv: short and long rows name the row") {
  const auto msg = message_of<FormatError>([] { parse("id,domain,class,f0,f1\na,A,X,1,2,3\n"); });
  CHECK(msg.find("row 2") != std::string::npos);
}

TEST_CASE("embeddings csv: duplicate id is named") {
  const auto msg = message_of<ValidationError>([] { parse("id,domain,class,f0,f1\na,A,X,1,2\na,A,X,3,4\n"); });
  CHECK(msg.find("'a'") != std::string::npos);
}

TEST_CASE("embeddings csv: unlabeled rows only when allowed") {
  const std::string text = "id,domain,class,f0\na,A,,1\nb,A,X,2\n";
  CHECK_THROWS_AS(parse(text), ValidationError);
  LoadOptions opt;
  opt.allow_unlabeled = true;
  const auto ds = parse(text, opt);
  CHECK_FALSE(ds[0].label.has_value());
  CHECK_FALSE(ds.fully_labeled());
}

TEST_CASE("embeddings csv: non-numeric and non-finite features") {
  CHECK_THROWS_AS(parse("id,domain,class,f0\na,A,X,abc\n"), FormatError);
  CHECK_THROWS_AS(parse("id,domain,class,f0\na,A,X,nan\n"), Error);
  CHECK_THROWS_AS(parse("id,domain,class\na,A,X\n"), FormatError);
  CHECK_THROWS_AS(parse(""), FormatError);
}

TEST_CASE("embeddings csv: normalize gives unit rows") {
  LoadOptions opt;
  opt.normalize = true;
  const auto ds = parse("id,domain,class,f0,f1\na,A,X,3,4\n", opt);
  CHECK(ds[0].features[0] == doctest::Approx(0.6));
  CHECK(ds[0].features[1] == doctest::Approx(0.8));
}

TEST_CASE("embeddings csv: write then parse round-trips exactly") {
  Rng rng(7);
  std::vector<testutil::Row> rows;
  for (int i = 0; i < 20; ++i) rows.push_back({i % 2 ? "P" : "Q", {rng.normal() * 1e-7, rng.normal() * 1e9, rng.uniform()}});
  const auto ds = testutil::make_ds(rows);
  std::ostringstream out;
  write_embeddings(out, ds);
  CHECK(parse(out.str()) == ds);
}

TEST_CASE("split_by_domain") {
  const auto ds = parse("id,domain,class,f0\na,A,X,1\nb,A,Y,2\nc,B,X,3\n");
  const auto parts = split_by_domain(ds);
  REQUIRE(parts.size() == 2);
  CHECK(parts.at("A").size() == 2);
  CHECK(parts.at("B").size() == 1);
  CHECK(parts.at("B").classes() == ds.classes());

  const auto single = split_by_domain(parse("id,domain,class,f0\na,A,X,1\n"));
  CHECK(single.size() == 1);

  const auto blank = split_by_domain(parse("id,domain,class,f0\na,,X,1\n"));
  CHECK(blank.count("") == 1);
}

TEST_CASE("relabel: identity supers rename nothing") {
  const auto ds = parse("id,domain,class,f0\na,A,Noise,1\nb,A,SOZ,2\nc,A,RSN,3\n");
  const auto out = relabel(ds, identity_label_set(ds.classes()));
  CHECK(out == ds);
}

TEST_CASE("relabel: merged supers and a cover error") {
  const auto ds = parse("id,domain,class,f0\na,A,Noise,1\nb,A,SOZ,2\nc,A,RSN,3\n");
  LabelSet ls{{{"OVERLAP", {"Noise"}}, {"NOT_OVERLAP", {"SOZ", "RSN"}}}};
  const auto out = relabel(ds, ls);
  CHECK(*out[2].label == "NOT_OVERLAP");
  CHECK(out.classes() == std::vector<std::string>{"OVERLAP", "NOT_OVERLAP"});

  LabelSet missing{{{"X", {"Noise"}}, {"Y", {"RSN"}}}};
  const auto msg = message_of<ValidationError>([&] { relabel(ds, missing); });
  CHECK(msg.find("SOZ") != std::string::npos);
}

TEST_CASE("label set violations are named") {
  const std::vector<std::string> c{"Noise", "RSN", "SOZ"};
  LabelSet shared{{{"X", {"Noise", "RSN"}}, {"Y", {"RSN", "SOZ"}}}};
  auto r = validate_label_set(shared, c);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].rule == LabelRule::mutual_exclusion);
  CHECK(r.violations[0].classes == std::vector<std::string>{"RSN"});

  LabelSet uncovered{{{"X", {"Noise"}}}};
  r = validate_label_set(uncovered, c);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].rule == LabelRule::class_cover);
  CHECK(r.violations[0].classes == std::vector<std::string>{"RSN", "SOZ"});
}

TEST_CASE("label set check agrees with membership counting on every small case") {
  const std::vector<std::string> classes{"Noise", "RSN", "SOZ"};
  const std::vector<std::string> universe{"Noise", "RSN", "SOZ", "Other"};
  std::vector<std::vector<std::string>> subsets;
  for (unsigned mask = 0; mask < 16; ++mask) {
    std::vector<std::string> s;
    for (unsigned b = 0; b < 4; ++b)
      if (mask & (1u << b)) s.push_back(universe[b]);
    subsets.push_back(s);
  }
  const std::vector<std::string> names{"S0", "S1", "S2", "S0"};
  std::size_t cases = 0, mismatches = 0;
  for (std::size_t n = 1; n <= 3; ++n) {
    std::vector<std::size_t> pick(n, 0);
    while (true) {
      LabelSet ls;
      std::vector<std::pair<std::string, std::vector<std::string>>> raw;
      for (std::size_t i = 0; i < n; ++i) {
        ls.supers.push_back({names[i], subsets[pick[i]]});
        raw.emplace_back(names[i], subsets[pick[i]]);
      }
      ++cases;
      if (validate_label_set(ls, classes).ok() != oracle::label_set_ok(raw, classes)) ++mismatches;
      std::size_t d = 0;
      while (d < n && ++pick[d] == subsets.size()) pick[d++] = 0;
      if (d == n) break;
    }
  }
  CHECK(cases == 16 + 16 * 16 + 16 * 16 * 16);
  CHECK(mismatches == 0);
}

TEST_CASE("column lists") {
  CHECK(parse_column_list("0-3,7,9-10") == std::vector<std::size_t>{0, 1, 2, 3, 7, 9, 10});
  CHECK(parse_column_list("").empty());
  CHECK_THROWS_AS(parse_column_list("3-1"), ConfigError);
  CHECK_THROWS_AS(parse_column_list("x"), ConfigError);
}

TEST_CASE("dataset invariants") {
  CHECK_THROWS_AS(Dataset({}, {"X"}), ValidationError);
  CHECK_THROWS_AS(Dataset({{"a", "A", "X", {1.0}}, {"b", "A", "X", {1.0, 2.0}}}, {"X"}), ValidationError);
  CHECK_THROWS_AS(Dataset({{"a", "A", "Y", {1.0}}}, {"X"}), ValidationError);
  const auto ds = testutil::make_ds({{"X", {1}}, {"Y", {2}}, {"X", {3}}});
  CHECK(ds.indices_of("X") == std::vector<std::size_t>{0, 2});
  CHECK(ds.without_class("X").classes() == std::vector<std::string>{"Y"});
  CHECK(ds.without_class("X").size() == 1);
}

TEST_CASE("rng streams are fixed") {
  // SplitMix64 from 0: first output of the published reference.
  std::uint64_t s = 0;
  CHECK(splitmix64(s) == 0xE220A8397B1DCDAFULL);
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 5; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
  }
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(r.index(7) < 7);
  }
}

TEST_CASE("stratified hold-out and folds") {
  std::vector<testutil::Row> rows;
  for (int i = 0; i < 50; ++i) rows.push_back({"A", {double(i)}});
  for (int i = 0; i < 10; ++i) rows.push_back({"B", {double(i)}});
  const auto ds = testutil::make_ds(rows);
  const auto h = stratified_holdout(ds, 0.2, 3);
  std::size_t hb = 0;
  for (auto i : h.holdout) hb += *ds[i].label == "B";
  CHECK(h.holdout.size() == 12);
  CHECK(hb == 2);
  CHECK(h.train.size() + h.holdout.size() == ds.size());

  const auto f = stratified_folds(ds, 5, 3);
  std::vector<std::size_t> per_fold_b(5, 0), per_fold(5, 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ++per_fold[f[i]];
    per_fold_b[f[i]] += *ds[i].label == "B";
  }
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(per_fold[k] == 12);
    CHECK(per_fold_b[k] == 2);
  }
  CHECK(f == stratified_folds(ds, 5, 3));
  CHECK_THROWS_AS(stratified_folds(ds, 1, 3), ConfigError);
}

TEST_CASE("pipeline config from INI") {
  std::istringstream in(
      "k = 5\n[pipeline]\nmultiplier = 0.8\nt_c = 0.75\ndl_roster = centroid,svm_linear\n"
      "embedding_columns = 0-3\n[train]\nsvm_epochs = 12\nbalanced = false\n");
  const auto cfg = parse_pipeline_config(in);
  CHECK(cfg.k == 5);
  CHECK(cfg.multiplier == 0.8);
  CHECK(cfg.t_c == 0.75);
  CHECK(cfg.dl_roster == std::vector<MachineKind>{MachineKind::centroid, MachineKind::svm_linear});
  CHECK(cfg.embedding_columns == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(cfg.train.svm_epochs == 12);
  CHECK_FALSE(cfg.train.balanced);
  CHECK(PipelineConfig::from_json(cfg.to_json()) == cfg);

  std::istringstream bad("bogus = 1\n");
  CHECK_THROWS_AS(parse_pipeline_config(bad), ConfigError);
  std::istringstream bad_k("k = 0\n");
  CHECK_THROWS_AS(parse_pipeline_config(bad_k), ConfigError);
}
