// raresage command-line entry point.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "manifest.hpp"
#include "raresage/config.hpp"
#include "raresage/data_model.hpp"
#include "raresage/error.hpp"
#include "raresage/io.hpp"
#include "raresage/knowledge/propositions.hpp"
#include "raresage/metrics.hpp"
#include "raresage/pipeline.hpp"
#include "raresage/rarity.hpp"
#include "raresage/rng.hpp"
#include "raresage/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace raresage::cli {
namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kConfig = 3, kRuntime = 4 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io:
    case ErrorKind::format:
    case ErrorKind::validation:
    case ErrorKind::degenerate:
    case ErrorKind::stratification:
      return kData;
    case ErrorKind::config:
      return kConfig;
    case ErrorKind::state:
    case ErrorKind::training:
    case ErrorKind::undefined:
      return kRuntime;
  }
  return kRuntime;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("EKESDG_SEED");
  if (!env || !*env) return 0;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("EKESDG_SEED is not an unsigned integer: '") + env + "'");
  }
}

/// Writes `text` to `out` atomically, or to stdout when `out` is empty.
void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text_atomic(out, text);
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// shared option groups

struct Globals {
  bool json = false;
  std::vector<std::string> argv;
};

struct PipelineFlags {
  std::string config;
  std::size_t k = kDefaultNeighbors;
  double multiplier = 1.0;
  double t_c = 0.9;
  std::string metric = "euclidean";
  std::string dl_roster;
  std::string k_roster;
  std::size_t max_stages = 4;
  std::uint64_t seed = 0;
  std::string embedding_columns;
  std::string knowledge_columns;
  CLI::App* app = nullptr;

  void add(CLI::App* sub) {
    app = sub;
    sub->add_option("--config", config, "pipeline config (INI)");
    sub->add_option("--k", k, "neighbours for class entropy");
    sub->add_option("--multiplier", multiplier, "rarity deviation multiplier");
    sub->add_option("--t-c", t_c, "knowledge override threshold");
    sub->add_option("--metric", metric, "euclidean|cosine");
    sub->add_option("--dl-roster", dl_roster, "comma list of data-driven machine kinds");
    sub->add_option("--k-roster", k_roster, "comma list of knowledge machine kinds ('none' for empty)");
    sub->add_option("--max-stages", max_stages, "upper bound on rare-class stages");
    sub->add_option("--seed", seed, "seed (default: EKESDG_SEED or 0)");
    sub->add_option("--embedding-columns", embedding_columns, "e.g. 0-3");
    sub->add_option("--knowledge-columns", knowledge_columns, "e.g. 4-15");
  }

  bool given(const char* name) const { return app->count(name) > 0; }

  /// Config file first, then flags that were set explicitly.
  PipelineConfig resolve() const {
    PipelineConfig c;
    c.seed = default_seed();
    if (!config.empty()) c = load_pipeline_config(config, c);
    auto roster = [](const std::string& text) {
      std::vector<MachineKind> out;
      if (text == "none") return out;
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(parse_machine_kind(item));
      }
      return out;
    };
    if (given("--k")) c.k = k;
    if (given("--multiplier")) c.multiplier = multiplier;
    if (given("--t-c")) c.t_c = t_c;
    if (given("--metric")) c.metric = parse_metric(metric);
    if (given("--dl-roster")) c.dl_roster = roster(dl_roster);
    if (given("--k-roster")) c.k_roster = roster(k_roster);
    if (given("--max-stages")) c.max_stages = max_stages;
    if (given("--seed")) c.seed = seed;
    if (given("--embedding-columns")) c.embedding_columns = parse_column_list(embedding_columns);
    if (given("--knowledge-columns")) c.knowledge_columns = parse_column_list(knowledge_columns);
    c.validate();
    return c;
  }
};

Dataset load_data(Manifest& m, const std::string& path, bool normalize, bool allow_unlabeled = false) {
  LoadOptions o;
  o.normalize = normalize;
  o.allow_unlabeled = allow_unlabeled;
  auto ds = load_embeddings(path, o);
  m.input(path);
  return ds;
}

void finish(Manifest& m, const std::string& out) {
  if (out.empty()) return;
  m.output(out);
  m.write(out);
}

// ---------------------------------------------------------------------------
// gen

struct GenDomains {
  std::string spec, out_a, out_b;
  std::uint64_t seed = 0;
};

int run_gen_domains(const GenDomains& o, bool seed_given, const Globals& g) {
  Manifest m("gen domains", g.argv);
  auto spec = synth::load_domain_spec(o.spec);
  m.input(o.spec);
  if (seed_given) {
    spec.seed = o.seed;
  } else if (std::getenv("EKESDG_SEED")) {
    spec.seed = default_seed();
  }
  const auto [a, b] = synth::gen_domains(spec);
  save_embeddings(o.out_a, a);
  save_embeddings(o.out_b, b);
  m.params() = {{"seed", spec.seed}, {"dim", spec.dim}, {"classes", spec.classes.size()}};
  m.output(o.out_a);
  m.output(o.out_b);
  m.write(o.out_a);
  return kOk;
}

struct GenScenes {
  std::string kind = "soz", out_dir, signal;
  std::size_t count = 1, length = 128;
  std::uint64_t seed = 0;
};

int run_gen_scenes(const GenScenes& o, bool seed_given, const Globals& g) {
  Manifest m("gen scenes", g.argv);
  const auto kind = synth::parse_scene_kind(o.kind);
  const std::uint64_t seed = seed_given ? o.seed : default_seed();
  std::optional<synth::BoldKind> signal;
  if (!o.signal.empty()) signal = synth::parse_bold_kind(o.signal);
  if (o.count < 1) throw ConfigError("--count must be at least 1");
  fs::create_directories(o.out_dir);
  for (std::size_t i = 0; i < o.count; ++i) {
    synth::SceneSpec s;
    s.kind = kind;
    s.bold_length = o.length;
    s.bold = signal;
    s.seed = derive_seed(seed, i);
    std::string n = std::to_string(i);
    n = std::string(n.size() < 5 ? 5 - n.size() : 0, '0') + n;
    const fs::path p = fs::path(o.out_dir) / (o.kind + "_" + n + ".json");
    soz::save_scene(p, synth::gen_scene(s));
    m.output(p);
  }
  m.params() = {{"kind", o.kind}, {"count", o.count}, {"seed", seed}, {"length", o.length},
                {"signal", o.signal.empty() ? json(nullptr) : json(o.signal)}};
  m.write(fs::path(o.out_dir) / "scenes");
  return kOk;
}

struct GenSdg {
  std::string out_a, out_b;
  std::uint64_t seed = 0;
  std::size_t noise = 80, soz = 16, rsn = 80;
  double shift = -3.0;
  bool boolean_only = false;
};

int run_gen_sdg(const GenSdg& o, bool seed_given, const Globals& g) {
  Manifest m("gen sdg", g.argv);
  synth::SdgSpec s;
  s.seed = seed_given ? o.seed : default_seed();
  s.noise_count = o.noise;
  s.soz_count = o.soz;
  s.rsn_count = o.rsn;
  s.noise_shift = o.shift;
  s.boolean_only = o.boolean_only;
  const auto [a, b] = synth::gen_sdg_pair(s);
  save_embeddings(o.out_a, a);
  save_embeddings(o.out_b, b);
  m.params() = {{"seed", s.seed}, {"noise", o.noise}, {"soz", o.soz}, {"rsn", o.rsn},
                {"noise_shift", o.shift}, {"boolean_only", o.boolean_only},
                {"embedding_columns", "0-3"},
                {"knowledge_columns", "4-" + std::to_string(a.dim() - 1)}};
  m.output(o.out_a);
  m.output(o.out_b);
  m.write(o.out_a);
  return kOk;
}

// ---------------------------------------------------------------------------
// rarity

struct RarityOpts {
  std::string data, out, metric = "euclidean", columns;
  std::size_t k = kDefaultNeighbors;
  double multiplier = 1.0;
  bool normalize = false;
};

int run_rarity(const RarityOpts& o, const Globals& g) {
  Manifest m("rarity", g.argv);
  const auto metric = parse_metric(o.metric);
  if (o.k < 1) throw ConfigError("--k must be at least 1");
  const auto ds = select_columns(load_data(m, o.data, o.normalize).compact_classes(), parse_column_list(o.columns));
  const auto profile = entropy_profile(ds, o.k, metric);
  const auto verdict = identify_rare(profile, o.multiplier);
  std::string text;
  if (g.json) {
    auto rows = json::array();
    for (std::size_t i = 0; i < profile.classes.size(); ++i) {
      rows.push_back({{"class", profile.classes[i]},
                      {"theta", profile.theta[i]},
                      {"deviation", verdict.deviation[i]},
                      {"is_rare", verdict.is_rare(profile.classes[i])}});
    }
    text = dump({{"k", o.k},
                 {"metric", o.metric},
                 {"multiplier", o.multiplier},
                 {"mean", profile.mean},
                 {"stddev", profile.stddev},
                 {"rarest", verdict.rarest ? json(*verdict.rarest) : json(nullptr)},
                 {"classes", rows}});
  } else {
    text = "# k=" + std::to_string(o.k) + " metric=" + o.metric + " multiplier=" + format_double(o.multiplier) +
           " mean=" + format_double(profile.mean) + " stddev=" + format_double(profile.stddev) +
           " rarest=" + verdict.rarest.value_or("") + "\n";
    text += "class,theta,deviation,is_rare\n";
    for (std::size_t i = 0; i < profile.classes.size(); ++i) {
      text += profile.classes[i] + "," + format_double(profile.theta[i]) + "," +
              format_double(verdict.deviation[i]) + "," + (verdict.is_rare(profile.classes[i]) ? "1" : "0") + "\n";
    }
  }
  emit(o.out, text);
  m.params() = {{"k", o.k}, {"metric", o.metric}, {"multiplier", o.multiplier}, {"columns", o.columns},
                {"normalize", o.normalize}};
  finish(m, o.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// fit

struct FitOpts {
  std::string train, out;
  bool normalize = false;
  PipelineFlags pipe;
};

int run_fit(const FitOpts& o, const Globals& g) {
  Manifest m("fit", g.argv);
  const auto cfg = o.pipe.resolve();
  if (!o.pipe.config.empty()) m.input(o.pipe.config);
  const auto ds = load_data(m, o.train, o.normalize);
  const auto model = fit(ds, cfg, [](const std::string& line) { std::cerr << line << "\n"; });
  save_model(o.out, model);
  m.params() = {{"config", cfg.to_json()}, {"normalize", o.normalize}, {"stages", model.stages.size()}};
  finish(m, o.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
  std::string model, train, test, out, predictions, rare;
  bool normalize = false, allow_unlabeled = false, timing = false;
  std::optional<double> t_c;
  PipelineFlags pipe;
};

std::string predictions_csv(const Dataset& ds, const std::vector<std::string>& preds) {
  std::string out = "id,domain,truth,prediction\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out += ds[i].id + "," + ds[i].domain_id + "," + ds[i].label.value_or("") + "," + preds[i] + "\n";
  }
  return out;
}

int run_eval(EvalOpts o, const Globals& g) {
  Manifest m("eval", g.argv);
  if (o.model.empty() == o.train.empty()) throw ConfigError("eval needs exactly one of --model or --train");

  if (!o.train.empty()) {
    // Across-trial: fit on one domain, score on the other, then the reverse.
    const auto cfg = o.pipe.resolve();
    if (!o.pipe.config.empty()) m.input(o.pipe.config);
    const auto tr = load_data(m, o.train, o.normalize);
    const auto te = load_data(m, o.test, o.normalize);
    std::optional<std::string> rare;
    if (!o.rare.empty()) rare = o.rare;
    const auto r = across_trial(tr, te, cfg, rare, o.timing);
    if (r.rare_class.empty()) std::cerr << "warning: no rare class found in either domain\n";
    emit(o.out, g.json ? dump(across_json(r)) : across_csv(r));
    m.params() = {{"mode", "across_trial"}, {"config", cfg.to_json()}, {"normalize", o.normalize},
                  {"rare", o.rare}};
    finish(m, o.out);
    return kOk;
  }

  auto model = load_model(o.model);
  m.input(o.model);
  if (o.t_c) {
    if (!(*o.t_c > 0.0 && *o.t_c <= 1.0)) throw ConfigError("--t-c must be in (0, 1]");
    model.config.t_c = *o.t_c;
  }
  const auto te = load_data(m, o.test, o.normalize, o.allow_unlabeled);
  const auto preds = predict_all(model, te);
  if (!o.predictions.empty()) {
    write_text_atomic(o.predictions, predictions_csv(te, preds));
    m.output(o.predictions);
  }
  json params{{"mode", "model"}, {"t_c", model.config.t_c}, {"normalize", o.normalize}, {"rare", o.rare}};
  if (!te.fully_labeled()) {
    if (o.predictions.empty()) std::cerr << "warning: test set is unlabeled and no --predictions file was given\n";
    m.params() = params;
    if (!o.predictions.empty()) m.write(o.predictions);
    return kOk;
  }
  std::string rare = o.rare;
  if (rare.empty() && !model.stages.empty()) rare = model.stages.front().rare_class;
  std::vector<std::string> truths;
  for (const auto& ob : te.observations()) truths.push_back(*ob.label);
  std::vector<std::string> classes = model.classes;
  for (const auto& c : te.classes()) {
    if (std::find(classes.begin(), classes.end(), c) == classes.end()) classes.push_back(c);
  }
  const auto rep = report(score(preds, truths, classes), rare);
  emit(o.out, g.json ? dump(report_json(rep)) : report_csv(rep));
  m.params() = params;
  finish(m, o.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// agg-eval

struct AggOpts {
  std::vector<std::string> data;
  std::string out, rare;
  std::size_t folds = 5, repeats = 3;
  bool normalize = false;
  PipelineFlags pipe;
};

int run_agg(const AggOpts& o, const Globals& g) {
  Manifest m("agg-eval", g.argv);
  const auto cfg = o.pipe.resolve();
  if (!o.pipe.config.empty()) m.input(o.pipe.config);
  std::vector<Observation> all;
  std::vector<std::string> classes;
  for (const auto& path : o.data) {
    const auto ds = load_data(m, path, o.normalize);
    for (const auto& c : ds.classes()) {
      if (std::find(classes.begin(), classes.end(), c) == classes.end()) classes.push_back(c);
    }
    all.insert(all.end(), ds.observations().begin(), ds.observations().end());
  }
  const auto domains = split_by_domain(Dataset(std::move(all), classes));
  std::optional<std::string> rare;
  if (!o.rare.empty()) rare = o.rare;
  const auto r = aggregated_trial(domains, o.folds, o.repeats, cfg, cfg.seed, rare);
  emit(o.out, g.json ? dump(aggregated_json(r)) : aggregated_csv(r));
  m.params() = {{"config", cfg.to_json()}, {"folds", o.folds}, {"repeats", o.repeats},
                {"normalize", o.normalize}, {"rare", o.rare}};
  finish(m, o.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// roc

struct RocOpts {
  std::string model, test, out, grid, rare;
  bool normalize = false;
};

std::vector<double> parse_grid(const std::string& text) {
  if (text.empty()) return default_roc_grid();
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad threshold '" + item + "' in --grid");
    }
  }
  if (out.empty()) throw ConfigError("--grid is empty");
  return out;
}

int run_roc(const RocOpts& o, const Globals& g) {
  Manifest m("roc", g.argv);
  const auto grid = parse_grid(o.grid);
  const auto model = load_model(o.model);
  m.input(o.model);
  const auto te = load_data(m, o.test, o.normalize);
  std::optional<std::string> rare;
  if (!o.rare.empty()) rare = o.rare;
  const auto pts = roc_sweep(model, te, grid, rare);
  emit(o.out, g.json ? dump(roc_json(pts)) : roc_csv(pts));
  m.params() = {{"grid", grid}, {"normalize", o.normalize}, {"rare", o.rare}};
  finish(m, o.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// props

struct PropsOpts {
  std::vector<std::string> scenes;
  std::string out;
  soz::Thresholds t;
};

int run_props(const PropsOpts& o, const Globals& g) {
  Manifest m("props", g.argv);
  std::string text = "scene,p1,ps,pa,pg,pw,pv,kappa_soz,cluster_count,gray_fraction,white_fraction,"
                     "vascular_fraction,gini_sine,gini_wavelet\n";
  auto rows = json::array();
  auto b = [](bool v) { return v ? std::string("1") : std::string("0"); };
  for (const auto& path : o.scenes) {
    const auto scene = soz::load_scene(path);
    m.input(path);
    const auto pv = soz::evaluate_propositions(scene, o.t);
    const bool kappa = soz::kappa_soz(pv);
    text += path + "," + b(pv.p1) + "," + b(pv.ps) + "," + b(pv.pa) + "," + b(pv.pg) + "," + b(pv.pw) + "," +
            b(pv.pv) + "," + b(kappa) + "," + std::to_string(pv.cluster_count) + "," +
            format_double(pv.gray_fraction) + "," + format_double(pv.white_fraction) + "," +
            format_double(pv.vascular_fraction) + "," + format_double(pv.gini_sine) + "," +
            format_double(pv.gini_wavelet) + "\n";
    rows.push_back({{"scene", path},           {"p1", pv.p1},
                    {"ps", pv.ps},             {"pa", pv.pa},
                    {"pg", pv.pg},             {"pw", pv.pw},
                    {"pv", pv.pv},             {"kappa_soz", kappa},
                    {"cluster_count", pv.cluster_count},
                    {"gray_fraction", pv.gray_fraction},
                    {"white_fraction", pv.white_fraction},
                    {"vascular_fraction", pv.vascular_fraction},
                    {"gini_sine", pv.gini_sine},
                    {"gini_wavelet", pv.gini_wavelet}});
  }
  emit(o.out, g.json ? dump(rows) : text);
  m.params() = {{"gray", o.t.gray}, {"white", o.t.white}, {"vascular", o.t.vascular}, {"sine", o.t.sine},
                {"wavelet", o.t.wavelet}, {"min_size", o.t.clusters.min_size}};
  finish(m, o.out);
  return kOk;
}

}  // namespace

int run(int argc, char** argv) {
  Globals g;
  g.argv.assign(argv + 1, argv + argc);

  CLI::App app{"RareSaGe: rare-class detection with knowledge-guided fusion"};
  app.set_version_flag("--version", RARESAGE_VERSION);
  app.add_flag("--json", g.json, "structured reports instead of CSV");
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "synthetic data");
  gen->require_subcommand(1);
  GenDomains gd;
  auto* gen_dom = gen->add_subcommand("domains", "two Gaussian-mixture embedding domains");
  gen_dom->add_option("--spec", gd.spec, "domain spec (INI)")->required();
  gen_dom->add_option("--out-a", gd.out_a, "domain A embeddings CSV")->required();
  gen_dom->add_option("--out-b", gd.out_b, "domain B embeddings CSV")->required();
  gen_dom->add_option("--seed", gd.seed, "overrides the seed in the domain file");
  GenScenes gs;
  auto* gen_sc = gen->add_subcommand("scenes", "knowledge scenes");
  gen_sc->add_option("--kind", gs.kind, "soz|rsn|noise");
  gen_sc->add_option("--count", gs.count, "number of scenes");
  gen_sc->add_option("--length", gs.length, "BOLD samples");
  gen_sc->add_option("--signal", gs.signal, "override BOLD kind: sine|transient|white");
  gen_sc->add_option("--seed", gs.seed, "seed (default: EKESDG_SEED or 0)");
  gen_sc->add_option("--out-dir", gs.out_dir, "directory for scene files")->required();
  GenSdg gsd;
  auto* gen_sdg = gen->add_subcommand("sdg", "paired domains with embedding and knowledge features");
  gen_sdg->add_option("--out-a", gsd.out_a, "domain A CSV")->required();
  gen_sdg->add_option("--out-b", gsd.out_b, "domain B CSV")->required();
  gen_sdg->add_option("--seed", gsd.seed, "seed (default: EKESDG_SEED or 0)");
  gen_sdg->add_option("--noise", gsd.noise, "Noise count per domain");
  gen_sdg->add_option("--soz", gsd.soz, "SOZ count per domain");
  gen_sdg->add_option("--rsn", gsd.rsn, "RSN count per domain");
  gen_sdg->add_option("--noise-shift", gsd.shift, "Noise mean offset in domain B");
  gen_sdg->add_flag("--boolean-only", gsd.boolean_only, "knowledge features are the six valuations only");

  // rarity
  RarityOpts ro;
  auto* rar = app.add_subcommand("rarity", "class entropy and rarity verdict");
  rar->add_option("--data", ro.data, "embeddings CSV")->required();
  rar->add_option("--k", ro.k, "neighbours");
  rar->add_option("--multiplier", ro.multiplier, "deviation multiplier");
  rar->add_option("--metric", ro.metric, "euclidean|cosine");
  rar->add_option("--columns", ro.columns, "feature columns, e.g. 0-3");
  rar->add_flag("--normalize", ro.normalize, "L2-normalize embeddings");
  rar->add_option("--out", ro.out, "report path (stdout if omitted)");

  // fit
  FitOpts fo;
  auto* fitc = app.add_subcommand("fit", "fit a staged model");
  fitc->add_option("--train", fo.train, "training embeddings CSV")->required();
  fitc->add_option("--out", fo.out, "model file")->required();
  fitc->add_flag("--normalize", fo.normalize, "L2-normalize embeddings");
  fo.pipe.add(fitc);

  // eval
  EvalOpts eo;
  auto* ev = app.add_subcommand("eval", "score a model, or run an across-trial evaluation");
  ev->add_option("--model", eo.model, "model file");
  ev->add_option("--train", eo.train, "across-trial: training domain CSV");
  ev->add_option("--test", eo.test, "test embeddings CSV")->required();
  ev->add_option("--out", eo.out, "report path (stdout if omitted)");
  ev->add_option("--predictions", eo.predictions, "per-row predictions CSV");
  ev->add_option("--rare", eo.rare, "positive class for rare-vs-rest metrics");
  ev->add_flag("--allow-unlabeled", eo.allow_unlabeled, "accept rows with an empty class");
  ev->add_flag("--normalize", eo.normalize, "L2-normalize embeddings");
  ev->add_flag("--timing", eo.timing, "add wall-clock seconds to across-trial reports");
  eo.pipe.add(ev);

  // agg-eval
  AggOpts ao;
  auto* agg = app.add_subcommand("agg-eval", "leave-one-domain-out with stratified k-fold repeats");
  agg->add_option("--data", ao.data, "embeddings CSV (repeatable; domains from the domain column)")->required();
  agg->add_option("--folds", ao.folds, "folds");
  agg->add_option("--repeats", ao.repeats, "repeats");
  agg->add_option("--rare", ao.rare, "positive class for rare-vs-rest metrics");
  agg->add_option("--out", ao.out, "report path (stdout if omitted)");
  agg->add_flag("--normalize", ao.normalize, "L2-normalize embeddings");
  ao.pipe.add(agg);

  // roc
  RocOpts rc;
  auto* roc = app.add_subcommand("roc", "sweep the knowledge override threshold");
  roc->add_option("--model", rc.model, "model file")->required();
  roc->add_option("--test", rc.test, "labeled test CSV")->required();
  roc->add_option("--grid", rc.grid, "comma list of thresholds (default 0.10..0.95 step 0.05)");
  roc->add_option("--rare", rc.rare, "positive class (default: first stage's rare class)");
  roc->add_option("--out", rc.out, "report path (stdout if omitted)");
  roc->add_flag("--normalize", rc.normalize, "L2-normalize embeddings");

  // props
  PropsOpts po;
  auto* props = app.add_subcommand("props", "proposition report per scene");
  props->add_option("scenes", po.scenes, "scene files")->required();
  props->add_option("--out", po.out, "report path (stdout if omitted)");
  props->add_option("--theta-gray", po.t.gray, "gray-matter fraction threshold");
  props->add_option("--theta-white", po.t.white, "white-matter fraction threshold");
  props->add_option("--theta-vascular", po.t.vascular, "vascular fraction threshold");
  props->add_option("--theta-sine", po.t.sine, "sine-domain Gini threshold");
  props->add_option("--theta-wavelet", po.t.wavelet, "wavelet-domain Gini threshold");
  props->add_option("--min-cluster", po.t.clusters.min_size, "minimum surviving cluster size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "raresage: usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (gen_dom->parsed()) return run_gen_domains(gd, gen_dom->count("--seed") > 0, g);
    if (gen_sc->parsed()) return run_gen_scenes(gs, gen_sc->count("--seed") > 0, g);
    if (gen_sdg->parsed()) return run_gen_sdg(gsd, gen_sdg->count("--seed") > 0, g);
    if (rar->parsed()) return run_rarity(ro, g);
    if (fitc->parsed()) return run_fit(fo, g);
    if (ev->parsed()) {
      if (eo.pipe.given("--t-c")) eo.t_c = eo.pipe.t_c;
      return run_eval(eo, g);
    }
    if (agg->parsed()) return run_agg(ao, g);
    if (roc->parsed()) return run_roc(rc, g);
    if (props->parsed()) return run_props(po, g);
  } catch (const Error& e) {
    std::cerr << "raresage: " << to_string(e.kind()) << " error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "raresage: io error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "raresage: runtime error: " << e.what() << "\n";
    return kRuntime;
  }
  std::cerr << "raresage: usage error: no subcommand\n";
  return kUsage;
}

}  // namespace raresage::cli

int main(int argc, char** argv) { return raresage::cli::run(argc, argv); }
