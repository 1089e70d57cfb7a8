#include "raresage/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "raresage/error.hpp"
#include "raresage/io.hpp"
#include "raresage/rng.hpp"
#include "raresage/split.hpp"

namespace raresage {

namespace {

constexpr int kModelFormatVersion = 1;

// Sub-stream tags.
constexpr std::uint64_t kTagDl = 0x444C;
constexpr std::uint64_t kTagKnowledge = 0x4B4D;
constexpr std::uint64_t kTagValidation = 0x5641;
constexpr std::uint64_t kTagResidual = 0x5245;

std::vector<std::string> kind_names(const std::vector<MachineKind>& kinds) {
  std::vector<std::string> out;
  for (auto k : kinds) out.emplace_back(to_string(k));
  return out;
}

std::vector<MachineKind> kinds_from(const nlohmann::json& j) {
  std::vector<MachineKind> out;
  for (const auto& n : j) out.push_back(parse_machine_kind(n.get<std::string>()));
  return out;
}

nlohmann::json train_to_json(const TrainConfig& t) {
  nlohmann::json j{
      {"logistic_epochs", t.logistic_epochs}, {"logistic_rate", t.logistic_rate},
      {"logistic_l2", t.logistic_l2},         {"svm_epochs", t.svm_epochs},
      {"svm_lambda", t.svm_lambda},           {"svm_eta0", t.svm_eta0},
      {"balanced", t.balanced},               {"temperature", t.temperature},
  };
  j["feature_map"] = t.feature_map ? nlohmann::json(to_string(*t.feature_map)) : nlohmann::json(nullptr);
  return j;
}

TrainConfig train_from_json(const nlohmann::json& j) {
  TrainConfig t;
  t.logistic_epochs = j.at("logistic_epochs").get<std::size_t>();
  t.logistic_rate = j.at("logistic_rate").get<double>();
  t.logistic_l2 = j.at("logistic_l2").get<double>();
  t.svm_epochs = j.at("svm_epochs").get<std::size_t>();
  t.svm_lambda = j.at("svm_lambda").get<double>();
  t.svm_eta0 = j.at("svm_eta0").get<double>();
  t.balanced = j.at("balanced").get<bool>();
  t.temperature = j.at("temperature").get<double>();
  if (!j.at("feature_map").is_null()) t.feature_map = parse_feature_map(j.at("feature_map").get<std::string>());
  return t;
}

nlohmann::json profile_to_json(const EntropyProfile& p) {
  return {{"classes", p.classes}, {"theta", p.theta}, {"mean", p.mean},
          {"stddev", p.stddev},   {"k", p.k},         {"metric", to_string(p.metric)}};
}

EntropyProfile profile_from_json(const nlohmann::json& j) {
  EntropyProfile p;
  p.classes = j.at("classes").get<std::vector<std::string>>();
  p.theta = j.at("theta").get<std::vector<double>>();
  p.mean = j.at("mean").get<double>();
  p.stddev = j.at("stddev").get<double>();
  p.k = j.at("k").get<std::size_t>();
  p.metric = parse_metric(j.at("metric").get<std::string>());
  return p;
}

nlohmann::json roster_to_json(const RosterEntropy& r) {
  return {{"kinds", kind_names(r.kinds)}, {"theta", r.theta}, {"selected", r.selected}};
}

RosterEntropy roster_from_json(const nlohmann::json& j) {
  RosterEntropy r;
  r.kinds = kinds_from(j.at("kinds"));
  r.theta = j.at("theta").get<std::vector<double>>();
  r.selected = j.at("selected").get<std::size_t>();
  return r;
}

TrainConfig machine_config(const PipelineConfig& cfg, const std::vector<std::size_t>& columns,
                           std::uint64_t seed) {
  TrainConfig t = cfg.train;
  t.columns = columns;
  t.seed = seed;
  return t;
}

const std::vector<std::size_t>& knowledge_columns(const PipelineConfig& cfg) {
  return cfg.knowledge_columns.empty() ? cfg.embedding_columns : cfg.knowledge_columns;
}

struct Trained {
  Machine machine;
  RosterEntropy entropy;
};

/// Trains every roster kind and keeps the one with least rare-class entropy.
Trained train_roster(const std::vector<MachineKind>& kinds, const Dataset& ds, const LabelSet& labels,
                     const std::string& rare, const PipelineConfig& cfg,
                     const std::vector<std::size_t>& columns, std::uint64_t seed) {
  std::vector<Machine> roster;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    roster.push_back(train(kinds[i], ds, labels, machine_config(cfg, columns, derive_seed(seed, i))));
  }
  const auto o = orchestrate(roster, ds, rare, cfg.k, cfg.metric);
  Trained t;
  t.entropy.kinds = kinds;
  t.entropy.theta = o.theta;
  t.entropy.selected = o.selected;
  t.machine = std::move(roster[o.selected]);
  return t;
}

struct StageLabels {
  LabelSet dl;
  LabelSet knowledge;
  std::vector<std::string> non_rare;
  bool knowledge_uses_overlap = false;
};

StageLabels stage_labels(const Dataset& psi, const std::string& rare, const std::string& overlap) {
  StageLabels s;
  std::vector<std::string> not_overlap;
  for (const auto& c : psi.classes()) {
    if (c != overlap) not_overlap.push_back(c);
    if (c != overlap && c != rare) s.non_rare.push_back(c);
  }
  if (s.non_rare.empty()) {
    s.non_rare = {overlap};
    s.knowledge_uses_overlap = true;
  }
  s.dl.supers = {{kOverlapSuper, {overlap}}, {kNotOverlapSuper, not_overlap}};
  s.knowledge.supers = {{kRareSuperName, {rare}}, {kNonRareSuperName, s.non_rare}};
  return s;
}

Dataset knowledge_training_set(const Dataset& psi, const std::string& overlap, bool uses_overlap) {
  return uses_overlap ? psi : psi.without_class(overlap);
}

/// Three-way routing accuracy of one stage on a seeded hold-out split.
std::optional<double> stage_validation(const Dataset& psi, const PipelineConfig& cfg,
                                       const std::string& rare, const std::string& overlap,
                                       MachineKind dl_kind, MachineKind k_kind,
                                       const std::vector<std::size_t>& k_columns, std::uint64_t seed) {
  if (cfg.validation_fraction <= 0.0) return std::nullopt;
  const auto split = stratified_holdout(psi, cfg.validation_fraction, derive_seed(seed, kTagValidation));
  if (split.holdout.empty()) return std::nullopt;
  const Dataset tr = psi.subset(split.train);
  const auto labels = stage_labels(psi, rare, overlap);
  Machine dl, km;
  try {
    dl = train(dl_kind, tr, labels.dl, machine_config(cfg, cfg.embedding_columns, derive_seed(seed, 1)));
    km = train(k_kind, knowledge_training_set(tr, overlap, labels.knowledge_uses_overlap), labels.knowledge,
               machine_config(cfg, k_columns, derive_seed(seed, 2)));
  } catch (const TrainingError&) {
    return std::nullopt;
  }
  std::size_t hits = 0;
  for (auto i : split.holdout) {
    const auto& obs = psi[i];
    const auto outcome = fuse(dl.predict(obs).super_label, km.predict(obs), cfg.t_c);
    const auto truth = *obs.label == rare      ? FuseOutcome::rare
                       : *obs.label == overlap ? FuseOutcome::overlap
                                               : FuseOutcome::non_rare;
    if (outcome == truth) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(split.holdout.size());
}

void require_labeled(const Dataset& ds) {
  if (!ds.fully_labeled()) throw ValidationError("training data contains unlabeled observations");
}

std::string describe_stage(std::size_t i, const StagePlan& s) {
  std::string msg = "stage " + std::to_string(i + 1) + ": rare=" + s.rare_class +
                    " overlap=" + s.overlap_class + " dl=" +
                    to_string(s.dl_entropy.kinds[s.dl_entropy.selected]) + " k=" +
                    to_string(s.k_entropy.kinds[s.k_entropy.selected]);
  msg += " validation_accuracy=";
  msg += s.validation_accuracy ? format_double(*s.validation_accuracy) : "n/a";
  return msg;
}

}  // namespace

// ---------------------------------------------------------------------------
// config

void PipelineConfig::validate() const {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (!(multiplier > 0.0) || !std::isfinite(multiplier)) throw ConfigError("multiplier must be positive");
  if (!(t_c > 0.0 && t_c <= 1.0)) throw ConfigError("t_c must be in (0, 1]");
  if (max_stages < 1) throw ConfigError("max_stages must be at least 1");
  if (dl_roster.empty()) throw ConfigError("dl_roster is empty");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must be in [0, 1)");
  }
  if (!(train.temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (train.logistic_epochs == 0 || train.svm_epochs == 0) throw ConfigError("epochs must be positive");
  if (!(train.logistic_rate > 0.0) || !(train.svm_eta0 > 0.0)) throw ConfigError("learning rates must be positive");
  if (!(train.logistic_l2 >= 0.0) || !(train.svm_lambda > 0.0)) throw ConfigError("regularization out of range");
}

nlohmann::json PipelineConfig::to_json() const {
  return {
      {"k", k},
      {"multiplier", multiplier},
      {"t_c", t_c},
      {"metric", raresage::to_string(metric)},
      {"dl_roster", kind_names(dl_roster)},
      {"k_roster", kind_names(k_roster)},
      {"max_stages", max_stages},
      {"seed", seed},
      {"embedding_columns", embedding_columns},
      {"knowledge_columns", knowledge_columns},
      {"validation_fraction", validation_fraction},
      {"train", train_to_json(train)},
  };
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig c;
  c.k = j.at("k").get<std::size_t>();
  c.multiplier = j.at("multiplier").get<double>();
  c.t_c = j.at("t_c").get<double>();
  c.metric = parse_metric(j.at("metric").get<std::string>());
  c.dl_roster = kinds_from(j.at("dl_roster"));
  c.k_roster = kinds_from(j.at("k_roster"));
  c.max_stages = j.at("max_stages").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.embedding_columns = j.at("embedding_columns").get<std::vector<std::size_t>>();
  c.knowledge_columns = j.at("knowledge_columns").get<std::vector<std::size_t>>();
  c.validation_fraction = j.at("validation_fraction").get<double>();
  c.train = train_from_json(j.at("train"));
  return c;
}

// ---------------------------------------------------------------------------
// fitting

std::optional<StagePlan> plan_stage(const Dataset& ds, const PipelineConfig& cfg, std::size_t stage_index) {
  cfg.validate();
  require_labeled(ds);
  const Dataset psi = ds.compact_classes();
  if (psi.classes().size() < 2) throw ValidationError("planning a stage needs at least two classes");

  const Dataset emb = select_columns(psi, cfg.embedding_columns);
  StagePlan plan;
  plan.profile = entropy_profile(emb, cfg.k, cfg.metric);
  const auto verdict = identify_rare(plan.profile, cfg.multiplier);
  if (!verdict.rarest) return std::nullopt;

  plan.rare_class = *verdict.rarest;
  if (psi.classes().size() == 2) {
    plan.overlap_class = psi.classes()[psi.classes()[0] == plan.rare_class ? 1 : 0];
  } else {
    plan.overlap_class = find_overlap_class(emb, plan.rare_class).overlap_class;
  }

  const auto labels = stage_labels(psi, plan.rare_class, plan.overlap_class);
  plan.non_rare_classes = labels.non_rare;
  const std::uint64_t stage_seed = derive_seed(cfg.seed, stage_index);

  auto dl = train_roster(cfg.dl_roster, psi, labels.dl, plan.rare_class, cfg, cfg.embedding_columns,
                         derive_seed(stage_seed, kTagDl));
  plan.dl_machine = std::move(dl.machine);
  plan.dl_entropy = std::move(dl.entropy);

  const bool knowledge_roster = !cfg.k_roster.empty();
  const auto& k_kinds = knowledge_roster ? cfg.k_roster : cfg.dl_roster;
  const auto& k_cols = knowledge_roster ? knowledge_columns(cfg) : cfg.embedding_columns;
  const Dataset kds = knowledge_training_set(psi, plan.overlap_class, labels.knowledge_uses_overlap);
  auto km = train_roster(k_kinds, kds, labels.knowledge, plan.rare_class, cfg, k_cols,
                         derive_seed(stage_seed, kTagKnowledge));
  plan.k_machine = std::move(km.machine);
  plan.k_entropy = std::move(km.entropy);

  plan.validation_accuracy =
      stage_validation(psi, cfg, plan.rare_class, plan.overlap_class, plan.dl_machine.kind(),
                       plan.k_machine.kind(), k_cols, stage_seed);
  return plan;
}

RareSaGeModel fit(const Dataset& ds, const PipelineConfig& cfg, const LogSink& log) {
  cfg.validate();
  require_labeled(ds);
  RareSaGeModel model;
  model.config = cfg;
  model.classes = ds.classes();
  model.input_dim = ds.dim();

  Dataset psi = ds.compact_classes();
  std::optional<double> previous;
  while (model.stages.size() < cfg.max_stages && psi.classes().size() >= 2) {
    auto plan = plan_stage(psi, cfg, model.stages.size());
    if (!plan) break;
    if (log) {
      std::string line = describe_stage(model.stages.size(), *plan);
      if (previous && plan->validation_accuracy) {
        line += " delta=" + format_double(*plan->validation_accuracy - *previous);
      }
      log(line);
    }
    previous = plan->validation_accuracy;
    psi = psi.without_class(plan->rare_class);
    model.stages.push_back(std::move(*plan));
  }
  if (model.stages.empty() && log) log("warning: no rare class found; model has 0 stages");

  model.residual_classes = psi.classes();
  if (psi.classes().size() == 1) {
    model.residual_class = psi.classes().front();
    if (log) log("residual: constant " + *model.residual_class);
    return model;
  }

  // Residual: best roster member by hold-out accuracy, refit on everything.
  const auto labels = identity_label_set(psi.classes());
  const std::uint64_t seed = derive_seed(cfg.seed, kTagResidual);
  std::size_t best = 0;
  double best_acc = -1.0;
  if (cfg.validation_fraction > 0.0 && cfg.dl_roster.size() > 1) {
    const auto split = stratified_holdout(psi, cfg.validation_fraction, derive_seed(seed, kTagValidation));
    if (!split.holdout.empty()) {
      const Dataset tr = psi.subset(split.train);
      for (std::size_t i = 0; i < cfg.dl_roster.size(); ++i) {
        const Machine m =
            train(cfg.dl_roster[i], tr, labels, machine_config(cfg, cfg.embedding_columns, derive_seed(seed, i)));
        std::size_t hits = 0;
        for (auto h : split.holdout) hits += m.predict(psi[h]).super_label == *psi[h].label;
        const double acc = static_cast<double>(hits) / static_cast<double>(split.holdout.size());
        if (acc > best_acc) {
          best_acc = acc;
          best = i;
        }
      }
    }
  }
  model.residual_machine =
      train(cfg.dl_roster[best], psi, labels, machine_config(cfg, cfg.embedding_columns, derive_seed(seed, best)));
  if (log) {
    std::string line = std::string("residual: ") + to_string(cfg.dl_roster[best]);
    if (best_acc >= 0.0) line += " validation_accuracy=" + format_double(best_acc);
    log(line);
  }
  return model;
}

// ---------------------------------------------------------------------------
// prediction

const char* to_string(FuseOutcome outcome) {
  switch (outcome) {
    case FuseOutcome::rare: return "rare";
    case FuseOutcome::overlap: return "overlap";
    case FuseOutcome::non_rare: return "non_rare";
  }
  return "?";
}

FuseOutcome fuse(const std::string& dl_super, const Prediction& eke, double t_c) {
  const bool rare = eke.super_label == kRareSuperName;
  if (!rare && eke.super_label != kNonRareSuperName) {
    throw ValidationError("knowledge label '" + eke.super_label + "' is neither RARE nor NONRARE");
  }
  if (dl_super == kOverlapSuper) {
    return rare && eke.confidence > t_c ? FuseOutcome::rare : FuseOutcome::overlap;
  }
  if (dl_super != kNotOverlapSuper) {
    throw ValidationError("data-driven label '" + dl_super + "' is neither OVERLAP nor NOT_OVERLAP");
  }
  return rare ? FuseOutcome::rare : FuseOutcome::non_rare;
}

PredictionTrace trace_prediction(const RareSaGeModel& model, const Observation& obs, double t_c) {
  if (obs.features.size() != model.input_dim) {
    throw ValidationError("dimension mismatch: model expects " + std::to_string(model.input_dim) +
                          " features, observation '" + obs.id + "' has " +
                          std::to_string(obs.features.size()));
  }
  PredictionTrace t;
  for (std::size_t s = 0; s < model.stages.size(); ++s) {
    const auto& st = model.stages[s];
    const auto dl = st.dl_machine.predict(obs).super_label;
    const auto outcome = fuse(dl, st.k_machine.predict(obs), t_c);
    t.stage = s;
    t.outcome = outcome;
    t.overridden = t.overridden || (dl == kOverlapSuper && outcome == FuseOutcome::rare);
    if (outcome == FuseOutcome::rare) {
      t.label = st.rare_class;
      return t;
    }
    if (outcome == FuseOutcome::overlap) {
      t.label = st.overlap_class;
      return t;
    }
    if (s + 1 == model.stages.size() && st.non_rare_classes.size() == 1) {
      t.label = st.non_rare_classes.front();
      return t;
    }
  }
  t.stage = model.stages.size();
  if (model.residual_class) {
    t.label = *model.residual_class;
  } else if (model.residual_machine) {
    t.label = model.residual_machine->predict(obs).super_label;
  } else {
    throw StateError("model has no residual stage");
  }
  return t;
}

std::string predict_label(const RareSaGeModel& model, const Observation& obs) {
  return trace_prediction(model, obs, model.config.t_c).label;
}

std::vector<std::string> predict_all(const RareSaGeModel& model, const Dataset& ds) {
  std::vector<std::string> out;
  out.reserve(ds.size());
  for (const auto& o : ds.observations()) out.push_back(predict_label(model, o));
  return out;
}

// ---------------------------------------------------------------------------
// serialization

nlohmann::json RareSaGeModel::to_json() const {
  auto stages_json = nlohmann::json::array();
  for (const auto& s : stages) {
    stages_json.push_back({
        {"rare_class", s.rare_class},
        {"overlap_class", s.overlap_class},
        {"non_rare_classes", s.non_rare_classes},
        {"dl_machine", s.dl_machine.to_json()},
        {"k_machine", s.k_machine.to_json()},
        {"dl_entropy", roster_to_json(s.dl_entropy)},
        {"k_entropy", roster_to_json(s.k_entropy)},
        {"profile", profile_to_json(s.profile)},
        {"validation_accuracy",
         s.validation_accuracy ? nlohmann::json(*s.validation_accuracy) : nlohmann::json(nullptr)},
    });
  }
  nlohmann::json residual;
  if (residual_machine) {
    residual = {{"machine", residual_machine->to_json()}};
  } else if (residual_class) {
    residual = {{"constant", *residual_class}};
  }
  residual["classes"] = residual_classes;
  return {
      {"format", "raresage-model"},
      {"format_version", kModelFormatVersion},
      {"config", config.to_json()},
      {"classes", classes},
      {"input_dim", input_dim},
      {"stages", stages_json},
      {"residual", residual},
  };
}

RareSaGeModel RareSaGeModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "raresage-model") throw FormatError("not a model file");
    if (j.at("format_version") != kModelFormatVersion) {
      throw FormatError("unsupported model format_version " + j.at("format_version").dump());
    }
    RareSaGeModel m;
    m.config = PipelineConfig::from_json(j.at("config"));
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.input_dim = j.at("input_dim").get<std::size_t>();
    for (const auto& s : j.at("stages")) {
      StagePlan p;
      p.rare_class = s.at("rare_class").get<std::string>();
      p.overlap_class = s.at("overlap_class").get<std::string>();
      p.non_rare_classes = s.at("non_rare_classes").get<std::vector<std::string>>();
      p.dl_machine = Machine::from_json(s.at("dl_machine"));
      p.k_machine = Machine::from_json(s.at("k_machine"));
      p.dl_entropy = roster_from_json(s.at("dl_entropy"));
      p.k_entropy = roster_from_json(s.at("k_entropy"));
      p.profile = profile_from_json(s.at("profile"));
      if (!s.at("validation_accuracy").is_null()) p.validation_accuracy = s.at("validation_accuracy").get<double>();
      m.stages.push_back(std::move(p));
    }
    const auto& r = j.at("residual");
    if (r.contains("machine")) m.residual_machine = Machine::from_json(r.at("machine"));
    if (r.contains("constant")) m.residual_class = r.at("constant").get<std::string>();
    m.residual_classes = r.at("classes").get<std::vector<std::string>>();
    if (!m.residual_machine && !m.residual_class) throw FormatError("model has no residual stage");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const RareSaGeModel& model) {
  write_text_atomic(path, model.to_json().dump(1) + "\n");
}

RareSaGeModel load_model(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return RareSaGeModel::from_json(j);
}

}  // namespace raresage
