#include "raresage/config.hpp"

#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "raresage/error.hpp"
#include "raresage/io.hpp"

namespace raresage {

namespace {

namespace pt = boost::property_tree;

std::vector<MachineKind> parse_roster(const std::string& text) {
  std::vector<MachineKind> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(parse_machine_kind(item.substr(b, e - b + 1)));
  }
  return out;
}

template <typename T>
T value_of(const pt::ptree& node, const std::string& key) {
  try {
    return node.get_value<T>();
  } catch (const pt::ptree_error&) {
    throw ConfigError("config key '" + key + "' has invalid value '" + node.data() + "'");
  }
}

bool bool_of(const pt::ptree& node, const std::string& key) {
  const auto& v = node.data();
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "' expects true/false, got '" + v + "'");
}

void apply_pipeline_key(PipelineConfig& c, const std::string& key, const pt::ptree& node) {
  if (key == "k") c.k = value_of<std::size_t>(node, key);
  else if (key == "multiplier") c.multiplier = value_of<double>(node, key);
  else if (key == "t_c") c.t_c = value_of<double>(node, key);
  else if (key == "metric") c.metric = parse_metric(node.data());
  else if (key == "dl_roster") c.dl_roster = parse_roster(node.data());
  else if (key == "k_roster") c.k_roster = parse_roster(node.data());
  else if (key == "max_stages") c.max_stages = value_of<std::size_t>(node, key);
  else if (key == "seed") c.seed = value_of<std::uint64_t>(node, key);
  else if (key == "embedding_columns") c.embedding_columns = parse_column_list(node.data());
  else if (key == "knowledge_columns") c.knowledge_columns = parse_column_list(node.data());
  else if (key == "validation_fraction") c.validation_fraction = value_of<double>(node, key);
  else throw ConfigError("unknown config key '" + key + "'");
}

void apply_train_key(TrainConfig& t, const std::string& key, const pt::ptree& node) {
  const std::string full = "train." + key;
  if (key == "logistic_epochs") t.logistic_epochs = value_of<std::size_t>(node, full);
  else if (key == "logistic_rate") t.logistic_rate = value_of<double>(node, full);
  else if (key == "logistic_l2") t.logistic_l2 = value_of<double>(node, full);
  else if (key == "svm_epochs") t.svm_epochs = value_of<std::size_t>(node, full);
  else if (key == "svm_lambda") t.svm_lambda = value_of<double>(node, full);
  else if (key == "svm_eta0") t.svm_eta0 = value_of<double>(node, full);
  else if (key == "balanced") t.balanced = bool_of(node, full);
  else if (key == "temperature") t.temperature = value_of<double>(node, full);
  else if (key == "feature_map") t.feature_map = parse_feature_map(node.data());
  else throw ConfigError("unknown config key '" + full + "'");
}

}  // namespace

PipelineConfig parse_pipeline_config(std::istream& in, PipelineConfig base) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    for (const auto& [key, node] : tree) {
      if (key == "pipeline") {
        for (const auto& [k, v] : node) apply_pipeline_key(base, k, v);
      } else if (key == "train") {
        for (const auto& [k, v] : node) apply_train_key(base.train, k, v);
      } else if (node.empty()) {
        apply_pipeline_key(base, key, node);
      } else {
        throw ConfigError("unknown config section [" + key + "]");
      }
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    throw ConfigError(e.what());
  }
  base.validate();
  return base;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path, PipelineConfig base) {
  std::istringstream in(read_text(path));
  return parse_pipeline_config(in, std::move(base));
}

}  // namespace raresage
