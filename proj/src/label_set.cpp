#include "raresage/label_set.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace raresage {

const SuperLabel* LabelSet::find_containing(const std::string& cls) const {
  for (const auto& s : supers) {
    if (std::find(s.members.begin(), s.members.end(), cls) != s.members.end()) return &s;
  }
  return nullptr;
}

const SuperLabel* LabelSet::find(const std::string& super_name) const {
  for (const auto& s : supers) {
    if (s.name == super_name) return &s;
  }
  return nullptr;
}

std::vector<std::string> LabelSet::names() const {
  std::vector<std::string> out;
  out.reserve(supers.size());
  for (const auto& s : supers) out.push_back(s.name);
  return out;
}

LabelSet identity_label_set(std::span<const std::string> classes) {
  LabelSet ls;
  for (const auto& c : classes) ls.supers.push_back({c, {c}});
  return ls;
}

const char* to_string(LabelRule rule) {
  switch (rule) {
    case LabelRule::mutual_exclusion: return "mutual exclusion";
    case LabelRule::class_cover: return "class cover";
    case LabelRule::union_rule: return "union rule";
  }
  return "?";
}

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out;
}

}  // namespace

std::string LabelSetViolation::describe() const {
  std::ostringstream os;
  os << to_string(rule) << " violated";
  if (!supers.empty()) os << " by {" << join(supers) << "}";
  if (!classes.empty()) os << ": {" << join(classes) << "}";
  return os.str();
}

std::string LabelSetReport::describe() const {
  if (ok()) return "ok";
  std::string out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) out += "; ";
    out += violations[i].describe();
  }
  return out;
}

LabelSetReport validate_label_set(const LabelSet& labels, std::span<const std::string> classes) {
  LabelSetReport report;
  const std::set<std::string> universe(classes.begin(), classes.end());

  std::set<std::string> names;
  for (const auto& s : labels.supers) {
    std::vector<std::string> foreign;
    for (const auto& m : s.members) {
      if (!universe.count(m)) foreign.push_back(m);
    }
    if (s.members.empty() || !foreign.empty() || !names.insert(s.name).second) {
      report.violations.push_back({LabelRule::union_rule, {s.name}, foreign});
    }
  }

  for (std::size_t a = 0; a < labels.supers.size(); ++a) {
    for (std::size_t b = a + 1; b < labels.supers.size(); ++b) {
      const auto& sa = labels.supers[a];
      const auto& sb = labels.supers[b];
      std::vector<std::string> shared;
      for (const auto& m : sa.members) {
        if (std::find(sb.members.begin(), sb.members.end(), m) != sb.members.end()) {
          shared.push_back(m);
        }
      }
      if (!shared.empty()) {
        report.violations.push_back({LabelRule::mutual_exclusion, {sa.name, sb.name}, shared});
      }
    }
  }

  std::vector<std::string> uncovered;
  for (const auto& c : classes) {
    if (!labels.find_containing(c)) uncovered.push_back(c);
  }
  if (!uncovered.empty()) report.violations.push_back({LabelRule::class_cover, {}, uncovered});

  return report;
}

}  // namespace raresage
