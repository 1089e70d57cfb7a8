#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace raresage {

/// A named union of original classes.
struct SuperLabel {
  std::string name;
  std::vector<std::string> members;

  friend bool operator==(const SuperLabel&, const SuperLabel&) = default;
};

struct LabelSet {
  std::vector<SuperLabel> supers;

  /// Super containing `cls`, if any.
  const SuperLabel* find_containing(const std::string& cls) const;
  const SuperLabel* find(const std::string& super_name) const;
  std::vector<std::string> names() const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

/// One super per class, named after the class.
LabelSet identity_label_set(std::span<const std::string> classes);

enum class LabelRule {
  mutual_exclusion,
  class_cover,
  union_rule,
};

const char* to_string(LabelRule rule);

struct LabelSetViolation {
  LabelRule rule;
  /// Supers involved; for class_cover, empty.
  std::vector<std::string> supers;
  /// Shared classes (mutual exclusion), uncovered classes (class cover), or
  /// members that are not classes of C (union rule).
  std::vector<std::string> classes;

  std::string describe() const;
};

struct LabelSetReport {
  std::vector<LabelSetViolation> violations;

  bool ok() const { return violations.empty(); }
  std::string describe() const;
};

/// Checks mutual exclusion, class cover and the union rule against C.
/// Empty supers and duplicate super names are reported under the union rule.
LabelSetReport validate_label_set(const LabelSet& labels, std::span<const std::string> classes);

}  // namespace raresage
