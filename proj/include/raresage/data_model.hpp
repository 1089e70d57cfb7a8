#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "raresage/label_set.hpp"

namespace raresage {

struct Observation {
  std::string id;
  std::string domain_id;
  std::optional<std::string> label;
  std::vector<double> features;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Immutable collection of observations over an ordered class set.
///
/// Invariants, checked on construction: at least one observation, every
/// feature vector has length dim() and is finite, ids are unique, and every
/// label names a class in classes(). Classes may be present with zero members
/// (e.g. after split_by_domain).
class Dataset {
 public:
  Dataset(std::vector<Observation> observations, std::vector<std::string> classes);

  /// Class set inferred from labels in order of first appearance.
  static Dataset from_observations(std::vector<Observation> observations);

  const std::vector<Observation>& observations() const { return observations_; }
  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return observations_.size(); }
  const Observation& operator[](std::size_t i) const { return observations_[i]; }

  bool has_class(const std::string& cls) const;
  std::size_t class_index(const std::string& cls) const;
  /// Indices of observations labeled `cls`, in dataset order.
  std::vector<std::size_t> indices_of(const std::string& cls) const;
  std::size_t count_of(const std::string& cls) const;
  bool fully_labeled() const;

  /// Observations at `indices`, same class set.
  Dataset subset(std::span<const std::size_t> indices) const;
  /// Drops classes with no members, keeping order.
  Dataset compact_classes() const;
  /// Removes every observation of `cls` and the class itself.
  Dataset without_class(const std::string& cls) const;
  /// Keeps only observations whose label is in `keep`; class set becomes `keep`.
  Dataset restrict_to(std::span<const std::string> keep) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<Observation> observations_;
  std::vector<std::string> classes_;
  std::size_t dim_ = 0;
};

struct LoadOptions {
  /// Test-set files may carry an empty class field.
  bool allow_unlabeled = false;
  /// L2-normalize every feature vector after parsing.
  bool normalize = false;
};

/// Reads the embeddings CSV: header `id,domain,class,f0,...,f{d-1}`.
Dataset load_embeddings(const std::filesystem::path& path, const LoadOptions& options = {});
Dataset parse_embeddings(std::istream& in, const LoadOptions& options = {},
                         const std::string& source = "<stream>");

/// Writes the embeddings CSV with shortest round-trip decimal features.
void write_embeddings(std::ostream& out, const Dataset& ds);
void save_embeddings(const std::filesystem::path& path, const Dataset& ds);

/// Partition by domain id; keys in lexicographic order, class set copied.
std::map<std::string, Dataset> split_by_domain(const Dataset& ds);

/// Replaces every label by the super containing it; class set = super names.
/// Throws ValidationError if `supers` fails validate_label_set against ds.classes().
Dataset relabel(const Dataset& ds, const LabelSet& supers);

/// Projects every feature vector onto `columns` (all columns when empty).
Dataset select_columns(const Dataset& ds, std::span<const std::size_t> columns);

/// Parses "0-3,7,9-10" into {0,1,2,3,7,9,10}. Empty string gives empty list.
std::vector<std::size_t> parse_column_list(const std::string& text);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace raresage
