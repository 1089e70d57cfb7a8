#include "raresage/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "raresage/error.hpp"
#include "raresage/io.hpp"

namespace raresage {

// ---------------------------------------------------------------------------
// io helpers

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, end);
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::vector<Observation> observations, std::vector<std::string> classes)
    : observations_(std::move(observations)), classes_(std::move(classes)) {
  if (observations_.empty()) throw ValidationError("dataset has no observations");
  dim_ = observations_.front().features.size();
  if (dim_ == 0) throw ValidationError("dataset dimension must be positive");

  std::set<std::string> class_set;
  for (const auto& c : classes_) {
    if (!class_set.insert(c).second) throw ValidationError("duplicate class name '" + c + "'");
  }
  std::unordered_set<std::string> ids;
  for (const auto& o : observations_) {
    if (o.features.size() != dim_) {
      throw ValidationError("observation '" + o.id + "' has " + std::to_string(o.features.size()) +
                            " features, expected " + std::to_string(dim_));
    }
    for (double v : o.features) {
      if (!std::isfinite(v)) throw ValidationError("observation '" + o.id + "' has a non-finite feature");
    }
    if (!ids.insert(o.id).second) throw ValidationError("duplicate observation id '" + o.id + "'");
    if (o.label && !class_set.count(*o.label)) {
      throw ValidationError("observation '" + o.id + "' has unknown class '" + *o.label + "'");
    }
  }
}

Dataset Dataset::from_observations(std::vector<Observation> observations) {
  std::vector<std::string> classes;
  std::set<std::string> seen;
  for (const auto& o : observations) {
    if (o.label && seen.insert(*o.label).second) classes.push_back(*o.label);
  }
  return Dataset(std::move(observations), std::move(classes));
}

bool Dataset::has_class(const std::string& cls) const {
  return std::find(classes_.begin(), classes_.end(), cls) != classes_.end();
}

std::size_t Dataset::class_index(const std::string& cls) const {
  auto it = std::find(classes_.begin(), classes_.end(), cls);
  if (it == classes_.end()) throw ValidationError("unknown class '" + cls + "'");
  return static_cast<std::size_t>(it - classes_.begin());
}

std::vector<std::size_t> Dataset::indices_of(const std::string& cls) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    if (observations_[i].label == cls) out.push_back(i);
  }
  return out;
}

std::size_t Dataset::count_of(const std::string& cls) const {
  return static_cast<std::size_t>(std::count_if(observations_.begin(), observations_.end(),
                                                [&](const Observation& o) { return o.label == cls; }));
}

bool Dataset::fully_labeled() const {
  return std::all_of(observations_.begin(), observations_.end(),
                     [](const Observation& o) { return o.label.has_value(); });
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Observation> obs;
  obs.reserve(indices.size());
  for (auto i : indices) obs.push_back(observations_.at(i));
  return Dataset(std::move(obs), classes_);
}

Dataset Dataset::compact_classes() const {
  std::vector<std::string> kept;
  for (const auto& c : classes_) {
    if (count_of(c) > 0) kept.push_back(c);
  }
  return Dataset(observations_, std::move(kept));
}

Dataset Dataset::without_class(const std::string& cls) const {
  std::vector<std::string> keep;
  for (const auto& c : classes_) {
    if (c != cls) keep.push_back(c);
  }
  return restrict_to(keep);
}

Dataset Dataset::restrict_to(std::span<const std::string> keep) const {
  std::vector<Observation> obs;
  for (const auto& o : observations_) {
    if (o.label && std::find(keep.begin(), keep.end(), *o.label) != keep.end()) obs.push_back(o);
  }
  return Dataset(std::move(obs), std::vector<std::string>(keep.begin(), keep.end()));
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset parse_embeddings(std::istream& in, const LoadOptions& options, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(source + ": empty file");
  auto header = split_commas(trim_cr(line));
  if (header.size() < 4 || header[0] != "id" || header[1] != "domain" || header[2] != "class") {
    throw FormatError(source + ": header must be id,domain,class,f0,...");
  }
  const std::size_t dim = header.size() - 3;
  for (std::size_t j = 0; j < dim; ++j) {
    if (header[3 + j] != "f" + std::to_string(j)) {
      throw FormatError(source + ": header column " + std::to_string(4 + j) + " must be f" +
                        std::to_string(j));
    }
  }

  std::vector<Observation> obs;
  std::unordered_set<std::string> ids;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    auto text = trim_cr(line);
    if (text.empty()) continue;
    auto cells = split_commas(text);
    const std::string where = source + " row " + std::to_string(row);
    if (cells.size() != header.size()) {
      throw FormatError(where + ": expected " + std::to_string(header.size()) + " columns, got " +
                        std::to_string(cells.size()));
    }
    Observation o;
    o.id = std::string(cells[0]);
    o.domain_id = std::string(cells[1]);
    if (o.id.empty()) throw FormatError(where + ": empty id");
    if (!cells[2].empty()) {
      o.label = std::string(cells[2]);
    } else if (!options.allow_unlabeled) {
      throw ValidationError(where + ": unlabeled observation '" + o.id +
                            "' is only allowed in test sets");
    }
    o.features.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      auto cell = cells[3 + j];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw FormatError(where + ": non-numeric feature f" + std::to_string(j) + " '" +
                          std::string(cell) + "'");
      }
      o.features[j] = v;
    }
    if (!ids.insert(o.id).second) throw ValidationError(source + ": duplicate id '" + o.id + "'");
    if (options.normalize) {
      double norm = 0.0;
      for (double v : o.features) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (double& v : o.features) v /= norm;
      }
    }
    obs.push_back(std::move(o));
  }
  if (obs.empty()) throw FormatError(source + ": no data rows");
  return Dataset::from_observations(std::move(obs));
}

Dataset load_embeddings(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_embeddings(in, options, path.string());
}

void write_embeddings(std::ostream& out, const Dataset& ds) {
  out << "id,domain,class";
  for (std::size_t j = 0; j < ds.dim(); ++j) out << ",f" << j;
  out << '\n';
  for (const auto& o : ds.observations()) {
    out << o.id << ',' << o.domain_id << ',' << o.label.value_or("");
    for (double v : o.features) out << ',' << format_double(v);
    out << '\n';
  }
}

void save_embeddings(const std::filesystem::path& path, const Dataset& ds) {
  std::ostringstream os;
  write_embeddings(os, ds);
  write_text_atomic(path, os.str());
}

// ---------------------------------------------------------------------------
// transforms

std::map<std::string, Dataset> split_by_domain(const Dataset& ds) {
  std::map<std::string, std::vector<Observation>> groups;
  for (const auto& o : ds.observations()) groups[o.domain_id].push_back(o);
  std::map<std::string, Dataset> out;
  for (auto& [domain, obs] : groups) out.emplace(domain, Dataset(std::move(obs), ds.classes()));
  return out;
}

Dataset relabel(const Dataset& ds, const LabelSet& supers) {
  auto report = validate_label_set(supers, ds.classes());
  if (!report.ok()) throw ValidationError("invalid label set: " + report.describe());
  std::vector<Observation> obs = ds.observations();
  for (auto& o : obs) {
    if (o.label) o.label = supers.find_containing(*o.label)->name;
  }
  return Dataset(std::move(obs), supers.names());
}

Dataset select_columns(const Dataset& ds, std::span<const std::size_t> columns) {
  if (columns.empty()) return ds;
  for (auto c : columns) {
    if (c >= ds.dim()) {
      throw ValidationError("column " + std::to_string(c) + " out of range for dimension " +
                            std::to_string(ds.dim()));
    }
  }
  std::vector<Observation> obs = ds.observations();
  for (auto& o : obs) {
    std::vector<double> f;
    f.reserve(columns.size());
    for (auto c : columns) f.push_back(o.features[c]);
    o.features = std::move(f);
  }
  return Dataset(std::move(obs), ds.classes());
}

std::vector<std::size_t> parse_column_list(const std::string& text) {
  std::vector<std::size_t> out;
  if (text.empty()) return out;
  auto parse_one = [&](std::string_view s) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ConfigError("bad column index '" + std::string(s) + "' in '" + text + "'");
    }
    return v;
  };
  for (auto part : split_commas(text)) {
    if (part.empty()) continue;
    auto dash = part.find('-');
    if (dash == std::string_view::npos) {
      out.push_back(parse_one(part));
    } else {
      auto lo = parse_one(part.substr(0, dash));
      auto hi = parse_one(part.substr(dash + 1));
      if (hi < lo) throw ConfigError("descending column range in '" + text + "'");
      for (auto c = lo; c <= hi; ++c) out.push_back(c);
    }
  }
  return out;
}

}  // namespace raresage
