#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "raresage/data_model.hpp"

namespace testutil {

struct Row {
  std::string label;
  std::vector<double> x;
};

inline raresage::Dataset make_ds(const std::vector<Row>& rows, const std::string& domain = "A") {
  std::vector<raresage::Observation> obs;
  for (std::size_t i = 0; i < rows.size(); ++i)
    obs.push_back({domain + "-" + std::to_string(i), domain, rows[i].label, rows[i].x});
  return raresage::Dataset::from_observations(std::move(obs));
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("raresage_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testutil
