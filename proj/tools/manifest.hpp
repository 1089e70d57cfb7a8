#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace raresage::cli {

/// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::filesystem::path& path);

/// Run record written beside every artifact. Holds only resolved parameters
/// and content digests, so two identical runs write identical manifests.
class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> argv);

  nlohmann::json& params() { return params_; }
  void input(const std::filesystem::path& path);
  void output(const std::filesystem::path& path);

  /// Writes `<primary>.manifest.json`.
  void write(const std::filesystem::path& primary) const;

 private:
  std::string command_;
  std::vector<std::string> argv_;
  nlohmann::json params_ = nlohmann::json::object();
  nlohmann::json inputs_ = nlohmann::json::array();
  nlohmann::json outputs_ = nlohmann::json::array();
};

}  // namespace raresage::cli
