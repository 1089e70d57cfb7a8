#include "manifest.hpp"

#include <array>
#include <memory>

#include <openssl/evp.h>

#include "raresage/error.hpp"
#include "raresage/io.hpp"

namespace raresage::cli {

std::string file_sha256(const std::filesystem::path& path) {
  const std::string bytes = read_text(path);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    throw IoError("cannot hash " + path.string());
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

Manifest::Manifest(std::string command, std::vector<std::string> argv)
    : command_(std::move(command)), argv_(std::move(argv)) {}

void Manifest::input(const std::filesystem::path& path) {
  inputs_.push_back({{"path", path.string()}, {"sha256", file_sha256(path)}});
}

void Manifest::output(const std::filesystem::path& path) {
  outputs_.push_back({{"path", path.string()}, {"sha256", file_sha256(path)}});
}

void Manifest::write(const std::filesystem::path& primary) const {
  const nlohmann::json j{
      {"tool", "raresage"},
      {"version", RARESAGE_VERSION},
      {"command", command_},
      {"argv", argv_},
      {"params", params_},
      {"inputs", inputs_},
      {"outputs", outputs_},
  };
  write_text_atomic(primary.string() + ".manifest.json", j.dump(2) + "\n");
}

}  // namespace raresage::cli
