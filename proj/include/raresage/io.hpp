#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace raresage {

std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace raresage
