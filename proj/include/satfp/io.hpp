#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace satfp {

/// Writes through a sibling temp file and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Shortest round-trippable decimal; "inf"/"nan" for non-finite values.
std::string format_double(double v);

}  // namespace satfp
