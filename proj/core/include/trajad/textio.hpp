#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the file formats.
namespace trajad::textio {

/// Shortest decimal form that parses back to the same double.
std::string format_real(double value);

std::optional<double> parse_real(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

/// Parses space-separated `key=value` tokens following a magic prefix such as
/// `#traj v1`. Tokens without '=' are rejected.
std::map<std::string, std::string> parse_header_fields(std::string_view rest, std::size_t line);

/// Writes `contents` to `path` through a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace trajad::textio
