#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sedsep {

// Throws IoFailure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

std::vector<std::string> split(std::string_view s, char sep);
// Strict: the whole field must parse.
std::optional<double> parse_double(std::string_view s);

// Six significant digits, the toolkit-wide report format.
std::string format_number(double v);

}  // namespace sedsep
