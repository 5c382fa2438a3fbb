#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace socialscope::csv {

using Row = std::vector<std::string>;

/// RFC 4180 style: comma separated, '"' quoting with doubled quotes, LF or CRLF
/// line ends. Blank lines are skipped.
std::vector<Row> parse(std::string_view content);

std::string escape(std::string_view field);
std::string format_row(const Row& row);

}  // namespace socialscope::csv

namespace socialscope::io {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Non-empty, trimmed lines.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace socialscope::io
