#pragma once

// Flat `key = value` text, used for config files and the config block of
// checkpoints, plus locale-independent number formatting.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dvit {

using KeyValues = std::map<std::string, std::string, std::less<>>;

/// Parses `key = value` lines; blank lines and lines starting with '#' are
/// skipped. Throws ParseError on a line without '=' or a duplicate key.
KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values(const std::filesystem::path& path);
/// One `key=value` line per entry in key order.
std::string format_key_values(const KeyValues& kv);

double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);
/// Comma-separated list of integers, brackets and spaces optional: "[128, 64]".
std::vector<long long> parse_int_list(std::string_view s, std::string_view what);
std::vector<double> parse_double_list(std::string_view s, std::string_view what);

/// Shortest representation that round-trips.
std::string format_double(double v);
/// Fixed-point with `digits` decimals, '.' separator regardless of locale.
std::string format_fixed(double v, int digits = 4);

std::string read_text_file(const std::filesystem::path& path);
/// Writes to `<path>.tmp` then renames, so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace dvit
