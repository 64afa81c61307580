// Small file helpers and the FNV-1a hash used by the pipeline manifest.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gridforge {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// 64-bit FNV-1a over raw bytes, rendered as 16 hex digits.
std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);
std::string hash_file_hex(const std::filesystem::path& path);

// Split a CSV line on commas; no quoting support (none of our files need it).
std::vector<std::string> split_csv_line(const std::string& line);

// Fixed-format double for CSV/JSON artifacts: shortest representation that
// round-trips, so repeated runs emit identical bytes.
std::string format_double(double v);

}  // namespace gridforge
