#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace swipeauth {

// Shortest round-trip decimal representation (std::to_chars).
std::string fmt_double(double v);

std::uint64_t fnv1a64(std::string_view s);
std::string fnv1a64_hex(std::string_view s);

struct CsvFile {
  std::vector<std::string> header;               // empty when has_header=false
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_csv_line(const std::string& line);
CsvFile read_csv(const std::string& path, bool has_header = true);

}  // namespace swipeauth
