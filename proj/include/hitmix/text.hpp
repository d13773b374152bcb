#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the file readers and writers.
namespace hitmix {

// Shortest round-trip-stable decimal with at most 12 significant digits;
// NaN is written as "nan".
std::string format_number(double x);

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// "key = value" lines; '#' starts a comment, blank lines are skipped.
std::vector<KeyValue> read_key_values(std::istream& in);

std::vector<std::string> split_list(std::string_view s, char sep = ',');

double parse_double(std::string_view s);
std::uint64_t parse_u64(std::string_view s);
std::size_t parse_size(std::string_view s);
bool parse_bool(std::string_view s);
// Comma list of cluster counts, or "auto" for {2, 3, 4, 5}.
std::vector<std::size_t> parse_cluster_list(std::string_view s);

}  // namespace hitmix
