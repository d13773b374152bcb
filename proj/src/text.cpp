#include "hitmix/text.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>

#include "hitmix/error.hpp"

namespace hitmix {

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::vector<KeyValue> read_key_values(std::istream& in) {
  std::vector<KeyValue> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::Parse, "config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    KeyValue kv{std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))),
                line_no};
    if (kv.key.empty() || kv.value.empty()) {
      fail(ErrorCode::Parse, "config line " + std::to_string(line_no) + ": empty key or value");
    }
    out.push_back(std::move(kv));
  }
  return out;
}

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  while (true) {
    const auto pos = s.find(sep);
    const auto tok = trim(s.substr(0, pos));
    if (tok.empty()) fail(ErrorCode::Parse, "empty item in list");
    out.emplace_back(tok);
    if (pos == std::string_view::npos) break;
    s = s.substr(pos + 1);
  }
  return out;
}

double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    fail(ErrorCode::Parse, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    fail(ErrorCode::Parse, "not a non-negative integer: '" + std::string(s) + "'");
  }
  return v;
}

std::size_t parse_size(std::string_view s) { return static_cast<std::size_t>(parse_u64(s)); }

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(ErrorCode::Parse, "not a boolean: '" + std::string(s) + "'");
}

std::vector<std::size_t> parse_cluster_list(std::string_view s) {
  if (trim(s) == "auto") return {2, 3, 4, 5};
  std::vector<std::size_t> out;
  for (const auto& tok : split_list(s)) {
    const auto g = parse_size(tok);
    if (g < 2) fail(ErrorCode::Parse, "cluster counts must be >= 2");
    out.push_back(g);
  }
  return out;
}

}  // namespace hitmix
