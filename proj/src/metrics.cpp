#include "hitmix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "hitmix/error.hpp"

namespace hitmix {

namespace {

double choose2(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

double adjusted_rand_index(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  require(a.size() == b.size(), "adjusted_rand_index: label vectors differ in length");
  require(a.size() >= 2, "adjusted_rand_index: need at least 2 items");

  std::map<std::pair<std::int64_t, std::int64_t>, double> joint;
  std::map<std::int64_t, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [_, c] : joint) index += choose2(c);
  for (const auto& [_, c] : rows) sum_rows += choose2(c);
  for (const auto& [_, c] : cols) sum_cols += choose2(c);

  const double expected = sum_rows * sum_cols / choose2(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sum_rows + sum_cols);
  const double denom = max_index - expected;
  if (denom == 0.0) {
    // Both partitions all-singletons or both one cluster.
    return joint.size() == rows.size() && joint.size() == cols.size() ? 1.0 : 0.0;
  }
  return (index - expected) / denom;
}

DetectionScores precision_recall_f1(std::span<const std::uint32_t> predicted,
                                    std::span<const std::uint32_t> truth,
                                    std::size_t universe_size) {
  std::vector<std::uint8_t> mark(universe_size, 0);
  for (const auto v : truth) {
    require(v < universe_size, "truth item outside the universe");
    mark[v] |= 1;
  }
  for (const auto v : predicted) {
    require(v < universe_size, "predicted item outside the universe");
    mark[v] |= 2;
  }
  double n_pred = 0, n_truth = 0, overlap = 0;
  for (const auto m : mark) {
    n_truth += (m & 1) ? 1 : 0;
    n_pred += (m & 2) ? 1 : 0;
    overlap += m == 3 ? 1 : 0;
  }
  DetectionScores s;
  s.precision = n_pred > 0 ? overlap / n_pred : 0.0;
  s.recall = n_truth > 0 ? overlap / n_truth : 0.0;
  s.f1 = s.precision + s.recall > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

std::vector<double> percentiles(std::span<const double> values, std::span<const double> probs) {
  require(!values.empty(), "percentiles of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  std::vector<double> out;
  out.reserve(probs.size());
  for (const double p : probs) {
    require(p >= 0.0 && p <= 1.0, "percentile probability outside [0, 1]");
    const double h = (n - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    out.push_back(sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]));
  }
  return out;
}

}  // namespace hitmix
