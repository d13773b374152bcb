#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hitmix {

// Hubert-Arabie adjusted Rand index of two labelings of the same items.
// When the expected and maximal index coincide (both partitions trivial in
// the same way), returns 1 for identical partitions and 0 otherwise.
double adjusted_rand_index(std::span<const std::int64_t> a, std::span<const std::int64_t> b);

struct DetectionScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Sets are given as item ids < universe_size; duplicates are ignored.
DetectionScores precision_recall_f1(std::span<const std::uint32_t> predicted,
                                    std::span<const std::uint32_t> truth,
                                    std::size_t universe_size);

// Type-7 (linear interpolation) sample quantiles.
std::vector<double> percentiles(std::span<const double> values, std::span<const double> probs);

}  // namespace hitmix
