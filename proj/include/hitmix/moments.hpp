#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hitmix/graph.hpp"
#include "hitmix/spd_solver.hpp"

namespace hitmix {

// Hitting-time moments for every non-seed vertex, rows in ascending vertex
// order. Unreachable rows carry NaN moments and reachable == 0.
struct MomentTable {
  std::vector<VertexId> vertices;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<std::uint8_t> reachable;
  // raw[m - 1][row] = E T^m for m = 1..order.
  std::vector<std::vector<double>> raw;
  // One entry per moment order.
  std::vector<CgStats> cg;
  std::size_t unreachable_count = 0;

  std::size_t size() const noexcept { return vertices.size(); }
};

// b_m = 1 + sum_{s<m} C(m,s) P E T^s in original coordinates, where P is the
// transition matrix D^{-1} A restricted to the index.
std::vector<double> moment_rhs(unsigned m, std::span<const std::vector<double>> lower_moments,
                               const Graph& graph, const NonSeedIndex& index);

// Raw moments up to `order` from the SPD systems (I - Ahat) x = D^{1/2} b_m,
// solved in sequence by CG and scaled back with D^{-1/2}.
MomentTable compute_moments(const Graph& graph, const SeedSet& seeds, unsigned order = 2,
                            const CgConfig& cfg = {});

struct WalkSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  std::size_t completed = 0;
  std::size_t truncated = 0;
};

// Monte Carlo estimate of the hitting time from one start vertex. Test
// oracle only; the walk picks neighbors with probability A(v, u) / d_v.
WalkSummary simulate_hitting_times(const Graph& graph, const SeedSet& seeds, VertexId start,
                                   std::size_t n_walks, std::size_t max_steps,
                                   std::uint64_t rng_seed);

}  // namespace hitmix
