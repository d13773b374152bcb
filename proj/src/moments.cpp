#include "hitmix/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "hitmix/error.hpp"

namespace hitmix {

namespace {

double binomial(unsigned n, unsigned k) {
  double c = 1.0;
  for (unsigned i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

std::vector<double> moment_rhs(unsigned m, std::span<const std::vector<double>> lower_moments,
                               const Graph& graph, const NonSeedIndex& index) {
  require(m >= 1, "moment order must be >= 1");
  require(lower_moments.size() == m - 1, "moment_rhs: expected " + std::to_string(m - 1) +
                                             " lower moments, got " +
                                             std::to_string(lower_moments.size()));
  const std::size_t n = index.size();
  for (const auto& lm : lower_moments) require(lm.size() == n, "moment_rhs: length mismatch");

  std::vector<double> b(n, 1.0);
  if (m == 1) return b;

  // Combine the lower moments first: w = sum_s C(m,s) E T^s, then b = 1 + P w.
  std::vector<double> w(n, 0.0);
  for (unsigned s = 1; s < m; ++s) {
    const double c = binomial(m, s);
    const auto& et = lower_moments[s - 1];
    for (std::size_t i = 0; i < n; ++i) w[i] += c * et[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = index.global(i);
    double acc = 0.0;
    for (const auto& nb : graph.neighbors(v)) {
      const auto j = index.local(nb.vertex);
      if (j != NonSeedIndex::npos) acc += Graph::adjacency_weight(v, nb) * w[static_cast<std::size_t>(j)];
    }
    b[i] += acc / static_cast<double>(graph.degree(v));
  }
  return b;
}

MomentTable compute_moments(const Graph& graph, const SeedSet& seeds, unsigned order,
                            const CgConfig& cfg) {
  require(order >= 1, "moment order must be >= 1");
  cfg.validate();
  const auto reach = reachable_from(graph, seeds);
  const auto comp = seeds.complement();

  std::vector<VertexId> active;
  active.reserve(comp.size() - reach.unreachable_count);
  for (std::size_t r = 0; r < comp.size(); ++r) {
    if (reach.reachable[r]) active.push_back(comp[r]);
  }
  if (active.empty()) {
    fail(ErrorCode::Unreachable, "no non-seed vertex is connected to the seed set");
  }

  const NonSeedIndex index(graph.num_vertices(), active);
  const RestrictedOperator op(graph, index);
  const auto sqrt_d = op.sqrt_degrees();

  std::vector<std::vector<double>> moments;
  std::vector<CgStats> stats;
  for (unsigned m = 1; m <= order; ++m) {
    auto b = moment_rhs(m, moments, graph, index);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] *= sqrt_d[i];
    auto solved = conjugate_gradient(op, b, cfg);
    if (!solved.stats.converged) {
      fail(ErrorCode::NotConverged,
           "cg did not converge for moment " + std::to_string(m) + " after " +
               std::to_string(solved.stats.iterations) + " iterations (relative residual " +
               std::to_string(solved.stats.final_rel_residual) + ")");
    }
    for (std::size_t i = 0; i < b.size(); ++i) solved.x[i] /= sqrt_d[i];
    moments.push_back(std::move(solved.x));
    stats.push_back(solved.stats);
  }

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  MomentTable table;
  table.vertices.assign(comp.begin(), comp.end());
  table.reachable = reach.reachable;
  table.unreachable_count = reach.unreachable_count;
  table.cg = std::move(stats);
  table.mean.assign(comp.size(), nan);
  table.variance.assign(comp.size(), nan);
  table.raw.assign(order, std::vector<double>(comp.size(), nan));
  for (std::size_t r = 0, i = 0; r < comp.size(); ++r) {
    if (!reach.reachable[r]) continue;
    for (unsigned m = 0; m < order; ++m) table.raw[m][r] = moments[m][i];
    table.mean[r] = moments[0][i];
    if (order >= 2) {
      const double var = moments[1][i] - moments[0][i] * moments[0][i];
      table.variance[r] = var > 0.0 ? var : 0.0;
    }
    ++i;
  }
  return table;
}

WalkSummary simulate_hitting_times(const Graph& graph, const SeedSet& seeds, VertexId start,
                                   std::size_t n_walks, std::size_t max_steps,
                                   std::uint64_t rng_seed) {
  require(start < graph.num_vertices(), "start vertex out of range");
  require(!seeds.contains(start), "start vertex is a seed");
  require(n_walks >= 1, "n_walks must be >= 1");

  // Cumulative adjacency weights per vertex for inverse-CDF neighbor choice.
  const std::size_t n = graph.num_vertices();
  std::vector<std::size_t> first(n + 1, 0);
  std::vector<double> cumulative;
  std::vector<VertexId> target;
  for (VertexId v = 0; v < n; ++v) {
    double acc = 0.0;
    for (const auto& nb : graph.neighbors(v)) {
      acc += Graph::adjacency_weight(v, nb);
      cumulative.push_back(acc);
      target.push_back(nb.vertex);
    }
    first[v + 1] = cumulative.size();
  }
  require(graph.degree(start) > 0, "start vertex is isolated");

  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  WalkSummary out;
  double mean = 0.0, m2 = 0.0;
  for (std::size_t w = 0; w < n_walks; ++w) {
    VertexId v = start;
    std::size_t steps = 0;
    bool hit = false;
    while (steps < max_steps) {
      const auto lo = cumulative.begin() + static_cast<std::ptrdiff_t>(first[v]);
      const auto hi = cumulative.begin() + static_cast<std::ptrdiff_t>(first[v + 1]);
      const double u = unif(rng) * static_cast<double>(graph.degree(v));
      auto it = std::upper_bound(lo, hi, u);
      if (it == hi) --it;
      v = target[static_cast<std::size_t>(it - cumulative.begin())];
      ++steps;
      if (seeds.contains(v)) {
        hit = true;
        break;
      }
    }
    if (!hit) {
      ++out.truncated;
      continue;
    }
    ++out.completed;
    const double t = static_cast<double>(steps);
    const double delta = t - mean;
    mean += delta / static_cast<double>(out.completed);
    m2 += delta * (t - mean);
  }
  if (out.completed == 0) {
    fail(ErrorCode::InvalidArgument, "every walk was truncated at max_steps = " +
                                         std::to_string(max_steps));
  }
  out.mean = mean;
  out.variance = out.completed > 1 ? m2 / static_cast<double>(out.completed - 1) : 0.0;
  return out;
}

}  // namespace hitmix
