#include "hitmix/spd_solver.hpp"

namespace hitmix {

RestrictedOperator::RestrictedOperator(const Graph& graph, const NonSeedIndex& index) {
  const std::size_t n = index.size();
  sqrt_degree_.resize(n);
  inv_sqrt_degree_.resize(n);
  std::size_t nnz = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = index.global(i);
    const auto d = graph.degree(v);
    require(d > 0, "vertex " + std::to_string(v) + " has degree 0");
    sqrt_degree_[i] = std::sqrt(static_cast<double>(d));
    inv_sqrt_degree_[i] = 1.0 / sqrt_degree_[i];
    nnz += graph.neighbors(v).size();
  }

  offsets_.reserve(n + 1);
  offsets_.push_back(0);
  columns_.reserve(nnz);
  bool unit = true;
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = index.global(i);
    for (const auto& nb : graph.neighbors(v)) {
      const auto j = index.local(nb.vertex);
      if (j == NonSeedIndex::npos) continue;
      columns_.push_back(static_cast<std::uint32_t>(j));
      unit = unit && Graph::adjacency_weight(v, nb) == 1.0;
    }
    offsets_.push_back(columns_.size());
  }
  if (unit) return;
  weights_.reserve(columns_.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = index.global(i);
    for (const auto& nb : graph.neighbors(v)) {
      if (index.local(nb.vertex) != NonSeedIndex::npos) weights_.push_back(Graph::adjacency_weight(v, nb));
    }
  }
}

void RestrictedOperator::apply(std::span<const double> x, std::span<double> y) const {
  require(x.size() == size() && y.size() == size(),
          "restricted operator: vector length " + std::to_string(x.size()) +
              " does not match operator size " + std::to_string(size()));
  const std::size_t n = size();
  // y = x - D^{-1/2} A D^{-1/2} x, scaling x once up front.
  thread_local std::vector<double> z;
  z.resize(n);
  for (std::size_t j = 0; j < n; ++j) z[j] = x[j] * inv_sqrt_degree_[j];
  if (weights_.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) acc += z[columns_[k]];
      y[i] = x[i] - inv_sqrt_degree_[i] * acc;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) acc += weights_[k] * z[columns_[k]];
      y[i] = x[i] - inv_sqrt_degree_[i] * acc;
    }
  }
}

std::vector<double> RestrictedOperator::apply(std::span<const double> x) const {
  std::vector<double> y(x.size());
  apply(x, y);
  return y;
}

}  // namespace hitmix
