#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hitmix/error.hpp"
#include "hitmix/graph.hpp"

namespace hitmix {

struct CgConfig {
  enum class Start { Zeros, Random };

  double rel_tol = 1e-10;
  // Unset means 10 * n with a floor of 1000.
  std::optional<std::size_t> max_iters;
  Start start = Start::Zeros;
  std::uint64_t start_seed = 0;

  std::size_t resolved_max_iters(std::size_t n) const noexcept {
    if (max_iters) return *max_iters;
    return n * 10 < 1000 ? 1000 : n * 10;
  }

  void validate() const {
    require(rel_tol > 0.0 && rel_tol < 1.0, "cg rel_tol must lie in (0, 1)");
    require(!max_iters || *max_iters >= 1, "cg max_iters must be >= 1");
  }
};

struct CgStats {
  std::size_t iterations = 0;
  double final_rel_residual = 0.0;
  bool converged = false;
};

// H = P^T (I - D^{-1/2} A D^{-1/2}) P restricted to the vertices of an index.
// The adjacency pattern is cached in local CSR form, so apply() visits only
// edges with both endpoints inside the index. Edge weights are stored only
// when some weight differs from 1 (multi-edges, self-loops).
class RestrictedOperator {
 public:
  RestrictedOperator(const Graph& graph, const NonSeedIndex& index);

  std::size_t size() const noexcept { return sqrt_degree_.size(); }
  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> apply(std::span<const double> x) const;

  // sqrt(d_i) per local index; maps original coordinates to SPD ones.
  std::span<const double> sqrt_degrees() const noexcept { return sqrt_degree_; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> columns_;
  std::vector<double> weights_;  // empty when every weight is 1
  std::vector<double> sqrt_degree_;
  std::vector<double> inv_sqrt_degree_;
};

template <typename Op>
concept LinearOperator = requires(const Op& op, std::span<const double> x, std::span<double> y) {
  { op.size() } -> std::convertible_to<std::size_t>;
  op.apply(x, y);
};

struct CgResult {
  std::vector<double> x;
  CgStats stats;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline constexpr std::size_t kResidualRefresh = 50;

}  // namespace detail

// Plain conjugate gradients for symmetric positive definite op. The
// recursive residual is replaced by b - op(x) every 50 iterations and again
// before convergence is declared, so stats.final_rel_residual is a true
// residual.
template <LinearOperator Op>
CgResult conjugate_gradient(const Op& op, std::span<const double> b, const CgConfig& cfg) {
  cfg.validate();
  const std::size_t n = op.size();
  require(b.size() == n, "cg: right-hand side has length " + std::to_string(b.size()) +
                             ", operator has size " + std::to_string(n));

  CgResult out;
  out.x.assign(n, 0.0);
  const double b_norm = std::sqrt(detail::dot(b, b));
  if (!std::isfinite(b_norm)) fail(ErrorCode::Numerical, "cg: right-hand side is not finite");
  if (b_norm == 0.0) {
    out.stats.converged = true;
    return out;
  }

  if (cfg.start == CgConfig::Start::Random) {
    std::mt19937_64 rng(cfg.start_seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (auto& v : out.x) v = unif(rng);
  }

  std::vector<double> r(n), p(n), ap(n);
  auto true_residual = [&] {
    op.apply(out.x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  };
  true_residual();
  double rr = detail::dot(r, r);
  p = r;

  const std::size_t max_iters = cfg.resolved_max_iters(n);
  std::size_t it = 0;
  double rel = std::sqrt(rr) / b_norm;
  while (rel > cfg.rel_tol && it < max_iters) {
    op.apply(p, ap);
    const double pap = detail::dot(p, ap);
    if (!std::isfinite(pap) || pap <= 0.0) {
      fail(ErrorCode::Numerical,
           "cg: operator is not positive definite (p'Hp = " + std::to_string(pap) +
               "); filter unreachable vertices before solving");
    }
    const double alpha = rr / pap;
    ++it;

    double rr_next = 0.0;
    if (it % detail::kResidualRefresh == 0) {
      for (std::size_t i = 0; i < n; ++i) out.x[i] += alpha * p[i];
      true_residual();
      rr_next = detail::dot(r, r);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        out.x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
        rr_next += r[i] * r[i];
      }
      if (std::sqrt(rr_next) / b_norm <= cfg.rel_tol) {
        true_residual();
        rr_next = detail::dot(r, r);
      }
    }
    if (!std::isfinite(rr_next)) fail(ErrorCode::Numerical, "cg: residual became non-finite");

    const double beta = rr_next / rr;
    rr = rr_next;
    rel = std::sqrt(rr) / b_norm;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }

  out.stats.iterations = it;
  out.stats.final_rel_residual = rel;
  out.stats.converged = rel <= cfg.rel_tol;
  return out;
}

}  // namespace hitmix
