#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hitmix/graph.hpp"
#include "hitmix/moments.hpp"
#include "hitmix/spd_solver.hpp"

namespace hitmix {

inline constexpr double kDefaultSigma2Floor = 1e-8;

// Lognormal law: log T ~ N(mu, sigma2).
struct LognormalParams {
  double mu = 0.0;
  double sigma2 = 1.0;

  double mean() const noexcept { return std::exp(mu + 0.5 * sigma2); }
  double variance() const noexcept { return std::expm1(sigma2) * std::exp(2.0 * mu + sigma2); }
  double log_density(double t) const noexcept;
};

// Method-of-moments fit from a mean m1 > 0 and a variance m2 >= 0. The log
// variance is floored at sigma2_floor, which only bites when m2 is ~0.
LognormalParams lognormal_mom(double m1, double m2, double sigma2_floor = kDefaultSigma2Floor);

struct VertexSamples {
  std::vector<VertexId> vertices;
  std::size_t per_vertex = 0;
  std::vector<double> values;  // row-major, size() * per_vertex, all > 0
  std::uint64_t rng_seed = 0;

  std::size_t size() const noexcept { return vertices.size(); }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values.data() + i * per_vertex, per_vertex};
  }
};

// Fits lognormal_mom(mean, variance) for each reachable vertex and draws m
// variates. Each vertex uses its own stream seeded from (rng_seed, vertex id),
// so the draws do not depend on row order.
VertexSamples draw_pseudo_samples(const MomentTable& moments, std::size_t m,
                                  std::uint64_t rng_seed,
                                  double sigma2_floor = kDefaultSigma2Floor);

// Per-vertex sufficient statistics of the log samples; the grouped lognormal
// likelihood depends on the data only through these.
struct LogSampleStats {
  std::vector<double> mean_log;   // (1/m) sum_j log t_ij
  std::vector<double> within_ss;  // sum_j (log t_ij - mean_log_i)^2
  std::size_t per_vertex = 0;

  static LogSampleStats from(const VertexSamples& samples);
  std::size_t size() const noexcept { return mean_log.size(); }
};

struct MixtureState {
  std::vector<LognormalParams> components;
  std::vector<double> weights;

  std::size_t g() const noexcept { return components.size(); }
};

struct EStepResult {
  std::vector<double> responsibilities;  // row-major n x g
  double log_likelihood = 0.0;
};

// r_ik proportional to pi_k prod_j f(t_ij; theta_k), normalized over k in log
// space. log_likelihood = sum_i log sum_k pi_k prod_j f(t_ij; theta_k).
EStepResult e_step(const LogSampleStats& stats, const MixtureState& state);

// Weighted lognormal MLE per component; weights pi_k = sum_i r_ik / n.
// Components with no responsibility mass are returned with weight 0 and
// their previous parameters.
MixtureState m_step(const LogSampleStats& stats, std::span<const double> responsibilities,
                    const MixtureState& previous, double sigma2_floor);

// Quantile split on mean_log into g equal groups, per-group MLE, pi = 1/g.
MixtureState initial_state(const LogSampleStats& stats, std::size_t g, double sigma2_floor);

struct EmConfig {
  std::size_t max_iters = 500;
  double rel_tol = 1e-8;
  double sigma2_floor = kDefaultSigma2Floor;
};

struct MixtureFit {
  std::vector<LognormalParams> components;
  std::vector<double> weights;
  std::vector<double> responsibilities;  // row-major n x g
  double log_likelihood = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  // Log-likelihood at every E-step. A collapsed component restarts the
  // ascent; restarts_at holds the trace positions where that happened.
  std::vector<double> log_likelihood_trace;
  std::vector<std::size_t> restarts_at;
  std::vector<std::string> warnings;

  std::size_t g() const noexcept { return components.size(); }
  std::size_t num_vertices() const noexcept { return g() ? responsibilities.size() / g() : 0; }
  double responsibility(std::size_t i, std::size_t k) const noexcept {
    return responsibilities[i * g() + k];
  }
  // Index of the component with the smallest lognormal mean.
  std::size_t goal_component() const;
  // responsibility(i, goal_component()) for every vertex.
  std::vector<double> goal_posteriors() const;
};

MixtureFit em_fit(const VertexSamples& samples, std::size_t g, const EmConfig& cfg = {});

enum class BicSampleSize { Observations, Vertices };

// p ln N - 2 log L with p = 3g - 1; N = n * m observations by default.
double bic(const MixtureFit& fit, std::size_t n_vertices, std::size_t m,
           BicSampleSize sample_size = BicSampleSize::Observations);

struct HitmixConfig {
  std::size_t samples_per_vertex = 25;
  std::vector<std::size_t> g_candidates{2, 3, 4, 5};
  double tau = 0.5;
  std::size_t em_max_iters = 500;
  double em_rel_tol = 1e-8;
  std::uint64_t rng_seed = 0;
  double sigma2_floor = kDefaultSigma2Floor;
  BicSampleSize bic_sample_size = BicSampleSize::Observations;
  CgConfig cg;
  // Fit the candidate cluster counts on separate threads.
  bool parallel_fits = true;

  void validate() const;
  EmConfig em() const { return {em_max_iters, em_rel_tol, sigma2_floor}; }
};

// A candidate whose EM run failed keeps its error message and an infinite
// BIC, so it is never selected.
struct CandidateFit {
  std::size_t g = 0;
  double bic = 0.0;
  MixtureFit fit;
  std::string error;

  bool failed() const noexcept { return !error.empty(); }
};

struct StageTimes {
  double moments_s = 0.0;
  double sampling_s = 0.0;
  double mixture_s = 0.0;
};

struct MembershipResult {
  MomentTable moments;
  // Aligned with moments.vertices; unreachable vertices get posterior 0.
  std::vector<double> posterior;
  std::vector<std::uint8_t> in_goal;
  double tau = 0.5;
  std::uint64_t rng_seed = 0;
  std::vector<CandidateFit> candidates;
  std::size_t selected = 0;  // index into candidates
  std::size_t goal_component = 0;
  // Every reachable vertex had the same mean and variance.
  bool identical_moments = false;
  StageTimes times;

  const CandidateFit& selected_fit() const { return candidates.at(selected); }
  std::vector<VertexId> goal_set() const;
};

MembershipResult hitmix(const Graph& graph, const SeedSet& seeds, const HitmixConfig& cfg);

}  // namespace hitmix
