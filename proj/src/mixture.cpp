#include "hitmix/mixture.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "hitmix/error.hpp"
#include "hitmix/random.hpp"

namespace hitmix {

namespace {

constexpr double kCollapsedWeight = 1e-12;
constexpr std::size_t kMaxRestarts = 3;

double log_sum_exp(std::span<const double> a) {
  const double hi = *std::max_element(a.begin(), a.end());
  double s = 0.0;
  for (const double x : a) s += std::exp(x - hi);
  return hi + std::log(s);
}

// Unweighted MLE over the log samples of the given rows.
LognormalParams pooled_mle(const LogSampleStats& stats, std::span<const std::size_t> rows,
                           double sigma2_floor) {
  const auto m = static_cast<double>(stats.per_vertex);
  double mu = 0.0;
  for (const auto i : rows) mu += stats.mean_log[i];
  mu /= static_cast<double>(rows.size());
  double ss = 0.0;
  for (const auto i : rows) {
    const double d = stats.mean_log[i] - mu;
    ss += stats.within_ss[i] + m * d * d;
  }
  const double sigma2 = ss / (m * static_cast<double>(rows.size()));
  return {mu, std::max(sigma2, sigma2_floor)};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double LognormalParams::log_density(double t) const noexcept {
  const double y = std::log(t);
  const double d = y - mu;
  return -y - 0.5 * std::log(2.0 * std::numbers::pi * sigma2) - d * d / (2.0 * sigma2);
}

LognormalParams lognormal_mom(double m1, double m2, double sigma2_floor) {
  require(std::isfinite(m1) && m1 > 0.0, "lognormal_mom: mean must be positive and finite");
  require(std::isfinite(m2) && m2 >= 0.0, "lognormal_mom: variance must be >= 0 and finite");
  require(sigma2_floor > 0.0, "lognormal_mom: sigma2 floor must be positive");
  double sigma2 = std::log1p(m2 / (m1 * m1));
  if (sigma2 < sigma2_floor) sigma2 = sigma2_floor;
  return {std::log(m1) - 0.5 * sigma2, sigma2};
}

VertexSamples draw_pseudo_samples(const MomentTable& moments, std::size_t m,
                                  std::uint64_t rng_seed, double sigma2_floor) {
  require(m >= 1, "samples per vertex must be >= 1");
  require(moments.raw.size() >= 2 || moments.size() == 0,
          "pseudo-samples need means and variances (moment order >= 2)");
  VertexSamples out;
  out.per_vertex = m;
  out.rng_seed = rng_seed;
  out.vertices.reserve(moments.size() - moments.unreachable_count);
  out.values.reserve((moments.size() - moments.unreachable_count) * m);
  for (std::size_t r = 0; r < moments.size(); ++r) {
    if (!moments.reachable[r]) continue;
    const auto v = moments.vertices[r];
    const auto law = lognormal_mom(moments.mean[r], moments.variance[r], sigma2_floor);
    std::mt19937_64 rng(derive_seed({rng_seed, v}));
    std::normal_distribution<double> normal(law.mu, std::sqrt(law.sigma2));
    out.vertices.push_back(v);
    for (std::size_t j = 0; j < m; ++j) out.values.push_back(std::exp(normal(rng)));
  }
  return out;
}

LogSampleStats LogSampleStats::from(const VertexSamples& samples) {
  require(samples.per_vertex >= 1, "samples per vertex must be >= 1");
  LogSampleStats s;
  s.per_vertex = samples.per_vertex;
  s.mean_log.resize(samples.size());
  s.within_ss.resize(samples.size());
  std::vector<double> logs(samples.per_vertex);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto row = samples.row(i);
    double mean = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      require(row[j] > 0.0 && std::isfinite(row[j]), "samples must be positive and finite");
      logs[j] = std::log(row[j]);
      mean += logs[j];
    }
    mean /= static_cast<double>(row.size());
    double ss = 0.0;
    for (const double y : logs) ss += (y - mean) * (y - mean);
    s.mean_log[i] = mean;
    s.within_ss[i] = ss;
  }
  return s;
}

EStepResult e_step(const LogSampleStats& stats, const MixtureState& state) {
  const std::size_t n = stats.size();
  const std::size_t g = state.g();
  const auto m = static_cast<double>(stats.per_vertex);

  // Terms of sum_j log f(t_ij; theta_k) that depend only on k.
  std::vector<double> log_weight(g), log_norm(g);
  for (std::size_t k = 0; k < g; ++k) {
    log_weight[k] = std::log(state.weights[k]);
    log_norm[k] = -0.5 * m * std::log(2.0 * std::numbers::pi * state.components[k].sigma2);
  }

  EStepResult out;
  out.responsibilities.resize(n * g);
  std::vector<double> a(g);
  for (std::size_t i = 0; i < n; ++i) {
    const double jacobian = -m * stats.mean_log[i];
    for (std::size_t k = 0; k < g; ++k) {
      const auto& c = state.components[k];
      const double d = stats.mean_log[i] - c.mu;
      a[k] = log_weight[k] + jacobian + log_norm[k] -
             (stats.within_ss[i] + m * d * d) / (2.0 * c.sigma2);
    }
    const double lse = log_sum_exp(a);
    out.log_likelihood += lse;
    double total = 0.0;
    for (std::size_t k = 0; k < g; ++k) {
      a[k] = std::exp(a[k] - lse);
      total += a[k];
    }
    for (std::size_t k = 0; k < g; ++k) out.responsibilities[i * g + k] = a[k] / total;
  }
  return out;
}

MixtureState m_step(const LogSampleStats& stats, std::span<const double> responsibilities,
                    const MixtureState& previous, double sigma2_floor) {
  const std::size_t n = stats.size();
  const std::size_t g = previous.g();
  require(responsibilities.size() == n * g, "m_step: responsibility matrix has wrong shape");
  const auto m = static_cast<double>(stats.per_vertex);

  MixtureState next = previous;
  for (std::size_t k = 0; k < g; ++k) {
    double mass = 0.0, sum_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = responsibilities[i * g + k];
      mass += r;
      sum_mean += r * stats.mean_log[i];
    }
    next.weights[k] = mass / static_cast<double>(n);
    if (mass <= 0.0) continue;
    const double mu = sum_mean / mass;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = stats.mean_log[i] - mu;
      ss += responsibilities[i * g + k] * (stats.within_ss[i] + m * d * d);
    }
    next.components[k] = {mu, std::max(ss / (m * mass), sigma2_floor)};
  }
  return next;
}

MixtureState initial_state(const LogSampleStats& stats, std::size_t g, double sigma2_floor) {
  const std::size_t n = stats.size();
  require(g >= 1, "cluster count must be >= 1");
  require(g <= n, "cluster count " + std::to_string(g) + " exceeds the number of vertices " +
                      std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return stats.mean_log[a] < stats.mean_log[b];
  });

  MixtureState state;
  state.weights.assign(g, 1.0 / static_cast<double>(g));
  for (std::size_t k = 0; k < g; ++k) {
    const auto lo = k * n / g;
    const auto hi = (k + 1) * n / g;
    state.components.push_back(
        pooled_mle(stats, std::span(order).subspan(lo, hi - lo), sigma2_floor));
  }
  return state;
}

std::size_t MixtureFit::goal_component() const {
  require(!components.empty(), "mixture has no components");
  std::size_t best = 0;
  for (std::size_t k = 1; k < components.size(); ++k) {
    if (components[k].mean() < components[best].mean()) best = k;
  }
  return best;
}

std::vector<double> MixtureFit::goal_posteriors() const {
  const auto goal = goal_component();
  std::vector<double> out(num_vertices());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = responsibility(i, goal);
  return out;
}

MixtureFit em_fit(const VertexSamples& samples, std::size_t g, const EmConfig& cfg) {
  require(g >= 2, "em_fit needs at least 2 components");
  require(cfg.max_iters >= 1, "em max_iters must be >= 1");
  require(cfg.rel_tol > 0.0, "em rel_tol must be positive");
  const auto stats = LogSampleStats::from(samples);
  auto state = initial_state(stats, g, cfg.sigma2_floor);

  MixtureFit fit;
  auto es = e_step(stats, state);
  fit.log_likelihood_trace.push_back(es.log_likelihood);

  std::vector<std::size_t> all_rows(stats.size());
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::size_t restarts = 0;

  std::size_t it = 0;
  while (it < cfg.max_iters) {
    ++it;
    auto next = m_step(stats, es.responsibilities, state, cfg.sigma2_floor);
    bool restarted = false;
    for (std::size_t k = 0; k < g; ++k) {
      if (next.weights[k] >= kCollapsedWeight) continue;
      if (++restarts > kMaxRestarts) {
        fail(ErrorCode::Numerical, "em: mixture component collapsed more than " +
                                       std::to_string(kMaxRestarts) + " times");
      }
      fit.warnings.push_back("component " + std::to_string(k) + " collapsed at iteration " +
                             std::to_string(it) + "; restarted at the pooled estimate");
      next.components[k] = pooled_mle(stats, all_rows, cfg.sigma2_floor);
      next.weights[k] = 1.0 / static_cast<double>(g);
      restarted = true;
    }
    if (restarted) {
      const double total = std::accumulate(next.weights.begin(), next.weights.end(), 0.0);
      for (auto& w : next.weights) w /= total;
      fit.restarts_at.push_back(fit.log_likelihood_trace.size());
    }
    state = std::move(next);

    const double previous = es.log_likelihood;
    es = e_step(stats, state);
    fit.log_likelihood_trace.push_back(es.log_likelihood);
    if (!std::isfinite(es.log_likelihood)) {
      fail(ErrorCode::Numerical, "em: log-likelihood became non-finite");
    }
    if (!restarted &&
        std::abs(es.log_likelihood - previous) <= cfg.rel_tol * std::abs(previous)) {
      fit.converged = true;
      break;
    }
  }

  fit.components = std::move(state.components);
  fit.weights = std::move(state.weights);
  fit.responsibilities = std::move(es.responsibilities);
  fit.log_likelihood = es.log_likelihood;
  fit.iterations = it;
  return fit;
}

double bic(const MixtureFit& fit, std::size_t n_vertices, std::size_t m,
           BicSampleSize sample_size) {
  const double params = 3.0 * static_cast<double>(fit.g()) - 1.0;
  const double n = sample_size == BicSampleSize::Observations
                       ? static_cast<double>(n_vertices) * static_cast<double>(m)
                       : static_cast<double>(n_vertices);
  return params * std::log(n) - 2.0 * fit.log_likelihood;
}

void HitmixConfig::validate() const {
  require(samples_per_vertex >= 1, "samples per vertex must be >= 1");
  require(!g_candidates.empty(), "at least one cluster count is required");
  for (const auto g : g_candidates) require(g >= 2, "cluster counts must be >= 2");
  require(tau >= 0.0 && tau <= 1.0, "tau must lie in [0, 1]");
  require(em_max_iters >= 1, "em max iterations must be >= 1");
  require(em_rel_tol > 0.0, "em tolerance must be positive");
  require(sigma2_floor > 0.0, "sigma2 floor must be positive");
  cg.validate();
}

std::vector<VertexId> MembershipResult::goal_set() const {
  std::vector<VertexId> out;
  for (std::size_t r = 0; r < in_goal.size(); ++r) {
    if (in_goal[r]) out.push_back(moments.vertices[r]);
  }
  return out;
}

namespace {

bool identical_moment_rows(const MomentTable& t) {
  const double tol = 1e-9;
  std::size_t first = t.size();
  for (std::size_t r = 0; r < t.size(); ++r) {
    if (!t.reachable[r]) continue;
    if (first == t.size()) {
      first = r;
      continue;
    }
    auto close = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); };
    if (!close(t.mean[r], t.mean[first]) || !close(t.variance[r], t.variance[first])) return false;
  }
  return true;
}

}  // namespace

MembershipResult hitmix(const Graph& graph, const SeedSet& seeds, const HitmixConfig& cfg) {
  cfg.validate();
  MembershipResult out;
  out.tau = cfg.tau;
  out.rng_seed = cfg.rng_seed;

  auto t0 = std::chrono::steady_clock::now();
  out.moments = compute_moments(graph, seeds, 2, cfg.cg);
  out.times.moments_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const auto samples =
      draw_pseudo_samples(out.moments, cfg.samples_per_vertex, cfg.rng_seed, cfg.sigma2_floor);
  out.times.sampling_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const auto em_cfg = cfg.em();
  auto run_fit = [&samples, &em_cfg](std::size_t g) {
    CandidateFit c;
    c.g = g;
    try {
      c.fit = em_fit(samples, g, em_cfg);
      c.bic = bic(c.fit, samples.size(), samples.per_vertex, BicSampleSize::Observations);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Numerical) throw;
      c.error = e.what();
      c.bic = std::numeric_limits<double>::infinity();
    }
    return c;
  };
  if (cfg.parallel_fits && cfg.g_candidates.size() > 1) {
    std::vector<std::future<CandidateFit>> pending;
    for (const auto g : cfg.g_candidates) pending.push_back(std::async(std::launch::async, run_fit, g));
    for (auto& p : pending) out.candidates.push_back(p.get());
  } else {
    for (const auto g : cfg.g_candidates) out.candidates.push_back(run_fit(g));
  }
  std::string errors;
  bool any = false;
  for (auto& c : out.candidates) {
    if (c.failed()) {
      errors += (errors.empty() ? "" : "; ") + ("g=" + std::to_string(c.g) + ": " + c.error);
      continue;
    }
    c.bic = bic(c.fit, samples.size(), samples.per_vertex, cfg.bic_sample_size);
    if (!any || c.bic < out.candidates[out.selected].bic) out.selected = static_cast<std::size_t>(&c - out.candidates.data());
    any = true;
  }
  if (!any) fail(ErrorCode::Numerical, "every mixture fit failed (" + errors + ")");
  out.times.mixture_s = seconds_since(t0);

  const auto& fit = out.selected_fit().fit;
  out.goal_component = fit.goal_component();
  out.posterior.assign(out.moments.size(), 0.0);
  out.in_goal.assign(out.moments.size(), 0);
  // Vertices with identical moments are exchangeable and any split between
  // them is sampling noise; they share the goal weight instead.
  out.identical_moments = identical_moment_rows(out.moments);
  for (std::size_t r = 0, i = 0; r < out.moments.size(); ++r) {
    if (!out.moments.reachable[r]) continue;
    out.posterior[r] = out.identical_moments ? fit.weights[out.goal_component]
                                             : fit.responsibility(i, out.goal_component);
    ++i;
    out.in_goal[r] = out.posterior[r] > cfg.tau ? 1 : 0;
  }
  return out;
}

}  // namespace hitmix
