#include "hitmix/sbm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "hitmix/error.hpp"
#include "hitmix/metrics.hpp"
#include "hitmix/random.hpp"
#include "hitmix/text.hpp"

namespace hitmix {

namespace {

// Visits the indices of successes among `total` Bernoulli(p) trials by
// geometric skipping.
template <typename F>
void for_each_success(std::uint64_t total, double p, std::mt19937_64& rng, F&& visit) {
  if (p <= 0.0 || total == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t i = 0; i < total; ++i) visit(i);
    return;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double log_q = std::log1p(-p);
  std::uint64_t idx = 0;
  bool first = true;
  while (true) {
    const double u = 1.0 - unif(rng);  // (0, 1]
    const double skip = std::floor(std::log(u) / log_q);
    if (skip >= static_cast<double>(total)) return;
    idx += static_cast<std::uint64_t>(skip) + (first ? 0 : 1);
    first = false;
    if (idx >= total) return;
    visit(idx);
  }
}

}  // namespace

void SbmConfig::validate() const {
  require(n_blocks >= 1, "sbm: need at least one block");
  require(block_size >= 1, "sbm: block size must be >= 1");
  require(p_in >= 0.0 && p_in <= 1.0, "sbm: p_in must lie in [0, 1]");
  require(p_out >= 0.0 && p_out <= 1.0, "sbm: p_out must lie in [0, 1]");
}

SbmSample sample_sbm(const SbmConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const std::size_t s = cfg.block_size;
  SbmSample out;
  out.block.resize(cfg.num_vertices());
  for (std::size_t v = 0; v < out.block.size(); ++v) out.block[v] = static_cast<std::uint32_t>(v / s);

  std::vector<Edge> edges;
  for (std::size_t a = 0; a < cfg.n_blocks; ++a) {
    const auto base_a = static_cast<VertexId>(a * s);
    // Upper triangle of block a, enumerated row by row.
    std::uint64_t row = 0, row_start = 0;
    for_each_success(static_cast<std::uint64_t>(s) * (s - 1) / 2, cfg.p_in, rng,
                     [&](std::uint64_t idx) {
                       while (idx >= row_start + (s - 1 - row)) {
                         row_start += s - 1 - row;
                         ++row;
                       }
                       const auto col = row + 1 + (idx - row_start);
                       edges.push_back({static_cast<VertexId>(base_a + row),
                                        static_cast<VertexId>(base_a + col)});
                     });
    for (std::size_t b = a + 1; b < cfg.n_blocks; ++b) {
      const auto base_b = static_cast<VertexId>(b * s);
      for_each_success(static_cast<std::uint64_t>(s) * s, cfg.p_out, rng, [&](std::uint64_t idx) {
        edges.push_back({static_cast<VertexId>(base_a + idx / s),
                         static_cast<VertexId>(base_b + idx % s)});
      });
    }
  }
  out.graph = Graph::from_edges(cfg.num_vertices(), edges);
  return out;
}

SbmSample sample_sbm(const SbmConfig& cfg) {
  std::mt19937_64 rng(cfg.rng_seed);
  return sample_sbm(cfg, rng);
}

SeedSet sample_hitting_set(std::span<const std::uint32_t> block_labels, std::uint32_t goal_block,
                           std::size_t size, std::mt19937_64& rng) {
  std::vector<VertexId> pool;
  for (std::size_t v = 0; v < block_labels.size(); ++v) {
    if (block_labels[v] == goal_block) pool.push_back(static_cast<VertexId>(v));
  }
  require(size >= 1, "hitting set size must be >= 1");
  require(size <= pool.size(), "hitting set size " + std::to_string(size) +
                                   " exceeds goal block size " + std::to_string(pool.size()));
  for (std::size_t i = 0; i < size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(size);
  return SeedSet(block_labels.size(), pool);
}

SbmConfig SimulationSpec::condition_config(std::size_t c) const {
  SbmConfig cfg = base;
  const double value = values.at(c);
  if (sweep == SweepKind::NumBlocks) cfg.n_blocks = static_cast<std::size_t>(value);
  if (sweep == SweepKind::PIn) cfg.p_in = value;
  if (scale_p_out_by_blocks && cfg.n_blocks > 1) {
    cfg.p_out = base.p_out / static_cast<double>(cfg.n_blocks - 1);
  }
  return cfg;
}

std::size_t SimulationSpec::condition_hitting_set(std::size_t c) const {
  return sweep == SweepKind::HittingSetSize ? static_cast<std::size_t>(values.at(c))
                                            : hitting_set_size;
}

std::string SimulationSpec::condition_label(std::size_t c) const {
  const char* name = sweep == SweepKind::NumBlocks ? "n_blocks"
                     : sweep == SweepKind::PIn     ? "p_in"
                                                   : "hitting_set_size";
  return std::string(name) + "=" + format_number(values.at(c));
}

void SimulationSpec::validate() const {
  require(!values.empty(), "simulation: sweep has no values");
  require(mc_samples >= 1, "simulation: mc_samples must be >= 1");
  require(workers >= 1, "simulation: workers must be >= 1");
  for (const double v : values) {
    if (sweep != SweepKind::PIn) {
      require(v >= 1.0 && v == std::floor(v), "simulation: sweep values must be positive integers");
    }
  }
  for (std::size_t c = 0; c < values.size(); ++c) {
    const auto cfg = condition_config(c);
    cfg.validate();
    require(goal_block < cfg.n_blocks, "simulation: goal block out of range");
    const auto h = condition_hitting_set(c);
    require(h >= 1 && h < cfg.block_size * cfg.n_blocks && h <= cfg.block_size,
            "simulation: hitting set size must be in [1, block size]");
  }
  hitmix.validate();
}

SimulationSpec simulation1(std::size_t mc_samples) {
  SimulationSpec spec;
  spec.sweep = SweepKind::NumBlocks;
  spec.values = {2, 3, 4, 5, 6, 7, 8, 9, 10};
  spec.base = {2, 200, 0.15, 0.05, 0};
  spec.scale_p_out_by_blocks = true;
  spec.hitting_set_size = 20;
  spec.mc_samples = mc_samples;
  return spec;
}

SimulationSpec simulation2(std::size_t mc_samples) {
  SimulationSpec spec;
  spec.sweep = SweepKind::PIn;
  for (int i = 5; i <= 20; ++i) spec.values.push_back(i / 100.0);
  spec.base = {2, 100, 0.15, 0.05, 0};
  spec.hitting_set_size = 10;
  spec.mc_samples = mc_samples;
  return spec;
}

SimulationSpec simulation3(std::size_t mc_samples) {
  SimulationSpec spec;
  spec.sweep = SweepKind::HittingSetSize;
  spec.values = {1, 5, 10, 25, 50};
  spec.base = {2, 100, 0.15, 0.05, 0};
  spec.mc_samples = mc_samples;
  return spec;
}

SimulationSpec parse_simulation_spec(std::istream& in) {
  SimulationSpec spec;
  bool have_sweep = false;
  for (const auto& [key, value, line] : read_key_values(in)) {
    const auto where = "config line " + std::to_string(line) + ": ";
    try {
      if (key == "sweep") {
        if (value == "n_blocks") spec.sweep = SweepKind::NumBlocks;
        else if (value == "p_in") spec.sweep = SweepKind::PIn;
        else if (value == "hitting_set_size") spec.sweep = SweepKind::HittingSetSize;
        else fail(ErrorCode::Parse, "unknown sweep '" + value + "'");
        have_sweep = true;
      } else if (key == "values") {
        spec.values.clear();
        for (const auto& tok : split_list(value)) spec.values.push_back(parse_double(tok));
      } else if (key == "n_blocks") {
        spec.base.n_blocks = parse_size(value);
      } else if (key == "block_size") {
        spec.base.block_size = parse_size(value);
      } else if (key == "p_in") {
        spec.base.p_in = parse_double(value);
      } else if (key == "p_out") {
        spec.base.p_out = parse_double(value);
      } else if (key == "scale_p_out_by_blocks") {
        spec.scale_p_out_by_blocks = parse_bool(value);
      } else if (key == "hitting_set_size") {
        spec.hitting_set_size = parse_size(value);
      } else if (key == "goal_block") {
        spec.goal_block = static_cast<std::uint32_t>(parse_size(value));
      } else if (key == "mc_samples") {
        spec.mc_samples = parse_size(value);
      } else if (key == "seed") {
        spec.seed = parse_u64(value);
      } else if (key == "workers") {
        spec.workers = parse_size(value);
      } else if (key == "samples_per_vertex") {
        spec.hitmix.samples_per_vertex = parse_size(value);
      } else if (key == "clusters") {
        spec.hitmix.g_candidates = parse_cluster_list(value);
      } else if (key == "tau") {
        spec.hitmix.tau = parse_double(value);
      } else if (key == "em_tol") {
        spec.hitmix.em_rel_tol = parse_double(value);
      } else if (key == "em_max_iters") {
        spec.hitmix.em_max_iters = parse_size(value);
      } else if (key == "cg_tol") {
        spec.hitmix.cg.rel_tol = parse_double(value);
      } else {
        fail(ErrorCode::Parse, "unknown key '" + key + "'");
      }
    } catch (const Error& e) {
      fail(ErrorCode::Parse, where + e.what());
    }
  }
  if (!have_sweep) fail(ErrorCode::Parse, "config: missing 'sweep'");
  spec.validate();
  return spec;
}

SimulationSpec parse_simulation_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return parse_simulation_spec(in);
}

namespace {

RunRecord run_once(const SimulationSpec& spec, std::uint64_t seed, std::size_t c, std::size_t r) {
  RunRecord rec;
  rec.condition = c;
  rec.run = r;
  const auto cfg = spec.condition_config(c);
  std::mt19937_64 rng(derive_seed({seed, c, r}));
  const auto sample = sample_sbm(cfg, rng);
  const auto seeds = sample_hitting_set(sample.block, spec.goal_block,
                                        spec.condition_hitting_set(c), rng);

  auto hm = spec.hitmix;
  hm.rng_seed = derive_seed({seed, c, r, 1});
  hm.parallel_fits = false;
  try {
    const auto result = hitmix(sample.graph, seeds, hm);
    const auto& vertices = result.moments.vertices;
    std::vector<std::int64_t> truth(vertices.size()), predicted(vertices.size());
    std::vector<std::uint32_t> truth_set, predicted_set;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      const auto v = vertices[i];
      truth[i] = sample.block[v] == spec.goal_block ? 1 : 0;
      predicted[i] = result.in_goal[i];
      if (truth[i]) truth_set.push_back(v);
      if (predicted[i]) predicted_set.push_back(v);
    }
    rec.ari = adjusted_rand_index(truth, predicted);
    rec.f1 = precision_recall_f1(predicted_set, truth_set, sample.graph.num_vertices()).f1;
    rec.unreachable = result.moments.unreachable_count;

    for (const auto& cand : result.candidates) {
      const auto& fit = cand.fit;
      rec.em_iterations = std::max(rec.em_iterations, fit.iterations);
      const auto& trace = fit.log_likelihood_trace;
      for (std::size_t t = 1; t < trace.size(); ++t) {
        if (std::find(fit.restarts_at.begin(), fit.restarts_at.end(), t) != fit.restarts_at.end()) {
          continue;
        }
        rec.em_max_ll_drop = std::max(rec.em_max_ll_drop, trace[t - 1] - trace[t]);
      }
      for (std::size_t i = 0; i < fit.num_vertices(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < fit.g(); ++k) s += fit.responsibility(i, k);
        rec.max_row_sum_error = std::max(rec.max_row_sum_error, std::abs(s - 1.0));
      }
    }
  } catch (const Error& e) {
    rec.failed = true;
    rec.error = e.what();
    rec.ari = rec.f1 = std::numeric_limits<double>::quiet_NaN();
  }
  return rec;
}

}  // namespace

McSummary run_simulation(const SimulationSpec& spec) {
  spec.validate();
  McSummary out;
  out.seed = spec.seed ? *spec.seed : std::random_device{}();
  const std::size_t n_runs = spec.num_conditions() * spec.mc_samples;
  out.runs.resize(n_runs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const auto task = next.fetch_add(1);
      if (task >= n_runs) return;
      try {
        out.runs[task] = run_once(spec, out.seed, task / spec.mc_samples, task % spec.mc_samples);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto n_workers = std::min(spec.workers, n_runs);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  static constexpr double kProbs[] = {0.05, 0.95};
  for (std::size_t c = 0; c < spec.num_conditions(); ++c) {
    ConditionSummary s;
    s.label = spec.condition_label(c);
    std::vector<double> ari, f1;
    for (std::size_t r = 0; r < spec.mc_samples; ++r) {
      const auto& rec = out.runs[c * spec.mc_samples + r];
      if (rec.failed) {
        ++s.failures;
        continue;
      }
      if (rec.unreachable > 0) ++s.disconnected_runs;
      ari.push_back(rec.ari);
      f1.push_back(rec.f1);
    }
    s.completed = ari.size();
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    if (ari.empty()) {
      s.ari_mean = s.ari_p5 = s.ari_p95 = s.f1_mean = s.f1_p5 = s.f1_p95 = nan;
    } else {
      std::sort(ari.begin(), ari.end());
      std::sort(f1.begin(), f1.end());
      auto mean = [](const std::vector<double>& v) {
        double t = 0.0;
        for (const double x : v) t += x;
        return t / static_cast<double>(v.size());
      };
      const auto pa = percentiles(ari, kProbs);
      const auto pf = percentiles(f1, kProbs);
      s.ari_mean = mean(ari);
      s.ari_p5 = pa[0];
      s.ari_p95 = pa[1];
      s.f1_mean = mean(f1);
      s.f1_p5 = pf[0];
      s.f1_p95 = pf[1];
    }
    out.conditions.push_back(std::move(s));
  }
  return out;
}

}  // namespace hitmix
