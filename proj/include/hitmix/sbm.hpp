#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hitmix/graph.hpp"
#include "hitmix/mixture.hpp"

namespace hitmix {

struct SbmConfig {
  std::size_t n_blocks = 2;
  std::size_t block_size = 100;
  double p_in = 0.15;
  double p_out = 0.05;
  std::uint64_t rng_seed = 0;

  std::size_t num_vertices() const noexcept { return n_blocks * block_size; }
  void validate() const;
};

struct SbmSample {
  Graph graph;
  std::vector<std::uint32_t> block;  // vertex v belongs to block v / block_size
};

// Independent edges with probability p_in inside a block and p_out across
// blocks; no self-loops.
SbmSample sample_sbm(const SbmConfig& cfg, std::mt19937_64& rng);
SbmSample sample_sbm(const SbmConfig& cfg);

// Uniform sample without replacement of `size` vertices of goal_block.
SeedSet sample_hitting_set(std::span<const std::uint32_t> block_labels, std::uint32_t goal_block,
                           std::size_t size, std::mt19937_64& rng);

enum class SweepKind { NumBlocks, PIn, HittingSetSize };

struct SimulationSpec {
  SweepKind sweep = SweepKind::PIn;
  std::vector<double> values;
  SbmConfig base;
  // p_out is divided by (b - 1) for each condition, holding the expected
  // number of out-block edges per vertex fixed as b varies.
  bool scale_p_out_by_blocks = false;
  std::size_t hitting_set_size = 10;
  std::uint32_t goal_block = 0;
  std::size_t mc_samples = 500;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  HitmixConfig hitmix;

  SimulationSpec() { hitmix.g_candidates = {2}; }

  std::size_t num_conditions() const noexcept { return values.size(); }
  SbmConfig condition_config(std::size_t c) const;
  std::size_t condition_hitting_set(std::size_t c) const;
  std::string condition_label(std::size_t c) const;
  void validate() const;
};

// The three Monte Carlo designs with their full sweeps.
SimulationSpec simulation1(std::size_t mc_samples = 500);
SimulationSpec simulation2(std::size_t mc_samples = 500);
SimulationSpec simulation3(std::size_t mc_samples = 500);

// key = value text; see README for the keys.
SimulationSpec parse_simulation_spec(std::istream& in);
SimulationSpec parse_simulation_spec_file(const std::filesystem::path& path);

struct RunRecord {
  std::size_t condition = 0;
  std::size_t run = 0;
  double ari = 0.0;
  double f1 = 0.0;
  bool failed = false;
  std::string error;
  std::size_t unreachable = 0;
  std::size_t em_iterations = 0;
  // Largest decrease between consecutive log-likelihoods of the fitted
  // mixtures (within restart segments); <= 0 for a monotone ascent.
  double em_max_ll_drop = 0.0;
  // max_i |sum_k r_ik - 1| over the final responsibilities.
  double max_row_sum_error = 0.0;
};

struct ConditionSummary {
  std::string label;
  double ari_mean = 0.0, ari_p5 = 0.0, ari_p95 = 0.0;
  double f1_mean = 0.0, f1_p5 = 0.0, f1_p95 = 0.0;
  std::size_t completed = 0;
  std::size_t failures = 0;
  std::size_t disconnected_runs = 0;
};

struct McSummary {
  std::uint64_t seed = 0;
  std::vector<ConditionSummary> conditions;
  std::vector<RunRecord> runs;  // ordered by (condition, run)
};

// Runs every condition x Monte Carlo sample on spec.workers threads. Each run
// draws from its own stream derived from (seed, condition, run), so results
// do not depend on the worker count. A spec without a seed gets a random one,
// reported in McSummary::seed.
McSummary run_simulation(const SimulationSpec& spec);

}  // namespace hitmix
