#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "hitmix/error.hpp"
#include "hitmix/sbm.hpp"

using namespace hitmix;

namespace {

std::uint64_t within_block_edges(const SbmSample& s) {
  std::uint64_t count = 0;
  for (VertexId u = 0; u < s.graph.num_vertices(); ++u)
    for (const auto& nb : s.graph.neighbors(u))
      if (nb.vertex > u && s.block[u] == s.block[nb.vertex]) count += nb.multiplicity;
  return count;
}

SimulationSpec parse(const std::string& text) {
  std::istringstream in(text);
  return parse_simulation_spec(in);
}

}  // namespace

TEST_CASE("sbm extremes") {
  SbmConfig cfg;
  cfg.block_size = 20;
  cfg.p_in = cfg.p_out = 0.0;
  const auto empty = sample_sbm(cfg);
  CHECK(empty.graph.num_vertices() == 40);
  CHECK(empty.graph.num_edges() == 0);

  cfg.p_in = 1.0;
  const auto cliques = sample_sbm(cfg);
  CHECK(cliques.graph.num_edges() == 2 * 190);
  for (VertexId u = 0; u < 40; ++u) {
    CHECK(cliques.graph.degree(u) == 19);
    CHECK(cliques.block[u] == u / 20);
    for (const auto& nb : cliques.graph.neighbors(u)) {
      CHECK(cliques.block[nb.vertex] == cliques.block[u]);
      CHECK(nb.vertex != u);
      CHECK(nb.multiplicity == 1);
    }
  }

  cfg.p_in = 0.0;
  cfg.p_out = 1.0;
  CHECK(sample_sbm(cfg).graph.num_edges() == 400);
}

TEST_CASE("sbm config validation") {
  SbmConfig cfg;
  cfg.p_in = 1.5;
  CHECK_THROWS_AS(sample_sbm(cfg), Error);
  cfg.p_in = 0.1;
  cfg.n_blocks = 0;
  CHECK_THROWS_AS(sample_sbm(cfg), Error);
}

TEST_CASE("sbm within-block edge count") {
  SbmConfig cfg;
  std::mt19937_64 rng(123);
  const int reps = 500;
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) sum += static_cast<double>(within_block_edges(sample_sbm(cfg, rng))) / 2.0;
  // Per block: Binomial(4950, 0.15).
  const double mean = sum / reps;
  const double sd = std::sqrt(4950 * 0.15 * 0.85 / reps);
  CHECK(std::abs(mean - 742.5) <= 3 * sd);
}

TEST_CASE("sbm expected degree") {
  SbmConfig cfg;
  cfg.n_blocks = 3;
  cfg.block_size = 50;
  cfg.p_in = 0.2;
  cfg.p_out = 0.03;
  std::mt19937_64 rng(9);
  std::vector<double> means;
  for (int r = 0; r < 200; ++r) {
    const auto s = sample_sbm(cfg, rng);
    const auto d = s.graph.degrees();
    means.push_back(static_cast<double>(std::accumulate(d.begin(), d.end(), std::uint64_t{0})) / 150.0);
  }
  const double m = std::accumulate(means.begin(), means.end(), 0.0) / means.size();
  double var = 0.0;
  for (double x : means) var += (x - m) * (x - m);
  var /= static_cast<double>(means.size() - 1);
  const double expected = 49 * 0.2 + 2 * 50 * 0.03;
  CHECK(std::abs(m - expected) <= 3 * std::sqrt(var / means.size()));
}

TEST_CASE("sbm determinism") {
  SbmConfig cfg;
  cfg.rng_seed = 77;
  CHECK(sample_sbm(cfg).graph == sample_sbm(cfg).graph);
  cfg.rng_seed = 78;
  const auto other = sample_sbm(cfg);
  cfg.rng_seed = 77;
  CHECK_FALSE(sample_sbm(cfg).graph == other.graph);
}

TEST_CASE("hitting set sampling") {
  const std::vector<std::uint32_t> labels{0, 0, 0, 0, 1, 1, 1, 1};
  std::mt19937_64 rng(4);
  const auto all = sample_hitting_set(labels, 0, 4, rng);
  CHECK(std::vector<VertexId>(all.members().begin(), all.members().end()) == std::vector<VertexId>{0, 1, 2, 3});
  const auto one = sample_hitting_set(labels, 1, 1, rng);
  REQUIRE(one.members().size() == 1);
  CHECK(labels[one.members()[0]] == 1);
  CHECK_THROWS_AS(sample_hitting_set(labels, 0, 0, rng), Error);
  CHECK_THROWS_AS(sample_hitting_set(labels, 0, 5, rng), Error);

  std::mt19937_64 a(10), b(10);
  const auto sa = sample_hitting_set(labels, 1, 2, a);
  const auto sb = sample_hitting_set(labels, 1, 2, b);
  CHECK(std::vector<VertexId>(sa.members().begin(), sa.members().end()) ==
        std::vector<VertexId>(sb.members().begin(), sb.members().end()));

  // Every pair of the goal block shows up.
  std::set<std::vector<VertexId>> seen;
  for (int r = 0; r < 400; ++r) {
    const auto s = sample_hitting_set(labels, 0, 2, rng);
    seen.insert({s.members().begin(), s.members().end()});
  }
  CHECK(seen.size() == 6);
}

TEST_CASE("simulation presets") {
  const auto s1 = simulation1(5);
  CHECK(s1.sweep == SweepKind::NumBlocks);
  CHECK(s1.values == std::vector<double>{2, 3, 4, 5, 6, 7, 8, 9, 10});
  CHECK(s1.scale_p_out_by_blocks);
  CHECK(s1.condition_config(2).n_blocks == 4);
  CHECK(s1.condition_config(2).p_out == doctest::Approx(0.05 / 3));
  CHECK(s1.mc_samples == 5);

  const auto s2 = simulation2();
  CHECK(s2.sweep == SweepKind::PIn);
  CHECK(s2.values.size() == 16);
  CHECK(s2.values.back() == doctest::Approx(0.2));
  CHECK(s2.condition_config(15).p_in == doctest::Approx(0.2));
  CHECK(s2.condition_label(15) == "p_in=0.2");
  CHECK(s2.mc_samples == 500);

  const auto s3 = simulation3();
  CHECK(s3.sweep == SweepKind::HittingSetSize);
  CHECK(s3.values == std::vector<double>{1, 5, 10, 25, 50});
  CHECK(s3.condition_hitting_set(4) == 50);
  CHECK(s3.hitmix.g_candidates == std::vector<std::size_t>{2});
}

TEST_CASE("simulation config parsing") {
  const auto spec = parse(
      "# sweep over p_in\n"
      "sweep = p_in\n"
      "values = 0.2, 0.1\n"
      "block_size = 30\n"
      "p_out = 0.04\n"
      "hitting_set_size = 5\n"
      "mc_samples = 3\n"
      "seed = 12\n"
      "clusters = 2,3\n"
      "samples_per_vertex = 10\n");
  CHECK(spec.sweep == SweepKind::PIn);
  CHECK(spec.values == std::vector<double>{0.2, 0.1});
  CHECK(spec.base.block_size == 30);
  CHECK(spec.base.p_out == 0.04);
  CHECK(spec.hitting_set_size == 5);
  CHECK(spec.mc_samples == 3);
  REQUIRE(spec.seed);
  CHECK(*spec.seed == 12);
  CHECK(spec.hitmix.g_candidates == std::vector<std::size_t>{2, 3});
  CHECK(spec.hitmix.samples_per_vertex == 10);

  auto code_of = [](const std::string& text) {
    try {
      parse(text);
    } catch (const Error& e) {
      return static_cast<int>(e.code());
    }
    return 0;
  };
  CHECK(code_of("values = 0.1\n") == static_cast<int>(ErrorCode::Parse));
  CHECK(code_of("sweep = p_in\nvalues = 0.1\ncolour = red\n") == static_cast<int>(ErrorCode::Parse));
  CHECK(code_of("sweep = widths\nvalues = 1\n") == static_cast<int>(ErrorCode::Parse));
  CHECK(code_of("sweep = p_in\nvalues = 0.1, x\n") == static_cast<int>(ErrorCode::Parse));
  CHECK(code_of("sweep = p_in\nvalues = 0.1\nno equals sign\n") == static_cast<int>(ErrorCode::Parse));
  CHECK(code_of("sweep = p_in\nvalues = 1.5\n") != 0);
  CHECK(code_of("sweep = p_in\nvalues = 0.1\nmc_samples = 0\n") != 0);
  CHECK(code_of("sweep = hitting_set_size\nvalues = 200\nblock_size = 100\n") != 0);
}

TEST_CASE("small simulation: determinism and worker independence") {
  auto spec = parse(
      "sweep = hitting_set_size\n"
      "values = 20, 1\n"
      "block_size = 40\n"
      "p_in = 0.3\n"
      "p_out = 0.05\n"
      "mc_samples = 4\n"
      "seed = 5\n");
  const auto a = run_simulation(spec);
  spec.workers = 3;
  const auto b = run_simulation(spec);
  CHECK(a.seed == 5);
  REQUIRE(a.runs.size() == 8);
  REQUIRE(a.conditions.size() == 2);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].condition == i / 4);
    CHECK(a.runs[i].run == i % 4);
    CHECK_FALSE(a.runs[i].failed);
    CHECK(a.runs[i].ari == b.runs[i].ari);
    CHECK(a.runs[i].f1 == b.runs[i].f1);
    CHECK(a.runs[i].em_max_ll_drop <= 1e-10);
    CHECK(a.runs[i].max_row_sum_error <= 1e-12);
  }
  for (const auto& c : a.conditions) {
    CHECK(c.completed == 4);
    CHECK(c.failures == 0);
    CHECK(c.ari_p5 <= c.ari_mean + 1e-12);
    CHECK(c.ari_mean <= c.ari_p95 + 1e-12);
    CHECK(c.f1_p5 <= c.f1_mean + 1e-12);
    CHECK(c.f1_mean <= c.f1_p95 + 1e-12);
  }
  CHECK(a.conditions[0].label == "hitting_set_size=20");
  CHECK(a.conditions[0].ari_mean > a.conditions[1].ari_mean);

  spec.seed.reset();
  const auto c = run_simulation(spec);
  CHECK(c.runs.size() == 8);
}

TEST_CASE("disconnected runs are completed, not discarded") {
  auto spec = parse(
      "sweep = p_in\n"
      "values = 0.02\n"
      "block_size = 30\n"
      "p_out = 0.0\n"
      "hitting_set_size = 3\n"
      "mc_samples = 3\n"
      "seed = 2\n");
  const auto r = run_simulation(spec);
  REQUIRE(r.conditions.size() == 1);
  // The second block is never reachable without cross edges.
  CHECK(r.conditions[0].disconnected_runs + r.conditions[0].failures == 3);
  for (const auto& run : r.runs) {
    if (!run.failed) CHECK(run.unreachable >= 30);
  }
}
