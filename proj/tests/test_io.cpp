#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hitmix/error.hpp"
#include "hitmix/io.hpp"
#include "nlohmann/json.hpp"

using namespace hitmix;
namespace fs = std::filesystem;

namespace {

Graph parse(const std::string& text) {
  std::istringstream in(text);
  return load_edge_list(in);
}

LabelTable labels(const std::string& text) {
  std::istringstream in(text);
  return read_label_table(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("moments tsv") {
  const auto g = parse("0 1\n1 2\n3 4\n");
  const VertexId seeds[] = {2};
  const auto t = compute_moments(g, SeedSet(5, seeds));
  const auto tsv = moments_tsv(t);
  std::istringstream in(tsv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "vertex_id\tmean\tvariance\treachable");
  std::getline(in, line);
  CHECK(line == "0\t4\t8\t1");
  std::getline(in, line);
  CHECK(line == "1\t3\t8\t1");
  std::getline(in, line);
  CHECK(line == "3\tnan\tnan\t0");
}

TEST_CASE("membership outputs") {
  const auto g = parse("0 1\n1 2\n2 3\n3 0\n0 2\n2 4\n4 5\n5 6\n6 4\n");
  const VertexId seeds[] = {0};
  HitmixConfig cfg;
  cfg.rng_seed = 7;
  cfg.g_candidates = {2, 3};
  const auto r = hitmix::hitmix(g, SeedSet(7, seeds), cfg);
  const auto tsv = membership_tsv(r);
  CHECK(tsv.rfind("vertex_id\tmean\tvariance\tposterior_goal\tlabel\n", 0) == 0);
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 7);
  CHECK(tsv == membership_tsv(hitmix::hitmix(g, SeedSet(7, seeds), cfg)));

  const auto j = nlohmann::json::parse(membership_json(r));
  CHECK(j["selected_g"] == r.selected_fit().g);
  CHECK(j["tau"] == 0.5);
  CHECK(j["rng_seed"] == 7);
  REQUIRE(j["fits"].size() == 2);
  CHECK(j["fits"][0]["g"] == 2);
  CHECK(j["fits"][1]["g"] == 3);
  CHECK(j["cg"].size() == 2);

  const auto table = labels(tsv);
  CHECK(table.ids.size() == 6);
  for (std::size_t i = 0; i < table.ids.size(); ++i) CHECK(table.labels[i] == r.in_goal[i]);
}

TEST_CASE("label tables") {
  const auto plain = labels("# truth\n1 1\n2\t0\n\n3 1\n");
  CHECK(plain.ids == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(plain.labels == std::vector<std::int64_t>{1, 0, 1});
  const auto header = labels("id\tscore\tlabel\n4\t0.3\t0\n5\t0.9\t1\n");
  CHECK(header.ids == std::vector<std::uint64_t>{4, 5});
  CHECK(header.labels == std::vector<std::int64_t>{0, 1});
  const auto no_label_col = labels("id\tblock\n4\t2\n");
  CHECK(no_label_col.labels == std::vector<std::int64_t>{2});
  CHECK_THROWS_AS(labels("1\n"), Error);
  CHECK_THROWS_AS(labels("1 x\n"), Error);
  CHECK_THROWS_AS(labels(""), Error);
}

TEST_CASE("evaluate labels") {
  const auto t = labels("0 1\n1 1\n2 0\n3 0\n");
  const auto same = evaluate_labels(t, t);
  CHECK(same.ari == 1.0);
  CHECK(same.f1 == 1.0);
  CHECK(same.n_items == 4);
  const auto flipped = evaluate_labels(labels("0 0\n1 0\n2 1\n3 1\n"), t);
  CHECK(flipped.ari == doctest::Approx(1.0));
  CHECK(flipped.f1 == 0.0);
  const auto subset = evaluate_labels(labels("1 1\n2 1\n"), t);
  CHECK(subset.n_items == 2);
  CHECK(subset.precision == 0.5);
  CHECK_THROWS_AS(evaluate_labels(labels("9 1\n0 1\n"), t), Error);
  CHECK_THROWS_AS(evaluate_labels(t, labels("0 1\n0 0\n1 1\n")), Error);
  const auto j = nlohmann::json::parse(eval_json(same));
  CHECK(j["ari"] == 1.0);
  CHECK(j["f1"] == 1.0);
}

TEST_CASE("relabel") {
  std::istringstream edges("# names\nalice bob\nbob carol\ncarol alice\ndave bob\n");
  std::istringstream seeds("carol\n");
  const auto out = relabel(edges, &seeds);
  CHECK(out.edges == "0 1\n1 2\n2 0\n3 1\n");
  CHECK(out.mapping == "name\tid\nalice\t0\nbob\t1\ncarol\t2\ndave\t3\n");
  CHECK(out.seeds == "2\n");
  std::istringstream again(out.edges);
  CHECK(load_edge_list(again).num_vertices() == 4);

  std::istringstream e2("a b\n");
  std::istringstream bad_seed("zed\n");
  CHECK_THROWS_AS(relabel(e2, &bad_seed), Error);
  std::istringstream e3("a b c\n");
  CHECK_THROWS_AS(relabel(e3, nullptr), Error);
}

TEST_CASE("simulation csv") {
  SimulationSpec spec;
  spec.sweep = SweepKind::PIn;
  spec.values = {0.3, 0.1};
  spec.base.block_size = 20;
  spec.hitting_set_size = 5;
  spec.mc_samples = 2;
  spec.seed = 1;
  const auto summary = run_simulation(spec);
  const auto runs = runs_csv(summary, spec);
  CHECK(runs.rfind("condition,run,ari,f1\n", 0) == 0);
  CHECK(std::count(runs.begin(), runs.end(), '\n') == 5);
  CHECK(runs.find("p_in=0.3,0,") != std::string::npos);
  const auto sum = summary_csv(summary);
  CHECK(sum.rfind("condition,ari_mean,ari_p5,ari_p95,f1_mean,f1_p5,f1_p95", 0) == 0);
  CHECK(std::count(sum.begin(), sum.end(), '\n') == 3);
  CHECK(sum == summary_csv(run_simulation(spec)));
}

TEST_CASE("atomic writes") {
  const auto dir = fs::temp_directory_path() / "hitmix_io_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto path = dir / "out.txt";
  write_file_atomic(path, "first\n");
  write_file_atomic(path, "second\n");
  CHECK(slurp(path) == "second\n");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  CHECK_THROWS_AS(write_file_atomic(dir / "missing" / "x.txt", "x"), Error);
  fs::remove_all(dir);
}
