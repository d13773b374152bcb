// Command-line front end. Talks to the library only through the C API.
#include <cmath>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hitmix/hitmix.h"

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct Failure {
  int exit_code;
  std::string message;
};

void check(hm_status status, const char* stage, int exit_code = kRuntimeError) {
  if (status == HM_OK) return;
  throw Failure{exit_code, std::string(stage) + ": " + hm_status_name(status) + ": " + hm_last_error()};
}

void log(const std::string& line) { std::cerr << "[hitmix] " << line << '\n'; }

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  log("no --seed given; using seed " + std::to_string(seed));
  return seed;
}

std::vector<std::uint32_t> parse_clusters(const std::string& text) {
  if (text == "auto") return {};
  std::vector<std::uint32_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      const auto g = std::stoul(tok, &used);
      if (used != tok.size() || g < 2) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::uint32_t>(g));
    } catch (const std::exception&) {
      throw Failure{kUsageError, "--clusters: expected 'auto' or a comma list of integers >= 2"};
    }
  }
  if (out.empty()) throw Failure{kUsageError, "--clusters: empty list"};
  return out;
}

std::string out_path(const std::string& dir, const char* name) {
  if (dir.empty()) return "-";
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

// RAII owners for the C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Graph = Handle<hm_graph, hm_graph_free>;
using Seeds = Handle<hm_seeds, hm_seeds_free>;
using Moments = Handle<hm_moments, hm_moments_free>;
using Membership = Handle<hm_membership, hm_membership_free>;
using SbmSpec = Handle<hm_sbm_spec, hm_sbm_spec_free>;
using SbmResult = Handle<hm_sbm_result, hm_sbm_result_free>;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void load_inputs(const std::string& graph_path, const std::string& seeds_path, Graph& graph,
                 Seeds& seeds) {
  const auto t0 = std::chrono::steady_clock::now();
  check(hm_graph_load_file(graph_path.c_str(), graph.out()), "loading graph");
  check(hm_seeds_load_file(graph.get(), seeds_path.c_str(), seeds.out()), "loading seeds");
  log("graph: " + std::to_string(hm_graph_num_vertices(graph.get())) + " vertices, " +
      std::to_string(hm_graph_num_edges(graph.get())) + " edges, " +
      std::to_string(hm_seeds_count(seeds.get())) + " seeds (" +
      std::to_string(seconds_since(t0)) + " s)");
}

template <typename Stats>
void log_cg(Stats stats_fn) {
  for (unsigned order = 1; order <= 2; ++order) {
    std::uint64_t iters = 0;
    double residual = 0.0;
    int converged = 0;
    if (stats_fn(order, &iters, &residual, &converged) != HM_OK) continue;
    std::ostringstream line;
    line << "cg moment " << order << ": " << iters << " iterations, relative residual "
         << residual;
    log(line.str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seed-set expansion from random-walk hitting-time moments"};
  app.require_subcommand(1);

  std::string graph_path, seeds_path, out_dir, config_path, clusters = "auto";
  std::optional<std::uint64_t> seed;
  double tau = 0.5, cg_tol = 1e-10, em_tol = 1e-8;
  std::uint64_t samples_per_vertex = 25, em_max_iters = 500, workers = 0;

  auto* moments = app.add_subcommand("moments", "hitting-time mean and variance per vertex");
  moments->add_option("--graph", graph_path, "edge list")->required()->check(CLI::ExistingFile);
  moments->add_option("--seeds", seeds_path, "seed vertex ids")->required()->check(CLI::ExistingFile);
  moments->add_option("--out", out_dir, "output directory (default: stdout)");
  moments->add_option("--cg-tol", cg_tol, "CG relative residual tolerance")->check(CLI::Range(1e-300, 0.999));

  auto* expand = app.add_subcommand("expand", "goal-set membership probabilities");
  expand->add_option("--graph", graph_path, "edge list")->required()->check(CLI::ExistingFile);
  expand->add_option("--seeds", seeds_path, "seed vertex ids")->required()->check(CLI::ExistingFile);
  expand->add_option("--out", out_dir, "output directory (default: TSV to stdout, no JSON)");
  expand->add_option("--tau", tau, "membership threshold")->check(CLI::Range(0.0, 1.0));
  expand->add_option("--samples-per-vertex", samples_per_vertex, "pseudo-samples per vertex")
      ->check(CLI::PositiveNumber);
  expand->add_option("--clusters", clusters, "cluster counts, comma list or 'auto'");
  expand->add_option("--cg-tol", cg_tol, "CG relative residual tolerance")->check(CLI::Range(1e-300, 0.999));
  expand->add_option("--em-tol", em_tol, "EM relative log-likelihood tolerance")->check(CLI::PositiveNumber);
  expand->add_option("--em-max-iters", em_max_iters, "EM iteration cap")->check(CLI::PositiveNumber);
  expand->add_option("--seed", seed, "random seed");

  auto* sbm = app.add_subcommand("sbm-sim", "stochastic block model Monte Carlo study");
  sbm->add_option("--config", config_path, "key = value simulation file")->required()->check(CLI::ExistingFile);
  sbm->add_option("--out", out_dir, "output directory")->required();
  sbm->add_option("--seed", seed, "master seed (overrides the config)");
  sbm->add_option("--workers", workers, "worker threads (overrides the config)")->check(CLI::PositiveNumber);

  std::string pred_path, truth_path;
  auto* eval = app.add_subcommand("eval", "ARI / precision / recall / F1 of a labelling");
  eval->add_option("predicted", pred_path, "predicted labels TSV")->required()->check(CLI::ExistingFile);
  eval->add_option("truth", truth_path, "true labels TSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", out_dir, "also write eval.json here");

  std::string names_path, name_seeds_path;
  auto* relabel = app.add_subcommand("relabel", "map vertex names to dense integer ids");
  relabel->add_option("--graph", names_path, "edge list with arbitrary names")->required()->check(CLI::ExistingFile);
  relabel->add_option("--seeds", name_seeds_path, "seed names")->check(CLI::ExistingFile);
  relabel->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (*moments) {
      Graph graph;
      Seeds seeds;
      load_inputs(graph_path, seeds_path, graph, seeds);
      hm_cg_options cg;
      hm_cg_options_init(&cg);
      cg.rel_tol = cg_tol;
      Moments table;
      const auto t0 = std::chrono::steady_clock::now();
      check(hm_moments_compute(graph.get(), seeds.get(), &cg, table.out()), "computing moments");
      log("moments: " + std::to_string(seconds_since(t0)) + " s, " +
          std::to_string(hm_moments_unreachable(table.get())) + " unreachable vertices");
      log_cg([&](unsigned o, std::uint64_t* i, double* r, int* c) {
        return hm_moments_cg_stats(table.get(), o, i, r, c);
      });
      check(hm_moments_write_tsv(table.get(), out_path(out_dir, "moments.tsv").c_str()), "writing moments");
    } else if (*expand) {
      Graph graph;
      Seeds seeds;
      load_inputs(graph_path, seeds_path, graph, seeds);
      const auto ks = parse_clusters(clusters);
      hm_expand_options opt;
      hm_expand_options_init(&opt);
      opt.samples_per_vertex = samples_per_vertex;
      opt.clusters = ks.empty() ? nullptr : ks.data();
      opt.n_clusters = ks.size();
      opt.tau = tau;
      opt.em_max_iters = em_max_iters;
      opt.em_rel_tol = em_tol;
      opt.cg.rel_tol = cg_tol;
      opt.seed = resolve_seed(seed);
      Membership result;
      check(hm_expand(graph.get(), seeds.get(), &opt, result.out()), "expanding seed set");

      double t_mom = 0, t_samp = 0, t_mix = 0;
      hm_membership_stage_seconds(result.get(), &t_mom, &t_samp, &t_mix);
      log("stage times: moments " + std::to_string(t_mom) + " s, sampling " +
          std::to_string(t_samp) + " s, mixture " + std::to_string(t_mix) + " s");
      log_cg([&](unsigned o, std::uint64_t* i, double* r, int* c) {
        return hm_membership_cg_stats(result.get(), o, i, r, c);
      });
      for (std::size_t f = 0; f < hm_membership_num_fits(result.get()); ++f) {
        std::uint64_t g = 0, iters = 0;
        double b = 0, ll = 0;
        int conv = 0;
        hm_membership_fit(result.get(), f, &g, &b, &iters, &conv, &ll);
        std::ostringstream line;
        line.precision(10);
        if (std::isinf(b)) {
          line << "g=" << g << ": fit failed";
        } else {
          line << "g=" << g << ": BIC " << b << ", log-likelihood " << ll << ", " << iters
               << " EM iterations" << (conv ? "" : " (not converged)");
        }
        log(line.str());
      }
      log("selected g=" + std::to_string(hm_membership_selected_clusters(result.get())));
      check(hm_membership_write_tsv(result.get(), out_path(out_dir, "expand.tsv").c_str()), "writing TSV");
      if (!out_dir.empty()) {
        check(hm_membership_write_json(result.get(), out_path(out_dir, "expand.json").c_str()),
              "writing JSON");
      }
    } else if (*sbm) {
      SbmSpec spec;
      check(hm_sbm_spec_load_file(config_path.c_str(), spec.out()), "reading config", kUsageError);
      std::uint64_t s = 0;
      if (seed || !hm_sbm_spec_get_seed(spec.get(), &s)) s = resolve_seed(seed);
      check(hm_sbm_spec_set_seed(spec.get(), s), "config");
      if (workers) check(hm_sbm_spec_set_workers(spec.get(), workers), "config", kUsageError);
      SbmResult result;
      const auto t0 = std::chrono::steady_clock::now();
      check(hm_sbm_run(spec.get(), result.out()), "running simulation");
      log("simulation: " + std::to_string(seconds_since(t0)) + " s, seed " +
          std::to_string(hm_sbm_result_seed(result.get())));
      for (std::size_t c = 0; c < hm_sbm_result_num_conditions(result.get()); ++c) {
        hm_sbm_condition cond;
        hm_sbm_result_condition(result.get(), c, &cond);
        std::ostringstream line;
        line.precision(4);
        line << cond.label << ": ARI " << cond.ari_mean << " (" << cond.ari_p5 << ", "
             << cond.ari_p95 << "), F1 " << cond.f1_mean << " (" << cond.f1_p5 << ", "
             << cond.f1_p95 << "), failures " << cond.failures << ", disconnected "
             << cond.disconnected_runs;
        log(line.str());
      }
      check(hm_sbm_result_write_runs_csv(result.get(), out_path(out_dir, "runs.csv").c_str()), "writing runs");
      check(hm_sbm_result_write_summary_csv(result.get(), out_path(out_dir, "summary.csv").c_str()),
            "writing summary");
    } else if (*eval) {
      hm_eval_scores scores;
      check(hm_eval_label_files(pred_path.c_str(), truth_path.c_str(), &scores), "evaluating");
      check(hm_eval_write_json(&scores, "-"), "writing JSON");
      if (!out_dir.empty()) {
        check(hm_eval_write_json(&scores, out_path(out_dir, "eval.json").c_str()), "writing JSON");
      }
    } else if (*relabel) {
      const auto seeds_out = out_path(out_dir, "seeds.txt");
      check(hm_relabel_files(names_path.c_str(), out_path(out_dir, "edges.txt").c_str(),
                             out_path(out_dir, "mapping.tsv").c_str(),
                             name_seeds_path.empty() ? nullptr : name_seeds_path.c_str(),
                             seeds_out.c_str()),
            "relabelling");
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
