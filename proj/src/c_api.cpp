#include "hitmix/hitmix.h"

#include <cstdio>
#include <exception>
#include <fstream>
#include <new>
#include <sstream>
#include <limits>
#include <string>

#include "hitmix/error.hpp"
#include "hitmix/graph.hpp"
#include "hitmix/io.hpp"
#include "hitmix/metrics.hpp"
#include "hitmix/mixture.hpp"
#include "hitmix/moments.hpp"
#include "hitmix/sbm.hpp"

struct hm_graph {
  hitmix::Graph graph;
};

struct hm_seeds {
  hitmix::SeedSet seeds;
};

struct hm_moments {
  hitmix::MomentTable table;
};

struct hm_membership {
  hitmix::MembershipResult result;
};

struct hm_sbm_spec {
  hitmix::SimulationSpec spec;
};

struct hm_sbm_result {
  hitmix::SimulationSpec spec;
  hitmix::McSummary summary;
};

namespace {

thread_local std::string last_error;

hm_status to_status(hitmix::ErrorCode code) {
  switch (code) {
    case hitmix::ErrorCode::InvalidArgument: return HM_ERR_INVALID_ARGUMENT;
    case hitmix::ErrorCode::Parse: return HM_ERR_PARSE;
    case hitmix::ErrorCode::Io: return HM_ERR_IO;
    case hitmix::ErrorCode::NotConverged: return HM_ERR_NOT_CONVERGED;
    case hitmix::ErrorCode::Unreachable: return HM_ERR_UNREACHABLE;
    case hitmix::ErrorCode::Numerical: return HM_ERR_NUMERICAL;
  }
  return HM_ERR_INTERNAL;
}

template <typename F>
hm_status guarded(F&& body) {
  try {
    body();
    return HM_OK;
  } catch (const hitmix::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return HM_ERR_INTERNAL;
}

void need(const void* p, const char* what) {
  if (!p) hitmix::fail(hitmix::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

void emit(const std::string& content, const char* path) {
  if (!path || std::string(path) == "-") {
    std::fwrite(content.data(), 1, content.size(), stdout);
    std::fflush(stdout);
    return;
  }
  hitmix::write_file_atomic(path, content);
}

hitmix::CgConfig cg_config(const hm_cg_options* o) {
  hitmix::CgConfig cfg;
  if (!o) return cfg;
  cfg.rel_tol = o->rel_tol;
  if (o->max_iters) cfg.max_iters = static_cast<std::size_t>(o->max_iters);
  cfg.start = o->random_start ? hitmix::CgConfig::Start::Random : hitmix::CgConfig::Start::Zeros;
  cfg.start_seed = o->start_seed;
  return cfg;
}

hm_status cg_stats_out(const hitmix::MomentTable& t, unsigned order, uint64_t* iterations,
                       double* residual, int* converged) {
  return guarded([&] {
    hitmix::require(order >= 1 && order <= t.cg.size(), "moment order out of range");
    const auto& s = t.cg[order - 1];
    if (iterations) *iterations = s.iterations;
    if (residual) *residual = s.final_rel_residual;
    if (converged) *converged = s.converged ? 1 : 0;
  });
}

}  // namespace

extern "C" {

const char* hm_last_error(void) { return last_error.c_str(); }

const char* hm_status_name(hm_status status) {
  switch (status) {
    case HM_OK: return "ok";
    case HM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HM_ERR_PARSE: return "parse error";
    case HM_ERR_IO: return "i/o error";
    case HM_ERR_NOT_CONVERGED: return "not converged";
    case HM_ERR_UNREACHABLE: return "unreachable";
    case HM_ERR_NUMERICAL: return "numerical error";
    case HM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* hm_version(void) { return "1.0.0"; }

hm_status hm_graph_load_file(const char* path, hm_graph** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new hm_graph{hitmix::load_edge_list_file(path)};
  });
}

hm_status hm_graph_load_text(const char* text, size_t length, hm_graph** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    std::istringstream in(std::string(text, length));
    *out = new hm_graph{hitmix::load_edge_list(in)};
  });
}

hm_status hm_graph_from_edges(size_t n_vertices, size_t n_edges, const uint32_t* us,
                              const uint32_t* vs, hm_graph** out) {
  return guarded([&] {
    need(out, "out");
    if (n_edges) {
      need(us, "us");
      need(vs, "vs");
    }
    std::vector<hitmix::Edge> edges(n_edges);
    for (size_t i = 0; i < n_edges; ++i) edges[i] = {us[i], vs[i]};
    *out = new hm_graph{hitmix::Graph::from_edges(n_vertices, edges)};
  });
}

void hm_graph_free(hm_graph* graph) { delete graph; }

size_t hm_graph_num_vertices(const hm_graph* graph) {
  return graph ? graph->graph.num_vertices() : 0;
}

uint64_t hm_graph_num_edges(const hm_graph* graph) { return graph ? graph->graph.num_edges() : 0; }

hm_status hm_graph_degree(const hm_graph* graph, uint32_t vertex, uint64_t* degree) {
  return guarded([&] {
    need(graph, "graph");
    need(degree, "degree");
    hitmix::require(vertex < graph->graph.num_vertices(), "vertex out of range");
    *degree = graph->graph.degree(vertex);
  });
}

hm_status hm_seeds_load_file(const hm_graph* graph, const char* path, hm_seeds** out) {
  return guarded([&] {
    need(graph, "graph");
    need(path, "path");
    need(out, "out");
    const auto ids = hitmix::read_seed_list_file(path);
    *out = new hm_seeds{hitmix::SeedSet(graph->graph.num_vertices(), ids)};
  });
}

hm_status hm_seeds_from_array(const hm_graph* graph, const uint32_t* ids, size_t n,
                              hm_seeds** out) {
  return guarded([&] {
    need(graph, "graph");
    need(out, "out");
    if (n) need(ids, "ids");
    *out = new hm_seeds{hitmix::SeedSet(graph->graph.num_vertices(), {ids, n})};
  });
}

void hm_seeds_free(hm_seeds* seeds) { delete seeds; }

size_t hm_seeds_count(const hm_seeds* seeds) { return seeds ? seeds->seeds.members().size() : 0; }

void hm_cg_options_init(hm_cg_options* options) {
  if (!options) return;
  const hitmix::CgConfig d;
  options->rel_tol = d.rel_tol;
  options->max_iters = 0;
  options->random_start = 0;
  options->start_seed = d.start_seed;
}

hm_status hm_moments_compute(const hm_graph* graph, const hm_seeds* seeds,
                             const hm_cg_options* options, hm_moments** out) {
  return guarded([&] {
    need(graph, "graph");
    need(seeds, "seeds");
    need(out, "out");
    *out = new hm_moments{hitmix::compute_moments(graph->graph, seeds->seeds, 2, cg_config(options))};
  });
}

void hm_moments_free(hm_moments* moments) { delete moments; }

size_t hm_moments_count(const hm_moments* moments) { return moments ? moments->table.size() : 0; }

size_t hm_moments_unreachable(const hm_moments* moments) {
  return moments ? moments->table.unreachable_count : 0;
}

hm_status hm_moments_row(const hm_moments* moments, size_t row, uint32_t* vertex, double* mean,
                         double* variance, int* reachable) {
  return guarded([&] {
    need(moments, "moments");
    const auto& t = moments->table;
    hitmix::require(row < t.size(), "row out of range");
    if (vertex) *vertex = t.vertices[row];
    if (mean) *mean = t.mean[row];
    if (variance) *variance = t.variance[row];
    if (reachable) *reachable = t.reachable[row];
  });
}

hm_status hm_moments_cg_stats(const hm_moments* moments, unsigned order, uint64_t* iterations,
                              double* rel_residual, int* converged) {
  if (!moments) {
    last_error = "moments is NULL";
    return HM_ERR_INVALID_ARGUMENT;
  }
  return cg_stats_out(moments->table, order, iterations, rel_residual, converged);
}

hm_status hm_moments_write_tsv(const hm_moments* moments, const char* path) {
  return guarded([&] {
    need(moments, "moments");
    emit(hitmix::moments_tsv(moments->table), path);
  });
}

void hm_expand_options_init(hm_expand_options* options) {
  if (!options) return;
  const hitmix::HitmixConfig d;
  options->samples_per_vertex = d.samples_per_vertex;
  options->clusters = nullptr;
  options->n_clusters = 0;
  options->tau = d.tau;
  options->em_max_iters = d.em_max_iters;
  options->em_rel_tol = d.em_rel_tol;
  options->sigma2_floor = d.sigma2_floor;
  options->bic_counts_vertices = 0;
  options->seed = d.rng_seed;
  hm_cg_options_init(&options->cg);
}

hm_status hm_expand(const hm_graph* graph, const hm_seeds* seeds, const hm_expand_options* options,
                    hm_membership** out) {
  return guarded([&] {
    need(graph, "graph");
    need(seeds, "seeds");
    need(out, "out");
    hitmix::HitmixConfig cfg;
    if (options) {
      cfg.samples_per_vertex = static_cast<std::size_t>(options->samples_per_vertex);
      if (options->clusters && options->n_clusters) {
        cfg.g_candidates.assign(options->clusters, options->clusters + options->n_clusters);
      }
      cfg.tau = options->tau;
      cfg.em_max_iters = static_cast<std::size_t>(options->em_max_iters);
      cfg.em_rel_tol = options->em_rel_tol;
      cfg.sigma2_floor = options->sigma2_floor;
      cfg.bic_sample_size = options->bic_counts_vertices ? hitmix::BicSampleSize::Vertices
                                                         : hitmix::BicSampleSize::Observations;
      cfg.rng_seed = options->seed;
      cfg.cg = cg_config(&options->cg);
    }
    *out = new hm_membership{hitmix::hitmix(graph->graph, seeds->seeds, cfg)};
  });
}

void hm_membership_free(hm_membership* membership) { delete membership; }

size_t hm_membership_count(const hm_membership* membership) {
  return membership ? membership->result.moments.size() : 0;
}

hm_status hm_membership_row(const hm_membership* membership, size_t row, uint32_t* vertex,
                            double* posterior, int* in_goal, int* reachable) {
  return guarded([&] {
    need(membership, "membership");
    const auto& r = membership->result;
    hitmix::require(row < r.moments.size(), "row out of range");
    if (vertex) *vertex = r.moments.vertices[row];
    if (posterior) *posterior = r.posterior[row];
    if (in_goal) *in_goal = r.in_goal[row];
    if (reachable) *reachable = r.moments.reachable[row];
  });
}

size_t hm_membership_selected_clusters(const hm_membership* membership) {
  return membership ? membership->result.selected_fit().g : 0;
}

size_t hm_membership_num_fits(const hm_membership* membership) {
  return membership ? membership->result.candidates.size() : 0;
}

hm_status hm_membership_fit(const hm_membership* membership, size_t index, uint64_t* clusters,
                            double* bic, uint64_t* em_iterations, int* converged,
                            double* log_likelihood) {
  return guarded([&] {
    need(membership, "membership");
    const auto& c = membership->result.candidates;
    hitmix::require(index < c.size(), "fit index out of range");
    if (clusters) *clusters = c[index].g;
    if (bic) *bic = c[index].bic;
    if (c[index].failed()) {
      if (em_iterations) *em_iterations = 0;
      if (converged) *converged = 0;
      if (log_likelihood) *log_likelihood = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    if (em_iterations) *em_iterations = c[index].fit.iterations;
    if (converged) *converged = c[index].fit.converged ? 1 : 0;
    if (log_likelihood) *log_likelihood = c[index].fit.log_likelihood;
  });
}

hm_status hm_membership_cg_stats(const hm_membership* membership, unsigned order,
                                 uint64_t* iterations, double* rel_residual, int* converged) {
  if (!membership) {
    last_error = "membership is NULL";
    return HM_ERR_INVALID_ARGUMENT;
  }
  return cg_stats_out(membership->result.moments, order, iterations, rel_residual, converged);
}

hm_status hm_membership_stage_seconds(const hm_membership* membership, double* moments,
                                      double* sampling, double* mixture) {
  return guarded([&] {
    need(membership, "membership");
    const auto& t = membership->result.times;
    if (moments) *moments = t.moments_s;
    if (sampling) *sampling = t.sampling_s;
    if (mixture) *mixture = t.mixture_s;
  });
}

hm_status hm_membership_write_tsv(const hm_membership* membership, const char* path) {
  return guarded([&] {
    need(membership, "membership");
    emit(hitmix::membership_tsv(membership->result), path);
  });
}

hm_status hm_membership_write_json(const hm_membership* membership, const char* path) {
  return guarded([&] {
    need(membership, "membership");
    emit(hitmix::membership_json(membership->result), path);
  });
}

hm_status hm_sbm_spec_load_file(const char* path, hm_sbm_spec** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new hm_sbm_spec{hitmix::parse_simulation_spec_file(path)};
  });
}

void hm_sbm_spec_free(hm_sbm_spec* spec) { delete spec; }

hm_status hm_sbm_spec_set_seed(hm_sbm_spec* spec, uint64_t seed) {
  return guarded([&] {
    need(spec, "spec");
    spec->spec.seed = seed;
  });
}

int hm_sbm_spec_get_seed(const hm_sbm_spec* spec, uint64_t* seed) {
  if (!spec || !spec->spec.seed) return 0;
  if (seed) *seed = *spec->spec.seed;
  return 1;
}

hm_status hm_sbm_spec_set_workers(hm_sbm_spec* spec, uint64_t workers) {
  return guarded([&] {
    need(spec, "spec");
    hitmix::require(workers >= 1, "workers must be >= 1");
    spec->spec.workers = static_cast<std::size_t>(workers);
  });
}

hm_status hm_sbm_run(const hm_sbm_spec* spec, hm_sbm_result** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    auto summary = hitmix::run_simulation(spec->spec);
    *out = new hm_sbm_result{spec->spec, std::move(summary)};
  });
}

void hm_sbm_result_free(hm_sbm_result* result) { delete result; }

uint64_t hm_sbm_result_seed(const hm_sbm_result* result) { return result ? result->summary.seed : 0; }

size_t hm_sbm_result_num_conditions(const hm_sbm_result* result) {
  return result ? result->summary.conditions.size() : 0;
}

hm_status hm_sbm_result_condition(const hm_sbm_result* result, size_t index,
                                  hm_sbm_condition* out) {
  return guarded([&] {
    need(result, "result");
    need(out, "out");
    const auto& cs = result->summary.conditions;
    hitmix::require(index < cs.size(), "condition index out of range");
    const auto& c = cs[index];
    *out = {c.label.c_str(), c.ari_mean, c.ari_p5, c.ari_p95, c.f1_mean, c.f1_p5, c.f1_p95,
            c.completed, c.failures, c.disconnected_runs};
  });
}

hm_status hm_sbm_result_write_runs_csv(const hm_sbm_result* result, const char* path) {
  return guarded([&] {
    need(result, "result");
    emit(hitmix::runs_csv(result->summary, result->spec), path);
  });
}

hm_status hm_sbm_result_write_summary_csv(const hm_sbm_result* result, const char* path) {
  return guarded([&] {
    need(result, "result");
    emit(hitmix::summary_csv(result->summary), path);
  });
}

hm_status hm_adjusted_rand_index(const int64_t* a, const int64_t* b, size_t n, double* ari) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(ari, "ari");
    *ari = hitmix::adjusted_rand_index({a, n}, {b, n});
  });
}

hm_status hm_eval_label_files(const char* predicted_path, const char* truth_path,
                              hm_eval_scores* scores) {
  return guarded([&] {
    need(predicted_path, "predicted_path");
    need(truth_path, "truth_path");
    need(scores, "scores");
    const auto r = hitmix::evaluate_labels(hitmix::read_label_table_file(predicted_path),
                                           hitmix::read_label_table_file(truth_path));
    *scores = {r.ari, r.precision, r.recall, r.f1, r.n_items};
  });
}

hm_status hm_eval_write_json(const hm_eval_scores* scores, const char* path) {
  return guarded([&] {
    need(scores, "scores");
    hitmix::EvalReport r{scores->ari, scores->precision, scores->recall, scores->f1,
                         static_cast<std::size_t>(scores->n_items)};
    emit(hitmix::eval_json(r), path);
  });
}

hm_status hm_relabel_files(const char* edges_in, const char* edges_out, const char* mapping_out,
                           const char* seeds_in, const char* seeds_out) {
  return guarded([&] {
    need(edges_in, "edges_in");
    need(edges_out, "edges_out");
    need(mapping_out, "mapping_out");
    std::ifstream edges(edges_in);
    if (!edges) hitmix::fail(hitmix::ErrorCode::Io, std::string("cannot open ") + edges_in);
    std::ifstream seeds;
    if (seeds_in) {
      need(seeds_out, "seeds_out");
      seeds.open(seeds_in);
      if (!seeds) hitmix::fail(hitmix::ErrorCode::Io, std::string("cannot open ") + seeds_in);
    }
    const auto out = hitmix::relabel(edges, seeds_in ? &seeds : nullptr);
    hitmix::write_file_atomic(edges_out, out.edges);
    hitmix::write_file_atomic(mapping_out, out.mapping);
    if (seeds_in) hitmix::write_file_atomic(seeds_out, out.seeds);
  });
}

}  // extern "C"
