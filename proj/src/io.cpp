#include "hitmix/io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <system_error>
#include <unordered_map>

#include "hitmix/error.hpp"
#include "hitmix/metrics.hpp"
#include "hitmix/text.hpp"
#include "json.hpp"

namespace hitmix {

namespace {

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool is_comment_or_blank(const std::string& line) {
  const auto b = line.find_first_not_of(" \t\r");
  return b == std::string::npos || line[b] == '#';
}

nlohmann::json cg_json(const std::vector<CgStats>& stats) {
  auto arr = nlohmann::json::array();
  for (std::size_t m = 0; m < stats.size(); ++m) {
    arr.push_back({{"moment", m + 1},
                   {"iterations", stats[m].iterations},
                   {"relative_residual", stats[m].final_rel_residual},
                   {"converged", stats[m].converged}});
  }
  return arr;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write " + tmp.string());
    out << content;
    out.close();
    if (!out) fail(ErrorCode::Io, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::Io, "cannot move output into place at " + path.string());
  }
}

std::string moments_tsv(const MomentTable& table) {
  std::string out = "vertex_id\tmean\tvariance\treachable\n";
  for (std::size_t r = 0; r < table.size(); ++r) {
    out += std::to_string(table.vertices[r]) + '\t' + format_number(table.mean[r]) + '\t' +
           format_number(table.variance[r]) + '\t' + (table.reachable[r] ? "1" : "0") + '\n';
  }
  return out;
}

std::string membership_tsv(const MembershipResult& result) {
  const auto& m = result.moments;
  std::string out = "vertex_id\tmean\tvariance\tposterior_goal\tlabel\n";
  for (std::size_t r = 0; r < m.size(); ++r) {
    out += std::to_string(m.vertices[r]) + '\t' + format_number(m.mean[r]) + '\t' +
           format_number(m.variance[r]) + '\t' + format_number(result.posterior[r]) + '\t' +
           (result.in_goal[r] ? "1" : "0") + '\n';
  }
  return out;
}

std::string membership_json(const MembershipResult& result) {
  nlohmann::json j;
  const auto& sel = result.selected_fit();
  j["selected_g"] = sel.g;
  j["goal_component"] = result.goal_component;
  j["identical_moments"] = result.identical_moments;
  j["tau"] = result.tau;
  j["rng_seed"] = result.rng_seed;
  j["goal_set_size"] = result.goal_set().size();
  j["non_seed_vertices"] = result.moments.size();
  j["unreachable_vertices"] = result.moments.unreachable_count;
  j["cg"] = cg_json(result.moments.cg);
  auto fits = nlohmann::json::array();
  for (const auto& c : result.candidates) {
    if (c.failed()) {
      fits.push_back({{"g", c.g}, {"failed", true}, {"error", c.error}});
      continue;
    }
    auto comps = nlohmann::json::array();
    for (std::size_t k = 0; k < c.fit.g(); ++k) {
      const auto& p = c.fit.components[k];
      comps.push_back({{"mu", p.mu},
                       {"sigma2", p.sigma2},
                       {"weight", c.fit.weights[k]},
                       {"mean", p.mean()}});
    }
    fits.push_back({{"g", c.g},
                    {"bic", c.bic},
                    {"log_likelihood", c.fit.log_likelihood},
                    {"em_iterations", c.fit.iterations},
                    {"converged", c.fit.converged},
                    {"goal_component", c.fit.goal_component()},
                    {"components", comps},
                    {"warnings", c.fit.warnings}});
  }
  j["fits"] = fits;
  return j.dump(2) + "\n";
}

std::string runs_csv(const McSummary& summary, const SimulationSpec& spec) {
  std::string out = "condition,run,ari,f1\n";
  for (const auto& r : summary.runs) {
    out += spec.condition_label(r.condition) + ',' + std::to_string(r.run) + ',' +
           format_number(r.ari) + ',' + format_number(r.f1) + '\n';
  }
  return out;
}

std::string summary_csv(const McSummary& summary) {
  std::string out = "condition,ari_mean,ari_p5,ari_p95,f1_mean,f1_p5,f1_p95\n";
  for (const auto& c : summary.conditions) {
    out += c.label + ',' + format_number(c.ari_mean) + ',' + format_number(c.ari_p5) + ',' +
           format_number(c.ari_p95) + ',' + format_number(c.f1_mean) + ',' +
           format_number(c.f1_p5) + ',' + format_number(c.f1_p95) + '\n';
  }
  return out;
}

LabelTable read_label_table(std::istream& in) {
  LabelTable t;
  std::string line;
  std::size_t line_no = 0;
  std::size_t label_col = 1;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const auto f = fields(line);
    const auto where = "label file line " + std::to_string(line_no) + ": ";
    if (first) {
      first = false;
      const bool numeric = !f.empty() && std::all_of(f[0].begin(), f[0].end(),
                                                     [](char c) { return c >= '0' && c <= '9'; });
      if (!numeric) {
        const auto it = std::find(f.begin(), f.end(), "label");
        label_col = it != f.end() ? static_cast<std::size_t>(it - f.begin()) : 1;
        continue;
      }
    }
    if (f.size() <= label_col) fail(ErrorCode::Parse, where + "missing label column");
    try {
      t.ids.push_back(parse_u64(f[0]));
      const auto& lab = f[label_col];
      const bool neg = !lab.empty() && lab[0] == '-';
      const auto mag = static_cast<std::int64_t>(parse_u64(neg ? lab.substr(1) : lab));
      t.labels.push_back(neg ? -mag : mag);
    } catch (const Error& e) {
      fail(ErrorCode::Parse, where + e.what());
    }
  }
  if (t.ids.empty()) fail(ErrorCode::Parse, "label file has no rows");
  return t;
}

LabelTable read_label_table_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return read_label_table(in);
}

EvalReport evaluate_labels(const LabelTable& predicted, const LabelTable& truth) {
  std::unordered_map<std::uint64_t, std::int64_t> truth_of;
  for (std::size_t i = 0; i < truth.ids.size(); ++i) {
    if (!truth_of.emplace(truth.ids[i], truth.labels[i]).second) {
      fail(ErrorCode::InvalidArgument, "duplicate id " + std::to_string(truth.ids[i]) + " in truth labels");
    }
  }
  std::vector<std::int64_t> a, b;
  std::vector<std::uint32_t> pred_pos, truth_pos;
  for (std::size_t i = 0; i < predicted.ids.size(); ++i) {
    const auto it = truth_of.find(predicted.ids[i]);
    if (it == truth_of.end()) {
      fail(ErrorCode::InvalidArgument, "no truth label for id " + std::to_string(predicted.ids[i]));
    }
    const auto item = static_cast<std::uint32_t>(a.size());
    a.push_back(predicted.labels[i]);
    b.push_back(it->second);
    if (predicted.labels[i] == 1) pred_pos.push_back(item);
    if (it->second == 1) truth_pos.push_back(item);
  }
  EvalReport r;
  r.n_items = a.size();
  r.ari = adjusted_rand_index(a, b);
  const auto s = precision_recall_f1(pred_pos, truth_pos, a.size());
  r.precision = s.precision;
  r.recall = s.recall;
  r.f1 = s.f1;
  return r;
}

std::string eval_json(const EvalReport& report) {
  const nlohmann::json j = {{"ari", report.ari},
                            {"precision", report.precision},
                            {"recall", report.recall},
                            {"f1", report.f1},
                            {"n_items", report.n_items}};
  return j.dump(2) + "\n";
}

RelabelOutput relabel(std::istream& edges, std::istream* seeds) {
  std::unordered_map<std::string, std::uint64_t> id_of;
  std::vector<std::string> names;
  auto intern = [&](const std::string& name) {
    const auto [it, inserted] = id_of.emplace(name, names.size());
    if (inserted) names.push_back(name);
    return it->second;
  };

  RelabelOutput out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(edges, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const auto f = fields(line);
    if (f.size() != 2) {
      fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected 2 vertex names");
    }
    const auto u = intern(f[0]);
    const auto v = intern(f[1]);
    out.edges += std::to_string(u) + ' ' + std::to_string(v) + '\n';
  }
  if (names.empty()) fail(ErrorCode::Parse, "edge list contains no edges");
  out.mapping = "name\tid\n";
  for (std::size_t i = 0; i < names.size(); ++i) out.mapping += names[i] + '\t' + std::to_string(i) + '\n';

  if (seeds) {
    line_no = 0;
    while (std::getline(*seeds, line)) {
      ++line_no;
      if (is_comment_or_blank(line)) continue;
      const auto f = fields(line);
      const auto it = f.size() == 1 ? id_of.find(f[0]) : id_of.end();
      if (it == id_of.end()) {
        fail(ErrorCode::Parse, "seed line " + std::to_string(line_no) + ": unknown vertex name");
      }
      out.seeds += std::to_string(it->second) + '\n';
    }
  }
  return out;
}

}  // namespace hitmix
