#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hitmix/mixture.hpp"
#include "hitmix/moments.hpp"
#include "hitmix/sbm.hpp"

namespace hitmix {

// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// vertex_id, mean, variance, reachable
std::string moments_tsv(const MomentTable& table);
// vertex_id, mean, variance, posterior_goal, label
std::string membership_tsv(const MembershipResult& result);
// Selected g, per-g BIC, component parameters and EM diagnostics.
std::string membership_json(const MembershipResult& result);

// condition, run, ari, f1
std::string runs_csv(const McSummary& summary, const SimulationSpec& spec);
// condition, ari_mean, ari_p5, ari_p95, f1_mean, f1_p5, f1_p95
std::string summary_csv(const McSummary& summary);

struct LabelTable {
  std::vector<std::uint64_t> ids;
  std::vector<std::int64_t> labels;
};

// Tab/space separated "id label" rows. A header row is recognised by a
// non-numeric first field; it selects the "label" column when present (so the
// expand TSV can be used directly), otherwise the second column.
LabelTable read_label_table(std::istream& in);
LabelTable read_label_table_file(const std::filesystem::path& path);

struct EvalReport {
  double ari = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t n_items = 0;
};

// Items are matched by id; every predicted id must have a truth label.
// Positives for precision/recall are items labelled 1.
EvalReport evaluate_labels(const LabelTable& predicted, const LabelTable& truth);
std::string eval_json(const EvalReport& report);

struct RelabelOutput {
  std::string edges;    // dense-id edge list
  std::string mapping;  // name \t id
  std::string seeds;    // dense-id seed list (empty when no seeds given)
};

// Maps arbitrary vertex names to dense ids in order of first appearance.
RelabelOutput relabel(std::istream& edges, std::istream* seeds);

}  // namespace hitmix
