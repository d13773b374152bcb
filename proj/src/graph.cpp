#include "hitmix/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <string>
#include <string_view>

#include "hitmix/error.hpp"

namespace hitmix {

namespace {

constexpr std::string_view kSpace = " \t\r\f\v";

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(kSpace);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(kSpace);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    i = s.find_first_not_of(kSpace, i);
    if (i == std::string_view::npos) break;
    auto j = s.find_first_of(kSpace, i);
    if (j == std::string_view::npos) j = s.size();
    out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

VertexId parse_id(std::string_view tok, std::size_t line_no) {
  std::uint64_t value = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc{} || ptr != end || value > 0xFFFFFFFEull) {
    fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": invalid vertex id '" +
                               std::string(tok) + "'");
  }
  return static_cast<VertexId>(value);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

}  // namespace

Graph Graph::from_edges(std::size_t n_vertices, std::span<const Edge> edges) {
  std::vector<Edge> canon(edges.begin(), edges.end());
  for (auto& e : canon) {
    require(e.u < n_vertices && e.v < n_vertices, "edge endpoint out of range");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(canon.begin(), canon.end(),
            [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });

  // Collapse duplicates into (u, v, multiplicity) and count list lengths.
  struct Weighted {
    VertexId u, v;
    std::uint32_t mult;
  };
  std::vector<Weighted> unique;
  unique.reserve(canon.size());
  for (const auto& e : canon) {
    if (!unique.empty() && unique.back().u == e.u && unique.back().v == e.v) {
      ++unique.back().mult;
    } else {
      unique.push_back({e.u, e.v, 1});
    }
  }

  Graph g;
  g.degrees_.assign(n_vertices, 0);
  std::vector<std::size_t> counts(n_vertices, 0);
  for (const auto& w : unique) {
    ++counts[w.u];
    if (w.u != w.v) ++counts[w.v];
    g.degrees_[w.u] += w.mult;
    g.degrees_[w.v] += w.mult;  // self-loop: second half-edge
    g.num_edges_ += w.mult;
  }
  g.offsets_.assign(n_vertices + 1, 0);
  std::partial_sum(counts.begin(), counts.end(), g.offsets_.begin() + 1);
  g.adjacency_.resize(g.offsets_.back());

  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& w : unique) {
    g.adjacency_[cursor[w.u]++] = {w.v, w.mult};
    if (w.u != w.v) g.adjacency_[cursor[w.v]++] = {w.u, w.mult};
  }
  for (std::size_t v = 0; v < n_vertices; ++v) {
    std::sort(g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]),
              g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]),
              [](const Neighbor& a, const Neighbor& b) { return a.vertex < b.vertex; });
  }
  return g;
}

std::uint32_t Graph::multiplicity(VertexId u, VertexId v) const noexcept {
  if (u >= num_vertices() || v >= num_vertices()) return 0;
  const auto nbrs = neighbors(u);
  const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v,
                                   [](const Neighbor& n, VertexId x) { return n.vertex < x; });
  return (it != nbrs.end() && it->vertex == v) ? it->multiplicity : 0;
}

Graph load_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  VertexId max_id = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tokens = split_ws(body);
    if (tokens.size() != 2) {
      fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected 2 vertex ids, got " +
                                 std::to_string(tokens.size()));
    }
    const Edge e{parse_id(tokens[0], line_no), parse_id(tokens[1], line_no)};
    max_id = std::max({max_id, e.u, e.v});
    edges.push_back(e);
  }
  if (edges.empty()) fail(ErrorCode::Parse, "edge list contains no edges");
  return Graph::from_edges(static_cast<std::size_t>(max_id) + 1, edges);
}

Graph load_edge_list_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_edge_list(in);
}

std::vector<VertexId> read_seed_list(std::istream& in) {
  std::vector<VertexId> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tokens = split_ws(body);
    if (tokens.size() != 1) {
      fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected one vertex id");
    }
    ids.push_back(parse_id(tokens[0], line_no));
  }
  return ids;
}

std::vector<VertexId> read_seed_list_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_seed_list(in);
}

SeedSet::SeedSet(std::size_t n_vertices, std::span<const VertexId> members)
    : is_member_(n_vertices, 0) {
  require(!members.empty(), "seed set is empty");
  for (const auto v : members) {
    require(v < n_vertices, "seed id " + std::to_string(v) + " >= number of vertices " +
                                std::to_string(n_vertices));
    is_member_[v] = 1;
  }
  for (VertexId v = 0; v < n_vertices; ++v) {
    (is_member_[v] ? members_ : complement_).push_back(v);
  }
  require(!complement_.empty(), "seed set covers every vertex");
}

NonSeedIndex::NonSeedIndex(std::size_t n_vertices, std::vector<VertexId> vertices)
    : global_to_local_(n_vertices, npos), local_to_global_(std::move(vertices)) {
  for (std::size_t i = 0; i < local_to_global_.size(); ++i) {
    const auto v = local_to_global_[i];
    require(v < n_vertices, "index vertex out of range");
    require(i == 0 || local_to_global_[i - 1] < v, "index vertices must be strictly ascending");
    global_to_local_[v] = static_cast<std::int64_t>(i);
  }
}

NonSeedIndex build_nonseed_index(const Graph& graph, const SeedSet& seeds) {
  require(seeds.num_vertices() == graph.num_vertices(), "seed set built for a different graph");
  const auto comp = seeds.complement();
  return NonSeedIndex(graph.num_vertices(), {comp.begin(), comp.end()});
}

ReachabilityReport reachable_from(const Graph& graph, const SeedSet& seeds) {
  require(seeds.num_vertices() == graph.num_vertices(), "seed set built for a different graph");
  std::vector<std::uint8_t> seen(graph.num_vertices(), 0);
  std::vector<VertexId> stack(seeds.members().begin(), seeds.members().end());
  for (const auto v : stack) seen[v] = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (const auto& nb : graph.neighbors(v)) {
      if (!seen[nb.vertex]) {
        seen[nb.vertex] = 1;
        stack.push_back(nb.vertex);
      }
    }
  }
  ReachabilityReport report;
  report.reachable.reserve(seeds.complement().size());
  for (const auto v : seeds.complement()) {
    report.reachable.push_back(seen[v]);
    if (!seen[v]) ++report.unreachable_count;
  }
  return report;
}

}  // namespace hitmix
