#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace hitmix {

using VertexId = std::uint32_t;

struct Edge {
  VertexId u;
  VertexId v;
};

struct Neighbor {
  VertexId vertex;
  std::uint32_t multiplicity;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Immutable undirected multigraph in compressed adjacency form. Each vertex
// keeps its neighbors sorted by id; a self-loop appears once in its own list
// and contributes 2 * multiplicity to the degree.
class Graph {
 public:
  Graph() = default;

  // Edges may repeat and may appear in either orientation; every occurrence
  // of the unordered pair adds one to its multiplicity.
  static Graph from_edges(std::size_t n_vertices, std::span<const Edge> edges);

  std::size_t num_vertices() const noexcept { return degrees_.size(); }
  // Total multiplicity over unordered pairs, self-loops counted once.
  std::uint64_t num_edges() const noexcept { return num_edges_; }

  std::span<const Neighbor> neighbors(VertexId v) const noexcept {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  std::uint64_t degree(VertexId v) const noexcept { return degrees_[v]; }
  std::span<const std::uint64_t> degrees() const noexcept { return degrees_; }

  // Entry A(v, nb.vertex) of the adjacency matrix. Self-loops count twice so
  // that rows of D^{-1} A sum to one.
  static double adjacency_weight(VertexId v, const Neighbor& nb) noexcept {
    return nb.vertex == v ? 2.0 * nb.multiplicity : static_cast<double>(nb.multiplicity);
  }

  std::uint32_t multiplicity(VertexId u, VertexId v) const noexcept;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
  std::vector<std::uint64_t> degrees_;
  std::uint64_t num_edges_ = 0;
};

// SNAP-style edge list: '#' comments, one "u v" pair of non-negative integer
// ids per line. Vertex count is 1 + the largest id seen.
Graph load_edge_list(std::istream& in);
Graph load_edge_list_file(const std::filesystem::path& path);

// One vertex id per line, '#' comments and blank lines skipped.
std::vector<VertexId> read_seed_list(std::istream& in);
std::vector<VertexId> read_seed_list_file(const std::filesystem::path& path);

// The seed set Omega together with its ascending complement.
class SeedSet {
 public:
  SeedSet(std::size_t n_vertices, std::span<const VertexId> members);

  std::size_t num_vertices() const noexcept { return is_member_.size(); }
  bool contains(VertexId v) const noexcept { return v < is_member_.size() && is_member_[v] != 0; }
  std::span<const VertexId> members() const noexcept { return members_; }
  std::span<const VertexId> complement() const noexcept { return complement_; }

 private:
  std::vector<std::uint8_t> is_member_;
  std::vector<VertexId> members_;
  std::vector<VertexId> complement_;
};

// Index map between global vertex ids and a local coordinate system over a
// subset of vertices (the restriction/prolongation pair, without matrices).
class NonSeedIndex {
 public:
  static constexpr std::int64_t npos = -1;

  // vertices must be strictly ascending and < n_vertices.
  NonSeedIndex(std::size_t n_vertices, std::vector<VertexId> vertices);

  std::size_t size() const noexcept { return local_to_global_.size(); }
  std::int64_t local(VertexId v) const noexcept { return global_to_local_[v]; }
  VertexId global(std::size_t i) const noexcept { return local_to_global_[i]; }
  std::span<const VertexId> vertices() const noexcept { return local_to_global_; }

 private:
  std::vector<std::int64_t> global_to_local_;
  std::vector<VertexId> local_to_global_;
};

NonSeedIndex build_nonseed_index(const Graph& graph, const SeedSet& seeds);

struct ReachabilityReport {
  // Aligned with SeedSet::complement().
  std::vector<std::uint8_t> reachable;
  std::size_t unreachable_count = 0;
};

ReachabilityReport reachable_from(const Graph& graph, const SeedSet& seeds);

}  // namespace hitmix
