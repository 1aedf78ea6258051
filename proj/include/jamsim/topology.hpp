#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "json.hpp"

namespace jamsim {

using NodeId = int;

// Unordered node pair, stored with i < j.
struct Edge {
  NodeId i = 0;
  NodeId j = 0;

  Edge() = default;
  Edge(NodeId a, NodeId b) : i(a < b ? a : b), j(a < b ? b : a) {}

  auto operator<=>(const Edge&) const = default;
};

class TopologyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DegreeStats {
  int d_max = 0;
  int d_min = 0;
  int d_sum = 0;
};

// Undirected simple graph over nodes 0..n-1. Immutable once built; edges are
// kept sorted so an edge's index is a stable key for per-link state.
class Graph {
 public:
  Graph() = default;

  std::size_t node_count() const { return neighbors_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const NodeId> neighbors(NodeId i) const { return neighbors_.at(i); }
  int degree(NodeId i) const { return static_cast<int>(neighbors_.at(i).size()); }

  std::optional<std::size_t> edge_index(Edge e) const;
  bool has_edge(Edge e) const { return edge_index(e).has_value(); }

  bool operator==(const Graph&) const = default;

 private:
  friend Graph build_graph(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edge_list);

  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> neighbors_;
};

// Rejects self-loops and out-of-range endpoints; duplicate pairs collapse.
Graph build_graph(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edge_list);
Graph build_graph(std::size_t n, std::span<const Edge> edge_list);

bool is_connected(const Graph& g);

DegreeStats degree_stats(const Graph& g);

// Pairing-model sampler: stubs are shuffled and matched, samples with loops or
// multi-edges are rejected, and disconnected samples are redrawn.
Graph random_regular_connected(std::size_t n, int deg, std::uint64_t seed, int max_attempts = 10000);

Graph remove_links(const Graph& g, std::span<const Edge> removed);

// True iff removing e disconnects a connected graph.
bool is_cut_edge(const Graph& g, Edge e);

// Applies a node relabeling: node i becomes perm[i].
Graph relabel(const Graph& g, std::span<const NodeId> perm);

nlohmann::json to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);

}  // namespace jamsim
