#include "jamsim/topology.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <string>

#include "jamsim/rng.hpp"

namespace jamsim {

std::optional<std::size_t> Graph::edge_index(Edge e) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (it == edges_.end() || *it != e) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

Graph build_graph(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edge_list) {
  Graph g;
  g.neighbors_.resize(n);
  g.edges_.reserve(edge_list.size());
  for (auto [a, b] : edge_list) {
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n) {
      throw TopologyError("edge {" + std::to_string(a) + "," + std::to_string(b) +
                          "} references a node outside 0.." + std::to_string(n) + "-1");
    }
    if (a == b) throw TopologyError("self-loop at node " + std::to_string(a));
    g.edges_.emplace_back(a, b);
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());
  for (const Edge& e : g.edges_) {
    g.neighbors_[e.i].push_back(e.j);
    g.neighbors_[e.j].push_back(e.i);
  }
  for (auto& nb : g.neighbors_) std::sort(nb.begin(), nb.end());
  return g;
}

Graph build_graph(std::size_t n, std::span<const Edge> edge_list) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(edge_list.size());
  for (const Edge& e : edge_list) pairs.emplace_back(e.i, e.j);
  return build_graph(n, pairs);
}

bool is_connected(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::queue<NodeId> frontier;
  frontier.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    NodeId v = frontier.front();
    frontier.pop();
    for (NodeId w : g.neighbors(v)) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        frontier.push(w);
      }
    }
  }
  return reached == n;
}

DegreeStats degree_stats(const Graph& g) {
  DegreeStats s;
  if (g.node_count() == 0) return s;
  s.d_max = s.d_min = g.degree(0);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const int d = g.degree(static_cast<NodeId>(i));
    s.d_max = std::max(s.d_max, d);
    s.d_min = std::min(s.d_min, d);
    s.d_sum += d;
  }
  return s;
}

Graph random_regular_connected(std::size_t n, int deg, std::uint64_t seed, int max_attempts) {
  if (deg < 0 || static_cast<std::size_t>(deg) >= n) {
    throw TopologyError("random regular graph needs 0 <= deg < n (deg=" + std::to_string(deg) +
                        ", n=" + std::to_string(n) + ")");
  }
  if ((n * static_cast<std::size_t>(deg)) % 2 != 0) {
    throw TopologyError("random regular graph needs n*deg even (n=" + std::to_string(n) +
                        ", deg=" + std::to_string(deg) + ")");
  }
  Rng rng(seed);
  std::vector<NodeId> stubs;
  stubs.reserve(n * deg);
  for (std::size_t v = 0; v < n; ++v) {
    for (int k = 0; k < deg; ++k) stubs.push_back(static_cast<NodeId>(v));
  }
  std::vector<Edge> edges;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    for (std::size_t k = stubs.size(); k > 1; --k) {
      std::swap(stubs[k - 1], stubs[rng.below(k)]);
    }
    edges.clear();
    bool simple = true;
    for (std::size_t k = 0; k + 1 < stubs.size(); k += 2) {
      if (stubs[k] == stubs[k + 1]) {
        simple = false;
        break;
      }
      edges.emplace_back(stubs[k], stubs[k + 1]);
    }
    if (!simple) continue;
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) continue;
    Graph g = build_graph(n, edges);
    if (is_connected(g)) return g;
  }
  throw TopologyError("no connected " + std::to_string(deg) + "-regular graph on " + std::to_string(n) +
                      " nodes after " + std::to_string(max_attempts) + " attempts");
}

Graph remove_links(const Graph& g, std::span<const Edge> removed) {
  std::vector<Edge> drop(removed.begin(), removed.end());
  std::sort(drop.begin(), drop.end());
  for (const Edge& e : drop) {
    if (!g.has_edge(e)) {
      throw TopologyError("cannot remove {" + std::to_string(e.i) + "," + std::to_string(e.j) +
                          "}: not an edge");
    }
  }
  std::vector<Edge> kept;
  std::set_difference(g.edges().begin(), g.edges().end(), drop.begin(), drop.end(), std::back_inserter(kept));
  return build_graph(g.node_count(), kept);
}

bool is_cut_edge(const Graph& g, Edge e) {
  const Edge one[] = {e};
  return !is_connected(remove_links(g, one));
}

Graph relabel(const Graph& g, std::span<const NodeId> perm) {
  if (perm.size() != g.node_count()) throw TopologyError("relabel: permutation size mismatch");
  std::vector<Edge> mapped;
  mapped.reserve(g.edge_count());
  for (const Edge& e : g.edges()) mapped.emplace_back(perm[e.i], perm[e.j]);
  return build_graph(g.node_count(), mapped);
}

nlohmann::json to_json(const Graph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.i, e.j});
  return {{"n", g.node_count()}, {"edges", edges}};
}

Graph graph_from_json(const nlohmann::json& j) {
  if (!j.contains("n")) throw TopologyError("graph: missing field 'n'");
  if (!j.contains("edges")) throw TopologyError("graph: missing field 'edges'");
  const auto n = j.at("n").get<std::int64_t>();
  if (n < 1) throw TopologyError("graph: 'n' must be positive");
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw TopologyError("graph: each edge must be a [i, j] pair");
    pairs.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
  }
  return build_graph(static_cast<std::size_t>(n), pairs);
}

}  // namespace jamsim
