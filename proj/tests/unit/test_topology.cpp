#include <algorithm>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "jamsim/topology.hpp"
#include "jamsim/rng.hpp"
#include "../support/oracles.hpp"

using namespace jamsim;

namespace {

Graph make(std::size_t n, std::vector<std::pair<int, int>> edges) { return build_graph(n, edges); }

std::vector<oracle::Pair> pairs_of(const Graph& g) {
  std::vector<oracle::Pair> out;
  for (const Edge& e : g.edges()) out.push_back({e.i, e.j});
  return out;
}

}  // namespace

TEST_CASE("build_graph: smallest connected graph") {
  const Graph g = make(2, {{0, 1}});
  CHECK(g.degree(0) == 1);
  CHECK(g.degree(1) == 1);
  CHECK(degree_stats(g).d_sum == 2);
}

TEST_CASE("build_graph: duplicate and reversed pairs collapse") {
  const Graph g = make(3, {{0, 1}, {0, 1}, {1, 2}, {2, 1}});
  CHECK(g.edge_count() == 2);
  CHECK(g.degree(1) == 2);
  CHECK(g.has_edge(Edge(2, 1)));
}

TEST_CASE("build_graph: rejects self-loops and out-of-range endpoints") {
  CHECK_THROWS_AS(make(3, {{1, 1}}), TopologyError);
  CHECK_THROWS_AS(make(3, {{0, 3}}), TopologyError);
  CHECK_THROWS_AS(make(3, {{-1, 2}}), TopologyError);
}

TEST_CASE("build_graph: adjacency is symmetric and degrees match neighbor lists") {
  const Graph g = make(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {0, 2}});
  for (NodeId i = 0; i < 5; ++i) {
    CHECK(static_cast<std::size_t>(g.degree(i)) == g.neighbors(i).size());
    for (NodeId j : g.neighbors(i)) {
      const auto back = g.neighbors(j);
      CHECK(std::find(back.begin(), back.end(), i) != back.end());
    }
  }
}

TEST_CASE("edge identity is the unordered pair") {
  CHECK(Edge(3, 1) == Edge(1, 3));
  CHECK(Edge(3, 1).i == 1);
  const Graph g = make(4, {{3, 2}, {1, 0}, {2, 1}});
  CHECK(std::is_sorted(g.edges().begin(), g.edges().end()));
  CHECK(*g.edge_index(Edge(0, 1)) == 0);
  CHECK_FALSE(g.edge_index(Edge(0, 3)).has_value());
}

TEST_CASE("is_connected") {
  CHECK(is_connected(make(2, {{0, 1}})));
  CHECK_FALSE(is_connected(make(4, {{0, 1}, {2, 3}})));
  CHECK(is_connected(make(1, {})));
  CHECK_FALSE(is_connected(make(2, {})));
}

TEST_CASE("is_connected agrees with an independent search on random graphs") {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(9));
    std::vector<std::pair<int, int>> es;
    const int m = static_cast<int>(rng.below(2 * n));
    for (int k = 0; k < m; ++k) {
      const int a = static_cast<int>(rng.below(n));
      const int b = static_cast<int>(rng.below(n));
      if (a != b) es.push_back({a, b});
    }
    const Graph g = make(n, es);
    CHECK(is_connected(g) == oracle::connected(n, pairs_of(g)));
  }
}

TEST_CASE("degree_stats") {
  const auto star = degree_stats(make(4, {{0, 1}, {0, 2}, {0, 3}}));
  CHECK(star.d_max == 3);
  CHECK(star.d_min == 1);
  CHECK(star.d_sum == 6);
  const auto empty = degree_stats(make(3, {}));
  CHECK(empty.d_max == 0);
  CHECK(empty.d_min == 0);
  CHECK(empty.d_sum == 0);
  const auto none = degree_stats(Graph{});
  CHECK(none.d_sum == 0);
}

TEST_CASE("degree sum is twice the edge count") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<int, int>> es;
    for (int k = 0; k < 20; ++k) {
      const int a = static_cast<int>(rng.below(8));
      const int b = static_cast<int>(rng.below(8));
      if (a != b) es.push_back({a, b});
    }
    const Graph g = make(8, es);
    CHECK(static_cast<std::size_t>(degree_stats(g).d_sum) == 2 * g.edge_count());
  }
}

TEST_CASE("random_regular_connected: the only 2-regular graphs on 4 nodes are 4-cycles") {
  const auto all = oracle::regular_graphs(4, 2);
  REQUIRE(all.size() == 3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph g = random_regular_connected(4, 2, seed);
    const auto es = pairs_of(g);
    CHECK(std::find(all.begin(), all.end(), es) != all.end());
  }
}

TEST_CASE("random_regular_connected: 40 nodes of degree 4") {
  const Graph g = random_regular_connected(40, 4, 7);
  CHECK(g.edge_count() == 80);
  CHECK(oracle::connected(40, pairs_of(g)));
  const auto s = degree_stats(g);
  CHECK(s.d_max == 4);
  CHECK(s.d_min == 4);
  CHECK(s.d_sum == 160);
}

TEST_CASE("random_regular_connected: connected and uniform over 100 seeds") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Graph g = random_regular_connected(12, 3, seed);
    CHECK(is_connected(g));
    const auto s = degree_stats(g);
    CHECK(s.d_max == 3);
    CHECK(s.d_min == 3);
  }
}

TEST_CASE("random_regular_connected: deterministic per seed") {
  CHECK(random_regular_connected(20, 4, 3) == random_regular_connected(20, 4, 3));
  CHECK_FALSE(random_regular_connected(20, 4, 3) == random_regular_connected(20, 4, 4));
}

TEST_CASE("random_regular_connected: infeasible requests") {
  CHECK_THROWS_AS(random_regular_connected(3, 1, 0), TopologyError);
  CHECK_THROWS_AS(random_regular_connected(4, 4, 0), TopologyError);
}

TEST_CASE("remove_links") {
  const Graph tri = make(3, {{0, 1}, {1, 2}, {0, 2}});
  const std::vector<Edge> one{Edge(0, 2)};
  CHECK(is_connected(remove_links(tri, one)));
  const Graph path = make(3, {{0, 1}, {1, 2}});
  const std::vector<Edge> bridge{Edge(1, 2)};
  CHECK_FALSE(is_connected(remove_links(path, bridge)));
  CHECK(remove_links(path, std::vector<Edge>{}) == path);
  CHECK_THROWS_AS(remove_links(path, std::vector<Edge>{Edge(0, 2)}), TopologyError);
}

TEST_CASE("remove_links: removing non-cut edges of a regular graph keeps it connected") {
  const Graph g = random_regular_connected(16, 4, 9);
  std::vector<Edge> removed;
  Graph cur = g;
  for (const Edge& e : g.edges()) {
    if (!is_cut_edge(cur, e)) {
      removed.push_back(e);
      cur = remove_links(cur, std::vector<Edge>{e});
    }
  }
  const Graph direct = remove_links(g, removed);
  CHECK(direct == cur);
  CHECK(oracle::connected(16, pairs_of(direct)));
  // What is left is a spanning tree.
  CHECK(direct.edge_count() == 15);
}

TEST_CASE("is_cut_edge") {
  const Graph path = make(3, {{0, 1}, {1, 2}});
  CHECK(is_cut_edge(path, Edge(0, 1)));
  const Graph tri = make(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK_FALSE(is_cut_edge(tri, Edge(0, 1)));
}

TEST_CASE("relabel maps edges through the permutation") {
  const Graph g = make(3, {{0, 1}, {1, 2}});
  const std::vector<NodeId> perm{2, 0, 1};
  const Graph h = relabel(g, perm);
  CHECK(h.has_edge(Edge(2, 0)));
  CHECK(h.has_edge(Edge(0, 1)));
  CHECK(h.edge_count() == 2);
  CHECK_THROWS(relabel(g, std::vector<NodeId>{0, 0, 1}));
}

TEST_CASE("graph json round trip") {
  const Graph g = random_regular_connected(10, 3, 2);
  CHECK(graph_from_json(to_json(g)) == g);
  CHECK_THROWS(graph_from_json(nlohmann::json::parse(R"({"n": 2, "edges": [[0, 2]]})")));
}
