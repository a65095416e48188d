#include <random>

#include "doctest.h"
#include "hetfair/graph.hpp"
#include "oracles.hpp"

using namespace hetfair;

TEST_CASE("from_edges symmetrizes, drops self-loops and duplicates") {
  const std::vector<Edge> edges = {{0, 1}, {1, 0}, {0, 1}, {2, 2}, {2, 1}};
  const auto g = Graph::from_edges(4, edges);
  CHECK(g.n_nodes() == 4);
  CHECK(g.n_edges() == 2);
  CHECK(g.has_edge(1, 0));
  CHECK(g.has_edge(1, 2));
  CHECK_FALSE(g.has_edge(2, 2));
  CHECK(g.degree(3) == 0);
  CHECK(g.edge_list() == std::vector<Edge>{{0, 1}, {1, 2}});
}

TEST_CASE("from_edges rejects endpoints outside the node range") {
  const std::vector<Edge> edges = {{0, 5}};
  CHECK_THROWS_AS(Graph::from_edges(3, edges), std::out_of_range);
}

TEST_CASE("adjacency invariants on random graphs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto rg = oracle::random_graph(rng, 40, 0.4);
    const auto g = Graph::from_edges(rg.n, rg.raw_edges);
    std::size_t degree_sum = 0;
    for (NodeId u = 0; u < g.n_nodes(); ++u) {
      const auto nb = g.neighbors(u);
      CHECK(nb.size() == g.degree(u));
      degree_sum += nb.size();
      for (std::size_t i = 0; i < nb.size(); ++i) {
        CHECK(nb[i] != u);
        if (i) CHECK(nb[i - 1] < nb[i]);
        CHECK(g.has_edge(nb[i], u));
      }
      for (NodeId v = 0; v < g.n_nodes(); ++v) CHECK(g.has_edge(u, v) == (rg.adj[u][v] == 1));
    }
    CHECK(degree_sum == 2 * g.n_edges());
  }
}

TEST_CASE("label vectors hold binary values only") {
  CHECK_THROWS_AS(LabelVector({0, 2}), std::invalid_argument);
  const LabelVector v({0, 1, 1});
  CHECK(v.flipped()[0] == 1);
  CHECK(v.flipped()[2] == 0);
}
