#include <cmath>

#include "doctest.h"
#include "hetfair/propagation.hpp"
#include "oracles.hpp"

using namespace hetfair;

TEST_CASE("symmetric normalization of a single edge") {
  const std::vector<Edge> e = {{0, 1}};
  const auto ops = build_propagation_matrices(Graph::from_edges(2, e));
  for (NodeId r = 0; r < 2; ++r) {
    for (NodeId c = 0; c < 2; ++c) CHECK(ops.sym_norm.at(r, c) == doctest::Approx(0.5));
  }
}

TEST_CASE("row-normalized 1-hop mean on a star") {
  const std::vector<Edge> e = {{0, 1}, {0, 2}, {0, 3}};
  const auto ops = build_propagation_matrices(Graph::from_edges(4, e));
  for (NodeId c = 1; c < 4; ++c) CHECK(ops.row_norm_1hop.at(0, c) == doctest::Approx(1.0 / 3.0));
  CHECK(ops.row_norm_1hop.at(0, 0) == 0.0);
  CHECK(ops.row_norm_1hop.at(2, 0) == 1.0);
}

TEST_CASE("exact 2-hop operator on a path") {
  const std::vector<Edge> e = {{0, 1}, {1, 2}};
  const auto ops = build_propagation_matrices(Graph::from_edges(3, e));
  CHECK(ops.row_norm_2hop.at(0, 2) == 1.0);
  CHECK(ops.row_norm_2hop.row_sum(0) == 1.0);
  CHECK(ops.row_norm_2hop.row_sum(1) == 0.0);
}

TEST_CASE("operators match dense definitions on random graphs") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto rg = oracle::random_graph(rng, 25, 0.3);
    const auto ops = build_propagation_matrices(Graph::from_edges(rg.n, rg.raw_edges));
    const auto dist = oracle::distances(rg.adj);
    for (std::size_t u = 0; u < rg.n; ++u) {
      int deg = 0, two = 0;
      for (std::size_t v = 0; v < rg.n; ++v) {
        deg += rg.adj[u][v];
        two += dist[u][v] == 2;
      }
      for (std::size_t v = 0; v < rg.n; ++v) {
        int deg_v = 0;
        for (std::size_t w = 0; w < rg.n; ++w) deg_v += rg.adj[v][w];
        const double a = (rg.adj[u][v] || u == v) ? 1.0 : 0.0;
        const double sym = a / std::sqrt((deg + 1.0) * (deg_v + 1.0));
        const auto nu = static_cast<NodeId>(u), nv = static_cast<NodeId>(v);
        CHECK(ops.sym_norm.at(nu, nv) == doctest::Approx(sym).epsilon(1e-12));
        CHECK(ops.row_norm_1hop.at(nu, nv) ==
              doctest::Approx(rg.adj[u][v] ? 1.0 / deg : 0.0).epsilon(1e-12));
        CHECK(ops.row_norm_2hop.at(nu, nv) ==
              doctest::Approx(dist[u][v] == 2 ? 1.0 / two : 0.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("transposed multiply is the adjoint") {
  std::mt19937_64 rng(3);
  const auto rg = oracle::random_graph(rng, 20, 0.5);
  const auto ops = build_propagation_matrices(Graph::from_edges(rg.n, rg.raw_edges));
  std::normal_distribution<double> nd;
  Tensor x(rg.n, 3), y(rg.n, 3);
  for (auto& v : x.values()) v = nd(rng);
  for (auto& v : y.values()) v = nd(rng);
  for (const auto* m : {&ops.sym_norm, &ops.row_norm_1hop, &ops.row_norm_2hop}) {
    const auto mx = m->multiply(x);
    const auto mty = m->multiply_transposed(y);
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      lhs += y[i] * mx[i];
      rhs += mty[i] * x[i];
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}
