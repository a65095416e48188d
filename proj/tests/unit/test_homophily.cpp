#include <random>

#include "doctest.h"
#include "hetfair/generator.hpp"
#include "hetfair/homophily.hpp"
#include "oracles.hpp"

using namespace hetfair;

namespace {

Graph make(std::size_t n, std::vector<Edge> edges) { return Graph::from_edges(n, edges); }

// a=0, u=1, b=2, c=3
Graph path4() { return make(4, {{0, 1}, {1, 2}, {2, 3}}); }

}  // namespace

TEST_CASE("global homophily of a triangle with one odd label") {
  const auto g = make(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(global_homophily(g, LabelVector({0, 0, 1})) == doctest::Approx(1.0 / 3.0));
  CHECK(global_homophily(g, LabelVector({1, 1, 1})) == 1.0);
}

TEST_CASE("global homophily errors") {
  CHECK_THROWS_AS(global_homophily(make(3, {}), LabelVector({0, 1, 0})), std::domain_error);
  CHECK_THROWS_AS(global_homophily(make(2, {{0, 1}}), LabelVector({0})), std::invalid_argument);
}

TEST_CASE("k-hop induced edges") {
  const auto star = make(4, {{0, 1}, {0, 2}, {0, 3}});
  CHECK(khop_subgraph_edges(star, 0, 1) == std::vector<Edge>{{0, 1}, {0, 2}, {0, 3}});

  const auto p = path4();
  CHECK(khop_subgraph_edges(p, 1, 1) == std::vector<Edge>{{0, 1}, {1, 2}});
  CHECK(khop_subgraph_edges(p, 1, 2) == std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}});

  const auto iso = make(3, {{0, 1}});
  CHECK(khop_subgraph_edges(iso, 2, 1).empty());
  CHECK(khop_subgraph_edges(iso, 2, 2).empty());
  CHECK_THROWS_AS(khop_subgraph_edges(p, 0, 3), std::invalid_argument);
}

TEST_CASE("local homophily values") {
  const auto star = make(4, {{0, 1}, {0, 2}, {0, 3}});
  CHECK(local_homophily(star, LabelVector({1, 0, 0, 0}), 0, 1) == 0.0);

  // labels a=1, u=1, b=0, c=0: (a,u) and (b,c) match, (u,b) does not
  const auto p = path4();
  const auto h = local_homophily(p, LabelVector({1, 1, 0, 0}), 1, 2);
  REQUIRE(h.has_value());
  CHECK(*h == doctest::Approx(2.0 / 3.0));

  const auto iso = make(3, {{0, 1}});
  CHECK_FALSE(local_homophily(iso, LabelVector({0, 0, 0}), 2, 1).has_value());
}

TEST_CASE("profile on a single edge with opposite classes") {
  const auto g = make(2, {{0, 1}});
  const auto prof = homophily_profile(g, LabelVector({0, 1}), LabelVector({1, 1}));
  for (NodeId u = 0; u < 2; ++u) {
    for (int k = 1; k <= 2; ++k) {
      CHECK(prof.class_hom(u, k) == 0.0);
      CHECK(prof.sens_hom(u, k) == 1.0);
    }
  }
}

TEST_CASE("profile matches the brute-force oracle on random graphs") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const auto rg = oracle::random_graph(rng, 30, 0.3);
    const auto cls = oracle::random_labels(rng, rg.n);
    const auto sens = oracle::random_labels(rng, rg.n);
    const auto g = Graph::from_edges(rg.n, rg.raw_edges);
    const auto dist = oracle::distances(rg.adj);
    const unsigned workers = 1 + trial % 3;
    const auto prof = homophily_profile(g, LabelVector(cls), LabelVector(sens), workers);
    for (NodeId u = 0; u < rg.n; ++u) {
      for (int k = 1; k <= 2; ++k) {
        CHECK(prof.class_hom(u, k) == oracle::local_homophily(rg.adj, dist, cls, u, k));
        CHECK(prof.sens_hom(u, k) == oracle::local_homophily(rg.adj, dist, sens, u, k));
        CHECK(local_homophily(g, LabelVector(cls), u, k) ==
              oracle::local_homophily(rg.adj, dist, cls, u, k));
      }
    }
  }
}

TEST_CASE("bin index boundaries") {
  CHECK(bin_count(0.2) == 5);
  CHECK(bin_index(0.0, 0.2, 5) == 0);
  CHECK(bin_index(0.2, 0.2, 5) == 1);
  CHECK(bin_index(3.0 / 5.0, 0.2, 5) == 3);
  CHECK(bin_index(0.7999, 0.2, 5) == 3);
  CHECK(bin_index(1.0, 0.2, 5) == 4);
  CHECK_THROWS_AS(bin_count(0.0), std::invalid_argument);
}

TEST_CASE("histogram of a fully homophilous profile") {
  const auto g = make(3, {{0, 1}, {1, 2}, {0, 2}});
  const auto prof = homophily_profile(g, LabelVector({1, 1, 1}), LabelVector({0, 0, 0}));
  const auto hist = homophily_histogram(prof, Channel::kClass, 1, 0.2);
  REQUIRE(hist.counts.size() == 5);
  CHECK(hist.counts[4] == 3);
  CHECK(hist.bin_lo[4] == doctest::Approx(0.8));
  CHECK(hist.bin_hi[4] == 1.0);
  CHECK(hist.bin_lo[3] == 0.6);
}

TEST_CASE("histogram counts undefined nodes separately") {
  std::vector<Edge> edges;
  for (NodeId u = 1; u < 9; ++u) edges.emplace_back(0, u);
  const auto g = Graph::from_edges(10, edges);  // node 9 isolated
  const auto prof = homophily_profile(g, LabelVector(std::vector<std::uint8_t>(10, 0)),
                                      LabelVector(std::vector<std::uint8_t>(10, 1)));
  const auto hist = homophily_histogram(prof, Channel::kSensitive, 2, 0.2);
  std::size_t total = 0;
  for (auto c : hist.counts) total += c;
  CHECK(total == 9);
  CHECK(hist.undefined_count == 1);
}

TEST_CASE("generated graphs concentrate local homophily where requested") {
  for (double h : {0.9, 0.5}) {
    std::vector<std::size_t> counts(5, 0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      GeneratorConfig cfg;
      cfg.h_c = h;
      cfg.h_s = 0.5;
      cfg.seed = seed;
      const auto out = generate(cfg);
      const auto prof = homophily_profile(out.graph, out.attrs.cls, out.attrs.sensitive);
      const auto hist = homophily_histogram(prof, Channel::kClass, 1, 0.2);
      for (std::size_t b = 0; b < 5; ++b) counts[b] += hist.counts[b];
    }
    const auto mode = std::max_element(counts.begin(), counts.end()) - counts.begin();
    if (h == 0.9) {
      CHECK(counts[4] * 2 > 10000);
    } else {
      CHECK(mode == 2);
    }
  }
}
