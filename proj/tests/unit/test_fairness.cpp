#include <random>

#include "doctest.h"
#include "hetfair/fairness.hpp"
#include "oracles.hpp"

using namespace hetfair;

namespace {

Predictions hard(std::vector<std::uint8_t> p) {
  std::vector<double> prob(p.begin(), p.end());
  return Predictions::from_probabilities(prob);
}

std::vector<NodeId> all(std::size_t n) {
  std::vector<NodeId> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<NodeId>(i);
  return v;
}

}  // namespace

TEST_CASE("statistical parity examples") {
  const LabelVector s({1, 1, 1, 0, 0});
  CHECK(*statistical_parity(hard({1, 0, 1, 1, 0}), s, all(5)) == doctest::Approx(1.0 / 6.0));
  CHECK(*statistical_parity(hard({1, 0, 1, 0}), LabelVector({1, 1, 0, 0}), all(4)) == 0.0);
  const std::vector<NodeId> ones = {0, 1, 2};
  CHECK_FALSE(statistical_parity(hard({1, 0, 1, 1, 0}), s, ones).has_value());
}

TEST_CASE("equal opportunity examples") {
  const LabelVector s({1, 1, 0, 0});
  const LabelVector c({1, 1, 1, 1});
  CHECK(*equal_opportunity(hard({1, 0, 1, 1}), c, s, all(4)) == doctest::Approx(0.5));
  CHECK(*equal_opportunity(hard({1, 1, 1, 1}), c, s, all(4)) == 0.0);
  CHECK_FALSE(equal_opportunity(hard({1, 0, 1, 1}), LabelVector({0, 0, 0, 0}), s, all(4)));
}

TEST_CASE("F1 examples") {
  CHECK(f1_binary(hard({1, 1, 0, 0}), LabelVector({1, 0, 1, 0}), all(4)) == doctest::Approx(0.5));
  CHECK(f1_binary(hard({1, 0, 1}), LabelVector({1, 0, 1}), all(3)) == 1.0);
  CHECK(f1_binary(hard({0, 0, 0}), LabelVector({1, 0, 1}), all(3)) == 0.0);
  CHECK(accuracy(hard({1, 1, 0, 0}), LabelVector({1, 0, 1, 0}), all(4)) == 0.5);
}

TEST_CASE("prediction threshold") {
  const auto p = Predictions::from_probabilities({0.5, 0.4999, 0.9});
  CHECK(p.predicted[0] == 1);
  CHECK(p.predicted[1] == 0);
  CHECK_THROWS(Predictions::from_probabilities({1.5}));
}

TEST_CASE("metrics match counting oracles on random triples") {
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<std::size_t> size(1, 100);
  std::uniform_real_distribution<double> unit;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = size(rng);
    // skewed rates so single-group and no-positive cases occur
    auto draw = [&](double rate) {
      std::vector<std::uint8_t> v(n);
      for (auto& x : v) x = unit(rng) < rate;
      return v;
    };
    const auto pred = draw(unit(rng));
    const auto truth = draw(unit(rng) < 0.1 ? 0.0 : unit(rng));
    const auto sens = draw(unit(rng) < 0.1 ? 1.0 : unit(rng));
    std::vector<NodeId> subset;
    for (std::size_t i = 0; i < n; ++i) {
      if (unit(rng) < 0.7) subset.push_back(static_cast<NodeId>(i));
    }
    if (subset.empty()) subset.push_back(0);
    const auto p = hard(pred);
    const auto c = oracle::count(pred, truth, sens, subset);
    CHECK(statistical_parity(p, LabelVector(sens), subset) == oracle::statistical_parity(c));
    CHECK(equal_opportunity(p, LabelVector(truth), LabelVector(sens), subset) ==
          oracle::equal_opportunity(c));
    CHECK(f1_binary(p, LabelVector(truth), subset) == oracle::f1(c));
    CHECK(accuracy(p, LabelVector(truth), subset) == oracle::accuracy(c, subset.size()));
  }
}

TEST_CASE("bin lattice") {
  CHECK(to_bin(0.95, 0.1) == HomophilyBin{4, 0});
  CHECK(to_bin(1.0, 1.0) == HomophilyBin{4, 4});
  CHECK(to_bin(0.6, 0.2) == HomophilyBin{3, 1});
  CHECK(bin_lower(3) == 0.6);
  CHECK(bin_upper(4) == 1.0);
}

namespace {

struct Fixture {
  AttributedGraph g;
  LocalHomophilyProfile profile;
  Predictions preds;
};

Fixture fixture(std::uint64_t seed, std::size_t n = 1000) {
  GeneratorConfig cfg;
  cfg.n_nodes = n;
  cfg.h_c = 0.3;
  cfg.h_s = 0.8;
  cfg.seed = seed;
  auto g = generate(cfg);
  auto profile = homophily_profile(g.graph, g.attrs.cls, g.attrs.sensitive);
  Rng rng(seed + 1);
  std::uniform_real_distribution<double> unit;
  std::vector<double> prob(n);
  for (auto& p : prob) p = unit(rng);
  return {std::move(g), std::move(profile), Predictions::from_probabilities(prob)};
}

}  // namespace

TEST_CASE("stratification partitions the evaluation nodes") {
  auto f = fixture(3);
  const auto nodes = all(1000);
  const auto st = stratify(f.profile, 1, nodes);
  std::size_t total = st.undefined.size();
  for (const auto& [bin, members] : st.bins) {
    total += members.size();
    for (auto u : members) {
      CHECK(to_bin(*f.profile.class_hom(u, 1), *f.profile.sens_hom(u, 1)) == bin);
    }
  }
  CHECK(total == 1000);
}

TEST_CASE("stratified report recomposes from direct metric calls") {
  auto f = fixture(4);
  const auto nodes = all(1000);
  const auto rep = stratified_report(f.preds, f.g.attrs, f.profile, 2, nodes);
  const auto st = stratify(f.profile, 2, nodes);
  REQUIRE(rep.bins.size() == st.bins.size());
  for (const auto& [bin, members] : st.bins) {
    const auto& r = rep.bins.at(bin);
    CHECK(r.n_nodes == members.size());
    CHECK(r.f1 == f1_binary(f.preds, f.g.attrs.cls, members));
    CHECK(r.delta_sp == statistical_parity(f.preds, f.g.attrs.sensitive, members));
    CHECK(r.delta_eo == equal_opportunity(f.preds, f.g.attrs.cls, f.g.attrs.sensitive, members));
  }
}

TEST_CASE("single-bin graph reports the global metrics") {
  // complete graph with identical labels: every node sits in bin (4, 4)
  std::vector<Edge> edges;
  for (NodeId a = 0; a < 6; ++a) {
    for (NodeId b = a + 1; b < 6; ++b) edges.emplace_back(a, b);
  }
  const auto g = Graph::from_edges(6, edges);
  NodeAttributes attrs{LabelVector({1, 1, 1, 1, 1, 1}), LabelVector({0, 0, 0, 0, 0, 0}),
                       Tensor(6, 1)};
  const auto prof = homophily_profile(g, attrs.cls, attrs.sensitive);
  const auto preds = hard({1, 0, 1, 1, 0, 1});
  const auto rep = stratified_report(preds, attrs, prof, 1, all(6));
  REQUIRE(rep.bins.size() == 1);
  const auto& r = rep.bins.at({4, 4});
  const auto global = fairness_report(preds, attrs.cls, attrs.sensitive, all(6));
  CHECK(r.f1 == global.f1);
  CHECK(r.accuracy == global.accuracy);
  CHECK_FALSE(r.delta_sp.has_value());  // one sensitive group only
  CHECK_FALSE(r.delta_eo.has_value());
}

namespace {

StratifiedReport report_with(HomophilyBin bin, std::optional<double> sp, double f1 = 0.5) {
  StratifiedReport r;
  FairnessReport f;
  f.n_nodes = 10;
  f.f1 = f1;
  f.delta_sp = sp;
  f.delta_eo = sp;
  r.bins[bin] = f;
  return r;
}

}  // namespace

TEST_CASE("design comparison arithmetic") {
  const HomophilyBin bin{1, 4};
  const std::vector<StratifiedReport> hom = {report_with(bin, 0.2), report_with(bin, 0.4)};
  const std::vector<StratifiedReport> het = {report_with(bin, 0.1), report_with(bin, std::nullopt)};
  const auto d = design_comparison(het, hom);
  const auto& sp = d.bins.at(bin)[static_cast<std::size_t>(Metric::kDeltaSp)];
  REQUIRE(sp.has_value());
  CHECK(sp->value == doctest::Approx(-0.2));
  CHECK(sp->het_count == 1);
  CHECK(sp->hom_count == 2);

  const auto same = design_comparison(hom, hom);
  for (const auto& [b, metrics] : same.bins) {
    for (const auto& m : metrics) {
      if (m) CHECK(m->value == 0.0);
    }
  }

  const auto grid = aggregate_reports(het);
  const auto& mean = grid.bins.at(bin)[static_cast<std::size_t>(Metric::kDeltaSp)];
  CHECK(mean->count == 1);
  CHECK(mean->excluded == 1);

  const std::vector<StratifiedReport> other = {report_with({0, 0}, 0.3)};
  CHECK_THROWS_AS(design_comparison(other, hom), std::runtime_error);
}

TEST_CASE("high sensitive-homophily slice") {
  auto f = fixture(6);
  const auto nodes = all(1000);
  const auto slice = high_hs_slice(f.profile, f.preds, f.g.attrs, 0.6, nodes);
  std::vector<NodeId> members;
  for (auto u : nodes) {
    const auto h = f.profile.sens_hom(u, 1);
    if (h && *h > 0.6) members.push_back(u);
  }
  CHECK(slice.slice_nodes == members.size());
  CHECK(slice.coverage() == doctest::Approx(members.size() / 1000.0));
  CHECK(slice.overall.delta_sp == statistical_parity(f.preds, f.g.attrs.sensitive, members));
  CHECK(slice.overall.f1 == f1_binary(f.preds, f.g.attrs.cls, members));
  std::size_t by_bin = 0;
  for (const auto& r : slice.by_class_bin) by_bin += r ? r->n_nodes : 0;
  CHECK(by_bin == members.size());
  CHECK_THROWS_AS(high_hs_slice(f.profile, f.preds, f.g.attrs, 1.0, nodes), std::runtime_error);
}
