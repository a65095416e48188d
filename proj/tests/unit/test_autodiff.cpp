#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hetfair/autodiff.hpp"
#include "oracles.hpp"

using namespace hetfair;
using namespace hetfair::ad;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor t(r, c);
  for (auto& v : t.values()) v = n(rng);
  return t;
}

}  // namespace

TEST_CASE("softmax and cross entropy closed forms") {
  const auto p = softmax(Tensor(1, 2, {0.0, 0.0}));
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.5);
  const std::vector<std::uint8_t> labels = {1};
  const std::vector<NodeId> rows = {0};
  const auto loss = cross_entropy_masked(constant(Tensor(1, 2, {0.0, 0.0})), labels, rows);
  CHECK(loss.value()[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const auto sharp = cross_entropy_masked(constant(Tensor(1, 2, {-30.0, 30.0})), labels, rows);
  CHECK(sharp.value()[0] < 1e-20);
  CHECK_THROWS_AS(cross_entropy_masked(constant(Tensor(1, 2)), labels, std::span<const NodeId>{}),
                  std::invalid_argument);
}

TEST_CASE("relu forward") {
  const auto y = relu(constant(Tensor(1, 2, {-1.0, 2.0})));
  CHECK(y.value() == Tensor(1, 2, {0.0, 2.0}));
}

TEST_CASE("gradient of a sum is all ones") {
  auto w = parameter(Tensor(3, 2, 0.7));
  backward(sum(w));
  CHECK(w.grad() == Tensor(3, 2, 1.0));
}

TEST_CASE("parameter gradients accumulate until reset") {
  auto w = parameter(Tensor(2, 2, {1.0, -2.0, 3.0, 0.5}));
  auto x = constant(Tensor(2, 2, {0.3, 0.1, -0.4, 0.9}));
  auto loss = [&] { return sum(relu(matmul(x, w))); };
  backward(loss());
  const Tensor first = w.grad();
  w.zero_grad();
  backward(loss());
  CHECK(w.grad() == first);
  backward(loss());
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(w.grad()[i] == 2 * first[i]);
}

TEST_CASE("backward argument checks") {
  CHECK_THROWS_AS(backward(Var{}), std::logic_error);
  CHECK_THROWS_AS(backward(parameter(Tensor(2, 1))), std::invalid_argument);
  CHECK_THROWS_AS(matmul(constant(Tensor(2, 3)), constant(Tensor(2, 3))), std::invalid_argument);
}

TEST_CASE("non-finite values are rejected") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(add(constant(Tensor(1, 1, inf)), constant(Tensor(1, 1, 1.0))),
                  std::domain_error);
}

TEST_CASE("dropout mask entries") {
  Rng rng(4);
  const auto m = dropout_mask(50, 40, 0.5, rng);
  std::size_t zeros = 0;
  for (double v : m.values()) {
    CHECK((v == 0.0 || v == 2.0));
    zeros += v == 0.0;
  }
  CHECK(zeros > 800);
  CHECK(zeros < 1200);
  const auto keep = dropout_mask(3, 3, 0.0, rng);
  CHECK(keep == Tensor(3, 3, 1.0));
}

TEST_CASE("primitive gradients match finite differences") {
  Rng rng(17);
  const std::vector<Edge> edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {1, 3}};
  const auto g = Graph::from_edges(5, edges);
  const auto ops = build_propagation_matrices(g);
  auto a = parameter(random_tensor(5, 3, rng));
  auto b = parameter(random_tensor(3, 4, rng));
  auto c = parameter(random_tensor(5, 2, rng));
  const auto mask = dropout_mask(5, 4, 0.3, rng);
  const std::vector<std::uint8_t> labels = {0, 1, 1, 0, 1};
  const std::vector<NodeId> rows = {0, 2, 3, 4};
  auto w = parameter(random_tensor(6, 2, rng));
  auto loss_fn = [&] {
    auto h = dropout_mask_apply(relu(matmul(spmm(ops.sym_norm, a), b)), mask);
    auto joined = concat_cols({h, spmm(ops.row_norm_1hop, c)});
    auto logits = add(matmul(joined, w), softmax_rows(constant(Tensor(5, 2, 0.1))));
    return add(cross_entropy_masked(logits, labels, rows), sum(softmax_rows(matmul(c, constant(Tensor(2, 2, {1.0, 0.5, -0.3, 2.0}))))));
  };
  std::vector<Var> params = {a, b, c, w};
  const auto r = oracle::check_gradients(params, loss_fn, 1e-5, 1e-4, 1e-8);
  CHECK(r.failures == 0);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("softmax rows gradient") {
  Rng rng(5);
  auto x = parameter(random_tensor(4, 3, rng));
  auto loss_fn = [&] { return sum(matmul(softmax_rows(x), constant(Tensor(3, 1, {1.0, -2.0, 0.5})))); };
  std::vector<Var> params = {x};
  const auto r = oracle::check_gradients(params, loss_fn, 1e-5, 1e-4, 1e-8);
  CHECK(r.failures == 0);
}

TEST_CASE("parameter text round trip") {
  Rng rng(8);
  std::vector<Var> params = {parameter(random_tensor(2, 3, rng)), parameter(random_tensor(4, 1, rng))};
  std::stringstream ss;
  save_parameters(ss, params);
  const auto back = load_parameters(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == params[0].value());
  CHECK(back[1] == params[1].value());
  std::stringstream bad("not-params 1\n");
  CHECK_THROWS(load_parameters(bad));
}
