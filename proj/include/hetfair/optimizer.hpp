#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hetfair/autodiff.hpp"
#include "hetfair/tensor.hpp"

namespace hetfair {

struct AdamOptions {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // L2 penalty folded into the gradient
};

struct OptimizerState {
  AdamOptions options;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update of `params` in place. Moments are lazily
/// sized on the first call. Throws std::domain_error on a non-finite gradient
/// and std::invalid_argument on a shape mismatch.
void optimizer_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
                    OptimizerState& state);

/// Adam over a fixed list of parameter variables.
class Adam {
 public:
  Adam(std::vector<ad::Var> params, AdamOptions options);

  void step();
  void zero_grad();
  const OptimizerState& state() const { return state_; }

 private:
  std::vector<ad::Var> params_;
  OptimizerState state_;
};

}  // namespace hetfair
