#include "hetfair/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hetfair {

void optimizer_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
                    OptimizerState& state) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("optimizer_step: " + std::to_string(params.size()) +
                                " parameters but " + std::to_string(grads.size()) + " gradients");
  }
  if (state.first_moment.empty()) {
    for (const Tensor* p : params) {
      state.first_moment.emplace_back(p->rows(), p->cols());
      state.second_moment.emplace_back(p->rows(), p->cols());
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw std::invalid_argument("optimizer_step: state tracks a different parameter count");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(*grads[i]) || !params[i]->same_shape(state.first_moment[i])) {
      throw std::invalid_argument("optimizer_step: parameter " + params[i]->shape_string() +
                                  " vs gradient " + grads[i]->shape_string());
    }
    if (!grads[i]->all_finite()) {
      throw std::domain_error("optimizer_step: non-finite gradient for parameter " +
                              std::to_string(i));
    }
  }

  const auto& o = state.options;
  ++state.step;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    Tensor& m = state.first_moment[i];
    Tensor& v = state.second_moment[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = g[j] + o.weight_decay * p[j];
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * gj;
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * gj * gj;
      p[j] -= o.lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + o.eps);
    }
  }
}

Adam::Adam(std::vector<ad::Var> params, AdamOptions options) : params_(std::move(params)) {
  for (const auto& p : params_) {
    if (!p.is_parameter()) throw std::invalid_argument("Adam given a non-parameter variable");
  }
  state_.options = options;
}

void Adam::step() {
  std::vector<Tensor*> values;
  std::vector<const Tensor*> grads;
  for (auto& p : params_) {
    values.push_back(&p.param_value());
    grads.push_back(&p.param_grad());
  }
  optimizer_step(values, grads, state_);
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace hetfair
