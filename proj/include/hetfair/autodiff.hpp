#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "hetfair/graph.hpp"
#include "hetfair/propagation.hpp"
#include "hetfair/rng.hpp"
#include "hetfair/tensor.hpp"

namespace hetfair::ad {

struct Node {
  std::string_view op;
  Tensor value;
  Tensor grad;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the grads of `inputs`.
  std::function<void(Node&)> propagate;
  bool requires_grad = false;
  bool is_parameter = false;
};

/// Handle to a node of the compute graph. Copies share the node.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const;
  const Tensor& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

  bool is_parameter() const { return defined() && node_->is_parameter; }
  /// Mutable storage of a parameter; throws for non-parameters.
  Tensor& param_value();
  Tensor& param_grad();
  void zero_grad();

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Trainable leaf; its gradient accumulates across backward() calls until
/// zero_grad().
Var parameter(Tensor value);
/// Leaf that receives no gradient.
Var constant(Tensor value);

Var matmul(const Var& a, const Var& b);
/// op * x for a fixed sparse operator. `op` must outlive any backward()
/// through the returned node.
Var spmm(const SparseMatrix& op, const Var& x);
Var add(const Var& a, const Var& b);
Var relu(const Var& x);
/// Elementwise x * mask, with mask produced by dropout_mask().
Var dropout_mask_apply(const Var& x, Tensor mask);
Var concat_cols(const std::vector<Var>& parts);
Var softmax_rows(const Var& x);
/// Mean over `rows` of -log softmax(logits)[r][labels[r]].
Var cross_entropy_masked(const Var& logits, std::span<const std::uint8_t> labels,
                         std::span<const NodeId> rows);
/// Sum of all entries, as a 1x1 tensor.
Var sum(const Var& x);

/// Inverted-dropout mask: each entry is 0 with probability p, otherwise 1/(1-p).
Tensor dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng);

/// Reverse-mode sweep from a scalar loss. Throws std::logic_error if the
/// loss was never computed and std::invalid_argument if it is not 1x1.
void backward(const Var& loss);

/// Elementwise softmax without gradient tracking.
Tensor softmax(const Tensor& logits);

void save_parameters(std::ostream& out, std::span<const Var> params);
std::vector<Tensor> load_parameters(std::istream& in);

}  // namespace hetfair::ad
