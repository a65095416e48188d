#include "hetfair/autodiff.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "hetfair/kvconfig.hpp"

namespace hetfair::ad {
namespace {

using NodePtr = std::shared_ptr<Node>;

void check_finite(const Tensor& t, std::string_view op) {
  if (!t.all_finite()) {
    throw std::domain_error("non-finite value produced by " + std::string(op));
  }
}

NodePtr make_node(std::string_view op, Tensor value, std::vector<NodePtr> inputs) {
  check_finite(value, op);
  auto node = std::make_shared<Node>();
  node->op = op;
  node->value = std::move(value);
  node->inputs = std::move(inputs);
  node->requires_grad = std::any_of(node->inputs.begin(), node->inputs.end(),
                                    [](const NodePtr& n) { return n->requires_grad; });
  return node;
}

const NodePtr& need(const Var& v, std::string_view op) {
  if (!v.defined()) throw std::logic_error(std::string(op) + " on an undefined variable");
  return v.node();
}

// Accumulates `delta` into n->grad, allocating it on first use.
void accumulate(Node& n, const Tensor& delta) {
  if (!n.requires_grad) return;
  if (n.grad.empty()) n.grad = Tensor(n.value.rows(), n.value.cols());
  auto g = n.grad.values();
  const auto d = delta.values();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += d[i];
}

// out = a * b
Tensor gemm_nn(const Tensor& a, const Tensor& b) {
  Tensor out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const auto src = b.row(k);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

// out = a * b^T
Tensor gemm_nt(const Tensor& a, const Tensor& b) {
  Tensor out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ar = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto br = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < ar.size(); ++k) s += ar[k] * br[k];
      out(i, j) = s;
    }
  }
  return out;
}

// out = a^T * b
Tensor gemm_tn(const Tensor& a, const Tensor& b) {
  Tensor out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const auto ar = a.row(k);
    const auto br = b.row(k);
    for (std::size_t i = 0; i < ar.size(); ++i) {
      const double aki = ar[i];
      if (aki == 0.0) continue;
      auto dst = out.row(i);
      for (std::size_t j = 0; j < br.size(); ++j) dst[j] += aki * br[j];
    }
  }
  return out;
}

}  // namespace

const Tensor& Var::value() const { return need(*this, "value")->value; }

const Tensor& Var::grad() const {
  const auto& n = need(*this, "grad");
  if (n->grad.empty()) {
    static const Tensor kEmpty;
    return kEmpty;
  }
  return n->grad;
}

Tensor& Var::param_value() {
  if (!is_parameter()) throw std::logic_error("param_value on a non-parameter variable");
  return node_->value;
}

Tensor& Var::param_grad() {
  if (!is_parameter()) throw std::logic_error("param_grad on a non-parameter variable");
  return node_->grad;
}

void Var::zero_grad() {
  if (defined()) node_->grad.fill(0.0);
}

Var parameter(Tensor value) {
  check_finite(value, "parameter");
  auto node = std::make_shared<Node>();
  node->op = "parameter";
  node->grad = Tensor(value.rows(), value.cols());
  node->value = std::move(value);
  node->requires_grad = true;
  node->is_parameter = true;
  return Var(std::move(node));
}

Var constant(Tensor value) {
  check_finite(value, "constant");
  auto node = std::make_shared<Node>();
  node->op = "constant";
  node->value = std::move(value);
  return Var(std::move(node));
}

Var matmul(const Var& a, const Var& b) {
  const auto& na = need(a, "matmul");
  const auto& nb = need(b, "matmul");
  if (na->value.cols() != nb->value.rows()) {
    throw std::invalid_argument("matmul shape mismatch: " + na->value.shape_string() + " x " +
                                nb->value.shape_string());
  }
  auto node = make_node("matmul", gemm_nn(na->value, nb->value), {na, nb});
  node->propagate = [](Node& self) {
    auto& lhs = *self.inputs[0];
    auto& rhs = *self.inputs[1];
    if (lhs.requires_grad) accumulate(lhs, gemm_nt(self.grad, rhs.value));
    if (rhs.requires_grad) accumulate(rhs, gemm_tn(lhs.value, self.grad));
  };
  return Var(std::move(node));
}

Var spmm(const SparseMatrix& op, const Var& x) {
  const auto& nx = need(x, "spmm");
  auto node = make_node("spmm", op.multiply(nx->value), {nx});
  node->propagate = [&op](Node& self) {
    accumulate(*self.inputs[0], op.multiply_transposed(self.grad));
  };
  return Var(std::move(node));
}

Var add(const Var& a, const Var& b) {
  const auto& na = need(a, "add");
  const auto& nb = need(b, "add");
  if (!na->value.same_shape(nb->value)) {
    throw std::invalid_argument("add shape mismatch: " + na->value.shape_string() + " + " +
                                nb->value.shape_string());
  }
  Tensor out = na->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += nb->value[i];
  auto node = make_node("add", std::move(out), {na, nb});
  node->propagate = [](Node& self) {
    accumulate(*self.inputs[0], self.grad);
    accumulate(*self.inputs[1], self.grad);
  };
  return Var(std::move(node));
}

Var relu(const Var& x) {
  const auto& nx = need(x, "relu");
  Tensor out = nx->value;
  for (auto& v : out.values()) v = v > 0.0 ? v : 0.0;
  auto node = make_node("relu", std::move(out), {nx});
  node->propagate = [](Node& self) {
    Tensor d = self.grad;
    const auto& in = self.inputs[0]->value;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!(in[i] > 0.0)) d[i] = 0.0;
    }
    accumulate(*self.inputs[0], d);
  };
  return Var(std::move(node));
}

Var dropout_mask_apply(const Var& x, Tensor mask) {
  const auto& nx = need(x, "dropout_mask_apply");
  if (!nx->value.same_shape(mask)) {
    throw std::invalid_argument("dropout mask shape mismatch: " + nx->value.shape_string() +
                                " vs " + mask.shape_string());
  }
  Tensor out = nx->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  auto node = make_node("dropout", std::move(out), {nx});
  node->propagate = [mask = std::move(mask)](Node& self) {
    Tensor d = self.grad;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= mask[i];
    accumulate(*self.inputs[0], d);
  };
  return Var(std::move(node));
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols of zero tensors");
  std::vector<NodePtr> inputs;
  std::size_t cols = 0;
  const std::size_t rows = need(parts.front(), "concat_cols")->value.rows();
  for (const auto& p : parts) {
    const auto& np = need(p, "concat_cols");
    if (np->value.rows() != rows) {
      throw std::invalid_argument("concat_cols row mismatch: " +
                                  parts.front().value().shape_string() + " and " +
                                  np->value.shape_string());
    }
    cols += np->value.cols();
    inputs.push_back(np);
  }
  Tensor out(rows, cols);
  std::size_t offset = 0;
  for (const auto& np : inputs) {
    for (std::size_t r = 0; r < rows; ++r) {
      const auto src = np->value.row(r);
      std::copy(src.begin(), src.end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(offset));
    }
    offset += np->value.cols();
  }
  auto node = make_node("concat_cols", std::move(out), std::move(inputs));
  node->propagate = [](Node& self) {
    std::size_t off = 0;
    for (auto& in : self.inputs) {
      const std::size_t c = in->value.cols();
      if (in->requires_grad) {
        Tensor d(self.grad.rows(), c);
        for (std::size_t r = 0; r < d.rows(); ++r) {
          const auto src = self.grad.row(r).subspan(off, c);
          std::copy(src.begin(), src.end(), d.row(r).begin());
        }
        accumulate(*in, d);
      }
      off += c;
    }
  };
  return Var(std::move(node));
}

Tensor softmax(const Tensor& logits) {
  Tensor out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto in = logits.row(r);
    auto dst = out.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) z += dst[c] = std::exp(in[c] - mx);
    for (double& v : dst) v /= z;
  }
  return out;
}

Var softmax_rows(const Var& x) {
  const auto& nx = need(x, "softmax_rows");
  auto node = make_node("softmax_rows", softmax(nx->value), {nx});
  node->propagate = [](Node& self) {
    Tensor d(self.value.rows(), self.value.cols());
    for (std::size_t r = 0; r < d.rows(); ++r) {
      const auto y = self.value.row(r);
      const auto dy = self.grad.row(r);
      double dot = 0.0;
      for (std::size_t c = 0; c < y.size(); ++c) dot += y[c] * dy[c];
      auto dst = d.row(r);
      for (std::size_t c = 0; c < y.size(); ++c) dst[c] = y[c] * (dy[c] - dot);
    }
    accumulate(*self.inputs[0], d);
  };
  return Var(std::move(node));
}

Var cross_entropy_masked(const Var& logits, std::span<const std::uint8_t> labels,
                         std::span<const NodeId> rows) {
  const auto& nl = need(logits, "cross_entropy_masked");
  const auto& z = nl->value;
  if (labels.size() != z.rows()) {
    throw std::invalid_argument("cross_entropy_masked: " + std::to_string(labels.size()) +
                                " labels for logits " + z.shape_string());
  }
  if (rows.empty()) throw std::invalid_argument("cross_entropy_masked: empty mask");
  const Tensor probs = softmax(z);
  double loss = 0.0;
  for (NodeId r : rows) {
    if (r >= z.rows() || labels[r] >= z.cols()) {
      throw std::out_of_range("cross_entropy_masked: row or label out of range");
    }
    const auto in = z.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double lse = 0.0;
    for (double v : in) lse += std::exp(v - mx);
    loss += mx + std::log(lse) - in[labels[r]];
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  auto node = make_node("cross_entropy_masked", Tensor::scalar(loss * inv), {nl});
  node->propagate = [probs, labels = std::vector<std::uint8_t>(labels.begin(), labels.end()),
                     rows = std::vector<NodeId>(rows.begin(), rows.end()), inv](Node& self) {
    const double g = self.grad[0] * inv;
    Tensor d(probs.rows(), probs.cols());
    for (NodeId r : rows) {
      auto dst = d.row(r);
      const auto p = probs.row(r);
      for (std::size_t c = 0; c < p.size(); ++c) dst[c] += g * p[c];
      dst[labels[r]] -= g;
    }
    accumulate(*self.inputs[0], d);
  };
  return Var(std::move(node));
}

Var sum(const Var& x) {
  const auto& nx = need(x, "sum");
  double s = 0.0;
  for (double v : nx->value.values()) s += v;
  auto node = make_node("sum", Tensor::scalar(s), {nx});
  node->propagate = [](Node& self) {
    const auto& in = self.inputs[0]->value;
    accumulate(*self.inputs[0], Tensor(in.rows(), in.cols(), self.grad[0]));
  };
  return Var(std::move(node));
}

Tensor dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  Tensor mask(rows, cols, 1.0);
  if (p == 0.0) return mask;
  std::bernoulli_distribution drop(p);
  const double keep_scale = 1.0 / (1.0 - p);
  for (auto& v : mask.values()) v = drop(rng) ? 0.0 : keep_scale;
  return mask;
}

void backward(const Var& loss) {
  if (!loss.defined()) throw std::logic_error("backward called before any forward pass");
  const auto& root = loss.node();
  if (root->value.rows() != 1 || root->value.cols() != 1) {
    throw std::invalid_argument("backward needs a scalar loss, got " +
                                root->value.shape_string());
  }
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order (inputs first).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->inputs.size()) {
      Node* child = n->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (!n->is_parameter) n->grad = Tensor(n->value.rows(), n->value.cols());
  }
  root->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->propagate) n->propagate(*n);
  }
  // Free intermediate gradients; parameters keep theirs.
  for (Node* n : order) {
    if (!n->is_parameter && n != root.get()) n->grad = Tensor();
  }
}

void save_parameters(std::ostream& out, std::span<const Var> params) {
  out << "hetfair-params 1\n" << params.size() << "\n";
  for (const auto& p : params) {
    const auto& t = p.value();
    out << t.rows() << " " << t.cols() << "\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
      out << (i ? " " : "") << format_double(t[i]);
    }
    out << "\n";
  }
}

std::vector<Tensor> load_parameters(std::istream& in) {
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  if (!(in >> magic >> version >> count) || magic != "hetfair-params" || version != 1) {
    throw std::runtime_error("not a hetfair parameter blob");
  }
  std::vector<Tensor> out;
  for (std::size_t p = 0; p < count; ++p) {
    std::size_t rows = 0, cols = 0;
    if (!(in >> rows >> cols)) throw std::runtime_error("truncated parameter blob");
    std::vector<double> values(rows * cols);
    for (auto& v : values) {
      std::string tok;
      if (!(in >> tok)) throw std::runtime_error("truncated parameter blob");
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc{}) throw std::runtime_error("bad value `" + tok + "` in blob");
    }
    out.emplace_back(rows, cols, std::move(values));
  }
  return out;
}

}  // namespace hetfair::ad
