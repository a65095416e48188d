#include "hetfair/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hetfair {

double SparseMatrix::at(NodeId r, NodeId c) const {
  for (std::size_t i = offsets[r]; i < offsets[r + 1]; ++i) {
    if (indices[i] == c) return values[i];
  }
  return 0.0;
}

double SparseMatrix::row_sum(NodeId r) const {
  double s = 0.0;
  for (std::size_t i = offsets[r]; i < offsets[r + 1]; ++i) s += values[i];
  return s;
}

Tensor SparseMatrix::multiply(const Tensor& x) const {
  if (x.rows() != n) {
    throw std::invalid_argument("sparse (" + std::to_string(n) + ", " + std::to_string(n) +
                                ") times dense " + x.shape_string());
  }
  Tensor out(n, x.cols());
  for (std::size_t r = 0; r < n; ++r) {
    auto dst = out.row(r);
    for (std::size_t i = offsets[r]; i < offsets[r + 1]; ++i) {
      const double w = values[i];
      const auto src = x.row(indices[i]);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

Tensor SparseMatrix::multiply_transposed(const Tensor& x) const {
  if (x.rows() != n) {
    throw std::invalid_argument("sparse^T (" + std::to_string(n) + ", " + std::to_string(n) +
                                ") times dense " + x.shape_string());
  }
  Tensor out(n, x.cols());
  for (std::size_t r = 0; r < n; ++r) {
    const auto src = x.row(r);
    for (std::size_t i = offsets[r]; i < offsets[r + 1]; ++i) {
      const double w = values[i];
      auto dst = out.row(indices[i]);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

PropagationOperators build_propagation_matrices(const Graph& g) {
  const std::size_t n = g.n_nodes();
  PropagationOperators ops;

  auto& sym = ops.sym_norm;
  sym.n = n;
  std::vector<double> inv_sqrt(n);
  for (NodeId u = 0; u < n; ++u) inv_sqrt[u] = 1.0 / std::sqrt(static_cast<double>(g.degree(u) + 1));
  for (NodeId u = 0; u < n; ++u) {
    // self-loop merged into the sorted neighbor order
    bool self_done = false;
    for (NodeId v : g.neighbors(u)) {
      if (!self_done && u < v) {
        sym.indices.push_back(u);
        sym.values.push_back(inv_sqrt[u] * inv_sqrt[u]);
        self_done = true;
      }
      sym.indices.push_back(v);
      sym.values.push_back(inv_sqrt[u] * inv_sqrt[v]);
    }
    if (!self_done) {
      sym.indices.push_back(u);
      sym.values.push_back(inv_sqrt[u] * inv_sqrt[u]);
    }
    sym.offsets.push_back(sym.indices.size());
  }

  auto& one = ops.row_norm_1hop;
  one.n = n;
  for (NodeId u = 0; u < n; ++u) {
    const auto nb = g.neighbors(u);
    for (NodeId v : nb) {
      one.indices.push_back(v);
      one.values.push_back(1.0 / static_cast<double>(nb.size()));
    }
    one.offsets.push_back(one.indices.size());
  }

  auto& two = ops.row_norm_2hop;
  two.n = n;
  std::vector<std::uint32_t> mark(n, 0);
  std::uint32_t stamp = 0;
  std::vector<NodeId> ring;
  for (NodeId u = 0; u < n; ++u) {
    ++stamp;
    mark[u] = stamp;
    for (NodeId v : g.neighbors(u)) mark[v] = stamp;
    ring.clear();
    for (NodeId v : g.neighbors(u)) {
      for (NodeId w : g.neighbors(v)) {
        if (mark[w] != stamp) {
          mark[w] = stamp;
          ring.push_back(w);
        }
      }
    }
    std::sort(ring.begin(), ring.end());
    for (NodeId w : ring) {
      two.indices.push_back(w);
      two.values.push_back(1.0 / static_cast<double>(ring.size()));
    }
    two.offsets.push_back(two.indices.size());
  }
  return ops;
}

}  // namespace hetfair
