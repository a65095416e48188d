#pragma once

#include <cstddef>
#include <vector>

#include "hetfair/graph.hpp"
#include "hetfair/tensor.hpp"

namespace hetfair {

/// Square CSR matrix used only as the left operand of sparse x dense products.
struct SparseMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<NodeId> indices;
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }
  double at(NodeId r, NodeId c) const;  // linear scan of row r
  double row_sum(NodeId r) const;

  /// this * x
  Tensor multiply(const Tensor& x) const;
  /// this^T * x
  Tensor multiply_transposed(const Tensor& x) const;
};

struct PropagationOperators {
  SparseMatrix sym_norm;       // D~^{-1/2} (A + I) D~^{-1/2}
  SparseMatrix row_norm_1hop;  // mean over N(u)
  SparseMatrix row_norm_2hop;  // mean over nodes at distance exactly 2
};

PropagationOperators build_propagation_matrices(const Graph& g);

}  // namespace hetfair
