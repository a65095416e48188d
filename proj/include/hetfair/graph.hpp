#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace hetfair {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Binary per-node labels (class or sensitive attribute). Every entry is 0 or 1.
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::vector<std::uint8_t> values);

  std::size_t size() const { return values_.size(); }
  std::uint8_t operator[](std::size_t i) const { return values_[i]; }
  std::span<const std::uint8_t> values() const { return values_; }

  /// Swaps 0 and 1 on every node.
  LabelVector flipped() const;

 private:
  std::vector<std::uint8_t> values_;
};

/// Immutable undirected simple graph in compressed sparse row form.
///
/// Neighbor lists are sorted ascending, contain no self-loops and no
/// duplicates, and the adjacency is symmetric.
class Graph {
 public:
  Graph() = default;

  /// Builds from an arbitrary edge list. Edges are symmetrized; self-loops
  /// and duplicates are dropped. Throws std::out_of_range on an endpoint
  /// >= n_nodes.
  static Graph from_edges(std::size_t n_nodes, std::span<const Edge> edges);

  std::size_t n_nodes() const { return degrees_.size(); }
  std::size_t n_edges() const { return neighbors_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {neighbors_.data() + offsets_[u], neighbors_.data() + offsets_[u + 1]};
  }
  std::size_t degree(NodeId u) const { return degrees_[u]; }
  std::span<const std::size_t> degrees() const { return degrees_; }
  std::span<const std::size_t> offsets() const { return offsets_; }

  bool has_edge(NodeId u, NodeId v) const;

  /// Each undirected edge once, as (u, v) with u < v, in lexicographic order.
  std::vector<Edge> edge_list() const;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> neighbors_;
  std::vector<std::size_t> degrees_;
};

}  // namespace hetfair
