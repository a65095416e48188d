#include "hetfair/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hetfair {

LabelVector::LabelVector(std::vector<std::uint8_t> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] > 1) {
      throw std::invalid_argument("label at node " + std::to_string(i) + " is " +
                                  std::to_string(values_[i]) + ", expected 0 or 1");
    }
  }
}

LabelVector LabelVector::flipped() const {
  std::vector<std::uint8_t> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(1 - v); });
  return LabelVector(std::move(out));
}

Graph Graph::from_edges(std::size_t n_nodes, std::span<const Edge> edges) {
  std::vector<Edge> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    if (u >= n_nodes || v >= n_nodes) {
      throw std::out_of_range("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                              ") has an endpoint outside [0, " + std::to_string(n_nodes) + ")");
    }
    if (u == v) continue;
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  Graph g;
  g.degrees_.assign(n_nodes, 0);
  for (const auto& e : directed) ++g.degrees_[e.first];
  g.offsets_.assign(n_nodes + 1, 0);
  for (std::size_t u = 0; u < n_nodes; ++u) g.offsets_[u + 1] = g.offsets_[u] + g.degrees_[u];
  g.neighbors_.resize(directed.size());
  // directed is sorted by (source, target) so targets land in order.
  for (std::size_t i = 0; i < directed.size(); ++i) g.neighbors_[i] = directed[i].second;
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(n_edges());
  for (NodeId u = 0; u < n_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

}  // namespace hetfair
