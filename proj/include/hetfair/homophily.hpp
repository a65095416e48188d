#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hetfair/graph.hpp"

namespace hetfair {

/// Which per-node attribute a homophily ratio refers to.
enum class Channel { kClass, kSensitive };

/// Fraction of edges whose endpoints share a label. Throws std::domain_error
/// on an edgeless graph and std::invalid_argument on a length mismatch.
double global_homophily(const Graph& g, const LabelVector& labels);

/// Edges of the subgraph induced on all nodes within distance k of u
/// (including u), each as (a, b) with a < b, sorted. k must be 1 or 2.
std::vector<Edge> khop_subgraph_edges(const Graph& g, NodeId u, int k);

/// Homophily ratio over khop_subgraph_edges(g, u, k); nullopt when that edge
/// set is empty.
std::optional<double> local_homophily(const Graph& g, const LabelVector& labels, NodeId u,
                                      int k);

/// Per-node local class and sensitive homophily for k = 1 and k = 2.
class LocalHomophilyProfile {
 public:
  static constexpr int kMaxHops = 2;

  LocalHomophilyProfile() = default;
  explicit LocalHomophilyProfile(std::size_t n_nodes);

  std::size_t n_nodes() const { return n_nodes_; }

  std::optional<double> get(Channel channel, NodeId u, int k) const;
  void set(Channel channel, NodeId u, int k, std::optional<double> value);

  std::optional<double> class_hom(NodeId u, int k) const { return get(Channel::kClass, u, k); }
  std::optional<double> sens_hom(NodeId u, int k) const { return get(Channel::kSensitive, u, k); }

 private:
  std::size_t slot(Channel channel, NodeId u, int k) const;

  std::size_t n_nodes_ = 0;
  std::vector<std::optional<double>> values_;
};

/// Computes the full profile. Work is split over `workers` threads; the
/// result does not depend on the worker count.
LocalHomophilyProfile homophily_profile(const Graph& g, const LabelVector& cls,
                                        const LabelVector& sens, unsigned workers = 1);

/// Index of the width-`bin_width` bin holding h in [0, 1]. The top bin is
/// closed so 1.0 lands in it. A 1e-9 slack absorbs rounding in ratios such as
/// 3/5 that sit exactly on a bin edge.
std::size_t bin_index(double h, double bin_width, std::size_t n_bins);

/// Number of bins of the given width needed to cover [0, 1].
std::size_t bin_count(double bin_width);

struct Histogram {
  std::vector<double> bin_lo;
  std::vector<double> bin_hi;
  std::vector<std::size_t> counts;
  std::size_t undefined_count = 0;
};

/// Histogram of defined profile values; undefined entries are counted apart.
Histogram homophily_histogram(const LocalHomophilyProfile& profile, Channel channel, int k,
                              double bin_width);

}  // namespace hetfair
