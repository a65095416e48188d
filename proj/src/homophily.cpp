#include "hetfair/homophily.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace hetfair {
namespace {

void check_hops(int k) {
  if (k != 1 && k != 2) {
    throw std::invalid_argument("hop radius must be 1 or 2, got " + std::to_string(k));
  }
}

void check_labels(const Graph& g, const LabelVector& labels) {
  if (labels.size() != g.n_nodes()) {
    throw std::invalid_argument("label vector has " + std::to_string(labels.size()) +
                                " entries for a graph with " + std::to_string(g.n_nodes()) +
                                " nodes");
  }
}

// Reusable scratch for ball queries. `mark[v] == stamp` means v is in the ball.
struct BallScratch {
  explicit BallScratch(std::size_t n) : mark(n, 0) {}

  void collect(const Graph& g, NodeId u, int k) {
    if (++stamp == 0) {
      std::fill(mark.begin(), mark.end(), 0);
      stamp = 1;
    }
    members.clear();
    members.push_back(u);
    mark[u] = stamp;
    std::size_t frontier_begin = 0;
    for (int depth = 0; depth < k; ++depth) {
      const std::size_t frontier_end = members.size();
      for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
        for (NodeId v : g.neighbors(members[i])) {
          if (mark[v] != stamp) {
            mark[v] = stamp;
            members.push_back(v);
          }
        }
      }
      frontier_begin = frontier_end;
    }
  }

  bool contains(NodeId v) const { return mark[v] == stamp; }

  std::vector<std::uint32_t> mark;
  std::uint32_t stamp = 0;
  std::vector<NodeId> members;
};

}  // namespace

double global_homophily(const Graph& g, const LabelVector& labels) {
  check_labels(g, labels);
  if (g.n_edges() == 0) throw std::domain_error("global homophily of an edgeless graph");
  std::size_t matches = 0;
  for (NodeId u = 0; u < g.n_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (u < v && labels[u] == labels[v]) ++matches;
    }
  }
  return static_cast<double>(matches) / static_cast<double>(g.n_edges());
}

std::vector<Edge> khop_subgraph_edges(const Graph& g, NodeId u, int k) {
  check_hops(k);
  if (u >= g.n_nodes()) throw std::out_of_range("node " + std::to_string(u) + " out of range");
  BallScratch ball(g.n_nodes());
  ball.collect(g, u, k);
  std::vector<Edge> out;
  for (NodeId a : ball.members) {
    for (NodeId b : g.neighbors(a)) {
      if (a < b && ball.contains(b)) out.emplace_back(a, b);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<double> local_homophily(const Graph& g, const LabelVector& labels, NodeId u,
                                      int k) {
  check_labels(g, labels);
  const auto edges = khop_subgraph_edges(g, u, k);
  if (edges.empty()) return std::nullopt;
  std::size_t matches = 0;
  for (const auto& [a, b] : edges) matches += labels[a] == labels[b];
  return static_cast<double>(matches) / static_cast<double>(edges.size());
}

LocalHomophilyProfile::LocalHomophilyProfile(std::size_t n_nodes)
    : n_nodes_(n_nodes), values_(n_nodes * 2 * kMaxHops) {}

std::size_t LocalHomophilyProfile::slot(Channel channel, NodeId u, int k) const {
  check_hops(k);
  if (u >= n_nodes_) throw std::out_of_range("node " + std::to_string(u) + " out of range");
  const std::size_t c = channel == Channel::kClass ? 0 : 1;
  return (static_cast<std::size_t>(u) * 2 + c) * kMaxHops + static_cast<std::size_t>(k - 1);
}

std::optional<double> LocalHomophilyProfile::get(Channel channel, NodeId u, int k) const {
  return values_[slot(channel, u, k)];
}

void LocalHomophilyProfile::set(Channel channel, NodeId u, int k, std::optional<double> value) {
  if (value && (*value < 0.0 || *value > 1.0)) {
    throw std::invalid_argument("homophily ratio outside [0, 1]");
  }
  values_[slot(channel, u, k)] = value;
}

LocalHomophilyProfile homophily_profile(const Graph& g, const LabelVector& cls,
                                        const LabelVector& sens, unsigned workers) {
  check_labels(g, cls);
  check_labels(g, sens);
  const std::size_t n = g.n_nodes();
  LocalHomophilyProfile profile(n);

  auto work = [&](std::size_t begin, std::size_t end) {
    BallScratch ball(n);
    for (std::size_t ui = begin; ui < end; ++ui) {
      const auto u = static_cast<NodeId>(ui);
      for (int k = 1; k <= LocalHomophilyProfile::kMaxHops; ++k) {
        ball.collect(g, u, k);
        std::size_t edges = 0, class_matches = 0, sens_matches = 0;
        for (NodeId a : ball.members) {
          for (NodeId b : g.neighbors(a)) {
            if (a < b && ball.contains(b)) {
              ++edges;
              class_matches += cls[a] == cls[b];
              sens_matches += sens[a] == sens[b];
            }
          }
        }
        if (edges > 0) {
          const auto denom = static_cast<double>(edges);
          profile.set(Channel::kClass, u, k, static_cast<double>(class_matches) / denom);
          profile.set(Channel::kSensitive, u, k, static_cast<double>(sens_matches) / denom);
        }
      }
    }
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n, w * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      threads.emplace_back(work, begin, end);
    }
  }
  return profile;
}

std::size_t bin_count(double bin_width) {
  if (!(bin_width > 0.0 && bin_width <= 1.0)) {
    throw std::invalid_argument("bin width must lie in (0, 1]");
  }
  return static_cast<std::size_t>(std::ceil(1.0 / bin_width - 1e-9));
}

std::size_t bin_index(double h, double bin_width, std::size_t n_bins) {
  const double scaled = std::floor(h / bin_width + 1e-9);
  if (scaled <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(scaled), n_bins - 1);
}

Histogram homophily_histogram(const LocalHomophilyProfile& profile, Channel channel, int k,
                              double bin_width) {
  const std::size_t n_bins = bin_count(bin_width);
  Histogram hist;
  hist.counts.assign(n_bins, 0);
  for (std::size_t b = 0; b < n_bins; ++b) {
    // rounded so that e.g. 3 * 0.2 prints as 0.6
    auto edge = [&](std::size_t i) {
      return std::min(1.0, std::round(static_cast<double>(i) * bin_width * 1e12) / 1e12);
    };
    hist.bin_lo.push_back(edge(b));
    hist.bin_hi.push_back(edge(b + 1));
  }
  for (NodeId u = 0; u < profile.n_nodes(); ++u) {
    const auto h = profile.get(channel, u, k);
    if (!h) {
      ++hist.undefined_count;
      continue;
    }
    ++hist.counts[bin_index(*h, bin_width, n_bins)];
  }
  return hist;
}

}  // namespace hetfair
