#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hetfair/graph.hpp"
#include "hetfair/kvconfig.hpp"
#include "hetfair/rng.hpp"
#include "hetfair/tensor.hpp"

namespace hetfair {

/// Joint probability P(C = c, S = s), indexed p[c][s].
struct JointDistribution {
  std::array<std::array<double, 2>, 2> p{{{0.25, 0.25}, {0.25, 0.25}}};

  static JointDistribution uniform();
  /// Uniform sensitive marginal; each sensitive group is three times as
  /// likely to hold one class (s = 1 favours c = 1, s = 0 favours c = 0).
  static JointDistribution skew3x();
  /// Parses `uniform`, `skew3x`, or four comma-separated cells p00,p01,p10,p11.
  static JointDistribution parse(const std::string& text);

  void validate() const;
  std::string to_string() const;
};

/// 2x2 connection propensity matrix: `diag` on the diagonal, 1 - diag off it.
struct CompatibilityMatrix {
  double diag = 0.5;

  double operator()(std::uint8_t a, std::uint8_t b) const { return a == b ? diag : 1.0 - diag; }
};

CompatibilityMatrix build_compatibility(double h_diag);

/// How a sensitive value s in {0, 1} shifts the feature mean.
enum class FeatureMeanMode {
  kSigned,   // mean e * (2s - 1), i.e. -e or +e
  kLiteral,  // mean e * s, i.e. 0 or e
};

struct GeneratorConfig {
  std::size_t n_nodes = 1000;
  std::size_t edges_per_node = 10;
  double h_c = 0.5;
  double h_s = 0.5;
  JointDistribution joint;
  double feature_bias = 1.0;
  std::size_t feature_dim = 2;
  double feature_std = 1.0;
  FeatureMeanMode mean_mode = FeatureMeanMode::kSigned;
  std::uint64_t seed = 0;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;

  static GeneratorConfig from_kv(const KvConfig& kv);
  KvConfig to_kv() const;
  static const std::vector<std::string>& known_keys();
};

struct NodeAttributes {
  LabelVector cls;
  LabelVector sensitive;
  Tensor features;  // n_nodes x feature_dim
};

struct AttributedGraph {
  Graph graph;
  NodeAttributes attrs;
};

/// n i.i.d. (class, sensitive) draws from `joint`.
std::pair<LabelVector, LabelVector> sample_attributes(const JointDistribution& joint,
                                                      std::size_t n, Rng& rng);

/// Isotropic Gaussian rows whose per-dimension mean is set by the sensitive
/// value and the bias e.
Tensor generate_features(const LabelVector& sensitive, double e, std::size_t dim, double stddev,
                         Rng& rng, FeatureMeanMode mode = FeatureMeanMode::kSigned);

/// Normalized probabilities that incoming node u attaches to each candidate:
/// H_S[s_u][s_v] * H_C[c_u][c_v] * d_v. Throws std::runtime_error naming u
/// when every weight is zero.
std::vector<double> attachment_weights(std::span<const NodeId> candidates, NodeId u,
                                       const NodeAttributes& attrs, const CompatibilityMatrix& hc,
                                       const CompatibilityMatrix& hs,
                                       std::span<const std::size_t> degrees);

/// Attribute sampling, biased features, then compatibility-weighted
/// preferential attachment grown from a clique on the first m + 1 nodes.
AttributedGraph generate(const GeneratorConfig& config);

/// Edge count generate() produces: m(m+1)/2 + (n - m - 1) m.
std::size_t expected_edge_count(std::size_t n_nodes, std::size_t m);

}  // namespace hetfair
