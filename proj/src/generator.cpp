#include "hetfair/generator.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace hetfair {

JointDistribution JointDistribution::uniform() { return {}; }

JointDistribution JointDistribution::skew3x() {
  JointDistribution j;
  j.p = {{{0.375, 0.125}, {0.125, 0.375}}};
  return j;
}

JointDistribution JointDistribution::parse(const std::string& text) {
  if (text == "uniform") return uniform();
  if (text == "skew3x") return skew3x();
  const auto cells = split_list(text);
  if (cells.size() != 4) {
    throw ConfigError("joint distribution must be `uniform`, `skew3x`, or p00,p01,p10,p11; got `" +
                      text + "`");
  }
  JointDistribution j;
  for (std::size_t i = 0; i < 4; ++i) {
    try {
      j.p[i / 2][i % 2] = std::stod(cells[i]);
    } catch (const std::exception&) {
      throw ConfigError("joint distribution cell `" + cells[i] + "` is not a number");
    }
  }
  j.validate();
  return j;
}

void JointDistribution::validate() const {
  double total = 0.0;
  for (const auto& row : p) {
    for (double v : row) {
      if (!(v >= 0.0)) throw ConfigError("joint distribution has a negative or NaN cell");
      total += v;
    }
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ConfigError("joint distribution cells sum to " + format_double(total) + ", not 1");
  }
}

std::string JointDistribution::to_string() const {
  return format_double(p[0][0]) + "," + format_double(p[0][1]) + "," + format_double(p[1][0]) +
         "," + format_double(p[1][1]);
}

CompatibilityMatrix build_compatibility(double h_diag) {
  if (!(h_diag >= 0.0 && h_diag <= 1.0)) {
    throw std::invalid_argument("compatibility diagonal must lie in [0, 1]");
  }
  return CompatibilityMatrix{h_diag};
}

namespace {

void require_unit(const char* name, double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ConfigError(std::string(name) + " must lie in [0, 1], got " + format_double(v));
  }
}

}  // namespace

void GeneratorConfig::validate() const {
  if (edges_per_node == 0) throw ConfigError("edges_per_node must be positive");
  if (n_nodes <= edges_per_node + 1) {
    throw ConfigError("n_nodes must exceed edges_per_node + 1");
  }
  require_unit("h_c", h_c);
  require_unit("h_s", h_s);
  require_unit("feature_bias", feature_bias);
  joint.validate();
  if (feature_dim == 0) throw ConfigError("feature_dim must be positive");
  if (!(feature_std > 0.0)) throw ConfigError("feature_std must be positive");
}

const std::vector<std::string>& GeneratorConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "n_nodes",     "edges_per_node", "h_c",       "h_s",           "joint",
      "feature_bias", "feature_dim",   "feature_std", "feature_mean_mode", "seed"};
  return keys;
}

GeneratorConfig GeneratorConfig::from_kv(const KvConfig& kv) {
  GeneratorConfig c;
  c.n_nodes = static_cast<std::size_t>(kv.get_uint("n_nodes", c.n_nodes));
  c.edges_per_node = static_cast<std::size_t>(kv.get_uint("edges_per_node", c.edges_per_node));
  c.h_c = kv.get_double("h_c", c.h_c);
  c.h_s = kv.get_double("h_s", c.h_s);
  c.joint = JointDistribution::parse(kv.get_string("joint", "uniform"));
  c.feature_bias = kv.get_double("feature_bias", c.feature_bias);
  c.feature_dim = static_cast<std::size_t>(kv.get_uint("feature_dim", c.feature_dim));
  c.feature_std = kv.get_double("feature_std", c.feature_std);
  const auto mode = kv.get_string("feature_mean_mode", "signed");
  if (mode == "signed") {
    c.mean_mode = FeatureMeanMode::kSigned;
  } else if (mode == "literal") {
    c.mean_mode = FeatureMeanMode::kLiteral;
  } else {
    throw ConfigError("feature_mean_mode must be `signed` or `literal`, got `" + mode + "`");
  }
  c.seed = kv.get_uint("seed", c.seed);
  c.validate();
  return c;
}

KvConfig GeneratorConfig::to_kv() const {
  KvConfig kv;
  kv.set("n_nodes", std::to_string(n_nodes));
  kv.set("edges_per_node", std::to_string(edges_per_node));
  kv.set("h_c", format_double(h_c));
  kv.set("h_s", format_double(h_s));
  kv.set("joint", joint.to_string());
  kv.set("feature_bias", format_double(feature_bias));
  kv.set("feature_dim", std::to_string(feature_dim));
  kv.set("feature_std", format_double(feature_std));
  kv.set("feature_mean_mode", mean_mode == FeatureMeanMode::kSigned ? "signed" : "literal");
  kv.set("seed", std::to_string(seed));
  return kv;
}

std::pair<LabelVector, LabelVector> sample_attributes(const JointDistribution& joint,
                                                      std::size_t n, Rng& rng) {
  joint.validate();
  std::discrete_distribution<int> cell(
      {joint.p[0][0], joint.p[0][1], joint.p[1][0], joint.p[1][1]});
  std::vector<std::uint8_t> cls(n), sens(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int draw = cell(rng);
    cls[i] = static_cast<std::uint8_t>(draw / 2);
    sens[i] = static_cast<std::uint8_t>(draw % 2);
  }
  return {LabelVector(std::move(cls)), LabelVector(std::move(sens))};
}

Tensor generate_features(const LabelVector& sensitive, double e, std::size_t dim, double stddev,
                         Rng& rng, FeatureMeanMode mode) {
  if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("feature bias must lie in [0, 1]");
  if (!(stddev > 0.0)) throw std::invalid_argument("feature std must be positive");
  Tensor out(sensitive.size(), dim);
  std::normal_distribution<double> noise(0.0, stddev);
  for (std::size_t u = 0; u < sensitive.size(); ++u) {
    const double s = sensitive[u];
    const double mean = mode == FeatureMeanMode::kSigned ? e * (2.0 * s - 1.0) : e * s;
    for (std::size_t d = 0; d < dim; ++d) out(u, d) = mean + noise(rng);
  }
  return out;
}

namespace {

double raw_weight(NodeId u, NodeId v, const NodeAttributes& attrs, const CompatibilityMatrix& hc,
                  const CompatibilityMatrix& hs, std::span<const std::size_t> degrees) {
  return hs(attrs.sensitive[u], attrs.sensitive[v]) * hc(attrs.cls[u], attrs.cls[v]) *
         static_cast<double>(degrees[v]);
}

}  // namespace

std::vector<double> attachment_weights(std::span<const NodeId> candidates, NodeId u,
                                       const NodeAttributes& attrs, const CompatibilityMatrix& hc,
                                       const CompatibilityMatrix& hs,
                                       std::span<const std::size_t> degrees) {
  std::vector<double> w(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    w[i] = raw_weight(u, candidates[i], attrs, hc, hs, degrees);
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) {
    throw std::runtime_error("incoming node " + std::to_string(u) +
                             " has zero attachment weight to every candidate");
  }
  for (double& x : w) x /= total;
  return w;
}

std::size_t expected_edge_count(std::size_t n_nodes, std::size_t m) {
  return m * (m + 1) / 2 + (n_nodes - m - 1) * m;
}

AttributedGraph generate(const GeneratorConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const std::size_t n = config.n_nodes;
  const std::size_t m = config.edges_per_node;

  NodeAttributes attrs;
  auto [cls, sens] = sample_attributes(config.joint, n, rng);
  attrs.cls = std::move(cls);
  attrs.sensitive = std::move(sens);
  attrs.features = generate_features(attrs.sensitive, config.feature_bias, config.feature_dim,
                                     config.feature_std, rng, config.mean_mode);

  const auto hc = build_compatibility(config.h_c);
  const auto hs = build_compatibility(config.h_s);

  std::vector<Edge> edges;
  edges.reserve(expected_edge_count(n, m));
  std::vector<std::size_t> degrees(n, 0);
  for (NodeId a = 0; a <= m; ++a) {
    for (NodeId b = a + 1; b <= m; ++b) edges.emplace_back(a, b);
    degrees[a] = m;
  }

  std::vector<double> weights;
  std::vector<NodeId> chosen;
  for (auto u = static_cast<NodeId>(m + 1); u < n; ++u) {
    weights.resize(u);
    for (NodeId v = 0; v < u; ++v) weights[v] = raw_weight(u, v, attrs, hc, hs, degrees);
    chosen.clear();
    for (std::size_t draw = 0; draw < m; ++draw) {
      const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
      if (!(total > 0.0)) {
        throw std::runtime_error("incoming node " + std::to_string(u) +
                                 " has zero attachment weight to every remaining candidate");
      }
      std::discrete_distribution<NodeId> pick(weights.begin(), weights.end());
      const NodeId v = pick(rng);
      weights[v] = 0.0;
      chosen.push_back(v);
    }
    for (NodeId v : chosen) {
      edges.emplace_back(v, u);
      ++degrees[v];
    }
    degrees[u] = m;
  }

  return {Graph::from_edges(n, edges), std::move(attrs)};
}

}  // namespace hetfair
