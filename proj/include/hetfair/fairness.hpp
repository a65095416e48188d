#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetfair/generator.hpp"
#include "hetfair/homophily.hpp"
#include "hetfair/predictions.hpp"

namespace hetfair {

/// |P(pred = 1 | s = 1) - P(pred = 1 | s = 0)| over `subset`; nullopt if a
/// sensitive group is absent from the subset.
std::optional<double> statistical_parity(const Predictions& preds, const LabelVector& sens,
                                         std::span<const NodeId> subset);

/// Statistical parity restricted to nodes whose true class is 1.
std::optional<double> equal_opportunity(const Predictions& preds, const LabelVector& truth,
                                        const LabelVector& sens, std::span<const NodeId> subset);

/// F1 with class 1 as positive; 0 when precision + recall is 0.
double f1_binary(const Predictions& preds, const LabelVector& truth,
                 std::span<const NodeId> subset);

double accuracy(const Predictions& preds, const LabelVector& truth,
                std::span<const NodeId> subset);

struct FairnessReport {
  std::size_t n_nodes = 0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::optional<double> delta_sp;
  std::optional<double> delta_eo;
  std::array<std::array<std::size_t, 2>, 2> group_counts{};  // [s][c]
};

/// All metrics over a nonempty subset. Throws std::invalid_argument if empty.
FairnessReport fairness_report(const Predictions& preds, const LabelVector& truth,
                               const LabelVector& sens, std::span<const NodeId> subset);

inline constexpr double kBinWidth = 0.2;
inline constexpr std::size_t kBinsPerAxis = 5;

struct HomophilyBin {
  std::size_t class_bin = 0;
  std::size_t sens_bin = 0;

  auto operator<=>(const HomophilyBin&) const = default;
};

/// min(floor(h / 0.2), 4) on each axis.
HomophilyBin to_bin(double class_hom, double sens_hom);
double bin_lower(std::size_t index);
double bin_upper(std::size_t index);

struct Stratification {
  std::map<HomophilyBin, std::vector<NodeId>> bins;
  std::vector<NodeId> undefined;
};

/// Partitions `eval_nodes` by their k-hop (class, sensitive) homophily bin.
Stratification stratify(const LocalHomophilyProfile& profile, int k,
                        std::span<const NodeId> eval_nodes);

struct StratifiedReport {
  std::map<HomophilyBin, FairnessReport> bins;
  std::size_t undefined_node_count = 0;
};

StratifiedReport stratified_report(const Predictions& preds, const NodeAttributes& attrs,
                                   const LocalHomophilyProfile& profile, int k,
                                   std::span<const NodeId> eval_nodes);

enum class Metric { kF1 = 0, kDeltaSp = 1, kDeltaEo = 2 };
inline constexpr std::size_t kMetricCount = 3;

/// Mean of a metric over the defined entries of several reports.
struct MeanValue {
  double mean = 0.0;
  std::size_t count = 0;     // reports contributing a defined value
  std::size_t excluded = 0;  // reports holding the bin with the value undefined
};

/// Per-bin means across a list of stratified reports (one design family).
struct AggregateGrid {
  std::map<HomophilyBin, std::array<std::optional<MeanValue>, kMetricCount>> bins;
  std::map<HomophilyBin, std::size_t> node_counts;  // summed over reports
};

AggregateGrid aggregate_reports(std::span<const StratifiedReport> reports);

struct MetricDifference {
  double value = 0.0;  // heterophilous mean - homophilous mean
  std::size_t het_count = 0;
  std::size_t hom_count = 0;
};

struct DesignComparison {
  std::map<HomophilyBin, std::array<std::optional<MetricDifference>, kMetricCount>> bins;
};

/// Heterophilous-minus-homophilous per-bin means. Throws std::runtime_error
/// if no bin has a defined value for both families.
DesignComparison design_comparison(std::span<const StratifiedReport> het_reports,
                                   std::span<const StratifiedReport> hom_reports);
DesignComparison design_comparison(const AggregateGrid& het, const AggregateGrid& hom);

struct HighHsSlice {
  std::array<std::optional<FairnessReport>, kBinsPerAxis> by_class_bin;
  FairnessReport overall;
  std::size_t slice_nodes = 0;
  std::size_t eval_nodes = 0;

  double coverage() const {
    return eval_nodes ? static_cast<double>(slice_nodes) / static_cast<double>(eval_nodes) : 0.0;
  }
};

/// Restricts to nodes with k-hop sensitive homophily strictly above
/// `threshold`, then bins by class homophily. Throws std::runtime_error when
/// the slice is empty.
HighHsSlice high_hs_slice(const LocalHomophilyProfile& profile, const Predictions& preds,
                          const NodeAttributes& attrs, double threshold,
                          std::span<const NodeId> eval_nodes, int k = 1);

void write_stratified_report_csv(const std::filesystem::path& path, const StratifiedReport& r);
struct NamedGrid {
  std::string family;
  AggregateGrid grid;
};
/// One row per (family, bin): family,class_bin_lo,...,n_nodes, then mean and
/// contributing count for f1, delta_sp and delta_eo.
void write_aggregate_grids_csv(const std::filesystem::path& path,
                               std::span<const NamedGrid> grids);
void write_design_comparison_csv(const std::filesystem::path& path, const DesignComparison& d);
void write_high_hs_slice_csv(const std::filesystem::path& path, const HighHsSlice& slice);

}  // namespace hetfair
