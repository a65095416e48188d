#include "hetfair/fairness.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hetfair/csv.hpp"
#include "hetfair/kvconfig.hpp"

namespace hetfair {

Predictions Predictions::from_probabilities(std::vector<double> prob_class1) {
  std::vector<std::uint8_t> hard(prob_class1.size());
  for (std::size_t i = 0; i < hard.size(); ++i) {
    if (!(prob_class1[i] >= 0.0 && prob_class1[i] <= 1.0)) {
      throw std::invalid_argument("class-1 probability outside [0, 1] at node " +
                                  std::to_string(i));
    }
    hard[i] = prob_class1[i] >= 0.5 ? 1 : 0;
  }
  return {LabelVector(std::move(hard)), std::move(prob_class1)};
}

namespace {

struct RateGap {
  std::size_t positives[2] = {0, 0};
  std::size_t totals[2] = {0, 0};

  std::optional<double> gap() const {
    if (totals[0] == 0 || totals[1] == 0) return std::nullopt;
    const double r1 = static_cast<double>(positives[1]) / static_cast<double>(totals[1]);
    const double r0 = static_cast<double>(positives[0]) / static_cast<double>(totals[0]);
    return std::abs(r1 - r0);
  }
};

void check_sizes(const Predictions& preds, const LabelVector& labels) {
  if (preds.size() != labels.size()) {
    throw std::invalid_argument("predictions cover " + std::to_string(preds.size()) +
                                " nodes but labels cover " + std::to_string(labels.size()));
  }
}

}  // namespace

std::optional<double> statistical_parity(const Predictions& preds, const LabelVector& sens,
                                         std::span<const NodeId> subset) {
  check_sizes(preds, sens);
  RateGap g;
  for (NodeId u : subset) {
    ++g.totals[sens[u]];
    g.positives[sens[u]] += preds.predicted[u];
  }
  return g.gap();
}

std::optional<double> equal_opportunity(const Predictions& preds, const LabelVector& truth,
                                        const LabelVector& sens, std::span<const NodeId> subset) {
  check_sizes(preds, sens);
  check_sizes(preds, truth);
  RateGap g;
  for (NodeId u : subset) {
    if (truth[u] != 1) continue;
    ++g.totals[sens[u]];
    g.positives[sens[u]] += preds.predicted[u];
  }
  return g.gap();
}

double f1_binary(const Predictions& preds, const LabelVector& truth,
                 std::span<const NodeId> subset) {
  check_sizes(preds, truth);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (NodeId u : subset) {
    const bool p = preds.predicted[u] == 1;
    const bool t = truth[u] == 1;
    tp += p && t;
    fp += p && !t;
    fn += !p && t;
  }
  // 2PR / (P + R) == 2TP / (2TP + FP + FN), and is 0 whenever TP is 0.
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

double accuracy(const Predictions& preds, const LabelVector& truth,
                std::span<const NodeId> subset) {
  check_sizes(preds, truth);
  if (subset.empty()) throw std::invalid_argument("accuracy over an empty subset");
  std::size_t correct = 0;
  for (NodeId u : subset) correct += preds.predicted[u] == truth[u];
  return static_cast<double>(correct) / static_cast<double>(subset.size());
}

FairnessReport fairness_report(const Predictions& preds, const LabelVector& truth,
                               const LabelVector& sens, std::span<const NodeId> subset) {
  if (subset.empty()) throw std::invalid_argument("fairness report over an empty subset");
  FairnessReport r;
  r.n_nodes = subset.size();
  r.f1 = f1_binary(preds, truth, subset);
  r.accuracy = accuracy(preds, truth, subset);
  r.delta_sp = statistical_parity(preds, sens, subset);
  r.delta_eo = equal_opportunity(preds, truth, sens, subset);
  for (NodeId u : subset) ++r.group_counts[sens[u]][truth[u]];
  return r;
}

HomophilyBin to_bin(double class_hom, double sens_hom) {
  return {bin_index(class_hom, kBinWidth, kBinsPerAxis),
          bin_index(sens_hom, kBinWidth, kBinsPerAxis)};
}

double bin_lower(std::size_t index) {
  return static_cast<double>(index) / static_cast<double>(kBinsPerAxis);
}
double bin_upper(std::size_t index) {
  return index + 1 >= kBinsPerAxis ? 1.0 : bin_lower(index + 1);
}

Stratification stratify(const LocalHomophilyProfile& profile, int k,
                        std::span<const NodeId> eval_nodes) {
  Stratification out;
  for (NodeId u : eval_nodes) {
    const auto ch = profile.class_hom(u, k);
    const auto sh = profile.sens_hom(u, k);
    if (!ch || !sh) {
      out.undefined.push_back(u);
      continue;
    }
    out.bins[to_bin(*ch, *sh)].push_back(u);
  }
  return out;
}

StratifiedReport stratified_report(const Predictions& preds, const NodeAttributes& attrs,
                                   const LocalHomophilyProfile& profile, int k,
                                   std::span<const NodeId> eval_nodes) {
  const auto strata = stratify(profile, k, eval_nodes);
  StratifiedReport report;
  report.undefined_node_count = strata.undefined.size();
  for (const auto& [bin, nodes] : strata.bins) {
    report.bins[bin] = fairness_report(preds, attrs.cls, attrs.sensitive, nodes);
  }
  return report;
}

namespace {

std::optional<double> metric_of(const FairnessReport& r, std::size_t m) {
  switch (static_cast<Metric>(m)) {
    case Metric::kF1:
      return r.f1;
    case Metric::kDeltaSp:
      return r.delta_sp;
    case Metric::kDeltaEo:
      return r.delta_eo;
  }
  return std::nullopt;
}

}  // namespace

AggregateGrid aggregate_reports(std::span<const StratifiedReport> reports) {
  struct Acc {
    double sum = 0.0;
    std::size_t count = 0, excluded = 0;
  };
  std::map<HomophilyBin, std::array<Acc, kMetricCount>> acc;
  AggregateGrid grid;
  for (const auto& report : reports) {
    for (const auto& [bin, r] : report.bins) {
      grid.node_counts[bin] += r.n_nodes;
      auto& cell = acc[bin];
      for (std::size_t m = 0; m < kMetricCount; ++m) {
        if (const auto v = metric_of(r, m)) {
          cell[m].sum += *v;
          ++cell[m].count;
        } else {
          ++cell[m].excluded;
        }
      }
    }
  }
  for (const auto& [bin, cell] : acc) {
    auto& out = grid.bins[bin];
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      if (cell[m].count == 0) continue;
      out[m] = MeanValue{cell[m].sum / static_cast<double>(cell[m].count), cell[m].count,
                         cell[m].excluded};
    }
  }
  return grid;
}

DesignComparison design_comparison(const AggregateGrid& het, const AggregateGrid& hom) {
  DesignComparison out;
  bool any = false;
  for (const auto& [bin, het_cell] : het.bins) {
    const auto it = hom.bins.find(bin);
    if (it == hom.bins.end()) continue;
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      const auto& a = het_cell[m];
      const auto& b = it->second[m];
      if (!a || !b) continue;
      out.bins[bin][m] = MetricDifference{a->mean - b->mean, a->count, b->count};
      any = true;
    }
  }
  if (!any) throw std::runtime_error("design comparison: no bin is defined for both families");
  return out;
}

DesignComparison design_comparison(std::span<const StratifiedReport> het_reports,
                                   std::span<const StratifiedReport> hom_reports) {
  return design_comparison(aggregate_reports(het_reports), aggregate_reports(hom_reports));
}

HighHsSlice high_hs_slice(const LocalHomophilyProfile& profile, const Predictions& preds,
                          const NodeAttributes& attrs, double threshold,
                          std::span<const NodeId> eval_nodes, int k) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("high-h_s threshold must lie in [0, 1]");
  }
  HighHsSlice slice;
  slice.eval_nodes = eval_nodes.size();
  std::vector<NodeId> members;
  std::array<std::vector<NodeId>, kBinsPerAxis> by_bin;
  for (NodeId u : eval_nodes) {
    const auto sh = profile.sens_hom(u, k);
    const auto ch = profile.class_hom(u, k);
    if (!sh || !ch || !(*sh > threshold)) continue;
    members.push_back(u);
    by_bin[bin_index(*ch, kBinWidth, kBinsPerAxis)].push_back(u);
  }
  if (members.empty()) {
    throw std::runtime_error("no evaluated node has sensitive homophily above " +
                             format_double(threshold));
  }
  slice.slice_nodes = members.size();
  slice.overall = fairness_report(preds, attrs.cls, attrs.sensitive, members);
  for (std::size_t b = 0; b < kBinsPerAxis; ++b) {
    if (!by_bin[b].empty()) {
      slice.by_class_bin[b] = fairness_report(preds, attrs.cls, attrs.sensitive, by_bin[b]);
    }
  }
  return slice;
}

namespace {

std::string cell(std::optional<double> v) { return v ? format_double(*v) : std::string(); }

std::vector<std::string> bin_fields(const HomophilyBin& bin) {
  return {format_double(bin_lower(bin.class_bin)), format_double(bin_upper(bin.class_bin)),
          format_double(bin_lower(bin.sens_bin)), format_double(bin_upper(bin.sens_bin))};
}

}  // namespace

void write_stratified_report_csv(const std::filesystem::path& path, const StratifiedReport& r) {
  CsvWriter out(path);
  out.row({"class_bin_lo", "class_bin_hi", "sens_bin_lo", "sens_bin_hi", "n_nodes", "f1", "acc",
           "delta_sp", "delta_eo"});
  for (const auto& [bin, rep] : r.bins) {
    auto row = bin_fields(bin);
    row.insert(row.end(), {std::to_string(rep.n_nodes), format_double(rep.f1),
                           format_double(rep.accuracy), cell(rep.delta_sp), cell(rep.delta_eo)});
    out.row(row);
  }
  out.close();
}

void write_aggregate_grids_csv(const std::filesystem::path& path,
                               std::span<const NamedGrid> grids) {
  CsvWriter out(path);
  out.row({"family", "class_bin_lo", "class_bin_hi", "sens_bin_lo", "sens_bin_hi", "n_nodes",
           "f1", "f1_count", "delta_sp", "delta_sp_count", "delta_eo", "delta_eo_count"});
  for (const auto& [family, grid] : grids) {
    for (const auto& [bin, values] : grid.bins) {
      std::vector<std::string> row = {family};
      const auto bf = bin_fields(bin);
      row.insert(row.end(), bf.begin(), bf.end());
      row.push_back(std::to_string(grid.node_counts.at(bin)));
      for (const auto& v : values) {
        row.push_back(v ? format_double(v->mean) : std::string());
        row.push_back(std::to_string(v ? v->count : 0));
      }
      out.row(row);
    }
  }
  out.close();
}

void write_design_comparison_csv(const std::filesystem::path& path, const DesignComparison& d) {
  CsvWriter out(path);
  out.row({"class_bin_lo", "class_bin_hi", "sens_bin_lo", "sens_bin_hi", "diff_f1",
           "diff_delta_sp", "diff_delta_eo", "het_runs", "hom_runs"});
  for (const auto& [bin, values] : d.bins) {
    auto row = bin_fields(bin);
    std::size_t het = 0, hom = 0;
    for (const auto& v : values) {
      row.push_back(v ? format_double(v->value) : std::string());
      if (v) {
        het = std::max(het, v->het_count);
        hom = std::max(hom, v->hom_count);
      }
    }
    row.push_back(std::to_string(het));
    row.push_back(std::to_string(hom));
    out.row(row);
  }
  out.close();
}

void write_high_hs_slice_csv(const std::filesystem::path& path, const HighHsSlice& slice) {
  CsvWriter out(path);
  out.row({"class_bin_lo", "class_bin_hi", "n_nodes", "f1", "acc", "delta_sp", "delta_eo"});
  auto emit = [&](const std::string& lo, const std::string& hi, const FairnessReport& r) {
    out.row({lo, hi, std::to_string(r.n_nodes), format_double(r.f1), format_double(r.accuracy),
             cell(r.delta_sp), cell(r.delta_eo)});
  };
  for (std::size_t b = 0; b < kBinsPerAxis; ++b) {
    if (slice.by_class_bin[b]) {
      emit(format_double(bin_lower(b)), format_double(bin_upper(b)), *slice.by_class_bin[b]);
    }
  }
  emit("all", "all", slice.overall);
  out.close();
}

}  // namespace hetfair
