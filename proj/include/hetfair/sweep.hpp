#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hetfair/fairness.hpp"
#include "hetfair/kvconfig.hpp"
#include "hetfair/models.hpp"

namespace hetfair {

enum class JointMode { kUniform, kSkew3x };

std::string_view joint_mode_name(JointMode mode);
JointMode parse_joint_mode(std::string_view name);

struct SweepSpec {
  std::vector<double> h_c_list = {0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<double> h_s_list = {0.1, 0.3, 0.5, 0.7, 0.9};
  JointMode joint = JointMode::kUniform;
  std::vector<double> e_list = {1.0};
  std::size_t graphs_per_cell = 10;
  std::size_t runs_per_model = 3;
  std::vector<ModelFamily> models = {ModelFamily::kGcn, ModelFamily::kSgc, ModelFamily::kSage,
                                     ModelFamily::kH2gcn};
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir = "results";
  std::string sweep_id = "sweep";

  std::size_t n_nodes = 1000;
  std::size_t edges_per_node = 10;
  int hops = 1;                  // radius of the stratifying local homophily
  bool evaluate_all_nodes = false;  // default: test split only
  bool tune = false;             // lr x hidden grid per run
  bool write_predictions = true;
  unsigned workers = 1;
  KvConfig model_overrides;      // keys of ModelConfig (epochs, lr, ...)

  /// 3 graphs per cell, 1 run per model.
  static SweepSpec quick();

  void validate() const;
  std::size_t cell_count() const;
  std::size_t run_count() const;

  static SweepSpec from_kv(const KvConfig& kv);
  KvConfig to_kv() const;
  static std::vector<std::string> known_keys();

  std::filesystem::path root() const { return output_dir / sweep_id; }
};

struct CellId {
  double h_c = 0.0;
  double h_s = 0.0;
  double e = 1.0;
  JointMode joint = JointMode::kUniform;

  std::string dir_name() const;
  auto operator<=>(const CellId&) const = default;
};

std::uint64_t graph_seed(std::uint64_t master_seed, const CellId& cell, std::size_t graph_index);

struct RunRecord {
  CellId cell;
  std::size_t graph_index = 0;
  std::uint64_t graph_seed = 0;
  ModelFamily model = ModelFamily::kGcn;
  std::size_t run_index = 0;
  std::uint64_t run_seed = 0;
  FairnessReport global;
  StratifiedReport stratified;
  std::filesystem::path report_path;  // relative to the sweep root
  double seconds = 0.0;
  std::optional<std::string> error;
};

struct SweepResult {
  std::filesystem::path root;
  std::vector<RunRecord> records;  // ordered by (cell, graph, model, run)
  std::size_t resumed = 0;         // runs loaded from a previous invocation
  std::vector<const RunRecord*> failures() const;
  /// Pooled over every cell of the sweep.
  AggregateGrid grid(DesignFamily family) const;
};

/// Generates, trains and evaluates every (cell, graph, model, run). Existing
/// finished runs under the sweep root are reloaded instead of retrained.
/// Writes per-run, per-cell and aggregate CSVs plus manifest.json.
SweepResult run_sweep(const SweepSpec& spec);

struct BiasPoint {
  double e = 0.0;
  DesignFamily family = DesignFamily::kHomophilous;
  std::optional<double> delta_sp;  // mean of run-level test metrics
  std::optional<double> delta_eo;
  double f1 = 0.0;
  std::size_t runs = 0;
};

struct BiasSweepResult {
  SweepResult sweep;
  std::vector<BiasPoint> points;  // ordered by (e, family)
};

/// Uniform joint, single h_s (spec.h_s_list must hold one value), sweeps
/// spec.e_list; writes aggregate/fig4_bias.csv.
BiasSweepResult run_bias_sweep(SweepSpec spec);

/// Default e values of the bias sweep.
std::vector<double> default_bias_levels();

}  // namespace hetfair
