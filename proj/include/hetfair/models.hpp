#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hetfair/autodiff.hpp"
#include "hetfair/generator.hpp"
#include "hetfair/kvconfig.hpp"
#include "hetfair/predictions.hpp"
#include "hetfair/propagation.hpp"

namespace hetfair {

enum class ModelFamily { kGcn, kSgc, kSage, kH2gcn };
enum class DesignFamily { kHomophilous, kHeterophilous };

std::string_view family_name(ModelFamily f);
ModelFamily parse_model_family(std::string_view name);
std::string_view design_name(DesignFamily d);
DesignFamily parse_design_family(std::string_view name);
DesignFamily design_of(ModelFamily f);
/// {GCN, SGC} for homophilous designs, {SAGE, H2GCN} for heterophilous ones.
std::vector<ModelFamily> design_members(DesignFamily d);

struct ModelConfig {
  ModelFamily family = ModelFamily::kGcn;
  std::size_t hidden_dim = 16;
  std::size_t depth = 2;  // propagation hops of SGC
  double dropout = 0.5;
  double lr = 0.01;
  double weight_decay = 5e-4;
  std::size_t epochs = 300;
  std::uint64_t seed = 0;

  /// Defaults per family: dropout 0 for SGC, 0.5 otherwise.
  static ModelConfig defaults(ModelFamily family);
  void validate() const;

  /// Reads `model`, `hidden_dim`, `depth`, `dropout`, `lr`, `weight_decay`,
  /// `epochs`, `seed`; missing keys keep the family defaults.
  static ModelConfig from_kv(const KvConfig& kv);
  KvConfig to_kv() const;
};

/// Disjoint train / validation / test node sets at 50/25/25.
struct SplitMasks {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
};

/// Uniform random partition: round(n/2) train, round(n/4) val, the rest test.
/// Each list is sorted. Requires n >= 4.
SplitMasks make_splits(std::size_t n, std::uint64_t seed);

/// Per-graph constants shared by every model trained on that graph.
struct GraphInputs {
  Tensor features;
  PropagationOperators ops;
  std::size_t sgc_depth = 0;
  Tensor sgc_features;  // sym_norm^depth * features
};

GraphInputs prepare_inputs(const Graph& g, const Tensor& features, std::size_t sgc_depth = 2);

/// Glorot-uniform parameters in the order forward() consumes them.
std::vector<ad::Var> init_parameters(ModelFamily family, std::size_t in_dim,
                                     std::size_t hidden_dim, Rng& rng);

struct ForwardOptions {
  bool training = false;
  double dropout = 0.0;
  Rng* dropout_rng = nullptr;  // required when training with dropout > 0
};

/// Logits (n x 2).
///   GCN    logits = A relu(A X W0) W1
///   SGC    logits = A^k X W
///   SAGE   H' = relu([H | M1 H] W) twice, then a linear head
///   H2GCN  H0 = relu(X We), logits = [H0 | M1 H0 | M2 H0] Wf
/// with A the symmetric-normalized adjacency with self-loops and M1, M2 the
/// mean over 1-hop and exact-2-hop neighbors. Throws std::logic_error when
/// params do not match the family.
ad::Var forward(ModelFamily family, std::span<const ad::Var> params, const GraphInputs& inputs,
                const ForwardOptions& options = {});

struct TrainingTrace {
  std::vector<double> train_loss;
  std::vector<double> val_f1;
  std::size_t best_epoch = 0;
};

struct TrainResult {
  Predictions predictions;
  TrainingTrace trace;
  std::vector<Tensor> best_params;
  ModelConfig config;
};

/// Raised when a loss or gradient stops being finite.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t epoch, const std::string& what);
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Full-batch Adam training; keeps the parameters of the epoch with the best
/// validation F1 (earliest on ties) and predicts every node with them.
TrainResult train(const Graph& g, const NodeAttributes& attrs, const SplitMasks& splits,
                  const ModelConfig& cfg);
TrainResult train(const GraphInputs& inputs, const NodeAttributes& attrs,
                  const SplitMasks& splits, const ModelConfig& cfg);

struct TuningGrid {
  std::vector<double> lr = {0.01, 0.05};
  std::vector<std::size_t> hidden_dim = {16, 64};
};

/// Trains every grid point from `base` and returns the one with the best
/// validation F1.
TrainResult train_tuned(const GraphInputs& inputs, const NodeAttributes& attrs,
                        const SplitMasks& splits, const ModelConfig& base,
                        const TuningGrid& grid = {});

struct FamilyRun {
  ModelFamily model;
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  Predictions predictions;
};

/// Seed of run `run_index` of `model` under `base_seed`.
std::uint64_t run_seed(std::uint64_t base_seed, ModelFamily model, std::size_t run_index);

/// Trains each member of the design family `runs` times with default
/// hyperparameters (overridden by `overrides` when its keys are present).
/// Errors are rethrown tagged with model and run.
std::vector<FamilyRun> run_design_family(const Graph& g, const NodeAttributes& attrs,
                                         const SplitMasks& splits, DesignFamily family,
                                         std::size_t runs, std::uint64_t base_seed,
                                         const KvConfig& overrides = {});

enum class SplitTag { kTrain, kVal, kTest };

/// predictions.csv: node_id,true_class,sensitive,predicted_class,prob_class1,split
void write_predictions_csv(const std::filesystem::path& path, const Predictions& preds,
                           const NodeAttributes& attrs, const SplitMasks& splits);

struct LoadedPredictions {
  Predictions predictions;
  LabelVector truth;
  LabelVector sensitive;
  SplitMasks splits;
};
LoadedPredictions read_predictions_csv(const std::filesystem::path& path);

/// trace.csv: epoch,train_loss,val_f1
void write_trace_csv(const std::filesystem::path& path, const TrainingTrace& trace);

}  // namespace hetfair
