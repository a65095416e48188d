#include "hetfair/models.hpp"

#include <algorithm>
#include <list>
#include <cmath>
#include <numeric>

#include "hetfair/csv.hpp"
#include "hetfair/fairness.hpp"
#include "hetfair/optimizer.hpp"

namespace hetfair {

std::string_view family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::kGcn:
      return "gcn";
    case ModelFamily::kSgc:
      return "sgc";
    case ModelFamily::kSage:
      return "sage";
    case ModelFamily::kH2gcn:
      return "h2gcn";
  }
  return "?";
}

ModelFamily parse_model_family(std::string_view name) {
  for (auto f : {ModelFamily::kGcn, ModelFamily::kSgc, ModelFamily::kSage, ModelFamily::kH2gcn}) {
    if (family_name(f) == name) return f;
  }
  throw ConfigError("unknown model `" + std::string(name) + "` (expected gcn, sgc, sage, h2gcn)");
}

std::string_view design_name(DesignFamily d) {
  return d == DesignFamily::kHomophilous ? "homophilous" : "heterophilous";
}

DesignFamily parse_design_family(std::string_view name) {
  if (name == "homophilous") return DesignFamily::kHomophilous;
  if (name == "heterophilous") return DesignFamily::kHeterophilous;
  throw ConfigError("unknown design family `" + std::string(name) + "`");
}

DesignFamily design_of(ModelFamily f) {
  return f == ModelFamily::kGcn || f == ModelFamily::kSgc ? DesignFamily::kHomophilous
                                                          : DesignFamily::kHeterophilous;
}

std::vector<ModelFamily> design_members(DesignFamily d) {
  if (d == DesignFamily::kHomophilous) return {ModelFamily::kGcn, ModelFamily::kSgc};
  return {ModelFamily::kSage, ModelFamily::kH2gcn};
}

ModelConfig ModelConfig::defaults(ModelFamily family) {
  ModelConfig c;
  c.family = family;
  c.dropout = family == ModelFamily::kSgc ? 0.0 : 0.5;
  return c;
}

void ModelConfig::validate() const {
  if (hidden_dim == 0) throw ConfigError("hidden_dim must be positive");
  if (depth == 0) throw ConfigError("depth must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be nonnegative");
  if (epochs == 0) throw ConfigError("epochs must be positive");
}

ModelConfig ModelConfig::from_kv(const KvConfig& kv) {
  auto c = defaults(parse_model_family(kv.get_string("model", "gcn")));
  c.hidden_dim = static_cast<std::size_t>(kv.get_uint("hidden_dim", c.hidden_dim));
  c.depth = static_cast<std::size_t>(kv.get_uint("depth", c.depth));
  c.dropout = kv.get_double("dropout", c.dropout);
  c.lr = kv.get_double("lr", c.lr);
  c.weight_decay = kv.get_double("weight_decay", c.weight_decay);
  c.epochs = static_cast<std::size_t>(kv.get_uint("epochs", c.epochs));
  c.seed = kv.get_uint("seed", c.seed);
  c.validate();
  return c;
}

KvConfig ModelConfig::to_kv() const {
  KvConfig kv;
  kv.set("model", std::string(family_name(family)));
  kv.set("hidden_dim", std::to_string(hidden_dim));
  kv.set("depth", std::to_string(depth));
  kv.set("dropout", format_double(dropout));
  kv.set("lr", format_double(lr));
  kv.set("weight_decay", format_double(weight_decay));
  kv.set("epochs", std::to_string(epochs));
  kv.set("seed", std::to_string(seed));
  return kv;
}

SplitMasks make_splits(std::size_t n, std::uint64_t seed) {
  if (n < 4) throw std::invalid_argument("need at least 4 nodes to split");
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * 0.5));
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * 0.25));
  SplitMasks s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

GraphInputs prepare_inputs(const Graph& g, const Tensor& features, std::size_t sgc_depth) {
  if (features.rows() != g.n_nodes()) {
    throw std::invalid_argument("feature matrix " + features.shape_string() + " for a graph of " +
                                std::to_string(g.n_nodes()) + " nodes");
  }
  GraphInputs in;
  in.features = features;
  in.ops = build_propagation_matrices(g);
  in.sgc_depth = sgc_depth;
  in.sgc_features = features;
  for (std::size_t i = 0; i < sgc_depth; ++i) in.sgc_features = in.ops.sym_norm.multiply(in.sgc_features);
  return in;
}

namespace {

constexpr std::size_t kClasses = 2;

ad::Var glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor w(fan_in, fan_out);
  for (auto& v : w.values()) v = dist(rng);
  return ad::parameter(std::move(w));
}

struct Shape {
  std::size_t rows, cols;
};

std::vector<Shape> parameter_shapes(ModelFamily family, std::size_t d, std::size_t h) {
  switch (family) {
    case ModelFamily::kGcn:
      return {{d, h}, {h, kClasses}};
    case ModelFamily::kSgc:
      return {{d, kClasses}};
    case ModelFamily::kSage:
      return {{2 * d, h}, {2 * h, h}, {h, kClasses}};
    case ModelFamily::kH2gcn:
      return {{d, h}, {3 * h, kClasses}};
  }
  return {};
}

ad::Var maybe_dropout(const ad::Var& x, const ForwardOptions& opt) {
  if (!opt.training || opt.dropout <= 0.0) return x;
  if (!opt.dropout_rng) throw std::logic_error("training-mode dropout needs an rng");
  return ad::dropout_mask_apply(x, ad::dropout_mask(x.rows(), x.cols(), opt.dropout, *opt.dropout_rng));
}

}  // namespace

std::vector<ad::Var> init_parameters(ModelFamily family, std::size_t in_dim,
                                     std::size_t hidden_dim, Rng& rng) {
  std::vector<ad::Var> params;
  for (const auto& s : parameter_shapes(family, in_dim, hidden_dim)) {
    params.push_back(glorot(s.rows, s.cols, rng));
  }
  return params;
}

ad::Var forward(ModelFamily family, std::span<const ad::Var> params, const GraphInputs& inputs,
                const ForwardOptions& opt) {
  const std::size_t d = inputs.features.cols();
  if (params.empty()) throw std::logic_error("forward with uninitialized parameters");
  const std::size_t h = family == ModelFamily::kSgc ? 0 : params[0].cols();
  const auto shapes = parameter_shapes(family, d, h);
  if (params.size() != shapes.size()) {
    throw std::logic_error(std::string(family_name(family)) + " expects " +
                           std::to_string(shapes.size()) + " parameter tensors, got " +
                           std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (!params[i].defined() || params[i].rows() != shapes[i].rows ||
        params[i].cols() != shapes[i].cols) {
      throw std::logic_error(std::string(family_name(family)) + " parameter " +
                             std::to_string(i) + " is uninitialized or misshapen");
    }
  }

  const auto& ops = inputs.ops;
  switch (family) {
    case ModelFamily::kGcn: {
      auto x = maybe_dropout(ad::constant(inputs.features), opt);
      auto h1 = ad::relu(ad::spmm(ops.sym_norm, ad::matmul(x, params[0])));
      h1 = maybe_dropout(h1, opt);
      return ad::spmm(ops.sym_norm, ad::matmul(h1, params[1]));
    }
    case ModelFamily::kSgc: {
      auto x = maybe_dropout(ad::constant(inputs.sgc_features), opt);
      return ad::matmul(x, params[0]);
    }
    case ModelFamily::kSage: {
      auto layer = [&](const ad::Var& in, const ad::Var& w) {
        auto x = maybe_dropout(in, opt);
        return ad::relu(ad::matmul(ad::concat_cols({x, ad::spmm(ops.row_norm_1hop, x)}), w));
      };
      auto h1 = layer(ad::constant(inputs.features), params[0]);
      auto h2 = layer(h1, params[1]);
      return ad::matmul(maybe_dropout(h2, opt), params[2]);
    }
    case ModelFamily::kH2gcn: {
      auto x = maybe_dropout(ad::constant(inputs.features), opt);
      auto h0 = ad::relu(ad::matmul(x, params[0]));
      auto r = ad::concat_cols(
          {h0, ad::spmm(ops.row_norm_1hop, h0), ad::spmm(ops.row_norm_2hop, h0)});
      return ad::matmul(maybe_dropout(r, opt), params[1]);
    }
  }
  throw std::logic_error("unknown model family");
}

TrainingDiverged::TrainingDiverged(std::size_t epoch, const std::string& what)
    : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ": " + what),
      epoch_(epoch) {}

namespace {

Predictions predict(ModelFamily family, std::span<const ad::Var> params, const GraphInputs& in) {
  const Tensor probs = ad::softmax(forward(family, params, in).value());
  std::vector<double> p1(probs.rows());
  for (std::size_t r = 0; r < probs.rows(); ++r) p1[r] = probs(r, 1);
  return Predictions::from_probabilities(std::move(p1));
}

}  // namespace

TrainResult train(const Graph& g, const NodeAttributes& attrs, const SplitMasks& splits,
                  const ModelConfig& cfg) {
  return train(prepare_inputs(g, attrs.features, cfg.depth), attrs, splits, cfg);
}

TrainResult train(const GraphInputs& inputs, const NodeAttributes& attrs,
                  const SplitMasks& splits, const ModelConfig& cfg) {
  cfg.validate();
  if (attrs.cls.size() != inputs.features.rows()) {
    throw std::invalid_argument("attributes and graph inputs disagree on node count");
  }
  if (cfg.family == ModelFamily::kSgc && cfg.depth != inputs.sgc_depth) {
    throw std::invalid_argument("SGC depth " + std::to_string(cfg.depth) +
                                " differs from the prepared propagation depth " +
                                std::to_string(inputs.sgc_depth));
  }
  if (splits.train.empty() || splits.val.empty()) {
    throw std::invalid_argument("training needs nonempty train and validation splits");
  }

  Rng init_rng(derive_seed({cfg.seed, 1}));
  Rng dropout_rng(derive_seed({cfg.seed, 2}));
  auto params = init_parameters(cfg.family, inputs.features.cols(), cfg.hidden_dim, init_rng);
  Adam adam(params, AdamOptions{.lr = cfg.lr, .weight_decay = cfg.weight_decay});

  TrainResult result;
  result.config = cfg;
  double best_f1 = -1.0;
  const ForwardOptions train_mode{.training = true, .dropout = cfg.dropout,
                                  .dropout_rng = &dropout_rng};
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_value = 0.0;
    try {
      adam.zero_grad();
      auto logits = forward(cfg.family, params, inputs, train_mode);
      auto loss = ad::cross_entropy_masked(logits, attrs.cls.values(), splits.train);
      loss_value = loss.value()[0];
      ad::backward(loss);
      adam.step();
    } catch (const std::domain_error& e) {
      throw TrainingDiverged(epoch, e.what());
    }
    Predictions preds;
    try {
      preds = predict(cfg.family, params, inputs);
    } catch (const std::exception& e) {
      throw TrainingDiverged(epoch, e.what());
    }
    const double val_f1 = f1_binary(preds, attrs.cls, splits.val);
    result.trace.train_loss.push_back(loss_value);
    result.trace.val_f1.push_back(val_f1);
    if (val_f1 > best_f1) {
      best_f1 = val_f1;
      result.trace.best_epoch = epoch;
      result.predictions = std::move(preds);
      result.best_params.clear();
      for (const auto& p : params) result.best_params.push_back(p.value());
    }
  }
  return result;
}

TrainResult train_tuned(const GraphInputs& inputs, const NodeAttributes& attrs,
                        const SplitMasks& splits, const ModelConfig& base,
                        const TuningGrid& grid) {
  std::optional<TrainResult> best;
  double best_f1 = -1.0;
  for (double lr : grid.lr) {
    for (std::size_t hidden : grid.hidden_dim) {
      auto cfg = base;
      cfg.lr = lr;
      cfg.hidden_dim = hidden;
      auto r = train(inputs, attrs, splits, cfg);
      const double f1 = r.trace.val_f1[r.trace.best_epoch];
      if (f1 > best_f1) {
        best_f1 = f1;
        best = std::move(r);
      }
    }
  }
  if (!best) throw std::invalid_argument("empty tuning grid");
  return std::move(*best);
}

std::uint64_t run_seed(std::uint64_t base_seed, ModelFamily model, std::size_t run_index) {
  return derive_seed({base_seed, seed_word(family_name(model)), run_index});
}

std::vector<FamilyRun> run_design_family(const Graph& g, const NodeAttributes& attrs,
                                         const SplitMasks& splits, DesignFamily family,
                                         std::size_t runs, std::uint64_t base_seed,
                                         const KvConfig& overrides) {
  std::vector<FamilyRun> out;
  std::list<std::pair<std::size_t, GraphInputs>> cache;
  for (ModelFamily model : design_members(family)) {
    KvConfig kv = overrides;
    kv.set("model", std::string(family_name(model)));
    auto cfg = ModelConfig::from_kv(kv);
    const GraphInputs* inputs = nullptr;
    for (const auto& [depth, in] : cache) {
      if (depth == cfg.depth) inputs = &in;
    }
    if (!inputs) inputs = &cache.emplace_back(cfg.depth, prepare_inputs(g, attrs.features, cfg.depth)).second;
    for (std::size_t r = 0; r < runs; ++r) {
      cfg.seed = run_seed(base_seed, model, r);
      try {
        auto result = train(*inputs, attrs, splits, cfg);
        out.push_back({model, r, cfg.seed, std::move(result.predictions)});
      } catch (const std::exception& e) {
        throw std::runtime_error(std::string(family_name(model)) + " run " + std::to_string(r) +
                                 ": " + e.what());
      }
    }
  }
  return out;
}

void write_predictions_csv(const std::filesystem::path& path, const Predictions& preds,
                           const NodeAttributes& attrs, const SplitMasks& splits) {
  const std::size_t n = preds.size();
  if (attrs.cls.size() != n) throw std::invalid_argument("predictions and attributes disagree");
  std::vector<const char*> tag(n, "none");
  for (NodeId u : splits.train) tag.at(u) = "train";
  for (NodeId u : splits.val) tag.at(u) = "val";
  for (NodeId u : splits.test) tag.at(u) = "test";
  CsvWriter out(path);
  out.row({"node_id", "true_class", "sensitive", "predicted_class", "prob_class1", "split"});
  for (NodeId u = 0; u < n; ++u) {
    out.row({std::to_string(u), std::to_string(attrs.cls[u]), std::to_string(attrs.sensitive[u]),
             std::to_string(preds.predicted[u]), format_double(preds.prob_class1[u]), tag[u]});
  }
  out.close();
}

LoadedPredictions read_predictions_csv(const std::filesystem::path& path) {
  const auto table = read_csv(path, ',');
  const auto id = table.column("node_id");
  const auto tc = table.column("true_class");
  const auto sc = table.column("sensitive");
  const auto pc = table.column("prob_class1");
  const auto pred_col = table.column("predicted_class");
  const auto split = table.column("split");
  const std::size_t n = table.rows.size();
  std::vector<std::uint8_t> truth(n), sens(n);
  std::vector<double> probs(n);
  LoadedPredictions out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    const auto where = path.string() + ":" + std::to_string(table.line_numbers[i]);
    if (std::stoul(row[id]) != i) throw std::runtime_error(where + ": node ids must be 0..n-1 in order");
    truth[i] = static_cast<std::uint8_t>(std::stoul(row[tc]));
    sens[i] = static_cast<std::uint8_t>(std::stoul(row[sc]));
    probs[i] = std::stod(row[pc]);
    const auto& tag = row[split];
    if (tag == "train") {
      out.splits.train.push_back(static_cast<NodeId>(i));
    } else if (tag == "val") {
      out.splits.val.push_back(static_cast<NodeId>(i));
    } else if (tag == "test") {
      out.splits.test.push_back(static_cast<NodeId>(i));
    }
    const auto hard = static_cast<std::uint8_t>(std::stoul(row[pred_col]));
    if (hard != (probs[i] >= 0.5 ? 1 : 0)) {
      throw std::runtime_error(where + ": predicted_class disagrees with prob_class1");
    }
  }
  out.predictions = Predictions::from_probabilities(std::move(probs));
  out.truth = LabelVector(std::move(truth));
  out.sensitive = LabelVector(std::move(sens));
  return out;
}

void write_trace_csv(const std::filesystem::path& path, const TrainingTrace& trace) {
  CsvWriter out(path);
  out.row({"epoch", "train_loss", "val_f1"});
  for (std::size_t e = 0; e < trace.train_loss.size(); ++e) {
    out.row({std::to_string(e), format_double(trace.train_loss[e]), format_double(trace.val_f1[e])});
  }
  out.close();
}

}  // namespace hetfair
