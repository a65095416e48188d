// Command-line front end: generate, homophily, train, evaluate, sweep,
// bias-sweep, ingest.

#include <algorithm>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetfair/bundle.hpp"
#include "hetfair/csv.hpp"
#include "hetfair/fairness.hpp"
#include "hetfair/generator.hpp"
#include "hetfair/homophily.hpp"
#include "hetfair/ingest.hpp"
#include "hetfair/kvconfig.hpp"
#include "hetfair/models.hpp"
#include "hetfair/sweep.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace hetfair;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

// Config file plus flag overrides; flags always win.
struct ConfigSource {
  std::string file;
  std::vector<std::string> assignments;  // --set key=value
  KvConfig flags;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", file, "key = value config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", assignments, "override a config key (key=value), repeatable");
  }

  // Adds a flag that overrides config key `key`.
  void flag(CLI::App* cmd, const std::string& name, const std::string& key,
            const std::string& help) {
    cmd->add_option_function<std::string>(
        name, [this, key](const std::string& v) { flags.set(key, v); }, help);
  }

  KvConfig resolve() const {
    KvConfig kv = file.empty() ? KvConfig{} : KvConfig::load(file);
    for (const auto& a : assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got `" + a + "`");
      kv.set(trim(a.substr(0, eq)), trim(a.substr(eq + 1)));
    }
    kv.merge(flags);
    return kv;
  }
};

void reject_unknown(const KvConfig& kv, const std::vector<std::string>& known) {
  if (auto unknown = kv.unknown_keys(known); !unknown.empty()) {
    throw ConfigError("unknown config key `" + unknown.front() + "`");
  }
}

std::vector<NodeId> all_nodes(std::size_t n) {
  std::vector<NodeId> v(n);
  std::iota(v.begin(), v.end(), NodeId{0});
  return v;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? format_double(*v) : "undefined"; }

// ---- generate ----

struct GenerateArgs {
  ConfigSource cfg;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  const auto kv = a.cfg.resolve();
  reject_unknown(kv, GeneratorConfig::known_keys());
  const auto config = GeneratorConfig::from_kv(kv);
  auto bundle = make_synthetic_bundle(config, generate(config));
  write_bundle(a.out, bundle);
  write_text(fs::path(a.out) / "config.kv", config.to_kv().to_string());
  std::cout << "nodes " << bundle.graph.n_nodes() << "\nedges " << bundle.graph.n_edges()
            << "\nclass_homophily " << format_double(global_homophily(bundle.graph, bundle.attrs.cls))
            << "\nsensitive_homophily "
            << format_double(global_homophily(bundle.graph, bundle.attrs.sensitive)) << "\n";
  return 0;
}

// ---- homophily ----

struct HomophilyArgs {
  std::string graph, out;
  std::vector<int> hops = {1, 2};
  double bin_width = 0.2;
  unsigned workers = 1;
};

int cmd_homophily(const HomophilyArgs& a) {
  for (int k : a.hops) {
    if (k != 1 && k != 2) throw ConfigError("--k values must be 1 or 2");
  }
  bin_count(a.bin_width);
  const auto bundle = read_bundle(a.graph);
  const auto profile =
      homophily_profile(bundle.graph, bundle.attrs.cls, bundle.attrs.sensitive, a.workers);
  const fs::path out = a.out;
  write_profile_csv(out / "profile.csv", profile);
  nlohmann::json summary = {
      {"n_nodes", bundle.graph.n_nodes()},
      {"n_edges", bundle.graph.n_edges()},
      {"global_class_homophily", global_homophily(bundle.graph, bundle.attrs.cls)},
      {"global_sensitive_homophily", global_homophily(bundle.graph, bundle.attrs.sensitive)},
      {"bin_width", a.bin_width}};
  for (int k : a.hops) {
    for (auto [channel, name] : {std::pair{Channel::kClass, "class"},
                                 std::pair{Channel::kSensitive, "sensitive"}}) {
      const auto hist = homophily_histogram(profile, channel, k, a.bin_width);
      write_histogram_csv(out / ("hist_" + std::string(name) + "_k" + std::to_string(k) + ".csv"),
                          hist);
      summary["undefined_k" + std::to_string(k)] = hist.undefined_count;
    }
  }
  write_text(out / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// ---- train ----

struct TrainArgs {
  ConfigSource cfg;
  std::string graph, out;
  bool tune = false;
  std::uint64_t split_seed = 0;
};

int cmd_train(const TrainArgs& a) {
  const auto kv = a.cfg.resolve();
  reject_unknown(kv, {"model", "hidden_dim", "depth", "dropout", "lr", "weight_decay", "epochs",
                      "seed"});
  const auto config = ModelConfig::from_kv(kv);
  const auto bundle = read_bundle(a.graph);
  const auto splits = make_splits(bundle.graph.n_nodes(), a.split_seed);
  const auto inputs = prepare_inputs(bundle.graph, bundle.attrs.features, config.depth);
  auto result = a.tune ? train_tuned(inputs, bundle.attrs, splits, config)
                       : train(inputs, bundle.attrs, splits, config);
  const fs::path out = a.out;
  write_predictions_csv(out / "predictions.csv", result.predictions, bundle.attrs, splits);
  write_trace_csv(out / "trace.csv", result.trace);
  auto resolved = result.config.to_kv();
  resolved.set("split_seed", std::to_string(a.split_seed));
  write_text(out / "config.kv", resolved.to_string());
  {
    std::vector<ad::Var> params;
    for (const auto& t : result.best_params) params.push_back(ad::constant(t));
    std::ofstream os(out / "params.txt");
    ad::save_parameters(os, params);
  }
  const auto test = fairness_report(result.predictions, bundle.attrs.cls,
                                    bundle.attrs.sensitive, splits.test);
  std::cout << "model " << family_name(config.family) << "\nbest_epoch "
            << result.trace.best_epoch << "\ntest_f1 " << format_double(test.f1)
            << "\ntest_accuracy " << format_double(test.accuracy) << "\ntest_delta_sp "
            << fmt_opt(test.delta_sp) << "\ntest_delta_eo " << fmt_opt(test.delta_eo) << "\n";
  return 0;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string predictions, graph, out;
  int hops = 1;
  std::string nodes = "test";
  double hs_threshold = 0.6;
};

int cmd_evaluate(const EvaluateArgs& a) {
  if (a.hops != 1 && a.hops != 2) throw ConfigError("--k must be 1 or 2");
  const auto loaded = read_predictions_csv(a.predictions);
  const auto bundle = read_bundle(a.graph);
  if (loaded.predictions.size() != bundle.graph.n_nodes()) {
    throw std::runtime_error(a.predictions + ": " + std::to_string(loaded.predictions.size()) +
                             " predictions for a graph with " +
                             std::to_string(bundle.graph.n_nodes()) + " nodes");
  }
  NodeAttributes attrs{loaded.truth, loaded.sensitive, bundle.attrs.features};
  std::vector<NodeId> eval;
  if (a.nodes == "all") {
    eval = all_nodes(bundle.graph.n_nodes());
  } else if (a.nodes == "test") {
    eval = loaded.splits.test;
  } else if (a.nodes == "val") {
    eval = loaded.splits.val;
  } else {
    throw ConfigError("--nodes must be test, val or all");
  }
  if (eval.empty()) throw ConfigError("no nodes selected for evaluation");

  const auto profile = homophily_profile(bundle.graph, bundle.attrs.cls, bundle.attrs.sensitive);
  const fs::path out = a.out;
  const auto global = fairness_report(loaded.predictions, attrs.cls, attrs.sensitive, eval);
  {
    CsvWriter w(out / "global.csv");
    w.row({"n_nodes", "f1", "accuracy", "delta_sp", "delta_eo"});
    w.row({std::to_string(global.n_nodes), format_double(global.f1),
           format_double(global.accuracy), global.delta_sp ? format_double(*global.delta_sp) : "",
           global.delta_eo ? format_double(*global.delta_eo) : ""});
    w.close();
  }
  write_stratified_report_csv(out / "report.csv",
                              stratified_report(loaded.predictions, attrs, profile, a.hops, eval));
  try {
    const auto slice =
        high_hs_slice(profile, loaded.predictions, attrs, a.hs_threshold, eval, a.hops);
    write_high_hs_slice_csv(out / "high_hs.csv", slice);
    std::cout << "high_hs_coverage " << format_double(slice.coverage()) << "\n";
  } catch (const std::runtime_error& e) {
    std::cerr << "note: " << e.what() << "\n";
  }
  std::cout << "n_nodes " << global.n_nodes << "\nf1 " << format_double(global.f1)
            << "\naccuracy " << format_double(global.accuracy) << "\ndelta_sp "
            << fmt_opt(global.delta_sp) << "\ndelta_eo " << fmt_opt(global.delta_eo) << "\n";
  return 0;
}

// ---- sweep / bias-sweep ----

struct SweepArgs {
  ConfigSource cfg;
};

void attach_sweep_flags(CLI::App* cmd, ConfigSource& cfg) {
  cfg.attach(cmd);
  cfg.flag(cmd, "--preset", "preset", "full or quick (3 graphs x 1 run)");
  cfg.flag(cmd, "--output-dir", "output_dir", "parent directory of the sweep");
  cfg.flag(cmd, "--sweep-id", "sweep_id", "sweep directory name");
  cfg.flag(cmd, "--workers", "workers", "concurrent runs");
  cfg.flag(cmd, "--master-seed", "master_seed", "seed of every derived stream");
  cfg.flag(cmd, "--h-c", "h_c", "comma-separated class homophily levels");
  cfg.flag(cmd, "--e", "e", "comma-separated feature bias levels");
  cfg.flag(cmd, "--graphs", "graphs_per_cell", "graphs per cell");
  cfg.flag(cmd, "--runs", "runs_per_model", "training runs per model and graph");
  cfg.flag(cmd, "--models", "models", "comma-separated model list");
  cfg.flag(cmd, "--epochs", "epochs", "training epochs");
}

int report_sweep(const SweepResult& r) {
  const auto failures = r.failures();
  std::cout << "root " << r.root.string() << "\nruns " << r.records.size() << "\nresumed "
            << r.resumed << "\nfailed " << failures.size() << "\n";
  for (const auto* f : failures) {
    std::cerr << "failed: " << f->cell.dir_name() << " g" << f->graph_index << " "
              << family_name(f->model) << " r" << f->run_index << ": " << *f->error << "\n";
  }
  return failures.empty() ? 0 : kExitRuntime;
}

int cmd_sweep(SweepArgs& a) {
  const auto spec = SweepSpec::from_kv(a.cfg.resolve());
  std::cerr << "sweep: " << spec.cell_count() << " cells, " << spec.run_count() << " runs\n";
  return report_sweep(run_sweep(spec));
}

int cmd_bias_sweep(SweepArgs& a) {
  auto kv = a.cfg.resolve();
  if (!kv.has("h_s")) kv.set("h_s", "0.9");
  if (!kv.has("e")) {
    std::string levels;
    for (double e : default_bias_levels()) levels += (levels.empty() ? "" : ",") + format_double(e);
    kv.set("e", levels);
  }
  if (!kv.has("sweep_id")) kv.set("sweep_id", "bias-sweep");
  if (kv.has("joint") && kv.get_string("joint", "") != "uniform") {
    throw ConfigError("bias sweep uses the uniform joint");
  }
  const auto spec = SweepSpec::from_kv(kv);
  std::cerr << "bias sweep: " << spec.run_count() << " runs\n";
  const auto result = run_bias_sweep(spec);
  std::cout << "e,family,delta_sp,delta_eo,f1\n";
  for (const auto& p : result.points) {
    std::cout << format_double(p.e) << "," << design_name(p.family) << ","
              << fmt_opt(p.delta_sp) << "," << fmt_opt(p.delta_eo) << ","
              << format_double(p.f1) << "\n";
  }
  return report_sweep(result.sweep);
}

// ---- ingest ----

struct IngestArgs {
  IngestOptions options;
  std::string features;
  std::string out;
};

int cmd_ingest(IngestArgs& a) {
  if (!a.features.empty()) a.options.feature_columns = split_list(a.features);
  const auto result = ingest(a.options);
  write_ingested_bundle(a.out, result);
  const auto& g = result.bundle.graph;
  std::cout << "nodes " << g.n_nodes() << "\nedges " << g.n_edges() << "\n";
  if (g.n_edges() > 0) {
    std::cout << "class_homophily " << format_double(global_homophily(g, result.bundle.attrs.cls))
              << "\nsensitive_homophily "
              << format_double(global_homophily(g, result.bundle.attrs.sensitive)) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness of graph neural networks under local heterophily"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "synthesize an attributed graph bundle");
  gen.cfg.attach(generate_cmd);
  for (const auto& key : GeneratorConfig::known_keys()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    gen.cfg.flag(generate_cmd, flag, key, "generator key " + key);
  }
  generate_cmd->add_option("-o,--out", gen.out, "output bundle directory")->required();

  HomophilyArgs hom;
  auto* homophily_cmd = app.add_subcommand("homophily", "local homophily profile and histograms");
  homophily_cmd->add_option("-g,--graph", hom.graph, "bundle directory")->required();
  homophily_cmd->add_option("--k", hom.hops, "hop radii")->delimiter(',');
  homophily_cmd->add_option("--bin-width", hom.bin_width, "histogram bin width");
  homophily_cmd->add_option("--workers", hom.workers, "threads");
  homophily_cmd->add_option("-o,--out", hom.out, "output directory")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train one model on a bundle");
  tr.cfg.attach(train_cmd);
  train_cmd->add_option("-g,--graph", tr.graph, "bundle directory")->required();
  for (const std::string key : {"model", "hidden_dim", "depth", "dropout", "lr", "weight_decay",
                                "epochs", "seed"}) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    tr.cfg.flag(train_cmd, flag, key, "model key " + key);
  }
  train_cmd->add_option("--split-seed", tr.split_seed, "seed of the 50/25/25 split");
  train_cmd->add_flag("--tune", tr.tune, "select lr and hidden size on validation F1");
  train_cmd->add_option("-o,--out", tr.out, "output directory")->required();

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "global and stratified fairness metrics");
  evaluate_cmd->add_option("-p,--predictions", ev.predictions, "predictions.csv")->required();
  evaluate_cmd->add_option("-g,--graph", ev.graph, "bundle directory")->required();
  evaluate_cmd->add_option("--k", ev.hops, "hop radius for stratification");
  evaluate_cmd->add_option("--nodes", ev.nodes, "test, val or all");
  evaluate_cmd->add_option("--hs-threshold", ev.hs_threshold, "high sensitive-homophily cut");
  evaluate_cmd->add_option("-o,--out", ev.out, "output directory")->required();

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "homophily grid sweep");
  attach_sweep_flags(sweep_cmd, sw.cfg);
  sw.cfg.flag(sweep_cmd, "--h-s", "h_s", "comma-separated sensitive homophily levels");
  sw.cfg.flag(sweep_cmd, "--joint", "joint", "uniform or skew3x");

  SweepArgs bs;
  auto* bias_cmd = app.add_subcommand("bias-sweep", "feature bias sweep at fixed h_s");
  attach_sweep_flags(bias_cmd, bs.cfg);
  bs.cfg.flag(bias_cmd, "--h-s", "h_s", "sensitive homophily level (default 0.9)");

  IngestArgs in;
  auto* ingest_cmd = app.add_subcommand("ingest", "load a real dataset into a bundle");
  ingest_cmd->add_option("--edges", in.options.edge_file, "edge list")->required()->check(
      CLI::ExistingFile);
  ingest_cmd->add_option("--attributes", in.options.attribute_file, "node attribute table")
      ->required()
      ->check(CLI::ExistingFile);
  ingest_cmd->add_option("--id-column", in.options.id_column, "default: first column");
  ingest_cmd->add_option("--class-column", in.options.class_column, "binary class column");
  ingest_cmd->add_option("--sensitive-column", in.options.sensitive_column,
                         "binary sensitive column");
  ingest_cmd->add_option("--features", in.features, "comma-separated feature columns");
  ingest_cmd->add_option("-o,--out", in.out, "output bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*generate_cmd) return cmd_generate(gen);
    if (*homophily_cmd) return cmd_homophily(hom);
    if (*train_cmd) return cmd_train(tr);
    if (*evaluate_cmd) return cmd_evaluate(ev);
    if (*sweep_cmd) return cmd_sweep(sw);
    if (*bias_cmd) return cmd_bias_sweep(bs);
    if (*ingest_cmd) return cmd_ingest(in);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
