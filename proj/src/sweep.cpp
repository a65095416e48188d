#include "hetfair/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>
#include <thread>

#include "hetfair/bundle.hpp"
#include "hetfair/csv.hpp"
#include "json.hpp"

namespace hetfair {
namespace fs = std::filesystem;
using nlohmann::json;

std::string_view joint_mode_name(JointMode mode) {
  return mode == JointMode::kUniform ? "uniform" : "skew3x";
}

JointMode parse_joint_mode(std::string_view name) {
  if (name == "uniform") return JointMode::kUniform;
  if (name == "skew3x") return JointMode::kSkew3x;
  throw ConfigError("unknown joint mode `" + std::string(name) + "` (expected uniform or skew3x)");
}

SweepSpec SweepSpec::quick() {
  SweepSpec s;
  s.graphs_per_cell = 3;
  s.runs_per_model = 1;
  return s;
}

void SweepSpec::validate() const {
  auto check_list = [](const std::vector<double>& xs, const char* name, bool closed) {
    if (xs.empty()) throw ConfigError(std::string(name) + " list is empty");
    for (double x : xs) {
      const bool ok = closed ? (x >= 0.0 && x <= 1.0) : (x > 0.0 && x < 1.0);
      if (!ok) {
        throw ConfigError(std::string(name) + " value " + format_double(x) + " outside " +
                          (closed ? "[0, 1]" : "(0, 1)"));
      }
    }
  };
  check_list(h_c_list, "h_c", false);
  check_list(h_s_list, "h_s", false);
  check_list(e_list, "e", true);
  if (graphs_per_cell == 0) throw ConfigError("graphs_per_cell must be positive");
  if (runs_per_model == 0) throw ConfigError("runs_per_model must be positive");
  if (models.empty()) throw ConfigError("model list is empty");
  if (hops != 1 && hops != 2) throw ConfigError("hops must be 1 or 2");
  if (sweep_id.empty() || sweep_id.find('/') != std::string::npos) {
    throw ConfigError("sweep_id must be a nonempty single path component");
  }
  if (n_nodes < 4) throw ConfigError("n_nodes must be at least 4");
  if (edges_per_node == 0 || edges_per_node >= n_nodes) {
    throw ConfigError("edges_per_node must lie in [1, n_nodes)");
  }
  if (workers == 0) throw ConfigError("workers must be positive");
  for (const auto& model : models) {
    KvConfig kv = model_overrides;
    kv.set("model", std::string(family_name(model)));
    ModelConfig::from_kv(kv);
  }
}

std::size_t SweepSpec::cell_count() const {
  return h_c_list.size() * h_s_list.size() * e_list.size();
}

std::size_t SweepSpec::run_count() const {
  return cell_count() * graphs_per_cell * models.size() * runs_per_model;
}

namespace {

const std::vector<std::string> kModelKeys = {"hidden_dim", "depth",   "dropout",
                                             "lr",         "weight_decay", "epochs"};

std::string join_doubles(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + format_double(xs[i]);
  return out;
}

}  // namespace

std::vector<std::string> SweepSpec::known_keys() {
  std::vector<std::string> keys = {"preset",  "h_c",      "h_s",          "joint",
                                   "e",       "graphs_per_cell", "runs_per_model", "models",
                                   "master_seed", "output_dir", "sweep_id", "n_nodes",
                                   "edges_per_node", "hops", "eval_nodes", "tune",
                                   "write_predictions", "workers"};
  keys.insert(keys.end(), kModelKeys.begin(), kModelKeys.end());
  return keys;
}

SweepSpec SweepSpec::from_kv(const KvConfig& kv) {
  if (auto unknown = kv.unknown_keys(known_keys()); !unknown.empty()) {
    throw ConfigError("unknown sweep key `" + unknown.front() + "`");
  }
  const auto preset = kv.get_string("preset", "full");
  SweepSpec s;
  if (preset == "quick") {
    s = quick();
  } else if (preset != "full") {
    throw ConfigError("unknown preset `" + preset + "` (expected full or quick)");
  }
  s.h_c_list = kv.get_doubles("h_c", s.h_c_list);
  s.h_s_list = kv.get_doubles("h_s", s.h_s_list);
  s.joint = parse_joint_mode(kv.get_string("joint", std::string(joint_mode_name(s.joint))));
  s.e_list = kv.get_doubles("e", s.e_list);
  s.graphs_per_cell = kv.get_uint("graphs_per_cell", s.graphs_per_cell);
  s.runs_per_model = kv.get_uint("runs_per_model", s.runs_per_model);
  if (kv.has("models")) {
    s.models.clear();
    for (const auto& name : kv.get_strings("models", {})) s.models.push_back(parse_model_family(name));
  }
  s.master_seed = kv.get_uint("master_seed", s.master_seed);
  s.output_dir = kv.get_string("output_dir", s.output_dir.string());
  s.sweep_id = kv.get_string("sweep_id", s.sweep_id);
  s.n_nodes = kv.get_uint("n_nodes", s.n_nodes);
  s.edges_per_node = kv.get_uint("edges_per_node", s.edges_per_node);
  s.hops = static_cast<int>(kv.get_int("hops", s.hops));
  const auto eval = kv.get_string("eval_nodes", s.evaluate_all_nodes ? "all" : "test");
  if (eval != "all" && eval != "test") throw ConfigError("eval_nodes must be test or all");
  s.evaluate_all_nodes = eval == "all";
  s.tune = kv.get_bool("tune", s.tune);
  s.write_predictions = kv.get_bool("write_predictions", s.write_predictions);
  s.workers = static_cast<unsigned>(kv.get_uint("workers", s.workers));
  for (const auto& key : kModelKeys) {
    if (kv.has(key)) s.model_overrides.set(key, kv.get_string(key, ""));
  }
  s.validate();
  return s;
}

KvConfig SweepSpec::to_kv() const {
  KvConfig kv;
  kv.set("h_c", join_doubles(h_c_list));
  kv.set("h_s", join_doubles(h_s_list));
  kv.set("joint", std::string(joint_mode_name(joint)));
  kv.set("e", join_doubles(e_list));
  kv.set("graphs_per_cell", std::to_string(graphs_per_cell));
  kv.set("runs_per_model", std::to_string(runs_per_model));
  std::string names;
  for (std::size_t i = 0; i < models.size(); ++i) {
    names += (i ? "," : "") + std::string(family_name(models[i]));
  }
  kv.set("models", names);
  kv.set("master_seed", std::to_string(master_seed));
  kv.set("sweep_id", sweep_id);
  kv.set("n_nodes", std::to_string(n_nodes));
  kv.set("edges_per_node", std::to_string(edges_per_node));
  kv.set("hops", std::to_string(hops));
  kv.set("eval_nodes", evaluate_all_nodes ? "all" : "test");
  kv.set("tune", tune ? "true" : "false");
  kv.set("write_predictions", write_predictions ? "true" : "false");
  kv.merge(model_overrides);
  return kv;
}

std::string CellId::dir_name() const {
  return "hc" + format_double(h_c) + "_hs" + format_double(h_s) + "_e" + format_double(e) + "_" +
         std::string(joint_mode_name(joint));
}

std::uint64_t graph_seed(std::uint64_t master_seed, const CellId& cell, std::size_t graph_index) {
  return derive_seed({master_seed, seed_word(cell.h_c), seed_word(cell.h_s), seed_word(cell.e),
                      seed_word(joint_mode_name(cell.joint)), graph_index});
}

std::vector<const RunRecord*> SweepResult::failures() const {
  std::vector<const RunRecord*> out;
  for (const auto& r : records) {
    if (r.error) out.push_back(&r);
  }
  return out;
}

namespace {

std::vector<StratifiedReport> reports_of(const std::vector<const RunRecord*>& records,
                                         DesignFamily family) {
  std::vector<StratifiedReport> out;
  for (const auto* r : records) {
    if (!r->error && design_of(r->model) == family) out.push_back(r->stratified);
  }
  return out;
}

std::vector<const RunRecord*> all_of(const std::vector<RunRecord>& records) {
  std::vector<const RunRecord*> out;
  for (const auto& r : records) out.push_back(&r);
  return out;
}

}  // namespace

AggregateGrid SweepResult::grid(DesignFamily family) const {
  const auto reports = reports_of(all_of(records), family);
  return aggregate_reports(reports);
}

namespace {

// ---- record serialization ----

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json report_json(const FairnessReport& r) {
  return {{"n_nodes", r.n_nodes},
          {"f1", r.f1},
          {"accuracy", r.accuracy},
          {"delta_sp", opt_json(r.delta_sp)},
          {"delta_eo", opt_json(r.delta_eo)},
          {"group_counts", r.group_counts}};
}

FairnessReport report_from(const json& j) {
  FairnessReport r;
  r.n_nodes = j.at("n_nodes").get<std::size_t>();
  r.f1 = j.at("f1").get<double>();
  r.accuracy = j.at("accuracy").get<double>();
  r.delta_sp = opt_from(j.at("delta_sp"));
  r.delta_eo = opt_from(j.at("delta_eo"));
  r.group_counts = j.at("group_counts").get<std::array<std::array<std::size_t, 2>, 2>>();
  return r;
}

json record_json(const RunRecord& r) {
  json bins = json::array();
  for (const auto& [bin, rep] : r.stratified.bins) {
    bins.push_back({{"class_bin", bin.class_bin}, {"sens_bin", bin.sens_bin},
                    {"report", report_json(rep)}});
  }
  json j = {{"h_c", r.cell.h_c},
            {"h_s", r.cell.h_s},
            {"e", r.cell.e},
            {"joint", joint_mode_name(r.cell.joint)},
            {"graph_index", r.graph_index},
            {"graph_seed", r.graph_seed},
            {"model", family_name(r.model)},
            {"run_index", r.run_index},
            {"run_seed", r.run_seed},
            {"report_path", r.report_path.generic_string()},
            {"error", r.error ? json(*r.error) : json(nullptr)}};
  if (!r.error) {
    j["global"] = report_json(r.global);
    j["stratified"] = {{"bins", bins}, {"undefined_node_count", r.stratified.undefined_node_count}};
  }
  return j;
}

RunRecord record_from(const json& j) {
  RunRecord r;
  r.cell.h_c = j.at("h_c").get<double>();
  r.cell.h_s = j.at("h_s").get<double>();
  r.cell.e = j.at("e").get<double>();
  r.cell.joint = parse_joint_mode(j.at("joint").get<std::string>());
  r.graph_index = j.at("graph_index").get<std::size_t>();
  r.graph_seed = j.at("graph_seed").get<std::uint64_t>();
  r.model = parse_model_family(j.at("model").get<std::string>());
  r.run_index = j.at("run_index").get<std::size_t>();
  r.run_seed = j.at("run_seed").get<std::uint64_t>();
  r.report_path = j.at("report_path").get<std::string>();
  if (!j.at("error").is_null()) {
    r.error = j.at("error").get<std::string>();
    return r;
  }
  r.global = report_from(j.at("global"));
  const auto& strat = j.at("stratified");
  r.stratified.undefined_node_count = strat.at("undefined_node_count").get<std::size_t>();
  for (const auto& b : strat.at("bins")) {
    r.stratified.bins[{b.at("class_bin").get<std::size_t>(), b.at("sens_bin").get<std::size_t>()}] =
        report_from(b.at("report"));
  }
  return r;
}

void write_atomic(const fs::path& path, const std::string& text) {
  const auto tmp = fs::path(path.string() + ".tmp");
  write_text(tmp, text);
  fs::rename(tmp, path);
}

// ---- scheduling ----

// Runs fn(i) for i in [0, count) on up to `workers` threads. fn must not throw.
template <class F>
void parallel_for(std::size_t count, unsigned workers, F&& fn) {
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) fn(i);
  };
  const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (n_threads <= 1) {
    loop();
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(loop);
}

struct PreparedGraph {
  GraphBundle bundle;
  LocalHomophilyProfile profile;
  SplitMasks splits;
  GraphInputs inputs;
  std::vector<NodeId> eval_nodes;
};

struct GraphUnit {
  CellId cell;
  std::size_t index = 0;
  std::uint64_t seed = 0;
  fs::path rel_dir;  // relative to the sweep root
  bool needed = false;
  std::unique_ptr<PreparedGraph> data;
  std::string error;
};

struct RunTask {
  std::size_t unit = 0;
  ModelFamily model = ModelFamily::kGcn;
  std::size_t run_index = 0;
  bool resumed = false;
  RunRecord record;
};

std::string run_stem(ModelFamily model, std::size_t run_index) {
  return std::string(family_name(model)) + "_r" + std::to_string(run_index);
}

ModelConfig model_config(const SweepSpec& spec, ModelFamily model) {
  KvConfig kv = spec.model_overrides;
  kv.set("model", std::string(family_name(model)));
  return ModelConfig::from_kv(kv);
}

std::unique_ptr<PreparedGraph> prepare_graph(const SweepSpec& spec, const GraphUnit& unit,
                                             const fs::path& root) {
  GeneratorConfig gen;
  gen.n_nodes = spec.n_nodes;
  gen.edges_per_node = spec.edges_per_node;
  gen.h_c = unit.cell.h_c;
  gen.h_s = unit.cell.h_s;
  gen.joint = unit.cell.joint == JointMode::kUniform ? JointDistribution::uniform()
                                                     : JointDistribution::skew3x();
  gen.feature_bias = unit.cell.e;
  gen.seed = unit.seed;
  auto bundle = make_synthetic_bundle(gen, generate(gen));
  write_bundle(root / unit.rel_dir, bundle);

  auto profile = homophily_profile(bundle.graph, bundle.attrs.cls, bundle.attrs.sensitive);
  auto splits = make_splits(spec.n_nodes, derive_seed({unit.seed, seed_word("splits")}));
  const auto sgc_depth = model_config(spec, ModelFamily::kSgc).depth;
  auto inputs = prepare_inputs(bundle.graph, bundle.attrs.features, sgc_depth);
  std::vector<NodeId> eval_nodes;
  if (spec.evaluate_all_nodes) {
    eval_nodes.resize(spec.n_nodes);
    for (std::size_t i = 0; i < eval_nodes.size(); ++i) eval_nodes[i] = static_cast<NodeId>(i);
  } else {
    eval_nodes = splits.test;
  }
  return std::make_unique<PreparedGraph>(PreparedGraph{std::move(bundle), std::move(profile),
                                                       std::move(splits), std::move(inputs),
                                                       std::move(eval_nodes)});
}

void execute_run(const SweepSpec& spec, const GraphUnit& unit, const fs::path& root,
                 RunTask& task) {
  auto& rec = task.record;
  const auto& data = *unit.data;
  auto cfg = model_config(spec, task.model);
  cfg.seed = rec.run_seed;
  auto result = spec.tune ? train_tuned(data.inputs, data.bundle.attrs, data.splits, cfg)
                          : train(data.inputs, data.bundle.attrs, data.splits, cfg);
  const auto& attrs = data.bundle.attrs;
  rec.global = fairness_report(result.predictions, attrs.cls, attrs.sensitive, data.eval_nodes);
  rec.stratified = stratified_report(result.predictions, attrs, data.profile, spec.hops,
                                     data.eval_nodes);
  const auto stem = run_stem(task.model, task.run_index);
  if (spec.write_predictions) {
    write_predictions_csv(root / unit.rel_dir / ("preds_" + stem + ".csv"), result.predictions,
                          attrs, data.splits);
  }
  write_stratified_report_csv(root / rec.report_path, rec.stratified);
}

std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

void write_runs_csv(const fs::path& path, const std::vector<RunRecord>& records) {
  CsvWriter out(path);
  out.row({"cell", "h_c", "h_s", "e", "joint", "graph", "graph_seed", "model", "design", "run",
           "run_seed", "n_eval", "f1", "accuracy", "delta_sp", "delta_eo", "status"});
  for (const auto& r : records) {
    std::vector<std::string> row = {r.cell.dir_name(),
                                    format_double(r.cell.h_c),
                                    format_double(r.cell.h_s),
                                    format_double(r.cell.e),
                                    std::string(joint_mode_name(r.cell.joint)),
                                    std::to_string(r.graph_index),
                                    std::to_string(r.graph_seed),
                                    std::string(family_name(r.model)),
                                    std::string(design_name(design_of(r.model))),
                                    std::to_string(r.run_index),
                                    std::to_string(r.run_seed)};
    if (r.error) {
      row.insert(row.end(), {"", "", "", "", "", "failed"});
    } else {
      row.insert(row.end(), {std::to_string(r.global.n_nodes), format_double(r.global.f1),
                             format_double(r.global.accuracy), opt_cell(r.global.delta_sp),
                             opt_cell(r.global.delta_eo), "ok"});
    }
    out.row(row);
  }
  out.close();
}

// Family grids plus one grid per model, then the difference map if defined.
void write_grid_outputs(const fs::path& grid_path, const fs::path& diff_path,
                        const std::vector<const RunRecord*>& records,
                        const std::vector<ModelFamily>& models) {
  std::vector<NamedGrid> grids;
  const auto hom = reports_of(records, DesignFamily::kHomophilous);
  const auto het = reports_of(records, DesignFamily::kHeterophilous);
  grids.push_back({"homophilous", aggregate_reports(hom)});
  grids.push_back({"heterophilous", aggregate_reports(het)});
  for (auto model : models) {
    std::vector<StratifiedReport> own;
    for (const auto* r : records) {
      if (!r->error && r->model == model) own.push_back(r->stratified);
    }
    grids.push_back({std::string(family_name(model)), aggregate_reports(own)});
  }
  write_aggregate_grids_csv(grid_path, grids);
  std::error_code ec;
  fs::remove(diff_path, ec);
  if (hom.empty() || het.empty()) return;
  try {
    write_design_comparison_csv(diff_path, design_comparison(grids[1].grid, grids[0].grid));
  } catch (const std::runtime_error&) {
    // no bin defined for both families
  }
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  const auto started = iso_now();
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path root = spec.root();
  fs::create_directories(root);
  write_text(root / "config.kv", spec.to_kv().to_string());

  std::vector<GraphUnit> units;
  std::vector<RunTask> tasks;
  for (double hc : spec.h_c_list) {
    for (double hs : spec.h_s_list) {
      for (double e : spec.e_list) {
        const CellId cell{hc, hs, e, spec.joint};
        for (std::size_t g = 0; g < spec.graphs_per_cell; ++g) {
          GraphUnit unit;
          unit.cell = cell;
          unit.index = g;
          unit.seed = graph_seed(spec.master_seed, cell, g);
          char gname[16];
          std::snprintf(gname, sizeof gname, "g%02zu", g);
          unit.rel_dir = fs::path("cells") / cell.dir_name() / gname;
          fs::create_directories(root / unit.rel_dir);
          const std::size_t unit_index = units.size();
          for (auto model : spec.models) {
            for (std::size_t r = 0; r < spec.runs_per_model; ++r) {
              RunTask task;
              task.unit = unit_index;
              task.model = model;
              task.run_index = r;
              const auto record_path = root / unit.rel_dir / ("run_" + run_stem(model, r) + ".json");
              if (fs::exists(record_path)) {
                try {
                  task.record = record_from(json::parse(read_text(record_path)));
                  task.resumed = true;
                } catch (const std::exception&) {
                  task.resumed = false;  // damaged record: rerun
                }
              }
              if (!task.resumed) {
                auto& rec = task.record;
                rec.cell = cell;
                rec.graph_index = g;
                rec.graph_seed = unit.seed;
                rec.model = model;
                rec.run_index = r;
                rec.run_seed = run_seed(unit.seed, model, r);
                rec.report_path = unit.rel_dir / ("report_" + run_stem(model, r) + ".csv");
                unit.needed = true;
              }
              tasks.push_back(std::move(task));
            }
          }
          units.push_back(std::move(unit));
        }
      }
    }
  }

  parallel_for(units.size(), spec.workers, [&](std::size_t i) {
    auto& unit = units[i];
    if (!unit.needed) return;
    try {
      unit.data = prepare_graph(spec, unit, root);
    } catch (const std::exception& e) {
      unit.error = std::string("graph generation: ") + e.what();
    }
  });

  parallel_for(tasks.size(), spec.workers, [&](std::size_t i) {
    auto& task = tasks[i];
    if (task.resumed) return;
    const auto& unit = units[task.unit];
    const auto start = std::chrono::steady_clock::now();
    if (!unit.data) {
      task.record.error = unit.error;
    } else {
      try {
        execute_run(spec, unit, root, task);
      } catch (const std::exception& e) {
        task.record.error = e.what();
      }
    }
    task.record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
      write_atomic(root / unit.rel_dir / ("run_" + run_stem(task.model, task.run_index) + ".json"),
                   record_json(task.record).dump(1) + "\n");
    } catch (const std::exception& e) {
      if (!task.record.error) task.record.error = std::string("writing record: ") + e.what();
    }
  });
  units.clear();

  SweepResult result;
  result.root = root;
  json timings = json::array();
  for (auto& task : tasks) {
    result.resumed += task.resumed;
    if (!task.resumed) {
      timings.push_back({{"run", task.record.report_path.generic_string()},
                         {"seconds", task.record.seconds}});
    }
    result.records.push_back(std::move(task.record));
  }

  // per-cell outputs
  std::map<CellId, std::vector<const RunRecord*>> by_cell;
  for (const auto& r : result.records) by_cell[r.cell].push_back(&r);
  json cells = json::array();
  for (const auto& [cell, recs] : by_cell) {
    const auto dir = root / "cells" / cell.dir_name();
    write_grid_outputs(dir / "report.csv", dir / "diff.csv", recs, spec.models);
    std::size_t failed = 0;
    for (const auto* r : recs) failed += r->error.has_value();
    cells.push_back({{"cell", cell.dir_name()}, {"runs", recs.size()}, {"failed", failed}});
  }

  const auto aggregate = root / "aggregate";
  write_grid_outputs(aggregate / "fig2_grid.csv", aggregate / "fig3_diff.csv",
                     all_of(result.records), spec.models);
  write_runs_csv(aggregate / "runs.csv", result.records);

  json failures = json::array();
  {
    CsvWriter out(aggregate / "failures.csv");
    out.row({"cell", "graph", "model", "run", "error"});
    for (const auto* r : result.failures()) {
      out.row({r->cell.dir_name(), std::to_string(r->graph_index),
               std::string(family_name(r->model)), std::to_string(r->run_index), *r->error});
      failures.push_back({{"cell", r->cell.dir_name()},
                          {"graph", r->graph_index},
                          {"model", family_name(r->model)},
                          {"run", r->run_index},
                          {"error", *r->error}});
    }
    out.close();
  }

  json manifest = {
      {"sweep_id", spec.sweep_id},
      {"config", spec.to_kv().entries()},
      {"started_at", started},
      {"finished_at", iso_now()},
      {"elapsed_seconds",
       std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
      {"total_runs", result.records.size()},
      {"resumed_runs", result.resumed},
      {"cells", cells},
      {"failures", failures},
      {"run_seconds", timings}};
  write_atomic(root / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

std::vector<double> default_bias_levels() { return {0.0, 0.25, 0.5, 0.75, 1.0}; }

BiasSweepResult run_bias_sweep(SweepSpec spec) {
  spec.joint = JointMode::kUniform;
  if (spec.h_s_list.size() != 1) {
    throw ConfigError("bias sweep takes exactly one h_s value");
  }
  BiasSweepResult out;
  out.sweep = run_sweep(spec);

  for (double e : spec.e_list) {
    for (auto family : {DesignFamily::kHomophilous, DesignFamily::kHeterophilous}) {
      BiasPoint p;
      p.e = e;
      p.family = family;
      double sp = 0.0, eo = 0.0, f1 = 0.0;
      std::size_t n_sp = 0, n_eo = 0;
      for (const auto& r : out.sweep.records) {
        if (r.error || r.cell.e != e || design_of(r.model) != family) continue;
        ++p.runs;
        f1 += r.global.f1;
        if (r.global.delta_sp) sp += *r.global.delta_sp, ++n_sp;
        if (r.global.delta_eo) eo += *r.global.delta_eo, ++n_eo;
      }
      if (p.runs) p.f1 = f1 / static_cast<double>(p.runs);
      if (n_sp) p.delta_sp = sp / static_cast<double>(n_sp);
      if (n_eo) p.delta_eo = eo / static_cast<double>(n_eo);
      out.points.push_back(p);
    }
  }

  CsvWriter csv(out.sweep.root / "aggregate" / "fig4_bias.csv");
  csv.row({"e", "family", "delta_sp", "delta_eo", "f1", "runs"});
  for (const auto& p : out.points) {
    csv.row({format_double(p.e), std::string(design_name(p.family)), opt_cell(p.delta_sp),
             opt_cell(p.delta_eo), format_double(p.f1), std::to_string(p.runs)});
  }
  csv.close();
  return out;
}

}  // namespace hetfair
