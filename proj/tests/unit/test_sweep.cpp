#include <filesystem>
#include <map>

#include "doctest.h"
#include "hetfair/csv.hpp"
#include "hetfair/sweep.hpp"

using namespace hetfair;
namespace fs = std::filesystem;

namespace {

SweepSpec tiny(const std::string& id) {
  SweepSpec s;
  s.h_c_list = {0.2, 0.8};
  s.h_s_list = {0.9};
  s.graphs_per_cell = 2;
  s.runs_per_model = 1;
  s.n_nodes = 60;
  s.edges_per_node = 3;
  s.master_seed = 42;
  s.output_dir = fs::temp_directory_path() / "hetfair_sweep_tests";
  s.sweep_id = id;
  s.model_overrides.set("epochs", "8");
  fs::remove_all(s.root());
  return s;
}

// Every result file of a sweep, keyed by relative path. The manifest holds
// timestamps and config.kv names the sweep, so both are left out.
std::map<std::string, std::string> result_files(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().filename() == "manifest.json" ||
        entry.path().filename() == "config.kv") {
      continue;
    }
    out[fs::relative(entry.path(), root).generic_string()] = read_text(entry.path());
  }
  return out;
}

}  // namespace

TEST_CASE("run counting") {
  CHECK(SweepSpec{}.run_count() == 3000);
  CHECK(SweepSpec::quick().run_count() == 300);
  CHECK(SweepSpec{}.cell_count() == 25);
}

TEST_CASE("sweep spec parsing") {
  KvConfig kv;
  kv.set("preset", "quick");
  kv.set("h_c", "0.1,0.5");
  kv.set("joint", "skew3x");
  kv.set("epochs", "20");
  const auto s = SweepSpec::from_kv(kv);
  CHECK(s.graphs_per_cell == 3);
  CHECK(s.h_c_list == std::vector<double>{0.1, 0.5});
  CHECK(s.joint == JointMode::kSkew3x);
  CHECK(s.model_overrides.get_uint("epochs", 0) == 20);
  const auto back = SweepSpec::from_kv(s.to_kv());
  CHECK(back.to_kv().entries() == s.to_kv().entries());
  kv.set("h_s", "1.0");
  CHECK_THROWS_AS(SweepSpec::from_kv(kv), ConfigError);
  kv.set("h_s", "0.5");
  kv.set("bogus", "1");
  CHECK_THROWS_AS(SweepSpec::from_kv(kv), ConfigError);
}

TEST_CASE("seed derivation separates cells") {
  const CellId a{0.1, 0.3, 1.0, JointMode::kUniform};
  CellId b = a;
  b.joint = JointMode::kSkew3x;
  CHECK(graph_seed(0, a, 0) != graph_seed(0, b, 0));
  CHECK(graph_seed(0, a, 0) != graph_seed(0, a, 1));
  CHECK(graph_seed(0, a, 0) != graph_seed(1, a, 0));
  CHECK(a.dir_name() == "hc0.1_hs0.3_e1_uniform");
}

TEST_CASE("sweep outputs are identical across worker counts") {
  auto one = tiny("w1");
  auto four = tiny("w4");
  four.workers = 4;
  const auto r1 = run_sweep(one);
  const auto r4 = run_sweep(four);
  CHECK(r1.records.size() == 2 * 2 * 4);
  CHECK(r1.failures().empty());
  const auto f1 = result_files(r1.root);
  const auto f4 = result_files(r4.root);
  CHECK(f1.size() == f4.size());
  for (const auto& [path, text] : f1) {
    INFO(path);
    REQUIRE(f4.count(path) == 1);
    CHECK(text == f4.at(path));
  }
  CHECK(f1.count("aggregate/fig2_grid.csv") == 1);
  CHECK(f1.count("aggregate/fig3_diff.csv") == 1);
  CHECK(f1.count("cells/hc0.2_hs0.9_e1_uniform/g01/preds_h2gcn_r0.csv") == 1);
  CHECK(f1.count("cells/hc0.2_hs0.9_e1_uniform/report.csv") == 1);
  CHECK(fs::exists(r1.root / "manifest.json"));
}

TEST_CASE("resuming reproduces an uninterrupted sweep") {
  auto spec = tiny("resume");
  const auto full = run_sweep(spec);
  const auto reference = result_files(full.root);
  // simulate an interruption: lose two runs and every aggregate
  fs::remove(full.root / "cells/hc0.8_hs0.9_e1_uniform/g00/run_gcn_r0.json");
  fs::remove(full.root / "cells/hc0.8_hs0.9_e1_uniform/g01/run_sage_r0.json");
  fs::remove_all(full.root / "aggregate");
  const auto resumed = run_sweep(spec);
  CHECK(resumed.resumed == full.records.size() - 2);
  CHECK(result_files(resumed.root) == reference);
}

TEST_CASE("run failures are recorded, not fatal") {
  auto spec = tiny("fail");
  spec.h_c_list = {0.5};
  spec.graphs_per_cell = 1;
  spec.model_overrides.set("lr", "1e300");
  const auto r = run_sweep(spec);
  CHECK(r.records.size() == 4);
  const auto failures = r.failures();
  REQUIRE_FALSE(failures.empty());
  CHECK(failures.front()->error->find("diverged") != std::string::npos);
  const auto table = read_csv(r.root / "aggregate" / "failures.csv");
  CHECK(table.rows.size() == failures.size());
  const auto runs = read_csv(r.root / "aggregate" / "runs.csv");
  CHECK(runs.rows.size() == 4);
}

TEST_CASE("bias sweep endpoint reproduces the main sweep") {
  auto main_spec = tiny("bias_main");
  auto bias_spec = tiny("bias");
  bias_spec.e_list = {0.25, 1.0};
  const auto main = run_sweep(main_spec);
  const auto bias = run_bias_sweep(bias_spec);
  CHECK(bias.points.size() == 4);
  std::size_t matched = 0;
  for (const auto& rec : bias.sweep.records) {
    if (rec.cell.e != 1.0) continue;
    for (const auto& ref : main.records) {
      if (ref.cell == rec.cell && ref.graph_index == rec.graph_index && ref.model == rec.model) {
        CHECK(ref.run_seed == rec.run_seed);
        CHECK(ref.global.delta_sp == rec.global.delta_sp);
        CHECK(ref.global.f1 == rec.global.f1);
        ++matched;
      }
    }
  }
  CHECK(matched == main.records.size());
  CHECK(fs::exists(bias.sweep.root / "aggregate" / "fig4_bias.csv"));
  auto two = tiny("bias_two");
  two.h_s_list = {0.5, 0.9};
  CHECK_THROWS_AS(run_bias_sweep(two), ConfigError);
}
