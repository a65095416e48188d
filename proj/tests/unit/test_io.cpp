#include <filesystem>

#include "doctest.h"
#include "hetfair/bundle.hpp"
#include "hetfair/csv.hpp"
#include "hetfair/ingest.hpp"
#include "hetfair/kvconfig.hpp"

using namespace hetfair;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = HETFAIR_FIXTURE_DIR;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("hetfair_io_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("key-value config parsing") {
  const auto kv = KvConfig::parse("# comment\nh_c = 0.3  # trailing\n\nlist = 1, 2,3\nflag = yes\nh_c=0.4\n");
  CHECK(kv.get_double("h_c", 0) == 0.4);
  CHECK(kv.get_doubles("list", {}) == std::vector<double>{1, 2, 3});
  CHECK(kv.get_bool("flag", false));
  CHECK(kv.get_int("missing", 7) == 7);
  CHECK_THROWS_AS(KvConfig::parse("novalue\n"), ConfigError);
  CHECK_THROWS_AS(kv.get_double("flag", 0), ConfigError);
  CHECK(kv.unknown_keys({"h_c", "list"}) == std::vector<std::string>{"flag"});
  const auto again = KvConfig::parse(kv.to_string());
  CHECK(again.entries() == kv.entries());
}

TEST_CASE("shortest round-trip number formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("csv delimiter sniffing") {
  const auto dir = scratch("csv");
  write_text(dir / "a.tsv", "x\ty\n1\t2\n");
  write_text(dir / "b.csv", "x,y\n\n3,4\n");
  const auto a = read_csv(dir / "a.tsv");
  CHECK(a.rows.at(0).at(1) == "2");
  const auto b = read_csv(dir / "b.csv");
  CHECK(b.rows.size() == 1);
  CHECK(b.line_numbers[0] == 3);
  CHECK(b.column("y") == 1);
  CHECK_THROWS(b.column("z"));
  write_text(dir / "bad.csv", "x,y\n1\n");
  CHECK_THROWS(read_csv(dir / "bad.csv"));
  fs::remove_all(dir);
}

TEST_CASE("bundle round trip") {
  GeneratorConfig cfg;
  cfg.n_nodes = 50;
  cfg.edges_per_node = 3;
  cfg.seed = 4;
  const auto bundle = make_synthetic_bundle(cfg, generate(cfg));
  const auto dir = scratch("bundle");
  write_bundle(dir, bundle);
  const auto back = read_bundle(dir);
  CHECK(back.graph.edge_list() == bundle.graph.edge_list());
  CHECK(back.attrs.features == bundle.attrs.features);
  CHECK(back.attrs.cls.values().size() == 50);
  CHECK(back.meta.at("generator").at("seed") == "4");
  CHECK(back.meta.at("provenance") == "synthetic");
  fs::remove_all(dir);
}

TEST_CASE("ingest remaps sparse ids and deduplicates edges") {
  IngestOptions opt;
  opt.edge_file = kFixtures / "tiny_edges.txt";
  opt.attribute_file = kFixtures / "tiny_nodes.csv";
  opt.class_column = "label";
  opt.sensitive_column = "region";
  const auto r = ingest(opt);
  const auto& g = r.bundle.graph;
  CHECK(g.n_nodes() == 6);
  CHECK(g.n_edges() == 5);
  CHECK(r.original_ids.front() == "n10");
  CHECK(g.degree(5) == 0);
  CHECK(r.bundle.attrs.features.cols() == 2);
  CHECK(r.bundle.attrs.features(0, 1) == 1.80);
  CHECK(global_homophily(g, r.bundle.attrs.cls) == 0.0);
  CHECK(global_homophily(g, r.bundle.attrs.sensitive) == doctest::Approx(0.6));

  const auto dir = scratch("ingest");
  write_ingested_bundle(dir, r);
  const auto map = read_csv(dir / "id_map.csv");
  CHECK(map.rows.at(3).at(0) == "n47");
  CHECK(map.rows.at(3).at(1) == "3");
  CHECK(read_bundle(dir).graph.edge_list() == g.edge_list());
  fs::remove_all(dir);

  opt.feature_columns = {"height"};
  CHECK(ingest(opt).bundle.attrs.features.cols() == 1);
}

TEST_CASE("ingest errors carry file and line") {
  IngestOptions opt;
  opt.edge_file = kFixtures / "dangling_edges.txt";
  opt.attribute_file = kFixtures / "tiny_nodes.csv";
  opt.class_column = "label";
  opt.sensitive_column = "region";
  try {
    ingest(opt);
    FAIL("dangling endpoint accepted");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dangling_edges.txt:2") != std::string::npos);
    CHECK(msg.find("n99") != std::string::npos);
  }
  opt.edge_file = kFixtures / "tiny_edges.txt";
  opt.attribute_file = kFixtures / "nonbinary_nodes.csv";
  try {
    ingest(opt);
    FAIL("non-binary class accepted");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("nonbinary_nodes.csv:3") != std::string::npos);
    CHECK(msg.find("not binary") != std::string::npos);
  }
}

TEST_CASE("histogram and profile writers") {
  const std::vector<Edge> e = {{0, 1}, {1, 2}};
  const auto g = Graph::from_edges(4, e);
  const auto prof = homophily_profile(g, LabelVector({0, 0, 1, 1}), LabelVector({1, 1, 1, 0}));
  const auto dir = scratch("writers");
  write_histogram_csv(dir / "h.csv", homophily_histogram(prof, Channel::kClass, 1, 0.2));
  write_profile_csv(dir / "p.csv", prof);
  CHECK(read_text(dir / "h.csv") ==
        "bin_lo,bin_hi,count\n0,0.2,1\n0.2,0.4,0\n0.4,0.6,1\n0.6,0.8,0\n0.8,1,1\n"
        "undefined_count,,1\n");
  const auto p = read_csv(dir / "p.csv");
  CHECK(p.rows.at(3).at(1).empty());
  CHECK(p.rows.at(1).at(1) == "0.5");
  fs::remove_all(dir);
}
