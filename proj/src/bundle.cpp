#include "hetfair/bundle.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hetfair/csv.hpp"

namespace hetfair {
namespace fs = std::filesystem;

void write_bundle(const fs::path& dir, const GraphBundle& bundle) {
  const auto& g = bundle.graph;
  const auto& attrs = bundle.attrs;
  if (attrs.cls.size() != g.n_nodes() || attrs.sensitive.size() != g.n_nodes() ||
      attrs.features.rows() != g.n_nodes()) {
    throw std::invalid_argument("bundle attributes do not match the graph size");
  }
  fs::create_directories(dir);

  CsvWriter edges(dir / "edges.tsv", '\t');
  for (const auto& [u, v] : g.edge_list()) edges.row({std::to_string(u), std::to_string(v)});
  edges.close();

  CsvWriter nodes(dir / "nodes.csv");
  std::vector<std::string> header = {"id", "class", "sensitive"};
  for (std::size_t d = 0; d < attrs.features.cols(); ++d) header.push_back("f" + std::to_string(d));
  nodes.row(header);
  for (NodeId u = 0; u < g.n_nodes(); ++u) {
    std::vector<std::string> row = {std::to_string(u), std::to_string(attrs.cls[u]),
                                    std::to_string(attrs.sensitive[u])};
    for (double f : attrs.features.row(u)) row.push_back(format_double(f));
    nodes.row(row);
  }
  nodes.close();

  auto meta = bundle.meta;
  meta["n_nodes"] = g.n_nodes();
  meta["n_edges"] = g.n_edges();
  if (!meta.contains("provenance")) meta["provenance"] = "unknown";
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

namespace {

NodeId parse_node(const std::string& text, const fs::path& file, std::size_t line) {
  NodeId v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw std::runtime_error(file.string() + ":" + std::to_string(line) + ": bad node id `" +
                             text + "`");
  }
  return v;
}

}  // namespace

GraphBundle read_bundle(const fs::path& dir) {
  GraphBundle bundle;
  bundle.meta = nlohmann::json::parse(read_text(dir / "meta.json"));

  const auto nodes = read_csv(dir / "nodes.csv", ',');
  const std::size_t n = nodes.rows.size();
  const auto c_col = nodes.column("class");
  const auto s_col = nodes.column("sensitive");
  const auto id_col = nodes.column("id");
  std::vector<std::size_t> f_cols;
  for (std::size_t d = 0;; ++d) {
    const auto idx = nodes.find_column("f" + std::to_string(d));
    if (!idx) break;
    f_cols.push_back(*idx);
  }
  std::vector<std::uint8_t> cls(n), sens(n);
  Tensor features(n, f_cols.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = nodes.rows[i];
    const auto line = nodes.line_numbers[i];
    if (parse_node(row[id_col], dir / "nodes.csv", line) != i) {
      throw std::runtime_error((dir / "nodes.csv").string() + ":" + std::to_string(line) +
                               ": node ids must be contiguous and in order");
    }
    cls[i] = static_cast<std::uint8_t>(parse_node(row[c_col], dir / "nodes.csv", line));
    sens[i] = static_cast<std::uint8_t>(parse_node(row[s_col], dir / "nodes.csv", line));
    for (std::size_t d = 0; d < f_cols.size(); ++d) features(i, d) = std::stod(row[f_cols[d]]);
  }
  bundle.attrs.cls = LabelVector(std::move(cls));
  bundle.attrs.sensitive = LabelVector(std::move(sens));
  bundle.attrs.features = std::move(features);

  std::ifstream in(dir / "edges.tsv");
  if (!in) throw std::runtime_error("cannot open " + (dir / "edges.tsv").string());
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string a, b;
    if (!(fields >> a)) continue;
    if (!(fields >> b)) {
      throw std::runtime_error((dir / "edges.tsv").string() + ":" + std::to_string(lineno) +
                               ": expected two node ids");
    }
    edges.emplace_back(parse_node(a, dir / "edges.tsv", lineno),
                       parse_node(b, dir / "edges.tsv", lineno));
  }
  bundle.graph = Graph::from_edges(n, edges);
  return bundle;
}

GraphBundle make_synthetic_bundle(const GeneratorConfig& config, AttributedGraph generated) {
  GraphBundle bundle{std::move(generated.graph), std::move(generated.attrs), {}};
  bundle.meta["provenance"] = "synthetic";
  nlohmann::json gen;
  const auto kv = config.to_kv();
  for (const auto& [k, v] : kv.entries()) gen[k] = v;
  bundle.meta["generator"] = gen;
  return bundle;
}

void write_histogram_csv(const fs::path& path, const Histogram& hist) {
  CsvWriter out(path);
  out.row({"bin_lo", "bin_hi", "count"});
  for (std::size_t b = 0; b < hist.counts.size(); ++b) {
    out.row({format_double(hist.bin_lo[b]), format_double(hist.bin_hi[b]),
             std::to_string(hist.counts[b])});
  }
  out.row({"undefined_count", "", std::to_string(hist.undefined_count)});
  out.close();
}

void write_profile_csv(const fs::path& path, const LocalHomophilyProfile& profile) {
  auto cell = [](std::optional<double> v) { return v ? format_double(*v) : std::string(); };
  CsvWriter out(path);
  out.row({"node_id", "class_hom_k1", "sens_hom_k1", "class_hom_k2", "sens_hom_k2"});
  for (NodeId u = 0; u < profile.n_nodes(); ++u) {
    out.row({std::to_string(u), cell(profile.class_hom(u, 1)), cell(profile.sens_hom(u, 1)),
             cell(profile.class_hom(u, 2)), cell(profile.sens_hom(u, 2))});
  }
  out.close();
}

}  // namespace hetfair
