#include "hetfair/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "hetfair/csv.hpp"

namespace hetfair {
namespace {

std::vector<std::string> edge_tokens(std::string line) {
  std::replace(line.begin(), line.end(), ',', ' ');
  std::replace(line.begin(), line.end(), '\t', ' ');
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::uint8_t binary_value(const std::string& text, const std::string& column,
                          const std::string& where) {
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": column `" + column + "` value `" + text +
                             "` is not numeric");
  }
  if (v == 0.0) return 0;
  if (v == 1.0) return 1;
  throw std::runtime_error(where + ": column `" + column + "` value `" + text +
                           "` is not binary (expected 0 or 1)");
}

}  // namespace

IngestResult ingest(const IngestOptions& options) {
  const auto table = read_csv(options.attribute_file);
  const std::size_t id_col = options.id_column.empty() ? 0 : table.column(options.id_column);
  const std::size_t class_col = table.column(options.class_column);
  const std::size_t sens_col = table.column(options.sensitive_column);
  std::vector<std::size_t> feature_cols;
  if (options.feature_columns.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c != id_col && c != class_col && c != sens_col) feature_cols.push_back(c);
    }
  } else {
    for (const auto& name : options.feature_columns) feature_cols.push_back(table.column(name));
  }

  IngestResult result;
  const std::size_t n = table.rows.size();
  std::unordered_map<std::string, NodeId> index;
  std::vector<std::uint8_t> cls(n), sens(n);
  Tensor features(n, feature_cols.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    const auto where = options.attribute_file.string() + ":" + std::to_string(table.line_numbers[i]);
    if (!index.emplace(row[id_col], static_cast<NodeId>(i)).second) {
      throw std::runtime_error(where + ": duplicate node id `" + row[id_col] + "`");
    }
    result.original_ids.push_back(row[id_col]);
    cls[i] = binary_value(row[class_col], options.class_column, where);
    sens[i] = binary_value(row[sens_col], options.sensitive_column, where);
    for (std::size_t d = 0; d < feature_cols.size(); ++d) {
      const auto& text = row[feature_cols[d]];
      try {
        features(i, d) = std::stod(text);
      } catch (const std::exception&) {
        throw std::runtime_error(where + ": feature column `" + table.header[feature_cols[d]] +
                                 "` value `" + text + "` is not numeric");
      }
    }
  }

  std::ifstream in(options.edge_file);
  if (!in) throw std::runtime_error("cannot open " + options.edge_file.string());
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = edge_tokens(line);
    if (tok.empty() || tok[0].starts_with('#')) continue;
    const auto where = options.edge_file.string() + ":" + std::to_string(lineno);
    if (tok.size() < 2) throw std::runtime_error(where + ": expected two node ids");
    const auto a = index.find(tok[0]);
    const auto b = index.find(tok[1]);
    const bool header = first && a == index.end() && b == index.end();
    first = false;
    if (header) continue;
    if (a == index.end() || b == index.end()) {
      throw std::runtime_error(where + ": edge endpoint `" +
                               (a == index.end() ? tok[0] : tok[1]) +
                               "` does not appear in the attribute file");
    }
    edges.emplace_back(a->second, b->second);
  }

  result.bundle.graph = Graph::from_edges(n, edges);
  result.bundle.attrs.cls = LabelVector(std::move(cls));
  result.bundle.attrs.sensitive = LabelVector(std::move(sens));
  result.bundle.attrs.features = std::move(features);
  result.bundle.meta["provenance"] = "ingested";
  result.bundle.meta["source"] = {{"edges", options.edge_file.string()},
                                  {"attributes", options.attribute_file.string()},
                                  {"class_column", options.class_column},
                                  {"sensitive_column", options.sensitive_column}};
  return result;
}

void write_ingested_bundle(const std::filesystem::path& dir, const IngestResult& result) {
  write_bundle(dir, result.bundle);
  CsvWriter map(dir / "id_map.csv");
  map.row({"original_id", "node_id"});
  for (std::size_t i = 0; i < result.original_ids.size(); ++i) {
    map.row({result.original_ids[i], std::to_string(i)});
  }
  map.close();
}

}  // namespace hetfair
