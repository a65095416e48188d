#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hetfair/bundle.hpp"

namespace hetfair {

struct IngestOptions {
  std::filesystem::path edge_file;       // two id columns per line; tab, comma or space
  std::filesystem::path attribute_file;  // delimited table with a header row
  std::string id_column;                 // empty: first column
  std::string class_column = "class";
  std::string sensitive_column = "sensitive";
  std::vector<std::string> feature_columns;  // empty: every other column
};

struct IngestResult {
  GraphBundle bundle;
  std::vector<std::string> original_ids;  // original_ids[node] = id in the source files
};

/// Loads a real dataset: node ids are remapped to 0..n-1 in attribute-file
/// order; edges are symmetrized with duplicates and self-loops removed.
/// Throws std::runtime_error with file and line for a dangling edge endpoint
/// or a class/sensitive value outside {0, 1}.
IngestResult ingest(const IngestOptions& options);

/// Writes the bundle plus id_map.csv (original_id,node_id).
void write_ingested_bundle(const std::filesystem::path& dir, const IngestResult& result);

}  // namespace hetfair
