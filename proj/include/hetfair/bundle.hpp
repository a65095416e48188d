#pragma once

#include <filesystem>

#include "hetfair/generator.hpp"
#include "hetfair/graph.hpp"
#include "hetfair/homophily.hpp"
#include "json.hpp"

namespace hetfair {

/// A graph with attributes plus free-form provenance metadata.
///
/// On disk a bundle is a directory holding
///   edges.tsv  one undirected edge per line, `u<TAB>v` with u < v, no header
///   nodes.csv  header `id,class,sensitive,f0,f1,...`, one row per node
///   meta.json  at least `n_nodes`, `n_edges` and `provenance`
struct GraphBundle {
  Graph graph;
  NodeAttributes attrs;
  nlohmann::json meta;
};

void write_bundle(const std::filesystem::path& dir, const GraphBundle& bundle);
GraphBundle read_bundle(const std::filesystem::path& dir);

/// Bundle for a generated graph; meta embeds the full generator config.
GraphBundle make_synthetic_bundle(const GeneratorConfig& config, AttributedGraph generated);

/// CSV with columns bin_lo,bin_hi,count and a trailing undefined_count row.
void write_histogram_csv(const std::filesystem::path& path, const Histogram& hist);

/// Per-node profile CSV: node_id,class_hom_k1,sens_hom_k1,class_hom_k2,sens_hom_k2
/// with empty cells for undefined values.
void write_profile_csv(const std::filesystem::path& path, const LocalHomophilyProfile& profile);

}  // namespace hetfair
