#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <numeric>

#include "hetfair/bundle.hpp"
#include "hetfair/fairness.hpp"
#include "hetfair/generator.hpp"
#include "hetfair/homophily.hpp"
#include "hetfair/ingest.hpp"
#include "hetfair/models.hpp"
#include "hetfair/sweep.hpp"

namespace py = pybind11;
using namespace hetfair;

namespace {

using Labels = std::vector<std::uint8_t>;
using Rows = std::vector<std::vector<double>>;

std::vector<NodeId> subset_or_all(const std::optional<std::vector<NodeId>>& subset,
                                  std::size_t n) {
  if (subset) return *subset;
  std::vector<NodeId> all(n);
  std::iota(all.begin(), all.end(), NodeId{0});
  return all;
}

Tensor to_tensor(const Rows& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Tensor t(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw std::invalid_argument("ragged feature rows");
    for (std::size_t c = 0; c < cols; ++c) t(r, c) = rows[r][c];
  }
  return t;
}

Rows to_rows(const Tensor& t) {
  Rows out(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) out[r].assign(t.row(r).begin(), t.row(r).end());
  return out;
}

Labels labels_of(const LabelVector& v) { return {v.values().begin(), v.values().end()}; }

KvConfig kv_from(const py::dict& d) {
  KvConfig kv;
  for (const auto& [k, v] : d) {
    std::string text;
    if (py::isinstance<py::bool_>(v)) {
      text = v.cast<bool>() ? "true" : "false";
    } else if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
      for (const auto& item : v) text += (text.empty() ? "" : ",") + py::str(item).cast<std::string>();
    } else {
      text = py::str(v).cast<std::string>();
    }
    kv.set(py::str(k).cast<std::string>(), text);
  }
  return kv;
}

py::dict report_dict(const FairnessReport& r) {
  py::dict d;
  d["n_nodes"] = r.n_nodes;
  d["f1"] = r.f1;
  d["accuracy"] = r.accuracy;
  d["delta_sp"] = r.delta_sp;
  d["delta_eo"] = r.delta_eo;
  return d;
}

py::dict bundle_dict(const GraphBundle& b) {
  py::dict d;
  d["graph"] = b.graph;
  d["cls"] = labels_of(b.attrs.cls);
  d["sensitive"] = labels_of(b.attrs.sensitive);
  d["features"] = to_rows(b.attrs.features);
  return d;
}

NodeAttributes attrs_from(const Labels& cls, const Labels& sens, const Rows& features) {
  return {LabelVector(cls), LabelVector(sens), to_tensor(features)};
}

}  // namespace

PYBIND11_MODULE(_hetfair, m) {
  m.doc() = "Graph generation, GNN training and fairness evaluation under local heterophily";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Graph>(m, "Graph")
      .def_static("from_edges",
                  [](std::size_t n, const std::vector<Edge>& edges) {
                    return Graph::from_edges(n, edges);
                  },
                  py::arg("n_nodes"), py::arg("edges"))
      .def_property_readonly("n_nodes", &Graph::n_nodes)
      .def_property_readonly("n_edges", &Graph::n_edges)
      .def("neighbors",
           [](const Graph& g, NodeId u) {
             if (u >= g.n_nodes()) throw py::index_error("node out of range");
             auto nb = g.neighbors(u);
             return std::vector<NodeId>(nb.begin(), nb.end());
           })
      .def("degree", [](const Graph& g, NodeId u) {
        if (u >= g.n_nodes()) throw py::index_error("node out of range");
        return g.degree(u);
      })
      .def("has_edge", &Graph::has_edge)
      .def("edge_list", &Graph::edge_list)
      .def("__repr__", [](const Graph& g) {
        return "<Graph n_nodes=" + std::to_string(g.n_nodes()) +
               " n_edges=" + std::to_string(g.n_edges()) + ">";
      });

  m.def("global_homophily",
        [](const Graph& g, const Labels& labels) { return global_homophily(g, LabelVector(labels)); },
        py::arg("graph"), py::arg("labels"));
  m.def("local_homophily",
        [](const Graph& g, const Labels& labels, NodeId u, int k) {
          return local_homophily(g, LabelVector(labels), u, k);
        },
        py::arg("graph"), py::arg("labels"), py::arg("node"), py::arg("k") = 1);
  m.def("khop_subgraph_edges", &khop_subgraph_edges, py::arg("graph"), py::arg("node"),
        py::arg("k"));

  py::class_<LocalHomophilyProfile>(m, "HomophilyProfile")
      .def("class_hom", &LocalHomophilyProfile::class_hom, py::arg("node"), py::arg("k") = 1)
      .def("sens_hom", &LocalHomophilyProfile::sens_hom, py::arg("node"), py::arg("k") = 1)
      .def_property_readonly("n_nodes", &LocalHomophilyProfile::n_nodes)
      .def("histogram",
           [](const LocalHomophilyProfile& p, const std::string& channel, int k, double width) {
             if (channel != "class" && channel != "sensitive") {
               throw ConfigError("channel must be `class` or `sensitive`");
             }
             const auto h = homophily_histogram(
                 p, channel == "class" ? Channel::kClass : Channel::kSensitive, k, width);
             py::dict d;
             d["bin_lo"] = h.bin_lo;
             d["bin_hi"] = h.bin_hi;
             d["counts"] = h.counts;
             d["undefined_count"] = h.undefined_count;
             return d;
           },
           py::arg("channel"), py::arg("k") = 1, py::arg("bin_width") = 0.2);
  m.def("homophily_profile",
        [](const Graph& g, const Labels& cls, const Labels& sens, unsigned workers) {
          py::gil_scoped_release release;
          return homophily_profile(g, LabelVector(cls), LabelVector(sens), workers);
        },
        py::arg("graph"), py::arg("cls"), py::arg("sensitive"), py::arg("workers") = 1);

  m.def("generate",
        [](const py::kwargs& kwargs) {
          const auto config = GeneratorConfig::from_kv(kv_from(kwargs));
          return bundle_dict(make_synthetic_bundle(config, generate(config)));
        },
        "Synthetic attributed graph; keyword arguments are generator config keys.");
  m.def("expected_edge_count", &expected_edge_count, py::arg("n_nodes"), py::arg("m"));

  m.def("statistical_parity",
        [](const Labels& pred, const Labels& sens, std::optional<std::vector<NodeId>> subset) {
          std::vector<double> prob(pred.begin(), pred.end());
          return statistical_parity(Predictions::from_probabilities(prob), LabelVector(sens),
                                    subset_or_all(subset, pred.size()));
        },
        py::arg("predicted"), py::arg("sensitive"), py::arg("subset") = py::none());
  m.def("equal_opportunity",
        [](const Labels& pred, const Labels& truth, const Labels& sens,
           std::optional<std::vector<NodeId>> subset) {
          std::vector<double> prob(pred.begin(), pred.end());
          return equal_opportunity(Predictions::from_probabilities(prob), LabelVector(truth),
                                   LabelVector(sens), subset_or_all(subset, pred.size()));
        },
        py::arg("predicted"), py::arg("truth"), py::arg("sensitive"), py::arg("subset") = py::none());
  m.def("f1_binary",
        [](const Labels& pred, const Labels& truth, std::optional<std::vector<NodeId>> subset) {
          std::vector<double> prob(pred.begin(), pred.end());
          return f1_binary(Predictions::from_probabilities(prob), LabelVector(truth),
                           subset_or_all(subset, pred.size()));
        },
        py::arg("predicted"), py::arg("truth"), py::arg("subset") = py::none());
  m.def("accuracy",
        [](const Labels& pred, const Labels& truth, std::optional<std::vector<NodeId>> subset) {
          std::vector<double> prob(pred.begin(), pred.end());
          return accuracy(Predictions::from_probabilities(prob), LabelVector(truth),
                          subset_or_all(subset, pred.size()));
        },
        py::arg("predicted"), py::arg("truth"), py::arg("subset") = py::none());

  m.def("make_splits",
        [](std::size_t n, std::uint64_t seed) {
          const auto s = make_splits(n, seed);
          py::dict d;
          d["train"] = s.train;
          d["val"] = s.val;
          d["test"] = s.test;
          return d;
        },
        py::arg("n_nodes"), py::arg("seed"));

  m.def("train",
        [](const Graph& g, const Labels& cls, const Labels& sens, const Rows& features,
           std::uint64_t split_seed, const py::kwargs& kwargs) {
          const auto cfg = ModelConfig::from_kv(kv_from(kwargs));
          const auto attrs = attrs_from(cls, sens, features);
          const auto splits = make_splits(g.n_nodes(), split_seed);
          TrainResult r;
          {
            py::gil_scoped_release release;
            r = train(g, attrs, splits, cfg);
          }
          py::dict d;
          d["predicted"] = labels_of(r.predictions.predicted);
          d["prob_class1"] = r.predictions.prob_class1;
          d["best_epoch"] = r.trace.best_epoch;
          d["train_loss"] = r.trace.train_loss;
          d["val_f1"] = r.trace.val_f1;
          d["test"] = report_dict(fairness_report(r.predictions, attrs.cls, attrs.sensitive,
                                                  splits.test));
          return d;
        },
        py::arg("graph"), py::arg("cls"), py::arg("sensitive"), py::arg("features"),
        py::arg("split_seed") = 0,
        "Train one model; keyword arguments are model config keys (model, epochs, lr, ...).");

  m.def("stratified_report",
        [](const Graph& g, const Labels& cls, const Labels& sens, const Labels& pred, int k,
           std::optional<std::vector<NodeId>> subset) {
          std::vector<double> prob(pred.begin(), pred.end());
          const auto preds = Predictions::from_probabilities(prob);
          const NodeAttributes attrs{LabelVector(cls), LabelVector(sens), Tensor()};
          const auto profile = homophily_profile(g, attrs.cls, attrs.sensitive);
          const auto rep =
              stratified_report(preds, attrs, profile, k, subset_or_all(subset, pred.size()));
          py::dict bins;
          for (const auto& [bin, r] : rep.bins) {
            bins[py::make_tuple(bin.class_bin, bin.sens_bin)] = report_dict(r);
          }
          py::dict d;
          d["bins"] = bins;
          d["undefined_node_count"] = rep.undefined_node_count;
          return d;
        },
        py::arg("graph"), py::arg("cls"), py::arg("sensitive"), py::arg("predicted"),
        py::arg("k") = 1, py::arg("subset") = py::none());

  m.def("ingest",
        [](const std::string& edges, const std::string& attributes, const std::string& class_column,
           const std::string& sensitive_column, const std::vector<std::string>& features,
           const std::string& id_column) {
          IngestOptions opt;
          opt.edge_file = edges;
          opt.attribute_file = attributes;
          opt.class_column = class_column;
          opt.sensitive_column = sensitive_column;
          opt.feature_columns = features;
          opt.id_column = id_column;
          const auto r = ingest(opt);
          auto d = bundle_dict(r.bundle);
          d["original_ids"] = r.original_ids;
          return d;
        },
        py::arg("edges"), py::arg("attributes"), py::arg("class_column") = "class",
        py::arg("sensitive_column") = "sensitive", py::arg("features") = std::vector<std::string>{},
        py::arg("id_column") = "");

  m.def("read_bundle", [](const std::filesystem::path& dir) { return bundle_dict(read_bundle(dir)); },
        py::arg("path"));

  m.def("run_sweep",
        [](const py::dict& config) {
          const auto spec = SweepSpec::from_kv(kv_from(config));
          SweepResult r;
          {
            py::gil_scoped_release release;
            r = run_sweep(spec);
          }
          py::dict d;
          d["root"] = r.root.string();
          d["runs"] = r.records.size();
          d["resumed"] = r.resumed;
          d["failures"] = r.failures().size();
          return d;
        },
        py::arg("config"), "Run a sweep from a dict of sweep config keys.");
}
