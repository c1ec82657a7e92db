// Python bindings for the embedding pipeline: dataset loading/synthesis,
// preprocessing, training and the two evaluation tasks.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "attrembed/config.hpp"
#include "attrembed/eval.hpp"
#include "attrembed/graph.hpp"
#include "attrembed/model.hpp"
#include "attrembed/preprocess.hpp"
#include "attrembed/walks.hpp"

namespace py = pybind11;
using namespace attrembed;

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Node embeddings for attributed networks: joint first-order, "
      "neighborhood-reconstruction and random-walk objectives.";

  py::class_<AttributedGraph>(m, "AttributedGraph")
      .def_readonly("n", &AttributedGraph::n)
      .def_readonly("edges", &AttributedGraph::edges)
      .def_readonly("attributes", &AttributedGraph::attributes)
      .def_readonly("labels", &AttributedGraph::labels)
      .def_readonly("class_names", &AttributedGraph::class_names)
      .def_readonly("original_ids", &AttributedGraph::original_ids)
      .def("num_edges", &AttributedGraph::num_edges)
      .def("num_classes", &AttributedGraph::num_classes)
      .def("attr_dim", &AttributedGraph::attr_dim)
      .def("has_labels", &AttributedGraph::has_labels)
      .def("degrees", &AttributedGraph::degrees)
      .def("__repr__", [](const AttributedGraph& g) {
        return "AttributedGraph(n=" + std::to_string(g.n) +
               ", edges=" + std::to_string(g.num_edges()) +
               ", attr_dim=" + std::to_string(g.attr_dim()) + ")";
      });

  py::enum_<Activation>(m, "Activation")
      .value("TANH", Activation::kTanh)
      .value("SIGMOID", Activation::kSigmoid);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("hidden_dims", &ModelConfig::hidden_dims)
      .def_readwrite("structure_weight", &ModelConfig::structure_weight)
      .def_readwrite("attribute_weight", &ModelConfig::attribute_weight)
      .def_readwrite("nonzero_penalty", &ModelConfig::nonzero_penalty)
      .def_readwrite("recon_weight", &ModelConfig::recon_weight)
      .def_readwrite("first_order_weight", &ModelConfig::first_order_weight)
      .def_readwrite("reg_weight", &ModelConfig::reg_weight)
      .def_readwrite("walks_per_node", &ModelConfig::walks_per_node)
      .def_readwrite("walk_length", &ModelConfig::walk_length)
      .def_readwrite("window", &ModelConfig::window)
      .def_readwrite("negatives", &ModelConfig::negatives)
      .def_readwrite("sg_pairs_per_node", &ModelConfig::sg_pairs_per_node)
      .def_readwrite("exclude_center_negatives",
                     &ModelConfig::exclude_center_negatives)
      .def_readwrite("activation", &ModelConfig::activation)
      .def_readwrite("learning_rate", &ModelConfig::learning_rate)
      .def_readwrite("momentum", &ModelConfig::momentum)
      .def_readwrite("batch_size", &ModelConfig::batch_size)
      .def_readwrite("epochs", &ModelConfig::epochs)
      .def_readwrite("early_stop_tol", &ModelConfig::early_stop_tol)
      .def_readwrite("early_stop_window", &ModelConfig::early_stop_window)
      .def_readwrite("seed", &ModelConfig::seed)
      .def("embedding_dim", &ModelConfig::embedding_dim)
      .def("validate", &ModelConfig::validate);

  py::class_<EpochStats>(m, "EpochStats")
      .def_readonly("epoch", &EpochStats::epoch)
      .def_readonly("total", &EpochStats::total)
      .def_readonly("skipgram", &EpochStats::skipgram)
      .def_readonly("autoencoder", &EpochStats::autoencoder)
      .def_readonly("first_order", &EpochStats::first_order)
      .def_readonly("regularizer", &EpochStats::regularizer);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("embeddings", &TrainResult::embeddings)
      .def_readonly("log", &TrainResult::log)
      .def_readonly("epochs_run", &TrainResult::epochs_run);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("task", &EvalReport::task)
      .def_readonly("auc", &EvalReport::auc)
      .def_readonly("micro_f1_mean", &EvalReport::micro_f1_mean)
      .def_readonly("macro_f1_mean", &EvalReport::macro_f1_mean)
      .def_readonly("micro_runs", &EvalReport::micro_runs)
      .def_readonly("macro_runs", &EvalReport::macro_runs)
      .def_readonly("repeats", &EvalReport::repeats)
      .def_readonly("split_shortfall", &EvalReport::split_shortfall)
      .def_readonly("seed", &EvalReport::seed)
      .def("to_key_values", &EvalReport::to_key_values);

  m.def("generate_sbm", &generate_sbm_attributed, py::arg("nodes_per_block"),
        py::arg("blocks"), py::arg("p_in"), py::arg("p_out"),
        py::arg("attr_dim"), py::arg("attr_noise"), py::arg("seed"),
        "Stochastic-block-model graph with noisy block-indicator attributes");
  m.def("load_edge_list", &load_edge_list, py::arg("edges_path"),
        py::arg("attrs_path"), py::arg("labels_path") = std::string(),
        "Load a dataset from edge-list, attribute and optional label files");
  m.def("load_citation_dataset", &load_cora_format, py::arg("content_path"),
        py::arg("cites_path"),
        "Load a citation dataset (.content/.cites file pair)");

  m.def("attribute_similarity", &attribute_similarity, py::arg("attributes"),
        "Pairwise cosine similarity of attribute rows, zero diagonal");
  m.def(
      "reconstruction",
      [](const AttributedGraph& g, double structure_weight,
         double attribute_weight) {
        return build_reconstruction(g, structure_weight, attribute_weight).R;
      },
      py::arg("graph"), py::arg("structure_weight") = 1.0,
      py::arg("attribute_weight") = 1.0,
      "Blend of the adjacency and the attribute-similarity matrix");

  m.def(
      "train",
      [](const AttributedGraph& g, const ModelConfig& cfg) {
        py::gil_scoped_release release;
        return train(g, cfg);
      },
      py::arg("graph"), py::arg("config") = ModelConfig(),
      "Train embeddings; returns embeddings, per-epoch log and epoch count");

  m.def(
      "link_prediction_eval",
      [](const AttributedGraph& g, const ModelConfig& cfg, double fraction,
         std::uint64_t seed) {
        py::gil_scoped_release release;
        return link_prediction_eval(g, cfg, fraction, seed);
      },
      py::arg("graph"), py::arg("config") = ModelConfig(),
      py::arg("holdout_fraction") = 0.5, py::arg("seed") = 1,
      "Hold out edges, retrain, and report the cosine-score AUC");
  m.def(
      "node_classification_eval",
      [](const Mat& Y, const std::vector<int>& labels, int num_classes,
         double train_fraction, int repeats, std::uint64_t seed) {
        py::gil_scoped_release release;
        return node_classification_eval(Y, labels, num_classes,
                                        train_fraction, repeats, seed);
      },
      py::arg("embeddings"), py::arg("labels"), py::arg("num_classes"),
      py::arg("train_fraction") = 0.3, py::arg("repeats") = 10,
      py::arg("seed") = 1,
      "Repeated train/test splits of a linear classifier on embeddings");

  m.attr("__version__") = "0.1.0";
}
