#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace attrembed {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Undirected, unweighted graph with one non-negative attribute row per node
/// and optional class labels. Immutable once built; node ids are dense
/// 0..n-1, original ids are kept in a side map for export.
struct AttributedGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // unique, u < v, sorted
  std::vector<std::vector<int>> adjacency; // sorted neighbor lists
  Mat attributes;                          // n x m
  std::vector<int> labels;                 // per node, -1 = unlabeled
  std::vector<std::string> class_names;    // class id -> original label string
  std::vector<std::string> original_ids;   // node id -> id in the source files

  // load-time bookkeeping
  int dropped_self_loops = 0;
  int dropped_duplicate_edges = 0;
  int dropped_unknown_refs = 0;
  int raw_edge_lines = 0;

  int num_edges() const { return static_cast<int>(edges.size()); }
  int attr_dim() const { return static_cast<int>(attributes.cols()); }
  int degree(int v) const;
  bool has_edge(int u, int v) const;
  int num_classes() const { return static_cast<int>(class_names.size()); }
  bool has_labels() const;
  std::vector<int> degrees() const;
  std::vector<int> labeled_nodes() const;

  /// Connected components as a node -> component id map (0-based).
  std::vector<int> component_ids() const;
  int num_components() const;
};

/// Builds a validated graph from raw parts: dedups edges (including reversed
/// duplicates), drops self loops with a count, sorts adjacency lists.
AttributedGraph make_graph(int n, std::vector<std::pair<int, int>> raw_edges,
                           Mat attributes, std::vector<int> labels = {},
                           std::vector<std::string> class_names = {});

/// Edge file: "u v" per line. Attribute file: one numeric row per node, row
/// order = node id. Optional label file: "node_id class_string" lines.
AttributedGraph load_edge_list(const std::string& edge_path,
                               const std::string& attr_path,
                               const std::string& label_path = "");

/// Citation-network format: .content lines "id w1 ... wm label", .cites
/// lines "cited citing". Ids are remapped to 0..n-1 by sorted original id;
/// labels to 0..L-1 by sorted label string. Cites touching unknown ids are
/// dropped with a count.
AttributedGraph load_cora_format(const std::string& content_path,
                                 const std::string& cites_path);

/// Stochastic block model with block-indicator attribute rows whose bits are
/// flipped i.i.d. at rate attr_noise. Labels are block ids. Deterministic
/// under seed.
AttributedGraph generate_sbm_attributed(int n_per_block, int n_blocks,
                                        double p_in, double p_out,
                                        int attr_dim, double attr_noise,
                                        std::uint64_t seed);

/// Writes <prefix>.edges / <prefix>.attrs / <prefix>.labels (labels only when
/// present) in the formats load_edge_list reads back.
void save_graph(const AttributedGraph& g, const std::string& prefix);

/// Creates the directory part of `path` if it is missing, so writers can
/// target e.g. results/foo.log without a manual mkdir. Bare filenames are a
/// no-op.
void ensure_parent_dir(const std::string& path);

}  // namespace attrembed
