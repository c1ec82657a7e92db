#pragma once

#include <map>
#include <string>
#include <vector>

#include "attrembed/model.hpp"

namespace attrembed {

/// Everything a pipeline run needs: model hyperparameters plus dataset
/// paths, task selector and output locations. Loaded from a flat key=value
/// file; command-line flags override individual keys.
struct RunConfig {
  ModelConfig model;

  // dataset, either an edge-list triple or a citation-format pair
  std::string edges_path;
  std::string attrs_path;
  std::string labels_path;
  std::string content_path;
  std::string cites_path;

  std::string task = "lp";  // lp | nc
  double holdout_fraction = 0.5;
  double train_fraction = 0.3;
  int repeats = 10;

  std::string embeddings_out;
  std::string embeddings_in;  // nc only: evaluate precomputed embeddings
  std::string train_log_out;
  std::string report_out;
  std::string walks_out;
  std::string checkpoint_out;
  std::string resume_from;
  std::string r_cache;

  bool has_edge_list() const { return !edges_path.empty(); }
  bool has_citation_files() const { return !content_path.empty(); }

  AttributedGraph load_graph() const;

  /// Throws std::invalid_argument on unusable combinations.
  void validate() const;

  std::map<std::string, std::string> snapshot() const;
};

/// Parses "key = value" lines ('#' starts a comment). Unknown keys throw.
RunConfig parse_config_file(const std::string& path);

/// Applies one key=value pair onto an existing config. Shared by the file
/// parser and the CLI override flags.
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);

/// Every key apply_config_entry accepts, in a stable order. The CLI derives
/// its override flags from this list.
const std::vector<std::string>& config_keys();

std::vector<int> parse_int_list(const std::string& csv);
std::vector<double> parse_double_list(const std::string& csv);

}  // namespace attrembed
