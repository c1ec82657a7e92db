#include "attrembed/config.hpp"

#include <climits>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace attrembed {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) {
    return "";
  }
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": not a number: " + v);
  }
  if (used != v.size()) {
    throw std::invalid_argument(key + ": not a number: " + v);
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": not an integer: " + v);
  }
  if (used != v.size() || out < INT_MIN || out > INT_MAX) {
    throw std::invalid_argument(key + ": not an integer: " + v);
  }
  return static_cast<int>(out);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long out;
  try {
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": not a non-negative integer: " + v);
  }
  if (used != v.size()) {
    throw std::invalid_argument(key + ": not a non-negative integer: " + v);
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") {
    return true;
  }
  if (v == "false" || v == "0" || v == "no") {
    return false;
  }
  throw std::invalid_argument(key + ": not a boolean: " + v);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  if (!trim(csv).empty() && trim(csv).back() == ',') {
    throw std::invalid_argument("trailing comma in integer list: " + csv);
  }
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      throw std::invalid_argument("empty entry in integer list: " + csv);
    }
    out.push_back(to_int("list entry", item));
  }
  if (out.empty()) {
    throw std::invalid_argument("empty integer list");
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  if (!trim(csv).empty() && trim(csv).back() == ',') {
    throw std::invalid_argument("trailing comma in number list: " + csv);
  }
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      throw std::invalid_argument("empty entry in number list: " + csv);
    }
    out.push_back(to_double("list entry", item));
  }
  if (out.empty()) {
    throw std::invalid_argument("empty number list");
  }
  return out;
}

void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value) {
  ModelConfig& m = cfg.model;
  if (key == "hidden_dims") {
    m.hidden_dims = parse_int_list(value);
  } else if (key == "structure_weight") {
    m.structure_weight = to_double(key, value);
  } else if (key == "attribute_weight") {
    m.attribute_weight = to_double(key, value);
  } else if (key == "nonzero_penalty") {
    m.nonzero_penalty = to_double(key, value);
  } else if (key == "recon_weight") {
    m.recon_weight = to_double(key, value);
  } else if (key == "first_order_weight") {
    m.first_order_weight = to_double(key, value);
  } else if (key == "reg_weight") {
    m.reg_weight = to_double(key, value);
  } else if (key == "walks_per_node") {
    m.walks_per_node = to_int(key, value);
  } else if (key == "walk_length") {
    m.walk_length = to_int(key, value);
  } else if (key == "window") {
    m.window = to_int(key, value);
  } else if (key == "negatives") {
    m.negatives = to_int(key, value);
  } else if (key == "sg_pairs_per_node") {
    m.sg_pairs_per_node = to_int(key, value);
  } else if (key == "exclude_center_negatives") {
    m.exclude_center_negatives = to_bool(key, value);
  } else if (key == "activation") {
    m.activation = activation_from_string(value);
  } else if (key == "learning_rate") {
    m.learning_rate = to_double(key, value);
  } else if (key == "momentum") {
    m.momentum = to_double(key, value);
  } else if (key == "batch_size") {
    m.batch_size = to_int(key, value);
  } else if (key == "epochs") {
    m.epochs = to_int(key, value);
  } else if (key == "early_stop_tol") {
    m.early_stop_tol = to_double(key, value);
  } else if (key == "early_stop_window") {
    m.early_stop_window = to_int(key, value);
  } else if (key == "seed") {
    m.seed = to_u64(key, value);
  } else if (key == "edges_path") {
    cfg.edges_path = value;
  } else if (key == "attrs_path") {
    cfg.attrs_path = value;
  } else if (key == "labels_path") {
    cfg.labels_path = value;
  } else if (key == "content_path") {
    cfg.content_path = value;
  } else if (key == "cites_path") {
    cfg.cites_path = value;
  } else if (key == "task") {
    if (value != "lp" && value != "nc") {
      throw std::invalid_argument("task must be lp or nc, got: " + value);
    }
    cfg.task = value;
  } else if (key == "holdout_fraction") {
    cfg.holdout_fraction = to_double(key, value);
  } else if (key == "train_fraction") {
    cfg.train_fraction = to_double(key, value);
  } else if (key == "repeats") {
    cfg.repeats = to_int(key, value);
  } else if (key == "embeddings_out") {
    cfg.embeddings_out = value;
  } else if (key == "embeddings_in") {
    cfg.embeddings_in = value;
  } else if (key == "train_log_out") {
    cfg.train_log_out = value;
  } else if (key == "report_out") {
    cfg.report_out = value;
  } else if (key == "walks_out") {
    cfg.walks_out = value;
  } else if (key == "checkpoint_out") {
    cfg.checkpoint_out = value;
  } else if (key == "resume_from") {
    cfg.resume_from = value;
  } else if (key == "r_cache") {
    cfg.r_cache = value;
  } else {
    throw std::invalid_argument("unknown config key: " + key);
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "hidden_dims",        "structure_weight",
      "attribute_weight",   "nonzero_penalty",
      "recon_weight",       "first_order_weight",
      "reg_weight",         "walks_per_node",
      "walk_length",        "window",
      "negatives",          "sg_pairs_per_node",
      "exclude_center_negatives", "activation",
      "learning_rate",      "momentum",
      "batch_size",         "epochs",
      "early_stop_tol",     "early_stop_window",
      "seed",               "edges_path",
      "attrs_path",         "labels_path",
      "content_path",       "cites_path",
      "task",               "holdout_fraction",
      "train_fraction",     "repeats",
      "embeddings_out",     "embeddings_in",
      "train_log_out",      "report_out",
      "walks_out",          "checkpoint_out",
      "resume_from",        "r_cache"};
  return keys;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ": line " + std::to_string(line_no) +
                                  ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_entry(cfg, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ": line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
  }
  return cfg;
}

AttributedGraph RunConfig::load_graph() const {
  if (has_citation_files()) {
    return load_cora_format(content_path, cites_path);
  }
  return load_edge_list(edges_path, attrs_path, labels_path);
}

void RunConfig::validate() const {
  model.validate();
  if (task != "lp" && task != "nc") {
    throw std::invalid_argument("task must be lp or nc");
  }
  if (!(holdout_fraction > 0) || !(holdout_fraction < 1)) {
    throw std::invalid_argument("holdout_fraction must be in (0, 1)");
  }
  if (!(train_fraction > 0) || !(train_fraction < 1)) {
    throw std::invalid_argument("train_fraction must be in (0, 1)");
  }
  if (repeats <= 0) {
    throw std::invalid_argument("repeats must be positive");
  }
  if (has_edge_list() && has_citation_files()) {
    throw std::invalid_argument(
        "give either an edge-list dataset or a citation dataset, not both");
  }
  if (has_edge_list()) {
    if (attrs_path.empty()) {
      throw std::invalid_argument("edges_path requires attrs_path");
    }
  } else if (has_citation_files()) {
    if (cites_path.empty()) {
      throw std::invalid_argument("content_path requires cites_path");
    }
  } else {
    throw std::invalid_argument(
        "no dataset: set edges_path/attrs_path or content_path/cites_path");
  }
}

std::map<std::string, std::string> RunConfig::snapshot() const {
  std::map<std::string, std::string> s;
  std::string dims;
  for (std::size_t i = 0; i < model.hidden_dims.size(); ++i) {
    dims += (i ? "," : "") + std::to_string(model.hidden_dims[i]);
  }
  s["hidden_dims"] = dims;
  s["structure_weight"] = fmt(model.structure_weight);
  s["attribute_weight"] = fmt(model.attribute_weight);
  s["nonzero_penalty"] = fmt(model.nonzero_penalty);
  s["recon_weight"] = fmt(model.recon_weight);
  s["first_order_weight"] = fmt(model.first_order_weight);
  s["reg_weight"] = fmt(model.reg_weight);
  s["walks_per_node"] = std::to_string(model.walks_per_node);
  s["walk_length"] = std::to_string(model.walk_length);
  s["window"] = std::to_string(model.window);
  s["negatives"] = std::to_string(model.negatives);
  s["sg_pairs_per_node"] = std::to_string(model.sg_pairs_per_node);
  s["exclude_center_negatives"] =
      model.exclude_center_negatives ? "true" : "false";
  s["activation"] = to_string(model.activation);
  s["learning_rate"] = fmt(model.learning_rate);
  s["momentum"] = fmt(model.momentum);
  s["batch_size"] = std::to_string(model.batch_size);
  s["epochs"] = std::to_string(model.epochs);
  s["early_stop_tol"] = fmt(model.early_stop_tol);
  s["early_stop_window"] = std::to_string(model.early_stop_window);
  s["seed"] = std::to_string(model.seed);
  s["task"] = task;
  s["holdout_fraction"] = fmt(holdout_fraction);
  s["train_fraction"] = fmt(train_fraction);
  s["repeats"] = std::to_string(repeats);
  if (!edges_path.empty()) {
    s["edges_path"] = edges_path;
  }
  if (!attrs_path.empty()) {
    s["attrs_path"] = attrs_path;
  }
  if (!labels_path.empty()) {
    s["labels_path"] = labels_path;
  }
  if (!content_path.empty()) {
    s["content_path"] = content_path;
  }
  if (!cites_path.empty()) {
    s["cites_path"] = cites_path;
  }
  return s;
}

}  // namespace attrembed
