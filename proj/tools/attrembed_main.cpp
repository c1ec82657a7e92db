// Command-line front end: synthesize datasets, train embeddings, evaluate
// them on link prediction / node classification, and grid-search the branch
// weights. Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "attrembed/config.hpp"
#include "attrembed/eval.hpp"
#include "attrembed/graph.hpp"
#include "attrembed/model.hpp"
#include "attrembed/preprocess.hpp"
#include "attrembed/walks.hpp"

namespace {

using namespace attrembed;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct CommonArgs {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
};

// Registers --config plus one string flag per config key; flag values are
// collected and applied on top of the file in build_config().
void add_config_flags(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path,
                  "key=value config file; flags override its entries");
  for (const std::string& key : config_keys()) {
    cmd->add_option_function<std::string>(
           "--" + key,
           [args, key](const std::string& value) {
             args->overrides.emplace_back(key, value);
           },
           "config key " + key)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
}

RunConfig build_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) {
    cfg = parse_config_file(args.config_path);
  }
  for (const auto& [key, value] : args.overrides) {
    apply_config_entry(cfg, key, value);
  }
  return cfg;
}

std::vector<std::string> node_ids(const AttributedGraph& g) {
  if (!g.original_ids.empty()) {
    return g.original_ids;
  }
  std::vector<std::string> ids(g.n);
  for (int v = 0; v < g.n; ++v) {
    ids[v] = std::to_string(v);
  }
  return ids;
}

// Loads the cached reconstruction when the file exists, otherwise builds it
// and fills the cache. Returns true when `out` was populated.
bool obtain_reconstruction(const AttributedGraph& g, const RunConfig& cfg,
                           Mat* out) {
  if (cfg.r_cache.empty()) {
    return false;
  }
  if (std::filesystem::exists(cfg.r_cache)) {
    *out = load_matrix_cache(cfg.r_cache);
    std::cerr << "reconstruction cache: loaded " << cfg.r_cache << "\n";
  } else {
    *out = build_reconstruction(g, cfg.model.structure_weight,
                                cfg.model.attribute_weight)
               .R;
    save_matrix_cache(*out, cfg.r_cache);
    std::cerr << "reconstruction cache: wrote " << cfg.r_cache << "\n";
  }
  return true;
}

void print_epoch_progress(const EpochStats& s, int total_epochs) {
  if (s.epoch == 1 || s.epoch == total_epochs || s.epoch % 10 == 0) {
    std::fprintf(stderr,
                 "epoch %d/%d  total=%.6f  sg=%.6f  ae=%.6f  fop=%.6f\n",
                 s.epoch, total_epochs, s.total, s.skipgram, s.autoencoder,
                 s.first_order);
  }
}

int cmd_train(const CommonArgs& args) {
  RunConfig cfg = build_config(args);
  cfg.validate();
  AttributedGraph g = cfg.load_graph();
  std::cerr << "graph: " << g.n << " nodes, " << g.num_edges() << " edges, "
            << g.attr_dim() << " attributes\n";

  Mat cached;
  const Mat* prebuilt = obtain_reconstruction(g, cfg, &cached) ? &cached
                                                               : nullptr;
  ModelParams resumed;
  const ModelParams* resume = nullptr;
  if (!cfg.resume_from.empty()) {
    resumed = ModelParams::load(cfg.resume_from);
    resume = &resumed;
    std::cerr << "resumed parameters from " << cfg.resume_from << "\n";
  }

  const int total_epochs = cfg.model.epochs;
  TrainResult res =
      train(g, cfg.model, resume,
            [total_epochs](const EpochStats& s) {
              print_epoch_progress(s, total_epochs);
            },
            prebuilt);

  std::string emb_path =
      cfg.embeddings_out.empty() ? "embeddings.txt" : cfg.embeddings_out;
  export_embeddings(res.embeddings, node_ids(g), emb_path);
  std::cout << "embeddings: " << emb_path << " (" << g.n << " x "
            << cfg.model.embedding_dim() << ")\n";
  std::cout << "epochs_run: " << res.epochs_run << "\n";
  if (!res.log.empty()) {
    std::cout << "final_total_loss: " << res.log.back().total << "\n";
  }
  if (!cfg.train_log_out.empty()) {
    write_training_log(res.log, cfg.train_log_out);
    std::cout << "training_log: " << cfg.train_log_out << "\n";
  }
  if (!cfg.checkpoint_out.empty()) {
    res.params.save(cfg.checkpoint_out);
    std::cout << "checkpoint: " << cfg.checkpoint_out << "\n";
  }
  if (!cfg.walks_out.empty()) {
    save_walks(training_walks(g, cfg.model), cfg.walks_out);
    std::cout << "walks: " << cfg.walks_out << "\n";
  }
  return kExitOk;
}

void print_report(const EvalReport& rep) {
  std::printf("%-18s %s\n", "task", rep.task.c_str());
  std::printf("%-18s %" PRIu64 "\n", "seed", rep.seed);
  if (rep.task == "lp") {
    std::printf("%-18s %.6f\n", "auc", rep.auc);
    std::printf("%-18s %d\n", "split_shortfall", rep.split_shortfall);
  } else {
    std::printf("%-18s %d\n", "repeats", rep.repeats);
    std::printf("%-18s %.6f\n", "micro_f1_mean", rep.micro_f1_mean);
    std::printf("%-18s %.6f\n", "macro_f1_mean", rep.macro_f1_mean);
    std::printf("%4s %10s %10s\n", "run", "micro", "macro");
    for (std::size_t i = 0; i < rep.micro_runs.size(); ++i) {
      std::printf("%4zu %10.6f %10.6f\n", i + 1, rep.micro_runs[i],
                  rep.macro_runs[i]);
    }
  }
}

EvalReport evaluate(const AttributedGraph& g, const RunConfig& cfg) {
  if (cfg.task == "lp") {
    return link_prediction_eval(g, cfg.model, cfg.holdout_fraction,
                                cfg.model.seed);
  }
  if (!g.has_labels()) {
    throw std::invalid_argument(
        "task nc needs labeled nodes; this dataset has no labels");
  }
  Mat Y;
  if (!cfg.embeddings_in.empty()) {
    auto [ids, loaded] = load_embeddings(cfg.embeddings_in);
    if (static_cast<int>(loaded.rows()) != g.n) {
      throw std::runtime_error("embeddings file rows (" +
                               std::to_string(loaded.rows()) +
                               ") do not match the graph (" +
                               std::to_string(g.n) + " nodes)");
    }
    Y = std::move(loaded);
  } else {
    Y = train(g, cfg.model).embeddings;
  }
  EvalReport rep = node_classification_eval(
      Y, g.labels, g.num_classes(), cfg.train_fraction, cfg.repeats,
      cfg.model.seed);
  return rep;
}

int cmd_eval(const CommonArgs& args) {
  RunConfig cfg = build_config(args);
  cfg.validate();
  AttributedGraph g = cfg.load_graph();
  EvalReport rep = evaluate(g, cfg);
  rep.config_snapshot = cfg.snapshot();
  print_report(rep);
  if (rep.split_shortfall > 0) {
    std::cerr << "warning: " << rep.split_shortfall
              << " requested holdout edges were bridges and stayed in the "
                 "training graph\n";
  }
  if (!cfg.report_out.empty()) {
    rep.append_to_log(cfg.report_out);
    std::cerr << "report appended to " << cfg.report_out << "\n";
  }
  return kExitOk;
}

// The six branch/blend weights the grid command may sweep.
const std::vector<std::string>& grid_keys() {
  static const std::vector<std::string> keys = {
      "structure_weight",   "attribute_weight", "nonzero_penalty",
      "recon_weight",       "first_order_weight", "reg_weight"};
  return keys;
}

struct GridRow {
  std::vector<std::pair<std::string, std::string>> assignment;
  double metric = 0;
};

int cmd_grid(const CommonArgs& args,
             const std::vector<std::string>& grid_specs,
             const std::string& grid_out) {
  RunConfig base = build_config(args);
  base.validate();

  // Parse "key=v1,v2,..." specs, restricted to the tunable weights.
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const std::string& spec : grid_specs) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("grid spec must be key=v1,v2,...: " + spec);
    }
    std::string key = spec.substr(0, eq);
    if (std::find(grid_keys().begin(), grid_keys().end(), key) ==
        grid_keys().end()) {
      throw std::invalid_argument(
          "grid key must be one of the branch weights: " + key);
    }
    std::vector<double> values = parse_double_list(spec.substr(eq + 1));
    std::vector<std::string> as_text;
    for (double v : values) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      as_text.emplace_back(buf);
    }
    axes.emplace_back(key, std::move(as_text));
  }
  if (axes.empty()) {
    throw std::invalid_argument(
        "empty grid: pass at least one --grid key=v1,v2,...");
  }

  AttributedGraph g = base.load_graph();
  std::size_t combos = 1;
  for (const auto& [key, values] : axes) {
    combos *= values.size();
  }
  std::cerr << "grid: " << combos << " combinations on task " << base.task
            << "\n";

  std::vector<GridRow> rows;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t c = 0; c < combos; ++c) {
    RunConfig cfg = base;
    GridRow row;
    std::size_t rest = c;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& [key, values] = axes[a];
      const std::string& value = values[rest % values.size()];
      rest /= values.size();
      apply_config_entry(cfg, key, value);
      row.assignment.emplace_back(key, value);
    }
    EvalReport rep = evaluate(g, cfg);
    row.metric = cfg.task == "lp" ? rep.auc : rep.micro_f1_mean;
    std::cerr << "combo " << (c + 1) << "/" << combos << ": metric="
              << row.metric << "\n";
    rows.push_back(std::move(row));
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const GridRow& a, const GridRow& b) {
                     return a.metric > b.metric;
                   });

  const std::string metric_name =
      base.task == "lp" ? "auc" : "micro_f1_mean";
  std::ostringstream table;
  for (const auto& [key, values] : axes) {
    table << key << "\t";
  }
  table << metric_name << "\n";
  for (const GridRow& row : rows) {
    for (const auto& [key, value] : row.assignment) {
      table << value << "\t";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", row.metric);
    table << buf << "\n";
  }
  std::cout << table.str();
  if (!grid_out.empty()) {
    std::ofstream out(grid_out);
    if (!out) {
      throw std::runtime_error("cannot write grid table: " + grid_out);
    }
    out << table.str();
    std::cerr << "grid table written to " << grid_out << "\n";
  }

  std::cout << "best:";
  for (const auto& [key, value] : rows.front().assignment) {
    std::cout << " " << key << "=" << value;
  }
  std::printf(" %s=%.6f\n", metric_name.c_str(), rows.front().metric);
  return kExitOk;
}

int cmd_synth(const std::string& out_prefix, int nodes_per_block, int blocks,
              double p_in, double p_out, int attr_dim, double attr_noise,
              std::uint64_t seed) {
  AttributedGraph g = generate_sbm_attributed(nodes_per_block, blocks, p_in,
                                              p_out, attr_dim, attr_noise,
                                              seed);
  save_graph(g, out_prefix);
  std::cout << "nodes: " << g.n << "\n";
  std::cout << "edges: " << g.num_edges() << "\n";
  std::cout << "files: " << out_prefix << ".edges " << out_prefix << ".attrs "
            << out_prefix << ".labels\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "attrembed: embeddings for attributed networks (joint structural + "
      "attribute objectives), with link-prediction and node-classification "
      "evaluation"};
  app.require_subcommand(1);

  CommonArgs train_args;
  CLI::App* train_cmd =
      app.add_subcommand("train", "learn embeddings and write them to disk");
  add_config_flags(train_cmd, &train_args);

  CommonArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "train (or load) embeddings and score the selected task");
  add_config_flags(eval_cmd, &eval_args);

  CommonArgs grid_args;
  std::vector<std::string> grid_specs;
  std::string grid_out;
  CLI::App* grid_cmd = app.add_subcommand(
      "grid", "sweep branch weights over a grid and rank the results");
  add_config_flags(grid_cmd, &grid_args);
  grid_cmd->add_option("--grid", grid_specs,
                       "axis spec key=v1,v2,... (repeatable); keys: "
                       "structure_weight attribute_weight nonzero_penalty "
                       "recon_weight first_order_weight reg_weight");
  grid_cmd->add_option("--out", grid_out, "file for the ranked table");

  std::string synth_prefix;
  int nodes_per_block = 30;
  int blocks = 2;
  double p_in = 0.3;
  double p_out = 0.02;
  int attr_dim = 16;
  double attr_noise = 0.1;
  std::uint64_t synth_seed = 1;
  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "write a stochastic-block-model attributed graph");
  synth_cmd->add_option("--out", synth_prefix, "output path prefix")
      ->required();
  synth_cmd->add_option("--nodes-per-block", nodes_per_block,
                        "nodes in each block");
  synth_cmd->add_option("--blocks", blocks, "number of blocks");
  synth_cmd->add_option("--p-in", p_in, "within-block edge probability");
  synth_cmd->add_option("--p-out", p_out, "cross-block edge probability");
  synth_cmd->add_option("--attr-dim", attr_dim, "attribute dimension");
  synth_cmd->add_option("--attr-noise", attr_noise,
                        "attribute bit-flip probability");
  synth_cmd->add_option("--seed", synth_seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) {
      return cmd_train(train_args);
    }
    if (*eval_cmd) {
      return cmd_eval(eval_args);
    }
    if (*grid_cmd) {
      return cmd_grid(grid_args, grid_specs, grid_out);
    }
    if (*synth_cmd) {
      return cmd_synth(synth_prefix, nodes_per_block, blocks, p_in, p_out,
                       attr_dim, attr_noise, synth_seed);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
