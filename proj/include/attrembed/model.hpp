#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "attrembed/graph.hpp"
#include "attrembed/preprocess.hpp"
#include "attrembed/walks.hpp"

namespace attrembed {

enum class Activation { kTanh, kSigmoid };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

/// Hyperparameters of the three-branch model. The encoder maps an n-dim
/// reconstruction row through hidden_dims (last entry = embedding dim); the
/// decoder mirrors it back. Branch weights scale the autoencoder and
/// first-order losses against the skip-gram loss, reg_weight scales the
/// weight-decay term.
struct ModelConfig {
  std::vector<int> hidden_dims = {256, 128};

  double structure_weight = 1.0;   // adjacency share of the encoder input
  double attribute_weight = 1.0;   // attribute-similarity share
  double nonzero_penalty = 5.0;    // reconstruction penalty on non-zero entries, > 1
  double recon_weight = 1.0;       // autoencoder branch
  double first_order_weight = 1.0; // edge-probability branch
  double reg_weight = 1e-4;        // L2 on encoder/decoder weight matrices

  int walks_per_node = 10;
  int walk_length = 80;
  int window = 10;
  int negatives = 10;
  // Context pairs consumed per node per epoch; 0 uses every pair each epoch.
  int sg_pairs_per_node = 200;
  bool exclude_center_negatives = false;

  Activation activation = Activation::kTanh;
  double learning_rate = 0.025;
  double momentum = 0.0;
  int batch_size = 64;
  int epochs = 200;
  double early_stop_tol = 1e-4;
  int early_stop_window = 10;
  std::uint64_t seed = 1;

  int embedding_dim() const { return hidden_dims.back(); }

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// Encoder/decoder weights plus the skip-gram context matrix. Layer k of the
/// encoder maps dims[k] -> dims[k+1]; the decoder mirrors the chain in
/// reverse. context row v is the output vector of node v in the skip-gram
/// head.
struct ModelParams {
  std::vector<Mat> enc_w;
  std::vector<Eigen::RowVectorXd> enc_b;
  std::vector<Mat> dec_w;
  std::vector<Eigen::RowVectorXd> dec_b;
  Mat context;

  int layer_count() const { return static_cast<int>(enc_w.size()); }
  int input_dim() const { return static_cast<int>(enc_w.front().rows()); }
  int embedding_dim() const { return static_cast<int>(enc_w.back().cols()); }
  std::vector<int> dims() const;
  bool all_finite() const;

  /// Uniform init in [-s, s] with s = sqrt(6 / (fan_in + fan_out)) per
  /// matrix; biases start at zero.
  static ModelParams init(const std::vector<int>& dims, int n_nodes,
                          std::uint64_t seed);

  /// Binary checkpoint: shape header then row-major doubles per tensor.
  void save(const std::string& path) const;
  static ModelParams load(const std::string& path);
};

/// One skip-gram training example: a (center, context) pair with its
/// pre-drawn negative nodes.
struct SgExample {
  int center = 0;
  int context = 0;
  std::vector<int> negatives;
};

/// Aligned mini-batch for the three branches. Any part may be empty; empty
/// parts contribute zero to the combined objective.
struct BatchBundle {
  std::vector<std::pair<int, int>> edges;  // first-order: existing edges
  std::vector<int> rows;                   // autoencoder: node ids of R rows
  std::vector<SgExample> sg;
};

Eigen::RowVectorXd encode(const ModelParams& p, const Eigen::RowVectorXd& row,
                          Activation act);
Mat encode_batch(const ModelParams& p, const Mat& rows, Activation act);
Eigen::RowVectorXd decode(const ModelParams& p, const Eigen::RowVectorXd& y,
                          Activation act);

/// Mean over the batch of -log sigma(y_i . y_j). Every pair must be an edge;
/// throws on an empty batch.
double loss_first_order(const ModelParams& p, const Mat& R,
                        const std::vector<std::pair<int, int>>& edges,
                        Activation act);

/// Sum over the batch rows of ||(decode(encode(R_i)) - R_i) * b_i||^2 where
/// b_i carries `chi` on non-zero entries of R_i and 1 elsewhere.
double loss_autoencoder(const ModelParams& p, const Mat& R,
                        const std::vector<int>& rows, double chi,
                        Activation act);

/// Negative-sampling skip-gram loss, summed over examples. Throws on an
/// empty batch.
double loss_skipgram(const ModelParams& p, const Mat& R,
                     const std::vector<SgExample>& sg, Activation act);

/// Half the summed squared Frobenius norms of encoder and decoder weight
/// matrices. Biases and the context matrix are excluded.
double loss_regularizer(const ModelParams& p);

/// skip-gram + recon_weight * autoencoder + first_order_weight * first-order
/// + reg_weight * regularizer. Empty sub-batches contribute zero.
double total_loss(const ModelParams& p, const Mat& R, const BatchBundle& b,
                  const ModelConfig& cfg);

/// Parameter-shaped gradient set.
struct Gradients {
  std::vector<Mat> enc_w;
  std::vector<Eigen::RowVectorXd> enc_b;
  std::vector<Mat> dec_w;
  std::vector<Eigen::RowVectorXd> dec_b;
  Mat context;

  static Gradients zeros_like(const ModelParams& p);
  bool all_finite() const;
};

/// Exact analytic gradient of total_loss with respect to every parameter,
/// including the shared-encoder contributions from all three branches.
Gradients gradients(const ModelParams& p, const Mat& R, const BatchBundle& b,
                    const ModelConfig& cfg);

struct EpochStats {
  int epoch = 0;
  double total = 0;
  double skipgram = 0;
  double autoencoder = 0;
  double first_order = 0;
  double regularizer = 0;
};

struct TrainResult {
  Mat embeddings;
  ModelParams params;
  std::vector<EpochStats> log;
  int epochs_run = 0;
};

struct TrainingDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The walk corpus train() consumes for this graph and config; exposed so
/// callers can export exactly what training saw.
WalkCorpus training_walks(const AttributedGraph& g, const ModelConfig& cfg);

/// Full pipeline: build R, generate walks, then alternate per-batch SGD
/// steps on the first-order, autoencoder(+regularizer) and skip-gram
/// branches until the epoch budget or early stop. Deterministic under
/// cfg.seed. Throws TrainingDiverged when the loss stops being finite.
/// prebuilt_reconstruction, when given, must be the n x n blend for this
/// graph and config; it skips the R build.
TrainResult train(const AttributedGraph& g, const ModelConfig& cfg,
                  const ModelParams* resume_from = nullptr,
                  const std::function<void(const EpochStats&)>& on_epoch = {},
                  const Mat* prebuilt_reconstruction = nullptr);

/// Text format: header "n d", then one line "orig_id v1 ... vd" per node.
void export_embeddings(const Mat& Y, const std::vector<std::string>& ids,
                       const std::string& path);
std::pair<std::vector<std::string>, Mat> load_embeddings(
    const std::string& path);

/// CSV lines "epoch,total,skipgram,autoencoder,first_order,regularizer".
void write_training_log(const std::vector<EpochStats>& log,
                        const std::string& path);

}  // namespace attrembed
