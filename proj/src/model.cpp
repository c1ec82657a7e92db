#include "attrembed/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "attrembed/rng.hpp"
#include "attrembed/walks.hpp"

namespace attrembed {

namespace {

constexpr std::uint64_t kWalkTag = 0x77a1c5;
constexpr std::uint64_t kInitTag = 0x1a17;
constexpr std::uint64_t kOrderTag = 0x0bde5;
constexpr std::uint64_t kSgTag = 0x56e6;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(sigmoid(x)) without overflow for large |x|.
double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

void apply_activation(Mat& z, Activation act) {
  if (act == Activation::kTanh) {
    z = z.array().tanh().matrix();
  } else {
    z = (1.0 / (1.0 + (-z.array()).exp())).matrix();
  }
}

// Derivative expressed through the layer output.
Mat activation_grad(const Mat& out, Activation act) {
  if (act == Activation::kTanh) {
    return (1.0 - out.array().square()).matrix();
  }
  return (out.array() * (1.0 - out.array())).matrix();
}

// acts[0] = input, acts[k+1] = output of layer k. Every encoder layer is
// activated; the final decoder layer is linear.
std::vector<Mat> encoder_trace(const ModelParams& p, const Mat& X,
                               Activation act) {
  std::vector<Mat> acts;
  acts.reserve(p.layer_count() + 1);
  acts.push_back(X);
  for (int k = 0; k < p.layer_count(); ++k) {
    Mat z = (acts.back() * p.enc_w[k]).rowwise() + p.enc_b[k];
    apply_activation(z, act);
    acts.push_back(std::move(z));
  }
  return acts;
}

std::vector<Mat> decoder_trace(const ModelParams& p, const Mat& Y,
                               Activation act) {
  std::vector<Mat> acts;
  acts.reserve(p.layer_count() + 1);
  acts.push_back(Y);
  for (int k = 0; k < p.layer_count(); ++k) {
    Mat z = (acts.back() * p.dec_w[k]).rowwise() + p.dec_b[k];
    if (k + 1 < p.layer_count()) {
      apply_activation(z, act);
    }
    acts.push_back(std::move(z));
  }
  return acts;
}

void encoder_backward(const ModelParams& p, const std::vector<Mat>& acts,
                      Mat dY, Activation act, Gradients& g) {
  for (int k = p.layer_count() - 1; k >= 0; --k) {
    Mat dz = dY.cwiseProduct(activation_grad(acts[k + 1], act));
    g.enc_w[k].noalias() += acts[k].transpose() * dz;
    g.enc_b[k] += dz.colwise().sum();
    if (k > 0) {
      dY = dz * p.enc_w[k].transpose();
    }
  }
}

// Returns the gradient with respect to the decoder input (the embeddings).
Mat decoder_backward(const ModelParams& p, const std::vector<Mat>& acts,
                     const Mat& dOut, Activation act, Gradients& g) {
  Mat d = dOut;
  for (int k = p.layer_count() - 1; k >= 0; --k) {
    Mat dz;
    if (k + 1 < p.layer_count()) {
      dz = d.cwiseProduct(activation_grad(acts[k + 1], act));
    } else {
      dz = d;
    }
    g.dec_w[k].noalias() += acts[k].transpose() * dz;
    g.dec_b[k] += dz.colwise().sum();
    d = dz * p.dec_w[k].transpose();
  }
  return d;
}

struct LossParts {
  double sg_sum = 0;
  double ae_sum = 0;
  double fop_sum = 0;
  double reg = 0;
  std::size_t sg_examples = 0;
  std::size_t ae_rows = 0;
  std::size_t fop_edges = 0;

  bool finite() const {
    return std::isfinite(sg_sum) && std::isfinite(ae_sum) &&
           std::isfinite(fop_sum) && std::isfinite(reg);
  }
};

void check_node(int v, int n, const char* what) {
  if (v < 0 || v >= n) {
    throw std::invalid_argument(std::string(what) + ": node id out of range");
  }
}

// One combined forward/backward pass over the bundle. Branch coefficients
// are baked into the gradient; the loss parts stay unweighted. ae_coeff and
// sg_coeff scale those two branch gradients, letting the trainer use
// per-row / per-example means while the public gradient keeps the raw sums.
LossParts accumulate(const ModelParams& p, const Mat& R, const BatchBundle& b,
                     const ModelConfig& cfg, Gradients* g,
                     double ae_coeff = -1.0, double sg_coeff = 1.0) {
  if (ae_coeff < 0) {
    ae_coeff = cfg.recon_weight;
  }
  const int n = static_cast<int>(R.rows());
  const Activation act = cfg.activation;
  LossParts parts;

  std::vector<int> local(n, -1);
  std::vector<int> ids;
  auto touch = [&](int v, const char* what) {
    check_node(v, n, what);
    if (local[v] < 0) {
      local[v] = static_cast<int>(ids.size());
      ids.push_back(v);
    }
  };
  for (auto [i, j] : b.edges) {
    touch(i, "first-order batch");
    touch(j, "first-order batch");
  }
  for (int r : b.rows) {
    touch(r, "autoencoder batch");
  }
  for (const auto& ex : b.sg) {
    touch(ex.center, "skip-gram batch");
    check_node(ex.context, static_cast<int>(p.context.rows()), "skip-gram context");
    for (int s : ex.negatives) {
      check_node(s, static_cast<int>(p.context.rows()), "skip-gram negative");
    }
  }

  std::vector<Mat> etr;
  Mat dY;
  if (!ids.empty()) {
    Mat X(ids.size(), n);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      X.row(r) = R.row(ids[r]);
    }
    etr = encoder_trace(p, X, act);
    dY = Mat::Zero(ids.size(), p.embedding_dim());
  }
  const Mat& Y = ids.empty() ? dY : etr.back();

  if (!b.edges.empty()) {
    const double scale =
        cfg.first_order_weight / static_cast<double>(b.edges.size());
    for (auto [i, j] : b.edges) {
      const int li = local[i], lj = local[j];
      const double s = Y.row(li).dot(Y.row(lj));
      parts.fop_sum += -log_sigmoid(s);
      if (g) {
        const double c = scale * (sigmoid(s) - 1.0);
        dY.row(li) += c * Y.row(lj);
        dY.row(lj) += c * Y.row(li);
      }
    }
    parts.fop_edges = b.edges.size();
  }

  if (!b.sg.empty()) {
    for (const auto& ex : b.sg) {
      const int lc = local[ex.center];
      const auto yc = Y.row(lc);
      const double s_pos = yc.dot(p.context.row(ex.context));
      parts.sg_sum += -log_sigmoid(s_pos);
      if (g) {
        const double c = sg_coeff * (sigmoid(s_pos) - 1.0);
        dY.row(lc) += c * p.context.row(ex.context);
        g->context.row(ex.context) += c * yc;
      }
      for (int sneg : ex.negatives) {
        const double s = yc.dot(p.context.row(sneg));
        parts.sg_sum += -log_sigmoid(-s);
        if (g) {
          const double c = sg_coeff * sigmoid(s);
          dY.row(lc) += c * p.context.row(sneg);
          g->context.row(sneg) += c * yc;
        }
      }
    }
    parts.sg_examples = b.sg.size();
  }

  if (!b.rows.empty()) {
    Mat Yae(b.rows.size(), p.embedding_dim());
    for (std::size_t r = 0; r < b.rows.size(); ++r) {
      Yae.row(r) = Y.row(local[b.rows[r]]);
    }
    std::vector<Mat> dtr = decoder_trace(p, Yae, act);
    const Mat& Rhat = dtr.back();
    Mat dRhat;
    if (g) {
      dRhat = Mat::Zero(b.rows.size(), n);
    }
    const double chi = cfg.nonzero_penalty;
    for (std::size_t r = 0; r < b.rows.size(); ++r) {
      const int node = b.rows[r];
      for (int j = 0; j < n; ++j) {
        const double pen = R(node, j) == 0.0 ? 1.0 : chi;
        const double diff = Rhat(static_cast<int>(r), j) - R(node, j);
        parts.ae_sum += diff * diff * pen * pen;
        if (g) {
          dRhat(static_cast<int>(r), j) = ae_coeff * 2.0 * diff * pen * pen;
        }
      }
    }
    parts.ae_rows = b.rows.size();
    if (g) {
      Mat dYae = decoder_backward(p, dtr, dRhat, act, *g);
      for (std::size_t r = 0; r < b.rows.size(); ++r) {
        dY.row(local[b.rows[r]]) += dYae.row(static_cast<int>(r));
      }
    }
  }

  if (g && !ids.empty()) {
    encoder_backward(p, etr, std::move(dY), act, *g);
  }

  for (int k = 0; k < p.layer_count(); ++k) {
    parts.reg += 0.5 * (p.enc_w[k].squaredNorm() + p.dec_w[k].squaredNorm());
    if (g) {
      g->enc_w[k] += cfg.reg_weight * p.enc_w[k];
      g->dec_w[k] += cfg.reg_weight * p.dec_w[k];
    }
  }
  return parts;
}

}  // namespace

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") {
    return Activation::kTanh;
  }
  if (name == "sigmoid") {
    return Activation::kSigmoid;
  }
  throw std::invalid_argument("unknown activation: " + name);
}

std::string to_string(Activation a) {
  return a == Activation::kTanh ? "tanh" : "sigmoid";
}

void ModelConfig::validate() const {
  if (hidden_dims.empty()) {
    throw std::invalid_argument("hidden_dims must not be empty");
  }
  for (int d : hidden_dims) {
    if (d <= 0) {
      throw std::invalid_argument("hidden layer sizes must be positive");
    }
  }
  if (structure_weight < 0 || attribute_weight < 0 ||
      (structure_weight == 0 && attribute_weight == 0)) {
    throw std::invalid_argument(
        "structure/attribute weights must be non-negative, at least one positive");
  }
  if (nonzero_penalty < 1) {
    throw std::invalid_argument("nonzero_penalty must be >= 1");
  }
  if (recon_weight < 0 || first_order_weight < 0 || reg_weight < 0) {
    throw std::invalid_argument("branch weights must be non-negative");
  }
  if (walks_per_node <= 0 || walk_length <= 0 || window <= 0 ||
      negatives <= 0) {
    throw std::invalid_argument("walk/window/negative counts must be positive");
  }
  if (sg_pairs_per_node < 0) {
    throw std::invalid_argument("sg_pairs_per_node must be >= 0");
  }
  if (!(learning_rate > 0)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (momentum < 0 || momentum >= 1) {
    throw std::invalid_argument("momentum must be in [0, 1)");
  }
  if (batch_size <= 0) {
    throw std::invalid_argument("batch_size must be positive");
  }
  if (epochs < 0) {
    throw std::invalid_argument("epochs must be >= 0");
  }
  if (early_stop_tol < 0 || early_stop_window <= 0) {
    throw std::invalid_argument("early stop settings out of range");
  }
}

std::vector<int> ModelParams::dims() const {
  std::vector<int> d;
  d.push_back(input_dim());
  for (const auto& w : enc_w) {
    d.push_back(static_cast<int>(w.cols()));
  }
  return d;
}

bool ModelParams::all_finite() const {
  for (const auto& w : enc_w) {
    if (!w.allFinite()) {
      return false;
    }
  }
  for (const auto& b : enc_b) {
    if (!b.allFinite()) {
      return false;
    }
  }
  for (const auto& w : dec_w) {
    if (!w.allFinite()) {
      return false;
    }
  }
  for (const auto& b : dec_b) {
    if (!b.allFinite()) {
      return false;
    }
  }
  return context.allFinite();
}

ModelParams ModelParams::init(const std::vector<int>& dims, int n_nodes,
                              std::uint64_t seed) {
  if (dims.size() < 2) {
    throw std::invalid_argument("need an input and at least one layer");
  }
  for (int d : dims) {
    if (d <= 0) {
      throw std::invalid_argument("layer sizes must be positive");
    }
  }
  if (n_nodes <= 0) {
    throw std::invalid_argument("need at least one context row");
  }
  Rng rng(seed);
  auto fill = [&rng](Mat& w) {
    const double s =
        std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (int i = 0; i < w.rows(); ++i) {
      for (int j = 0; j < w.cols(); ++j) {
        w(i, j) = rng.real(-s, s);
      }
    }
  };
  ModelParams p;
  const int K = static_cast<int>(dims.size()) - 1;
  for (int k = 0; k < K; ++k) {
    Mat w(dims[k], dims[k + 1]);
    fill(w);
    p.enc_w.push_back(std::move(w));
    p.enc_b.emplace_back(Eigen::RowVectorXd::Zero(dims[k + 1]));
  }
  for (int k = 0; k < K; ++k) {
    Mat w(dims[K - k], dims[K - k - 1]);
    fill(w);
    p.dec_w.push_back(std::move(w));
    p.dec_b.emplace_back(Eigen::RowVectorXd::Zero(dims[K - k - 1]));
  }
  p.context = Mat(n_nodes, dims[K]);
  fill(p.context);
  return p;
}

namespace {

constexpr char kParamsMagic[4] = {'A', 'E', 'M', 'P'};

void write_mat(std::ofstream& out, const Mat& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

void write_vec(std::ofstream& out, const Eigen::RowVectorXd& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_mat(std::ifstream& in, Mat& m) {
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
}

void read_vec(std::ifstream& in, Eigen::RowVectorXd& v) {
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
}

}  // namespace

void ModelParams::save(const std::string& path) const {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write checkpoint: " + path);
  }
  out.write(kParamsMagic, 4);
  std::uint32_t version = 1;
  std::uint32_t K = static_cast<std::uint32_t>(layer_count());
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&K), sizeof(K));
  for (int d : dims()) {
    std::uint64_t v = static_cast<std::uint64_t>(d);
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  std::uint64_t n = static_cast<std::uint64_t>(context.rows());
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (int k = 0; k < layer_count(); ++k) {
    write_mat(out, enc_w[k]);
    write_vec(out, enc_b[k]);
  }
  for (int k = 0; k < layer_count(); ++k) {
    write_mat(out, dec_w[k]);
    write_vec(out, dec_b[k]);
  }
  write_mat(out, context);
  if (!out) {
    throw std::runtime_error("short write to checkpoint: " + path);
  }
}

ModelParams ModelParams::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open checkpoint: " + path);
  }
  char magic[4];
  std::uint32_t version = 0, K = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&K), sizeof(K));
  if (!in || std::memcmp(magic, kParamsMagic, 4) != 0 || version != 1 ||
      K == 0 || K > 64) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  std::vector<std::uint64_t> dims(K + 1);
  for (auto& d : dims) {
    in.read(reinterpret_cast<char*>(&d), sizeof(d));
  }
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in) {
    throw std::runtime_error("truncated checkpoint: " + path);
  }
  ModelParams p;
  for (std::uint32_t k = 0; k < K; ++k) {
    p.enc_w.emplace_back(dims[k], dims[k + 1]);
    p.enc_b.emplace_back(dims[k + 1]);
    read_mat(in, p.enc_w.back());
    read_vec(in, p.enc_b.back());
  }
  for (std::uint32_t k = 0; k < K; ++k) {
    p.dec_w.emplace_back(dims[K - k], dims[K - k - 1]);
    p.dec_b.emplace_back(dims[K - k - 1]);
    read_mat(in, p.dec_w.back());
    read_vec(in, p.dec_b.back());
  }
  p.context = Mat(n, dims[K]);
  read_mat(in, p.context);
  if (!in) {
    throw std::runtime_error("truncated checkpoint: " + path);
  }
  return p;
}

Eigen::RowVectorXd encode(const ModelParams& p, const Eigen::RowVectorXd& row,
                          Activation act) {
  return encode_batch(p, row, act).row(0);
}

Mat encode_batch(const ModelParams& p, const Mat& rows, Activation act) {
  if (rows.cols() != p.input_dim()) {
    throw std::invalid_argument("encode: row width does not match input dim");
  }
  return encoder_trace(p, rows, act).back();
}

Eigen::RowVectorXd decode(const ModelParams& p, const Eigen::RowVectorXd& y,
                          Activation act) {
  if (y.size() != p.embedding_dim()) {
    throw std::invalid_argument("decode: width does not match embedding dim");
  }
  return decoder_trace(p, y, act).back().row(0);
}

double loss_first_order(const ModelParams& p, const Mat& R,
                        const std::vector<std::pair<int, int>>& edges,
                        Activation act) {
  if (edges.empty()) {
    throw std::invalid_argument("first-order loss needs at least one edge");
  }
  BatchBundle b;
  b.edges = edges;
  ModelConfig cfg;
  cfg.activation = act;
  LossParts parts = accumulate(p, R, b, cfg, nullptr);
  return parts.fop_sum / static_cast<double>(parts.fop_edges);
}

double loss_autoencoder(const ModelParams& p, const Mat& R,
                        const std::vector<int>& rows, double chi,
                        Activation act) {
  BatchBundle b;
  b.rows = rows;
  ModelConfig cfg;
  cfg.activation = act;
  cfg.nonzero_penalty = chi;
  return accumulate(p, R, b, cfg, nullptr).ae_sum;
}

double loss_skipgram(const ModelParams& p, const Mat& R,
                     const std::vector<SgExample>& sg, Activation act) {
  if (sg.empty()) {
    throw std::invalid_argument("skip-gram loss needs at least one example");
  }
  BatchBundle b;
  b.sg = sg;
  ModelConfig cfg;
  cfg.activation = act;
  return accumulate(p, R, b, cfg, nullptr).sg_sum;
}

double loss_regularizer(const ModelParams& p) {
  double reg = 0;
  for (int k = 0; k < p.layer_count(); ++k) {
    reg += 0.5 * (p.enc_w[k].squaredNorm() + p.dec_w[k].squaredNorm());
  }
  return reg;
}

double total_loss(const ModelParams& p, const Mat& R, const BatchBundle& b,
                  const ModelConfig& cfg) {
  LossParts parts = accumulate(p, R, b, cfg, nullptr);
  double fop = parts.fop_edges
                   ? parts.fop_sum / static_cast<double>(parts.fop_edges)
                   : 0.0;
  return parts.sg_sum + cfg.recon_weight * parts.ae_sum +
         cfg.first_order_weight * fop + cfg.reg_weight * parts.reg;
}

Gradients Gradients::zeros_like(const ModelParams& p) {
  Gradients g;
  for (int k = 0; k < p.layer_count(); ++k) {
    g.enc_w.emplace_back(Mat::Zero(p.enc_w[k].rows(), p.enc_w[k].cols()));
    g.enc_b.emplace_back(Eigen::RowVectorXd::Zero(p.enc_b[k].size()));
  }
  for (int k = 0; k < p.layer_count(); ++k) {
    g.dec_w.emplace_back(Mat::Zero(p.dec_w[k].rows(), p.dec_w[k].cols()));
    g.dec_b.emplace_back(Eigen::RowVectorXd::Zero(p.dec_b[k].size()));
  }
  g.context = Mat::Zero(p.context.rows(), p.context.cols());
  return g;
}

bool Gradients::all_finite() const {
  for (const auto& w : enc_w) {
    if (!w.allFinite()) {
      return false;
    }
  }
  for (const auto& b : enc_b) {
    if (!b.allFinite()) {
      return false;
    }
  }
  for (const auto& w : dec_w) {
    if (!w.allFinite()) {
      return false;
    }
  }
  for (const auto& b : dec_b) {
    if (!b.allFinite()) {
      return false;
    }
  }
  return context.allFinite();
}

Gradients gradients(const ModelParams& p, const Mat& R, const BatchBundle& b,
                    const ModelConfig& cfg) {
  Gradients g = Gradients::zeros_like(p);
  // The first-order term is a batch mean, so its weight is applied inside
  // accumulate; scale by 1/|edges| happens there too.
  accumulate(p, R, b, cfg, &g);
  return g;
}

namespace {

void axpy(Gradients& vel, const Gradients& g, double momentum, double lr) {
  for (std::size_t k = 0; k < vel.enc_w.size(); ++k) {
    vel.enc_w[k] = momentum * vel.enc_w[k] - lr * g.enc_w[k];
    vel.enc_b[k] = momentum * vel.enc_b[k] - lr * g.enc_b[k];
    vel.dec_w[k] = momentum * vel.dec_w[k] - lr * g.dec_w[k];
    vel.dec_b[k] = momentum * vel.dec_b[k] - lr * g.dec_b[k];
  }
  vel.context = momentum * vel.context - lr * g.context;
}

void apply(ModelParams& p, const Gradients& vel) {
  for (std::size_t k = 0; k < vel.enc_w.size(); ++k) {
    p.enc_w[k] += vel.enc_w[k];
    p.enc_b[k] += vel.enc_b[k];
    p.dec_w[k] += vel.dec_w[k];
    p.dec_b[k] += vel.dec_b[k];
  }
  p.context += vel.context;
}

}  // namespace

WalkCorpus training_walks(const AttributedGraph& g, const ModelConfig& cfg) {
  WalkCorpus corpus = generate_walks(g, cfg.walks_per_node, cfg.walk_length,
                                     mix_seed(cfg.seed, kWalkTag));
  corpus.window = cfg.window;
  return corpus;
}

TrainResult train(const AttributedGraph& g, const ModelConfig& cfg,
                  const ModelParams* resume_from,
                  const std::function<void(const EpochStats&)>& on_epoch,
                  const Mat* prebuilt_reconstruction) {
  cfg.validate();
  if (g.num_edges() == 0) {
    throw std::invalid_argument("training needs a graph with edges");
  }

  Mat R;
  if (prebuilt_reconstruction) {
    if (prebuilt_reconstruction->rows() != g.n ||
        prebuilt_reconstruction->cols() != g.n) {
      throw std::invalid_argument("prebuilt reconstruction has wrong shape");
    }
    R = *prebuilt_reconstruction;
  } else {
    R = build_reconstruction(g, cfg.structure_weight, cfg.attribute_weight).R;
  }

  WalkCorpus corpus = training_walks(g, cfg);
  // Occurrences of each node across the corpus; skip-gram pairs are sampled
  // as (occurrence, in-window offset), so the full pair list never needs to
  // be materialized.
  std::vector<std::vector<std::pair<int, int>>> occ(g.n);
  for (int w = 0; w < static_cast<int>(corpus.walks.size()); ++w) {
    const auto& walk = corpus.walks[w];
    for (int pos = 0; pos < static_cast<int>(walk.size()); ++pos) {
      occ[walk[pos]].emplace_back(w, pos);
    }
  }

  NegativeSampler sampler(g.degrees());

  std::vector<int> dims;
  dims.push_back(g.n);
  for (int d : cfg.hidden_dims) {
    dims.push_back(d);
  }
  ModelParams params;
  if (resume_from) {
    if (resume_from->dims() != dims ||
        resume_from->context.rows() != g.n) {
      throw std::invalid_argument(
          "resume checkpoint does not match the graph and layer sizes");
    }
    params = *resume_from;
  } else {
    params = ModelParams::init(dims, g.n, mix_seed(cfg.seed, kInitTag));
  }

  // Branch weights for the three alternating sub-steps; weight decay rides
  // with the autoencoder step so it fires once per batch index.
  ModelConfig cfg_fop = cfg;
  cfg_fop.reg_weight = 0;
  ModelConfig cfg_ae = cfg;
  ModelConfig cfg_sg = cfg;
  cfg_sg.reg_weight = 0;

  Gradients vel = Gradients::zeros_like(params);
  const int nb_nodes =
      (g.n + cfg.batch_size - 1) / cfg.batch_size;
  const int nb_edges =
      (g.num_edges() + cfg.batch_size - 1) / cfg.batch_size;
  const int steps = std::max(nb_nodes, nb_edges);

  std::vector<EpochStats> log;
  TrainResult result;

  auto sgd_step = [&](const BatchBundle& bundle, const ModelConfig& c,
                      LossParts& into) {
    Gradients grad = Gradients::zeros_like(params);
    // Mean-per-unit branch gradients keep the step size independent of the
    // batch layout and of the graph size; the reconstruction mean is per
    // entry, so the penalty factor stays the dominant scale. The logged
    // losses below use the same normalization.
    const double ae_coeff =
        bundle.rows.empty()
            ? c.recon_weight
            : c.recon_weight /
                  (static_cast<double>(bundle.rows.size()) *
                   static_cast<double>(R.cols()));
    const double sg_coeff =
        bundle.sg.empty() ? 1.0
                          : 1.0 / static_cast<double>(bundle.sg.size());
    LossParts parts =
        accumulate(params, R, bundle, c, &grad, ae_coeff, sg_coeff);
    if (!parts.finite()) {
      throw TrainingDiverged("loss is not finite");
    }
    into.sg_sum += parts.sg_sum;
    into.sg_examples += parts.sg_examples;
    into.ae_sum += parts.ae_sum;
    into.ae_rows += parts.ae_rows;
    into.fop_sum += parts.fop_sum;
    into.fop_edges += parts.fop_edges;
    into.reg = parts.reg;
    axpy(vel, grad, cfg.momentum, cfg.learning_rate);
    apply(params, vel);
  };

  const bool walks_have_pairs = cfg.walk_length > 1;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng order_rng(mix_seed(cfg.seed, kOrderTag, epoch));
    std::vector<int> node_order(g.n);
    for (int v = 0; v < g.n; ++v) {
      node_order[v] = v;
    }
    order_rng.shuffle(node_order);
    std::vector<std::pair<int, int>> edge_order = g.edges;
    order_rng.shuffle(edge_order);

    LossParts acc;
    for (int t = 0; t < steps; ++t) {
      if (t < nb_edges) {
        BatchBundle bundle;
        const int lo = t * cfg.batch_size;
        const int hi = std::min<int>(lo + cfg.batch_size,
                                     static_cast<int>(edge_order.size()));
        bundle.edges.assign(edge_order.begin() + lo, edge_order.begin() + hi);
        sgd_step(bundle, cfg_fop, acc);
      }
      if (t < nb_nodes) {
        const int lo = t * cfg.batch_size;
        const int hi = std::min(lo + cfg.batch_size, g.n);

        BatchBundle ae_bundle;
        ae_bundle.rows.assign(node_order.begin() + lo,
                              node_order.begin() + hi);
        sgd_step(ae_bundle, cfg_ae, acc);

        if (walks_have_pairs) {
          BatchBundle sg_bundle;
          for (int b = lo; b < hi; ++b) {
            const int v = node_order[b];
            if (occ[v].empty() || g.adjacency[v].empty()) {
              continue;
            }
            Rng rng(mix_seed(mix_seed(cfg.seed, kSgTag),
                             static_cast<std::uint64_t>(epoch),
                             static_cast<std::uint64_t>(v)));
            auto emit = [&](int walk_id, int ctx_pos) {
              SgExample ex;
              ex.center = v;
              ex.context = corpus.walks[walk_id][ctx_pos];
              ex.negatives.reserve(cfg.negatives);
              if (cfg.exclude_center_negatives) {
                ex.negatives = sampler.sample_excluding(rng, cfg.negatives, v);
              } else {
                for (int s = 0; s < cfg.negatives; ++s) {
                  ex.negatives.push_back(sampler.sample(rng));
                }
              }
              sg_bundle.sg.push_back(std::move(ex));
            };
            if (cfg.sg_pairs_per_node == 0) {
              for (auto [w, pos] : occ[v]) {
                const int len = static_cast<int>(corpus.walks[w].size());
                const int lo_p = std::max(0, pos - cfg.window);
                const int hi_p = std::min(len - 1, pos + cfg.window);
                for (int j = lo_p; j <= hi_p; ++j) {
                  if (j != pos) {
                    emit(w, j);
                  }
                }
              }
            } else {
              for (int k = 0; k < cfg.sg_pairs_per_node; ++k) {
                auto [w, pos] = occ[v][rng.index(occ[v].size())];
                const int len = static_cast<int>(corpus.walks[w].size());
                const int lo_p = std::max(0, pos - cfg.window);
                const int hi_p = std::min(len - 1, pos + cfg.window);
                const int span = hi_p - lo_p;  // choices excluding pos
                if (span <= 0) {
                  continue;
                }
                int j = lo_p + rng.index(span);
                if (j >= pos) {
                  ++j;
                }
                emit(w, j);
              }
            }
          }
          if (!sg_bundle.sg.empty()) {
            sgd_step(sg_bundle, cfg_sg, acc);
          }
        }
      }
    }

    if (!params.all_finite()) {
      throw TrainingDiverged("parameters are not finite after epoch " +
                             std::to_string(epoch));
    }

    // Per-epoch means weighted by the branch coefficients, so the trace is
    // comparable across batch layouts and graph sizes.
    EpochStats stats;
    stats.epoch = epoch;
    stats.skipgram =
        acc.sg_examples ? acc.sg_sum / static_cast<double>(acc.sg_examples)
                        : 0.0;
    stats.autoencoder =
        acc.ae_rows
            ? cfg.recon_weight * acc.ae_sum /
                  (static_cast<double>(acc.ae_rows) *
                   static_cast<double>(R.cols()))
            : 0.0;
    stats.first_order =
        acc.fop_edges ? cfg.first_order_weight * acc.fop_sum /
                            static_cast<double>(acc.fop_edges)
                      : 0.0;
    stats.regularizer = cfg.reg_weight * acc.reg;
    stats.total = stats.skipgram + stats.autoencoder + stats.first_order +
                  stats.regularizer;
    log.push_back(stats);
    if (on_epoch) {
      on_epoch(stats);
    }

    if (cfg.early_stop_tol > 0 &&
        static_cast<int>(log.size()) > cfg.early_stop_window) {
      const double prev =
          log[log.size() - 1 - cfg.early_stop_window].total;
      const double rel = std::abs(stats.total - prev) /
                         std::max(std::abs(prev), 1e-12);
      if (rel < cfg.early_stop_tol) {
        break;
      }
    }
  }

  result.epochs_run = static_cast<int>(log.size());
  result.log = std::move(log);

  // Final embeddings from a batched pass over all rows of R.
  result.embeddings = Mat(g.n, cfg.embedding_dim());
  const int chunk = 256;
  for (int lo = 0; lo < g.n; lo += chunk) {
    const int hi = std::min(lo + chunk, g.n);
    result.embeddings.middleRows(lo, hi - lo) = encode_batch(
        params, R.middleRows(lo, hi - lo), cfg.activation);
  }
  result.params = std::move(params);
  return result;
}

void export_embeddings(const Mat& Y, const std::vector<std::string>& ids,
                       const std::string& path) {
  if (static_cast<int>(ids.size()) != Y.rows()) {
    throw std::invalid_argument("one id per embedding row required");
  }
  ensure_parent_dir(path);
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write embeddings: " + path);
  }
  out << Y.rows() << ' ' << Y.cols() << '\n';
  char buf[32];
  for (int i = 0; i < Y.rows(); ++i) {
    out << ids[i];
    for (int j = 0; j < Y.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", Y(i, j));
      out << ' ' << buf;
    }
    out << '\n';
  }
}

std::pair<std::vector<std::string>, Mat> load_embeddings(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open embeddings: " + path);
  }
  long long n = 0, d = 0;
  if (!(in >> n >> d) || n <= 0 || d <= 0) {
    throw std::runtime_error("bad embeddings header in " + path);
  }
  std::vector<std::string> ids(n);
  Mat Y(n, d);
  for (long long i = 0; i < n; ++i) {
    if (!(in >> ids[i])) {
      throw std::runtime_error("truncated embeddings file: " + path);
    }
    for (long long j = 0; j < d; ++j) {
      if (!(in >> Y(i, j))) {
        throw std::runtime_error("truncated embeddings file: " + path);
      }
    }
  }
  return {std::move(ids), std::move(Y)};
}

void write_training_log(const std::vector<EpochStats>& log,
                        const std::string& path) {
  ensure_parent_dir(path);
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write training log: " + path);
  }
  out << "epoch,total,skipgram,autoencoder,first_order,regularizer\n";
  char buf[160];
  for (const auto& s : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  s.epoch, s.total, s.skipgram, s.autoencoder, s.first_order,
                  s.regularizer);
    out << buf;
  }
}

}  // namespace attrembed
