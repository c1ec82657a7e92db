#include <cmath>
#include <vector>

#include "attrembed/graph.hpp"
#include "attrembed/model.hpp"
#include "attrembed/preprocess.hpp"
#include "attrembed/rng.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace attrembed;

namespace {

Mat random_matrix(int r, int c, Rng& rng, double lo = -0.8, double hi = 0.8) {
  Mat m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      m(i, j) = rng.real(lo, hi);
    }
  }
  return m;
}

// R with a mix of exact zeros and positive entries, like a real blend.
Mat random_reconstruction(int n, Rng& rng) {
  Mat R(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      R(i, j) = rng.bernoulli(0.4) ? 0.0 : rng.real(0.2, 1.5);
    }
    R(i, i) = 0.0;
  }
  return R;
}

ModelParams random_params(const std::vector<int>& dims, int n_nodes,
                          std::uint64_t seed) {
  ModelParams p = ModelParams::init(dims, n_nodes, seed);
  Rng rng(seed + 1);
  for (auto& b : p.enc_b) {
    for (int j = 0; j < b.size(); ++j) {
      b(j) = rng.real(-0.3, 0.3);
    }
  }
  for (auto& b : p.dec_b) {
    for (int j = 0; j < b.size(); ++j) {
      b(j) = rng.real(-0.3, 0.3);
    }
  }
  return p;
}

// Every trainable scalar, in a stable order.
std::vector<double*> all_parameters(ModelParams& p) {
  std::vector<double*> out;
  auto add_mat = [&out](Mat& m) {
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) {
        out.push_back(&m(i, j));
      }
    }
  };
  auto add_vec = [&out](Eigen::RowVectorXd& v) {
    for (int j = 0; j < v.size(); ++j) {
      out.push_back(&v(j));
    }
  };
  for (auto& w : p.enc_w) {
    add_mat(w);
  }
  for (auto& b : p.enc_b) {
    add_vec(b);
  }
  for (auto& w : p.dec_w) {
    add_mat(w);
  }
  for (auto& b : p.dec_b) {
    add_vec(b);
  }
  add_mat(p.context);
  return out;
}

std::vector<const double*> all_gradients(const Gradients& g) {
  std::vector<const double*> out;
  auto add_mat = [&out](const Mat& m) {
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) {
        out.push_back(&m(i, j));
      }
    }
  };
  auto add_vec = [&out](const Eigen::RowVectorXd& v) {
    for (int j = 0; j < v.size(); ++j) {
      out.push_back(&v(j));
    }
  };
  for (auto& w : g.enc_w) {
    add_mat(w);
  }
  for (auto& b : g.enc_b) {
    add_vec(b);
  }
  for (auto& w : g.dec_w) {
    add_mat(w);
  }
  for (auto& b : g.dec_b) {
    add_vec(b);
  }
  add_mat(g.context);
  return out;
}

double max_fd_error(ModelParams& p, const Mat& R, const BatchBundle& b,
                    const ModelConfig& cfg) {
  const Gradients g = gradients(p, R, b, cfg);
  auto params = all_parameters(p);
  auto grads = all_gradients(g);
  REQUIRE(params.size() == grads.size());
  const double h = 1e-5;
  double worst = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double old = *params[i];
    *params[i] = old + h;
    const double up = total_loss(p, R, b, cfg);
    *params[i] = old - h;
    const double down = total_loss(p, R, b, cfg);
    *params[i] = old;
    const double fd = (up - down) / (2 * h);
    const double a = *grads[i];
    const double rel =
        std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-3});
    worst = std::max(worst, rel);
  }
  return worst;
}

BatchBundle mixed_bundle() {
  BatchBundle b;
  b.edges = {{0, 1}, {2, 3}, {1, 4}};
  b.rows = {0, 2, 5};
  b.sg.push_back({1, 3, {0, 2}});
  b.sg.push_back({4, 0, {5, 1}});
  return b;
}

}  // namespace

TEST_CASE("activation names round trip") {
  CHECK(activation_from_string("tanh") == Activation::kTanh);
  CHECK(activation_from_string("sigmoid") == Activation::kSigmoid);
  CHECK(to_string(Activation::kTanh) == "tanh");
  CHECK(to_string(Activation::kSigmoid) == "sigmoid");
  CHECK_THROWS_AS(activation_from_string("relu"), std::invalid_argument);
}

TEST_CASE("config validation rejects out-of-range values") {
  ModelConfig ok;
  CHECK_NOTHROW(ok.validate());

  auto expect_throw = [](auto mutate) {
    ModelConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  };
  expect_throw([](ModelConfig& c) { c.hidden_dims.clear(); });
  expect_throw([](ModelConfig& c) { c.hidden_dims = {128, 0}; });
  expect_throw([](ModelConfig& c) {
    c.structure_weight = 0;
    c.attribute_weight = 0;
  });
  expect_throw([](ModelConfig& c) { c.nonzero_penalty = 0.5; });
  expect_throw([](ModelConfig& c) { c.recon_weight = -1; });
  expect_throw([](ModelConfig& c) { c.learning_rate = 0; });
  expect_throw([](ModelConfig& c) { c.momentum = 1.0; });
  expect_throw([](ModelConfig& c) { c.batch_size = 0; });
  expect_throw([](ModelConfig& c) { c.epochs = -1; });
  expect_throw([](ModelConfig& c) { c.window = 0; });
  expect_throw([](ModelConfig& c) { c.sg_pairs_per_node = -1; });
  expect_throw([](ModelConfig& c) { c.early_stop_window = 0; });
}

TEST_CASE("parameter initialization shapes and bounds") {
  auto p = ModelParams::init({6, 4, 3}, 7, 11);
  CHECK(p.layer_count() == 2);
  CHECK(p.input_dim() == 6);
  CHECK(p.embedding_dim() == 3);
  CHECK(p.dims() == std::vector<int>{6, 4, 3});
  CHECK(p.enc_w[0].rows() == 6);
  CHECK(p.enc_w[0].cols() == 4);
  CHECK(p.enc_w[1].rows() == 4);
  CHECK(p.enc_w[1].cols() == 3);
  CHECK(p.dec_w[0].rows() == 3);
  CHECK(p.dec_w[0].cols() == 4);
  CHECK(p.dec_w[1].rows() == 4);
  CHECK(p.dec_w[1].cols() == 6);
  CHECK(p.context.rows() == 7);
  CHECK(p.context.cols() == 3);
  for (const auto& b : p.enc_b) {
    CHECK(b.isZero());
  }
  for (const auto& b : p.dec_b) {
    CHECK(b.isZero());
  }
  const double bound0 = std::sqrt(6.0 / (6 + 4));
  CHECK(p.enc_w[0].cwiseAbs().maxCoeff() <= bound0);
  CHECK(p.all_finite());

  auto q = ModelParams::init({6, 4, 3}, 7, 11);
  CHECK(p.enc_w[0] == q.enc_w[0]);
  CHECK(p.context == q.context);
  auto r = ModelParams::init({6, 4, 3}, 7, 12);
  CHECK(p.enc_w[0] != r.enc_w[0]);

  CHECK_THROWS_AS(ModelParams::init({6}, 7, 1), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams::init({6, 0}, 7, 1), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams::init({6, 3}, 0, 1), std::invalid_argument);
}

TEST_CASE("checkpoint save and load round trips exactly") {
  auto dir = testutil::temp_dir("ckpt");
  auto p = random_params({5, 3, 2}, 6, 21);
  auto path = (dir / "model.bin").string();
  p.save(path);
  auto q = ModelParams::load(path);
  CHECK(q.dims() == p.dims());
  for (int k = 0; k < p.layer_count(); ++k) {
    CHECK(q.enc_w[k] == p.enc_w[k]);
    CHECK(q.enc_b[k] == p.enc_b[k]);
    CHECK(q.dec_w[k] == p.dec_w[k]);
    CHECK(q.dec_b[k] == p.dec_b[k]);
  }
  CHECK(q.context == p.context);

  testutil::write_file(dir / "junk.bin", "junk");
  CHECK_THROWS_AS(ModelParams::load((dir / "junk.bin").string()),
                  std::runtime_error);
}

TEST_CASE("encode applies the activation chain") {
  auto p = random_params({4, 3, 2}, 4, 31);
  Rng rng(1);
  Mat rows = random_matrix(5, 4, rng);

  Mat batch = encode_batch(p, rows, Activation::kTanh);
  CHECK(batch.rows() == 5);
  CHECK(batch.cols() == 2);
  CHECK(batch.cwiseAbs().maxCoeff() <= 1.0);

  for (int i = 0; i < rows.rows(); ++i) {
    // manual forward, written independently of the library path
    Eigen::RowVectorXd h = rows.row(i);
    for (int k = 0; k < p.layer_count(); ++k) {
      Eigen::RowVectorXd z = h * p.enc_w[k] + p.enc_b[k];
      for (int j = 0; j < z.size(); ++j) {
        z(j) = std::tanh(z(j));
      }
      h = z;
    }
    Eigen::RowVectorXd single = encode(p, rows.row(i), Activation::kTanh);
    for (int j = 0; j < h.size(); ++j) {
      CHECK(batch(i, j) == doctest::Approx(h(j)).epsilon(1e-13));
      CHECK(single(j) == doctest::Approx(h(j)).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(encode_batch(p, Mat::Zero(2, 3), Activation::kTanh),
                  std::invalid_argument);
}

TEST_CASE("decode mirrors the encoder with a linear output layer") {
  auto p = random_params({4, 3, 2}, 4, 41);
  Eigen::RowVectorXd y(2);
  y << 0.3, -0.7;
  Eigen::RowVectorXd h = y;
  // hidden decoder layer activated, final layer linear
  Eigen::RowVectorXd z0 = h * p.dec_w[0] + p.dec_b[0];
  for (int j = 0; j < z0.size(); ++j) {
    z0(j) = std::tanh(z0(j));
  }
  Eigen::RowVectorXd z1 = z0 * p.dec_w[1] + p.dec_b[1];
  Eigen::RowVectorXd out = decode(p, y, Activation::kTanh);
  CHECK(out.size() == 4);
  for (int j = 0; j < 4; ++j) {
    CHECK(out(j) == doctest::Approx(z1(j)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(decode(p, Eigen::RowVectorXd::Zero(3), Activation::kTanh),
                  std::invalid_argument);
}

TEST_CASE("first-order loss at indifference is log 2 per edge") {
  // Zero weights drive every embedding to zero, so each edge scores
  // sigmoid(0) = 1/2 and contributes -log(1/2).
  ModelParams p;
  p.enc_w = {Mat::Zero(3, 2)};
  p.enc_b = {Eigen::RowVectorXd::Zero(2)};
  p.dec_w = {Mat::Zero(2, 3)};
  p.dec_b = {Eigen::RowVectorXd::Zero(3)};
  p.context = Mat::Zero(3, 2);
  Mat R = Mat::Identity(3, 3);

  const double ln2 = 0.6931471805599453;
  CHECK(loss_first_order(p, R, {{0, 1}}, Activation::kTanh) ==
        doctest::Approx(ln2).epsilon(1e-12));
  CHECK(loss_first_order(p, R, {{0, 1}, {1, 2}, {0, 2}}, Activation::kTanh) ==
        doctest::Approx(ln2).epsilon(1e-12));
  CHECK_THROWS_AS(loss_first_order(p, R, {}, Activation::kTanh),
                  std::invalid_argument);
}

TEST_CASE("first-order loss matches a hand computation") {
  auto p = random_params({3, 2}, 3, 51);
  Rng rng(4);
  Mat R = random_reconstruction(3, rng);
  std::vector<std::pair<int, int>> edges = {{0, 1}, {1, 2}};
  double expect = 0;
  for (auto [i, j] : edges) {
    Eigen::RowVectorXd yi = encode(p, R.row(i), Activation::kTanh);
    Eigen::RowVectorXd yj = encode(p, R.row(j), Activation::kTanh);
    expect += -std::log(1.0 / (1.0 + std::exp(-yi.dot(yj))));
  }
  expect /= 2.0;
  CHECK(loss_first_order(p, R, edges, Activation::kTanh) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("autoencoder loss weights non-zero entries") {
  // Zero weights make the decoder output its bias regardless of input:
  // target [1, 0], output [0.5, 0.2], penalty 3 on the non-zero entry.
  // ((0.5-1)*3)^2 + ((0.2-0)*1)^2 = 2.25 + 0.04 = 2.29
  ModelParams p;
  p.enc_w = {Mat::Zero(2, 2)};
  p.enc_b = {Eigen::RowVectorXd::Zero(2)};
  p.dec_w = {Mat::Zero(2, 2)};
  Eigen::RowVectorXd db(2);
  db << 0.5, 0.2;
  p.dec_b = {db};
  p.context = Mat::Zero(2, 2);
  Mat R(2, 2);
  R << 1, 0,
       0, 1;
  CHECK(loss_autoencoder(p, R, {0}, 3.0, Activation::kTanh) ==
        doctest::Approx(2.29).epsilon(1e-12));
  // chi 1 removes the asymmetry
  CHECK(loss_autoencoder(p, R, {0}, 1.0, Activation::kTanh) ==
        doctest::Approx(0.25 + 0.04).epsilon(1e-12));
  // duplicated rows count twice, empty sums to zero
  CHECK(loss_autoencoder(p, R, {0, 0}, 3.0, Activation::kTanh) ==
        doctest::Approx(4.58).epsilon(1e-12));
  CHECK(loss_autoencoder(p, R, {}, 3.0, Activation::kTanh) == 0.0);
}

TEST_CASE("skip-gram loss at indifference is 2 log 2") {
  auto p = random_params({3, 2}, 3, 61);
  p.context.setZero();  // all scores are exactly zero
  Mat R = Mat::Identity(3, 3);
  std::vector<SgExample> sg = {{0, 1, {2}}};
  CHECK(loss_skipgram(p, R, sg, Activation::kTanh) ==
        doctest::Approx(1.3862943611198906).epsilon(1e-12));
  // one positive and three negatives: 4 log 2
  std::vector<SgExample> sg4 = {{0, 1, {2, 2, 0}}};
  CHECK(loss_skipgram(p, R, sg4, Activation::kTanh) ==
        doctest::Approx(4 * 0.6931471805599453).epsilon(1e-12));
  CHECK_THROWS_AS(loss_skipgram(p, R, {}, Activation::kTanh),
                  std::invalid_argument);
}

TEST_CASE("skip-gram loss matches a hand computation") {
  auto p = random_params({3, 2}, 3, 71);
  Rng rng(8);
  Mat R = random_reconstruction(3, rng);
  std::vector<SgExample> sg = {{0, 2, {1, 1}}, {2, 0, {1, 0}}};
  auto sigma = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  double expect = 0;
  for (const auto& ex : sg) {
    Eigen::RowVectorXd yc = encode(p, R.row(ex.center), Activation::kTanh);
    expect += -std::log(sigma(yc.dot(p.context.row(ex.context))));
    for (int s : ex.negatives) {
      expect += -std::log(sigma(-yc.dot(p.context.row(s))));
    }
  }
  CHECK(loss_skipgram(p, R, sg, Activation::kTanh) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("regularizer is half the squared weight norms") {
  ModelParams p;
  Mat ew(1, 2);
  ew << 1, 1;
  Mat dw(2, 1);
  dw << 2, 0;
  p.enc_w = {ew};
  p.enc_b = {Eigen::RowVectorXd::Zero(2)};
  p.dec_w = {dw};
  p.dec_b = {Eigen::RowVectorXd::Ones(1)};  // biases excluded
  p.context = Mat::Ones(4, 2);              // context excluded
  // 0.5 * (1^2 + 1^2 + 2^2 + 0^2) = 3
  CHECK(loss_regularizer(p) == 3.0);
}

TEST_CASE("total loss is the weighted sum of the branches") {
  auto p = random_params({6, 4, 3}, 6, 81);
  Rng rng(12);
  Mat R = random_reconstruction(6, rng);
  BatchBundle b = mixed_bundle();
  ModelConfig cfg;
  cfg.recon_weight = 0.7;
  cfg.first_order_weight = 1.3;
  cfg.reg_weight = 0.01;
  cfg.nonzero_penalty = 2.5;

  const double expect =
      loss_skipgram(p, R, b.sg, cfg.activation) +
      cfg.recon_weight *
          loss_autoencoder(p, R, b.rows, cfg.nonzero_penalty, cfg.activation) +
      cfg.first_order_weight * loss_first_order(p, R, b.edges, cfg.activation) +
      cfg.reg_weight * loss_regularizer(p);
  CHECK(total_loss(p, R, b, cfg) == doctest::Approx(expect).epsilon(1e-12));

  // every empty branch contributes zero
  BatchBundle rows_only;
  rows_only.rows = {1, 4};
  const double expect_rows =
      cfg.recon_weight * loss_autoencoder(p, R, rows_only.rows,
                                          cfg.nonzero_penalty,
                                          cfg.activation) +
      cfg.reg_weight * loss_regularizer(p);
  CHECK(total_loss(p, R, rows_only, cfg) ==
        doctest::Approx(expect_rows).epsilon(1e-12));

  BatchBundle empty;
  CHECK(total_loss(p, R, empty, cfg) ==
        doctest::Approx(cfg.reg_weight * loss_regularizer(p)).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(19);
  Mat R = random_reconstruction(6, rng);
  BatchBundle b = mixed_bundle();
  ModelConfig cfg;
  cfg.hidden_dims = {4, 3};
  cfg.recon_weight = 0.7;
  cfg.first_order_weight = 1.3;
  cfg.reg_weight = 0.01;
  cfg.nonzero_penalty = 2.5;

  SUBCASE("tanh") {
    auto p = random_params({6, 4, 3}, 6, 91);
    CHECK(max_fd_error(p, R, b, cfg) <= 1e-4);
  }
  SUBCASE("sigmoid") {
    cfg.activation = Activation::kSigmoid;
    auto p = random_params({6, 4, 3}, 6, 92);
    CHECK(max_fd_error(p, R, b, cfg) <= 1e-4);
  }
  SUBCASE("single branch bundles") {
    auto p = random_params({6, 4, 3}, 6, 93);
    BatchBundle edges_only;
    edges_only.edges = b.edges;
    CHECK(max_fd_error(p, R, edges_only, cfg) <= 1e-4);
    BatchBundle sg_only;
    sg_only.sg = b.sg;
    CHECK(max_fd_error(p, R, sg_only, cfg) <= 1e-4);
    BatchBundle rows_only;
    rows_only.rows = b.rows;
    CHECK(max_fd_error(p, R, rows_only, cfg) <= 1e-4);
  }
}

TEST_CASE("branches leave unrelated parameters untouched") {
  auto p = random_params({6, 4, 3}, 6, 101);
  Rng rng(23);
  Mat R = random_reconstruction(6, rng);
  ModelConfig cfg;
  cfg.hidden_dims = {4, 3};
  cfg.reg_weight = 0;  // so only the branch term moves anything

  BatchBundle edges_only;
  edges_only.edges = {{0, 1}};
  auto g = gradients(p, R, edges_only, cfg);
  for (const auto& w : g.dec_w) {
    CHECK(w.isZero());
  }
  CHECK(g.context.isZero());
  CHECK_FALSE(g.enc_w[0].isZero());

  BatchBundle sg_only;
  sg_only.sg.push_back({2, 4, {1}});
  g = gradients(p, R, sg_only, cfg);
  for (const auto& w : g.dec_w) {
    CHECK(w.isZero());
  }
  CHECK_FALSE(g.context.row(4).isZero());
  CHECK_FALSE(g.context.row(1).isZero());
  CHECK(g.context.row(0).isZero());
  CHECK(g.context.row(3).isZero());

  BatchBundle rows_only;
  rows_only.rows = {3};
  g = gradients(p, R, rows_only, cfg);
  CHECK(g.context.isZero());
  CHECK_FALSE(g.dec_w[0].isZero());
}

TEST_CASE("one-hot inputs only move their own encoder rows") {
  // R = I makes the encoder input of node v the v-th unit row, so the
  // first-order gradient can only touch weight rows 0 and 1.
  auto p = random_params({4, 2}, 4, 111);
  Mat R = Mat::Identity(4, 4);
  ModelConfig cfg;
  cfg.hidden_dims = {2};
  cfg.reg_weight = 0;
  BatchBundle b;
  b.edges = {{0, 1}};
  auto g = gradients(p, R, b, cfg);
  CHECK_FALSE(g.enc_w[0].row(0).isZero());
  CHECK_FALSE(g.enc_w[0].row(1).isZero());
  CHECK(g.enc_w[0].row(2).isZero());
  CHECK(g.enc_w[0].row(3).isZero());
}

TEST_CASE("training runs deterministically and reduces the loss") {
  auto g = generate_sbm_attributed(10, 2, 0.6, 0.05, 8, 0.05, 7);
  ModelConfig cfg;
  cfg.hidden_dims = {8, 4};
  cfg.epochs = 25;
  cfg.early_stop_tol = 0;  // run the full budget
  cfg.walks_per_node = 4;
  cfg.walk_length = 12;
  cfg.window = 4;
  cfg.negatives = 3;
  cfg.sg_pairs_per_node = 20;
  cfg.learning_rate = 0.05;
  cfg.seed = 17;

  int callback_count = 0;
  auto res = train(g, cfg, nullptr,
                   [&callback_count](const EpochStats&) { ++callback_count; });
  CHECK(res.epochs_run == 25);
  CHECK(callback_count == 25);
  CHECK(res.log.size() == 25);
  CHECK(res.embeddings.rows() == g.n);
  CHECK(res.embeddings.cols() == 4);
  CHECK(res.embeddings.allFinite());
  CHECK(res.params.all_finite());
  CHECK(res.log.front().total > res.log.back().total);
  for (const auto& s : res.log) {
    CHECK(std::isfinite(s.total));
    CHECK(s.autoencoder >= 0);
    CHECK(s.first_order >= 0);
    CHECK(s.skipgram >= 0);
    CHECK(s.regularizer >= 0);
  }

  auto res2 = train(g, cfg);
  CHECK(res2.embeddings == res.embeddings);

  cfg.seed = 18;
  auto res3 = train(g, cfg);
  CHECK(res3.embeddings != res.embeddings);
}

TEST_CASE("zero epochs yields the untrained encoder") {
  auto g = generate_sbm_attributed(6, 2, 0.7, 0.1, 4, 0.0, 9);
  ModelConfig cfg;
  cfg.hidden_dims = {5, 3};
  cfg.epochs = 0;
  auto p = random_params({g.n, 5, 3}, g.n, 202);
  auto res = train(g, cfg, &p);
  CHECK(res.epochs_run == 0);
  CHECK(res.log.empty());
  Mat R = build_reconstruction(g, cfg.structure_weight,
                               cfg.attribute_weight).R;
  CHECK(res.embeddings == encode_batch(p, R, cfg.activation));
}

TEST_CASE("training rejects unusable inputs") {
  auto g = generate_sbm_attributed(6, 2, 0.7, 0.1, 4, 0.0, 9);
  ModelConfig cfg;
  cfg.hidden_dims = {5, 3};

  auto wrong = random_params({g.n, 4, 3}, g.n, 1);
  CHECK_THROWS_AS(train(g, cfg, &wrong), std::invalid_argument);

  auto edgeless = make_graph(3, {}, Mat::Ones(3, 2));
  CHECK_THROWS_AS(train(edgeless, cfg), std::invalid_argument);

  Mat bad_r = Mat::Zero(2, 2);
  CHECK_THROWS_AS(train(g, cfg, nullptr, {}, &bad_r), std::invalid_argument);
}

TEST_CASE("a prebuilt reconstruction reproduces the normal path") {
  auto g = generate_sbm_attributed(6, 2, 0.7, 0.1, 4, 0.1, 29);
  ModelConfig cfg;
  cfg.hidden_dims = {4};
  cfg.epochs = 5;
  cfg.walks_per_node = 2;
  cfg.walk_length = 8;
  cfg.window = 3;
  cfg.negatives = 2;
  cfg.sg_pairs_per_node = 10;
  Mat R = build_reconstruction(g, cfg.structure_weight,
                               cfg.attribute_weight).R;
  auto direct = train(g, cfg);
  auto prebuilt = train(g, cfg, nullptr, {}, &R);
  CHECK(direct.embeddings == prebuilt.embeddings);
}

TEST_CASE("an absurd learning rate raises the divergence error") {
  auto g = generate_sbm_attributed(8, 2, 0.6, 0.1, 4, 0.05, 37);
  ModelConfig cfg;
  cfg.hidden_dims = {6, 3};
  cfg.epochs = 20;
  cfg.learning_rate = 1e12;
  cfg.reg_weight = 0;
  cfg.early_stop_tol = 0;
  CHECK_THROWS_AS(train(g, cfg), TrainingDiverged);
}

TEST_CASE("aggressive early stopping cuts the run short") {
  auto g = generate_sbm_attributed(8, 2, 0.6, 0.1, 4, 0.05, 41);
  ModelConfig cfg;
  cfg.hidden_dims = {4};
  cfg.epochs = 200;
  cfg.learning_rate = 1e-6;  // nothing moves, loss is flat
  cfg.early_stop_tol = 0.5;
  cfg.early_stop_window = 3;
  cfg.walks_per_node = 2;
  cfg.walk_length = 8;
  cfg.sg_pairs_per_node = 5;
  cfg.negatives = 2;
  auto res = train(g, cfg);
  CHECK(res.epochs_run < 200);
  CHECK(res.epochs_run >= 4);
}

TEST_CASE("embedding files round trip exactly") {
  auto dir = testutil::temp_dir("emb");
  Rng rng(3);
  Mat Y = random_matrix(4, 3, rng, -2, 2);
  std::vector<std::string> ids = {"a", "b", "c", "d"};
  auto path = (dir / "y.emb").string();
  export_embeddings(Y, ids, path);
  auto [ids2, Y2] = load_embeddings(path);
  CHECK(ids2 == ids);
  CHECK(Y2 == Y);  // %.17g preserves doubles bit for bit

  CHECK_THROWS_AS(export_embeddings(Y, {"a"}, path), std::invalid_argument);
  testutil::write_file(dir / "bad.emb", "0 0\n");
  CHECK_THROWS_AS(load_embeddings((dir / "bad.emb").string()),
                  std::runtime_error);
  testutil::write_file(dir / "trunc.emb", "2 2\na 1 2\n");
  CHECK_THROWS_AS(load_embeddings((dir / "trunc.emb").string()),
                  std::runtime_error);
}

TEST_CASE("training log is one csv row per epoch") {
  auto dir = testutil::temp_dir("tlog");
  std::vector<EpochStats> log(3);
  for (int i = 0; i < 3; ++i) {
    log[i].epoch = i;
    log[i].total = 10.0 - i;
  }
  auto path = (dir / "log.csv").string();
  write_training_log(log, path);
  auto content = testutil::read_file(path);
  CHECK(content.find("epoch,total,skipgram,autoencoder,first_order,"
                     "regularizer\n") == 0);
  CHECK(std::count(content.begin(), content.end(), '\n') == 4);
}
