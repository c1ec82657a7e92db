#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "attrembed/eval.hpp"
#include "attrembed/graph.hpp"
#include "attrembed/model.hpp"
#include "attrembed/rng.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace attrembed;

namespace {

// Component count by BFS over an adjacency list.
int component_count(const AttributedGraph& g) {
  std::vector<int> comp(g.n, -1);
  int c = 0;
  for (int s = 0; s < g.n; ++s) {
    if (comp[s] != -1) continue;
    std::vector<int> stack{s};
    comp[s] = c;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : g.adjacency[u]) {
        if (comp[v] == -1) {
          comp[v] = c;
          stack.push_back(v);
        }
      }
    }
    ++c;
  }
  return c;
}

// O(P*N) reference AUC: count wins and half-ties directly.
double auc_bruteforce(const std::vector<double>& pos,
                      const std::vector<double>& neg) {
  double wins = 0;
  for (double p : pos) {
    for (double q : neg) {
      if (p > q) wins += 1.0;
      else if (p == q) wins += 0.5;
    }
  }
  return wins / (static_cast<double>(pos.size()) * neg.size());
}

AttributedGraph two_block_fixture(std::uint64_t seed) {
  return generate_sbm_attributed(15, 2, 0.5, 0.05, 8, 0.05, seed);
}

}  // namespace

TEST_CASE("link split is deterministic and leak-free") {
  AttributedGraph g = two_block_fixture(3);
  LinkSplit a = split_link_prediction(g, 0.5, 11);
  LinkSplit b = split_link_prediction(g, 0.5, 11);
  CHECK(a.positives == b.positives);
  CHECK(a.negatives == b.negatives);
  CHECK(a.train_graph.edges == b.train_graph.edges);

  // No held-out positive appears in the training graph.
  std::set<std::pair<int, int>> train_edges(a.train_graph.edges.begin(),
                                            a.train_graph.edges.end());
  for (auto e : a.positives) {
    CHECK(train_edges.count(e) == 0);
  }
  // Negatives are non-edges of the ORIGINAL graph, and unique.
  std::set<std::pair<int, int>> orig(g.edges.begin(), g.edges.end());
  std::set<std::pair<int, int>> neg_set(a.negatives.begin(),
                                        a.negatives.end());
  CHECK(neg_set.size() == a.negatives.size());
  for (auto e : a.negatives) {
    CHECK(orig.count(e) == 0);
    CHECK(e.first < e.second);
  }
  // Accounting: train + positives = original edge set.
  CHECK(a.train_graph.edges.size() + a.positives.size() == g.edges.size());
  CHECK(a.negatives.size() == a.positives.size());
  CHECK(a.requested == static_cast<int>(std::llround(0.5 * g.edges.size())));
  CHECK(a.shortfall == a.requested - static_cast<int>(a.positives.size()));

  // A different seed gives a different split on a graph this size.
  LinkSplit c = split_link_prediction(g, 0.5, 12);
  CHECK(a.positives != c.positives);
}

TEST_CASE("link split preserves the component count") {
  // A graph with two components: a dense block and a 4-cycle.
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < 8; ++u)
    for (int v = u + 1; v < 8; ++v) edges.emplace_back(u, v);
  edges.emplace_back(8, 9);
  edges.emplace_back(9, 10);
  edges.emplace_back(10, 11);
  edges.emplace_back(8, 11);
  Mat attrs = Mat::Identity(12, 12);
  AttributedGraph g = make_graph(12, edges, attrs, {});
  CHECK(component_count(g) == 2);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    LinkSplit s = split_link_prediction(g, 0.5, seed);
    CHECK(component_count(s.train_graph) == 2);
    CHECK(s.train_graph.n == g.n);
  }
}

TEST_CASE("link split reports a shortfall when every edge is a bridge") {
  // Path graph: removing any edge disconnects it, so no edge is removable.
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u + 1 < 10; ++u) edges.emplace_back(u, u + 1);
  Mat attrs = Mat::Identity(10, 10);
  AttributedGraph g = make_graph(10, edges, attrs, {});
  LinkSplit s = split_link_prediction(g, 0.5, 4);
  CHECK(s.positives.empty());
  CHECK(s.requested == 5);
  CHECK(s.shortfall == 5);
  CHECK(s.train_graph.edges.size() == g.edges.size());
  CHECK(component_count(s.train_graph) == 1);
}

TEST_CASE("link split throws when non-edges cannot cover the positives") {
  // Complete graph on 6 nodes: zero non-edges, but plenty of removable
  // edges, so the negative pool cannot match the positives.
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < 6; ++u)
    for (int v = u + 1; v < 6; ++v) edges.emplace_back(u, v);
  Mat attrs = Mat::Identity(6, 6);
  AttributedGraph g = make_graph(6, edges, attrs, {});
  CHECK_THROWS_AS(split_link_prediction(g, 0.5, 1), std::runtime_error);
}

TEST_CASE("link split rejects out-of-range fractions") {
  AttributedGraph g = two_block_fixture(1);
  CHECK_THROWS_AS(split_link_prediction(g, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_link_prediction(g, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_link_prediction(g, -0.2, 1), std::invalid_argument);
}

TEST_CASE("train graph keeps node identity, attributes and labels") {
  AttributedGraph g = two_block_fixture(5);
  LinkSplit s = split_link_prediction(g, 0.3, 2);
  CHECK(s.train_graph.n == g.n);
  CHECK(s.train_graph.attributes == g.attributes);
  CHECK(s.train_graph.labels == g.labels);
  CHECK(s.train_graph.class_names == g.class_names);
  CHECK(s.train_graph.original_ids == g.original_ids);
}

TEST_CASE("score_pair is the cosine of embedding rows") {
  Mat Y(3, 2);
  Y << 3, 4,   // norm 5
       6, 8,   // parallel
       0, 0;   // zero row
  CHECK(score_pair(Y, 0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(score_pair(Y, 0, 2) == 0.0);
  Mat Z(2, 2);
  Z << 1, 0, 0, 1;
  CHECK(score_pair(Z, 0, 1) == doctest::Approx(0.0));
  Mat W(2, 2);
  W << 1, 2, -1, -2;
  CHECK(score_pair(W, 0, 1) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("auc matches hand-worked values") {
  // pos {3,1}, neg {2,0}: pairs (3>2),(3>0),(1<2),(1>0) -> 3/4.
  CHECK(auc({3, 1}, {2, 0}) == doctest::Approx(0.75).epsilon(1e-15));
  // Complete separation and complete inversion.
  CHECK(auc({5, 6}, {1, 2}) == doctest::Approx(1.0));
  CHECK(auc({1, 2}, {5, 6}) == doctest::Approx(0.0));
  // All scores identical: every pair is a tie -> 0.5.
  CHECK(auc({1, 1, 1}, {1, 1}) == doctest::Approx(0.5));
  // Single pair with a tie.
  CHECK(auc({2}, {2}) == doctest::Approx(0.5));
}

TEST_CASE("auc equals the brute-force pair count on random score sets") {
  Rng rng(909);
  for (int rep = 0; rep < 100; ++rep) {
    std::size_t np = 1 + rng.index(40);
    std::size_t nn = 1 + rng.index(40);
    std::vector<double> pos(np), neg(nn);
    // Coarse grid scores force plenty of ties, including cross-set ties.
    for (auto& v : pos) v = static_cast<double>(rng.index(8)) / 4.0;
    for (auto& v : neg) v = static_cast<double>(rng.index(8)) / 4.0;
    double fast = auc(pos, neg);
    double slow = auc_bruteforce(pos, neg);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
  }
}

TEST_CASE("auc rejects empty score sets") {
  CHECK_THROWS_AS(auc({}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(auc({1.0}, {}), std::invalid_argument);
}

TEST_CASE("linear classifier separates a linearly separable fixture") {
  // Three well-separated Gaussian-ish blobs on axes.
  Rng rng(55);
  const int per = 20;
  Mat X(3 * per, 2);
  std::vector<int> y(3 * per);
  for (int c = 0; c < 3; ++c) {
    double cx = (c == 0 ? 5.0 : c == 1 ? -5.0 : 0.0);
    double cy = (c == 2 ? 6.0 : -1.0);
    for (int i = 0; i < per; ++i) {
      X(c * per + i, 0) = cx + (rng.real() - 0.5);
      X(c * per + i, 1) = cy + (rng.real() - 0.5);
      y[c * per + i] = c;
    }
  }
  LinearClassifier clf = train_linear_classifier(X, y, 1e-4, 500, 1);
  std::vector<int> pred = clf.predict(X);
  CHECK(micro_f1(pred, y, 3) == doctest::Approx(1.0));
  CHECK(macro_f1(pred, y, 3) == doctest::Approx(1.0));
}

TEST_CASE("linear classifier is deterministic") {
  Mat X(4, 2);
  X << 1, 0, 0, 1, -1, 0, 0, -1;
  std::vector<int> y{0, 1, 0, 1};
  LinearClassifier a = train_linear_classifier(X, y, 1e-3, 200, 7);
  LinearClassifier b = train_linear_classifier(X, y, 1e-3, 200, 7);
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
}

TEST_CASE("prediction ties break toward the lowest class id") {
  LinearClassifier clf;
  clf.weights = Mat::Zero(3, 2);  // all scores equal
  clf.bias = Eigen::VectorXd::Zero(3);
  Eigen::RowVectorXd x(2);
  x << 1.0, -2.0;
  CHECK(clf.predict(x) == 0);
  clf.bias << 1.0, 2.0, 2.0;  // classes 1 and 2 tie at the top
  CHECK(clf.predict(x) == 1);
}

TEST_CASE("micro and macro F1 match a hand-worked confusion matrix") {
  // truth:  0 0 0 0 1 1 1 2 2 2
  // pred:   0 0 1 2 1 1 0 2 2 1
  // class 0: TP=2 FP=1 FN=2 -> F1 = 4/7
  // class 1: TP=2 FP=2 FN=1 -> F1 = 4/7
  // class 2: TP=2 FP=1 FN=1 -> F1 = 2/3
  // micro: 2*6 / (2*6 + 4 + 4) = 0.6; macro: (4/7 + 4/7 + 2/3)/3 = 38/63
  std::vector<int> truth{0, 0, 0, 0, 1, 1, 1, 2, 2, 2};
  std::vector<int> pred{0, 0, 1, 2, 1, 1, 0, 2, 2, 1};
  CHECK(micro_f1(pred, truth, 3) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(macro_f1(pred, truth, 3) ==
        doctest::Approx(38.0 / 63.0).epsilon(1e-15));
}

TEST_CASE("macro F1 counts absent classes as zero") {
  // Class 2 never appears in truth or pred: its F1 is 0 by convention.
  std::vector<int> truth{0, 0, 1, 1};
  std::vector<int> pred{0, 0, 1, 1};
  CHECK(micro_f1(pred, truth, 3) == doctest::Approx(1.0));
  CHECK(macro_f1(pred, truth, 3) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("micro F1 equals accuracy for single-label classification") {
  Rng rng(321);
  for (int rep = 0; rep < 100; ++rep) {
    int n = 5 + static_cast<int>(rng.index(30));
    int k = 2 + static_cast<int>(rng.index(4));
    std::vector<int> truth(n), pred(n);
    for (int i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(rng.index(k));
      pred[i] = static_cast<int>(rng.index(k));
    }
    double acc = 0;
    for (int i = 0; i < n; ++i) acc += pred[i] == truth[i] ? 1.0 : 0.0;
    acc /= n;
    CHECK(micro_f1(pred, truth, k) == doctest::Approx(acc).epsilon(1e-12));
  }
}

TEST_CASE("node classification eval on separable embeddings is perfect") {
  // Embeddings that are trivially separable by block.
  const int n = 40;
  Mat Y(n, 2);
  std::vector<int> labels(n);
  Rng rng(12);
  for (int i = 0; i < n; ++i) {
    int c = i < n / 2 ? 0 : 1;
    labels[i] = c;
    Y(i, 0) = (c == 0 ? 1.0 : -1.0) + 0.1 * (rng.real() - 0.5);
    Y(i, 1) = (c == 0 ? -1.0 : 1.0) + 0.1 * (rng.real() - 0.5);
  }
  EvalReport rep = node_classification_eval(Y, labels, 2, 0.3, 10, 99);
  CHECK(rep.task == "nc");
  CHECK(rep.repeats == 10);
  CHECK(rep.micro_runs.size() == 10);
  CHECK(rep.macro_runs.size() == 10);
  CHECK(rep.micro_f1_mean == doctest::Approx(1.0));
  CHECK(rep.macro_f1_mean == doctest::Approx(1.0));

  EvalReport rep2 = node_classification_eval(Y, labels, 2, 0.3, 10, 99);
  CHECK(rep2.micro_runs == rep.micro_runs);
  CHECK(rep2.macro_runs == rep.macro_runs);
}

TEST_CASE("node classification eval skips unlabeled nodes") {
  Mat Y(6, 2);
  Y << 1, 0, 1, 0.1, 1, -0.1, -1, 0, -1, 0.1, -1, -0.1;
  std::vector<int> labels{0, 0, -1, 1, 1, -1};  // two unlabeled nodes
  EvalReport rep = node_classification_eval(Y, labels, 2, 0.5, 4, 3);
  CHECK(rep.micro_f1_mean == doctest::Approx(1.0));
}

TEST_CASE("link prediction eval is deterministic end to end") {
  AttributedGraph g = two_block_fixture(8);
  ModelConfig cfg;
  cfg.hidden_dims = {16, 8};
  cfg.epochs = 8;
  cfg.walks_per_node = 3;
  cfg.walk_length = 10;
  cfg.window = 3;
  cfg.negatives = 3;
  cfg.sg_pairs_per_node = 10;
  EvalReport a = link_prediction_eval(g, cfg, 0.3, 21);
  EvalReport b = link_prediction_eval(g, cfg, 0.3, 21);
  CHECK(a.task == "lp");
  CHECK(a.auc == b.auc);
  CHECK(a.auc >= 0.0);
  CHECK(a.auc <= 1.0);
  CHECK(a.seed == 21);
}

TEST_CASE("eval report serializes key=value lines") {
  EvalReport rep;
  rep.task = "lp";
  rep.auc = 0.875;
  rep.seed = 5;
  rep.config_snapshot["learning_rate"] = "0.025";
  std::string text = rep.to_key_values();
  CHECK(text.find("task=lp") != std::string::npos);
  CHECK(text.find("auc=0.875") != std::string::npos);
  CHECK(text.find("seed=5") != std::string::npos);
  CHECK(text.find("config.learning_rate=0.025") != std::string::npos);

  std::string dir = testutil::temp_dir("evalreport");
  std::string path = dir + "/report.txt";
  rep.append_to_log(path);
  rep.append_to_log(path);
  std::string logged = testutil::read_file(path);
  // Two appended blocks.
  CHECK(logged.find("task=lp") != logged.rfind("task=lp"));
}
