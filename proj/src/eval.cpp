#include "attrembed/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "attrembed/rng.hpp"

namespace attrembed {

namespace {

constexpr std::uint64_t kSplitTag = 0x5b17;
constexpr std::uint64_t kNegTag = 0x4e39;
constexpr std::uint64_t kTrainTag = 0x7a19;

bool reachable_without(const std::vector<std::set<int>>& adj, int u, int v) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<int> stack{u};
  seen[u] = 1;
  while (!stack.empty()) {
    int x = stack.back();
    stack.pop_back();
    if (x == v) {
      return true;
    }
    for (int y : adj[x]) {
      if (!seen[y]) {
        seen[y] = 1;
        stack.push_back(y);
      }
    }
  }
  return false;
}

}  // namespace

LinkSplit split_link_prediction(const AttributedGraph& g, double fraction,
                                std::uint64_t seed) {
  if (!(fraction > 0) || !(fraction < 1)) {
    throw std::invalid_argument("holdout fraction must be in (0, 1)");
  }
  if (g.num_edges() == 0) {
    throw std::invalid_argument("cannot split a graph with no edges");
  }

  LinkSplit out;
  out.requested =
      static_cast<int>(std::llround(fraction * g.num_edges()));

  std::vector<std::set<int>> adj(g.n);
  for (auto [u, v] : g.edges) {
    adj[u].insert(v);
    adj[v].insert(u);
  }

  std::vector<std::pair<int, int>> order = g.edges;
  Rng rng(mix_seed(seed, kSplitTag));
  rng.shuffle(order);

  // Greedy holdout: an edge is removable only if its endpoints stay
  // connected without it, so no component ever falls apart.
  std::set<std::pair<int, int>> held;
  for (auto [u, v] : order) {
    if (static_cast<int>(held.size()) >= out.requested) {
      break;
    }
    adj[u].erase(v);
    adj[v].erase(u);
    if (reachable_without(adj, u, v)) {
      held.insert({u, v});
    } else {
      adj[u].insert(v);
      adj[v].insert(u);
    }
  }
  out.positives.assign(held.begin(), held.end());
  out.shortfall = out.requested - static_cast<int>(out.positives.size());

  std::vector<std::pair<int, int>> kept;
  for (auto e : g.edges) {
    if (!held.count(e)) {
      kept.push_back(e);
    }
  }
  out.train_graph = make_graph(g.n, kept, g.attributes, g.labels,
                               g.class_names);
  out.train_graph.original_ids = g.original_ids;

  // Negative pairs: unique uniform non-edges of the original graph. Falls
  // back to enumeration when rejection sampling stalls on dense graphs.
  const int needed = static_cast<int>(out.positives.size());
  Rng neg_rng(mix_seed(seed, kNegTag));
  std::set<std::pair<int, int>> negs;
  long long attempts = 0;
  const long long cap = 200LL * std::max(needed, 1);
  while (static_cast<int>(negs.size()) < needed && attempts < cap) {
    ++attempts;
    int i = neg_rng.index(static_cast<std::size_t>(g.n));
    int j = neg_rng.index(static_cast<std::size_t>(g.n));
    if (i == j) {
      continue;
    }
    if (i > j) {
      std::swap(i, j);
    }
    if (g.has_edge(i, j)) {
      continue;
    }
    negs.insert({i, j});
  }
  if (static_cast<int>(negs.size()) < needed) {
    std::vector<std::pair<int, int>> pool;
    for (int i = 0; i < g.n; ++i) {
      for (int j = i + 1; j < g.n; ++j) {
        if (!g.has_edge(i, j) && !negs.count({i, j})) {
          pool.emplace_back(i, j);
        }
      }
    }
    neg_rng.shuffle(pool);
    for (auto e : pool) {
      if (static_cast<int>(negs.size()) >= needed) {
        break;
      }
      negs.insert(e);
    }
    if (static_cast<int>(negs.size()) < needed) {
      throw std::runtime_error("graph has fewer non-edges than held-out edges");
    }
  }
  out.negatives.assign(negs.begin(), negs.end());
  return out;
}

double score_pair(const Mat& Y, int i, int j) {
  if (i < 0 || i >= Y.rows() || j < 0 || j >= Y.rows()) {
    throw std::invalid_argument("score_pair: node id out of range");
  }
  const double ni = Y.row(i).norm();
  const double nj = Y.row(j).norm();
  if (ni == 0 || nj == 0) {
    return 0;
  }
  return Y.row(i).dot(Y.row(j)) / (ni * nj);
}

double auc(const std::vector<double>& pos_scores,
           const std::vector<double>& neg_scores) {
  if (pos_scores.empty() || neg_scores.empty()) {
    throw std::invalid_argument("auc needs both positive and negative scores");
  }
  struct Entry {
    double s;
    bool pos;
  };
  std::vector<Entry> all;
  all.reserve(pos_scores.size() + neg_scores.size());
  for (double s : pos_scores) {
    all.push_back({s, true});
  }
  for (double s : neg_scores) {
    all.push_back({s, false});
  }
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return a.s < b.s; });

  // Rank statistic with average ranks over ties; exactly the pair count
  // with ties worth one half.
  double pos_rank_sum = 0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].s == all[i].s) {
      ++j;
    }
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) +
                                   static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].pos) {
        pos_rank_sum += avg_rank;
      }
    }
    i = j;
  }
  const double P = static_cast<double>(pos_scores.size());
  const double N = static_cast<double>(neg_scores.size());
  return (pos_rank_sum - P * (P + 1) / 2) / (P * N);
}

int LinearClassifier::predict(const Eigen::RowVectorXd& x) const {
  int best = 0;
  double best_score = weights.row(0).dot(x) + bias(0);
  for (int c = 1; c < weights.rows(); ++c) {
    const double s = weights.row(c).dot(x) + bias(c);
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return best;
}

std::vector<int> LinearClassifier::predict(const Mat& X) const {
  std::vector<int> out(X.rows());
  for (int i = 0; i < X.rows(); ++i) {
    out[i] = predict(Eigen::RowVectorXd(X.row(i)));
  }
  return out;
}

LinearClassifier train_linear_classifier(const Mat& features,
                                         const std::vector<int>& labels,
                                         double l2, int epochs,
                                         std::uint64_t seed) {
  (void)seed;  // the solver is full-batch and deterministic
  const int N = static_cast<int>(features.rows());
  if (N == 0 || static_cast<int>(labels.size()) != N) {
    throw std::invalid_argument("classifier needs one label per feature row");
  }
  int C = 0;
  for (int l : labels) {
    if (l < 0) {
      throw std::invalid_argument("classifier labels must be >= 0");
    }
    C = std::max(C, l + 1);
  }
  if (l2 < 0 || epochs <= 0) {
    throw std::invalid_argument("classifier l2/epochs out of range");
  }

  LinearClassifier clf;
  clf.weights = Mat::Zero(C, features.cols());
  clf.bias = Eigen::VectorXd::Zero(C);

  // Step size from the logistic smoothness bound so full-batch descent
  // cannot overshoot.
  double max_sq = 1.0;
  for (int i = 0; i < N; ++i) {
    max_sq = std::max(max_sq, features.row(i).squaredNorm());
  }
  const double lr = 1.0 / (0.25 * (max_sq + 1.0) + l2);

  Mat targets = Mat::Zero(N, C);
  for (int i = 0; i < N; ++i) {
    targets(i, labels[i]) = 1.0;
  }

  for (int e = 0; e < epochs; ++e) {
    Mat scores =
        (features * clf.weights.transpose()).rowwise() + clf.bias.transpose();
    Mat probs = (1.0 / (1.0 + (-scores.array()).exp())).matrix();
    Mat diff = (probs - targets) / static_cast<double>(N);
    Mat gw = diff.transpose() * features + l2 * clf.weights;
    Eigen::VectorXd gb = diff.colwise().sum().transpose();
    clf.weights -= lr * gw;
    clf.bias -= lr * gb;
  }
  return clf;
}

namespace {

struct Confusion {
  std::vector<long long> tp, fp, fn;
};

Confusion confusion(const std::vector<int>& pred,
                    const std::vector<int>& truth, int num_classes) {
  if (pred.size() != truth.size() || pred.empty()) {
    throw std::invalid_argument("prediction/truth size mismatch");
  }
  Confusion c;
  c.tp.assign(num_classes, 0);
  c.fp.assign(num_classes, 0);
  c.fn.assign(num_classes, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= num_classes || truth[i] < 0 ||
        truth[i] >= num_classes) {
      throw std::invalid_argument("class id outside the label universe");
    }
    if (pred[i] == truth[i]) {
      ++c.tp[pred[i]];
    } else {
      ++c.fp[pred[i]];
      ++c.fn[truth[i]];
    }
  }
  return c;
}

}  // namespace

double micro_f1(const std::vector<int>& pred, const std::vector<int>& truth,
                int num_classes) {
  Confusion c = confusion(pred, truth, num_classes);
  long long tp = 0, fp = 0, fn = 0;
  for (int k = 0; k < num_classes; ++k) {
    tp += c.tp[k];
    fp += c.fp[k];
    fn += c.fn[k];
  }
  const double denom = static_cast<double>(2 * tp + fp + fn);
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
}

double macro_f1(const std::vector<int>& pred, const std::vector<int>& truth,
                int num_classes) {
  Confusion c = confusion(pred, truth, num_classes);
  double sum = 0;
  for (int k = 0; k < num_classes; ++k) {
    const double denom = static_cast<double>(2 * c.tp[k] + c.fp[k] + c.fn[k]);
    sum += denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp[k]) / denom;
  }
  return sum / static_cast<double>(num_classes);
}

std::string EvalReport::to_key_values() const {
  std::ostringstream out;
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "task=" << task << '\n';
  out << "seed=" << seed << '\n';
  if (task == "lp") {
    out << "auc=" << num(auc) << '\n';
    out << "split_shortfall=" << split_shortfall << '\n';
  } else {
    out << "micro_f1_mean=" << num(micro_f1_mean) << '\n';
    out << "macro_f1_mean=" << num(macro_f1_mean) << '\n';
    out << "repeats=" << repeats << '\n';
    auto csv = [&](const std::vector<double>& runs) {
      std::string s;
      for (std::size_t i = 0; i < runs.size(); ++i) {
        s += (i ? "," : "") + num(runs[i]);
      }
      return s;
    };
    out << "micro_runs=" << csv(micro_runs) << '\n';
    out << "macro_runs=" << csv(macro_runs) << '\n';
  }
  for (const auto& [k, v] : config_snapshot) {
    out << "config." << k << '=' << v << '\n';
  }
  return out.str();
}

void EvalReport::append_to_log(const std::string& path) const {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::app);
  if (!out) {
    throw std::runtime_error("cannot append to report log: " + path);
  }
  out << to_key_values() << '\n';
}

EvalReport link_prediction_eval(const AttributedGraph& g,
                                const ModelConfig& cfg, double fraction,
                                std::uint64_t seed) {
  LinkSplit split = split_link_prediction(g, fraction, seed);

  // One knob drives the whole evaluation: the split above and the training
  // run below both derive from `seed`.
  ModelConfig train_cfg = cfg;
  train_cfg.seed = mix_seed(seed, kTrainTag);
  TrainResult tr = train(split.train_graph, train_cfg);

  std::vector<double> pos, neg;
  pos.reserve(split.positives.size());
  neg.reserve(split.negatives.size());
  for (auto [i, j] : split.positives) {
    pos.push_back(score_pair(tr.embeddings, i, j));
  }
  for (auto [i, j] : split.negatives) {
    neg.push_back(score_pair(tr.embeddings, i, j));
  }

  EvalReport report;
  report.task = "lp";
  report.auc = auc(pos, neg);
  report.split_shortfall = split.shortfall;
  report.seed = seed;
  return report;
}

EvalReport node_classification_eval(const Mat& Y,
                                    const std::vector<int>& labels,
                                    int num_classes, double train_frac,
                                    int repeats, std::uint64_t seed) {
  if (!(train_frac > 0) || !(train_frac < 1)) {
    throw std::invalid_argument("train fraction must be in (0, 1)");
  }
  if (repeats <= 0) {
    throw std::invalid_argument("repeats must be positive");
  }
  if (static_cast<int>(labels.size()) != Y.rows()) {
    throw std::invalid_argument("one label entry per embedding row required");
  }
  std::vector<int> labeled;
  for (int v = 0; v < static_cast<int>(labels.size()); ++v) {
    if (labels[v] >= 0) {
      labeled.push_back(v);
    }
  }
  if (static_cast<int>(labeled.size()) < 2) {
    throw std::invalid_argument("need at least two labeled nodes");
  }

  EvalReport report;
  report.task = "nc";
  report.repeats = repeats;
  report.seed = seed;

  for (int rep = 0; rep < repeats; ++rep) {
    std::vector<int> order = labeled;
    int train_count = 0;
    // Resample splits whose training half is single-class; a linear
    // classifier cannot be fit on one class.
    for (int attempt = 0;; ++attempt) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(rep),
                       static_cast<std::uint64_t>(attempt)));
      rng.shuffle(order);
      train_count = static_cast<int>(
          std::llround(train_frac * static_cast<double>(order.size())));
      train_count = std::max(1, std::min(train_count,
                                         static_cast<int>(order.size()) - 1));
      std::set<int> classes;
      for (int i = 0; i < train_count; ++i) {
        classes.insert(labels[order[i]]);
      }
      if (static_cast<int>(classes.size()) >= 2) {
        break;
      }
      if (attempt >= 50) {
        throw std::runtime_error(
            "could not draw a training split with two classes");
      }
    }

    Mat train_X(train_count, Y.cols());
    std::vector<int> train_y(train_count);
    for (int i = 0; i < train_count; ++i) {
      train_X.row(i) = Y.row(order[i]);
      train_y[i] = labels[order[i]];
    }
    const int test_count = static_cast<int>(order.size()) - train_count;
    Mat test_X(test_count, Y.cols());
    std::vector<int> test_y(test_count);
    for (int i = 0; i < test_count; ++i) {
      test_X.row(i) = Y.row(order[train_count + i]);
      test_y[i] = labels[order[train_count + i]];
    }

    LinearClassifier clf =
        train_linear_classifier(train_X, train_y, 1e-4, 500, seed);
    std::vector<int> pred = clf.predict(test_X);
    report.micro_runs.push_back(micro_f1(pred, test_y, num_classes));
    report.macro_runs.push_back(macro_f1(pred, test_y, num_classes));
  }

  double micro_sum = 0, macro_sum = 0;
  for (int rep = 0; rep < repeats; ++rep) {
    micro_sum += report.micro_runs[rep];
    macro_sum += report.macro_runs[rep];
  }
  report.micro_f1_mean = micro_sum / repeats;
  report.macro_f1_mean = macro_sum / repeats;
  return report;
}

}  // namespace attrembed
