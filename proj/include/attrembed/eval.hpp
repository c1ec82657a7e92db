#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "attrembed/graph.hpp"
#include "attrembed/model.hpp"

namespace attrembed {

/// Edge holdout for link prediction. Held-out positives are never bridges at
/// removal time, so every connected component of the original graph stays
/// connected in train_graph. Negatives are uniform non-edges of the original
/// graph, one per positive.
struct LinkSplit {
  AttributedGraph train_graph;
  std::vector<std::pair<int, int>> positives;
  std::vector<std::pair<int, int>> negatives;
  int requested = 0;
  int shortfall = 0;  // positives short of the requested count
};

LinkSplit split_link_prediction(const AttributedGraph& g, double fraction,
                                std::uint64_t seed);

/// Cosine of two embedding rows; 0 when either row is all zero.
double score_pair(const Mat& Y, int i, int j);

/// Probability that a random positive outranks a random negative, ties
/// counted half. Computed from rank statistics.
double auc(const std::vector<double>& pos_scores,
           const std::vector<double>& neg_scores);

/// One-vs-rest logistic regression with an L2 penalty on the weights,
/// trained by full-batch gradient descent. Prediction is argmax score with
/// ties broken toward the lowest class id.
struct LinearClassifier {
  Mat weights;             // num_classes x dim
  Eigen::VectorXd bias;    // num_classes

  int predict(const Eigen::RowVectorXd& x) const;
  std::vector<int> predict(const Mat& X) const;
};

LinearClassifier train_linear_classifier(const Mat& features,
                                         const std::vector<int>& labels,
                                         double l2, int epochs,
                                         std::uint64_t seed);

/// Multi-class F1 aggregated over all decisions (micro) or averaged per
/// class over the label universe 0..num_classes-1 (macro).
double micro_f1(const std::vector<int>& pred, const std::vector<int>& truth,
                int num_classes);
double macro_f1(const std::vector<int>& pred, const std::vector<int>& truth,
                int num_classes);

struct EvalReport {
  std::string task;  // "lp" or "nc"
  double auc = 0;
  double micro_f1_mean = 0;
  double macro_f1_mean = 0;
  std::vector<double> micro_runs;
  std::vector<double> macro_runs;
  int repeats = 0;
  int split_shortfall = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config_snapshot;

  std::string to_key_values() const;
  void append_to_log(const std::string& path) const;
};

/// Holds out `fraction` of edges, trains embeddings on the residual graph,
/// scores held-out pairs by cosine and reports AUC.
EvalReport link_prediction_eval(const AttributedGraph& g,
                                const ModelConfig& cfg, double fraction,
                                std::uint64_t seed);

/// Repeats: uniform train/test split of the labeled nodes, classifier on
/// train_frac of them, micro/macro F1 on the rest; reports the means. A
/// repeat whose training split is single-class is resampled (bounded).
EvalReport node_classification_eval(const Mat& Y,
                                    const std::vector<int>& labels,
                                    int num_classes, double train_frac,
                                    int repeats, std::uint64_t seed);

}  // namespace attrembed
