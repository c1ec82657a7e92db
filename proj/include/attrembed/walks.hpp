#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "attrembed/graph.hpp"
#include "attrembed/rng.hpp"

namespace attrembed {

/// Uniform random-walk corpus. Each node starts walks_per_node walks of
/// walk_length nodes; a walk stops early at a node with no neighbors.
/// Per-walk seeding makes the corpus independent of generation order.
struct WalkCorpus {
  std::vector<std::vector<int>> walks;
  int walks_per_node = 10;
  int walk_length = 80;
  int window = 10;

  std::size_t size() const { return walks.size(); }
};

WalkCorpus generate_walks(const AttributedGraph& g, int walks_per_node,
                          int walk_length, std::uint64_t seed);

/// All (center, context) pairs within the corpus window: for position i of a
/// walk, every offset j in [-window, window], j != 0, clipped at the walk
/// ends.
std::vector<std::pair<int, int>> context_pairs(const WalkCorpus& corpus);

/// One walk per line, space-separated node ids.
void save_walks(const WalkCorpus& corpus, const std::string& path);

/// Noise distribution for skip-gram negatives, P(v) proportional to
/// degree(v)^(3/4). Zero-degree nodes get probability 0.
class NegativeSampler {
 public:
  explicit NegativeSampler(const std::vector<int>& degrees);

  double probability(int v) const { return pmf_[v]; }
  int num_nodes() const { return static_cast<int>(pmf_.size()); }
  int support() const { return support_; }

  int sample(Rng& rng) const;

  /// `count` draws, redrawing any draw equal to `exclude`. Throws when
  /// `exclude` is the only node with non-zero probability.
  std::vector<int> sample_excluding(Rng& rng, int count, int exclude) const;

 private:
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  int support_ = 0;
};

}  // namespace attrembed
