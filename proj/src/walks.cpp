#include "attrembed/walks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace attrembed {

WalkCorpus generate_walks(const AttributedGraph& g, int walks_per_node,
                          int walk_length, std::uint64_t seed) {
  if (walks_per_node <= 0 || walk_length <= 0) {
    throw std::invalid_argument("walks: counts must be positive");
  }
  WalkCorpus corpus;
  corpus.walks_per_node = walks_per_node;
  corpus.walk_length = walk_length;
  corpus.walks.reserve(static_cast<std::size_t>(g.n) * walks_per_node);
  for (int pass = 0; pass < walks_per_node; ++pass) {
    for (int start = 0; start < g.n; ++start) {
      // Each walk draws from its own stream, so corpus layout and walk
      // content are independent choices.
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(start),
                       static_cast<std::uint64_t>(pass)));
      std::vector<int> walk;
      walk.reserve(walk_length);
      walk.push_back(start);
      int cur = start;
      while (static_cast<int>(walk.size()) < walk_length) {
        const auto& nbrs = g.adjacency[cur];
        if (nbrs.empty()) {
          break;
        }
        cur = nbrs[rng.index(nbrs.size())];
        walk.push_back(cur);
      }
      corpus.walks.push_back(std::move(walk));
    }
  }
  return corpus;
}

std::vector<std::pair<int, int>> context_pairs(const WalkCorpus& corpus) {
  std::vector<std::pair<int, int>> pairs;
  const int w = corpus.window;
  if (w <= 0) {
    throw std::invalid_argument("context window must be positive");
  }
  for (const auto& walk : corpus.walks) {
    const int len = static_cast<int>(walk.size());
    for (int i = 0; i < len; ++i) {
      const int lo = std::max(0, i - w);
      const int hi = std::min(len - 1, i + w);
      for (int j = lo; j <= hi; ++j) {
        if (j != i) {
          pairs.emplace_back(walk[i], walk[j]);
        }
      }
    }
  }
  return pairs;
}

void save_walks(const WalkCorpus& corpus, const std::string& path) {
  ensure_parent_dir(path);
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write walks file: " + path);
  }
  for (const auto& walk : corpus.walks) {
    for (std::size_t i = 0; i < walk.size(); ++i) {
      out << (i ? " " : "") << walk[i];
    }
    out << '\n';
  }
}

NegativeSampler::NegativeSampler(const std::vector<int>& degrees) {
  const int n = static_cast<int>(degrees.size());
  pmf_.assign(n, 0.0);
  support_ = 0;
  double total = 0.0;
  for (int v = 0; v < n; ++v) {
    if (degrees[v] < 0) {
      throw std::invalid_argument("negative degree");
    }
    if (degrees[v] > 0) {
      pmf_[v] = std::pow(static_cast<double>(degrees[v]), 0.75);
      total += pmf_[v];
      ++support_;
    }
  }
  if (support_ == 0) {
    throw std::invalid_argument(
        "negative sampler needs at least one node with an edge");
  }
  cdf_.assign(n, 0.0);
  double acc = 0.0;
  for (int v = 0; v < n; ++v) {
    pmf_[v] /= total;
    acc += pmf_[v];
    cdf_[v] = acc;
  }
  cdf_[n - 1] = 1.0;
}

int NegativeSampler::sample(Rng& rng) const {
  double u = rng.real();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) {
    --it;
  }
  int v = static_cast<int>(it - cdf_.begin());
  // Skip zero-mass nodes that share a cdf value with their predecessor.
  while (pmf_[v] == 0.0 && v + 1 < num_nodes()) {
    ++v;
  }
  return v;
}

std::vector<int> NegativeSampler::sample_excluding(Rng& rng, int count,
                                                   int exclude) const {
  if (support_ == 1 && exclude >= 0 && exclude < num_nodes() &&
      pmf_[exclude] > 0.0) {
    throw std::invalid_argument(
        "cannot exclude the only node the sampler can draw");
  }
  std::vector<int> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    int v = sample(rng);
    if (v != exclude) {
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace attrembed
