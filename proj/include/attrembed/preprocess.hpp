#pragma once

#include <string>

#include "attrembed/graph.hpp"

namespace attrembed {

/// Blend of structure and attribute similarity that feeds the encoder,
/// R = eta*A + psi*S where S is the pairwise attribute cosine matrix.
/// The penalty mask weighs reconstruction error on non-zero entries by
/// chi > 1 and is derived from R on demand instead of being stored.
struct ReconstructedAdjacency {
  Mat R;
  double eta = 1.0;
  double psi = 1.0;
  double chi = 1.0;

  int n() const { return static_cast<int>(R.rows()); }
  double penalty(int i, int j) const { return R(i, j) == 0.0 ? 1.0 : chi; }
  Eigen::RowVectorXd penalty_row(int i) const;
};

/// Pairwise cosine similarity of attribute rows. The diagonal is forced to
/// zero and zero-norm rows get similarity 0 everywhere. Exactly symmetric.
Mat attribute_similarity(const Mat& X);

/// R = eta*A + psi*S, elementwise. Throws on dimension mismatch or when both
/// weights are zero/negative.
ReconstructedAdjacency reconstructed_adjacency(const Mat& A, const Mat& S,
                                               double eta, double psi);

/// Same blend built straight from a graph, skipping the dense A.
ReconstructedAdjacency build_reconstruction(const AttributedGraph& g,
                                            double eta, double psi);

/// Keeps each row's top_k largest entries, zeroes the rest, then
/// re-symmetrizes by elementwise max with the transpose.
Mat sparsify_similarity(const Mat& S, int top_k);

/// Binary cache of a square matrix: magic "RADJ", u32 element width, u64 n,
/// then n*n doubles row-major.
void save_matrix_cache(const Mat& m, const std::string& path);
Mat load_matrix_cache(const std::string& path);

}  // namespace attrembed
