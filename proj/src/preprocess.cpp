#include "attrembed/preprocess.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace attrembed {

Mat attribute_similarity(const Mat& X) {
  const int n = static_cast<int>(X.rows());
  Mat Xn = X;
  for (int i = 0; i < n; ++i) {
    double norm = Xn.row(i).norm();
    if (norm > 0) {
      Xn.row(i) /= norm;
    } else {
      Xn.row(i).setZero();
    }
  }
  Mat S = Xn * Xn.transpose();
  // Mirror the lower triangle so S is symmetric to the last bit; the GEMM
  // alone can differ across (i,j)/(j,i) by rounding.
  for (int i = 0; i < n; ++i) {
    S(i, i) = 0.0;
    for (int j = 0; j < i; ++j) {
      S(j, i) = S(i, j);
    }
  }
  return S;
}

Eigen::RowVectorXd ReconstructedAdjacency::penalty_row(int i) const {
  Eigen::RowVectorXd b(R.cols());
  for (int j = 0; j < R.cols(); ++j) {
    b(j) = R(i, j) == 0.0 ? 1.0 : chi;
  }
  return b;
}

ReconstructedAdjacency reconstructed_adjacency(const Mat& A, const Mat& S,
                                               double eta, double psi) {
  if (A.rows() != S.rows() || A.cols() != S.cols() || A.rows() != A.cols()) {
    throw std::invalid_argument(
        "reconstructed_adjacency: A and S must be square and equal-sized");
  }
  if (eta < 0 || psi < 0 || (eta == 0 && psi == 0)) {
    throw std::invalid_argument(
        "reconstructed_adjacency: need non-negative weights, at least one positive");
  }
  ReconstructedAdjacency out;
  out.eta = eta;
  out.psi = psi;
  out.R = eta * A + psi * S;
  return out;
}

ReconstructedAdjacency build_reconstruction(const AttributedGraph& g,
                                            double eta, double psi) {
  if (eta < 0 || psi < 0 || (eta == 0 && psi == 0)) {
    throw std::invalid_argument(
        "build_reconstruction: need non-negative weights, at least one positive");
  }
  ReconstructedAdjacency out;
  out.eta = eta;
  out.psi = psi;
  out.R = psi == 0.0 ? Mat::Zero(g.n, g.n).eval()
                     : (psi * attribute_similarity(g.attributes)).eval();
  if (eta != 0.0) {
    for (auto [u, v] : g.edges) {
      out.R(u, v) += eta;
      out.R(v, u) += eta;
    }
  }
  return out;
}

Mat sparsify_similarity(const Mat& S, int top_k) {
  const int n = static_cast<int>(S.rows());
  if (S.cols() != n) {
    throw std::invalid_argument("sparsify_similarity: matrix must be square");
  }
  if (top_k < 0) {
    throw std::invalid_argument("sparsify_similarity: top_k must be >= 0");
  }
  Mat kept = Mat::Zero(n, n);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      order[j] = j;
    }
    // Keep the top_k largest off-diagonal entries of row i; ties resolved
    // toward the smaller column index so the result is deterministic.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return S(i, a) > S(i, b);
    });
    int taken = 0;
    for (int j : order) {
      if (j == i) {
        continue;
      }
      if (taken >= top_k || S(i, j) <= 0.0) {
        break;
      }
      kept(i, j) = S(i, j);
      ++taken;
    }
  }
  // Symmetrize: an entry survives if either endpoint kept it.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      double v = std::max(kept(i, j), kept(j, i));
      kept(i, j) = v;
      kept(j, i) = v;
    }
  }
  return kept;
}

namespace {
constexpr char kMagic[4] = {'R', 'A', 'D', 'J'};
}

void save_matrix_cache(const Mat& R, const std::string& path) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write matrix cache: " + path);
  }
  out.write(kMagic, 4);
  std::uint32_t width = sizeof(double);
  std::uint64_t n = static_cast<std::uint64_t>(R.rows());
  std::uint64_t m = static_cast<std::uint64_t>(R.cols());
  out.write(reinterpret_cast<const char*>(&width), sizeof(width));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&m), sizeof(m));
  out.write(reinterpret_cast<const char*>(R.data()),
            static_cast<std::streamsize>(n * m * sizeof(double)));
  if (!out) {
    throw std::runtime_error("short write to matrix cache: " + path);
  }
}

Mat load_matrix_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open matrix cache: " + path);
  }
  char magic[4];
  std::uint32_t width = 0;
  std::uint64_t n = 0, m = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&width), sizeof(width));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&m), sizeof(m));
  if (!in || std::memcmp(magic, kMagic, 4) != 0 || width != sizeof(double)) {
    throw std::runtime_error("not a matrix cache file: " + path);
  }
  Mat R(static_cast<int>(n), static_cast<int>(m));
  in.read(reinterpret_cast<char*>(R.data()),
          static_cast<std::streamsize>(n * m * sizeof(double)));
  if (!in) {
    throw std::runtime_error("truncated matrix cache: " + path);
  }
  return R;
}

}  // namespace attrembed
