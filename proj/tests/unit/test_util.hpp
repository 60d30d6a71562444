#pragma once

#include "qscare/dense.hpp"

#include <random>

namespace testutil {

using qscare::Index;
using qscare::Mat;
using qscare::Vec;

inline Mat randn(Index r, Index c, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  Mat m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = nd(g);
  return m;
}

inline Mat rand_spd(Index n, std::mt19937_64& g, double shift = 1.0) {
  Mat b = randn(n, n, g);
  return b * b.transpose() / static_cast<double>(n) + shift * Mat::Identity(n, n);
}

inline Mat rand_psd_lowrank(Index n, Index r, std::mt19937_64& g) {
  Mat b = randn(n, r, g);
  return b * b.transpose();
}

// Random matrix shifted so that its spectral abscissa is -margin.
inline Mat rand_stable(Index n, std::mt19937_64& g, double margin = 0.5) {
  Mat a = randn(n, n, g) / std::sqrt(static_cast<double>(n));
  const double abscissa = qscare::spectral_abscissa(a);
  return a - (abscissa + margin) * Mat::Identity(n, n);
}

inline Mat rand_sym(Index n, std::mt19937_64& g) {
  Mat b = randn(n, n, g);
  return 0.5 * (b + b.transpose());
}

// A^T X + X A = C through the Kronecker form, small n only.
inline Mat kron_lyapunov(const Mat& a, const Mat& c) {
  const Index n = a.rows();
  Mat k = Mat::Zero(n * n, n * n);
  Mat id = Mat::Identity(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      // vec(A^T X) = (I kron A^T) vec X ; vec(X A) = (A^T kron I) vec X
      k.block(i * n, j * n, n, n) += id(i, j) * a.transpose();
      k.block(i * n, j * n, n, n) += a(j, i) * id;
    }
  Vec rhs = Eigen::Map<const Vec>(c.data(), n * n);
  Vec x = k.partialPivLu().solve(rhs);
  return Eigen::Map<Mat>(x.data(), n, n);
}

inline double rel(const Mat& a, const Mat& b) {
  const double nb = b.norm();
  return nb > 0 ? (a - b).norm() / nb : (a - b).norm();
}

}  // namespace testutil
