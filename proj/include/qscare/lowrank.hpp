#pragma once

#include "qscare/dense.hpp"

namespace qscare {

// U * D * V^T. With symmetric set, V == U and D is symmetric.
struct LowRankFactor {
  Mat u;
  Mat d;
  Mat v;
  bool symmetric = false;

  LowRankFactor() = default;
  LowRankFactor(Mat u_, Mat d_, Mat v_);
  static LowRankFactor zero(Index rows, Index cols);
  static LowRankFactor sym(Mat u_, Mat d_);

  Index rows() const { return u.rows(); }
  Index cols() const { return v.rows(); }
  Index rank() const { return d.rows(); }
  Mat to_dense() const { return u * d * v.transpose(); }
  Mat apply(const Mat& x) const { return u * (d * (v.transpose() * x)); }
  Mat apply_transpose(const Mat& x) const { return v * (d.transpose() * (u.transpose() * x)); }
  LowRankFactor transpose() const;
  LowRankFactor scaled(double s) const;
};

// Column-wise concatenation: the sum of both represented matrices.
LowRankFactor lowrank_sum(const LowRankFactor& a, const LowRankFactor& b);

// Orthogonalize U and V, then truncate the SVD (or eigendecomposition in the
// symmetric case) of the core at tol times its largest singular value.
LowRankFactor lowrank_recompress(const LowRankFactor& l, double tol);
// Same, with the cut taken relative to max(sigma_1, scale). Sums of
// cancelling terms need the scale of the terms, not of the result.
LowRankFactor lowrank_recompress(const LowRankFactor& l, double tol, double scale);

double lowrank_norm2(const LowRankFactor& l);

// Low-rank approximation of a dense block: keeps singular values above
// tol * sigma_1. Large blocks go through a randomized range finder with an
// explicit check of the remainder.
LowRankFactor compress_block(const Mat& b, double tol);

}  // namespace qscare
