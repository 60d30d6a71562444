#pragma once

#include "qscare/banded.hpp"
#include "qscare/lowrank.hpp"

#include <memory>

namespace qscare {

// Recursive 2x2 hierarchical matrix with low-rank offdiagonal blocks
// (HODLR). A node of order m > n_min splits into halves ceil(m/2), floor(m/2).
// Nodes are immutable and shared between copies.
class HMatrix {
public:
  struct Node;

  HMatrix() = default;

  static HMatrix leaf(Mat d);
  static HMatrix node(HMatrix a11, HMatrix a22, LowRankFactor a12, LowRankFactor a21);

  static HMatrix from_dense(const Mat& m, double tol, Index n_min = 250);
  static HMatrix from_banded(const BandedMatrix& b, Index n_min = 250);
  static HMatrix identity(Index n, Index n_min = 250, double scale = 1.0);
  static HMatrix zero(Index n, Index n_min = 250);

  bool empty() const { return !node_; }
  Index n() const;
  bool is_leaf() const;
  const Mat& dense() const;          // leaf only
  const HMatrix& child(int i) const; // 0 or 1, internal only
  const LowRankFactor& upper() const;
  const LowRankFactor& lower() const;
  Index split() const { return child(0).n(); }

  Mat to_dense() const;
  Mat apply(const Mat& x) const;
  Mat apply_transpose(const Mat& x) const;
  HMatrix transpose() const;
  HMatrix scaled(double s) const;

  Index max_rank() const;
  Index depth() const;
  Index leaf_count() const;
  size_t storage() const;  // stored doubles
  bool same_shape(const HMatrix& o) const;

private:
  std::shared_ptr<const Node> node_;
};

struct HMatrix::Node {
  Index n = 0;
  bool leaf = true;
  Mat d;
  HMatrix c11, c22;
  LowRankFactor a12, a21;
};

inline Mat hm_matvec(const HMatrix& h, const Mat& x) { return h.apply(x); }

HMatrix hm_axpby(double alpha, const HMatrix& a, double beta, const HMatrix& b, double tol);
HMatrix hm_add(const HMatrix& a, const HMatrix& b, double tol);
HMatrix hm_matmul(const HMatrix& a, const HMatrix& b, double tol);
HMatrix hm_lowrank_update(const HMatrix& h, const LowRankFactor& l, double tol);
HMatrix hm_recompress(const HMatrix& h, double tol);
HMatrix hm_symmetrize(const HMatrix& h, double tol);
HMatrix hm_block_diag(const HMatrix& a11, const HMatrix& a22);

// Re-expresses h on the block tree of shape.
HMatrix hm_reproject(const HMatrix& h, const HMatrix& shape, double tol);

struct HSplit {
  HMatrix h11, h22;
  LowRankFactor delta;  // full-size offdiagonal part
};
// General split, rank(delta) = rank(A12) + rank(A21).
HSplit hm_split(const HMatrix& h);
// For symmetric h: delta = U D U^T built from the upper block only.
HSplit hm_split_symmetric(const HMatrix& h);

// Block LU with low-rank Schur complement updates.
class HFactorization {
public:
  HFactorization() = default;
  explicit HFactorization(const HMatrix& h, double tol = 1e-14);
  Mat solve(const Mat& b) const;
  Index n() const { return n_; }

private:
  Index n_ = 0;
  bool leaf_ = true;
  Eigen::PartialPivLU<Mat> lu_;
  std::shared_ptr<const HFactorization> f11_, fs_;
  LowRankFactor a21_;
  Mat w1_;  // H11^{-1} U1
  Mat d1_, v2_;
};

Mat hm_solve(const HMatrix& h, const Mat& b);

}  // namespace qscare
