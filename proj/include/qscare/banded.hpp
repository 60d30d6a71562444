#pragma once

#include "qscare/dense.hpp"

#include <vector>

namespace qscare {

// Square banded matrix, row-major band storage: entry (i,j) with
// -lower <= j-i <= upper lives at data[i*(lower+upper+1) + (j-i+lower)].
// Slots that fall outside the matrix (near the corners) are kept at zero.
class BandedMatrix {
public:
  BandedMatrix() = default;
  BandedMatrix(Index n, Index lower, Index upper);

  static BandedMatrix zero(Index n) { return BandedMatrix(n, 0, 0); }
  static BandedMatrix identity(Index n, double scale = 1.0);
  // Constant-diagonal tridiagonal matrix tridiag(sub, diag, super).
  static BandedMatrix tridiag(Index n, double sub, double diag, double super);
  // Keeps only the entries inside the given band.
  static BandedMatrix from_dense(const Mat& m, Index lower, Index upper);
  // Detects the band from the exact nonzero pattern.
  static BandedMatrix from_dense(const Mat& m);

  Index n() const { return n_; }
  Index lower() const { return lower_; }
  Index upper() const { return upper_; }
  Index width() const { return lower_ + upper_ + 1; }
  Index bandwidth() const { return std::max(lower_, upper_); }
  bool symmetric() const { return symmetric_; }

  bool in_band(Index i, Index j) const { return j - i >= -lower_ && j - i <= upper_; }
  double operator()(Index i, Index j) const {
    return in_band(i, j) ? data_[static_cast<size_t>(i * width() + (j - i + lower_))] : 0.0;
  }
  double& at(Index i, Index j) { return data_[static_cast<size_t>(i * width() + (j - i + lower_))]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Mat to_dense() const;
  Vec matvec(const Vec& x) const;
  Mat apply(const Mat& x) const;            // this * X
  Mat apply_transpose(const Mat& x) const;  // this^T * X
  BandedMatrix transpose() const;

  // Largest |i-j| over exactly nonzero entries (0 for the zero matrix).
  Index measured_bandwidth() const;
  // Same band, storage shrunk to the measured extent.
  BandedMatrix compact() const;
  // Re-stores with at least the given band (never drops entries).
  BandedMatrix widened(Index lower, Index upper) const;

  double frobenius() const;
  double max_abs() const;
  double asymmetry() const;  // ||M - M^T||_F / ||M||_F

  // Averages with the transpose and marks the result symmetric.
  BandedMatrix symmetrized() const;
  // Marks as symmetric after checking the entries to a relative tolerance.
  BandedMatrix& assert_symmetric(double tol = 1e-12);

  friend BandedMatrix operator+(const BandedMatrix& a, const BandedMatrix& b);
  friend BandedMatrix operator-(const BandedMatrix& a, const BandedMatrix& b);
  friend BandedMatrix operator*(double s, const BandedMatrix& a);
  friend BandedMatrix operator*(const BandedMatrix& a, const BandedMatrix& b);

private:
  Index n_ = 0, lower_ = 0, upper_ = 0;
  bool symmetric_ = false;
  std::vector<double> data_;
  friend BandedMatrix axpby(double, const BandedMatrix&, double, const BandedMatrix&);
  friend BandedMatrix band_truncate(const BandedMatrix&, Index);
};

// alpha*A + beta*B on the union band.
BandedMatrix axpby(double alpha, const BandedMatrix& a, double beta, const BandedMatrix& b);
// Frobenius inner product trace(A^T B).
double frobenius_dot(const BandedMatrix& a, const BandedMatrix& b);

// Operator T_s: keeps entries with |i-j| <= s.
BandedMatrix band_truncate(const BandedMatrix& m, Index s);
BandedMatrix band_truncate(const Mat& m, Index s);

}  // namespace qscare
