#include "qscare/banded.hpp"

#include "qscare/error.hpp"
#include "qscare/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace qscare {

BandedMatrix::BandedMatrix(Index n, Index lower, Index upper)
    : n_(n), lower_(std::min(lower, std::max<Index>(n - 1, 0))),
      upper_(std::min(upper, std::max<Index>(n - 1, 0))) {
  require(n >= 0 && lower >= 0 && upper >= 0, "BandedMatrix: negative dimension");
  data_.assign(static_cast<size_t>(n_ * width()), 0.0);
}

BandedMatrix BandedMatrix::identity(Index n, double scale) {
  BandedMatrix m(n, 0, 0);
  std::fill(m.data_.begin(), m.data_.end(), scale);
  m.symmetric_ = true;
  return m;
}

BandedMatrix BandedMatrix::tridiag(Index n, double sub, double diag, double super) {
  BandedMatrix m(n, n > 1 ? 1 : 0, n > 1 ? 1 : 0);
  for (Index i = 0; i < n; ++i) {
    m.at(i, i) = diag;
    if (i > 0) m.at(i, i - 1) = sub;
    if (i + 1 < n) m.at(i, i + 1) = super;
  }
  m.symmetric_ = (sub == super);
  return m;
}

BandedMatrix BandedMatrix::from_dense(const Mat& d, Index lower, Index upper) {
  require(d.rows() == d.cols(), "BandedMatrix::from_dense: matrix must be square");
  BandedMatrix m(d.rows(), lower, upper);
  for (Index i = 0; i < m.n_; ++i)
    for (Index j = std::max<Index>(0, i - m.lower_); j <= std::min(m.n_ - 1, i + m.upper_); ++j)
      m.at(i, j) = d(i, j);
  return m;
}

BandedMatrix BandedMatrix::from_dense(const Mat& d) {
  require(d.rows() == d.cols(), "BandedMatrix::from_dense: matrix must be square");
  Index lo = 0, up = 0;
  for (Index j = 0; j < d.cols(); ++j)
    for (Index i = 0; i < d.rows(); ++i)
      if (d(i, j) != 0.0) {
        lo = std::max(lo, i - j);
        up = std::max(up, j - i);
      }
  return from_dense(d, lo, up);
}

Mat BandedMatrix::to_dense() const {
  Mat d = Mat::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i)
    for (Index j = std::max<Index>(0, i - lower_); j <= std::min(n_ - 1, i + upper_); ++j) d(i, j) = (*this)(i, j);
  return d;
}

Vec BandedMatrix::matvec(const Vec& x) const { return apply(x); }

Mat BandedMatrix::apply(const Mat& x) const { return kernels::band_apply_parallel(*this, x); }

Mat BandedMatrix::apply_transpose(const Mat& x) const {
  require(x.rows() == n_, "BandedMatrix::apply_transpose: shape mismatch");
  Mat y = Mat::Zero(n_, x.cols());
  for (Index i = 0; i < n_; ++i)
    for (Index j = std::max<Index>(0, i - lower_); j <= std::min(n_ - 1, i + upper_); ++j) {
      const double a = (*this)(i, j);
      if (a != 0.0) y.row(j) += a * x.row(i);
    }
  return y;
}

BandedMatrix BandedMatrix::transpose() const {
  BandedMatrix t(n_, upper_, lower_);
  for (Index i = 0; i < n_; ++i)
    for (Index j = std::max<Index>(0, i - lower_); j <= std::min(n_ - 1, i + upper_); ++j) t.at(j, i) = (*this)(i, j);
  t.symmetric_ = symmetric_;
  return t;
}

Index BandedMatrix::measured_bandwidth() const {
  Index bw = 0;
  for (Index i = 0; i < n_; ++i)
    for (Index j = std::max<Index>(0, i - lower_); j <= std::min(n_ - 1, i + upper_); ++j)
      if ((*this)(i, j) != 0.0) bw = std::max(bw, std::abs(i - j));
  return bw;
}

BandedMatrix BandedMatrix::compact() const {
  Index lo = 0, up = 0;
  for (Index i = 0; i < n_; ++i)
    for (Index j = std::max<Index>(0, i - lower_); j <= std::min(n_ - 1, i + upper_); ++j)
      if ((*this)(i, j) != 0.0) {
        lo = std::max(lo, i - j);
        up = std::max(up, j - i);
      }
  if (symmetric_) lo = up = std::max(lo, up);
  BandedMatrix c(n_, lo, up);
  for (Index i = 0; i < n_; ++i)
    for (Index j = std::max<Index>(0, i - lo); j <= std::min(n_ - 1, i + up); ++j) c.at(i, j) = (*this)(i, j);
  c.symmetric_ = symmetric_;
  return c;
}

BandedMatrix BandedMatrix::widened(Index lower, Index upper) const {
  BandedMatrix c(n_, std::max(lower, lower_), std::max(upper, upper_));
  for (Index i = 0; i < n_; ++i)
    for (Index j = std::max<Index>(0, i - lower_); j <= std::min(n_ - 1, i + upper_); ++j) c.at(i, j) = (*this)(i, j);
  c.symmetric_ = symmetric_;
  return c;
}

double BandedMatrix::frobenius() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double BandedMatrix::max_abs() const {
  double s = 0.0;
  for (double v : data_) s = std::max(s, std::abs(v));
  return s;
}

double BandedMatrix::asymmetry() const {
  const double nrm = frobenius();
  if (nrm == 0.0) return 0.0;
  return (*this - transpose()).frobenius() / nrm;
}

BandedMatrix BandedMatrix::symmetrized() const {
  BandedMatrix s = axpby(0.5, *this, 0.5, transpose());
  s.symmetric_ = true;
  return s;
}

BandedMatrix& BandedMatrix::assert_symmetric(double tol) {
  require(asymmetry() <= tol, "BandedMatrix: matrix is not symmetric");
  if (lower_ != upper_) *this = widened(bandwidth(), bandwidth());
  symmetric_ = true;
  return *this;
}

BandedMatrix axpby(double alpha, const BandedMatrix& a, double beta, const BandedMatrix& b) {
  require(a.n() == b.n(), "axpby: size mismatch");
  BandedMatrix c(a.n(), std::max(a.lower(), b.lower()), std::max(a.upper(), b.upper()));
  const Index n = a.n();
  for (Index i = 0; i < n; ++i)
    for (Index j = std::max<Index>(0, i - c.lower()); j <= std::min(n - 1, i + c.upper()); ++j)
      c.at(i, j) = alpha * a(i, j) + beta * b(i, j);
  c.symmetric_ = a.symmetric() && b.symmetric();
  return c;
}

BandedMatrix operator+(const BandedMatrix& a, const BandedMatrix& b) { return axpby(1.0, a, 1.0, b); }
BandedMatrix operator-(const BandedMatrix& a, const BandedMatrix& b) { return axpby(1.0, a, -1.0, b); }
BandedMatrix operator*(double s, const BandedMatrix& a) {
  BandedMatrix c = a;
  for (double& v : c.data_) v *= s;
  return c;
}
BandedMatrix operator*(const BandedMatrix& a, const BandedMatrix& b) { return kernels::band_multiply_parallel(a, b); }

double frobenius_dot(const BandedMatrix& a, const BandedMatrix& b) {
  require(a.n() == b.n(), "frobenius_dot: size mismatch");
  const Index lo = std::min(a.lower(), b.lower()), up = std::min(a.upper(), b.upper());
  double s = 0.0;
  for (Index i = 0; i < a.n(); ++i)
    for (Index j = std::max<Index>(0, i - lo); j <= std::min(a.n() - 1, i + up); ++j) s += a(i, j) * b(i, j);
  return s;
}

BandedMatrix band_truncate(const BandedMatrix& m, Index s) {
  require(s >= 0, "band_truncate: s must be nonnegative");
  BandedMatrix t(m.n(), std::min(s, m.lower()), std::min(s, m.upper()));
  for (Index i = 0; i < m.n(); ++i)
    for (Index j = std::max<Index>(0, i - t.lower()); j <= std::min(m.n() - 1, i + t.upper()); ++j) t.at(i, j) = m(i, j);
  t.symmetric_ = m.symmetric();
  return t;
}

BandedMatrix band_truncate(const Mat& m, Index s) {
  require(s >= 0, "band_truncate: s must be nonnegative");
  return BandedMatrix::from_dense(m, s, s);
}

}  // namespace qscare
