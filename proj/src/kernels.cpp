#include "qscare/kernels.hpp"

#include "qscare/error.hpp"

#include <Eigen/SVD>
#include <omp.h>

#include <algorithm>

namespace qscare::kernels {

namespace {

int g_threads = 0;

// Row i of C = A*B, written into c's band storage.
inline void multiply_row(const BandedMatrix& a, const BandedMatrix& b, BandedMatrix& c, Index i) {
  const Index n = a.n();
  const Index k0 = std::max<Index>(0, i - a.lower()), k1 = std::min(n - 1, i + a.upper());
  for (Index k = k0; k <= k1; ++k) {
    const double aik = a(i, k);
    if (aik == 0.0) continue;
    const Index j0 = std::max<Index>(0, k - b.lower()), j1 = std::min(n - 1, k + b.upper());
    for (Index j = j0; j <= j1; ++j) c.at(i, j) += aik * b(k, j);
  }
}

BandedMatrix product_shape(const BandedMatrix& a, const BandedMatrix& b) {
  require(a.n() == b.n(), "band_multiply: size mismatch");
  return BandedMatrix(a.n(), a.lower() + b.lower(), a.upper() + b.upper());
}

inline void apply_row(const BandedMatrix& a, const Mat& x, Mat& y, Index i) {
  const Index n = a.n();
  const Index k0 = std::max<Index>(0, i - a.lower()), k1 = std::min(n - 1, i + a.upper());
  for (Index k = k0; k <= k1; ++k) {
    const double aik = a(i, k);
    if (aik != 0.0) y.row(i) += aik * x.row(k);
  }
}

inline void block_sv(const Mat& x, Index j, Index lmax, double* out) {
  const Index n = x.rows();
  const Vec s = singular_values(x.block(j, 0, n - j, j));
  for (Index l = 0; l < lmax; ++l) out[l] = l < s.size() ? s(l) : 0.0;
}

}  // namespace

void set_threads(int n) { g_threads = n; }
int threads() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

BandedMatrix band_multiply_serial(const BandedMatrix& a, const BandedMatrix& b) {
  BandedMatrix c = product_shape(a, b);
  for (Index i = 0; i < a.n(); ++i) multiply_row(a, b, c, i);
  return c;
}

BandedMatrix band_multiply_parallel(const BandedMatrix& a, const BandedMatrix& b) {
  BandedMatrix c = product_shape(a, b);
  const Index n = a.n();
#pragma omp parallel for schedule(static) num_threads(threads()) if (n * c.width() > 20000)
  for (Index i = 0; i < n; ++i) multiply_row(a, b, c, i);
  return c;
}

Mat band_apply_serial(const BandedMatrix& a, const Mat& x) {
  require(x.rows() == a.n(), "band_apply: shape mismatch");
  Mat y = Mat::Zero(a.n(), x.cols());
  for (Index i = 0; i < a.n(); ++i) apply_row(a, x, y, i);
  return y;
}

Mat band_apply_parallel(const BandedMatrix& a, const Mat& x) {
  require(x.rows() == a.n(), "band_apply: shape mismatch");
  Mat y = Mat::Zero(a.n(), x.cols());
  const Index n = a.n();
#pragma omp parallel for schedule(static) num_threads(threads()) if (n * a.width() * x.cols() > 20000)
  for (Index i = 0; i < n; ++i) apply_row(a, x, y, i);
  return y;
}

Vec offdiag_sv_serial(const Mat& x, Index lmax) {
  require(x.rows() == x.cols(), "offdiag_sv: matrix must be square");
  const Index n = x.rows();
  Vec best = Vec::Zero(lmax);
  std::vector<double> buf(static_cast<size_t>(lmax));
  for (Index j = 1; j < n; ++j) {
    block_sv(x, j, lmax, buf.data());
    for (Index l = 0; l < lmax; ++l) best(l) = std::max(best(l), buf[static_cast<size_t>(l)]);
  }
  return best;
}

Vec offdiag_sv_parallel(const Mat& x, Index lmax) {
  require(x.rows() == x.cols(), "offdiag_sv: matrix must be square");
  const Index n = x.rows();
  if (n < 2) return Vec::Zero(lmax);
  Mat all = Mat::Zero(lmax, n);
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads())
  for (Index j = 1; j < n; ++j) block_sv(x, j, lmax, all.col(j).data());
  Vec best = Vec::Zero(lmax);
  for (Index j = 1; j < n; ++j)
    for (Index l = 0; l < lmax; ++l) best(l) = std::max(best(l), all(l, j));
  return best;
}

}  // namespace qscare::kernels
