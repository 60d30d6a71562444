#include "qscare/lowrank.hpp"

#include "qscare/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <random>

namespace qscare {

LowRankFactor::LowRankFactor(Mat u_, Mat d_, Mat v_) : u(std::move(u_)), d(std::move(d_)), v(std::move(v_)) {
  require(u.cols() == d.rows() && v.cols() == d.cols() && d.rows() == d.cols(),
          "LowRankFactor: inconsistent factor shapes");
}

LowRankFactor LowRankFactor::zero(Index rows, Index cols) {
  return LowRankFactor(Mat(rows, 0), Mat(0, 0), Mat(cols, 0));
}

LowRankFactor LowRankFactor::sym(Mat u_, Mat d_) {
  LowRankFactor l(u_, d_, u_);
  l.symmetric = true;
  return l;
}

LowRankFactor LowRankFactor::transpose() const {
  LowRankFactor t(v, d.transpose(), u);
  t.symmetric = symmetric;
  return t;
}

LowRankFactor LowRankFactor::scaled(double s) const {
  LowRankFactor t(u, s * d, v);
  t.symmetric = symmetric;
  return t;
}

LowRankFactor lowrank_sum(const LowRankFactor& a, const LowRankFactor& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "lowrank_sum: shape mismatch");
  const Index ra = a.rank(), rb = b.rank();
  Mat u(a.rows(), ra + rb), v(a.cols(), ra + rb);
  u << a.u, b.u;
  v << a.v, b.v;
  Mat d = Mat::Zero(ra + rb, ra + rb);
  d.topLeftCorner(ra, ra) = a.d;
  d.bottomRightCorner(rb, rb) = b.d;
  LowRankFactor s(std::move(u), std::move(d), std::move(v));
  s.symmetric = a.symmetric && b.symmetric;
  return s;
}

namespace {

struct ThinQR {
  Mat q;
  Mat r;
};

ThinQR thin_qr(const Mat& a) {
  const Index k = std::min(a.rows(), a.cols());
  Eigen::HouseholderQR<Mat> qr(a);
  ThinQR out;
  out.q = qr.householderQ() * Mat::Identity(a.rows(), k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return out;
}

Vec svals(const Mat& m) { return singular_values(m); }

}  // namespace

double lowrank_norm2(const LowRankFactor& l) {
  if (l.rank() == 0 || l.rows() == 0 || l.cols() == 0) return 0.0;
  ThinQR qu = thin_qr(l.u), qv = thin_qr(l.v);
  Vec s = svals(qu.r * l.d * qv.r.transpose());
  return s.size() ? s(0) : 0.0;
}

LowRankFactor lowrank_recompress(const LowRankFactor& l, double tol, double scale) {
  require(tol > 0.0, "lowrank_recompress: tol must be positive");
  if (l.rank() == 0 || l.rows() == 0 || l.cols() == 0) {
    LowRankFactor z = LowRankFactor::zero(l.rows(), l.cols());
    z.symmetric = l.symmetric;
    return z;
  }
  if (l.symmetric) {
    ThinQR qu = thin_qr(l.u);
    Mat core = qu.r * l.d * qu.r.transpose();
    core = 0.5 * (core + core.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(core);
    const Vec& lam = es.eigenvalues();
    const double top = lam.cwiseAbs().maxCoeff();
    const double cut = tol * std::max(top, scale);
    std::vector<Index> keep;
    for (Index i = 0; i < lam.size(); ++i)
      if (std::abs(lam(i)) > cut) keep.push_back(i);
    // largest magnitude first, for stable output ordering
    std::sort(keep.begin(), keep.end(), [&](Index a, Index b) { return std::abs(lam(a)) > std::abs(lam(b)); });
    const Index k = static_cast<Index>(keep.size());
    Mat w(core.rows(), k), d = Mat::Zero(k, k);
    for (Index j = 0; j < k; ++j) {
      w.col(j) = es.eigenvectors().col(keep[static_cast<size_t>(j)]);
      d(j, j) = lam(keep[static_cast<size_t>(j)]);
    }
    return LowRankFactor::sym(qu.q * w, d);
  }
  ThinQR qu = thin_qr(l.u), qv = thin_qr(l.v);
  Mat core = qu.r * l.d * qv.r.transpose();
  ThinSvd svd = svd_thin(core);
  const Vec& s = svd.s;
  const double cut = tol * std::max(s.size() ? s(0) : 0.0, scale);
  Index k = 0;
  while (k < s.size() && s(k) > cut) ++k;
  return LowRankFactor(qu.q * svd.u.leftCols(k), s.head(k).asDiagonal().toDenseMatrix(), qv.q * svd.v.leftCols(k));
}

LowRankFactor lowrank_recompress(const LowRankFactor& l, double tol) { return lowrank_recompress(l, tol, 0.0); }

namespace {

LowRankFactor truncated_svd(const Mat& b, double tol) {
  ThinSvd svd = svd_thin(b);
  const Vec& s = svd.s;
  if (s.size() == 0 || s(0) == 0.0) return LowRankFactor::zero(b.rows(), b.cols());
  Index k = 0;
  while (k < s.size() && s(k) > tol * s(0)) ++k;
  return LowRankFactor(svd.u.leftCols(k), s.head(k).asDiagonal().toDenseMatrix(), svd.v.leftCols(k));
}

}  // namespace

LowRankFactor compress_block(const Mat& b, double tol) {
  require(tol > 0.0, "compress_block: tol must be positive");
  const Index m = b.rows(), n = b.cols();
  if (m == 0 || n == 0 || b.isZero(0.0)) return LowRankFactor::zero(m, n);
  const Index mn = std::min(m, n);
  if (mn <= 128) return truncated_svd(b, tol);

  std::mt19937_64 gen(0x9e3779b97f4a7c15ULL ^ static_cast<uint64_t>(m * 131 + n));
  std::normal_distribution<double> nd;
  for (Index k = 32; 2 * k < mn; k *= 2) {
    Mat omega(n, k);
    for (Index j = 0; j < k; ++j)
      for (Index i = 0; i < n; ++i) omega(i, j) = nd(gen);
    Mat q = thin_qr(b * omega).q;
    Mat w = q.transpose() * b;
    ThinSvd svd = svd_thin(w);
    const Vec& s = svd.s;
    if (s(0) == 0.0) continue;
    const double rest = (b - q * w).norm();
    if (rest > 1e-2 * tol * s(0)) continue;
    Index r = 0;
    while (r < s.size() && s(r) > tol * s(0)) ++r;
    if (r == k) continue;  // truncation hit the sample size, widen the sketch
    return LowRankFactor(q * svd.u.leftCols(r), s.head(r).asDiagonal().toDenseMatrix(), svd.v.leftCols(r));
  }
  return truncated_svd(b, tol);
}

}  // namespace qscare
