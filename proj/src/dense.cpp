#include "qscare/dense.hpp"

#include "qscare/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <vector>

namespace qscare {

double asymmetry(const Mat& m) {
  if (m.rows() != m.cols()) return 1.0;
  const double nrm = m.norm();
  if (nrm == 0.0) return 0.0;
  return (m - m.transpose()).norm() / nrm;
}

bool all_finite(const Mat& m) { return m.allFinite(); }

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

SymEig sym_eig(const Mat& m) {
  require(m.rows() == m.cols(), "sym_eig: matrix must be square");
  require(all_finite(m), "sym_eig: non-finite entries");
  require(asymmetry(m) <= 1e-10, "sym_eig: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success) throw ConvergenceError("sym_eig: eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

Mat sqrtm_spd(const Mat& m) {
  if (m.size() == 0) return m;
  SymEig e = sym_eig(symmetrize(m));
  const double scale = e.values.cwiseAbs().maxCoeff();
  Vec s(e.values.size());
  for (Index i = 0; i < s.size(); ++i) {
    double v = e.values(i);
    if (v < 0.0) {
      if (v < -1e-12 * scale) throw InputError("sqrtm_spd: matrix is indefinite beyond tolerance");
      v = 0.0;
    }
    s(i) = std::sqrt(v);
  }
  Mat r = e.vectors * s.asDiagonal() * e.vectors.transpose();
  return symmetrize(r);
}

double norm2(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m)(0);
}

ThinSvd svd_thin(const Mat& m) {
  ThinSvd out;
  {
    Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.s = svd.singularValues();
    out.u = svd.matrixU();
    out.v = svd.matrixV();
  }
  if (out.s.allFinite() && out.u.allFinite() && out.v.allFinite()) return out;
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.s = svd.singularValues();
  out.u = svd.matrixU();
  out.v = svd.matrixV();
  return out;
}

Vec singular_values(const Mat& m) {
  if (m.size() == 0) return Vec(0);
  Vec s = Eigen::BDCSVD<Mat>(m).singularValues();
  if (s.allFinite()) return s;
  return Eigen::JacobiSVD<Mat>(m).singularValues();
}

namespace {

// Solves T_ii^T Z + Z T_jj = R for blocks of order p,q <= 2.
Mat small_sylvester(const Mat& tii, const Mat& tjj, const Mat& r) {
  const Index p = tii.rows(), q = tjj.rows();
  Mat k = Mat::Zero(p * q, p * q);
  // column-major vec: vec(T^T Z) = (I_q kron T^T) vec Z, vec(Z S) = (S^T kron I_p) vec Z
  for (Index b = 0; b < q; ++b)
    for (Index i = 0; i < p; ++i)
      for (Index ii = 0; ii < p; ++ii) k(b * p + i, b * p + ii) += tii(ii, i);
  for (Index b = 0; b < q; ++b)
    for (Index bb = 0; bb < q; ++bb)
      for (Index i = 0; i < p; ++i) k(b * p + i, bb * p + i) += tjj(bb, b);
  Vec rhs = Eigen::Map<const Vec>(r.data(), p * q);
  Vec z = k.fullPivLu().solve(rhs);
  return Eigen::Map<Mat>(z.data(), p, q);
}

}  // namespace

Mat solve_lyapunov(const Mat& a, const Mat& c) {
  const Index n = a.rows();
  require(a.cols() == n && c.rows() == n && c.cols() == n, "solve_lyapunov: shape mismatch");
  if (n == 0) return Mat(0, 0);
  Eigen::RealSchur<Mat> schur(a);
  if (schur.info() != Eigen::Success) throw ConvergenceError("solve_lyapunov: Schur decomposition failed");
  const Mat& t = schur.matrixT();
  const Mat& u = schur.matrixU();

  std::vector<Index> start;
  for (Index k = 0; k < n;) {
    start.push_back(k);
    k += (k + 1 < n && t(k + 1, k) != 0.0) ? 2 : 1;
  }
  start.push_back(n);
  const Index nb = static_cast<Index>(start.size()) - 1;

  Mat ct = u.transpose() * c * u;
  Mat y = Mat::Zero(n, n);
  for (Index jb = 0; jb < nb; ++jb) {
    const Index j0 = start[jb], q = start[jb + 1] - j0;
    Mat rhs = ct.middleCols(j0, q);
    if (j0 > 0) rhs.noalias() -= y.leftCols(j0) * t.block(0, j0, j0, q);
    const Mat tjj = t.block(j0, j0, q, q);
    for (Index ib = 0; ib < nb; ++ib) {
      const Index i0 = start[ib], p = start[ib + 1] - i0;
      Mat r = rhs.middleRows(i0, p);
      if (i0 > 0) r.noalias() -= t.block(0, i0, i0, p).transpose() * y.block(0, j0, i0, q);
      y.block(i0, j0, p, q) = small_sylvester(t.block(i0, i0, p, p), tjj, r);
    }
  }
  return u * y * u.transpose();
}

Mat orth(const Mat& m, double rel_tol) {
  if (m.cols() == 0 || m.rows() == 0) return Mat(m.rows(), 0);
  Eigen::ColPivHouseholderQR<Mat> qr(m);
  const Mat& r = qr.matrixR();
  const Index kmax = std::min(m.rows(), m.cols());
  double ref = 0.0;
  for (Index j = 0; j < m.cols(); ++j) ref = std::max(ref, m.col(j).norm());
  Index rank = 0;
  while (rank < kmax && std::abs(r(rank, rank)) > rel_tol * ref) ++rank;
  if (rank == 0) return Mat(m.rows(), 0);
  Mat q = qr.householderQ() * Mat::Identity(m.rows(), rank);
  return q;
}

double spectral_abscissa(const Mat& m) {
  require(m.rows() == m.cols(), "spectral_abscissa: matrix must be square");
  if (m.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Mat> es(m, false);
  if (es.info() != Eigen::Success) throw ConvergenceError("spectral_abscissa: eigensolver failed");
  return es.eigenvalues().real().maxCoeff();
}

}  // namespace qscare
