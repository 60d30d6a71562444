#include "qscare/generators.hpp"

#include "qscare/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace qscare {

Vec logspace(double a, double b, Index n) {
  require(n >= 1, "logspace: n must be positive");
  Vec v(n);
  for (Index i = 0; i < n; ++i) {
    const double t = n == 1 ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    v(i) = std::pow(10.0, t);
  }
  return v;
}

Vec linspace(double a, double b, Index n) {
  require(n >= 1, "linspace: n must be positive");
  if (n == 1) return Vec::Constant(1, b);
  return Vec::LinSpaced(n, a, b);
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(k)};
  return std::mt19937_64(seq);
}

namespace {

// Householder QR that only touches the r+1 rows below each diagonal entry;
// returns Q with the signs chosen so that R has a nonnegative diagonal.
Mat hessenberg_q(Mat h, Index r) {
  const Index n = h.rows();
  std::vector<Vec> refl(static_cast<size_t>(n));
  for (Index j = 0; j + 1 < n; ++j) {
    const Index len = std::min(r + 1, n - j);
    if (len < 2) continue;
    Vec x = h.block(j, j, len, 1);
    const double alpha = x.norm();
    if (alpha == 0.0) continue;
    Vec v = x;
    v(0) += (x(0) >= 0.0 ? alpha : -alpha);
    const double vv = v.squaredNorm();
    if (vv == 0.0) continue;
    v /= std::sqrt(vv);
    auto blk = h.block(j, j, len, n - j);
    blk -= 2.0 * v * (v.transpose() * blk);
    refl[static_cast<size_t>(j)] = std::move(v);
  }
  Vec sgn(n);
  for (Index j = 0; j < n; ++j) sgn(j) = h(j, j) < 0.0 ? -1.0 : 1.0;
  Mat q = Mat::Identity(n, n);
  for (Index j = n - 2; j >= 0; --j) {
    const Vec& v = refl[static_cast<size_t>(j)];
    if (v.size() == 0) continue;
    auto blk = q.block(j, j, v.size(), n - j);
    blk -= 2.0 * v * (v.transpose() * blk);
  }
  return q * sgn.asDiagonal();
}

}  // namespace

Mat random_unitary_hessenberg(Index n, std::mt19937_64& rng) {
  require(n >= 1, "random_unitary_hessenberg: n must be positive");
  // Hessenberg form of a Gaussian matrix: N(0,1) on and above the diagonal,
  // chi with n-k degrees of freedom in subdiagonal position k
  std::normal_distribution<double> nd;
  Mat h = Mat::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) h(i, j) = nd(rng);
    if (j + 1 < n) {
      std::chi_squared_distribution<double> chi(static_cast<double>(n - j - 1));
      h(j + 1, j) = std::sqrt(chi(rng));
    }
  }
  return hessenberg_q(std::move(h), 1);
}

Mat random_unitary_banded_hessenberg(Index n, Index r, std::mt19937_64& rng) {
  require(n >= 1 && r >= 0, "random_unitary_banded_hessenberg: bad arguments");
  r = std::min(r, n - 1);
  std::normal_distribution<double> nd;
  Mat h = Mat::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= std::min(n - 1, j + r); ++i) h(i, j) = nd(rng);
  return hessenberg_q(std::move(h), r);
}

namespace {

Mat conj_diag(const Mat& w, const Vec& d) { return symmetrize(Mat(w * d.asDiagonal() * w.transpose())); }

}  // namespace

DenseCare dac_test_instance(int test, Index n, Index r, std::uint64_t seed) {
  require(test >= 1 && test <= 5, "dac_test_instance: test id must be 1..5");
  require(n >= 2, "dac_test_instance: n must be at least 2");
  auto g_a = make_rng(seed, static_cast<std::uint64_t>(test), 0);
  auto g_f = make_rng(seed, static_cast<std::uint64_t>(test), 1);
  auto g_q = make_rng(seed, static_cast<std::uint64_t>(test), 2);
  DenseCare p;
  require(test != 5 || r >= 1, "dac_test_instance: test 5 needs r >= 1");
  Mat w = test == 5 ? random_unitary_banded_hessenberg(n, r, g_a) : random_unitary_hessenberg(n, g_a);
  const double dn = static_cast<double>(n);
  switch (test) {
    case 1:
    case 5:
      p.a = conj_diag(w, -logspace(-3.0, 0.0, n));
      break;
    case 2:
      p.a = w - 2.0 * Mat::Identity(n, n);
      break;
    case 3:
      p.a = conj_diag(w, -logspace(-2.0 * std::log10(dn), 0.0, n));
      break;
    case 4:
      p.a = w - (1.0 + 1.0 / std::log(dn)) * Mat::Identity(n, n);
      break;
  }
  p.f = conj_diag(random_unitary_hessenberg(n, g_f), logspace(-2.0, 2.0, n));
  p.q = conj_diag(random_unitary_hessenberg(n, g_q), linspace(0.0, 1.0, n));
  return p;
}

BandedMatrix decay_q(Index n) {
  require(n >= 1, "decay_q: n must be positive");
  // T T^T = tridiag(1, 2, 1) with a 1 in the top-left corner
  BandedMatrix q = BandedMatrix::tridiag(n, 1.0, 2.0, 1.0);
  q.at(0, 0) = 1.0;
  Vec diag(n), off(std::max<Index>(n - 1, 0));
  for (Index i = 0; i < n; ++i) diag(i) = q(i, i);
  for (Index i = 0; i + 1 < n; ++i) off(i) = 1.0;
  Eigen::SelfAdjointEigenSolver<Mat> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  const double nrm = es.eigenvalues().cwiseAbs().maxCoeff();
  q = (1.0 / nrm) * q;
  return q.symmetrized();
}

DenseCare decay_instance_real(Index n) {
  DenseCare p;
  p.a = Mat(Vec(-logspace(-3.0, 0.0, n)).asDiagonal());
  p.f = Mat::Identity(n, n);
  p.q = decay_q(n).to_dense();
  return p;
}

DenseCare decay_instance_kappa(Index n, double kappa, bool circle, std::uint64_t seed) {
  require(kappa >= 1.0, "decay_instance_kappa: kappa must be >= 1");
  auto g = make_rng(seed, 28, 0);
  Mat w = random_unitary_hessenberg(n, g);
  DenseCare p;
  p.a = circle ? Mat(w - 1.1 * Mat::Identity(n, n)) : conj_diag(w, -logspace(-3.0, 0.0, n));
  const double h = 0.5 * std::log10(kappa);
  p.f = Mat(logspace(-h, h, n).asDiagonal());
  p.q = decay_q(n).to_dense();
  return p;
}

BandedMatrix laplacian_a0(Index n) { return BandedMatrix::tridiag(n, 1.0, -2.0, 1.0).symmetrized(); }

BandedCare linesearch_instance(Index n) {
  BandedCare p;
  p.a = laplacian_a0(n);
  p.q = BandedMatrix::tridiag(n, 0.48, 1.0, 0.48).symmetrized();
  BandedMatrix l = BandedMatrix::tridiag(n, 0.0, 1.0, 0.1);
  p.f = (l * l.transpose()).compact().symmetrized();
  return p;
}

BandedCare comparison_instance(Index n, double kappa) {
  require(kappa >= 1.0, "comparison_instance: kappa must be >= 1");
  BandedCare p;
  p.a = laplacian_a0(n);
  p.q = BandedMatrix::tridiag(n, 0.1, 1.0, 0.1).symmetrized();
  const double h = 0.5 * std::log10(kappa);
  Vec d = logspace(-h, h, n);
  BandedMatrix f(n, 0, 0);
  for (Index i = 0; i < n; ++i) f.at(i, i) = d(i);
  p.f = f.symmetrized();
  return p;
}

BandedCare random_banded_instance(Index n, std::uint64_t seed) {
  require(n >= 1, "random_banded_instance: n must be positive");
  auto g = make_rng(seed, 0x62616e64, 0);
  std::normal_distribution<double> nd;
  BandedCare p;
  p.a = BandedMatrix(n, 2, 2);
  for (Index i = 0; i < n; ++i)
    for (Index j = std::max<Index>(0, i - 2); j <= std::min(n - 1, i + 2); ++j)
      p.a.at(i, j) = i == j ? -1.0 + 0.5 * nd(g) : 0.3 * nd(g);
  BandedMatrix l(n, 1, 0), m(n, 0, 1);
  for (Index i = 0; i < n; ++i) {
    l.at(i, i) = 1.0 + 0.5 * std::abs(nd(g));
    if (i > 0) l.at(i, i - 1) = 0.3 * nd(g);
    m.at(i, i) = 0.7 * nd(g);
    if (i + 1 < n) m.at(i, i + 1) = 0.3 * nd(g);
  }
  p.f = (l * l.transpose()).symmetrized().compact();
  p.q = (m * m.transpose() + BandedMatrix::identity(n, 0.5)).symmetrized().compact();
  return p;
}

}  // namespace qscare
