#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qscare/kernels.hpp"
#include "test_util.hpp"

using namespace qscare;
using namespace testutil;

TEST_CASE("parallel banded product equals the serial reference bitwise") {
  std::mt19937_64 g(31);
  for (Index n : {1, 7, 300}) {
    BandedMatrix a = BandedMatrix::from_dense(randn(n, n, g), 3, 5);
    BandedMatrix b = BandedMatrix::from_dense(randn(n, n, g), 4, 2);
    BandedMatrix s = kernels::band_multiply_serial(a, b);
    BandedMatrix p = kernels::band_multiply_parallel(a, b);
    CHECK(s.data() == p.data());
    CHECK((s.to_dense() - a.to_dense() * b.to_dense()).norm() <= 1e-12 * std::max(1.0, s.frobenius()));
  }
}

TEST_CASE("parallel banded apply equals the serial reference bitwise") {
  std::mt19937_64 g(32);
  BandedMatrix a = BandedMatrix::from_dense(randn(500, 500, g), 6, 6);
  Mat x = randn(500, 10, g);
  Mat s = kernels::band_apply_serial(a, x), p = kernels::band_apply_parallel(a, x);
  CHECK((s - p).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("offdiagonal singular value sweep") {
  std::mt19937_64 g(33);
  Mat x = randn(100, 100, g);
  Vec s = kernels::offdiag_sv_serial(x, 10), p = kernels::offdiag_sv_parallel(x, 10);
  CHECK((s - p).cwiseAbs().maxCoeff() == 0.0);
  // independent brute force: JacobiSVD per block
  Vec brute = Vec::Zero(10);
  for (Index j = 1; j < 100; ++j) {
    Eigen::JacobiSVD<Mat> svd(x.block(j, 0, 100 - j, j));
    for (Index l = 0; l < std::min<Index>(10, svd.singularValues().size()); ++l)
      brute(l) = std::max(brute(l), svd.singularValues()(l));
  }
  CHECK((s - brute).cwiseAbs().maxCoeff() <= 1e-12 * brute(0));
}
