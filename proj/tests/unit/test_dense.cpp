#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qscare/care_dense.hpp"
#include "qscare/error.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace qscare;
using namespace testutil;

TEST_CASE("sym_eig basics") {
  SymEig e = sym_eig(Mat::Identity(3, 3));
  CHECK(e.values.isApprox(Vec::Ones(3)));
  CHECK((e.vectors.transpose() * e.vectors - Mat::Identity(3, 3)).norm() < 1e-14);

  Mat d = Eigen::Vector2d(-2.0, 5.0).asDiagonal();
  e = sym_eig(d);
  CHECK(e.values(0) == doctest::Approx(-2.0));
  CHECK(e.values(1) == doctest::Approx(5.0));

  std::mt19937_64 g(1);
  Mat m = rand_sym(20, g);
  e = sym_eig(m);
  CHECK((m * e.vectors - e.vectors * e.values.asDiagonal()).norm() <= 1e-12 * m.norm());
  for (Index i = 1; i < 20; ++i) CHECK(e.values(i) >= e.values(i - 1));

  Mat ns = randn(4, 4, g);
  CHECK_THROWS_AS(sym_eig(ns), InputError);
}

TEST_CASE("sqrtm_spd") {
  CHECK(sqrtm_spd(Mat::Identity(4, 4)).isApprox(Mat::Identity(4, 4)));
  Mat d = Eigen::Vector2d(4.0, 9.0).asDiagonal();
  Mat s = sqrtm_spd(d);
  CHECK(s(0, 0) == doctest::Approx(2.0));
  CHECK(s(1, 1) == doctest::Approx(3.0));
  CHECK(std::abs(s(0, 1)) < 1e-15);

  std::mt19937_64 g(2);
  Mat m = rand_spd(50, g);
  s = sqrtm_spd(m);
  CHECK((s * s - m).norm() <= 1e-10 * m.norm());
  CHECK(asymmetry(s) == 0.0);

  Mat indef = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  CHECK_THROWS_AS(sqrtm_spd(indef), InputError);
  // tiny negative eigenvalue is clamped
  Mat near = Eigen::Vector2d(1.0, -1e-14).asDiagonal();
  CHECK(sqrtm_spd(near)(1, 1) == 0.0);
}

TEST_CASE("dense lyapunov against kronecker oracle") {
  std::mt19937_64 g(3);
  for (Index n : {1, 2, 5, 12}) {
    Mat a = rand_stable(n, g);
    Mat c = rand_sym(n, g);
    Mat x = solve_lyapunov(a, c);
    Mat xk = kron_lyapunov(a, c);
    CHECK(rel(x, xk) < 1e-11);
  }
}

TEST_CASE("dense_care scalar examples") {
  Mat a(1, 1), f(1, 1), q(1, 1);
  a << -1;
  f << 1;
  q << 1;
  SolveReport rep;
  Mat x = dense_care(a, f, q, &rep);
  CHECK(x(0, 0) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-14));
  REQUIRE(rep.closed_loop_stable.has_value());
  CHECK(*rep.closed_loop_stable);
  CHECK((a - f * x)(0, 0) == doctest::Approx(-std::sqrt(2.0)));

  f << 0;
  q << 2;
  x = dense_care(a, f, q);
  CHECK(x(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("dense_care matches the closed form for symmetric stable A") {
  std::mt19937_64 g(4);
  Mat a = -rand_spd(50, g);
  Mat q = rand_spd(50, g, 0.1);
  Mat x = dense_care(a, Mat::Identity(50, 50), q);
  Mat xc = care_closed_form_sym(a, q, 1.0);
  CHECK(rel(x, xc) <= 1e-9);
}

TEST_CASE("dense_care residual contract on random stabilizable instances") {
  std::mt19937_64 g(5);
  for (int trial = 0; trial < 25; ++trial) {
    std::uniform_int_distribution<Index> dn(1, 60);
    const Index n = dn(g);
    Mat a = randn(n, n, g) / std::sqrt(static_cast<double>(n));  // possibly unstable
    Mat b = randn(n, std::max<Index>(1, n / 3), g);
    Mat f = b * b.transpose() + 1e-3 * Mat::Identity(n, n);
    Mat q = rand_spd(n, g, 0.1);
    SolveReport rep;
    Mat x = dense_care(a, f, q, &rep);
    CHECK(riccati_residual(a, f, q, x).relative <= 1e-11);
    CHECK(asymmetry(x) <= 1e-12);
    CHECK(rep.closed_loop_stable.value_or(false));
  }
}

TEST_CASE("care_closed_form_sym") {
  Mat a(1, 1), q(1, 1);
  a << -2;
  q << 0;
  CHECK(care_closed_form_sym(a, q, 1.0)(0, 0) == doctest::Approx(0.0));
  a << -1;
  q << 3;
  Mat x = care_closed_form_sym(a, q, 1.0);
  CHECK(x(0, 0) == doctest::Approx(1.0));
  CHECK(riccati_residual(a, Mat::Identity(1, 1), q, x).relative < 1e-15);

  std::mt19937_64 g(6);
  Mat as = -rand_spd(100, g, 0.5);
  Mat qs = rand_spd(100, g);
  x = care_closed_form_sym(as, qs, 0.1);
  CHECK(riccati_residual(as, Mat::Identity(100, 100) / 0.1, qs, x).relative <= 1e-10);
  CHECK_THROWS_AS(care_closed_form_sym(randn(3, 3, g), Mat::Identity(3, 3), 1.0), InputError);
}

TEST_CASE("riccati_residual") {
  Mat a(1, 1), f(1, 1), q(1, 1);
  a << -1;
  f << 1;
  q << 1;
  Mat x = Mat::Constant(1, 1, std::sqrt(2.0) - 1.0);
  CHECK(std::abs(riccati_residual(a, f, q, x).relative) < 1e-15);
  CHECK(riccati_residual(a, f, q, Mat::Zero(1, 1)).relative == 1.0);

  // brute-force evaluation of the same expression
  std::mt19937_64 g(7);
  Mat a5 = randn(5, 5, g), f5 = rand_spd(5, g), q5 = rand_spd(5, g), x5 = rand_sym(5, g);
  Mat r = riccati_residual(a5, f5, q5, x5).r;
  Mat brute(5, 5);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j) {
      double s = q5(i, j);
      for (Index k = 0; k < 5; ++k) s += a5(k, i) * x5(k, j) + x5(i, k) * a5(k, j);
      for (Index k = 0; k < 5; ++k)
        for (Index l = 0; l < 5; ++l) s -= x5(i, k) * f5(k, l) * x5(l, j);
      brute(i, j) = s;
    }
  CHECK((r - brute).norm() < 1e-12 * brute.norm());
}

TEST_CASE("sol_norm_bound") {
  CHECK(sol_norm_bound(1, 1, 1, 1) == doctest::Approx(1.0 + std::sqrt(2.0)));
  CHECK(sol_norm_bound(3, 2, 0, 0.5) == doctest::Approx(12.0));
  CHECK_THROWS_AS(sol_norm_bound(1, 1, 1, 0), InputError);

  std::mt19937_64 g(8);
  for (int t = 0; t < 100; ++t) {
    const Index n = 50;
    Mat a = rand_stable(n, g, 0.2);
    Mat f = rand_spd(n, g, 0.5);
    Mat q = rand_spd(n, g);
    Mat x = dense_care(a, f, q, nullptr, {.check_stability = false});
    // tau: max |x| over the real part of the numerical range = spectrum of sym(A)
    SymEig h = sym_eig(symmetrize(a));
    const double tau = std::max(std::abs(h.values(0)), std::abs(h.values(n - 1)));
    SymEig ef = sym_eig(f);
    const double bound = sol_norm_bound(tau, ef.values(n - 1), norm2(q), ef.values(0));
    CHECK(bound >= norm2(x));
  }
}
