#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qscare/care_dense.hpp"
#include "qscare/eksm.hpp"
#include "qscare/error.hpp"
#include "test_util.hpp"

using namespace qscare;
using namespace testutil;

namespace {

// A^T X + X A - X F X - U D U^T
Mat correction_residual(const Mat& a, const Mat& f, const Mat& u, const Mat& d, const Mat& x) {
  return a.transpose() * x + x * a - x * f * x - u * d * u.transpose();
}

struct Instance {
  Mat acl, f, u, d;
};

// D <= 0 keeps -U D U^T semidefinite so a stabilizing solution exists; an
// indefinite D gets a small weight, enough for the Hamiltonian to stay split
Instance make_instance(Index n, Index t, std::uint64_t seed, bool indefinite = false) {
  std::mt19937_64 g(seed);
  Instance in;
  in.acl = rand_stable(n, g, 1.0);
  in.f = rand_psd_lowrank(n, 3, g) / static_cast<double>(n);
  in.u = randn(n, t, g);
  Mat c = randn(t, t, g);
  in.d = indefinite ? Mat(0.05 * (c + c.transpose())) : Mat(-c * c.transpose());
  return in;
}

}  // namespace

TEST_CASE("minus identity with F = 0 solves in one step") {
  const Index n = 40;
  std::mt19937_64 g(1);
  Mat u = randn(n, 1, g);
  Mat d = Mat::Constant(1, 1, 2.5);
  EksmResult r = eksm_care(EksmOperators::dense(-Mat::Identity(n, n), Mat::Zero(n, n)), u, d);
  CHECK(r.steps == 1);
  Mat want = -0.5 * u * d * u.transpose();
  CHECK(rel(r.dx.to_dense(), want) < 1e-13);
  CHECK(r.residual <= 1e-14);
  CHECK(r.dx.symmetric);
}

TEST_CASE("zero D gives zero correction at s = 1") {
  const Index n = 30;
  std::mt19937_64 g(2);
  Mat a = rand_stable(n, g);
  EksmResult r = eksm_care(EksmOperators::dense(a, Mat::Identity(n, n)), randn(n, 2, g), Mat::Zero(2, 2));
  CHECK(r.steps == 1);
  CHECK(r.dx.rank() == 0);
  CHECK(r.dx.to_dense().norm() == 0.0);
}

TEST_CASE("empty basis residual is the norm of the right-hand side") {
  const Index n = 25;
  std::mt19937_64 g(3);
  EksmState st;
  st.u = randn(n, 3, g);
  Mat c = randn(3, 3, g);
  st.d = c + c.transpose();
  st.v = Mat(n, 0);
  CHECK(std::abs(eksm_residual(st) - (st.u * st.d * st.u.transpose()).norm()) <=
        1e-12 * (st.u * st.d * st.u.transpose()).norm());
}

TEST_CASE("low-rank residual formula equals the dense residual") {
  for (std::uint64_t seed = 10; seed < 16; ++seed) {
    const Index n = 60;
    Instance in = make_instance(n, 2, seed);
    std::mt19937_64 g(seed + 100);
    EksmState st;
    st.v = orth(randn(n, 9, g));
    st.atv = in.acl.transpose() * st.v;
    st.fv = in.f * st.v;
    st.u = in.u;
    st.d = in.d;
    st.y = rand_sym(st.v.cols(), g);
    Mat x = st.v * st.y * st.v.transpose();
    const double dense = correction_residual(in.acl, in.f, in.u, in.d, x).norm();
    CHECK(std::abs(eksm_residual(st) - dense) <= 1e-12 * dense);
  }
}

TEST_CASE("n = 100 correction equation matches dense_care") {
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    const Index n = 100;
    Instance in = make_instance(n, 2, seed, seed % 2 == 1);
    EksmOptions opts;
    opts.tol = 1e-12;
    EksmResult r = eksm_care(EksmOperators::dense(in.acl, in.f), in.u, in.d, opts);
    // the same equation as a CARE with Q = -U D U^T; the stabilizing solution
    // of the projected problems converges to the one of the full problem
    DenseCareOptions o;
    o.check_inputs = false;
    Mat q = -in.u * in.d * in.u.transpose();
    SolveReport rep;
    Mat ref = dense_care(in.acl, in.f, symmetrize(q), &rep, o);
    REQUIRE(rep.final_residual < 1e-12);
    REQUIRE(rep.closed_loop_stable.value_or(false));
    CHECK(rel(r.dx.to_dense(), ref) < 1e-7);
    const Mat res = correction_residual(in.acl, in.f, in.u, in.d, r.dx.to_dense());
    CHECK(res.norm() / (in.u * in.d * in.u.transpose()).norm() <= 1e-12 * 1.001);
    CHECK(r.dx.rank() <= 2 * r.steps * in.u.cols());
  }
}

TEST_CASE("default tolerance is met and reported") {
  Instance in = make_instance(150, 3, 31);
  EksmResult r = eksm_care(EksmOperators::dense(in.acl, in.f), in.u, in.d);
  const Mat res = correction_residual(in.acl, in.f, in.u, in.d, r.dx.to_dense());
  const double relres = res.norm() / (in.u * in.d * in.u.transpose()).norm();
  CHECK(relres <= 1e-8);
  CHECK(std::abs(relres - r.residual) <= 1e-10);
  CHECK(r.report.residuals.size() == static_cast<size_t>(r.steps));
}

TEST_CASE("basis is orthonormal and the Galerkin condition holds at every s") {
  Instance in = make_instance(120, 2, 41);
  for (Index s = 1; s <= 6; ++s) {
    EksmOptions opts;
    opts.tol = 1e-300;
    opts.s_max = s;
    opts.throw_on_s_max = false;
    EksmResult r = eksm_care(EksmOperators::dense(in.acl, in.f), in.u, in.d, opts);
    CHECK(r.steps == s);
    const Mat& v = r.dx.u;
    const Index k = v.cols();
    CHECK((v.transpose() * v - Mat::Identity(k, k)).norm() <= 1e-10);
    Mat proj = v.transpose() * correction_residual(in.acl, in.f, in.u, in.d, r.dx.to_dense()) * v;
    CHECK(proj.norm() <= 1e-10 * (in.u * in.d * in.u.transpose()).norm());
  }
}

TEST_CASE("hierarchical operators give the same correction") {
  Instance in = make_instance(300, 2, 51);
  HMatrix ah = HMatrix::from_dense(in.acl, 1e-14, 64);
  HMatrix fh = HMatrix::from_dense(in.f, 1e-14, 64);
  EksmOptions opts;
  opts.tol = 1e-10;
  EksmResult rh = eksm_care(EksmOperators::hierarchical(ah, fh), in.u, in.d, opts);
  EksmResult rd = eksm_care(EksmOperators::dense(in.acl, in.f), in.u, in.d, opts);
  CHECK(rel(rh.dx.to_dense(), rd.dx.to_dense()) < 1e-8);
}

TEST_CASE("s_max without convergence throws") {
  Instance in = make_instance(80, 2, 61);
  EksmOptions opts;
  opts.tol = 1e-300;
  opts.s_max = 2;
  CHECK_THROWS_AS(eksm_care(EksmOperators::dense(in.acl, in.f), in.u, in.d, opts), ConvergenceError);
}

TEST_CASE("bad input shapes are rejected") {
  Instance in = make_instance(20, 2, 71);
  CHECK_THROWS_AS(eksm_care(EksmOperators::dense(in.acl, in.f), in.u, Mat::Identity(3, 3)), InputError);
  Mat d = in.d;
  d(0, 1) += 1.0;
  CHECK_THROWS_AS(eksm_care(EksmOperators::dense(in.acl, in.f), in.u, d), InputError);
}
