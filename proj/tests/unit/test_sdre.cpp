#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qscare/analysis.hpp"
#include "qscare/care_dense.hpp"
#include "qscare/error.hpp"
#include "qscare/models.hpp"
#include "qscare/sdre.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numbers>
#include <set>

using namespace qscare;
using namespace testutil;

namespace {

SdreModel scalar_lqr() {
  return linear_model(Mat::Ones(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1));
}

double sup_diff(const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff(); }

Vec random_state(Index n, double scale, std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec y(n);
  for (Index i = 0; i < n; ++i) y(i) = u(g);
  return y;
}

}  // namespace

TEST_CASE("solver names") {
  for (SdreSolver s : {SdreSolver::none, SdreSolver::tink, SdreSolver::dac, SdreSolver::dense, SdreSolver::closed_form})
    CHECK(sdre_solver_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(sdre_solver_from_string("newton"), InputError);
}

TEST_CASE("feedback of a linear model") {
  SdreModel m = scalar_lqr();
  FeedbackContext ctx;
  ctx.solver = SdreSolver::dense;
  const Vec y = Vec::Constant(1, 2.0);
  CHECK(sdre_feedback(m, y, ctx)(0) == doctest::Approx(-2.0 * (1.0 + std::sqrt(2.0))).epsilon(1e-12));
  CHECK(sdre_feedback(m, Vec::Zero(1), ctx)(0) == 0.0);
  ctx.solver = SdreSolver::none;
  CHECK(sdre_feedback(m, y, ctx)(0) == 0.0);
  // no closed form registered
  ctx.solver = SdreSolver::closed_form;
  CHECK_THROWS_AS(sdre_feedback(m, y, ctx), InputError);
  ctx.solver = SdreSolver::tink;
  CHECK_THROWS_AS(sdre_feedback(m, y, ctx), InputError);
  CHECK_THROWS_AS(sdre_feedback(m, Vec::Zero(2), ctx), InputError);

  // X = I, R = I, B = I gives u = -y
  const Index n = 4;
  SdreModel id = linear_model(Mat::Zero(n, n), Mat::Identity(n, n), Mat::Identity(n, n), Mat::Identity(n, n));
  ctx.solver = SdreSolver::dense;
  std::mt19937_64 g(3);
  const Vec v = randn(n, 1, g);
  CHECK(sup_diff(sdre_feedback(id, v, ctx), -v) < 1e-12);
}

TEST_CASE("solver failures carry the state") {
  // unstabilizable: B = 0 with unstable A
  SdreModel m = linear_model(Mat::Ones(1, 1), Mat::Zero(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1));
  FeedbackContext ctx;
  ctx.solver = SdreSolver::dense;
  const Vec y = Vec::Constant(1, 0.5);
  bool caught = false;
  try {
    sdre_feedback(m, y, ctx);
  } catch (const SdreError& e) {
    caught = true;
    CHECK(e.state(0) == 0.5);
  } catch (const ConvergenceError&) {
  }
  CHECK(caught);
}

TEST_CASE("scalar LQR closed loop") {
  SdreModel m = scalar_lqr();
  FeedbackContext ctx;
  ctx.solver = SdreSolver::dense;
  IntegratorOptions o;
  o.kind = Integrator::rk45;
  o.dt = 0.05;
  Trajectory tr = integrate_closed_loop(m, Vec::Ones(1), 5.0, o, ctx);
  REQUIRE(tr.t.size() > 2);
  CHECK(tr.t.back() == doctest::Approx(5.0).epsilon(1e-12));
  // y(t) = exp(-sqrt2 t), X = 1 + sqrt2
  for (size_t i = 0; i < tr.t.size(); ++i) {
    const double want = std::exp(-std::sqrt(2.0) * tr.t[i]);
    CHECK(std::abs(tr.states[i](0) - want) <= 1e-7);
    CHECK(tr.controls[i](0) == doctest::Approx(-(1.0 + std::sqrt(2.0)) * tr.states[i](0)).epsilon(1e-10));
  }
  // infinite-horizon cost y0 X y0 minus the tail beyond T; trapezoidal
  // quadrature on the adaptive grid is only second order
  const double x = 1.0 + std::sqrt(2.0);
  CHECK(tr.total_cost() == doctest::Approx(x * (1.0 - std::exp(-2.0 * std::sqrt(2.0) * 5.0))).epsilon(1e-2));
  for (size_t i = 1; i < tr.cost.size(); ++i) CHECK(tr.cost[i] >= tr.cost[i - 1]);

  o.kind = Integrator::imex;
  CHECK_THROWS_AS(integrate_closed_loop(m, Vec::Ones(1), 1.0, o, ctx), InputError);
  o.kind = Integrator::rk45;
  CHECK_THROWS_AS(integrate_closed_loop(m, Vec::Ones(1), 0.0, o, ctx), InputError);
  CHECK_THROWS_AS(integrate_closed_loop(m, Vec::Ones(2), 1.0, o, ctx), InputError);
}

TEST_CASE("Allen-Cahn model") {
  AllenCahnParams p;
  p.n = 40;
  SdreModel m = allen_cahn_model(p);
  const double dx = allen_cahn_dx(p);
  CHECK(dx == doctest::Approx(2.0 / 39.0));
  const double gamma = p.gamma_tilde * dx;

  BandedCare c0 = m.care_banded(Vec::Zero(p.n));
  const Mat a0 = c0.a.to_dense();
  CHECK((a0 - a0.transpose()).norm() == 0.0);
  CHECK(c0.a.measured_bandwidth() == 1);
  const double s = p.sigma / (dx * dx);
  CHECK(a0(0, 0) == doctest::Approx(1.0 - s));
  CHECK(a0(5, 5) == doctest::Approx(1.0 - 2.0 * s));
  CHECK(a0(5, 6) == doctest::Approx(s));
  CHECK(a0.rowwise().sum().cwiseAbs().maxCoeff() == doctest::Approx(1.0));  // Laplacian rows sum to 0

  // y = 1 removes the reaction term
  const Mat a1 = m.care_banded(Vec::Ones(p.n)).a.to_dense();
  CHECK((a1 - p.sigma * neumann_laplacian(p.n, dx).to_dense()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((c0.f.to_dense() - Mat::Identity(p.n, p.n) / gamma).norm() < 1e-9);
  CHECK((c0.q.to_dense() - dx * Mat::Identity(p.n, p.n)).norm() == 0.0);

  const Vec y0 = allen_cahn_initial(p);
  for (Index i = 0; i < p.n; ++i) CHECK(y0(i) == doctest::Approx(std::sin(std::numbers::pi * (-1.0 + i * dx))));

  // the closed form solves the dense equation
  std::mt19937_64 g(5);
  const Vec y = random_state(p.n, 1.5, g);
  const DenseCare d = m.care(y);
  const Mat x = m.closed_form(y);
  CHECK(riccati_residual(d.a, d.f, d.q, x).relative < 1e-10);
  CHECK(rel(x, dense_care(d.a, d.f, d.q)) < 1e-9);

  // rhs splits into stiff + explicit
  const Vec u = random_state(p.n, 1.0, g);
  CHECK(sup_diff(m.rhs(y, u), m.stiff->matvec(y) + m.explicit_rhs(y, u)) < 1e-12);
  CHECK(m.running_cost(y, u) == doctest::Approx(dx * y.squaredNorm() + gamma * u.squaredNorm()));

  p.n = 2;
  CHECK_THROWS_AS(allen_cahn_model(p), InputError);
  p.n = 10;
  p.sigma = 0.0;
  CHECK_THROWS_AS(allen_cahn_model(p), InputError);
}

TEST_CASE("Allen-Cahn tink feedback matches the closed form") {
  std::mt19937_64 g(6);
  for (double half : {1.0, 27.0}) {
    AllenCahnParams p;
    p.n = 120;
    p.half_length = half;
    SdreModel m = allen_cahn_model(p);
    FeedbackContext cf, tk;
    cf.solver = SdreSolver::closed_form;
    tk.solver = SdreSolver::tink;
    tk.tink.inner = InnerSolver::cg;
    tk.tink.tol = 1e-10;
    for (int t = 0; t < 3; ++t) {
      const Vec y = t == 0 ? allen_cahn_initial(p) : random_state(p.n, 1.2, g);
      const Vec u0 = sdre_feedback(m, y, cf);
      const Vec u1 = sdre_feedback(m, y, tk);
      CHECK(sup_diff(u0, u1) <= 1e-6 * u0.cwiseAbs().maxCoeff());
      CHECK(tk.last.structure > 0.0);
      CHECK(tk.last.iterations > 0);
    }
  }
}

TEST_CASE("Allen-Cahn closed loop") {
  AllenCahnParams p;
  p.n = 60;
  p.half_length = 27.0;
  SdreModel m = allen_cahn_model(p);
  const Vec y0 = allen_cahn_initial(p);
  IntegratorOptions o;
  o.dt = 0.02;
  o.snapshot_stride = 1;

  FeedbackContext cf, tk, none;
  cf.solver = SdreSolver::closed_form;
  tk.solver = SdreSolver::tink;
  tk.tink.inner = InnerSolver::cg;
  tk.tink.tol = 1e-10;
  none.solver = SdreSolver::none;
  Trajectory a = integrate_closed_loop(m, y0, 10.0, o, cf);
  Trajectory b = integrate_closed_loop(m, y0, 10.0, o, tk);
  Trajectory c = integrate_closed_loop(m, y0, 10.0, o, none);
  REQUIRE(a.t.size() == 501);
  REQUIRE(a.states.size() == b.states.size());
  double d = 0.0;
  for (size_t i = 0; i < a.states.size(); ++i) d = std::max(d, sup_diff(a.states[i], b.states[i]));
  CHECK(d <= 1e-6);
  CHECK(a.total_cost() == doctest::Approx(b.total_cost()).epsilon(1e-7));
  const double sup0 = y0.cwiseAbs().maxCoeff();
  CHECK(a.state_sup.back() <= 1e-2 * sup0);
  CHECK(b.state_sup.back() <= 1e-2 * sup0);
  // without control the state settles near the stable equilibria +-1
  CHECK(c.state_sup.back() > 0.5);
  CHECK(c.control_norm.back() == 0.0);

  // zero stays zero
  Trajectory z = integrate_closed_loop(m, Vec::Zero(p.n), 1.0, o, cf);
  for (double s : z.state_sup) CHECK(s == 0.0);
  CHECK(z.total_cost() == 0.0);
}

TEST_CASE("snapshot stride keeps the last point") {
  AllenCahnParams p;
  p.n = 10;
  SdreModel m = allen_cahn_model(p);
  FeedbackContext cf;
  IntegratorOptions o;
  o.dt = 0.1;
  o.snapshot_stride = 3;
  Trajectory tr = integrate_closed_loop(m, allen_cahn_initial(p), 1.0, o, cf);
  REQUIRE(tr.t.size() == 11);
  CHECK(tr.snapshot_steps == std::vector<Index>{0, 3, 6, 9, 10});
  CHECK(sup_diff(tr.states.back(), tr.final_state) == 0.0);
  o.snapshot_stride = 0;
  CHECK(integrate_closed_loop(m, allen_cahn_initial(p), 1.0, o, cf).states.empty());
}

TEST_CASE("Cucker-Smale interaction") {
  const Mat a2 = cucker_smale_interaction(Vec::Constant(2, 0.3));
  Mat want(2, 2);
  want << -0.5, 0.5, 0.5, -0.5;
  CHECK((a2 - want).norm() < 1e-15);

  std::mt19937_64 g(7);
  const Vec pos = random_state(50, 1.0, g);
  const Mat a = cucker_smale_interaction(pos);
  CHECK(a.rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
  CHECK((a - a.transpose()).norm() == 0.0);
  CHECK(a(3, 7) == doctest::Approx(1.0 / 50.0 / (1.0 + (pos(3) - pos(7)) * (pos(3) - pos(7)))));
  CHECK(sym_eig(a).values.maxCoeff() < 1e-13);  // negative semidefinite

  // X22 solves the reduced equation with F = N I, Q = 3/N I
  for (Index n : {2, 20, 80}) {
    const Mat an = cucker_smale_interaction(random_state(n, 1.0, g));
    const Mat x = cucker_smale_x22(an);
    const double nn = static_cast<double>(n);
    CHECK(riccati_residual(an, nn * Mat::Identity(n, n), 3.0 / nn * Mat::Identity(n, n), x).relative < 1e-10);
  }

  const Vec q = (Vec(5) << 0.4, -1.0, 0.4, 2.0, 0.0).finished();
  CHECK(sort_positions(q) == std::vector<Index>{1, 4, 0, 2, 3});
  CHECK_THROWS_AS(cucker_smale_interaction(Vec::Zero(1)), InputError);
  CHECK_THROWS_AS(cucker_smale_model(1), InputError);
}

TEST_CASE("Cucker-Smale model") {
  const Index n = 30;
  SdreModel m = cucker_smale_model(n);
  CHECK(m.n == 2 * n);
  CHECK(m.nr == n);
  const Vec z = cucker_smale_initial(n, 11);
  CHECK(z.minCoeff() >= 0.0);
  CHECK(z.maxCoeff() <= 1.0);
  CHECK(sup_diff(z, cucker_smale_initial(n, 11)) == 0.0);
  CHECK(sup_diff(z, cucker_smale_initial(n, 12)) > 0.0);

  std::set<Index> seen;
  for (Index i : m.ordering(z)) seen.insert(i);
  CHECK(seen.size() == static_cast<size_t>(n));

  // u = -y - N X22 v
  FeedbackContext ctx;
  const Vec u = sdre_feedback(m, z, ctx);
  const Mat x = cucker_smale_x22(cucker_smale_interaction(z.head(n)));
  CHECK(sup_diff(u, -z.head(n) - static_cast<double>(n) * x * z.tail(n)) < 1e-12);
  // the dense solver on the reduced equation gives the same control
  ctx.solver = SdreSolver::dense;
  CHECK(sup_diff(sdre_feedback(m, z, ctx), u) < 1e-9);

  const Vec rhs = m.rhs(z, u);
  CHECK(sup_diff(rhs.head(n), z.tail(n)) == 0.0);
}

TEST_CASE("Cucker-Smale dac feedback") {
  const Index n = 100;
  std::mt19937_64 g(8);
  double sorted = 0.0, unsorted = 0.0;
  for (int t = 0; t < 3; ++t) {
    const Vec z = random_state(2 * n, 1.0, g);
    const Vec u0 = [&] {
      FeedbackContext c;
      return sdre_feedback(cucker_smale_model(n), z, c);
    }();
    for (bool sort : {true, false}) {
      SdreModel m = cucker_smale_model(n, sort);
      FeedbackContext c;
      c.solver = SdreSolver::dac;
      c.dac.n_min = 32;
      const Vec u = sdre_feedback(m, z, c);
      CHECK(sup_diff(u, u0) <= 1e-6 * u0.cwiseAbs().maxCoeff());
      (sort ? sorted : unsorted) += c.last.structure;
    }
  }
  CHECK(sorted <= unsorted);
}

TEST_CASE("Cucker-Smale closed loop") {
  const Index n = 20;
  const Vec z0 = cucker_smale_initial(n, 3);
  IntegratorOptions o;
  o.kind = Integrator::rk45;
  o.dt = 0.1;
  o.snapshot_stride = 0;

  FeedbackContext none;
  none.solver = SdreSolver::none;
  Trajectory c = integrate_closed_loop(cucker_smale_model(n), z0, 20.0, o, none);
  // symmetric interaction: mean velocity is conserved and the spread dies out
  const double mean = z0.tail(n).mean();
  const Vec v = c.final_state.tail(n);
  CHECK(v.mean() == doctest::Approx(mean).epsilon(1e-8));
  const double spread0 = (z0.tail(n).array() - mean).abs().maxCoeff();
  CHECK((v.array() - mean).abs().maxCoeff() <= 1e-2 * spread0);

  FeedbackContext cf;
  Trajectory a = integrate_closed_loop(cucker_smale_model(n), z0, 10.0, o, cf);
  CHECK(a.final_state.head(n).cwiseAbs().maxCoeff() <= 1e-2);
  CHECK(a.final_state.tail(n).cwiseAbs().maxCoeff() <= 1e-2);
  CHECK(a.total_cost() > 0.0);
}
