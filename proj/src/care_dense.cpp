#include "qscare/care_dense.hpp"

#include "qscare/error.hpp"

#include <Eigen/LU>

#include <chrono>
#include <cmath>

namespace qscare {

CareProblem::CareProblem(StructuredMatrix a_, StructuredMatrix f_, StructuredMatrix q_)
    : a(std::move(a_)), f(std::move(f_)), q(std::move(q_)) {
  require(order(a) == order(f) && order(a) == order(q), "CareProblem: A, F, Q must have the same order");
}

namespace {

void check_sym_psd(const Mat& m, const char* name, bool psd) {
  require(m.rows() == m.cols(), std::string(name) + " must be square");
  require(m.allFinite(), std::string(name) + " has non-finite entries");
  require(asymmetry(m) <= 1e-10, std::string(name) + " must be symmetric");
  if (!psd || m.rows() == 0) return;
  SymEig e = sym_eig(symmetrize(m));
  const double scale = e.values.cwiseAbs().maxCoeff();
  require(e.values(0) >= -1e-12 * scale - 1e-300, std::string(name) + " must be positive semidefinite");
}

}  // namespace

void CareProblem::validate() const {
  const Index n = order(a);
  require(order(f) == n && order(q) == n, "CareProblem: A, F, Q must have the same order");
  const bool psd = n <= 1000;
  if (structure_of(f) == Structure::dense || psd) check_sym_psd(to_dense(f), "F", psd);
  if (structure_of(q) == Structure::dense || psd) check_sym_psd(to_dense(q), "Q", psd);
}

DenseResidual riccati_residual(const Mat& a, const Mat& f, const Mat& q, const Mat& x) {
  const Index n = a.rows();
  require(a.cols() == n && f.rows() == n && f.cols() == n && q.rows() == n && q.cols() == n && x.rows() == n &&
              x.cols() == n,
          "riccati_residual: shape mismatch");
  Mat r = a.transpose() * x;
  r.noalias() += x * a;
  r.noalias() -= x * (f * x);
  r += q;
  const double nq = q.norm();
  return {r, nq > 0.0 ? r.norm() / nq : r.norm()};
}

DenseResidual riccati_residual(const CareProblem& p, const StructuredMatrix& x) {
  return riccati_residual(to_dense(p.a), to_dense(p.f), to_dense(p.q), to_dense(x));
}

BandedResidual riccati_residual(const BandedMatrix& a, const BandedMatrix& f, const BandedMatrix& q,
                                const BandedMatrix& x) {
  BandedMatrix r = a.transpose() * x + x * a - x * (f * x) + q;
  const double nq = q.frobenius();
  return {r, nq > 0.0 ? r.frobenius() / nq : r.frobenius()};
}

double sol_norm_bound(double tau, double norm_f, double norm_q, double lmin_f) {
  require(lmin_f > 0.0, "sol_norm_bound: lambda_min(F) must be positive");
  require(tau >= 0.0 && norm_f >= 0.0 && norm_q >= 0.0, "sol_norm_bound: norms must be nonnegative");
  return (tau + std::sqrt(tau * tau + norm_f * norm_q)) / lmin_f;
}

Mat care_closed_form_sym(const Mat& a, const Mat& q, double gamma) {
  require(gamma > 0.0, "care_closed_form_sym: gamma must be positive");
  require(a.rows() == a.cols() && q.rows() == a.rows() && q.cols() == a.rows(), "care_closed_form_sym: shape mismatch");
  require(asymmetry(a) <= 1e-12, "care_closed_form_sym: A must be symmetric");
  require(asymmetry(q) <= 1e-12, "care_closed_form_sym: Q must be symmetric");
  Mat m = a * a + q / gamma;
  return symmetrize(gamma * (sqrtm_spd(symmetrize(m)) + a));
}

namespace {

// Sign of the Hamiltonian by the scaled Newton iteration.
Mat hamiltonian_sign(const Mat& h, int max_iters, int* iters) {
  const Index m = h.rows();
  Mat z = h;
  bool scale = true;
  double prev_change = std::numeric_limits<double>::infinity();
  int settle = 0;
  for (int k = 1; k <= max_iters; ++k) {
    Eigen::PartialPivLU<Mat> lu(z);
    const Mat& lu_m = lu.matrixLU();
    double logdet = 0.0;
    for (Index i = 0; i < m; ++i) {
      const double piv = std::abs(lu_m(i, i));
      if (!(piv > 0.0) || !std::isfinite(piv))
        throw ConvergenceError("dense_care: Hamiltonian is singular (eigenvalues on the imaginary axis)");
      logdet += std::log(piv);
    }
    const double mu = scale ? std::exp(-logdet / static_cast<double>(m)) : 1.0;
    Mat zinv = lu.inverse();
    Mat next = 0.5 * (mu * z + zinv / mu);
    if (!next.allFinite()) throw ConvergenceError("dense_care: sign iteration produced non-finite values");
    const double change = (next - z).lpNorm<1>() / next.lpNorm<1>();
    z.swap(next);
    *iters = k;
    if (change < 1e-2) scale = false;
    if (change < 1e-14) break;
    // near convergence the change stalls at roundoff level; two stalled steps end it
    if (change < 1e-9 && change > 0.2 * prev_change) {
      if (++settle >= 2) break;
    }
    prev_change = change;
    if (k == max_iters) throw ConvergenceError("dense_care: sign iteration did not converge");
  }
  return z;
}

}  // namespace

Mat dense_care(const Mat& a, const Mat& f, const Mat& q, SolveReport* report, const DenseCareOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const Index n = a.rows();
  require(a.cols() == n && f.rows() == n && f.cols() == n && q.rows() == n && q.cols() == n,
          "dense_care: A, F, Q must be square of equal order");
  require(n <= opts.dense_cap, "dense_care: order exceeds the dense cap");
  require(a.allFinite(), "dense_care: A has non-finite entries");
  if (opts.check_inputs) {
    check_sym_psd(f, "F", true);
    check_sym_psd(q, "Q", true);
  } else {
    require(f.allFinite() && q.allFinite(), "dense_care: non-finite coefficients");
  }
  SolveReport rep;
  if (n == 0) {
    if (report) *report = rep;
    return Mat(0, 0);
  }

  Mat h(2 * n, 2 * n);
  h << a, -f, -q, -a.transpose();
  int iters = 0;
  Mat s = hamiltonian_sign(h, opts.max_sign_iters, &iters);

  Mat lhs(2 * n, n), rhs(2 * n, n);
  lhs << s.topRightCorner(n, n), s.bottomRightCorner(n, n) + Mat::Identity(n, n);
  rhs << s.topLeftCorner(n, n) + Mat::Identity(n, n), s.bottomLeftCorner(n, n);
  Mat x = symmetrize(Mat(lhs.colPivHouseholderQr().solve(-rhs)));
  if (!x.allFinite()) throw ConvergenceError("dense_care: invariant subspace extraction failed");

  DenseResidual res = riccati_residual(a, f, q, x);
  rep.residuals.push_back(res.relative);
  if (opts.refine) {
    for (int k = 0; k < 3 && res.relative > opts.refine_target; ++k) {
      Mat delta = solve_lyapunov(a - f * x, -res.r);
      Mat x1 = symmetrize(x + delta);
      DenseResidual r1 = riccati_residual(a, f, q, x1);
      if (!(r1.relative < res.relative)) break;
      x = std::move(x1);
      res = std::move(r1);
      rep.residuals.push_back(res.relative);
    }
  }
  rep.iterations = iters;
  rep.final_residual = res.relative;
  if (opts.check_stability && n <= 500) {
    Mat acl = a - f * x;
    rep.closed_loop_stable = spectral_abscissa(acl) <= 1e-10 * std::max(1.0, acl.norm());
  } else {
    rep.notes.emplace_back("closed-loop stability not checked");
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (report) *report = std::move(rep);
  return x;
}

Mat dense_care(const CareProblem& p, SolveReport* report, const DenseCareOptions& opts) {
  return dense_care(to_dense(p.a), to_dense(p.f), to_dense(p.q), report, opts);
}

}  // namespace qscare
