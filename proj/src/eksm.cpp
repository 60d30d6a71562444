#include "qscare/eksm.hpp"

#include "qscare/error.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <chrono>
#include <cmath>
#include <memory>

namespace qscare {

EksmOperators EksmOperators::dense(const Mat& acl, const Mat& f) {
  require(acl.rows() == acl.cols() && f.rows() == acl.rows() && f.cols() == acl.rows(),
          "EksmOperators: shape mismatch");
  auto at = std::make_shared<const Mat>(acl.transpose());
  auto lu = std::make_shared<const Eigen::PartialPivLU<Mat>>(*at);
  auto fm = std::make_shared<const Mat>(f);
  EksmOperators op;
  op.n = acl.rows();
  op.apply_t = [at](const Mat& x) -> Mat { return *at * x; };
  op.solve_t = [lu](const Mat& x) -> Mat { return lu->solve(x); };
  op.apply_f = [fm](const Mat& x) -> Mat { return *fm * x; };
  return op;
}

EksmOperators EksmOperators::hierarchical(const HMatrix& acl, const HMatrix& f) {
  require(acl.n() == f.n(), "EksmOperators: shape mismatch");
  auto fac = std::make_shared<const HFactorization>(acl.transpose());
  EksmOperators op;
  op.n = acl.n();
  op.apply_t = [acl](const Mat& x) -> Mat { return acl.apply_transpose(x); };
  op.solve_t = [fac](const Mat& x) -> Mat { return fac->solve(x); };
  op.apply_f = [f](const Mat& x) -> Mat { return f.apply(x); };
  return op;
}

namespace {

// Orthonormal basis for the part of W outside range(V). Columns whose pivot
// falls below rel_tol times the largest input column norm are dropped.
Mat orth_against(const Mat& w, const Mat& v, double rel_tol) {
  const Index n = w.rows();
  if (w.cols() == 0) return Mat(n, 0);
  const double scale = w.colwise().norm().maxCoeff();
  if (!(scale > 0.0)) return Mat(n, 0);
  Mat x = w;
  for (int pass = 0; pass < 2 && v.cols() > 0; ++pass) x -= v * (v.transpose() * x);
  Eigen::ColPivHouseholderQR<Mat> qr(x);
  const Mat& r = qr.matrixQR();
  Index k = 0;
  const Index kmax = std::min(x.rows(), x.cols());
  while (k < kmax && std::abs(r(k, k)) > rel_tol * scale) ++k;
  if (k == 0) return Mat(n, 0);
  Mat q = qr.householderQ() * Mat::Identity(n, k);
  // a kept column may be tiny relative to w; one more sweep restores
  // orthogonality to v at working precision
  if (v.cols() > 0) {
    q -= v * (v.transpose() * q);
    Eigen::HouseholderQR<Mat> qr2(q);
    q = qr2.householderQ() * Mat::Identity(n, k);
  }
  return q;
}

void append_cols(Mat& m, const Mat& extra) {
  if (extra.cols() == 0) return;
  const Index c = m.cols();
  m.conservativeResize(extra.rows(), c + extra.cols());
  m.rightCols(extra.cols()) = extra;
}

}  // namespace

double eksm_residual(const EksmState& st) {
  const Index k = st.v.cols();
  if (k == 0) {
    // dX = 0, residual is -U D U^T
    if (st.u.cols() == 0) return 0.0;
    Mat g = st.u.transpose() * st.u;
    return std::sqrt(std::max(0.0, (st.d * g * st.d * g).trace()));
  }
  const Mat& v = st.v;
  const Mat& y = st.y;
  Mat h = v.transpose() * st.atv;  // V^T A^T V
  Mat ft = v.transpose() * st.fv;
  ft = 0.5 * (ft + ft.transpose()).eval();
  Mat ut = v.transpose() * st.u;
  Mat g = h * y + y * h.transpose() - y * ft * y - ut * st.d * ut.transpose();
  Mat w1 = st.atv - v * h;
  Mat w2 = st.u - v * ut;
  Mat kk = w1 * y - w2 * (st.d * ut.transpose());
  Mat m = w2.transpose() * w2;
  Mat dm = st.d * m;
  const double tail = std::max(0.0, (dm * dm).trace());
  const double total = g.squaredNorm() + 2.0 * kk.squaredNorm() + tail;
  return std::sqrt(std::max(0.0, total));
}

EksmResult eksm_care(const EksmOperators& op, const Mat& u, const Mat& d, const EksmOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const Index n = op.n;
  require(opts.tol > 0.0 && opts.s_max >= 1, "eksm_care: invalid options");
  require(u.rows() == n && d.rows() == u.cols() && d.cols() == u.cols(), "eksm_care: shape mismatch");
  require(asymmetry(d) <= 1e-10 * std::max(1.0, d.cwiseAbs().maxCoeff()), "eksm_care: D must be symmetric");
  require(u.allFinite() && d.allFinite(), "eksm_care: non-finite right-hand side");

  EksmResult out;
  out.dx = LowRankFactor::sym(Mat(n, 0), Mat(0, 0));

  double rhs_norm = 0.0;
  if (u.cols() > 0) {
    Eigen::HouseholderQR<Mat> qr(u);
    const Index k = std::min(u.rows(), u.cols());
    Mat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    rhs_norm = (r * d * r.transpose()).norm();
  }
  if (!(rhs_norm > 0.0)) {
    out.steps = 1;
    out.report.iterations = 1;
    out.report.residuals.push_back(0.0);
    out.report.structure.push_back(0);
    out.report.final_residual = 0.0;
    out.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }

  EksmState st;
  st.u = u;
  st.d = 0.5 * (d + d.transpose());
  st.v = Mat(n, 0);
  st.atv = Mat(n, 0);
  st.fv = Mat(n, 0);

  Mat p_last = orth_against(u, st.v, opts.deflation_tol);
  require(p_last.cols() > 0, "eksm_care: right-hand side has no range");
  Mat n_last = orth_against(op.solve_t(u), p_last, opts.deflation_tol);

  DenseCareOptions inner;
  inner.check_inputs = false;
  inner.check_stability = false;
  inner.refine = true;

  for (Index s = 1;; ++s) {
    // extend V and the cached products by the new blocks
    Mat fresh(n, p_last.cols() + n_last.cols());
    fresh << p_last, n_last;
    append_cols(st.v, fresh);
    append_cols(st.atv, op.apply_t(fresh));
    append_cols(st.fv, op.apply_f(fresh));
    st.steps = s;

    const Index k = st.v.cols();
    Mat h = st.v.transpose() * st.atv;
    Mat ft = symmetrize(Mat(st.v.transpose() * st.fv));
    Mat ut = st.v.transpose() * st.u;
    Mat qt = symmetrize(Mat(-(ut * st.d * ut.transpose())));
    try {
      st.y = dense_care(h.transpose(), ft, qt, nullptr, inner);
    } catch (const std::exception& e) {
      throw ConvergenceError(std::string("eksm_care: projected CARE failed at step ") + std::to_string(s) + ": " +
                             e.what());
    }
    const double res = eksm_residual(st) / rhs_norm;
    out.report.residuals.push_back(res);
    out.report.structure.push_back(k);
    out.residual = res;
    if (res <= opts.tol) break;
    if (s >= opts.s_max && !opts.throw_on_s_max) {
      out.report.notes.emplace_back("stopped at s_max without reaching tol");
      break;
    }
    if (s >= opts.s_max)
      throw ConvergenceError("eksm_care: no convergence after " + std::to_string(s) + " steps (residual " +
                             std::to_string(res) + ")");

    // positive block: A^T times the previous positive block, already in atv
    const Index pcols = p_last.cols();
    const Index ncols = n_last.cols();
    Mat ap = st.atv.block(0, k - pcols - ncols, n, pcols);
    Mat p_new = orth_against(ap, st.v, opts.deflation_tol);
    Mat vp(n, k + p_new.cols());
    vp << st.v, p_new;
    Mat n_new = ncols > 0 ? orth_against(op.solve_t(n_last), vp, opts.deflation_tol) : Mat(n, 0);
    if (p_new.cols() + n_new.cols() == 0)
      throw ConvergenceError("eksm_care: Krylov space stopped growing before convergence (residual " +
                             std::to_string(res) + ")");
    p_last = std::move(p_new);
    n_last = std::move(n_new);
  }

  out.steps = st.steps;
  out.dx = LowRankFactor::sym(st.v, symmetrize(st.y));
  out.report.iterations = st.steps;
  out.report.final_residual = out.residual;
  out.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace qscare
