#include "qscare/tink.hpp"

#include "qscare/error.hpp"
#include "qscare/generators.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <boost/math/tools/minima.hpp>

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace qscare {

namespace {

constexpr double kProbeScale = 1.5957691216057308;  // 2 sqrt(2/pi)
constexpr std::uint64_t kProbeTag = 0x74696e6b;       // per-iteration probe stream

// argmin of f on [lo, hi], fminbnd style
template <class F>
double bounded_min(F f, double lo, double hi) {
  auto r = boost::math::tools::brent_find_minima(f, lo, hi, 40);
  return r.first;
}

}  // namespace

BandedMatrix lyap_apply(const BandedMatrix& acl, const BandedMatrix& m) {
  require(acl.n() == m.n(), "lyap_apply: size mismatch");
  if (m.symmetric()) {
    BandedMatrix p = m * acl;
    return axpby(1.0, p, 1.0, p.transpose()).symmetrized();
  }
  return acl.transpose() * m + m * acl;
}

Mat gaussian_probes(Index n, Index probes, std::mt19937_64& rng) {
  require(probes >= 1, "gaussian_probes: need at least one probe");
  std::normal_distribution<double> nd;
  Mat w(n, probes);
  for (Index j = 0; j < probes; ++j)
    for (Index i = 0; i < n; ++i) w(i, j) = nd(rng);
  return w;
}

double prob_norm_from_products(const Mat& y) {
  if (y.cols() == 0) return 0.0;
  return kProbeScale * y.colwise().norm().maxCoeff();
}

double prob_norm_est(const std::function<Mat(const Mat&)>& apply, Index n, Index probes, std::mt19937_64& rng) {
  require(probes >= 1, "prob_norm_est: probes must be >= 1");
  return prob_norm_from_products(apply(gaussian_probes(n, probes, rng)));
}

// ---------------------------------------------------------------- inner solvers

namespace {

void check_inner(const BandedMatrix& acl, const BandedMatrix& rhs, const InnerOptions& o, const char* who) {
  require(acl.n() == rhs.n(), std::string(who) + ": size mismatch");
  require(o.stop_norm > 0.0, std::string(who) + ": stop_norm must be positive");
  require(o.min_iters >= 0 && o.max_iters >= 1, std::string(who) + ": bad iteration limits");
  require(o.norm == InnerNorm::frobenius || (o.probes && o.probes->rows() == rhs.n()),
          std::string(who) + ": probe matrix missing or of the wrong size");
}

double exit_norm(const InnerOptions& o, const BandedMatrix& r) {
  return o.norm == InnerNorm::frobenius ? r.frobenius() : prob_norm_from_products(r.apply(*o.probes));
}

void finish(InnerResult& res, const BandedMatrix& acl, const BandedMatrix& rhs, const InnerOptions& o,
            bool have_est) {
  res.residual = axpby(1.0, lyap_apply(acl, res.x), -1.0, rhs);
  if (rhs.symmetric()) res.residual = res.residual.symmetrized();
  res.fro_residual = res.residual.frobenius();
  if (!have_est) res.est_residual = exit_norm(o, res.residual);
  if (!std::isfinite(res.fro_residual)) throw ConvergenceError("inner Lyapunov solve produced non-finite values");
}

}  // namespace

InnerResult gmres_lyap(const BandedMatrix& acl, const BandedMatrix& rhs, const InnerOptions& o) {
  check_inner(acl, rhs, o, "gmres_lyap");
  const Index n = rhs.n();
  InnerResult res;
  res.x = BandedMatrix(n, 0, 0);
  const double beta = rhs.frobenius();
  if (beta == 0.0) {
    res.converged = true;
    finish(res, acl, rhs, o, false);
    return res;
  }
  const bool sym = rhs.symmetric();
  const bool probe = o.norm == InnerNorm::probe;
  const Index m = o.max_iters;

  std::vector<BandedMatrix> v;
  std::vector<Mat> w;  // v[i] * Omega
  v.push_back((1.0 / beta) * rhs);
  if (probe) w.push_back(v[0].apply(*o.probes));
  Mat h = Mat::Zero(m + 1, m);
  Vec cs = Vec::Zero(m), sn = Vec::Zero(m), g = Vec::Zero(m + 1);
  g(0) = beta;

  Index it = 0;
  bool have_est = false;
  double op_scale = 0.0;
  for (Index j = 0; j < m; ++j) {
    BandedMatrix z = lyap_apply(acl, v[static_cast<size_t>(j)]);
    const double z0 = z.frobenius();
    op_scale = std::max(op_scale, z0);
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i <= j; ++i) {
        const double hij = frobenius_dot(v[static_cast<size_t>(i)], z);
        h(i, j) += hij;
        z = axpby(1.0, z, -hij, v[static_cast<size_t>(i)]);
      }
      // second pass only after heavy cancellation
      if (z.frobenius() > 0.7 * z0) break;
    }
    if (sym) z = z.symmetrized();
    h(j + 1, j) = z.frobenius();

    for (Index i = 0; i < j; ++i) {
      const double t = cs(i) * h(i, j) + sn(i) * h(i + 1, j);
      h(i + 1, j) = -sn(i) * h(i, j) + cs(i) * h(i + 1, j);
      h(i, j) = t;
    }
    const double hjj = h(j, j), hj1 = h(j + 1, j);
    const double rr = std::hypot(hjj, hj1);
    const bool breakdown = hj1 <= 1e-14 * std::max(z0, std::abs(hjj));
    if (breakdown && rr <= 1e-14 * op_scale) {
      // singular Hessenberg: the Krylov space is invariant but the rhs is not in the range
      res.stagnated = true;
      break;
    }
    cs(j) = rr == 0.0 ? 1.0 : hjj / rr;
    sn(j) = rr == 0.0 ? 0.0 : hj1 / rr;
    h(j, j) = rr;
    const double hsub = hj1;
    h(j + 1, j) = 0.0;
    g(j + 1) = -sn(j) * g(j);
    g(j) = cs(j) * g(j);
    const double rho = std::abs(g(j + 1));
    res.history.push_back(rho);
    it = j + 1;
    if (!std::isfinite(rho)) throw ConvergenceError("gmres_lyap: non-finite residual");

    if (!breakdown) {
      v.push_back((1.0 / hsub) * z);
      if (probe) w.push_back(v.back().apply(*o.probes));
    }
    if (it >= o.min_iters || breakdown) {
      double est = rho;
      if (probe) {
        if (breakdown) {
          est = 0.0;
        } else {
          // residual = g_{j+1} * (rotations^T e_{j+1}) in the basis v[0..j+1]
          Vec u = Vec::Zero(j + 2);
          u(j + 1) = 1.0;
          for (Index i = j; i >= 0; --i) {
            const double a = u(i), b = u(i + 1);
            u(i) = cs(i) * a - sn(i) * b;
            u(i + 1) = sn(i) * a + cs(i) * b;
          }
          Mat y = Mat::Zero(n, o.probes->cols());
          for (Index i = 0; i <= j + 1; ++i) y += (g(j + 1) * u(i)) * w[static_cast<size_t>(i)];
          est = prob_norm_from_products(y);
        }
      }
      res.est_residual = est;
      have_est = true;
      if (est <= o.stop_norm || breakdown) {
        res.converged = est <= o.stop_norm;
        break;
      }
    }
    if (it >= 4) {
      const double old = res.history[static_cast<size_t>(it - 4)];
      if (old - rho < 1e-14 * old) {
        res.stagnated = true;
        break;
      }
    }
  }

  Vec y = h.topLeftCorner(it, it).triangularView<Eigen::Upper>().solve(g.head(it));
  BandedMatrix x(n, 0, 0);
  for (Index i = 0; i < it; ++i) x = axpby(1.0, x, y(i), v[static_cast<size_t>(i)]);
  res.x = sym ? x.symmetrized() : x;
  res.iters = it;
  finish(res, acl, rhs, o, have_est && (res.converged || res.stagnated));
  return res;
}

InnerResult cg_lyap(const BandedMatrix& acl, const BandedMatrix& rhs, const InnerOptions& o) {
  check_inner(acl, rhs, o, "cg_lyap");
  const Index n = rhs.n();
  InnerResult res;
  res.x = BandedMatrix(n, 0, 0);
  if (rhs.frobenius() == 0.0) {
    res.converged = true;
    finish(res, acl, rhs, o, false);
    return res;
  }
  const bool sym = rhs.symmetric();
  // K = -L, b = -rhs
  BandedMatrix x(n, 0, 0);
  BandedMatrix r = -1.0 * rhs;
  BandedMatrix p = r;
  double rr = frobenius_dot(r, r);
  bool have_est = false;
  for (Index it = 1; it <= o.max_iters; ++it) {
    BandedMatrix kp = -1.0 * lyap_apply(acl, p);
    const double pkp = frobenius_dot(p, kp);
    if (!(pkp > 0.0)) {
      res.indefinite = true;
      break;
    }
    const double a = rr / pkp;
    x = axpby(1.0, x, a, p);
    r = axpby(1.0, r, -a, kp);
    if (sym) r = r.symmetrized();
    const double rr_new = frobenius_dot(r, r);
    res.history.push_back(std::sqrt(rr_new));
    res.iters = it;
    if (!std::isfinite(rr_new)) throw ConvergenceError("cg_lyap: non-finite residual");
    if (it >= o.min_iters || rr_new == 0.0) {
      res.est_residual = o.norm == InnerNorm::frobenius ? std::sqrt(rr_new) : exit_norm(o, r);
      have_est = true;
      if (res.est_residual <= o.stop_norm) {
        res.converged = true;
        break;
      }
    }
    if (it >= 4) {
      const double old = res.history[static_cast<size_t>(it - 4)];
      if (old - std::sqrt(rr_new) < 1e-14 * old) {
        res.stagnated = true;
        break;
      }
    }
    p = axpby(1.0, r, rr_new / rr, p);
    rr = rr_new;
  }
  res.x = sym ? x.symmetrized() : x;
  finish(res, acl, rhs, o, have_est && (res.converged || res.stagnated));
  return res;
}

// ---------------------------------------------------------------- line search

LineSearchResult line_search(const BandedMatrix& r, const BandedMatrix& rhat, const BandedMatrix& v, double alpha) {
  require(alpha > 0.0, "line_search: alpha must be positive");
  require(r.n() == rhat.n() && r.n() == v.n(), "line_search: size mismatch");
  const double rr = frobenius_dot(r, r), rh = frobenius_dot(r, rhat), hh = frobenius_dot(rhat, rhat);
  const double rv = frobenius_dot(r, v), hv = frobenius_dot(rhat, v), vv = frobenius_dot(v, v);
  require(rr > 0.0, "line_search: R_k must be nonzero");
  // M(l) = R + l P - l^2 V with P = Rhat - R
  const double rp = rh - rr, pp = hh - 2.0 * rh + rr, pv = hv - rv;
  LineSearchResult out;
  double* c = out.coeffs;
  c[0] = rr;
  c[1] = 2.0 * rp;
  c[2] = pp - 2.0 * rv;
  c[3] = -2.0 * pv;
  c[4] = vv;
  auto f = [c](double l) { return std::max(0.0, c[0] + l * (c[1] + l * (c[2] + l * (c[3] + l * c[4])))); };
  double lam = bounded_min(f, 0.0, 1.0);
  if (f(1.0) <= f(lam)) lam = 1.0;
  lam = std::clamp(lam, 1e-4, 1.0);
  out.lambda = lam;
  out.value = std::sqrt(f(lam));
  out.sufficient = out.value <= (1.0 - lam * alpha) * std::sqrt(rr);
  return out;
}

// ---------------------------------------------------------------- truncation

TruncResult greedy_truncate(const BandedMatrix& x_cand, const TruncContext& c, Index s0, Index step) {
  require(c.a && c.f && c.q && c.xk && c.acl && c.probes, "greedy_truncate: incomplete context");
  require(s0 >= 0 && step >= 1, "greedy_truncate: bad schedule");
  require(c.zeta >= 0.0 && c.zeta < 1.0, "greedy_truncate: zeta must lie in [0, 1)");
  const Index n = x_cand.n();
  const Mat& om = *c.probes;
  const Mat a_om = c.a->apply(om), acl_om = c.acl->apply(om), q_om = c.q->apply(om);
  const Mat c0 = c.xk->apply(c.f->apply(c.xk->apply(om))) + q_om;
  const Index bw = x_cand.measured_bandwidth();

  TruncResult out;
  for (Index s = s0;; s += step) {
    const bool full = s >= bw || s >= n - 1;
    BandedMatrix t = full ? x_cand : band_truncate(x_cand, s);
    const Mat t_om = t.apply(om);
    const Mat care = c.a->apply_transpose(t_om) + t.apply(a_om) - t.apply(c.f->apply(t_om)) + q_om;
    const Mat lyap = c.acl->apply_transpose(t_om) + t.apply(acl_om) + c0;
    out.care_est = prob_norm_from_products(care);
    out.lyap_est = prob_norm_from_products(lyap);
    const bool pass = out.care_est <= (1.0 - c.zeta) * c.riccati_est && out.lyap_est <= c.lambda_min_q;
    if (pass || full) {
      out.x = std::move(t);
      out.truncated = pass && !full;
      out.s = pass ? s : n - 1;
      if (pass && full) out.s = std::min(s, n - 1);
      return out;
    }
  }
}

// ---------------------------------------------------------------- spectra

Index inertia_below(const BandedMatrix& q, double sigma) {
  const Index n = q.n(), p = q.bandwidth(), w = p + 1;
  // L(i,k) for 0 < i-k <= p at l[i*w + (i-k)]
  std::vector<double> l(static_cast<size_t>(n * w), 0.0), d(static_cast<size_t>(n), 0.0);
  const double tiny = std::numeric_limits<double>::epsilon() * std::max(q.max_abs() + std::abs(sigma), 1e-300);
  auto L = [&](Index i, Index k) -> double& { return l[static_cast<size_t>(i * w + (i - k))]; };
  Index neg = 0;
  for (Index j = 0; j < n; ++j) {
    double dj = q(j, j) - sigma;
    for (Index k = std::max<Index>(0, j - p); k < j; ++k) dj -= L(j, k) * L(j, k) * d[static_cast<size_t>(k)];
    if (std::abs(dj) < tiny) dj = -tiny;
    d[static_cast<size_t>(j)] = dj;
    if (dj < 0.0) ++neg;
    for (Index i = j + 1; i <= std::min(n - 1, j + p); ++i) {
      double s = 0.5 * (q(i, j) + q(j, i));
      for (Index k = std::max<Index>(0, i - p); k < j; ++k) s -= L(i, k) * L(j, k) * d[static_cast<size_t>(k)];
      L(i, j) = s / dj;
    }
  }
  return neg;
}

double lambda_min_banded(const BandedMatrix& q, double rel_tol) {
  require(q.n() >= 1, "lambda_min_banded: empty matrix");
  require(q.asymmetry() <= 1e-12, "lambda_min_banded: Q must be symmetric");
  const Index n = q.n();
  double lo = std::numeric_limits<double>::infinity(), hi = lo;
  for (Index i = 0; i < n; ++i) {
    double rad = 0.0;
    for (Index j = std::max<Index>(0, i - q.lower()); j <= std::min(n - 1, i + q.upper()); ++j)
      if (j != i) rad += std::abs(q(i, j));
    lo = std::min(lo, q(i, i) - rad);
    hi = std::min(hi, q(i, i));  // e_i^T Q e_i >= lambda_min
  }
  const double scale = std::max(q.max_abs(), std::numeric_limits<double>::min());
  for (int it = 0; it < 200; ++it) {
    if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi)) || hi - lo <= 1e-15 * scale) break;
    const double mid = 0.5 * (lo + hi);
    if (inertia_below(q, mid) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

double rightmost_estimate(const BandedMatrix& a, std::uint64_t seed) {
  const Index n = a.n();
  if (n < 500) return spectral_abscissa(a.to_dense());
  const Index m = std::min<Index>(30, n);
  auto g = make_rng(seed, 0x61726e, 0);
  std::normal_distribution<double> nd;
  Mat v = Mat::Zero(n, m + 1);
  for (Index i = 0; i < n; ++i) v(i, 0) = nd(g);
  v.col(0).normalize();
  Mat h = Mat::Zero(m + 1, m);
  Index k = 0;
  for (; k < m; ++k) {
    Vec z = a.apply(v.col(k));
    for (int pass = 0; pass < 2; ++pass) {
      Vec c = v.leftCols(k + 1).transpose() * z;
      h.col(k).head(k + 1) += c;
      z -= v.leftCols(k + 1) * c;
    }
    h(k + 1, k) = z.norm();
    if (h(k + 1, k) <= 1e-12 * h.col(k).norm()) {
      ++k;
      break;
    }
    v.col(k + 1) = z / h(k + 1, k);
  }
  Eigen::EigenSolver<Mat> es(h.topLeftCorner(k, k), false);
  return es.eigenvalues().real().maxCoeff();
}

StabilizingInit stabilizing_init(const BandedMatrix& a, const BandedMatrix& f, const BandedMatrix& q,
                                 std::uint64_t seed, InitRule rule) {
  require(a.n() == f.n() && a.n() == q.n(), "stabilizing_init: size mismatch");
  const Index n = a.n();
  StabilizingInit out;
  out.x0 = BandedMatrix::identity(n, 0.0);
  out.a_stable = rightmost_estimate(a, seed) < 0.0;
  if (out.a_stable && rule == InitRule::zero_if_stable) return out;
  auto stable = [&](double c) { return rightmost_estimate(axpby(1.0, a, -c, f), seed) < 0.0; };
  double c_min = 0.0;
  if (!out.a_stable) {
    double hi = 1.0;
    while (!stable(hi)) {
      hi *= 2.0;
      if (hi > 1e12)
        throw ConvergenceError("stabilizing_init: no stabilizing c I found up to c = 1e12; supply X0 explicitly");
    }
    double lo = 0.0;
    for (int it = 0; it < 40 && hi - lo > 1e-10 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (stable(mid) ? hi : lo) = mid;
    }
    c_min = hi;
  }

  auto g = make_rng(seed, kProbeTag, 0xffff);
  const Mat om = gaussian_probes(n, 10, g);
  const Mat s1 = a.apply(om) + a.apply_transpose(om), f_om = f.apply(om), q_om = q.apply(om);
  // R(cI) = c (A + A^T) - c^2 F + Q
  auto phi = [&](double c) { return prob_norm_from_products(c * s1 - c * c * f_om + q_om); };
  double ub = std::max(2.0 * c_min, 1.0);
  while (phi(2.0 * ub) < phi(ub) && ub < 1e12) ub *= 2.0;
  double c = bounded_min(phi, c_min, 2.0 * ub);
  if (!stable(c)) c = c_min;
  out.c = c;
  out.x0 = BandedMatrix::identity(n, c);
  return out;
}

// ---------------------------------------------------------------- tink

bool TinkResult::law_stated_holds() const {
  for (const TinkIteration& s : steps)
    if (s.bw_hat > s.law_stated) return false;
  return true;
}

bool TinkResult::law_krylov_holds() const {
  for (const TinkIteration& s : steps)
    if (s.bw_hat > s.law_krylov) return false;
  return true;
}

TinkResult tink(const BandedMatrix& a, const BandedMatrix& f, const BandedMatrix& q, const TinkOptions& o,
                const std::optional<BandedMatrix>& x0) {
  const auto t0 = std::chrono::steady_clock::now();
  const Index n = a.n();
  require(n >= 1, "tink: empty problem");
  require(f.n() == n && q.n() == n, "tink: A, F, Q must have the same order");
  require(!x0 || x0->n() == n, "tink: X0 has the wrong order");
  require(f.asymmetry() <= 1e-12, "tink: F must be symmetric");
  require(q.asymmetry() <= 1e-12, "tink: Q must be symmetric");
  require(o.tol > 0.0 && o.k_max >= 0 && o.alpha > 0.0 && o.zeta >= 0.0 && o.zeta < 1.0 && o.s0 >= 0 &&
              o.s_step >= 1 && o.probes >= 1 && o.min_inner >= 0 && o.max_inner >= 1,
          "tink: invalid options");

  TinkResult out;
  out.lambda_min_q = lambda_min_banded(q);
  require(out.lambda_min_q > 0.0, "tink: lambda_min(Q) must be positive for the inner stopping rule");

  BandedMatrix x;
  if (x0) {
    x = x0->symmetrized().compact();
  } else {
    StabilizingInit init = stabilizing_init(a, f, q, o.seed, o.init);
    x = init.x0;
    out.init_c = init.c;
  }
  const Index ba = a.measured_bandwidth(), bf = f.measured_bandwidth(), bq = q.measured_bandwidth();
  const BandedMatrix at = a.transpose();
  SolveReport& rep = out.report;

  for (Index k = 0;; ++k) {
    auto g = make_rng(o.seed, kProbeTag, static_cast<std::uint64_t>(k));
    const Mat om = gaussian_probes(n, o.probes, g);
    BandedMatrix fx = f * x;
    BandedMatrix r = (at * x + x * a - x * fx + q).symmetrized();
    const double est = prob_norm_from_products(r.apply(om));
    rep.residuals.push_back(est);
    rep.structure.push_back(x.measured_bandwidth());
    if (est < o.tol) {
      out.converged = true;
      out.final_est = est;
      break;
    }
    if (k == o.k_max) {
      out.final_est = est;
      break;
    }

    TinkIteration st;
    st.k = k;
    st.riccati_est = est;
    st.riccati_fro = r.frobenius();
    st.bw_xk = x.measured_bandwidth();
    const BandedMatrix acl = axpby(1.0, a, -1.0, fx).compact();
    st.bw_acl = acl.measured_bandwidth();

    InnerOptions io;
    io.stop_norm = out.lambda_min_q;
    if (o.forcing)
      io.stop_norm = std::min(io.stop_norm, std::max(std::min(o.forcing_max, std::sqrt(est)) * est, 0.25 * o.tol));
    io.min_iters = o.min_inner;
    io.max_iters = o.max_inner;
    io.probes = &om;
    st.stop_norm = io.stop_norm;

    // Newton step in correction form: X_hat = X_k + S with A_cl^T S + S A_cl = -R(X_k)
    const BandedMatrix rhs = -1.0 * r;
    InnerResult inner;
    if (o.inner == InnerSolver::cg) {
      inner = cg_lyap(acl, rhs, io);
      st.inner_cg = true;
      if (inner.indefinite) {
        rep.notes.push_back("step " + std::to_string(k) + ": cg met negative curvature, fell back to gmres");
        inner = gmres_lyap(acl, rhs, io);
        st.inner_cg = false;
      }
    } else {
      inner = gmres_lyap(acl, rhs, io);
    }
    if (inner.stagnated) rep.notes.push_back("step " + std::to_string(k) + ": inner solver stagnated");
    if (!inner.converged && !inner.stagnated)
      rep.notes.push_back("step " + std::to_string(k) + ": inner solver hit max_inner");
    st.inner_iters = inner.iters;
    st.lyap_est = inner.est_residual;
    st.lyap_fro = inner.fro_residual;
    const BandedMatrix& sdir = inner.x;
    const BandedMatrix xhat = axpby(1.0, x, 1.0, sdir);
    st.bw_hat = xhat.measured_bandwidth();
    if (inner.iters == 0) {
      st.law_stated = st.law_krylov = st.bw_xk;
    } else {
      st.law_stated = (inner.iters - 1) * ba + bf + bq + 2 * st.bw_xk;
      st.law_krylov = std::max(st.bw_xk, r.measured_bandwidth() + (inner.iters - 1) * st.bw_acl);
    }

    double lam = 1.0;
    const bool do_ls = o.linesearch == LineSearchMode::all || (o.linesearch == LineSearchMode::first && k == 0);
    if (do_ls) {
      BandedMatrix v = (sdir * (f * sdir)).symmetrized();
      LineSearchResult ls = line_search(r, inner.residual, v, o.alpha);
      lam = ls.lambda;
      st.ls_sufficient = ls.sufficient;
      if (!ls.sufficient) rep.notes.push_back("step " + std::to_string(k) + ": line search without sufficient decrease");
    }
    st.lambda = lam;
    BandedMatrix xc = axpby(1.0, x, lam, sdir).symmetrized();

    if (o.truncation) {
      TruncContext ctx{&a, &f, &q, &x, &acl, out.lambda_min_q, o.zeta, est, &om};
      TruncResult tr = greedy_truncate(xc, ctx, o.s0, o.s_step);
      st.s = tr.s;
      st.truncated = tr.truncated;
      st.care_est_next = tr.care_est;
      st.lyap_est_next = tr.lyap_est;
      x = tr.x.symmetrized().compact();
    } else {
      st.s = n;
      x = xc.compact();
    }
    st.bw_next = x.measured_bandwidth();
    out.steps.push_back(st);
    if (o.on_iterate) o.on_iterate(k + 1, x);
  }

  rep.iterations = static_cast<Index>(out.steps.size());
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.final_residual = riccati_residual(a, f, q, x).relative;
  out.x = std::move(x);
  if (!out.converged && o.throw_on_k_max)
    throw ConvergenceError("tink: k_max = " + std::to_string(o.k_max) + " reached with estimated residual " +
                           std::to_string(out.final_est));
  return out;
}

// ---------------------------------------------------------------- diagnostic bound

double gmres_iter_bound(const Mat& a, const Mat& f, const Mat& q, const Mat& xk) {
  const Index n = a.rows();
  require(n >= 1 && n <= 200, "gmres_iter_bound: only available for n <= 200");
  require(f.rows() == n && q.rows() == n && xk.rows() == n, "gmres_iter_bound: size mismatch");
  Eigen::LLT<Mat> llt(symmetrize(f));
  require(llt.info() == Eigen::Success, "gmres_iter_bound: F must be positive definite");
  const Mat l = llt.matrixL();
  const Mat acl = a - f * xk;
  // L~(M) = C M + M B^T with C = L^T A_cl^T L^-T, B = L A_cl L^-1
  const Mat c = l.transpose() * acl.transpose() * l.transpose().triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));
  const Mat b = l * acl * l.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
  const double hmax = sym_eig(symmetrize(c)).values.maxCoeff() + sym_eig(symmetrize(b)).values.maxCoeff();
  if (hmax >= 0.0) return std::numeric_limits<double>::infinity();

  // ||L~||_2^2 by power iteration on L~* L~
  auto op = [&](const Mat& m) -> Mat { return c * m + m * b.transpose(); };
  auto adj = [&](const Mat& m) -> Mat { return c.transpose() * m + m * b; };
  auto g = make_rng(0, 0x626e64, 0);
  Mat m = gaussian_probes(n, n, g);
  m /= m.norm();
  double lam = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Mat z = adj(op(m));
    const double nl = z.norm();
    if (nl == 0.0) break;
    m = z / nl;
    if (std::abs(nl - lam) <= 1e-13 * nl) {
      lam = nl;
      break;
    }
    lam = nl;
  }
  const SymEig ef = sym_eig(symmetrize(f));
  const double kappa = ef.values.maxCoeff() / ef.values.minCoeff();
  const double lq = sym_eig(symmetrize(q)).values.minCoeff();
  require(lq > 0.0, "gmres_iter_bound: Q must be positive definite");
  const double arg = (1.0 + std::sqrt(2.0)) * kappa * (xk * f * xk + q).norm() / lq;
  if (arg <= 1.0) return 0.0;
  const double ratio = hmax * hmax / lam;
  return 2.0 * std::log(arg) / -std::log1p(-ratio);
}

}  // namespace qscare
