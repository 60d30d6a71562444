#include "qscare/dac.hpp"

#include "qscare/error.hpp"

#include <omp.h>

#include <chrono>
#include <exception>
#include <random>
#include <string>

namespace qscare {

namespace {

// Failure below the root, already labelled with its block.
struct DacError : ConvergenceError {
  using ConvergenceError::ConvergenceError;
};

// Symmetric U D U^T form of a factor known to represent a symmetric matrix.
void as_symmetric(const LowRankFactor& l, Mat& u, Mat& d) {
  if (l.symmetric) {
    u = l.u;
    d = l.d;
    return;
  }
  const Index r = l.rank();
  u.resize(l.rows(), 2 * r);
  u << l.u, l.v;
  d = Mat::Zero(2 * r, 2 * r);
  d.topRightCorner(r, r) = 0.5 * l.d;
  d.bottomLeftCorner(r, r) = 0.5 * l.d.transpose();
}

void check_symmetric_probe(const HMatrix& m, const char* name) {
  if (m.n() == 0) return;
  std::mt19937_64 g(7);
  std::normal_distribution<double> nd;
  Mat w(m.n(), 2);
  for (Index j = 0; j < 2; ++j)
    for (Index i = 0; i < m.n(); ++i) w(i, j) = nd(g);
  Mat y = m.apply(w), yt = m.apply_transpose(w);
  // only catches a wrong argument; block compression leaves asymmetry of the order of tol
  require((y - yt).norm() <= 1e-6 * y.norm() || y.norm() == 0.0,
          std::string("dac_care: ") + name + " must be symmetric");
}

struct Solver {
  const DacOptions& opts;
  EksmOptions eksm;
  DenseCareOptions base;

  explicit Solver(const DacOptions& o) : opts(o) {
    eksm.tol = o.eksm_tol;
    eksm.s_max = o.s_max;
    base.check_inputs = false;
    base.check_stability = false;
    base.refine = true;
  }

  std::string where(int level, Index offset, Index n) const {
    return "dac_care: level " + std::to_string(level) + ", block [" + std::to_string(offset) + ", " +
           std::to_string(offset + n) + "): ";
  }

  HMatrix leaf_solve(const HMatrix& a, const HMatrix& f, const HMatrix& q) const {
    if (a.is_leaf()) return HMatrix::leaf(dense_care(a.dense(), f.dense(), q.dense(), nullptr, base));
    Mat x = dense_care(a.to_dense(), f.to_dense(), q.to_dense(), nullptr, base);
    return hm_reproject(HMatrix::leaf(std::move(x)), a, opts.tol);
  }

  HMatrix merge(const HMatrix& a, const HMatrix& f, const HSplit& sa, const HSplit& sf, const HSplit& sq,
                HMatrix x0, DacMerge& info) const {
    CorrectionRhs rhs = assemble_correction_rhs(x0, sa.delta, sf.delta, sq.delta, opts.tol);
    info.rhs_rank_raw = rhs.raw_rank;
    info.rhs_rank = rhs.u.cols();
    if (rhs.u.cols() == 0) return x0;
    HMatrix acl = hm_axpby(1.0, a, -1.0, hm_matmul(f, x0, opts.tol), opts.tol);
    EksmResult dx = eksm_care(EksmOperators::hierarchical(acl, f), rhs.u, rhs.d, eksm);
    info.eksm_steps = dx.steps;
    info.eksm_residual = dx.residual;
    info.dx_rank = dx.dx.rank();
    return hm_symmetrize(hm_lowrank_update(x0, dx.dx, opts.tol), opts.tol);
  }

  HMatrix solve(const HMatrix& a, const HMatrix& f, const HMatrix& q, int level, Index offset,
                std::vector<DacMerge>& merges) const {
    const Index n = a.n();
    if (a.is_leaf() || n <= opts.n_min) {
      try {
        return leaf_solve(a, f, q);
      } catch (const InputError& e) {
        throw InputError(where(level, offset, n) + e.what());
      } catch (const std::exception& e) {
        throw DacError(where(level, offset, n) + e.what());
      }
    }
    HSplit sa = hm_split(a), sf = hm_split_symmetric(f), sq = hm_split_symmetric(q);
    const Index s = a.split();
    std::vector<DacMerge> m1, m2;
    HMatrix x11, x22;
    std::exception_ptr e1, e2;
    auto left = [&] {
      try {
        x11 = solve(sa.h11, sf.h11, sq.h11, level + 1, offset, m1);
      } catch (...) {
        e1 = std::current_exception();
      }
    };
    auto right = [&] {
      try {
        x22 = solve(sa.h22, sf.h22, sq.h22, level + 1, offset + s, m2);
      } catch (...) {
        e2 = std::current_exception();
      }
    };
    if (opts.parallel && omp_in_parallel()) {
#pragma omp task default(shared)
      left();
      right();
#pragma omp taskwait
    } else {
      left();
      right();
    }
    if (e1) std::rethrow_exception(e1);
    if (e2) std::rethrow_exception(e2);

    DacMerge info;
    info.level = level;
    info.offset = offset;
    info.n = n;
    HMatrix x;
    try {
      x = merge(a, f, sa, sf, sq, hm_block_diag(x11, x22), info);
    } catch (const InputError& e) {
      throw InputError(where(level, offset, n) + e.what());
    } catch (const std::exception& e) {
      throw DacError(where(level, offset, n) + e.what());
    }
    merges.insert(merges.end(), m1.begin(), m1.end());
    merges.insert(merges.end(), m2.begin(), m2.end());
    merges.push_back(info);
    return x;
  }
};

}  // namespace

CorrectionRhs assemble_correction_rhs(const HMatrix& x0, const LowRankFactor& da, const LowRankFactor& df,
                                      const LowRankFactor& dq, double recompress_tol) {
  const Index n = x0.n();
  require(da.rows() == n && da.cols() == n && df.rows() == n && df.cols() == n && dq.rows() == n && dq.cols() == n,
          "assemble_correction_rhs: shape mismatch");
  Mat uq, dqd, uf, dfd;
  as_symmetric(dq, uq, dqd);
  as_symmetric(df, uf, dfd);
  // dA = U_A V_A^T with the core folded into U_A
  Mat ua = da.u * da.d;
  const Mat& va = da.v;
  const Index rq = uq.cols(), ra = ua.cols(), rf = uf.cols();
  const Index r = rq + 2 * ra + rf;

  CorrectionRhs out;
  out.raw_rank = r;
  out.u.resize(n, r);
  out.d = Mat::Zero(r, r);
  if (rq > 0) out.u.leftCols(rq) = uq;
  if (ra > 0) {
    out.u.middleCols(rq, ra) = va;
    out.u.middleCols(rq + ra, ra) = x0.apply(ua);
  }
  if (rf > 0) out.u.rightCols(rf) = x0.apply(uf);
  out.d.topLeftCorner(rq, rq) = -dqd;
  out.d.block(rq, rq + ra, ra, ra) = -Mat::Identity(ra, ra);
  out.d.block(rq + ra, rq, ra, ra) = -Mat::Identity(ra, ra);
  out.d.bottomRightCorner(rf, rf) = dfd;
  if (recompress_tol > 0.0 && r > 0) {
    LowRankFactor c = lowrank_recompress(LowRankFactor::sym(out.u, out.d), recompress_tol);
    out.u = std::move(c.u);
    out.d = std::move(c.d);
  }
  return out;
}

DacResult dac_care(const HMatrix& a, const HMatrix& f, const HMatrix& q, const DacOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  require(!a.empty() && !f.empty() && !q.empty(), "dac_care: empty coefficient");
  require(a.n() == f.n() && a.n() == q.n(), "dac_care: A, F, Q must have the same order");
  require(opts.tol > 0.0 && opts.eksm_tol > 0.0 && opts.n_min >= 1 && opts.s_max >= 1, "dac_care: invalid options");
  check_symmetric_probe(f, "F");
  check_symmetric_probe(q, "Q");
  HMatrix fr = hm_reproject(f, a, opts.tol), qr = hm_reproject(q, a, opts.tol);

  Solver solver(opts);
  DacResult out;
  std::exception_ptr err;
  if (opts.parallel && !omp_in_parallel() && omp_get_max_threads() > 1) {
#pragma omp parallel
#pragma omp single
    {
      try {
        out.x = solver.solve(a, fr, qr, 0, 0, out.merges);
      } catch (...) {
        err = std::current_exception();
      }
    }
  } else {
    try {
      out.x = solver.solve(a, fr, qr, 0, 0, out.merges);
    } catch (...) {
      err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);

  SolveReport& rep = out.report;
  rep.iterations = static_cast<Index>(out.merges.size());
  for (const DacMerge& m : out.merges) {
    rep.residuals.push_back(m.eksm_residual);
    rep.structure.push_back(m.dx_rank);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (opts.residual && a.n() <= opts.residual_cap) {
    rep.final_residual = dac_residual(a, f, q, out.x);
  } else {
    rep.notes.emplace_back("global residual not computed");
  }
  return out;
}

double dac_residual(const HMatrix& a, const HMatrix& f, const HMatrix& q, const HMatrix& x) {
  return riccati_residual(a.to_dense(), f.to_dense(), q.to_dense(), x.to_dense()).relative;
}

}  // namespace qscare
