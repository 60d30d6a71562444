#include "qscare/analysis.hpp"

#include "qscare/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qscare {

DecayProfile offdiag_singular_values(const Mat& x, Index l_max) {
  const Index n = x.rows();
  require(x.cols() == n, "offdiag_singular_values: matrix must be square");
  require(n <= kAnalysisDenseCap, "offdiag_singular_values: order above the dense cap");
  require(l_max >= 1, "offdiag_singular_values: l_max must be positive");
  DecayProfile p;
  p.n = n;
  p.sigma = Vec::Zero(l_max);
  p.norm_x = n ? norm2(x) : 0.0;
  std::vector<Vec> per(static_cast<size_t>(std::max<Index>(n - 1, 0)));
#pragma omp parallel for schedule(dynamic)
  for (Index j = 1; j < n; ++j) per[static_cast<size_t>(j - 1)] = singular_values(x.bottomLeftCorner(n - j, j));
  for (const Vec& s : per)
    for (Index l = 0; l < std::min(l_max, s.size()); ++l) p.sigma(l) = std::max(p.sigma(l), s(l));
  return p;
}

double zolotarev_interval_bound(Index h, double a, double b) {
  require(a > 0.0 && a < b, "zolotarev_interval_bound: need 0 < a < b");
  require(h >= 0, "zolotarev_interval_bound: h must be nonnegative");
  if (h == 0) return 1.0;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double log_rho = pi2 / (2.0 * std::log(4.0 * b / a));
  // 4 rho^-2h in log form, no overflow for large h
  return std::min(1.0, std::exp(std::log(4.0) - 2.0 * static_cast<double>(h) * log_rho));
}

DecayPoint decay_bound_sym(Index h, double a, double b, double norm_q, Index r_a, Index r_q) {
  const Index t = 4 * r_a + 2 * r_q;
  require(t >= 1, "decay_bound_sym: t must be >= 1");
  require(norm_q >= 0.0, "decay_bound_sym: ||Q||_2 must be nonnegative");
  return {h * t + 1, zolotarev_interval_bound(h, a, std::sqrt(b * b + norm_q))};
}

DecayPoint decay_bound_shifted(Index h, double alpha, double beta, double norm_q, Index r_a, Index r_q) {
  const Index t = 4 * r_a + 2 * r_q;
  require(t >= 1, "decay_bound_shifted: t must be >= 1");
  require(alpha > 0.0 && alpha <= beta, "decay_bound_shifted: the interval must lie in the open left half plane");
  require(norm_q >= 0.0, "decay_bound_shifted: ||Q||_2 must be nonnegative");
  const double tau = beta;
  const double lo = beta + tau + std::sqrt(tau * tau + norm_q);
  const double k = (1.0 + std::numbers::sqrt2) * (1.0 + std::numbers::sqrt2);
  return {h * t + 1, std::min(k, k * zolotarev_interval_bound(h, alpha, lo))};
}

Index tt_c(Index h, Index r_a, Index r_f, Index r_q, FRankCase rank_case) {
  return rank_case == FRankCase::low_rank_f ? 2 * h * r_a + r_f + r_q : h * (4 * r_a + 6 * r_f + 2 * r_q) + r_f;
}

TtRankBound tt_rank_bound(const TtRankParams& p) {
  require(p.eps > 0.0 && p.m > 0.0 && p.norm_x > 0.0 && p.n >= 2, "tt_rank_bound: positive inputs required");
  require(p.r_a >= 0 && p.r_f >= 0 && p.r_q >= 0, "tt_rank_bound: ranks must be nonnegative");
  require(p.kappa_f >= 1.0, "tt_rank_bound: kappa(F) must be at least 1");
  const double k = (1.0 + std::numbers::sqrt2) * (1.0 + std::numbers::sqrt2);
  double den = 2.0 * k * p.m * p.m * p.norm_x * std::sqrt(static_cast<double>(p.n));
  if (p.rank_case == FRankCase::full_rank_f) den *= p.kappa_f;
  TtRankBound out;
  out.threshold = p.eps / den;
  const Index h_cap = 1000000;
  Index h = 0;
  while (zolotarev_interval_bound(h, p.a, p.b) > out.threshold) {
    if (++h > h_cap) throw ConvergenceError("tt_rank_bound: threshold unreachable within h <= 1e6");
  }
  out.h = h;
  out.c = tt_c(h, p.r_a, p.r_f, p.r_q, p.rank_case);
  out.r.resize(static_cast<size_t>(p.n - 1));
  for (Index j = 1; j < p.n; ++j) out.r[static_cast<size_t>(j - 1)] = std::min(out.c, std::min(j, p.n - j)) + 2;
  return out;
}

Index qsrank(const Mat& m, double tol) {
  const Index n = m.rows();
  require(m.cols() == n, "qsrank: matrix must be square");
  require(n <= kAnalysisDenseCap, "qsrank: order above the dense cap");
  require(tol >= 0.0, "qsrank: tol must be nonnegative");
  if (n < 2) return 0;
  const double cut = tol * norm2(m);
  Index r = 0;
#pragma omp parallel for schedule(dynamic) reduction(max : r)
  for (Index j = 1; j < n; ++j) {
    for (int side = 0; side < 2; ++side) {
      const Vec s = singular_values(side ? Mat(m.topRightCorner(j, n - j)) : Mat(m.bottomLeftCorner(n - j, j)));
      r = std::max(r, static_cast<Index>((s.array() > cut).count()));
    }
  }
  return r;
}

}  // namespace qscare
