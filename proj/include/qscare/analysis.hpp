#pragma once

#include "qscare/dense.hpp"

#include <vector>

namespace qscare {

// sigma(l-1) = max_j sigma_l(X(j+1:n, 1:j)) for l = 1..l_max.
struct DecayProfile {
  Vec sigma;
  Index n = 0;
  double norm_x = 0.0;  // ||X||_2
  Vec normalized() const { return norm_x > 0.0 ? Vec(sigma / norm_x) : sigma; }
  Vec relative() const { return sigma.size() && sigma(0) > 0.0 ? Vec(sigma / sigma(0)) : sigma; }
};

// Dense cap for the profile and qsrank.
inline constexpr Index kAnalysisDenseCap = 4000;

DecayProfile offdiag_singular_values(const Mat& x, Index l_max);

// min(1, 4 rho^-2h) with rho = exp(pi^2 / (2 log(4b/a))), for Z_h([-b,-a],[a,b]).
double zolotarev_interval_bound(Index h, double a, double b);

// Bound on sigma_index / ||X||_2.
struct DecayPoint {
  Index index = 1;  // h t + 1
  double bound = 1.0;
};

// A symmetric with spectrum in [-b,-a], F = I.
DecayPoint decay_bound_sym(Index h, double a, double b, double norm_q, Index r_a, Index r_q);
// Real numerical range of A inside [-beta, -alpha], F = I.
DecayPoint decay_bound_shifted(Index h, double alpha, double beta, double norm_q, Index r_a, Index r_q);

enum class FRankCase { low_rank_f, full_rank_f };

struct TtRankParams {
  double eps = 1e-6;
  double m = 1.0;      // radius of the state ball
  Index n = 2;
  double norm_x = 1.0;
  Index r_a = 1, r_f = 1, r_q = 1;
  FRankCase rank_case = FRankCase::low_rank_f;
  double kappa_f = 1.0;  // used in the full rank case
  double a = 1e-3, b = 1.0;  // E = [-b, -a]
};

struct TtRankBound {
  Index h = 0;
  Index c = 0;
  double threshold = 0.0;
  std::vector<Index> r;  // r[j-1] bounds the j-th TT rank, j = 1..n-1
};

Index tt_c(Index h, Index r_a, Index r_f, Index r_q, FRankCase rank_case);
TtRankBound tt_rank_bound(const TtRankParams& p);

// Max numerical rank over the maximal offdiagonal blocks, singular values
// above tol * ||M||_2.
Index qsrank(const Mat& m, double tol);

}  // namespace qscare
