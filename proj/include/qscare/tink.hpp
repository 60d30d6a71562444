#pragma once

#include "qscare/banded.hpp"
#include "qscare/care_dense.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace qscare {

// A_cl^T M + M A_cl
BandedMatrix lyap_apply(const BandedMatrix& acl, const BandedMatrix& m);

// 2 sqrt(2/pi) max_i ||M w_i||_2 over Gaussian probes; an upper bound for
// ||M||_2 with probability >= 1 - 2^-probes.
double prob_norm_est(const std::function<Mat(const Mat&)>& apply, Index n, Index probes, std::mt19937_64& rng);
// Same estimate from precomputed products Y = M * Omega.
double prob_norm_from_products(const Mat& y);
Mat gaussian_probes(Index n, Index probes, std::mt19937_64& rng);

// Norm used for inner exit decisions.
enum class InnerNorm { probe, frobenius };

struct InnerOptions {
  double stop_norm = 1e-8;
  Index min_iters = 5;
  Index max_iters = 200;
  InnerNorm norm = InnerNorm::probe;
  const Mat* probes = nullptr;  // Omega for InnerNorm::probe (n x p)
};

struct InnerResult {
  BandedMatrix x;         // approximate solution of A_cl^T X + X A_cl = rhs
  Index iters = 0;
  BandedMatrix residual;  // A_cl^T X + X A_cl - rhs, evaluated explicitly
  double est_residual = 0.0;  // value used at exit
  double fro_residual = 0.0;  // ||residual||_F
  bool converged = false;
  bool stagnated = false;
  bool indefinite = false;  // cg only: negative curvature met
  std::vector<double> history;  // recursive residual norm per iteration
};

// Full GMRES on the matrix form with the Frobenius inner product, zero initial guess.
InnerResult gmres_lyap(const BandedMatrix& acl, const BandedMatrix& rhs, const InnerOptions& opts);
// CG on -(A_cl^T X + X A_cl) = -rhs; needs symmetric A_cl with negative definite operator.
InnerResult cg_lyap(const BandedMatrix& acl, const BandedMatrix& rhs, const InnerOptions& opts);

struct LineSearchResult {
  double lambda = 1.0;
  double value = 0.0;      // ||(1-l)R + l Rhat - l^2 V||_F at lambda
  bool sufficient = false; // value <= (1 - lambda alpha) ||R||_F
  double coeffs[5] = {0, 0, 0, 0, 0};  // f(l) = sum c_i l^i
};

// Minimizes ||(1-l)R + l Rhat - l^2 V||_F^2 over (0,1]; clamped to [1e-4, 1].
LineSearchResult line_search(const BandedMatrix& r, const BandedMatrix& rhat, const BandedMatrix& v, double alpha);

struct TruncContext {
  const BandedMatrix* a;
  const BandedMatrix* f;
  const BandedMatrix* q;
  const BandedMatrix* xk;
  const BandedMatrix* acl;
  double lambda_min_q = 0.0;
  double zeta = 0.0;
  double riccati_est = 0.0;  // estimate of ||R(X_k)||_2
  const Mat* probes = nullptr;
};

struct TruncResult {
  BandedMatrix x;
  Index s = 0;
  double care_est = 0.0;  // estimate of ||R(T_s(X))||_2
  double lyap_est = 0.0;  // estimate of the Lyapunov residual of T_s(X)
  bool truncated = false;
};

// Smallest s in {s0, s0+step, ...} whose T_s(x_cand) passes both conditions.
TruncResult greedy_truncate(const BandedMatrix& x_cand, const TruncContext& ctx, Index s0 = 8, Index step = 5);

// Smallest eigenvalue by bisection on LDL^T inertia counts.
double lambda_min_banded(const BandedMatrix& q, double rel_tol = 1e-8);
// Number of eigenvalues of the symmetric banded q below sigma.
Index inertia_below(const BandedMatrix& q, double sigma);

// Rightmost real part: dense below 500, otherwise a 30-step Arnoldi estimate.
double rightmost_estimate(const BandedMatrix& a, std::uint64_t seed = 0);

struct StabilizingInit {
  BandedMatrix x0;
  double c = 0.0;
  bool a_stable = false;
};
// zero_if_stable returns 0 for stable A; minimize searches c >= 0 in every case.
enum class InitRule { zero_if_stable, minimize };
StabilizingInit stabilizing_init(const BandedMatrix& a, const BandedMatrix& f, const BandedMatrix& q,
                                 std::uint64_t seed = 0, InitRule rule = InitRule::zero_if_stable);

enum class LineSearchMode { none, first, all };
enum class InnerSolver { gmres, cg };

struct TinkOptions {
  double tol = 1e-12;
  Index k_max = 50;
  LineSearchMode linesearch = LineSearchMode::first;
  bool truncation = true;
  double alpha = 1e-4;
  double zeta = 0.1;  // 0 lets probe noise accept truncations that make no progress
  Index s0 = 8;
  Index s_step = 5;
  Index min_inner = 5;
  Index max_inner = 200;
  Index probes = 10;
  std::uint64_t seed = 0;
  InnerSolver inner = InnerSolver::gmres;
  InitRule init = InitRule::minimize;  // used when no X0 is given
  // Also require ||R_hat||_2 <= eta_k ||R(X_k)||_2 with eta_k = min(forcing_max, ||R(X_k)||^1/2).
  bool forcing = false;
  double forcing_max = 0.1;
  bool throw_on_k_max = true;
  std::function<void(Index, const BandedMatrix&)> on_iterate;  // called with every accepted iterate
};

struct TinkIteration {
  Index k = 0;
  double riccati_est = 0.0;  // estimate of ||R(X_k)||_2 at the start of step k
  double riccati_fro = 0.0;  // exact ||R(X_k)||_F
  Index inner_iters = 0;
  bool inner_cg = false;
  double lyap_est = 0.0;     // estimate of ||R_hat_{k+1}||_2 at inner exit
  double lyap_fro = 0.0;
  double stop_norm = 0.0;
  double lambda = 1.0;
  bool ls_sufficient = true;
  Index s = 0;               // truncation parameter, n when not truncating
  double care_est_next = 0.0;  // estimate of ||R(X_{k+1})||_2 with this step's probes
  double lyap_est_next = 0.0;
  bool truncated = false;
  Index bw_xk = 0;           // measured bandwidth of X_k
  Index bw_acl = 0;
  Index bw_hat = 0;          // measured bandwidth of X_hat_{k+1}
  Index bw_next = 0;         // measured bandwidth of X_{k+1}
  Index law_stated = 0;      // (it-1) b_a + b_f + b_q + 2 s_k
  Index law_krylov = 0;      // max(s_k, bw(R_k) + (it-1) bw(A_cl))
};

struct TinkResult {
  BandedMatrix x;
  SolveReport report;
  std::vector<TinkIteration> steps;
  double lambda_min_q = 0.0;
  double init_c = 0.0;
  bool converged = false;
  double final_est = 0.0;
  bool law_stated_holds() const;
  bool law_krylov_holds() const;
};

TinkResult tink(const BandedMatrix& a, const BandedMatrix& f, const BandedMatrix& q, const TinkOptions& opts = {},
                const std::optional<BandedMatrix>& x0 = std::nullopt);

// Right side of the GMRES iteration bound at iterate x_k (dense, n <= 200),
// with F = L L^T. Returns 0 when the log argument is at most one.
double gmres_iter_bound(const Mat& a, const Mat& f, const Mat& q, const Mat& x_k);

}  // namespace qscare
