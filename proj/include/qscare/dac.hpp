#pragma once

#include "qscare/care_dense.hpp"
#include "qscare/eksm.hpp"
#include "qscare/hmatrix.hpp"

#include <vector>

namespace qscare {

struct DacOptions {
  Index n_min = 250;
  double tol = 1e-10;       // compression of offdiagonal blocks and sums
  double eksm_tol = 1e-8;
  Index s_max = 100;
  bool parallel = true;     // children as OpenMP tasks
  bool residual = true;     // dense Res at the end, only up to residual_cap
  Index residual_cap = 4096;
};

// One merge step of the recursion.
struct DacMerge {
  int level = 0;           // 0 = root
  Index offset = 0, n = 0;
  Index rhs_rank_raw = 0;  // before recompression
  Index rhs_rank = 0;
  Index eksm_steps = 0;
  double eksm_residual = 0.0;
  Index dx_rank = 0;
};

struct DacResult {
  HMatrix x;
  SolveReport report;
  std::vector<DacMerge> merges;  // children before parents, left before right
};

DacResult dac_care(const HMatrix& a, const HMatrix& f, const HMatrix& q, const DacOptions& opts = {});

struct CorrectionRhs {
  Mat u, d;
  Index raw_rank = 0;
};

// U D U^T = -dQ - dA^T X0 - X0 dA + X0 dF X0, with U = [U_Q, V_A, X0 U_A, X0 U_F].
// recompress_tol <= 0 keeps the raw factorization.
CorrectionRhs assemble_correction_rhs(const HMatrix& x0, const LowRankFactor& da, const LowRankFactor& df,
                                      const LowRankFactor& dq, double recompress_tol);

// ||A^T X + X A - X F X + Q||_F / ||Q||_F evaluated densely.
double dac_residual(const HMatrix& a, const HMatrix& f, const HMatrix& q, const HMatrix& x);

}  // namespace qscare
