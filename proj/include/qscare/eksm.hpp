#pragma once

#include "qscare/care_dense.hpp"
#include "qscare/hmatrix.hpp"
#include "qscare/lowrank.hpp"

#include <functional>

namespace qscare {

// Actions needed to build EK_s(A_cl^T, U) and project F.
struct EksmOperators {
  Index n = 0;
  std::function<Mat(const Mat&)> apply_t;  // A_cl^T X
  std::function<Mat(const Mat&)> solve_t;  // A_cl^{-T} X
  std::function<Mat(const Mat&)> apply_f;  // F X

  static EksmOperators dense(const Mat& acl, const Mat& f);
  static EksmOperators hierarchical(const HMatrix& acl, const HMatrix& f);
};

struct EksmOptions {
  double tol = 1e-8;
  Index s_max = 100;
  double deflation_tol = 1e-12;
  // false: return the step-s_max iterate with its residual instead of throwing
  bool throw_on_s_max = true;
};

// Basis and projections after s steps; enough to evaluate the residual.
struct EksmState {
  Mat v;     // orthonormal basis, n x k
  Mat atv;   // A_cl^T V
  Mat fv;    // F V
  Mat u, d;  // right-hand side U D U^T
  Mat y;     // projected solution, k x k
  Index steps = 0;
};

struct EksmResult {
  LowRankFactor dx;  // V Y V^T
  SolveReport report;
  Index steps = 0;
  double residual = 0.0;  // relative, at exit
};

// Solves A_cl^T dX + dX A_cl - dX F dX = U D U^T by Galerkin projection on
// the extended Krylov space.
EksmResult eksm_care(const EksmOperators& op, const Mat& u, const Mat& d, const EksmOptions& opts = {});

// Exact Frobenius norm of the full residual for the current projected
// solution (absolute).
double eksm_residual(const EksmState& st);

}  // namespace qscare
