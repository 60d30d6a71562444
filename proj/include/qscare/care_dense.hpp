#pragma once

#include "qscare/structured.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qscare {

// Coefficients of A^T X + X A - X F X + Q = 0.
struct CareProblem {
  StructuredMatrix a, f, q;

  CareProblem() = default;
  CareProblem(StructuredMatrix a_, StructuredMatrix f_, StructuredMatrix q_);

  Index n() const { return order(a); }
  Structure structure() const { return structure_of(a); }
  // Shapes, symmetry of F and Q, and (for dense data up to 1000) PSD-ness.
  void validate() const;
};

struct SolveReport {
  Index iterations = 0;
  std::vector<double> residuals;   // solver-specific residual per iteration
  std::vector<Index> structure;    // rank or bandwidth per iteration
  double seconds = 0.0;
  double final_residual = -1.0;    // relative Frobenius residual when computed
  std::optional<bool> closed_loop_stable;
  std::vector<std::string> notes;
};

struct DenseCareOptions {
  Index dense_cap = 2000;
  bool check_inputs = true;       // F, Q symmetric PSD
  bool check_stability = true;    // eigenvalues of A - F X, only for n <= 500
  bool refine = true;             // Newton correction steps after extraction
  double refine_target = 1e-13;
  int max_sign_iters = 100;
};

// Matrix sign function of the Hamiltonian with determinant scaling, then a
// least-squares solve for the stable invariant subspace.
Mat dense_care(const Mat& a, const Mat& f, const Mat& q, SolveReport* report = nullptr,
               const DenseCareOptions& opts = {});
Mat dense_care(const CareProblem& p, SolveReport* report = nullptr, const DenseCareOptions& opts = {});

// gamma * (sqrt(A^2 + Q/gamma) + A), the solution for F = I/gamma and symmetric A.
Mat care_closed_form_sym(const Mat& a, const Mat& q, double gamma);

struct DenseResidual {
  Mat r;
  double relative;  // ||R||_F / ||Q||_F, or ||R||_F when Q = 0
};
DenseResidual riccati_residual(const Mat& a, const Mat& f, const Mat& q, const Mat& x);
DenseResidual riccati_residual(const CareProblem& p, const StructuredMatrix& x);

struct BandedResidual {
  BandedMatrix r;
  double relative;
};
BandedResidual riccati_residual(const BandedMatrix& a, const BandedMatrix& f, const BandedMatrix& q,
                                const BandedMatrix& x);

// (tau + sqrt(tau^2 + |F| |Q|)) / lambda_min(F), an upper bound for |X|_2.
double sol_norm_bound(double tau, double norm_f, double norm_q, double lmin_f);

}  // namespace qscare
