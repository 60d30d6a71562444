#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>

namespace qscare {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

struct SymEig {
  Vec values;  // ascending
  Mat vectors;
};

// Relative symmetry defect ||M - M^T||_F / ||M||_F (0 for M = 0).
double asymmetry(const Mat& m);
bool all_finite(const Mat& m);
Mat symmetrize(const Mat& m);

SymEig sym_eig(const Mat& m);

// Principal square root of a symmetric PSD matrix. Eigenvalues down to
// -1e-12*||M||_2 are clamped to zero, anything more negative throws.
Mat sqrtm_spd(const Mat& m);

double norm2(const Mat& m);  // spectral norm, dense SVD

struct ThinSvd {
  Mat u;
  Vec s;  // descending
  Mat v;
};
// Divide-and-conquer SVD, redone with one-sided Jacobi when the fast path
// returns non-finite values (seen with Eigen 3.4 on some rank-deficient input).
ThinSvd svd_thin(const Mat& m);
Vec singular_values(const Mat& m);

// Solves A^T X + X A = C by a real Schur decomposition of A
// (Bartels-Stewart). A must have no pair of eigenvalues summing to zero.
Mat solve_lyapunov(const Mat& a, const Mat& c);

// Thin orthonormal basis of range(M) with columns kept while the pivoted R
// diagonal exceeds rel_tol times the largest column norm.
Mat orth(const Mat& m, double rel_tol = 1e-12);

// Maximum real part of the spectrum of a general square matrix.
double spectral_abscissa(const Mat& m);

}  // namespace qscare
