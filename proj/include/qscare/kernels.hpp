#pragma once

// OpenMP kernels and their serial references. Each pair performs the same
// arithmetic in the same order per output entry, so results are bitwise equal.

#include "qscare/banded.hpp"

namespace qscare::kernels {

BandedMatrix band_multiply_serial(const BandedMatrix& a, const BandedMatrix& b);
BandedMatrix band_multiply_parallel(const BandedMatrix& a, const BandedMatrix& b);

Mat band_apply_serial(const BandedMatrix& a, const Mat& x);
Mat band_apply_parallel(const BandedMatrix& a, const Mat& x);

// max_j sigma_l(X(j+1:n, 1:j)) for l = 1..lmax (zero padded).
Vec offdiag_sv_serial(const Mat& x, Index lmax);
Vec offdiag_sv_parallel(const Mat& x, Index lmax);

// Threads used by the parallel kernels (0 keeps the OpenMP default).
void set_threads(int n);
int threads();

}  // namespace qscare::kernels
