#pragma once

#include "qscare/banded.hpp"
#include "qscare/dense.hpp"

#include <cstdint>
#include <random>

namespace qscare {

// n points, 10^a .. 10^b
Vec logspace(double a, double b, Index n);
Vec linspace(double a, double b, Index n);

// Stream for component k of instance (seed, tag); independent across k.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t k = 0);

// Q factor of the Hessenberg form of a Gaussian matrix, R diagonal made
// nonnegative. Upper Hessenberg and orthogonal.
Mat random_unitary_hessenberg(Index n, std::mt19937_64& rng);
// Q factor of a Gaussian matrix with r subdiagonals (zero below), same sign
// rule. Upper Hessenberg with r subdiagonals.
Mat random_unitary_banded_hessenberg(Index n, Index r, std::mt19937_64& rng);

struct DenseCare {
  Mat a, f, q;
};

// Tests 1-5 of the complexity study. test 5 uses r subdiagonals in W_5,
// the other tests ignore r.
DenseCare dac_test_instance(int test, Index n, Index r, std::uint64_t seed);

// T T^T / ||T T^T||_2 with T lower bidiagonal of ones.
BandedMatrix decay_q(Index n);

// Diagonal A with entries -logspace(-3, 0, n), F = I, Q = decay_q(n).
DenseCare decay_instance_real(Index n);

// kappa(F) sweep: F diagonal on [kappa^-1/2, kappa^1/2]; A = W D W^T with D
// as above, or W - 1.1 I when circle is set. Q = decay_q(n).
DenseCare decay_instance_kappa(Index n, double kappa, bool circle, std::uint64_t seed);

// A_0 = tridiag(1, -2, 1)
BandedMatrix laplacian_a0(Index n);

struct BandedCare {
  BandedMatrix a, f, q;
};

// Line-search study: A = A_0, Q = tridiag(0.48, 1, 0.48), F = L L^T with
// L = tridiag(0, 1, 0.1).
BandedCare linesearch_instance(Index n);

// tink vs dac: A = A_0, F diagonal on [kappa^-1/2, kappa^1/2],
// Q = tridiag(0.1, 1, 0.1).
BandedCare comparison_instance(Index n, double kappa);

// Random banded CARE: A with two sub/superdiagonals (not necessarily stable),
// F = L L^T with L lower bidiagonal, Q = M M^T + I/2 with M bidiagonal.
BandedCare random_banded_instance(Index n, std::uint64_t seed);

}  // namespace qscare
