#pragma once

#include "qscare/sdre.hpp"

#include <cstdint>

namespace qscare {

struct AllenCahnParams {
  Index n = 500;
  double half_length = 1.0;  // domain [-L, L]
  double sigma = 1e-3;
  double gamma_tilde = 0.1;
};

// Neumann Laplacian on n points with spacing dx, ghost-point closure.
BandedMatrix neumann_laplacian(Index n, double dx);

SdreModel allen_cahn_model(const AllenCahnParams& p);
double allen_cahn_dx(const AllenCahnParams& p);
// sin(pi x_i), x_i = -L + (i-1) dx
Vec allen_cahn_initial(const AllenCahnParams& p);

// Interaction matrix: off-diagonal K(y_i,y_j)/N, zero row sums.
Mat cucker_smale_interaction(const Vec& positions);
// (sqrt(A^2 + 3I) + A) / N
Mat cucker_smale_x22(const Mat& interaction);
// Positions sorted ascending (stable).
std::vector<Index> sort_positions(const Vec& positions);

// State [y; v] of length 2N, control of length N, reduced equation for X_22.
SdreModel cucker_smale_model(Index n_agents, bool sort = true);
// Entries uniform in [0, 1].
Vec cucker_smale_initial(Index n_agents, std::uint64_t seed);

}  // namespace qscare
