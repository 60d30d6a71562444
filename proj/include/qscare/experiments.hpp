#pragma once

#include "qscare/analysis.hpp"
#include "qscare/config.hpp"
#include "qscare/dac.hpp"
#include "qscare/models.hpp"
#include "qscare/tink.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace qscare {

// ---- building blocks shared with the acceptance suite

struct DecayRun {
  std::string instance;  // "real" or "kappa"
  double kappa = 1.0;
  DecayProfile profile;
  // per ell = 1..l_max, nan where the bound does not apply (F != I)
  std::vector<double> bound_sym, bound_shifted;
  double fwd = 0.0;  // ||X - X_closed||_2 / ||X||_2, real instance only
};
DecayRun decay_real_run(Index n, Index l_max);
DecayRun decay_kappa_run(Index n, double kappa, bool circle, std::uint64_t seed, Index l_max);

struct DacBenchRow {
  int test = 1;
  Index n = 0, r = 0;
  double seconds = 0.0;  // mean over repetitions, solve only
  double residual = -1.0;
  Index max_rank = 0;
  Index coeff_rank = 0;  // max offdiagonal rank of A after compression
  std::string status = "ok";
};
DacBenchRow dac_bench_row(int test, Index n, Index r, std::uint64_t seed, Index repetitions, const DacOptions& opts,
                          double h_tol);

TinkOptions linesearch_options(LineSearchMode mode, double tol, Index k_max, double zeta);
TinkResult linesearch_run(Index n, const TinkOptions& o);
// CG when kappa = 1, GMRES otherwise.
TinkOptions comparison_options(double kappa, double tol, Index k_max, double zeta);
TinkResult comparison_tink(Index n, double kappa, const TinkOptions& o);
DacResult comparison_dac(Index n, double kappa, Index n_min);

struct SdreRun {
  std::string solver;
  std::string ordering;  // cucker-smale dac only
  Trajectory tr;
  double seconds = 0.0;
};

// The half-length used by the acceptance run; see README.
inline constexpr double kAllenCahnAcceptanceL = 27.0;

SdreRun allen_cahn_run(const AllenCahnParams& p, SdreSolver solver, double t_end, double dt, double tink_tol,
                       Index snapshot_stride);

struct CuckerSmaleSettings {
  Index n_agents = 100;
  double t_end = 10.0, dt0 = 0.1, rtol = 1e-8, atol = 1e-10;
  Index n_min = 32;
  double dac_tol = 1e-10, h_tol = 1e-10;
  Index snapshot_stride = 0;
  std::uint64_t seed = 1;
};
FeedbackContext cucker_smale_context(SdreSolver solver, const CuckerSmaleSettings& s);
SdreRun cucker_smale_run(const CuckerSmaleSettings& s, SdreSolver solver, bool sorted);

// ---- subcommands: write CSV + .dat files under cfg.out, return the paths

struct ExperimentOutput {
  std::vector<std::string> files;
  Json summary = Json::object();
};

ExperimentOutput cmd_decay(const ExperimentConfig& cfg, std::ostream& log);
ExperimentOutput cmd_dac_bench(const ExperimentConfig& cfg, std::ostream& log);
ExperimentOutput cmd_tink_bench(const ExperimentConfig& cfg, std::ostream& log);
ExperimentOutput cmd_allen_cahn(const ExperimentConfig& cfg, std::ostream& log);
ExperimentOutput cmd_cucker_smale(const ExperimentConfig& cfg, std::ostream& log);

// Dispatches on cfg.experiment (all but verify).
ExperimentOutput run_experiment(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace qscare
