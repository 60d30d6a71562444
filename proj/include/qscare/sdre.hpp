#pragma once

#include "qscare/banded.hpp"
#include "qscare/dac.hpp"
#include "qscare/error.hpp"
#include "qscare/generators.hpp"
#include "qscare/tink.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qscare {

enum class ModelStructure { banded, hierarchical, dense };
enum class SdreSolver { none, tink, dac, dense, closed_form };

std::string to_string(SdreSolver s);
SdreSolver sdre_solver_from_string(const std::string& s);

// Nonlinear system y' = rhs(y, u) whose feedback solves, at every state, the
// Riccati equation A(y)^T X + X A(y) - X F X + Q = 0 of order nr with
// F = B R^-1 B^T (possibly a reduced equation, see cucker_smale_model).
struct SdreModel {
  std::string name;
  Index n = 0;   // state
  Index m = 0;   // control
  Index nr = 0;  // order of the Riccati equation
  ModelStructure structure = ModelStructure::dense;

  std::function<Vec(const Vec& y, const Vec& u)> rhs;
  // Optional constant stiff linear part L with rhs = L y + explicit_rhs.
  std::optional<BandedMatrix> stiff;
  std::function<Vec(const Vec& y, const Vec& u)> explicit_rhs;
  std::function<double(const Vec& y, const Vec& u)> running_cost;

  std::function<DenseCare(const Vec& y)> care;
  std::function<BandedCare(const Vec& y)> care_banded;  // banded models
  std::function<Mat(const Vec& y)> closed_form;         // X(y) when known
  // Permutation p applied before structured solves: row i of the solved
  // problem is p[i] of the original.
  std::function<std::vector<Index>(const Vec& y)> ordering;
  // u(y) from x -> X x in the original ordering.
  std::function<Vec(const Vec& y, const std::function<Vec(const Vec&)>& apply_x)> control;
};

// Solver failure inside the loop, with the state it happened at.
struct SdreError : ConvergenceError {
  SdreError(const std::string& msg, Vec y);
  Vec state;
};

struct FeedbackStats {
  double seconds = 0.0;
  double structure = 0.0;  // bandwidth (tink) or max offdiagonal rank (dac)
  Index iterations = 0;
  double residual = -1.0;
  bool law_stated = true, law_krylov = true;  // tink bandwidth laws over all steps
};

struct FeedbackContext {
  SdreSolver solver = SdreSolver::closed_form;
  TinkOptions tink;
  DacOptions dac = [] {
    DacOptions o;
    o.residual = false;
    return o;
  }();
  double h_tol = 1e-10;  // compression of dense coefficients into HODLR form
  bool warm_start = true;
  std::optional<BandedMatrix> previous;  // last tink solution
  FeedbackStats last;
};

// u = -R^-1 B^T X(y) y for the configured solver.
Vec sdre_feedback(const SdreModel& model, const Vec& y, FeedbackContext& ctx);

enum class Integrator { imex, rk45 };

struct IntegratorOptions {
  Integrator kind = Integrator::imex;
  double dt = 0.01;        // imex step, rk45 initial step
  double rtol = 1e-8, atol = 1e-10;
  double dt_min = 1e-10;
  Index snapshot_stride = 1;  // full states kept every stride steps (0 = none)
};

struct Trajectory {
  std::vector<double> t;
  std::vector<double> state_norm, control_norm, cost;  // l2 norms, running cost
  std::vector<double> state_sup;
  std::vector<Vec> states, controls;  // snapshots
  std::vector<Index> snapshot_steps;
  std::vector<FeedbackStats> feedback;  // one per grid point
  Vec final_state;

  double total_cost() const { return cost.empty() ? 0.0 : cost.back(); }
  double mean_feedback_seconds() const;
  double mean_structure() const;
};

// The feedback is recomputed once per accepted step and held over it.
Trajectory integrate_closed_loop(const SdreModel& model, const Vec& y0, double t_end, const IntegratorOptions& opts,
                                 FeedbackContext& ctx);

// y' = A y + B u with constant coefficients, F = B R^-1 B^T.
SdreModel linear_model(const Mat& a, const Mat& b, const Mat& q, const Mat& r);

}  // namespace qscare
