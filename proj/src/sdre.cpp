#include "qscare/sdre.hpp"

#include "qscare/care_dense.hpp"
#include "qscare/error.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <boost/numeric/odeint.hpp>

#include <chrono>
#include <cmath>
#include <sstream>

namespace qscare {

namespace {

using Law = std::function<Vec(const Vec&)>;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Mat permuted(const Mat& m, const std::vector<Index>& p) {
  const Index n = m.rows();
  Mat out(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) out(i, j) = m(p[static_cast<size_t>(i)], p[static_cast<size_t>(j)]);
  return out;
}

std::string state_snapshot(const Vec& y) {
  std::ostringstream os;
  os << " (state norm " << y.norm() << ", first entries";
  for (Index i = 0; i < std::min<Index>(4, y.size()); ++i) os << ' ' << y(i);
  os << ')';
  return os.str();
}

Law law_from_x(const SdreModel& model, std::function<Vec(const Vec&)> apply_x) {
  return [&model, apply_x = std::move(apply_x)](const Vec& y) { return model.control(y, apply_x); };
}

// Gain frozen at y: returns the map y' -> u(y') with X(y) held fixed.
Law sdre_law(const SdreModel& model, const Vec& y, FeedbackContext& ctx) {
  require(y.size() == model.n, "sdre_feedback: state has the wrong length");
  ctx.last = {};
  if (ctx.solver == SdreSolver::none) {
    const Index m = model.m;
    return [m](const Vec&) { return Vec(Vec::Zero(m)); };
  }
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (ctx.solver) {
      case SdreSolver::closed_form: {
        require(static_cast<bool>(model.closed_form), "sdre_feedback: " + model.name + " has no closed form");
        Mat x = model.closed_form(y);
        ctx.last.seconds = seconds_since(t0);
        return law_from_x(model, [x = std::move(x)](const Vec& v) { return Vec(x * v); });
      }
      case SdreSolver::dense: {
        const DenseCare c = model.care(y);
        SolveReport rep;
        DenseCareOptions o;
        o.check_stability = false;
        Mat x = dense_care(c.a, c.f, c.q, &rep, o);
        ctx.last.seconds = seconds_since(t0);
        ctx.last.iterations = rep.iterations;
        ctx.last.residual = rep.final_residual;
        return law_from_x(model, [x = std::move(x)](const Vec& v) { return Vec(x * v); });
      }
      case SdreSolver::tink: {
        require(model.structure == ModelStructure::banded && model.care_banded,
                "sdre_feedback: tink needs a banded model");
        const BandedCare c = model.care_banded(y);
        std::optional<BandedMatrix> x0;
        if (ctx.warm_start && ctx.previous && ctx.previous->n() == c.a.n()) x0 = ctx.previous;
        TinkResult r;
        try {
          r = tink(c.a, c.f, c.q, ctx.tink, x0);
        } catch (const ConvergenceError&) {
          // the previous solution may not stabilize the new A(y)
          if (!x0) throw;
          r = tink(c.a, c.f, c.q, ctx.tink);
        }
        ctx.last.seconds = seconds_since(t0);
        ctx.last.structure = static_cast<double>(r.x.measured_bandwidth());
        ctx.last.iterations = r.report.iterations;
        ctx.last.residual = r.final_est;
        ctx.last.law_stated = r.law_stated_holds();
        ctx.last.law_krylov = r.law_krylov_holds();
        ctx.previous = r.x;
        return law_from_x(model, [x = std::move(r.x)](const Vec& v) { return x.matvec(v); });
      }
      case SdreSolver::dac: {
        const DenseCare c = model.care(y);
        std::vector<Index> p;
        if (model.ordering) p = model.ordering(y);
        const bool perm = !p.empty();
        const Index n_min = ctx.dac.n_min;
        auto to_h = [&](const Mat& m) { return HMatrix::from_dense(perm ? permuted(m, p) : m, ctx.h_tol, n_min); };
        DacResult r = dac_care(to_h(c.a), to_h(c.f), to_h(c.q), ctx.dac);
        ctx.last.seconds = seconds_since(t0);
        ctx.last.structure = static_cast<double>(r.x.max_rank());
        ctx.last.iterations = r.report.iterations;
        ctx.last.residual = r.report.final_residual;
        HMatrix x = std::move(r.x);
        return law_from_x(model, [x = std::move(x), p = std::move(p)](const Vec& v) {
          if (p.empty()) return Vec(x.apply(v));
          Vec w(v.size());
          for (size_t i = 0; i < p.size(); ++i) w(static_cast<Index>(i)) = v(p[i]);
          const Vec xw = x.apply(w);
          Vec out(v.size());
          for (size_t i = 0; i < p.size(); ++i) out(p[i]) = xw(static_cast<Index>(i));
          return out;
        });
      }
      case SdreSolver::none:
        break;
    }
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw SdreError(std::string("sdre_feedback: ") + to_string(ctx.solver) + " failed: " + e.what() +
                        state_snapshot(y),
                    y);
  }
  throw InputError("sdre_feedback: unknown solver");
}

struct Recorder {
  const SdreModel& model;
  const IntegratorOptions& opts;
  Trajectory& tr;
  Index step = 0;

  void point(double t, const Vec& y, const Vec& u, const FeedbackStats& fb) {
    const double c = model.running_cost ? model.running_cost(y, u) : 0.0;
    if (tr.t.empty()) {
      tr.cost.push_back(0.0);
    } else {
      // trapezoidal rule on the step grid
      const double h = t - tr.t.back();
      tr.cost.push_back(tr.cost.back() + 0.5 * h * (last_c + c));
    }
    last_c = c;
    tr.t.push_back(t);
    tr.state_norm.push_back(y.norm());
    tr.state_sup.push_back(y.size() ? y.cwiseAbs().maxCoeff() : 0.0);
    tr.control_norm.push_back(u.norm());
    tr.feedback.push_back(fb);
    if (opts.snapshot_stride > 0 && step % opts.snapshot_stride == 0) {
      tr.states.push_back(y);
      tr.controls.push_back(u);
      tr.snapshot_steps.push_back(step);
    }
    ++step;
  }
  void finish(const Vec& y, const Vec& u) {
    // the last point is always kept
    if (opts.snapshot_stride > 0 && (tr.snapshot_steps.empty() || tr.snapshot_steps.back() != step - 1)) {
      tr.states.push_back(y);
      tr.controls.push_back(u);
      tr.snapshot_steps.push_back(step - 1);
    }
    tr.final_state = y;
  }
  double last_c = 0.0;
};

Trajectory run_imex(const SdreModel& model, const Vec& y0, double t_end, const IntegratorOptions& opts,
                    FeedbackContext& ctx) {
  require(model.stiff && model.explicit_rhs, "integrate_closed_loop: imex needs a stiff part");
  require(opts.dt > 0.0, "integrate_closed_loop: dt must be positive");
  const Index steps = std::max<Index>(1, static_cast<Index>(std::ceil(t_end / opts.dt - 1e-9)));
  const double dt = t_end / static_cast<double>(steps);
  const Index n = model.n;
  // I - dt L, factored once
  const BandedMatrix& l = *model.stiff;
  std::vector<Eigen::Triplet<double>> trip;
  for (Index i = 0; i < n; ++i)
    for (Index j = std::max<Index>(0, i - l.lower()); j <= std::min(n - 1, i + l.upper()); ++j) {
      const double v = (i == j ? 1.0 : 0.0) - dt * l(i, j);
      if (v != 0.0) trip.emplace_back(i, j, v);
    }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(m);
  require(lu.info() == Eigen::Success, "integrate_closed_loop: I - dt L is singular");

  Trajectory tr;
  Recorder rec{model, opts, tr};
  Vec y = y0;
  Vec u;
  for (Index k = 0; k <= steps; ++k) {
    Law law = sdre_law(model, y, ctx);
    u = law(y);
    rec.point(static_cast<double>(k) * dt, y, u, ctx.last);
    if (k == steps) break;
    Vec rhs = y + dt * model.explicit_rhs(y, u);
    y = lu.solve(rhs);
    if (!y.allFinite()) throw ConvergenceError("integrate_closed_loop: non-finite state at t = " +
                                               std::to_string(static_cast<double>(k + 1) * dt));
  }
  rec.finish(y, u);
  return tr;
}

Trajectory run_rk45(const SdreModel& model, const Vec& y0, double t_end, const IntegratorOptions& opts,
                    FeedbackContext& ctx) {
  namespace ode = boost::numeric::odeint;
  using State = std::vector<double>;
  require(opts.dt > 0.0 && opts.rtol > 0.0 && opts.atol > 0.0, "integrate_closed_loop: bad rk45 options");
  auto stepper = ode::make_controlled(opts.atol, opts.rtol, ode::runge_kutta_dopri5<State>());
  const Index n = model.n;
  State s(y0.data(), y0.data() + n);
  Trajectory tr;
  Recorder rec{model, opts, tr};
  double t = 0.0, dt = std::min(opts.dt, t_end);
  Law law = sdre_law(model, y0, ctx);
  rec.point(0.0, y0, law(y0), ctx.last);
  auto sys = [&](const State& x, State& dxdt, double) {
    Eigen::Map<const Vec> xv(x.data(), n);
    const Vec yv = xv;
    const Vec f = model.rhs(yv, law(yv));
    dxdt.assign(f.data(), f.data() + n);
  };
  while (t < t_end * (1.0 - 1e-14)) {
    dt = std::min(dt, t_end - t);
    if (dt < opts.dt_min) throw ConvergenceError("integrate_closed_loop: step size underflow at t = " + std::to_string(t));
    if (stepper.try_step(sys, s, t, dt) == ode::success) {
      Eigen::Map<const Vec> yv(s.data(), n);
      if (!yv.allFinite()) throw ConvergenceError("integrate_closed_loop: non-finite state at t = " + std::to_string(t));
      const Vec y = yv;
      law = sdre_law(model, y, ctx);
      rec.point(t, y, law(y), ctx.last);
    }
  }
  Eigen::Map<const Vec> yv(s.data(), n);
  rec.finish(yv, law(Vec(yv)));
  return tr;
}

}  // namespace

SdreError::SdreError(const std::string& msg, Vec y) : ConvergenceError(msg), state(std::move(y)) {}

std::string to_string(SdreSolver s) {
  switch (s) {
    case SdreSolver::none: return "none";
    case SdreSolver::tink: return "tink";
    case SdreSolver::dac: return "dac";
    case SdreSolver::dense: return "dense";
    case SdreSolver::closed_form: return "closed_form";
  }
  return "?";
}

SdreSolver sdre_solver_from_string(const std::string& s) {
  for (SdreSolver v : {SdreSolver::none, SdreSolver::tink, SdreSolver::dac, SdreSolver::dense, SdreSolver::closed_form})
    if (to_string(v) == s) return v;
  throw InputError("unknown SDRE solver '" + s + "'");
}

Vec sdre_feedback(const SdreModel& model, const Vec& y, FeedbackContext& ctx) { return sdre_law(model, y, ctx)(y); }

double Trajectory::mean_feedback_seconds() const {
  if (feedback.empty()) return 0.0;
  double s = 0.0;
  for (const FeedbackStats& f : feedback) s += f.seconds;
  return s / static_cast<double>(feedback.size());
}

double Trajectory::mean_structure() const {
  if (feedback.empty()) return 0.0;
  double s = 0.0;
  for (const FeedbackStats& f : feedback) s += f.structure;
  return s / static_cast<double>(feedback.size());
}

Trajectory integrate_closed_loop(const SdreModel& model, const Vec& y0, double t_end, const IntegratorOptions& opts,
                                 FeedbackContext& ctx) {
  require(t_end > 0.0, "integrate_closed_loop: T must be positive");
  require(y0.size() == model.n, "integrate_closed_loop: initial state has the wrong length");
  return opts.kind == Integrator::imex ? run_imex(model, y0, t_end, opts, ctx) : run_rk45(model, y0, t_end, opts, ctx);
}

SdreModel linear_model(const Mat& a, const Mat& b, const Mat& q, const Mat& r) {
  const Index n = a.rows(), m = b.cols();
  require(a.cols() == n && b.rows() == n && q.rows() == n && q.cols() == n && r.rows() == m && r.cols() == m,
          "linear_model: shape mismatch");
  SdreModel md;
  md.name = "linear";
  md.n = n;
  md.m = m;
  md.nr = n;
  md.structure = ModelStructure::dense;
  const Mat rinv_bt = r.llt().solve(b.transpose());
  const Mat f = symmetrize(b * rinv_bt);
  md.rhs = [a, b](const Vec& y, const Vec& u) { return Vec(a * y + b * u); };
  md.running_cost = [q, r](const Vec& y, const Vec& u) { return y.dot(q * y) + u.dot(r * u); };
  md.care = [a, f, q](const Vec&) { return DenseCare{a, f, q}; };
  md.control = [rinv_bt](const Vec& y, const std::function<Vec(const Vec&)>& apply_x) {
    return Vec(-(rinv_bt * apply_x(y)));
  };
  return md;
}

}  // namespace qscare
