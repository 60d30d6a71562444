#include "qscare/experiments.hpp"

#include "qscare/care_dense.hpp"
#include "qscare/csv.hpp"
#include "qscare/error.hpp"
#include "qscare/generators.hpp"
#include "qscare/kernels.hpp"
#include "qscare/serialize.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>

#include <omp.h>

namespace qscare {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

// bound for sigma_ell: the last bound point with index <= ell
template <class F>
std::vector<double> staircase(Index l_max, F bound_at) {
  std::vector<double> out(static_cast<size_t>(l_max), kNan);
  for (Index h = 0;; ++h) {
    const DecayPoint p = bound_at(h);
    if (p.index > l_max) break;
    for (Index l = p.index; l <= l_max; ++l) out[static_cast<size_t>(l - 1)] = p.bound;
    if (p.bound == 0.0) break;
  }
  return out;
}

std::string stem(const ExperimentConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out) / name).string();
}

// Solutions go to <out>/checkpoints/<name>.qscr.
template <class M>
std::string checkpoint(const ExperimentConfig& cfg, const std::string& name, const M& x) {
  const std::filesystem::path dir = std::filesystem::path(cfg.out) / "checkpoints";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / (name + ".qscr")).string();
  save(path, x);
  return path;
}

std::string lower_snake(std::string s) {
  for (char& c : s)
    if (c == '-') c = '_';
  return s;
}

SdreSolver solver_of(const std::string& s) { return sdre_solver_from_string(s); }

void write_trajectory(const ExperimentConfig& cfg, const std::string& name, const SdreRun& run,
                      ExperimentOutput& out) {
  CsvWriter w(stem(cfg, name), {"t", "state_norm", "control_norm", "cost", "state_sup", "solve_seconds", "structure"},
              cfg.seed, cfg.hash_hex());
  const Trajectory& tr = run.tr;
  for (size_t i = 0; i < tr.t.size(); ++i)
    w.row({tr.t[i], tr.state_norm[i], tr.control_norm[i], tr.cost[i], tr.state_sup[i], tr.feedback[i].seconds,
           tr.feedback[i].structure});
  w.flush();
  out.files.push_back(w.csv_path());
}

void write_snapshots(const ExperimentConfig& cfg, const std::string& name, const SdreRun& run,
                     ExperimentOutput& out) {
  if (run.tr.states.empty()) return;
  std::vector<std::string> cols = {"step", "t"};
  const Index n = run.tr.states.front().size();
  for (Index i = 0; i < n; ++i) cols.push_back("y" + std::to_string(i));
  CsvWriter w(stem(cfg, name), cols, cfg.seed, cfg.hash_hex());
  for (size_t k = 0; k < run.tr.states.size(); ++k) {
    const Index step = run.tr.snapshot_steps[k];
    std::vector<Cell> row = {static_cast<std::int64_t>(step), run.tr.t[static_cast<size_t>(step)]};
    for (Index i = 0; i < n; ++i) row.emplace_back(run.tr.states[k](i));
    w.row(row);
  }
  w.flush();
  out.files.push_back(w.csv_path());
}

}  // namespace

DecayRun decay_real_run(Index n, Index l_max) {
  require(n >= 4 && n <= 1000, "decay: n must be in [4, 1000]");
  const DenseCare p = decay_instance_real(n);
  DecayRun r;
  r.instance = "real";
  const Mat x = dense_care(p.a, p.f, p.q);
  r.profile = offdiag_singular_values(x, std::min(l_max, n - 1));
  const double nq = norm2(p.q);
  // spectrum of A is -logspace(-3, 0), a diagonal matrix; Q tridiagonal
  const Index lm = r.profile.sigma.size();
  r.bound_sym = staircase(lm, [&](Index h) { return decay_bound_sym(h, 1e-3, 1.0, nq, 0, 1); });
  r.bound_shifted = staircase(lm, [&](Index h) { return decay_bound_shifted(h, 1e-3, 1.0, nq, 0, 1); });
  r.fwd = norm2(x - care_closed_form_sym(p.a, p.q, 1.0)) / r.profile.norm_x;
  return r;
}

DecayRun decay_kappa_run(Index n, double kappa, bool circle, std::uint64_t seed, Index l_max) {
  require(n >= 4 && n <= 1000, "decay: n must be in [4, 1000]");
  const DenseCare p = decay_instance_kappa(n, kappa, circle, seed);
  DecayRun r;
  r.instance = "kappa";
  r.kappa = kappa;
  const Mat x = dense_care(p.a, p.f, p.q);
  r.profile = offdiag_singular_values(x, std::min(l_max, n - 1));
  r.bound_sym.assign(static_cast<size_t>(r.profile.sigma.size()), kNan);
  r.bound_shifted = r.bound_sym;
  r.fwd = kNan;
  return r;
}

DacBenchRow dac_bench_row(int test, Index n, Index r, std::uint64_t seed, Index repetitions, const DacOptions& opts,
                          double h_tol) {
  DacBenchRow row;
  row.test = test;
  row.n = n;
  row.r = test == 5 ? r : 0;
  try {
    const DenseCare p = dac_test_instance(test, n, r, seed);
    const HMatrix a = HMatrix::from_dense(p.a, h_tol, opts.n_min);
    const HMatrix f = HMatrix::from_dense(p.f, h_tol, opts.n_min);
    const HMatrix q = HMatrix::from_dense(p.q, h_tol, opts.n_min);
    row.coeff_rank = a.max_rank();
    double total = 0.0;
    for (Index k = 0; k < repetitions; ++k) {
      DacOptions o = opts;
      o.residual = k + 1 == repetitions && opts.residual;
      DacResult res = dac_care(a, f, q, o);
      total += res.report.seconds;
      if (k + 1 == repetitions) {
        row.residual = res.report.final_residual;
        row.max_rank = res.x.max_rank();
      }
    }
    row.seconds = total / static_cast<double>(repetitions);
  } catch (const std::exception& e) {
    row.status = e.what();
  }
  return row;
}

TinkOptions linesearch_options(LineSearchMode mode, double tol, Index k_max, double zeta) {
  TinkOptions o;
  o.linesearch = mode;
  o.tol = tol;
  o.k_max = k_max;
  o.zeta = zeta;
  o.throw_on_k_max = false;
  return o;
}

TinkResult linesearch_run(Index n, const TinkOptions& o) {
  const BandedCare p = linesearch_instance(n);
  return tink(p.a, p.f, p.q, o);
}

TinkOptions comparison_options(double kappa, double tol, Index k_max, double zeta) {
  TinkOptions o;
  o.tol = tol;
  o.k_max = k_max;
  o.zeta = zeta;
  o.throw_on_k_max = false;
  o.inner = kappa == 1.0 ? InnerSolver::cg : InnerSolver::gmres;
  return o;
}

TinkResult comparison_tink(Index n, double kappa, const TinkOptions& o) {
  const BandedCare p = comparison_instance(n, kappa);
  return tink(p.a, p.f, p.q, o);
}

DacResult comparison_dac(Index n, double kappa, Index n_min) {
  const BandedCare p = comparison_instance(n, kappa);
  DacOptions o;
  o.n_min = n_min;
  return dac_care(HMatrix::from_banded(p.a, n_min), HMatrix::from_banded(p.f, n_min), HMatrix::from_banded(p.q, n_min),
                  o);
}

SdreRun allen_cahn_run(const AllenCahnParams& p, SdreSolver solver, double t_end, double dt, double tink_tol,
                       Index snapshot_stride) {
  const SdreModel m = allen_cahn_model(p);
  FeedbackContext ctx;
  ctx.solver = solver;
  ctx.tink.inner = InnerSolver::cg;
  ctx.tink.tol = tink_tol;
  IntegratorOptions io;
  io.kind = Integrator::imex;
  io.dt = dt;
  io.snapshot_stride = snapshot_stride;
  SdreRun r;
  r.solver = to_string(solver);
  const double t0 = now_seconds();
  r.tr = integrate_closed_loop(m, allen_cahn_initial(p), t_end, io, ctx);
  r.seconds = now_seconds() - t0;
  return r;
}

FeedbackContext cucker_smale_context(SdreSolver solver, const CuckerSmaleSettings& s) {
  FeedbackContext ctx;
  ctx.solver = solver;
  ctx.dac.n_min = s.n_min;
  ctx.dac.tol = s.dac_tol;
  ctx.h_tol = s.h_tol;
  return ctx;
}

SdreRun cucker_smale_run(const CuckerSmaleSettings& s, SdreSolver solver, bool sorted) {
  const SdreModel m = cucker_smale_model(s.n_agents, sorted);
  FeedbackContext ctx = cucker_smale_context(solver, s);
  IntegratorOptions io;
  io.kind = Integrator::rk45;
  io.dt = s.dt0;
  io.rtol = s.rtol;
  io.atol = s.atol;
  io.snapshot_stride = s.snapshot_stride;
  SdreRun r;
  r.solver = to_string(solver);
  r.ordering = solver == SdreSolver::dac ? (sorted ? "sorted" : "unsorted") : "";
  const double t0 = now_seconds();
  r.tr = integrate_closed_loop(m, cucker_smale_initial(s.n_agents, s.seed), s.t_end, io, ctx);
  r.seconds = now_seconds() - t0;
  return r;
}

ExperimentOutput cmd_decay(const ExperimentConfig& cfg, std::ostream& log) {
  require(cfg.experiment == "decay", "cmd_decay: wrong config");
  const Index n = cfg.integer("n");
  const Index l_max = cfg.integer("l_max");
  ExperimentOutput out;
  CsvWriter w(stem(cfg, "decay"),
              {"instance", "kappa", "ell", "sigma_off", "sigma_normalized", "bound_sym", "bound_shifted"}, cfg.seed,
              cfg.hash_hex());
  auto emit = [&](const DecayRun& r) {
    const Vec s = r.profile.normalized();
    for (Index l = 0; l < s.size(); ++l)
      w.row({r.instance, r.kappa, static_cast<std::int64_t>(l + 1), r.profile.sigma(l), s(l),
             r.bound_sym[static_cast<size_t>(l)], r.bound_shifted[static_cast<size_t>(l)]});
  };
  Json runs = Json::array();
  for (const std::string& inst : cfg.strings("instances")) {
    if (inst == "real") {
      const DecayRun r = decay_real_run(n, l_max);
      emit(r);
      Index below = -1;
      const Vec s = r.profile.normalized();
      for (Index l = 0; l < s.size() && below < 0; ++l)
        if (s(l) < 1e-10) below = l + 1;
      log << "decay real n=" << n << ": first ell below 1e-10 = " << below << ", forward error " << r.fwd << "\n";
      runs.push_back({{"instance", "real"}, {"first_below_1e-10", below}, {"fwd", r.fwd}});
    } else {
      for (size_t k = 0; k < cfg.numbers("kappas").size(); ++k) {
        const double kappa = cfg.numbers("kappas")[k];
        const DecayRun r = decay_kappa_run(n, kappa, cfg.flag("kappa_circle"), cfg.seed, l_max);
        emit(r);
        const Vec rel = r.profile.relative();
        const double ratio = rel.size() >= 30 ? rel(29) : kNan;
        log << "decay kappa=" << kappa << " n=" << n << ": sigma_30/sigma_1 = " << ratio << "\n";
        runs.push_back({{"instance", "kappa"}, {"kappa", kappa}, {"sigma30_over_sigma1", ratio}});
      }
    }
  }
  w.flush();
  out.files.push_back(w.csv_path());
  out.summary["runs"] = runs;
  return out;
}

ExperimentOutput cmd_dac_bench(const ExperimentConfig& cfg, std::ostream& log) {
  require(cfg.experiment == "dac-bench", "cmd_dac_bench: wrong config");
  const Index cap = cfg.integer("desk_cap");
  DacOptions o;
  o.n_min = cfg.integer("n_min");
  o.tol = cfg.number("tol");
  o.eksm_tol = cfg.number("eksm_tol");
  const double h_tol = cfg.number("h_tol");
  const Index reps = cfg.integer("repetitions");

  std::vector<std::tuple<int, Index, Index>> jobs;
  for (Index t : cfg.integers("tests"))
    for (Index n : cfg.integers("sizes")) jobs.emplace_back(static_cast<int>(t), n, 0);
  if (cfg.flag("test5"))
    for (Index r : cfg.integers("test5_ranks")) jobs.emplace_back(5, cfg.integer("test5_n"), r);
  for (const auto& [t, n, r] : jobs)
    require(n <= cap, "dac-bench: n = " + std::to_string(n) + " exceeds desk_cap");

  ExperimentOutput out;
  CsvWriter w(stem(cfg, "dac_bench"), {"test", "n", "r", "seconds", "res", "max_rank", "coeff_rank", "status"},
              cfg.seed, cfg.hash_hex());
  Json rows = Json::array();
  for (const auto& [t, n, r] : jobs) {
    // per-row seed: rows are independent of the job list
    const std::uint64_t seed = cfg.seed * 1000003ULL + static_cast<std::uint64_t>(t);
    const DacBenchRow row = dac_bench_row(t, n, r, seed, reps, o, h_tol);
    w.row({static_cast<std::int64_t>(row.test), static_cast<std::int64_t>(row.n), static_cast<std::int64_t>(row.r),
           row.seconds, row.residual, static_cast<std::int64_t>(row.max_rank),
           static_cast<std::int64_t>(row.coeff_rank), row.status});
    w.flush();
    log << "test " << t << " n=" << n << (t == 5 ? " r=" + std::to_string(r) : std::string()) << ": " << row.seconds
        << " s, Res " << row.residual << ", rank " << row.max_rank << (row.status == "ok" ? "" : " [" + row.status + "]")
        << "\n";
    rows.push_back({{"test", t}, {"n", n}, {"r", row.r}, {"seconds", row.seconds}, {"res", row.residual},
                    {"max_rank", row.max_rank}, {"status", row.status}});
  }
  out.files.push_back(w.csv_path());
  out.summary["rows"] = rows;
  return out;
}

ExperimentOutput cmd_tink_bench(const ExperimentConfig& cfg, std::ostream& log) {
  require(cfg.experiment == "tink-bench", "cmd_tink_bench: wrong config");
  const double zeta = cfg.number("zeta");
  ExperimentOutput out;
  CsvWriter trace(stem(cfg, "tink_trace"),
                  {"study", "variant", "n", "kappa", "k", "riccati_est", "riccati_fro", "inner_iters", "lambda", "s",
                   "bw_hat", "bw_next", "law_stated", "law_krylov"},
                  cfg.seed, cfg.hash_hex());
  CsvWriter summary(stem(cfg, "tink_summary"),
                    {"study", "variant", "solver", "n", "kappa", "seconds", "structure", "iterations", "residual",
                     "final_est", "converged", "status"},
                    cfg.seed, cfg.hash_hex());
  auto emit_trace = [&](const std::string& study, const std::string& variant, Index n, double kappa,
                        const TinkResult& r) {
    for (const TinkIteration& s : r.steps)
      trace.row({study, variant, static_cast<std::int64_t>(n), kappa, static_cast<std::int64_t>(s.k), s.riccati_est,
                 s.riccati_fro, static_cast<std::int64_t>(s.inner_iters), s.lambda, static_cast<std::int64_t>(s.s),
                 static_cast<std::int64_t>(s.bw_hat), static_cast<std::int64_t>(s.bw_next),
                 static_cast<std::int64_t>(s.law_stated), static_cast<std::int64_t>(s.law_krylov)});
    trace.flush();
  };
  auto emit_tink = [&](const std::string& study, const std::string& variant, Index n, double kappa,
                       const TinkResult& r) {
    summary.row({study, variant, "tink", static_cast<std::int64_t>(n), kappa, r.report.seconds,
                 static_cast<std::int64_t>(r.x.measured_bandwidth()), static_cast<std::int64_t>(r.report.iterations),
                 r.report.final_residual, r.final_est, static_cast<std::int64_t>(r.converged), "ok"});
    summary.flush();
  };
  auto fail_row = [&](const std::string& study, const std::string& variant, const std::string& solver, Index n,
                      double kappa, const std::string& what) {
    summary.row({study, variant, solver, static_cast<std::int64_t>(n), kappa, kNan, std::int64_t{-1}, std::int64_t{-1},
                 kNan, kNan, std::int64_t{0}, what});
    summary.flush();
    log << study << " " << variant << " " << solver << " n=" << n << " failed: " << what << "\n";
  };

  Json rows = Json::array();
  for (const std::string& study : cfg.strings("studies")) {
    if (study == "linesearch") {
      const Index n = cfg.integer("ls_n");
      for (const std::string& mode : cfg.strings("ls_modes")) {
        const LineSearchMode lm = mode == "none" ? LineSearchMode::none
                                  : mode == "first" ? LineSearchMode::first
                                                    : LineSearchMode::all;
        try {
          const TinkResult r = linesearch_run(n, linesearch_options(lm, cfg.number("ls_tol"), cfg.integer("ls_k_max"), zeta));
          emit_trace(study, mode, n, 1.0, r);
          emit_tink(study, mode, n, 1.0, r);
          out.files.push_back(checkpoint(cfg, "linesearch_" + mode + "_n" + std::to_string(n), r.x));
          log << "linesearch " << mode << " n=" << n << ": " << r.report.iterations << " its, bandwidth "
              << r.x.measured_bandwidth() << ", est " << r.final_est << (r.converged ? "" : " (not converged)") << "\n";
          rows.push_back({{"study", study}, {"variant", mode}, {"iterations", r.report.iterations},
                          {"bandwidth", r.x.measured_bandwidth()}, {"final_est", r.final_est},
                          {"converged", r.converged}});
        } catch (const std::exception& e) {
          fail_row(study, mode, "tink", n, 1.0, e.what());
        }
      }
    } else {
      for (double kappa : cfg.numbers("kappas"))
        for (Index n : cfg.integers("sizes")) {
          const std::string variant = "kappa=" + format_double(kappa);
          try {
            const TinkResult r =
                comparison_tink(n, kappa, comparison_options(kappa, cfg.number("tol"), cfg.integer("k_max"), zeta));
            emit_trace(study, variant, n, kappa, r);
            emit_tink(study, variant, n, kappa, r);
            out.files.push_back(checkpoint(cfg, "tink_kappa" + format_double(kappa) + "_n" + std::to_string(n), r.x));
            log << "comparison kappa=" << kappa << " n=" << n << ": tink " << r.report.seconds << " s, bandwidth "
                << r.x.measured_bandwidth() << ", Res " << r.report.final_residual << "\n";
            rows.push_back({{"study", study}, {"kappa", kappa}, {"n", n}, {"solver", "tink"},
                            {"bandwidth", r.x.measured_bandwidth()}, {"res", r.report.final_residual}});
          } catch (const std::exception& e) {
            fail_row(study, variant, "tink", n, kappa, e.what());
          }
          if (!cfg.flag("dac_compare") || n > cfg.integer("dac_max_n")) continue;
          try {
            const DacResult d = comparison_dac(n, kappa, cfg.integer("dac_n_min"));
            summary.row({study, variant, "dac", static_cast<std::int64_t>(n), kappa, d.report.seconds,
                         static_cast<std::int64_t>(d.x.max_rank()), static_cast<std::int64_t>(d.report.iterations),
                         d.report.final_residual, kNan, std::int64_t{1}, "ok"});
            summary.flush();
            out.files.push_back(checkpoint(cfg, "dac_kappa" + format_double(kappa) + "_n" + std::to_string(n), d.x));
            log << "comparison kappa=" << kappa << " n=" << n << ": dac " << d.report.seconds << " s, rank "
                << d.x.max_rank() << ", Res " << d.report.final_residual << "\n";
          } catch (const std::exception& e) {
            fail_row(study, variant, "dac", n, kappa, e.what());
          }
        }
    }
  }
  out.files.push_back(trace.csv_path());
  out.files.push_back(summary.csv_path());
  out.summary["rows"] = rows;
  return out;
}

ExperimentOutput cmd_allen_cahn(const ExperimentConfig& cfg, std::ostream& log) {
  require(cfg.experiment == "allen-cahn", "cmd_allen_cahn: wrong config");
  AllenCahnParams p;
  p.n = cfg.integer("n");
  p.half_length = cfg.number("half_length");
  p.sigma = cfg.number("sigma");
  p.gamma_tilde = cfg.number("gamma_tilde");
  std::vector<std::string> solvers = cfg.strings("solvers");
  if (cfg.flag("uncontrolled")) solvers.push_back("none");

  ExperimentOutput out;
  CsvWriter sum(stem(cfg, "allen_cahn_summary"),
                {"solver", "n", "half_length", "steps", "seconds_per_control", "mean_bandwidth", "total_cost",
                 "final_sup", "max_diff_vs_first", "status"},
                cfg.seed, cfg.hash_hex());
  std::vector<SdreRun> runs;
  Json rows = Json::array();
  for (const std::string& s : solvers) {
    try {
      // states are kept at every step for the comparison column
      SdreRun r = allen_cahn_run(p, solver_of(s), cfg.number("t_end"), cfg.number("dt"), cfg.number("tink_tol"), 1);
      double diff = kNan;
      if (!runs.empty() && runs.front().tr.states.size() == r.tr.states.size()) {
        diff = 0.0;
        for (size_t i = 0; i < r.tr.states.size(); ++i)
          diff = std::max(diff, (r.tr.states[i] - runs.front().tr.states[i]).cwiseAbs().maxCoeff());
      }
      const bool has_structure = solver_of(s) == SdreSolver::tink;
      sum.row({s, static_cast<std::int64_t>(p.n), p.half_length, static_cast<std::int64_t>(r.tr.t.size() - 1),
               r.tr.mean_feedback_seconds(), has_structure ? r.tr.mean_structure() : kNan, r.tr.total_cost(),
               r.tr.state_sup.back(), diff, "ok"});
      sum.flush();
      log << "allen-cahn " << s << " n=" << p.n << ": cost " << format_double(r.tr.total_cost()) << ", final sup "
          << r.tr.state_sup.back() << ", " << r.tr.mean_feedback_seconds() << " s per control"
          << (has_structure ? ", mean bandwidth " + format_double(r.tr.mean_structure()) : std::string()) << "\n";
      rows.push_back({{"solver", s}, {"total_cost", r.tr.total_cost()}, {"final_sup", r.tr.state_sup.back()},
                      {"max_diff_vs_first", diff}});
      write_trajectory(cfg, "allen_cahn_" + s, r, out);
      if (cfg.integer("snapshot_stride") > 0) {
        SdreRun thin = r;
        thin.tr.states.clear();
        thin.tr.snapshot_steps.clear();
        const Index stride = cfg.integer("snapshot_stride");
        for (size_t k = 0; k < r.tr.states.size(); ++k)
          if (static_cast<Index>(k) % stride == 0 || k + 1 == r.tr.states.size()) {
            thin.tr.states.push_back(r.tr.states[k]);
            thin.tr.snapshot_steps.push_back(r.tr.snapshot_steps[k]);
          }
        write_snapshots(cfg, "allen_cahn_" + s + "_states", thin, out);
      }
      runs.push_back(std::move(r));
    } catch (const std::exception& e) {
      sum.row({s, static_cast<std::int64_t>(p.n), p.half_length, std::int64_t{-1}, kNan, kNan, kNan, kNan, kNan,
               std::string(e.what())});
      sum.flush();
      log << "allen-cahn " << s << " failed: " << e.what() << "\n";
    }
  }
  out.files.insert(out.files.begin(), sum.csv_path());
  out.summary["rows"] = rows;
  return out;
}

ExperimentOutput cmd_cucker_smale(const ExperimentConfig& cfg, std::ostream& log) {
  require(cfg.experiment == "cucker-smale", "cmd_cucker_smale: wrong config");
  CuckerSmaleSettings s;
  s.n_agents = cfg.integer("n_agents");
  s.t_end = cfg.number("t_end");
  s.dt0 = cfg.number("dt0");
  s.rtol = cfg.number("rtol");
  s.atol = cfg.number("atol");
  s.n_min = cfg.integer("n_min");
  s.dac_tol = cfg.number("dac_tol");
  s.h_tol = cfg.number("h_tol");
  s.snapshot_stride = cfg.integer("snapshot_stride");
  s.seed = cfg.seed;

  std::vector<std::pair<std::string, bool>> jobs;
  for (const std::string& sv : cfg.strings("solvers")) {
    if (sv == "dac")
      for (const std::string& o : cfg.strings("orderings")) jobs.emplace_back(sv, o == "sorted");
    else
      jobs.emplace_back(sv, true);
  }
  if (cfg.flag("uncontrolled")) jobs.emplace_back("none", true);

  ExperimentOutput out;
  CsvWriter sum(stem(cfg, "cucker_smale_summary"),
                {"solver", "ordering", "n_agents", "steps", "seconds_per_control", "mean_rank", "total_cost",
                 "position_sup", "velocity_sup", "status"},
                cfg.seed, cfg.hash_hex());
  Json rows = Json::array();
  for (const auto& [sv, sorted] : jobs) {
    const SdreSolver solver = solver_of(sv);
    const std::string ordering = solver == SdreSolver::dac ? (sorted ? "sorted" : "unsorted") : "";
    try {
      const SdreRun r = cucker_smale_run(s, solver, sorted);
      const Index na = s.n_agents;
      const double ysup = r.tr.final_state.head(na).cwiseAbs().maxCoeff();
      const double vsup = r.tr.final_state.tail(na).cwiseAbs().maxCoeff();
      const double rank = solver == SdreSolver::dac ? r.tr.mean_structure() : kNan;
      sum.row({sv, ordering, static_cast<std::int64_t>(na), static_cast<std::int64_t>(r.tr.t.size() - 1),
               r.tr.mean_feedback_seconds(), rank, r.tr.total_cost(), ysup, vsup, "ok"});
      sum.flush();
      log << "cucker-smale " << sv << (ordering.empty() ? "" : " " + ordering) << " N=" << na << ": cost "
          << format_double(r.tr.total_cost()) << ", |y(T)| " << ysup << ", |v(T)| " << vsup << ", "
          << r.tr.mean_feedback_seconds() << " s per control"
          << (solver == SdreSolver::dac ? ", mean rank " + format_double(rank) : std::string()) << "\n";
      rows.push_back({{"solver", sv}, {"ordering", ordering}, {"mean_rank", rank}, {"total_cost", r.tr.total_cost()},
                      {"position_sup", ysup}, {"velocity_sup", vsup}});
      const std::string name = "cucker_smale_" + sv + (ordering.empty() ? "" : "_" + ordering);
      write_trajectory(cfg, name, r, out);
      write_snapshots(cfg, name + "_states", r, out);
    } catch (const std::exception& e) {
      sum.row({sv, ordering, static_cast<std::int64_t>(s.n_agents), std::int64_t{-1}, kNan, kNan, kNan, kNan, kNan,
               std::string(e.what())});
      sum.flush();
      log << "cucker-smale " << sv << " failed: " << e.what() << "\n";
    }
  }
  out.files.insert(out.files.begin(), sum.csv_path());
  out.summary["rows"] = rows;
  return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.threads > 0) {
    omp_set_num_threads(cfg.threads);
    kernels::set_threads(cfg.threads);
  }
  const std::string e = lower_snake(cfg.experiment);
  if (e == "decay") return cmd_decay(cfg, log);
  if (e == "dac_bench") return cmd_dac_bench(cfg, log);
  if (e == "tink_bench") return cmd_tink_bench(cfg, log);
  if (e == "allen_cahn") return cmd_allen_cahn(cfg, log);
  if (e == "cucker_smale") return cmd_cucker_smale(cfg, log);
  throw InputError("run_experiment: '" + cfg.experiment + "' is not an experiment");
}

}  // namespace qscare
