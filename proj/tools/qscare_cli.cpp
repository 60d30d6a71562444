// qscare <experiment> [--config FILE] [--out DIR] [--seed N] [--threads N] [--set key=value ...]
//
// Experiments write <out>/<name>.csv plus a whitespace-delimited <name>.dat
// next to it. `verify` runs the acceptance suite, `schema` prints the JSON
// schema of config files, `config <experiment>` prints a default config.
#include "qscare/acceptance.hpp"
#include "qscare/config.hpp"
#include "qscare/csv.hpp"
#include "qscare/error.hpp"
#include "qscare/experiments.hpp"
#include "qscare/kernels.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

using namespace qscare;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::vector<std::string> sets;
  bool quiet = false;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "JSON config file (comments allowed)")->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--seed", f.seed, "base seed");
  sub->add_option("--threads", f.threads, "OpenMP threads, 0 = runtime default")->check(CLI::NonNegativeNumber);
  sub->add_option("--set", f.sets, "override a parameter, key=value (value as JSON, bare words are strings)");
  sub->add_flag("-q,--quiet", f.quiet, "no progress output");
}

// "n=300", "solvers=[\"tink\"]", "solvers=tink", "kappas=1,10"
void apply_set(Json& params, const std::string& experiment, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw InputError("--set expects key=value, got '" + kv + "'");
  const std::string key = kv.substr(0, eq), raw = kv.substr(eq + 1);
  const ParamSpec* spec = nullptr;
  for (const ParamSpec& s : experiment_params(experiment))
    if (s.key == key) spec = &s;
  if (!spec) throw InputError("--set: " + experiment + " has no parameter '" + key + "'");

  const bool list = spec->kind == ParamKind::int_list || spec->kind == ParamKind::num_list ||
                    spec->kind == ParamKind::string_list;
  auto scalar = [](const std::string& s) {
    Json v = Json::parse(s, nullptr, false);
    return v.is_discarded() ? Json(s) : v;
  };
  Json v = Json::parse(raw, nullptr, false);
  if (v.is_discarded() || (list && !v.is_array())) {
    if (list) {
      v = Json::array();
      size_t start = 0;
      while (start <= raw.size()) {
        const size_t comma = raw.find(',', start);
        const std::string item = raw.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!item.empty()) v.push_back(scalar(item));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    } else {
      v = raw;
    }
  }
  params[key] = v;
}

ExperimentConfig resolve(const std::string& experiment, const CommonFlags& f) {
  Json j = f.config.empty() ? default_config(experiment).to_json() : load_config(f.config).to_json();
  if (j["experiment"] != experiment)
    throw InputError("config " + f.config + " is for '" + j["experiment"].get<std::string>() + "', not '" +
                     experiment + "'");
  if (f.out) j["out"] = *f.out;
  if (f.seed) j["seed"] = *f.seed;
  if (f.threads) j["threads"] = *f.threads;
  for (const std::string& kv : f.sets) apply_set(j["params"], experiment, kv);
  return parse_config(j);
}

void write_resolved(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out);
  std::ofstream os(std::filesystem::path(cfg.out) / (cfg.experiment + "_config.json"));
  Json j = cfg.to_json();
  j["config_hash"] = cfg.hash_hex();
  os << j.dump(2) << "\n";
}

int run_verify(const ExperimentConfig& cfg, bool quiet) {
  if (cfg.threads > 0) {
    omp_set_num_threads(cfg.threads);
    kernels::set_threads(cfg.threads);
  }
  std::vector<int> ids;
  for (Index i : cfg.integers("criteria")) ids.push_back(static_cast<int>(i));
  write_resolved(cfg);
  CsvWriter w((std::filesystem::path(cfg.out) / "verify").string(),
              {"criterion", "name", "pass", "seconds", "budget", "detail"}, cfg.seed, cfg.hash_hex());
  std::ofstream devnull;
  std::ostream& log = quiet ? devnull : std::cerr;
  const auto res = run_acceptance(ids, log, [&](const CriterionResult& r) {
    std::cout << format_result(r) << std::endl;
    w.row({std::int64_t{r.id}, r.name, std::int64_t{r.pass ? 1 : 0}, r.seconds, r.budget, r.detail});
    w.flush();
  });
  int failed = 0;
  for (const auto& r : res) failed += r.pass ? 0 : 1;
  std::cout << res.size() - failed << "/" << res.size() << " criteria passed\n";
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riccati solvers for quasiseparable and banded coefficients: experiment driver"};
  app.require_subcommand(1);

  std::vector<std::string> runnable = experiment_names();
  std::vector<CommonFlags> flags(runnable.size());
  std::vector<CLI::App*> subs;
  const std::map<std::string, std::string> blurb = {
      {"decay", "offdiagonal singular values of X against the a priori bounds"},
      {"dac-bench", "divide-and-conquer solver on Tests 1-5"},
      {"tink-bench", "truncated inexact Newton-Kleinman: line-search study and kappa(F) comparison"},
      {"allen-cahn", "SDRE control of the Allen-Cahn equation"},
      {"cucker-smale", "SDRE control of Cucker-Smale flocking"},
      {"verify", "run the acceptance suite"},
  };
  for (size_t i = 0; i < runnable.size(); ++i) {
    auto it = blurb.find(runnable[i]);
    subs.push_back(app.add_subcommand(runnable[i], it == blurb.end() ? "" : it->second));
    add_common(subs.back(), flags[i]);
  }
  auto* schema = app.add_subcommand("schema", "print the JSON schema for config files");
  std::string config_exp;
  auto* config = app.add_subcommand("config", "print the default config of an experiment");
  config->add_option("experiment", config_exp, "experiment name")->required()->check(CLI::IsMember(runnable));

  CLI11_PARSE(app, argc, argv);

  try {
    if (schema->parsed()) {
      std::cout << config_schema().dump(2) << "\n";
      return EXIT_SUCCESS;
    }
    if (config->parsed()) {
      std::cout << default_config(config_exp).to_json().dump(2) << "\n";
      return EXIT_SUCCESS;
    }
    for (size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const ExperimentConfig cfg = resolve(runnable[i], flags[i]);
      if (cfg.experiment == "verify") return run_verify(cfg, flags[i].quiet);
      write_resolved(cfg);
      std::ofstream devnull;
      const ExperimentOutput out = run_experiment(cfg, flags[i].quiet ? devnull : std::cerr);
      for (const std::string& f : out.files) std::cout << f << "\n";
      return EXIT_SUCCESS;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return 1;
  }
  return EXIT_SUCCESS;
}
