#include "qscare/config.hpp"

#include "qscare/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace qscare {

namespace {

using K = ParamKind;

ParamSpec p(std::string key, K kind, Json def, std::string doc, double lo = -1e300, double hi = 1e300,
            std::vector<std::string> choices = {}) {
  return ParamSpec{std::move(key), kind, std::move(def), lo, hi, std::move(choices), std::move(doc)};
}

const std::vector<std::string> kSolvers = {"none", "tink", "dac", "dense", "closed_form"};

const std::map<std::string, std::vector<ParamSpec>>& tables() {
  static const std::map<std::string, std::vector<ParamSpec>> t = {
      {"decay",
       {p("n", K::integer, 500, "order of the decay instances", 4, 1000),
        p("l_max", K::integer, 120, "number of offdiagonal singular values reported", 1, 1000),
        p("instances", K::string_list, {"real", "kappa"}, "real: diagonal A, F = I; kappa: conditioning sweep of F",
          0, 0, {"real", "kappa"}),
        p("kappas", K::num_list, {1.0, 1e2, 1e4, 1e6, 1e8}, "condition numbers of F in the sweep", 1.0, 1e16),
        p("kappa_circle", K::boolean, false, "sweep with A = W - 1.1 I instead of W D W^T")}},
      {"dac-bench",
       {p("tests", K::int_list, {1, 2, 3, 4}, "tests run over sizes", 1, 4),
        p("sizes", K::int_list, {512, 1024, 2048}, "orders for tests 1-4", 16, 4096),
        p("test5", K::boolean, true, "run the bandwidth sweep of test 5"),
        p("test5_n", K::integer, 2048, "order for test 5", 16, 4096),
        p("test5_ranks", K::int_list, {2, 4, 8, 16, 32}, "subdiagonals of W_5", 1, 512),
        p("repetitions", K::integer, 1, "timing repetitions averaged per row", 1, 100),
        p("n_min", K::integer, 250, "leaf size", 8, 4096),
        p("tol", K::number, 1e-10, "compression tolerance inside the solver", 1e-16, 1e-1),
        p("eksm_tol", K::number, 1e-8, "stopping tolerance of the correction solves", 1e-16, 1e-1),
        p("h_tol", K::number, 1e-10, "compression of the dense coefficients", 1e-16, 1e-1),
        p("desk_cap", K::integer, 4096, "largest order accepted", 16, 8192)}},
      {"tink-bench",
       {p("studies", K::string_list, {"linesearch", "comparison"}, "parts to run", 0, 0, {"linesearch", "comparison"}),
        p("ls_n", K::integer, 2000, "order of the line-search study", 3, 20000),
        p("ls_modes", K::string_list, {"none", "first", "all"}, "line-search variants", 0, 0, {"none", "first", "all"}),
        p("ls_tol", K::number, 1e-12, "target estimated residual of the line-search study", 1e-16, 1.0),
        p("ls_k_max", K::integer, 30, "outer iteration budget of the line-search study", 1, 1000),
        p("kappas", K::num_list, {1.0, 10.0, 100.0}, "condition numbers of F", 1.0, 1e12),
        p("sizes", K::int_list, {500, 1000, 2000}, "orders of the comparison", 3, 20000),
        p("tol", K::number, 1e-8, "target estimated residual of the comparison", 1e-16, 1.0),
        p("zeta", K::number, 0.1, "required decrease factor for truncation", 0.0, 0.999),
        p("k_max", K::integer, 50, "outer iteration budget", 1, 1000),
        p("dac_compare", K::boolean, true, "also solve the comparison rows with dac"),
        p("dac_max_n", K::integer, 2000, "largest order solved with dac", 3, 20000),
        p("dac_n_min", K::integer, 250, "dac leaf size", 8, 4096)}},
      {"allen-cahn",
       {p("n", K::integer, 500, "grid points", 3, 2000),
        p("half_length", K::number, 1.0, "domain [-L, L]", 1e-6, 1e6),
        p("sigma", K::number, 1e-3, "diffusion", 1e-12, 1e6),
        p("gamma_tilde", K::number, 0.1, "control weight before scaling by dx", 1e-12, 1e12),
        p("t_end", K::number, 10.0, "horizon", 1e-6, 1e6),
        p("dt", K::number, 0.01, "imex step", 1e-8, 10.0),
        p("solvers", K::string_list, {"closed_form", "tink"}, "controlled runs", 0, 0, kSolvers),
        p("uncontrolled", K::boolean, true, "add a run with u = 0"),
        p("tink_tol", K::number, 1e-10, "tink target estimated residual", 1e-16, 1.0),
        p("snapshot_stride", K::integer, 0, "full states every stride steps, 0 = none", 0, 1000000)}},
      {"cucker-smale",
       {p("n_agents", K::integer, 100, "agents", 2, 2000),
        p("t_end", K::number, 10.0, "horizon", 1e-6, 1e6),
        p("dt0", K::number, 0.1, "initial step", 1e-8, 10.0),
        p("rtol", K::number, 1e-8, "relative tolerance of the 4(5) pair", 1e-14, 1e-1),
        p("atol", K::number, 1e-10, "absolute tolerance of the 4(5) pair", 1e-16, 1e-1),
        p("solvers", K::string_list, {"closed_form", "dac"}, "controlled runs", 0, 0, kSolvers),
        p("orderings", K::string_list, {"sorted", "unsorted"}, "variable orderings for dac", 0, 0,
          {"sorted", "unsorted"}),
        p("uncontrolled", K::boolean, true, "add a run with u = 0"),
        p("n_min", K::integer, 32, "dac leaf size", 4, 4096),
        p("dac_tol", K::number, 1e-10, "dac compression tolerance", 1e-16, 1e-1),
        p("h_tol", K::number, 1e-10, "compression of the dense coefficients", 1e-16, 1e-1),
        p("snapshot_stride", K::integer, 0, "full states every stride steps, 0 = none", 0, 1000000)}},
      {"verify", {p("criteria", K::int_list, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}, "acceptance criteria to run", 1, 11)}},
  };
  return t;
}

bool is_integral(const Json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) return true;
  if (!v.is_number_float()) return false;
  const double d = v.get<double>();
  return std::isfinite(d) && std::floor(d) == d && std::abs(d) < 9e15;
}

std::string where(const std::string& exp, const std::string& key) { return "config: " + exp + "." + key + ": "; }

Json check_scalar(const ParamSpec& s, const std::string& exp, const Json& v, ParamKind kind) {
  const std::string w = where(exp, s.key);
  switch (kind) {
    case K::integer: {
      if (!is_integral(v)) throw InputError(w + "expected an integer");
      const auto i = static_cast<std::int64_t>(v.get<double>());
      if (static_cast<double>(i) < s.min || static_cast<double>(i) > s.max)
        throw InputError(w + "value " + std::to_string(i) + " out of range");
      return i;
    }
    case K::number: {
      if (!v.is_number()) throw InputError(w + "expected a number");
      const double d = v.get<double>();
      if (!std::isfinite(d) || d < s.min || d > s.max) throw InputError(w + "value " + v.dump() + " out of range");
      return d;
    }
    case K::boolean:
      if (!v.is_boolean()) throw InputError(w + "expected true or false");
      return v;
    case K::string: {
      if (!v.is_string()) throw InputError(w + "expected a string");
      const std::string str = v.get<std::string>();
      if (!s.choices.empty() && std::find(s.choices.begin(), s.choices.end(), str) == s.choices.end())
        throw InputError(w + "unknown value '" + str + "'");
      return v;
    }
    default:
      break;
  }
  throw InputError(w + "bad kind");
}

Json check_value(const ParamSpec& s, const std::string& exp, const Json& v) {
  K elem;
  switch (s.kind) {
    case K::int_list: elem = K::integer; break;
    case K::num_list: elem = K::number; break;
    case K::string_list: elem = K::string; break;
    default: return check_scalar(s, exp, v, s.kind);
  }
  if (!v.is_array() || v.empty()) throw InputError(where(exp, s.key) + "expected a non-empty list");
  Json out = Json::array();
  for (const Json& e : v) out.push_back(check_scalar(s, exp, e, elem));
  return out;
}

Json kind_schema(const ParamSpec& s) {
  auto scalar = [&](K k) {
    Json j;
    switch (k) {
      case K::integer: j["type"] = "integer"; break;
      case K::number: j["type"] = "number"; break;
      case K::boolean: j["type"] = "boolean"; break;
      default: j["type"] = "string"; break;
    }
    if (k == K::integer || k == K::number) {
      if (s.min > -1e300) j["minimum"] = s.min;
      if (s.max < 1e300) j["maximum"] = s.max;
    }
    if (k == K::string && !s.choices.empty()) j["enum"] = s.choices;
    return j;
  };
  Json j;
  switch (s.kind) {
    case K::int_list: j = {{"type", "array"}, {"minItems", 1}, {"items", scalar(K::integer)}}; break;
    case K::num_list: j = {{"type", "array"}, {"minItems", 1}, {"items", scalar(K::number)}}; break;
    case K::string_list: j = {{"type", "array"}, {"minItems", 1}, {"items", scalar(K::string)}}; break;
    default: j = scalar(s.kind); break;
  }
  j["default"] = s.def;
  j["description"] = s.doc;
  return j;
}

const Json& param(const ExperimentConfig& c, const std::string& key) {
  auto it = c.params.find(key);
  if (it == c.params.end()) throw InputError("config: " + c.experiment + " has no parameter '" + key + "'");
  return *it;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"decay", "dac-bench", "tink-bench", "allen-cahn", "cucker-smale",
                                                 "verify"};
  return names;
}

const std::vector<ParamSpec>& experiment_params(const std::string& experiment) {
  auto it = tables().find(experiment);
  if (it == tables().end()) throw InputError("config: unknown experiment '" + experiment + "'");
  return it->second;
}

Json config_schema() {
  Json variants = Json::array();
  for (const std::string& e : experiment_names()) {
    Json props = Json::object();
    for (const ParamSpec& s : experiment_params(e)) props[s.key] = kind_schema(s);
    variants.push_back({{"type", "object"},
                        {"additionalProperties", false},
                        {"required", {"experiment"}},
                        {"properties",
                         {{"experiment", {{"const", e}}},
                          {"seed", {{"type", "integer"}, {"minimum", 0}, {"default", 1}}},
                          {"out", {{"type", "string"}, {"default", "results"}}},
                          {"threads", {{"type", "integer"}, {"minimum", 0}, {"default", 0}}},
                          {"params", {{"type", "object"}, {"additionalProperties", false}, {"properties", props}}}}}});
  }
  return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
          {"title", "qscare experiment config"},
          {"oneOf", variants}};
}

ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw InputError("config: top level must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "experiment" && it.key() != "seed" && it.key() != "out" && it.key() != "threads" &&
        it.key() != "params")
      throw InputError("config: unknown key '" + it.key() + "'");
  if (!j.contains("experiment") || !j["experiment"].is_string())
    throw InputError("config: 'experiment' must be given as a string");

  ExperimentConfig c;
  c.experiment = j["experiment"].get<std::string>();
  const std::vector<ParamSpec>& specs = experiment_params(c.experiment);
  if (j.contains("seed")) {
    const Json& s = j["seed"];
    if (!(s.is_number_unsigned() || (s.is_number_integer() && s.get<std::int64_t>() >= 0)))
      throw InputError("config: 'seed' must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("out")) {
    if (!j["out"].is_string() || j["out"].get<std::string>().empty())
      throw InputError("config: 'out' must be a non-empty string");
    c.out = j["out"].get<std::string>();
  }
  if (j.contains("threads")) {
    if (!is_integral(j["threads"]) || j["threads"].get<double>() < 0)
      throw InputError("config: 'threads' must be a non-negative integer");
    c.threads = static_cast<int>(j["threads"].get<double>());
  }

  const Json given = j.contains("params") ? j["params"] : Json::object();
  if (!given.is_object()) throw InputError("config: 'params' must be an object");
  for (auto it = given.begin(); it != given.end(); ++it) {
    bool known = false;
    for (const ParamSpec& s : specs) known = known || s.key == it.key();
    if (!known) throw InputError("config: unknown parameter '" + it.key() + "' for " + c.experiment);
  }
  for (const ParamSpec& s : specs) c.params[s.key] = check_value(s, c.experiment, given.contains(s.key) ? given[s.key] : s.def);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open " + path);
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw InputError("config: " + path + ": " + e.what());
  }
  return parse_config(j);
}

ExperimentConfig default_config(const std::string& experiment) { return parse_config(Json{{"experiment", experiment}}); }

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Json ExperimentConfig::to_json() const {
  return {{"experiment", experiment}, {"seed", seed}, {"out", out}, {"threads", threads}, {"params", params}};
}

std::uint64_t ExperimentConfig::hash() const {
  // out and threads do not change results
  const Json canon = {{"experiment", experiment}, {"seed", seed}, {"params", params}};
  return fnv1a64(canon.dump());
}

std::string ExperimentConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

std::int64_t ExperimentConfig::integer(const std::string& key) const { return param(*this, key).get<std::int64_t>(); }
double ExperimentConfig::number(const std::string& key) const { return param(*this, key).get<double>(); }
bool ExperimentConfig::flag(const std::string& key) const { return param(*this, key).get<bool>(); }
std::string ExperimentConfig::str(const std::string& key) const { return param(*this, key).get<std::string>(); }

std::vector<Index> ExperimentConfig::integers(const std::string& key) const {
  std::vector<Index> out;
  for (const Json& v : param(*this, key)) out.push_back(static_cast<Index>(v.get<std::int64_t>()));
  return out;
}

std::vector<double> ExperimentConfig::numbers(const std::string& key) const {
  return param(*this, key).get<std::vector<double>>();
}

std::vector<std::string> ExperimentConfig::strings(const std::string& key) const {
  return param(*this, key).get<std::vector<std::string>>();
}

}  // namespace qscare
