#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qscare/config.hpp"
#include "qscare/csv.hpp"
#include "qscare/error.hpp"
#include "qscare/experiments.hpp"
#include "qscare/generators.hpp"
#include "qscare/serialize.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qscare;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qscare_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> col(const CsvTable& t, const std::string& name) {
  std::vector<std::string> out;
  const size_t c = t.column(name);
  for (const auto& r : t.rows) out.push_back(r[c]);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig decay_cfg(const fs::path& out, Index n, Json kappas) {
  return parse_config({{"experiment", "decay"},
                       {"out", out.string()},
                       {"params", {{"n", n}, {"l_max", 40}, {"kappas", kappas}}}});
}

}  // namespace

TEST_CASE("defaults resolve for every experiment") {
  for (const std::string& e : experiment_names()) {
    const ExperimentConfig c = default_config(e);
    CHECK(c.experiment == e);
    for (const ParamSpec& s : experiment_params(e)) CHECK(c.params.contains(s.key));
    CHECK(c.params.size() == experiment_params(e).size());
  }
  CHECK(default_config("decay").integer("n") == 500);
  CHECK(default_config("cucker-smale").integer("n_min") == 32);
  CHECK_THROWS_AS(default_config("nope"), InputError);
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_AS(parse_config({{"experiment", "decay"}, {"colour", "red"}}), InputError);
  CHECK_THROWS_AS(parse_config({{"experiment", "decay"}, {"params", {{"m", 3}}}}), InputError);
  CHECK_THROWS_AS(parse_config({{"experiment", "decay"}, {"params", {{"n", 5000}}}}), InputError);
  CHECK_THROWS_AS(parse_config({{"experiment", "decay"}, {"params", {{"n", "big"}}}}), InputError);
  CHECK_THROWS_AS(parse_config({{"experiment", "allen-cahn"}, {"params", {{"solvers", {"magic"}}}}}), InputError);
  CHECK_THROWS_AS(parse_config({{"experiment", "decay"}, {"seed", -1}}), InputError);
  CHECK_THROWS_AS(parse_config({{"seed", 1}}), InputError);
  CHECK_THROWS_AS(parse_config(Json::array()), InputError);
  CHECK_NOTHROW(parse_config({{"experiment", "decay"}, {"params", {{"n", 4}}}}));
}

TEST_CASE("config files: comments allowed, round trip through to_json") {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  const fs::path f = dir / "c.json";
  std::ofstream(f) << "// small run\n{\"experiment\": \"tink-bench\", \"seed\": 7,\n"
                      " \"params\": {\"sizes\": [200], /* one size */ \"kappas\": [1, 10]}}\n";
  const ExperimentConfig c = load_config(f.string());
  CHECK(c.seed == 7);
  CHECK(c.integers("sizes") == std::vector<Index>{200});
  CHECK(c.numbers("kappas") == std::vector<double>{1.0, 10.0});
  CHECK(c.number("zeta") == doctest::Approx(0.1));
  const ExperimentConfig back = parse_config(c.to_json());
  CHECK(back.hash() == c.hash());
  CHECK_THROWS_AS(load_config((dir / "missing.json").string()), InputError);
  std::ofstream(dir / "broken.json") << "{\"experiment\": ";
  CHECK_THROWS_AS(load_config((dir / "broken.json").string()), InputError);
}

TEST_CASE("config hash") {
  const ExperimentConfig a = default_config("decay");
  ExperimentConfig b = a;
  b.out = "elsewhere";
  b.threads = 3;
  CHECK(a.hash() == b.hash());  // out and threads do not enter
  b.seed = 2;
  CHECK(a.hash() != b.hash());
  const ExperimentConfig c = parse_config({{"experiment", "decay"}, {"params", {{"n", 499}}}});
  CHECK(a.hash() != c.hash());
  CHECK(a.hash_hex().size() == 16);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("schema lists every experiment and closes the objects") {
  const Json s = config_schema();
  REQUIRE(s.contains("oneOf"));
  CHECK(s["oneOf"].size() == experiment_names().size());
  for (const Json& branch : s["oneOf"]) {
    CHECK(branch["additionalProperties"] == false);
    CHECK(branch["properties"]["params"]["additionalProperties"] == false);
  }
}

TEST_CASE("csv writer and reader") {
  const fs::path dir = scratch("csv");
  {
    CsvWriter w((dir / "sub" / "t").string(), {"name", "k", "x"}, 42, "00000000deadbeef");
    w.row({std::string("a"), std::int64_t{1}, 0.1});
    w.row({std::string("b,c"), std::int64_t{-2}, std::nan("")});
    w.row({std::string("d"), std::int64_t{3}, 1e300});
    CHECK(w.rows() == 3);
    CHECK_THROWS_AS(w.row({std::string("short")}), InputError);
  }
  const CsvTable t = read_csv((dir / "sub" / "t.csv").string());
  CHECK(t.header == std::vector<std::string>{"name", "k", "x", "seed", "config_hash"});
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[1][0] == "b,c");
  CHECK(t.rows[0][2] == "0.1");
  CHECK(std::stod(t.rows[2][2]) == 1e300);
  CHECK(col(t, "seed") == std::vector<std::string>{"42", "42", "42"});
  CHECK(col(t, "config_hash")[0] == "00000000deadbeef");
  CHECK_THROWS(t.column("absent"));

  // whitespace twin: comment header, one line per row, same field count
  std::istringstream dat(slurp(dir / "sub" / "t.dat"));
  std::string line;
  std::getline(dat, line);
  CHECK(line.rfind("#", 0) == 0);
  int lines = 0;
  while (std::getline(dat, line)) {
    std::istringstream ls(line);
    std::string tok;
    int fields = 0;
    while (ls >> tok) ++fields;
    CHECK(fields == 5);
    ++lines;
  }
  CHECK(lines == 3);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("decay: n=4 smoke run emits 3 rows") {
  const fs::path dir = scratch("smoke");
  ExperimentConfig c = parse_config({{"experiment", "decay"},
                                     {"out", dir.string()},
                                     {"params", {{"n", 4}, {"instances", {"real"}}}}});
  std::ostringstream log;
  const ExperimentOutput out = cmd_decay(c, log);
  const CsvTable t = read_csv((dir / "decay.csv").string());
  CHECK(t.rows.size() == 3);
  CHECK(fs::exists(dir / "decay.dat"));
  CHECK(!out.files.empty());
}

TEST_CASE("same config reproduces every non-timing column") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  std::ostringstream log;
  cmd_decay(decay_cfg(a, 80, {1.0, 1e4}), log);
  cmd_decay(decay_cfg(b, 80, {1.0, 1e4}), log);
  CHECK(slurp(a / "decay.csv") == slurp(b / "decay.csv"));

  auto tink_cfg = [](const fs::path& out) {
    return parse_config({{"experiment", "tink-bench"},
                         {"out", out.string()},
                         {"params", {{"studies", {"comparison"}}, {"sizes", {120}}, {"kappas", {10.0}}}}});
  };
  cmd_tink_bench(tink_cfg(a), log);
  cmd_tink_bench(tink_cfg(b), log);
  const CsvTable ta = read_csv((a / "tink_summary.csv").string()), tb = read_csv((b / "tink_summary.csv").string());
  REQUIRE(ta.rows.size() == tb.rows.size());
  for (const std::string& c : ta.header)
    if (c != "seconds") CHECK(col(ta, c) == col(tb, c));
  CHECK(slurp(a / "tink_trace.csv") == slurp(b / "tink_trace.csv"));

  // checkpoints load back into the same matrix
  const BandedMatrix xa = load_banded((a / "checkpoints" / "tink_kappa10_n120.qscr").string());
  const BandedMatrix xb = load_banded((b / "checkpoints" / "tink_kappa10_n120.qscr").string());
  CHECK((xa.to_dense() - xb.to_dense()).norm() == 0.0);
  CHECK(xa.n() == 120);
}

TEST_CASE("decay profiles: real case and kappa sweep") {
  const DecayRun r = decay_real_run(500, 50);
  const Vec s = r.profile.normalized();
  Index first = -1;
  for (Index l = 0; l < s.size() && first < 0; ++l)
    if (s(l) < 1e-10) first = l + 1;
  CHECK(first > 0);
  CHECK(first <= 50);

  for (double kappa : {1.0, 1e2, 1e4, 1e6, 1e8}) {
    const DecayRun k = decay_kappa_run(200, kappa, false, 1, 40);
    CAPTURE(kappa);
    CHECK(k.profile.sigma(29) / k.profile.sigma(0) <= 1e-8);
  }
}

TEST_CASE("random unitary Hessenberg with r subdiagonals") {
  auto g = make_rng(5, 0);
  for (Index r : {1, 2, 4, 8}) {
    const Index n = 64;
    const Mat w = random_unitary_banded_hessenberg(n, r, g);
    CAPTURE(r);
    CHECK((w.transpose() * w - Mat::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-12);
    bool outer_nonzero = true;
    double below = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j + r < n) outer_nonzero = outer_nonzero && w(j + r, j) != 0.0;
      for (Index i = j + r + 1; i < n; ++i) below += std::abs(w(i, j));
    }
    CHECK(below == 0.0);
    CHECK(outer_nonzero);
  }
}
