#pragma once

#include "qscare/dense.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qscare {

using Json = nlohmann::json;

enum class ParamKind { integer, number, boolean, string, int_list, num_list, string_list };

struct ParamSpec {
  std::string key;
  ParamKind kind;
  Json def;
  double min = -1e300, max = 1e300;  // numeric kinds, per element for lists
  std::vector<std::string> choices;  // string kinds, empty = any
  std::string doc;
};

// Experiments with a parameter table, in CLI order.
const std::vector<std::string>& experiment_names();
const std::vector<ParamSpec>& experiment_params(const std::string& experiment);

// JSON Schema of the config file, all experiments.
Json config_schema();

// {"experiment": ..., "seed": ..., "out": ..., "threads": ..., "params": {...}}
// Missing params take their defaults; unknown keys anywhere are rejected.
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  std::string out = "results";
  int threads = 0;
  Json params = Json::object();  // resolved, every key present

  // FNV-1a of the canonical dump of experiment, seed and params.
  std::uint64_t hash() const;
  std::string hash_hex() const;
  Json to_json() const;

  std::int64_t integer(const std::string& key) const;
  double number(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::string str(const std::string& key) const;
  std::vector<Index> integers(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<std::string> strings(const std::string& key) const;
};

ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::string& path);
ExperimentConfig default_config(const std::string& experiment);

std::uint64_t fnv1a64(std::string_view s);

}  // namespace qscare
