#pragma once

#include <string>
#include <vector>

#include "weak_mixing.hpp"

namespace soe {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key(std::move(key)) {}
  std::string key;
};

// One validated run description; defaults give the two-stage odometer run.
struct RunConfig {
  std::string pipeline = "weakmix";  // weakmix | ztile | entropy
  std::string base = "dyadic";       // dyadic | triadic
  long grid_depth = 11;

  long stages = 2;
  long eps_offset = 2;  // eps_n = 2^{-n-eps_offset}
  long k1 = 2;
  std::vector<long> block_lengths;
  std::vector<long> tower_heights;
  std::vector<long> partition_depths;
  std::vector<long> force_designated;

  std::string sigma = "iid";  // exact | iid
  unsigned long long seed = 1;

  long cell_budget = 4096;
  long orbit_budget = 1 << 20;
  long scan_cap = 0;
  bool check_q_cells = false;

  long lambda_step = 1;  // ztile and entropy pipelines
  long kappa_gx = 1, kappa_gy = 0;

  std::string out_dir;
};

// Flat key = value files: strings in double quotes, integers, true/false,
// integer arrays in brackets, # comments.  Unknown keys are rejected with
// the offending key named.
RunConfig parse_config_toml(const std::string& text);
RunConfig parse_config_json(const std::string& text);
// Dispatches on the .json extension, defaults to the key = value format.
RunConfig load_config_file(const std::string& path);

// Applies a single key = value override (CLI flags reuse the same keys).
void apply_option(RunConfig& config, const std::string& key, const std::string& value);

// Throws ConfigError naming the violated key; checked before any stage runs.
void validate(const RunConfig& config);

WeakMixConfig to_weak_mix(const RunConfig& config);

}  // namespace soe
