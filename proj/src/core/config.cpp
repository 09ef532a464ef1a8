#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

namespace soe {

namespace {

long parse_long(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  }
}

std::vector<long> parse_long_list(const std::string& key, std::string text) {
  if (text.size() < 2 || text.front() != '[' || text.back() != ']')
    throw ConfigError(key, "expected a bracketed integer list, got '" + text + "'");
  text = text.substr(1, text.size() - 2);
  std::vector<long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) throw ConfigError(key, "empty list entry");
    const auto b = item.find_last_not_of(" \t");
    out.push_back(parse_long(key, item.substr(a, b - a + 1)));
  }
  return out;
}

std::string parse_string(const std::string& key, const std::string& text) {
  if (text.size() < 2 || text.front() != '"' || text.back() != '"')
    throw ConfigError(key, "expected a quoted string, got '" + text + "'");
  return text.substr(1, text.size() - 2);
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"pipeline", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.pipeline = parse_string(k, v);
       }},
      {"base", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.base = parse_string(k, v);
       }},
      {"grid_depth", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.grid_depth = parse_long(k, v);
       }},
      {"stages", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.stages = parse_long(k, v);
       }},
      {"eps_offset", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.eps_offset = parse_long(k, v);
       }},
      {"k1", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.k1 = parse_long(k, v);
       }},
      {"block_lengths", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.block_lengths = parse_long_list(k, v);
       }},
      {"tower_heights", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.tower_heights = parse_long_list(k, v);
       }},
      {"partition_depths", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.partition_depths = parse_long_list(k, v);
       }},
      {"force_designated", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.force_designated = parse_long_list(k, v);
       }},
      {"sigma", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.sigma = (!v.empty() && v.front() == '"') ? parse_string(k, v) : v;
       }},
      {"seed", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.seed = static_cast<unsigned long long>(parse_long(k, v));
       }},
      {"cell_budget", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.cell_budget = parse_long(k, v);
       }},
      {"orbit_budget", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.orbit_budget = parse_long(k, v);
       }},
      {"scan_cap", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scan_cap = parse_long(k, v);
       }},
      {"check_q_cells", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.check_q_cells = parse_bool(k, v);
       }},
      {"lambda_step", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.lambda_step = parse_long(k, v);
       }},
      {"kappa_gx", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.kappa_gx = parse_long(k, v);
       }},
      {"kappa_gy", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.kappa_gy = parse_long(k, v);
       }},
      {"out_dir", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.out_dir = (!v.empty() && v.front() == '"') ? parse_string(k, v) : v;
       }},
  };
  return table;
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void apply_option(RunConfig& config, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError(key, "unknown key");
  it->second(config, key, value);
}

RunConfig parse_config_toml(const std::string& text) {
  RunConfig config;
  std::stringstream ss(text);
  std::string line;
  long lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    apply_option(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

RunConfig parse_config_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("", "top level must be an object");
  RunConfig config;
  for (const auto& [key, value] : j.items()) {
    std::string text_value;
    if (value.is_string()) {
      text_value = "\"" + value.get<std::string>() + "\"";
    } else if (value.is_array()) {
      text_value = "[";
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (i) text_value += ",";
        text_value += value[i].dump();
      }
      text_value += "]";
    } else {
      text_value = value.dump();
    }
    apply_option(config, key, text_value);
  }
  return config;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot read config file");
  std::stringstream buf;
  buf << in.rdbuf();
  const bool json = path.size() > 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return json ? parse_config_json(buf.str()) : parse_config_toml(buf.str());
}

void validate(const RunConfig& config) {
  if (config.pipeline != "weakmix" && config.pipeline != "ztile" && config.pipeline != "entropy")
    throw ConfigError("pipeline", "must be weakmix, ztile, or entropy");
  if (config.base != "dyadic" && config.base != "triadic")
    throw ConfigError("base", "must be dyadic or triadic");
  if (config.grid_depth < 1 || config.grid_depth > 24)
    throw ConfigError("grid_depth", "must lie in 1..24");
  if (config.stages < 0) throw ConfigError("stages", "must be nonnegative");
  if (config.eps_offset < 1)
    throw ConfigError("eps_offset",
                      "must be at least 1 so every stage tolerance stays below 2^-n");
  if (config.k1 < 1) throw ConfigError("k1", "must be positive");
  if (config.sigma != "exact" && config.sigma != "iid")
    throw ConfigError("sigma", "must be exact or iid");
  if (config.cell_budget < 1) throw ConfigError("cell_budget", "must be positive");
  if (config.orbit_budget < 1) throw ConfigError("orbit_budget", "must be positive");
  for (std::size_t i = 1; i < config.partition_depths.size(); ++i)
    if (config.partition_depths[i] < config.partition_depths[i - 1])
      throw ConfigError("partition_depths", "must be nondecreasing so the partitions refine");
  for (long d : config.partition_depths)
    if (d < 0 || d > 16) throw ConfigError("partition_depths", "entries must lie in 0..16");
  for (long n : config.force_designated)
    if (n < 1 || n > config.stages)
      throw ConfigError("force_designated", "entries must name built stages");
  if (config.pipeline == "ztile") {
    if (config.base != "triadic")
      throw ConfigError("base", "ztile runs on the triadic base so tile sides stay odd");
    if (config.stages < 1 || config.stages > 3)
      throw ConfigError("stages", "ztile supports 1..3 built stages");
    if (config.grid_depth < 2 * config.stages)
      throw ConfigError("grid_depth", "needs at least two digits per ztile stage");
  }
}

WeakMixConfig to_weak_mix(const RunConfig& config) {
  WeakMixConfig w;
  w.grid_depth = static_cast<unsigned>(config.grid_depth);
  w.stage_count = config.stages;
  w.eps_offset = config.eps_offset;
  w.k1 = config.k1;
  w.block_lengths = config.block_lengths;
  w.tower_heights = config.tower_heights;
  for (long d : config.partition_depths) w.partition_depths.push_back(static_cast<unsigned>(d));
  w.force_designated = config.force_designated;
  w.sigma_mode = config.sigma == "exact" ? SigmaMode::exact_uniform : SigmaMode::seeded_iid;
  w.seed = config.seed;
  w.cell_budget = config.cell_budget;
  w.check_q_cells = config.check_q_cells;
  w.orbit_budget = config.orbit_budget;
  w.scan_cap = config.scan_cap;
  return w;
}

}  // namespace soe
