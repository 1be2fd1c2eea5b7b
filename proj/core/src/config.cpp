#include "jumpfilter/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "jumpfilter/errors.hpp"

namespace jumpfilter {

namespace {

const std::set<std::string>& known_scalar_keys() {
  static const std::set<std::string> keys = {
      "model",  "T",    "dt",    "particles", "eps_out", "p", "seed",
      // command-specific extras
      "runs",   "seeds", "grid_n", "grid_lo", "grid_hi", "snapshot_dt",
      "resample", "instances", "atoms", "eps", "out_every",
  };
  return keys;
}

const std::set<std::string>& extra_keys() {
  static const std::set<std::string> keys = {
      "runs",   "seeds", "grid_n", "grid_lo", "grid_hi", "snapshot_dt",
      "resample", "instances", "atoms", "eps", "out_every",
  };
  return keys;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_number(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(where + ": not a number: '" + v + "'");
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double ExperimentConfig::extra(const std::string& key, double fallback) const {
  auto it = extras.find(key);
  return it == extras.end() ? fallback : it->second;
}

ExperimentConfig ExperimentConfig::parse_string(const std::string& text,
                                                const std::string& origin) {
  ExperimentConfig cfg;
  bool seed_seen = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    const std::size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(where + ": empty key or value");

    if (key == "model") {
      cfg.model_id = value;
    } else if (key.rfind("model.", 0) == 0) {
      const std::string pname = key.substr(6);
      if (pname.empty()) throw ConfigError(where + ": empty model parameter name");
      cfg.model_params[pname] = parse_number(value, where);
    } else if (key == "T") {
      cfg.T = parse_number(value, where);
    } else if (key == "dt") {
      cfg.dt = parse_number(value, where);
    } else if (key == "particles") {
      cfg.particles = static_cast<int>(parse_number(value, where));
    } else if (key == "eps_out") {
      cfg.eps_out = parse_number(value, where);
    } else if (key == "p") {
      cfg.p = static_cast<int>(parse_number(value, where));
    } else if (key == "seed") {
      try {
        cfg.seed = std::stoull(value);
      } catch (const std::exception&) {
        throw ConfigError(where + ": seed must be a non-negative integer");
      }
      seed_seen = true;
    } else if (extra_keys().count(key)) {
      cfg.extras[key] = parse_number(value, where);
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
    (void)known_scalar_keys();
  }
  if (cfg.model_id.empty())
    throw ConfigError(origin + ": missing mandatory key 'model'");
  if (!seed_seen) throw ConfigError(origin + ": missing mandatory key 'seed'");
  if (!(cfg.T > 0.0) || !(cfg.dt > 0.0))
    throw ConfigError(origin + ": T and dt must be positive");
  if (cfg.particles < 1) throw ConfigError(origin + ": particles must be >= 1");
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream out;
  out << "T=" << format_number(T) << "\n";
  out << "dt=" << format_number(dt) << "\n";
  if (eps_out >= 0.0) out << "eps_out=" << format_number(eps_out) << "\n";
  for (const auto& [k, v] : extras) out << k << "=" << format_number(v) << "\n";
  out << "model=" << model_id << "\n";
  for (const auto& [k, v] : model_params)
    out << "model." << k << "=" << format_number(v) << "\n";
  out << "p=" << p << "\n";
  out << "particles=" << particles << "\n";
  out << "seed=" << seed << "\n";
  return out.str();
}

std::uint64_t ExperimentConfig::hash() const {
  // FNV-1a over the canonical rendering.
  const std::string s = canonical();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace jumpfilter
