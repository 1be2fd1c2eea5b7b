#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace jumpfilter {

/// Experiment configuration parsed from a plain key = value file.
/// '#' starts a comment; unknown keys are rejected with a file:line message;
/// model parameters are passed through as `model.<name>` keys and validated
/// by the registry. `seed` is mandatory.
struct ExperimentConfig {
  std::string model_id;
  std::map<std::string, double> model_params;

  double T{1.0};
  double dt{1e-3};
  int particles{1000};
  double eps_out{-1.0};  // < 0: derived from the particle spread
  int p{2};
  std::uint64_t seed{0};

  // Command-specific numeric options (runs, grid sizes, ...).
  std::map<std::string, double> extras;

  double extra(const std::string& key, double fallback) const;

  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse_string(const std::string& text,
                                       const std::string& origin = "<string>");

  /// Canonical key=value rendering (sorted), used for hashing and artifact
  /// headers.
  std::string canonical() const;
  std::uint64_t hash() const;
};

}  // namespace jumpfilter
