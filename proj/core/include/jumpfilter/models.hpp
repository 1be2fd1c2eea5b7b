#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jumpfilter/coefficients.hpp"
#include "jumpfilter/path.hpp"

namespace jumpfilter {

/// A ready-to-run model: coefficients, jump activities, initial law.
struct ModelSpec {
  std::string id;
  CoefficientSet coeffs;
  std::optional<JumpActivity> act0, act1;
  Vec x0_mean;
  double pi0_std{1.0};
  Vec y0;
  std::function<Vec(Rng&)> pi0_sampler;

  // Linear-Gaussian parameters when the model (ignoring the clip) is
  // dX = (a0 + a1 X)dt + sigma dW, dY = (c0 + c1 X)dt + dV.
  bool kalman_applicable{false};
  double lin_a0{0}, lin_a1{0}, lin_sigma{1}, lin_c0{0}, lin_c1{1};
};

/// Built-in registry: "trivial-constants", "clipped-linear-1d",
/// "jump-shared-1d", "pure-jump-2d". Unknown ids and unknown parameter
/// names are rejected.
ModelSpec make_model(const std::string& id,
                     const std::map<std::string, double>& params = {});

std::vector<std::string> model_registry_ids();

}  // namespace jumpfilter
