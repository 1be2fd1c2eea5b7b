#pragma once

#include <vector>

#include "jumpfilter/path.hpp"

namespace jumpfilter {

/// Scalar Kalman-Bucy reference filter for
///   dX = (a0 + a1 X) dt + sigma dW,   dY = (c0 + c1 X) dt + dV.
struct KalmanBucy {
  double a0{0}, a1{0}, sigma{1}, c0{0}, c1{1};

  struct Result {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> var;
  };

  /// Integrates the mean/variance ODE-SDE pair along the observation grid
  /// (Euler, using the exact dY increments).
  Result run(const ObservationRecord& obs, double m0, double v0) const;
};

}  // namespace jumpfilter
