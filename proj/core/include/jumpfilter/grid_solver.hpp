#pragma once

#include <optional>
#include <vector>

#include "jumpfilter/path.hpp"

namespace jumpfilter {

struct GridSolverOptions {
  double theta{0.5};  // theta-scheme weight for the diffusion step
  std::vector<double> snapshot_times;  // empty: keep final only
};

struct GridSolverResult {
  std::vector<double> x;
  std::vector<double> times;                // snapshot times (t=0 included)
  std::vector<std::vector<double>> u;       // unnormalized density per snapshot
  std::vector<double> mass;                 // trapezoid mass per snapshot

  const std::vector<double>& final_density() const { return u.back(); }
};

/// Finite-difference reference solver for the unnormalized filtering density
/// in d = d' = 1 with rho == 0: per observation cell a conservative
/// theta-scheme step for L*, the exact multiplicative update
/// exp(B dVt - B^2 dt / 2) for the M* part, quadrature over the mark law for
/// the N0 drift term, and the determinant-weighted pushforward at observed
/// N1 jumps. Absorbing far-field boundaries.
GridSolverResult reference_grid_solver(const CoefficientSet& coeffs,
                                       const std::optional<JumpActivity>& act0,
                                       const ObservationRecord& obs,
                                       const std::vector<double>& x_grid,
                                       const std::vector<double>& pi0_grid,
                                       const GridSolverOptions& opt = {});

}  // namespace jumpfilter
