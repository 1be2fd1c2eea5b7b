#pragma once

#include "jumpfilter/path.hpp"

namespace jumpfilter {

struct BundleDims {
  int d1{1};      // Wiener dimension driving the signal
  int dprime{1};  // observation / V dimension
};

/// Sample driving noise on [0, T]: homogeneous Poisson events for each
/// activity, Gaussian increments on the jump-adapted grid. Fully determined
/// by the seed.
PathBundle sample_bundle(double T, double dt,
                         const std::optional<JumpActivity>& act0,
                         const std::optional<JumpActivity>& act1,
                         const BundleDims& dims, std::uint64_t seed);

/// Euler-Maruyama on the jump-adapted grid. Compensator drifts of the
/// compensated jump measures are integrated continuously with a one-point
/// mark rule at the cached mean mark.
SystemPath simulate_system(const CoefficientSet& coeffs, const Vec& x0,
                           const Vec& y0, const PathBundle& bundle);

/// gamma_t = exp(-int B dV - 1/2 int |B|^2 ds) on the path grid,
/// accumulated in log space.
std::vector<double> girsanov_weight_path(const CoefficientSet& coeffs,
                                         const SystemPath& path);

/// tilde V_t = int B(s, Z_s) ds + V_t on the path grid.
std::vector<Vec> innovation_path(const CoefficientSet& coeffs,
                                 const SystemPath& path);

}  // namespace jumpfilter
