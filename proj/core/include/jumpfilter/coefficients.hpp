#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "jumpfilter/rng.hpp"

namespace jumpfilter {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Coefficients of the signal/observation system together with the constants
/// they are declared to satisfy. All callables take (t, x, y); jump
/// coefficients additionally take the mark.
struct CoefficientSet {
  int d{1};       // signal dimension
  int d1{1};      // driving Wiener dimension of the signal
  int dprime{1};  // observation dimension

  std::function<Vec(double, const Vec&, const Vec&)> b;      // R^d
  std::function<Vec(double, const Vec&, const Vec&)> B;      // R^d'
  std::function<Mat(double, const Vec&, const Vec&)> sigma;  // d x d1
  std::function<Mat(double, const Vec&, const Vec&)> rho;    // d x d'
  std::function<Vec(double, const Vec&, const Vec&, const Vec&)> eta;  // R^d
  std::function<Vec(double, const Vec&, const Vec&, const Vec&)> xi;   // R^d

  // Analytic Jacobians in x; empty means finite differences.
  std::function<Mat(double, const Vec&, const Vec&, const Vec&)> xi_jacobian_x;
  std::function<Mat(double, const Vec&, const Vec&, const Vec&)> eta_jacobian_x;

  // Declared constants (growth, bound, Lipschitz, inverse-Lipschitz).
  double K0{0}, K1{0}, K{0}, L{0}, lambda{1};

  // Mark envelopes and their bounds.
  std::function<double(const Vec&)> xi_bar, eta_bar;
  double K_xi{0}, K_eta{0};

  /// a = (sigma sigma^T + rho rho^T)/2 at (t, x, y).
  Mat diffusion_a(double t, const Vec& x, const Vec& y) const;
};

struct AssumptionCheckOptions {
  int samples{10000};
  double box_radius{5.0};   // sample points uniformly in [-r, r]^(d+d')
  double time_horizon{1.0};
  std::uint64_t seed{12345};
  std::vector<Vec> marks0, marks1;  // representative marks for eta / xi
};

struct AssumptionReport {
  bool ok{true};
  double max_growth_ratio{0};      // |b|+|sigma|+|rho| over K0+K1|z|
  double max_B{0};                 // sup |B| sampled, vs K
  double max_lipschitz_ratio{0};   // b,B,sigma,rho over L
  double max_xi_ratio{0};          // |xi| over xi_bar (K0+K1|z|)
  double max_eta_ratio{0};
  double max_xi_lipschitz{0};      // over xi_bar
  double max_eta_lipschitz{0};
  double min_pc2_ratio{1e300};     // |x1-x2+theta(f(x1)-f(x2))| / (lambda |x1-x2|)
  double max_rhoB_lipschitz{0};    // over L
  std::vector<std::string> violations;
};

/// Randomized sampling check of Assumptions 2.1-2.4 style constraints.
AssumptionReport check_assumptions(const CoefficientSet& c,
                                   const AssumptionCheckOptions& opt);

}  // namespace jumpfilter
