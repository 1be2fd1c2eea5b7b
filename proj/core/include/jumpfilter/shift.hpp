#pragma once

#include <functional>
#include <vector>

#include "jumpfilter/coefficients.hpp"
#include "jumpfilter/test_function.hpp"

namespace jumpfilter {

/// A shift map zeta (one xi_t(.,z) or eta_t(.,z) slice) together with its
/// Jacobian and the constants it is declared to satisfy: Lipschitz bound
/// `lip` and the inverse-Lipschitz constant `lambda` of x + theta zeta(x).
struct ShiftMap {
  int dim{1};
  std::function<Vec(const Vec&)> zeta;
  std::function<Mat(const Vec&)> jacobian;  // empty -> finite differences
  double lip{0};
  double lambda{1};

  Vec tau(const Vec& x) const { return x + zeta(x); }
  /// Analytic Jacobian if provided, else central differences with
  /// step 1e-6 (1+|x|).
  Mat jacobian_at(const Vec& x) const;

  static ShiftMap from_xi(const CoefficientSet& c, double t, const Vec& y_obs,
                          const Vec& mark);
  static ShiftMap from_eta(const CoefficientSet& c, double t, const Vec& y_obs,
                           const Vec& mark);
};

/// Solve x + zeta(x) = y. Fixed-point iteration when lip < 1, damped Newton
/// otherwise; throws NumericalFailure with the residual after 200 iterations.
Vec invert_shift(const ShiftMap& shift, const Vec& y, double tol);

/// zeta*(x) = -zeta(tau^{-1}(x)) = -x + tau^{-1}(x); both forms are evaluated
/// and must agree within tol.
Vec zeta_star(const ShiftMap& shift, const Vec& x, double tol);

struct FrakC {
  double c;      // |det D tau^{-1}(x)| - 1
  double c_bar;  // c - div zeta*(x)
};

/// Determinant corrections of the adjoint calculus at x. Requires
/// det(I + D zeta) > 0; orientation cannot flip under the (pc2) condition.
FrakC frak_c(const ShiftMap& shift, const Vec& x, double tol = 1e-12);

enum class AdjointKind { T, I, J };

/// Formal adjoints of T, I, J acting on smooth functions:
///   T* = |det D tau^{-1}| T^{zeta*}
///   I* = I^{zeta*} + c T^{zeta*}
///   J* = J^{zeta*} + c I^{zeta*} + (zeta*^i + zeta^i) D_i
///        + [c_bar + D_i(zeta*^i + zeta^i)]
double adjoint_apply(const ShiftMap& shift, AdjointKind which,
                     const TestFunction& phi, const Vec& x, double tol);

struct MollifiedDetEntry {
  double eps;
  double min_det;
  bool above_half_lambda;
};
struct MollifiedDetReport {
  double sampled_min_det;  // min |det D tau| on the grid, unmollified
  std::vector<MollifiedDetEntry> entries;
};

/// For each eps, mollifies D tau with the compactly supported bump kernel
/// and reports the minimum |det| over the sample grid, flagged against
/// lambda/2.
MollifiedDetReport mollified_det_check(const ShiftMap& shift,
                                       const std::vector<double>& eps_list,
                                       const std::vector<Vec>& grid);

}  // namespace jumpfilter
