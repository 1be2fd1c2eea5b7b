#pragma once

#include "jumpfilter/coefficients.hpp"
#include "jumpfilter/test_function.hpp"

namespace jumpfilter {

/// L phi = a^{ij} D_ij phi + b^i D_i phi with coefficients frozen at (t,x,y).
double apply_L(const CoefficientSet& c, double t, const Vec& y_obs,
               const TestFunction& phi, const Vec& x);

/// M^k phi = rho^{ik} D_i phi + B^k phi, 1 <= k <= d' (1-based).
double apply_M(const CoefficientSet& c, double t, const Vec& y_obs, int k,
               const TestFunction& phi, const Vec& x);

/// tilde-L phi = L phi + sum_k B^k(t, x_sig, y) M^k phi; x_sig is the signal
/// location entering beta_t.
double apply_tilde_L(const CoefficientSet& c, double t, const Vec& x_sig,
                     const Vec& y_obs, const TestFunction& phi, const Vec& x);

/// T phi(x) = phi(x + zeta(x)), I = T - id, J = I - zeta . grad.
double apply_T(const std::function<Vec(const Vec&)>& zeta,
               const TestFunction& phi, const Vec& x);
double apply_I(const std::function<Vec(const Vec&)>& zeta,
               const TestFunction& phi, const Vec& x);
double apply_J(const std::function<Vec(const Vec&)>& zeta,
               const TestFunction& phi, const Vec& x);

}  // namespace jumpfilter
