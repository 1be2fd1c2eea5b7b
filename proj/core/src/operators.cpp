#include "jumpfilter/operators.hpp"

#include "jumpfilter/errors.hpp"

namespace jumpfilter {

double apply_L(const CoefficientSet& c, double t, const Vec& y_obs,
               const TestFunction& phi, const Vec& x) {
  const Mat a = c.diffusion_a(t, x, y_obs);
  const Mat h = phi.hessian(x);
  const Vec g = phi.gradient(x);
  return (a.array() * h.array()).sum() + c.b(t, x, y_obs).dot(g);
}

double apply_M(const CoefficientSet& c, double t, const Vec& y_obs, int k,
               const TestFunction& phi, const Vec& x) {
  if (k < 1 || k > c.dprime) throw ContractViolation("apply_M: k out of range");
  const Mat r = c.rho(t, x, y_obs);
  const Vec g = phi.gradient(x);
  return r.col(k - 1).dot(g) + c.B(t, x, y_obs)[k - 1] * phi.value(x);
}

double apply_tilde_L(const CoefficientSet& c, double t, const Vec& x_sig,
                     const Vec& y_obs, const TestFunction& phi, const Vec& x) {
  double v = apply_L(c, t, y_obs, phi, x);
  const Vec beta = c.B(t, x_sig, y_obs);
  for (int k = 1; k <= c.dprime; ++k)
    v += beta[k - 1] * apply_M(c, t, y_obs, k, phi, x);
  return v;
}

double apply_T(const std::function<Vec(const Vec&)>& zeta,
               const TestFunction& phi, const Vec& x) {
  return phi.value(x + zeta(x));
}

double apply_I(const std::function<Vec(const Vec&)>& zeta,
               const TestFunction& phi, const Vec& x) {
  return phi.value(x + zeta(x)) - phi.value(x);
}

double apply_J(const std::function<Vec(const Vec&)>& zeta,
               const TestFunction& phi, const Vec& x) {
  const Vec z = zeta(x);
  return phi.value(x + z) - phi.value(x) - z.dot(phi.gradient(x));
}

}  // namespace jumpfilter
