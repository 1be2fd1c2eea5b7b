#include "jumpfilter/shift.hpp"

#include <cmath>

#include "jumpfilter/errors.hpp"
#include "jumpfilter/truncation.hpp"

namespace jumpfilter {

Mat ShiftMap::jacobian_at(const Vec& x) const {
  if (jacobian) return jacobian(x);
  const int d = dim;
  Mat j(d, d);
  for (int i = 0; i < d; ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x[i]));
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    j.col(i) = (zeta(xp) - zeta(xm)) / (2.0 * h);
  }
  return j;
}

ShiftMap ShiftMap::from_xi(const CoefficientSet& c, double t, const Vec& y_obs,
                           const Vec& mark) {
  ShiftMap s;
  s.dim = c.d;
  s.zeta = [&c, t, y_obs, mark](const Vec& x) { return c.xi(t, x, y_obs, mark); };
  if (c.xi_jacobian_x)
    s.jacobian = [&c, t, y_obs, mark](const Vec& x) {
      return c.xi_jacobian_x(t, x, y_obs, mark);
    };
  s.lip = (c.xi_bar ? c.xi_bar(mark) : c.K_xi);
  s.lambda = c.lambda;
  return s;
}

ShiftMap ShiftMap::from_eta(const CoefficientSet& c, double t, const Vec& y_obs,
                            const Vec& mark) {
  ShiftMap s;
  s.dim = c.d;
  s.zeta = [&c, t, y_obs, mark](const Vec& x) { return c.eta(t, x, y_obs, mark); };
  if (c.eta_jacobian_x)
    s.jacobian = [&c, t, y_obs, mark](const Vec& x) {
      return c.eta_jacobian_x(t, x, y_obs, mark);
    };
  s.lip = (c.eta_bar ? c.eta_bar(mark) : c.K_eta);
  s.lambda = c.lambda;
  return s;
}

Vec invert_shift(const ShiftMap& shift, const Vec& y, double tol) {
  if (!(tol > 0.0)) throw ContractViolation("invert_shift: tol must be > 0");
  if (y.size() != shift.dim) throw ContractViolation("invert_shift: dimension mismatch");
  const int max_iter = 200;
  Vec x = y;
  if (shift.lip < 1.0 && shift.lip > 0.0) {
    // Contraction: |x_n - x*| <= lip/(1-lip) |step|; verify the residual
    // once the step-size bound is inside tol.
    const double step_tol = tol * (1.0 - shift.lip) / (1.0 + shift.lip);
    for (int it = 0; it < max_iter; ++it) {
      const Vec next = y - shift.zeta(x);
      const double step = (next - x).norm();
      x = next;
      if (step <= step_tol) {
        if ((x + shift.zeta(x) - y).norm() <= tol) return x;
      }
    }
  } else if (shift.lip == 0.0) {
    // Declared constant shift; one step is exact.
    x = y - shift.zeta(y);
    const double res = (x + shift.zeta(x) - y).norm();
    if (res <= tol) return x;
  } else {
    for (int it = 0; it < max_iter; ++it) {
      const Vec f = x + shift.zeta(x) - y;
      if (f.norm() <= tol) return x;
      const Mat jt = Mat::Identity(shift.dim, shift.dim) + shift.jacobian_at(x);
      const Vec step = jt.fullPivLu().solve(f);
      // Damping: halve until the residual does not grow.
      double alpha = 1.0;
      const double base = f.norm();
      for (int k = 0; k < 30; ++k) {
        const Vec cand = x - alpha * step;
        if ((cand + shift.zeta(cand) - y).norm() < base) {
          x = cand;
          break;
        }
        alpha *= 0.5;
        if (k == 29) x = x - alpha * step;
      }
    }
    if ((x + shift.zeta(x) - y).norm() <= tol) return x;
  }
  throw NumericalFailure("invert_shift: no convergence in 200 iterations",
                         (x + shift.zeta(x) - y).norm());
}

Vec zeta_star(const ShiftMap& shift, const Vec& x, double tol) {
  const Vec w = invert_shift(shift, x, tol);
  const Vec a = -shift.zeta(w);
  const Vec b = w - x;
  if ((a - b).norm() > std::max(tol, 1e-12 * (1.0 + x.norm())) * 10.0)
    throw NumericalFailure("zeta_star: the two defining formulas disagree",
                           (a - b).norm());
  return a;
}

FrakC frak_c(const ShiftMap& shift, const Vec& x, double tol) {
  const Vec w = invert_shift(shift, x, tol);
  const Mat dz = shift.jacobian_at(w);
  const Mat dtau = Mat::Identity(shift.dim, shift.dim) + dz;
  const double det = dtau.determinant();
  if (std::abs(det) < 1e-12)
    throw NumericalFailure("frak_c: singular Jacobian of tau", std::abs(det));
  if (det < 0.0)
    throw NumericalFailure("frak_c: negative Jacobian determinant; (pc2) excludes orientation flips", det);
  FrakC out;
  out.c = 1.0 / det - 1.0;
  // D zeta*(x) = -D zeta(w) (I + D zeta(w))^{-1}; c_bar = c - trace(D zeta*).
  const Mat dzs = -dz * dtau.inverse();
  out.c_bar = out.c - dzs.trace();
  return out;
}

double adjoint_apply(const ShiftMap& shift, AdjointKind which,
                     const TestFunction& phi, const Vec& x, double tol) {
  const Vec w = invert_shift(shift, x, tol);  // w = x + zeta*(x)
  const double phi_w = phi.value(w);
  const Mat dz_w = shift.jacobian_at(w);
  const Mat dtau_w = Mat::Identity(shift.dim, shift.dim) + dz_w;
  const double det = dtau_w.determinant();
  if (std::abs(det) < 1e-12)
    throw NumericalFailure("adjoint_apply: singular Jacobian", std::abs(det));
  if (which == AdjointKind::T) return phi_w / std::abs(det);

  if (det < 0.0)
    throw NumericalFailure(
        "adjoint_apply: negative Jacobian determinant; (pc2) excludes orientation flips",
        det);
  const double c = 1.0 / det - 1.0;
  const double phi_x = phi.value(x);
  const double I_star = (phi_w - phi_x) + c * phi_w;
  if (which == AdjointKind::I) return I_star;

  // J* per the adjoint display; all derivative terms evaluated at x.
  const Vec zs = w - x;  // zeta*(x)
  const Vec z_at_x = shift.zeta(x);
  const Vec grad = phi.gradient(x);
  const double J_zs = phi_w - phi_x - zs.dot(grad);
  const double I_zs = phi_w - phi_x;
  // D zeta*(x) = -D zeta(w) (I + D zeta(w))^{-1}.
  const double div_zs = (-dz_w * dtau_w.inverse()).trace();
  const double c_bar = c - div_zs;
  const double div_z = shift.jacobian_at(x).trace();
  return J_zs + c * I_zs + (zs + z_at_x).dot(grad) +
         (c_bar + div_zs + div_z) * phi_x;
}

MollifiedDetReport mollified_det_check(const ShiftMap& shift,
                                       const std::vector<double>& eps_list,
                                       const std::vector<Vec>& grid) {
  if (grid.empty()) throw ContractViolation("mollified_det_check: empty sample grid");
  MollifiedDetReport rep;
  rep.sampled_min_det = 1e300;
  const int d = shift.dim;
  for (const Vec& x : grid) {
    const double det =
        (Mat::Identity(d, d) + shift.jacobian_at(x)).determinant();
    rep.sampled_min_det = std::min(rep.sampled_min_det, std::abs(det));
  }
  for (double eps : eps_list) {
    double min_det = 1e300;
    for (const Vec& x : grid) {
      Mat dtau_eps = Mat::Zero(d, d);
      // Convolution against the unit-ball bump at scale eps,
      // normalized over the same fixed quadrature nodes.
      double mass = 0.0;
      bump_ball_quadrature(d, [&](const Vec& u, double qw) {
        const double kv = qw;  // qw already carries the bump value
        mass += kv;
        dtau_eps += kv * (Mat::Identity(d, d) + shift.jacobian_at(x - eps * u));
      });
      dtau_eps /= mass;
      min_det = std::min(min_det, std::abs(dtau_eps.determinant()));
    }
    rep.entries.push_back({eps, min_det, min_det >= 0.5 * shift.lambda});
  }
  return rep;
}

}  // namespace jumpfilter
