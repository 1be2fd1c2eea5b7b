#include "jumpfilter/truncation.hpp"

#include <cmath>
#include <vector>

#include "jumpfilter/errors.hpp"
#include "jumpfilter/quadrature.hpp"
#include "jumpfilter/rng.hpp"

namespace jumpfilter {

namespace {

double smoothstep_s(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = smoothstep_s(t);
  const double b = smoothstep_s(1.0 - t);
  return a / (a + b);
}

double smoothstep_prime(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = smoothstep_s(t);
  const double b = smoothstep_s(1.0 - t);
  const double ap = a / (t * t);
  const double bp = b / ((1.0 - t) * (1.0 - t));
  return (ap * b + a * bp) / ((a + b) * (a + b));
}

}  // namespace

double smooth_cutoff_chi(double r) {
  const double a = std::abs(r);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  return 1.0 - smoothstep(a - 1.0);
}

double smooth_cutoff_chi_prime(double r) {
  const double a = std::abs(r);
  if (a <= 1.0 || a >= 2.0) return 0.0;
  const double d = -smoothstep_prime(a - 1.0);
  return r >= 0.0 ? d : -d;
}

std::function<Vec(const Vec&)> truncate_chi(std::function<Vec(const Vec&)> f,
                                            double n) {
  if (!(n > 0.0)) throw ContractViolation("truncate_chi: n must be positive");
  return [f = std::move(f), n](const Vec& z) -> Vec {
    const double c = smooth_cutoff_chi(z.norm() / n);
    if (c == 0.0) return Vec::Zero(z.size());
    return (c * f(z)).eval();
  };
}

std::function<double(const Vec&)> truncate_chi_scalar(
    std::function<double(const Vec&)> f, double n) {
  if (!(n > 0.0)) throw ContractViolation("truncate_chi_scalar: n must be positive");
  return [f = std::move(f), n](const Vec& z) {
    const double c = smooth_cutoff_chi(z.norm() / n);
    return c == 0.0 ? 0.0 : c * f(z);
  };
}

double bump_kernel(const Vec& x) {
  const double s = x.squaredNorm();
  return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
}

void bump_ball_quadrature(int d,
                          const std::function<void(const Vec&, double)>& visit,
                          int order) {
  const auto& gl = gauss_legendre(order);
  Vec u(d);
  std::vector<int> idx(d, 0);
  for (;;) {
    double w = 1.0;
    for (int j = 0; j < d; ++j) {
      u[j] = gl.nodes[idx[j]];
      w *= gl.weights[idx[j]];
    }
    const double k = bump_kernel(u);
    if (k > 0.0) visit(u, w * k);
    int pos = d - 1;
    while (pos >= 0 && ++idx[pos] == order) idx[pos--] = 0;
    if (pos < 0) break;
  }
}

double kappa_plateau(double r, double R, double eps_cut) {
  const double inner = R + 1.0;
  if (r <= inner) return 1.0;
  const double outer = inner * std::exp(1.0 / eps_cut);
  if (r >= outer) return 0.0;
  return 1.0 + eps_cut * std::log(inner / r);
}

double kappa_R_eps(const Vec& x, double R, double eps_cut) {
  if (!(R > 0.0) || !(eps_cut > 0.0))
    throw ContractViolation("kappa_R_eps: R and eps_cut must be positive");
  const int d = static_cast<int>(x.size());
  double num = 0.0, den = 0.0;
  bump_ball_quadrature(d, [&](const Vec& u, double w) {
    den += w;
    num += w * kappa_plateau((x - u).norm(), R, eps_cut);
  });
  return num / den;
}

BiLipTruncation bilipschitz_truncate(const ShiftMap& shift, double R, double M,
                                     std::uint64_t seed, int pairs) {
  if (!(M > 0.0) || !(R > 0.0))
    throw ContractViolation("bilipschitz_truncate: R, M must be positive");
  const int d = shift.dim;

  auto support_radius = [&](double eps_cut) {
    return (R + 1.0) * std::exp(1.0 / eps_cut) + 1.0;
  };

  auto make_truncated = [&](double eps_cut) {
    auto zeta = shift.zeta;
    return [zeta, R, eps_cut](const Vec& x) -> Vec {
      const double k = kappa_R_eps(x, R, eps_cut);
      if (k == 0.0) return Vec::Zero(x.size());
      return (k * zeta(x)).eval();
    };
  };

  // Sampled biLipschitz constant of x + theta zeta^R over pair scales both
  // absolute and relative to |x| (large-radius pairs need relative offsets
  // to stay resolvable in floating point).
  auto sampled_constant = [&](const std::function<Vec(const Vec&)>& zr,
                              double rbar) {
    Rng rng(derive_seed(seed, 17));
    double worst = 1.0;
    for (int n = 0; n < pairs; ++n) {
      Vec x(d), dir(d);
      const double radius = rbar * std::pow(rng.uniform_pos(), 2.0);
      for (int j = 0; j < d; ++j) x[j] = rng.uniform(-1.0, 1.0);
      if (x.norm() > 0) x *= radius / std::max(x.norm(), 1e-12);
      for (int j = 0; j < d; ++j) dir[j] = rng.normal();
      dir.normalize();
      const double scale =
          std::max(1e-3, 1e-5 * x.norm()) * std::pow(10.0, rng.uniform(0.0, 3.0));
      const Vec y = x + scale * dir;
      const double dxy = (x - y).norm();
      if (dxy <= 0.0) continue;
      const Vec zx = zr(x);
      const Vec zy = zr(y);
      for (double theta : {0.25, 0.5, 0.75, 1.0}) {
        const double dt = (x + theta * zx - y - theta * zy).norm();
        if (dt <= 0.0) return 1e300;
        worst = std::max(worst, std::max(dt / dxy, dxy / dt));
      }
    }
    return worst;
  };

  auto passes = [&](double eps_cut, double* out_const) {
    const auto zr = make_truncated(eps_cut);
    const double c = sampled_constant(zr, support_radius(eps_cut) + 1.0);
    if (out_const) *out_const = c;
    return c <= M;
  };

  double lo = 0.05, hi = 1.0;
  double best = -1.0, best_const = 0.0;
  double c_hi;
  if (passes(hi, &c_hi)) {
    best = hi;
    best_const = c_hi;
  } else {
    double c_lo;
    if (!passes(lo, &c_lo))
      throw NumericalFailure(
          "bilipschitz_truncate: no admissible cutoff scale found", c_lo);
    best = lo;
    best_const = c_lo;
    for (int it = 0; it < 60 && hi - lo > 1e-3; ++it) {
      const double mid = 0.5 * (lo + hi);
      double c_mid;
      if (passes(mid, &c_mid)) {
        lo = mid;
        best = mid;
        best_const = c_mid;
      } else {
        hi = mid;
      }
    }
  }

  BiLipTruncation out;
  out.eps_cut = best;
  out.support_radius = support_radius(best);
  out.sampled_bilip = best_const;
  out.map.dim = d;
  out.map.zeta = make_truncated(best);
  out.map.lip = std::max(shift.lip, best_const - 1.0);
  out.map.lambda = 1.0 / M;
  return out;
}

}  // namespace jumpfilter
