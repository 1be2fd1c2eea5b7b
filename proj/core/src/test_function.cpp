#include "jumpfilter/test_function.hpp"

#include <cmath>

#include "jumpfilter/errors.hpp"

namespace jumpfilter {

double TestFunction::derivative_consistency(std::span<const Vec> points) const {
  double worst = 0.0;
  for (const Vec& x : points) {
    const int d = static_cast<int>(x.size());
    const Vec g = gradient(x);
    const Mat h = hessian(x);
    for (int i = 0; i < d; ++i) {
      const double step = 1e-5 * (1.0 + std::abs(x[i]));
      Vec xp = x, xm = x;
      xp[i] += step;
      xm[i] -= step;
      const double fd = (value(xp) - value(xm)) / (2.0 * step);
      const double scale = std::max({std::abs(g[i]), std::abs(fd), 1e-8});
      worst = std::max(worst, std::abs(fd - g[i]) / scale);
      const Vec gp = gradient(xp);
      const Vec gm = gradient(xm);
      for (int j = 0; j < d; ++j) {
        const double hfd = (gp[j] - gm[j]) / (2.0 * step);
        const double hscale = std::max({std::abs(h(i, j)), std::abs(hfd), 1e-8});
        worst = std::max(worst, std::abs(hfd - h(j, i)) / hscale);
      }
    }
  }
  return worst;
}

TestFunction TestFunction::constant(int d, double c) {
  TestFunction f;
  f.dim = d;
  f.value = [c](const Vec&) { return c; };
  f.gradient = [d](const Vec&) { return Vec::Zero(d).eval(); };
  f.hessian = [d](const Vec&) { return Mat::Zero(d, d).eval(); };
  return f;
}

TestFunction TestFunction::coordinate(int d, int i) {
  if (i < 0 || i >= d) throw ContractViolation("TestFunction::coordinate: index out of range");
  TestFunction f;
  f.dim = d;
  f.value = [i](const Vec& x) { return x[i]; };
  f.gradient = [d, i](const Vec&) {
    Vec g = Vec::Zero(d);
    g[i] = 1.0;
    return g;
  };
  f.hessian = [d](const Vec&) { return Mat::Zero(d, d).eval(); };
  return f;
}

TestFunction TestFunction::quadratic(int d) {
  TestFunction f;
  f.dim = d;
  f.value = [](const Vec& x) { return x.squaredNorm(); };
  f.gradient = [](const Vec& x) { return (2.0 * x).eval(); };
  f.hessian = [d](const Vec&) { return (2.0 * Mat::Identity(d, d)).eval(); };
  return f;
}

TestFunction TestFunction::gaussian(const Vec& center, double scale) {
  if (!(scale > 0.0)) throw ContractViolation("TestFunction::gaussian: scale must be > 0");
  TestFunction f;
  const int d = static_cast<int>(center.size());
  f.dim = d;
  f.value = [center, scale](const Vec& x) {
    return std::exp(-(x - center).squaredNorm() / (2.0 * scale));
  };
  f.gradient = [center, scale](const Vec& x) {
    const double v = std::exp(-(x - center).squaredNorm() / (2.0 * scale));
    return (-(x - center) / scale * v).eval();
  };
  f.hessian = [center, scale, d](const Vec& x) {
    const Vec u = x - center;
    const double v = std::exp(-u.squaredNorm() / (2.0 * scale));
    return ((u * u.transpose() / (scale * scale) - Mat::Identity(d, d) / scale) * v).eval();
  };
  return f;
}

TestFunction TestFunction::bump(const Vec& center, double radius) {
  if (!(radius > 0.0)) throw ContractViolation("TestFunction::bump: radius must be > 0");
  const int d = static_cast<int>(center.size());
  TestFunction f;
  f.dim = d;
  f.support_radius = radius;
  const double r2 = radius * radius;
  f.value = [center, r2](const Vec& x) {
    const double s = (x - center).squaredNorm() / r2;
    return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
  };
  f.gradient = [center, r2, d](const Vec& x) {
    const Vec u = x - center;
    const double s = u.squaredNorm() / r2;
    if (s >= 1.0) return Vec::Zero(d).eval();
    const double v = std::exp(-1.0 / (1.0 - s));
    const double hs = -v / ((1.0 - s) * (1.0 - s));  // d value / d s
    return (hs * 2.0 / r2 * u).eval();
  };
  f.hessian = [center, r2, d](const Vec& x) {
    const Vec u = x - center;
    const double s = u.squaredNorm() / r2;
    if (s >= 1.0) return Mat::Zero(d, d).eval();
    const double om = 1.0 - s;
    const double v = std::exp(-1.0 / om);
    const double hs = -v / (om * om);
    const double hss = v * (2.0 * s - 1.0) / (om * om * om * om);
    const Vec ds = 2.0 / r2 * u;
    return (hss * ds * ds.transpose() + hs * 2.0 / r2 * Mat::Identity(d, d)).eval();
  };
  return f;
}

TestFunction TestFunction::sine(const Vec& omega, double phase) {
  TestFunction f;
  const int d = static_cast<int>(omega.size());
  f.dim = d;
  f.value = [omega, phase](const Vec& x) { return std::sin(omega.dot(x) + phase); };
  f.gradient = [omega, phase](const Vec& x) {
    return (std::cos(omega.dot(x) + phase) * omega).eval();
  };
  f.hessian = [omega, phase](const Vec& x) {
    return (-std::sin(omega.dot(x) + phase) * omega * omega.transpose()).eval();
  };
  return f;
}

TestFunction TestFunction::sum(const TestFunction& a, const TestFunction& b) {
  TestFunction f;
  f.dim = a.dim;
  f.support_radius = std::max(a.support_radius, b.support_radius);
  f.value = [a, b](const Vec& x) { return a.value(x) + b.value(x); };
  f.gradient = [a, b](const Vec& x) { return (a.gradient(x) + b.gradient(x)).eval(); };
  f.hessian = [a, b](const Vec& x) { return (a.hessian(x) + b.hessian(x)).eval(); };
  return f;
}

TestFunction TestFunction::scale(const TestFunction& a, double c) {
  TestFunction f;
  f.dim = a.dim;
  f.support_radius = a.support_radius;
  f.value = [a, c](const Vec& x) { return c * a.value(x); };
  f.gradient = [a, c](const Vec& x) { return (c * a.gradient(x)).eval(); };
  f.hessian = [a, c](const Vec& x) { return (c * a.hessian(x)).eval(); };
  return f;
}

}  // namespace jumpfilter
