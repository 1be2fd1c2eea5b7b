#include "jumpfilter/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "jumpfilter/errors.hpp"

namespace jumpfilter {

namespace {

double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_rec(const std::function<double(double)>& f, double a, double b,
                    double fa, double fm, double fb, double whole, double tol,
                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double abs_tol, int max_depth) {
  if (!(abs_tol > 0.0)) throw ContractViolation("integrate_adaptive: tol must be > 0");
  if (a == b) return 0.0;
  // Seed the recursion with a few panels so narrow features are not missed
  // by the very first Simpson estimate.
  const int panels = 8;
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double x0 = a + i * h;
    const double x1 = x0 + h;
    const double xm = 0.5 * (x0 + x1);
    const double f0 = f(x0), fm = f(xm), f1 = f(x1);
    const double whole = simpson(f0, fm, f1, h);
    total += adaptive_rec(f, x0, x1, f0, fm, f1, whole, abs_tol / panels,
                          max_depth);
  }
  return total;
}

const GaussLegendre& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev initial guess, then Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    gl.nodes[i] = -x;
    gl.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    gl.weights[i] = w;
    gl.weights[n - 1 - i] = w;
  }
  auto [pos, _] = cache.emplace(n, std::move(gl));
  return pos->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int order) {
  const auto& gl = gauss_legendre(order);
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < order; ++i) sum += gl.weights[i] * f(c + h * gl.nodes[i]);
  return h * sum;
}

double integrate_box_gl(const std::function<double(const Vec&)>& f,
                        const Vec& lo, const Vec& hi, int panels, int order) {
  const int d = static_cast<int>(lo.size());
  if (d < 1 || d > 3)
    throw UnsupportedDimension("integrate_box_gl: only d in {1,2,3} supported");
  const auto& gl = gauss_legendre(order);
  // Per-axis node/weight tables over all panels.
  const int n = panels * order;
  std::vector<std::vector<double>> nodes(d), weights(d);
  for (int j = 0; j < d; ++j) {
    nodes[j].resize(n);
    weights[j].resize(n);
    const double panel_h = (hi[j] - lo[j]) / panels;
    for (int pnl = 0; pnl < panels; ++pnl) {
      const double a = lo[j] + pnl * panel_h;
      const double c = a + 0.5 * panel_h;
      for (int q = 0; q < order; ++q) {
        nodes[j][pnl * order + q] = c + 0.5 * panel_h * gl.nodes[q];
        weights[j][pnl * order + q] = 0.5 * panel_h * gl.weights[q];
      }
    }
  }
  Vec x(d);
  double total = 0.0;
  if (d == 1) {
    for (int i = 0; i < n; ++i) {
      x[0] = nodes[0][i];
      total += weights[0][i] * f(x);
    }
    return total;
  }
  if (d == 2) {
    for (int i = 0; i < n; ++i) {
      x[0] = nodes[0][i];
      double inner = 0.0;
      for (int k = 0; k < n; ++k) {
        x[1] = nodes[1][k];
        inner += weights[1][k] * f(x);
      }
      total += weights[0][i] * inner;
    }
    return total;
  }
  for (int i = 0; i < n; ++i) {
    x[0] = nodes[0][i];
    for (int k = 0; k < n; ++k) {
      x[1] = nodes[1][k];
      double inner = 0.0;
      for (int l = 0; l < n; ++l) {
        x[2] = nodes[2][l];
        inner += weights[2][l] * f(x);
      }
      total += weights[0][i] * weights[1][k] * inner;
    }
  }
  return total;
}

double integrate_box(const std::function<double(const Vec&)>& f, const Vec& lo,
                     const Vec& hi, double abs_tol) {
  const int d = static_cast<int>(lo.size());
  if (d < 1 || d > 3)
    throw UnsupportedDimension("integrate_box: only d in {1,2,3} supported");
  if (hi.size() != d) throw ContractViolation("integrate_box: lo/hi size mismatch");

  if (d == 1) {
    return integrate_adaptive([&](double x) { Vec v(1); v << x; return f(v); },
                              lo[0], hi[0], abs_tol);
  }
  if (d == 2) {
    const double len0 = hi[0] - lo[0];
    const double inner_tol = abs_tol / (2.0 * std::max(len0, 1.0));
    return integrate_adaptive(
        [&](double x0) {
          return integrate_adaptive(
              [&](double x1) { Vec v(2); v << x0, x1; return f(v); },
              lo[1], hi[1], inner_tol);
        },
        lo[0], hi[0], abs_tol / 2.0);
  }
  const double len0 = hi[0] - lo[0];
  const double len1 = hi[1] - lo[1];
  const double mid_tol = abs_tol / (2.0 * std::max(len0, 1.0));
  const double inner_tol = mid_tol / (2.0 * std::max(len1, 1.0));
  return integrate_adaptive(
      [&](double x0) {
        return integrate_adaptive(
            [&](double x1) {
              return integrate_adaptive(
                  [&](double x2) { Vec v(3); v << x0, x1, x2; return f(v); },
                  lo[2], hi[2], inner_tol);
            },
            lo[1], hi[1], mid_tol / 2.0);
      },
      lo[0], hi[0], abs_tol / 2.0);
}

}  // namespace jumpfilter
