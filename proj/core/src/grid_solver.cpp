#include "jumpfilter/grid_solver.hpp"

#include <algorithm>
#include <cmath>

#include "jumpfilter/errors.hpp"
#include "jumpfilter/shift.hpp"

namespace jumpfilter {

namespace {

// Tridiagonal solve (Thomas); diagonals are copied since they are modified.
std::vector<double> solve_tridiag(std::vector<double> a, std::vector<double> b,
                                  std::vector<double> c, std::vector<double> r) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(b[i - 1]) < 1e-300)
      throw NumericalFailure("grid solver: tridiagonal pivot breakdown");
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    r[i] -= m * r[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = r[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (r[i] - c[i] * x[i + 1]) / b[i];
  return x;
}

double interp_linear(const std::vector<double>& xs, const std::vector<double>& u,
                     double x) {
  if (x <= xs.front() || x >= xs.back()) return 0.0;
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - xs.begin()) - 1;
  const double w = (x - xs[j]) / (xs[j + 1] - xs[j]);
  return (1.0 - w) * u[j] + w * u[j + 1];
}

double trapezoid_mass(const std::vector<double>& xs, const std::vector<double>& u) {
  double m = 0.0;
  for (std::size_t j = 0; j + 1 < xs.size(); ++j)
    m += 0.5 * (u[j] + u[j + 1]) * (xs[j + 1] - xs[j]);
  return m;
}

}  // namespace

GridSolverResult reference_grid_solver(const CoefficientSet& coeffs,
                                       const std::optional<JumpActivity>& act0,
                                       const ObservationRecord& obs,
                                       const std::vector<double>& x_grid,
                                       const std::vector<double>& pi0_grid,
                                       const GridSolverOptions& opt) {
  if (coeffs.d != 1 || coeffs.dprime != 1)
    throw UnsupportedDimension("reference_grid_solver: d = d' = 1 required");
  if (x_grid.size() < 8 || x_grid.size() != pi0_grid.size())
    throw ContractViolation("reference_grid_solver: bad grid");
  const std::size_t n = x_grid.size();
  const double hgrid = x_grid[1] - x_grid[0];
  for (std::size_t j = 0; j + 1 < n; ++j)
    if (std::abs(x_grid[j + 1] - x_grid[j] - hgrid) > 1e-9 * hgrid)
      throw ContractViolation("reference_grid_solver: grid must be uniform");

  // The multiplicative M* update below is exact only when rho vanishes.
  {
    Vec p0(1), y0v = obs.y.front();
    for (double xv : {x_grid.front(), 0.0, x_grid.back()}) {
      p0 << xv;
      if (coeffs.rho(obs.times.front(), p0, y0v).cwiseAbs().maxCoeff() > 0.0)
        throw ContractViolation("reference_grid_solver: rho must vanish (splitting assumes it)");
    }
  }

  if (act0 && act0->rate > 0.0 && act0->mark_quadrature.empty())
    throw ContractViolation("reference_grid_solver: act0 needs mark quadrature nodes");

  GridSolverResult res;
  res.x = x_grid;
  std::vector<double> u = pi0_grid;
  u.front() = 0.0;
  u.back() = 0.0;

  auto snapshot = [&](double t) {
    res.times.push_back(t);
    res.u.push_back(u);
    res.mass.push_back(trapezoid_mass(x_grid, u));
  };
  auto want_snapshot = [&](double t) {
    for (double s : opt.snapshot_times)
      if (std::abs(s - t) <= 1e-12) return true;
    return false;
  };
  snapshot(obs.times.front());

  std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
  std::vector<double> av(n), bv(n), Bv(n);

  for (std::size_t k = 0; k + 1 < obs.times.size(); ++k) {
    const double t = obs.times[k];
    const double t1 = obs.times[k + 1];
    const double dt = t1 - t;
    const Vec& y = obs.y[k];
    const Vec dvt = obs.innovation_increment(k);

    Vec xv(1);
    for (std::size_t j = 0; j < n; ++j) {
      xv << x_grid[j];
      av[j] = coeffs.diffusion_a(t, xv, y)(0, 0);
      bv[j] = coeffs.b(t, xv, y)[0];
      Bv[j] = coeffs.B(t, xv, y)[0];
    }

    // Jump drift sources, explicit: N0 term int J^{eta*} u nu_0(dz) plus the
    // nu_1 transport correction int D(xi u) nu_1(dz) (the J*-I* difference;
    // observed N1 atoms are applied as exact pushforwards below).
    std::vector<double> source(n, 0.0);
    if (act0 && act0->rate > 0.0) {
      for (const auto& [mark, qw] : act0->mark_quadrature) {
        ShiftMap sm = ShiftMap::from_eta(coeffs, t, y, mark);
        std::vector<double> push(n, 0.0);
        for (std::size_t j = 1; j + 1 < n; ++j) {
          xv << x_grid[j];
          const Vec w = invert_shift(sm, xv, 1e-10);
          const double dtau = 1.0 + sm.jacobian_at(w)(0, 0);
          if (dtau <= 1e-12)
            throw NumericalFailure("reference_grid_solver: eta pushforward is singular");
          push[j] = interp_linear(x_grid, u, w[0]) / dtau;
        }
        // J^{eta*}u = (T^{eta*}u - u) + D(eta u), centered differences.
        for (std::size_t j = 1; j + 1 < n; ++j) {
          Vec xl(1), xr(1);
          xl << x_grid[j - 1];
          xr << x_grid[j + 1];
          const double de = (coeffs.eta(t, xr, y, mark)[0] * u[j + 1] -
                             coeffs.eta(t, xl, y, mark)[0] * u[j - 1]) /
                            (2.0 * hgrid);
          source[j] += act0->rate * qw * (push[j] - u[j] + de);
        }
      }
    }
    if (obs.rate1 > 0.0) {
      // One-point rule at the mean mark, matching the particle dynamics.
      const Vec mean1 = obs.nu1_mean / obs.rate1;
      for (std::size_t j = 1; j + 1 < n; ++j) {
        Vec xl(1), xr(1);
        xl << x_grid[j - 1];
        xr << x_grid[j + 1];
        source[j] += obs.rate1 *
                     (coeffs.xi(t, xr, y, mean1)[0] * u[j + 1] -
                      coeffs.xi(t, xl, y, mean1)[0] * u[j - 1]) /
                     (2.0 * hgrid);
      }
    }
    for (std::size_t j = 0; j < n; ++j) u[j] += dt * source[j];

    // Conservative flux-form theta-scheme for L* u = (a u)'' - (b u)'.
    // F_{j+1/2} = [(au)_{j+1} - (au)_j]/h - (bu)_{j+1/2}.
    const double th = opt.theta;
    auto assemble = [&](double coeff, std::vector<double>& lo,
                        std::vector<double>& di, std::vector<double>& up) {
      for (std::size_t j = 1; j + 1 < n; ++j) {
        const double h2 = hgrid * hgrid;
        lo[j] = coeff * (av[j - 1] / h2 + 0.5 * bv[j - 1] / hgrid);
        di[j] = coeff * (-2.0 * av[j] / h2);
        up[j] = coeff * (av[j + 1] / h2 - 0.5 * bv[j + 1] / hgrid);
      }
    };
    // rhs = (I + (1-th) dt A) u
    assemble((1.0 - th) * dt, lower, diag, upper);
    rhs.front() = 0.0;
    rhs.back() = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j)
      rhs[j] = u[j] + lower[j] * u[j - 1] + (diag[j]) * u[j] + upper[j] * u[j + 1];
    // lhs = (I - th dt A)
    assemble(-th * dt, lower, diag, upper);
    for (std::size_t j = 0; j < n; ++j) diag[j] += 1.0;
    lower.front() = 0.0;
    upper.front() = 0.0;
    diag.front() = 1.0;
    lower.back() = 0.0;
    upper.back() = 0.0;
    diag.back() = 1.0;
    u = solve_tridiag(lower, diag, upper, rhs);

    // Exact multiplicative update for the M* = B part.
    for (std::size_t j = 0; j < n; ++j)
      u[j] *= std::exp(Bv[j] * dvt[0] - 0.5 * Bv[j] * Bv[j] * dt);

    // Observed shared jumps: determinant-weighted pushforward.
    const auto events = obs.jumps_in_cell(k);
    if (!events.empty()) {
      Vec y_pre = obs.y[k + 1];
      for (auto* ev : events) y_pre -= ev->mark;
      for (auto* ev : events) {
        ShiftMap sm = ShiftMap::from_xi(coeffs, ev->time, y_pre, ev->mark);
        std::vector<double> nu(n, 0.0);
        for (std::size_t j = 1; j + 1 < n; ++j) {
          xv << x_grid[j];
          const Vec w = invert_shift(sm, xv, 1e-10);
          const double dtau = 1.0 + sm.jacobian_at(w)(0, 0);
          if (dtau <= 1e-12)
            throw NumericalFailure("reference_grid_solver: xi pushforward is singular");
          nu[j] = interp_linear(x_grid, u, w[0]) / dtau;
        }
        u = std::move(nu);
        y_pre += ev->mark;
      }
    }

    for (double v : u)
      if (!std::isfinite(v))
        throw NumericalFailure("reference_grid_solver: non-finite density at t=" +
                               std::to_string(t1));
    if (want_snapshot(t1) || k + 2 == obs.times.size()) snapshot(t1);
  }
  return res;
}

}  // namespace jumpfilter
