#include "jumpfilter/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "jumpfilter/errors.hpp"

namespace jumpfilter {

Vec JumpActivity::mean_mark(std::uint64_t seed) const {
  if (!mark_quadrature.empty()) {
    Vec m = Vec::Zero(mark_dim);
    double wsum = 0.0;
    for (const auto& [z, w] : mark_quadrature) {
      m += w * z;
      wsum += w;
    }
    return m / wsum;
  }
  Rng rng(seed);
  Vec m = Vec::Zero(mark_dim);
  const int n = 100000;
  for (int i = 0; i < n; ++i) m += sample_mark(rng);
  return m / n;
}

JumpActivity::MomentCheck JumpActivity::check_moments(std::uint64_t seed,
                                                      int samples) const {
  Rng rng(seed);
  double acc = 0.0;
  for (int i = 0; i < samples; ++i) acc += sample_mark(rng).squaredNorm();
  MomentCheck mc;
  mc.empirical_second_moment = rate * acc / samples;
  mc.declared_second_moment = second_moment;
  const double scale = std::max(std::abs(second_moment), 1e-12);
  mc.rel_error = std::abs(mc.empirical_second_moment - second_moment) / scale;
  mc.ok = mc.rel_error <= 0.05;
  return mc;
}

std::vector<const JumpEvent*> ObservationRecord::jumps_in_cell(std::size_t k) const {
  std::vector<const JumpEvent*> out;
  const double t1 = times[k + 1];
  for (const auto& ev : jumps)
    if (ev.time == t1) out.push_back(&ev);
  return out;
}

Vec ObservationRecord::innovation_increment(std::size_t k) const {
  Vec dv = y[k + 1] - y[k];
  for (const JumpEvent* ev : jumps_in_cell(k)) dv -= ev->mark;
  dv += nu1_mean * (times[k + 1] - times[k]);
  return dv;
}

ObservationRecord observation_record(const SystemPath& path) {
  ObservationRecord rec;
  rec.times = path.times;
  rec.y = path.Y;
  rec.jumps = path.bundle.n1_events;
  if (path.bundle.act1) {
    rec.rate1 = path.bundle.act1->rate;
    rec.nu1_mean = rec.rate1 * path.bundle.mean_mark1;
  } else {
    rec.nu1_mean = Vec::Zero(path.Y.front().size());
  }
  return rec;
}

PathBundle sample_bundle(double T, double dt,
                         const std::optional<JumpActivity>& act0,
                         const std::optional<JumpActivity>& act1,
                         const BundleDims& dims, std::uint64_t seed) {
  if (!(T > 0.0) || !(dt > 0.0))
    throw ContractViolation("sample_bundle: T and dt must be positive");

  PathBundle b;
  b.act0 = act0;
  b.act1 = act1;

  auto draw_events = [&](const JumpActivity& act, std::uint64_t tag) {
    std::vector<JumpEvent> ev;
    Rng rng(derive_seed(seed, tag));
    double t = 0.0;
    for (;;) {
      t += rng.exponential(act.rate);
      if (t >= T) break;
      ev.push_back({t, act.sample_mark(rng)});
    }
    return ev;
  };
  if (act0 && act0->rate > 0.0) b.n0_events = draw_events(*act0, 1);
  if (act1 && act1->rate > 0.0) b.n1_events = draw_events(*act1, 2);

  b.mean_mark0 = act0 ? act0->mean_mark() : Vec::Zero(1);
  b.mean_mark1 = act1 ? act1->mean_mark() : Vec::Zero(dims.dprime);

  // Jump-adapted grid: uniform mesh united with all event times.
  std::vector<double> grid;
  const long n = std::lround(std::ceil(T / dt - 1e-12));
  grid.reserve(n + b.n0_events.size() + b.n1_events.size() + 2);
  for (long k = 0; k < n; ++k) grid.push_back(k * dt);
  grid.push_back(T);
  for (const auto& ev : b.n0_events) grid.push_back(ev.time);
  for (const auto& ev : b.n1_events) grid.push_back(ev.time);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  b.grid = std::move(grid);

  Rng rng(derive_seed(seed, 3));
  b.dW.reserve(b.cells());
  b.dV.reserve(b.cells());
  for (std::size_t k = 0; k + 1 < b.grid.size(); ++k) {
    const double sdt = std::sqrt(b.grid[k + 1] - b.grid[k]);
    Vec dw(dims.d1), dv(dims.dprime);
    for (int i = 0; i < dims.d1; ++i) dw[i] = sdt * rng.normal();
    for (int i = 0; i < dims.dprime; ++i) dv[i] = sdt * rng.normal();
    b.dW.push_back(std::move(dw));
    b.dV.push_back(std::move(dv));
  }
  return b;
}

SystemPath simulate_system(const CoefficientSet& coeffs, const Vec& x0,
                           const Vec& y0, const PathBundle& bundle) {
  SystemPath path;
  path.bundle = bundle;
  path.times = bundle.grid;
  path.X.reserve(bundle.grid.size());
  path.Y.reserve(bundle.grid.size());

  Vec x = x0, y = y0;
  path.X.push_back(x);
  path.Y.push_back(y);

  const double rate0 = bundle.act0 ? bundle.act0->rate : 0.0;
  const double rate1 = bundle.act1 ? bundle.act1->rate : 0.0;
  auto ev0 = bundle.n0_events.begin();
  auto ev1 = bundle.n1_events.begin();

  for (std::size_t k = 0; k + 1 < bundle.grid.size(); ++k) {
    const double t = bundle.grid[k];
    const double t1 = bundle.grid[k + 1];
    const double h = t1 - t;

    Vec drift = coeffs.b(t, x, y);
    if (rate0 > 0.0) drift -= rate0 * coeffs.eta(t, x, y, bundle.mean_mark0);
    if (rate1 > 0.0) drift -= rate1 * coeffs.xi(t, x, y, bundle.mean_mark1);
    Vec xn = x + drift * h + coeffs.sigma(t, x, y) * bundle.dW[k] +
             coeffs.rho(t, x, y) * bundle.dV[k];
    Vec yn = y + coeffs.B(t, x, y) * h + bundle.dV[k];
    if (rate1 > 0.0) yn -= rate1 * bundle.mean_mark1 * h;

    // Events at the cell's right endpoint act on the pre-jump state.
    while (ev0 != bundle.n0_events.end() && ev0->time == t1) {
      xn += coeffs.eta(t1, xn, yn, ev0->mark);
      ++ev0;
    }
    while (ev1 != bundle.n1_events.end() && ev1->time == t1) {
      xn += coeffs.xi(t1, xn, yn, ev1->mark);
      yn += ev1->mark;
      ++ev1;
    }
    if (!xn.allFinite() || !yn.allFinite())
      throw NumericalFailure("simulate_system: non-finite state at step " +
                             std::to_string(k));
    x = std::move(xn);
    y = std::move(yn);
    path.X.push_back(x);
    path.Y.push_back(y);
  }
  return path;
}

std::vector<double> girsanov_weight_path(const CoefficientSet& coeffs,
                                         const SystemPath& path) {
  std::vector<double> gamma(path.times.size());
  double lg = 0.0;
  gamma[0] = 1.0;
  for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
    const double h = path.times[k + 1] - path.times[k];
    const Vec bv = coeffs.B(path.times[k], path.X[k], path.Y[k]);
    lg += -bv.dot(path.bundle.dV[k]) - 0.5 * bv.squaredNorm() * h;
    gamma[k + 1] = std::exp(lg);
  }
  return gamma;
}

std::vector<Vec> innovation_path(const CoefficientSet& coeffs,
                                 const SystemPath& path) {
  std::vector<Vec> v(path.times.size());
  v[0] = Vec::Zero(path.Y.front().size());
  for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
    const double h = path.times[k + 1] - path.times[k];
    v[k + 1] = v[k] + coeffs.B(path.times[k], path.X[k], path.Y[k]) * h +
               path.bundle.dV[k];
  }
  return v;
}

}  // namespace jumpfilter
