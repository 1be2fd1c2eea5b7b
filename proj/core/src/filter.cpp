#include "jumpfilter/filter.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "jumpfilter/errors.hpp"
#include "jumpfilter/operators.hpp"
#include "jumpfilter/quadrature.hpp"
#include "jumpfilter/simulate.hpp"

namespace jumpfilter {

double FilterState::unnormalized_mass() const {
  double s = 0.0;
  for (double l : log_weights) s += std::exp(l);
  return std::exp(log_offset) * s / count();
}

double FilterState::effective_sample_size() const {
  double s1 = 0.0, s2 = 0.0;
  for (double l : log_weights) {
    const double w = std::exp(l);
    s1 += w;
    s2 += w * w;
  }
  return s2 > 0.0 ? s1 * s1 / s2 : 0.0;
}

ParticleMeasure FilterState::measure() const {
  const int d = static_cast<int>(particles.front().size());
  ParticleMeasure mu(d);
  const double scale = std::exp(log_offset) / count();
  for (std::size_t i = 0; i < count(); ++i)
    mu.add(particles[i], scale * std::exp(log_weights[i]));
  return mu;
}

double FilterState::spread() const {
  const int d = static_cast<int>(particles.front().size());
  double wsum = 0.0;
  Vec mean = Vec::Zero(d);
  for (std::size_t i = 0; i < count(); ++i) {
    const double w = std::exp(log_weights[i]);
    wsum += w;
    mean += w * particles[i];
  }
  mean /= wsum;
  Vec var = Vec::Zero(d);
  for (std::size_t i = 0; i < count(); ++i) {
    const double w = std::exp(log_weights[i]);
    var += w * (particles[i] - mean).cwiseAbs2();
  }
  var /= wsum;
  return std::sqrt(var.maxCoeff());
}

namespace {

void recentre(FilterState& s) {
  const double mx = *std::max_element(s.log_weights.begin(), s.log_weights.end());
  if (mx == 0.0) return;
  for (double& l : s.log_weights) l -= mx;
  s.log_offset += mx;
}

void check_finite(const FilterState& s, const char* where) {
  for (std::size_t i = 0; i < s.count(); ++i) {
    if (!s.particles[i].allFinite() || !std::isfinite(s.log_weights[i]))
      throw NumericalFailure(std::string(where) + ": non-finite particle or weight");
  }
}

struct CompensatorMeans {
  double rate0{0}, rate1{0};
  Vec mean0, mean1;
};

CompensatorMeans make_means(const std::optional<JumpActivity>& act0,
                            const ObservationRecord& obs) {
  CompensatorMeans m;
  if (act0 && act0->rate > 0.0) {
    m.rate0 = act0->rate;
    m.mean0 = act0->mean_mark();
  }
  if (obs.rate1 > 0.0) {
    m.rate1 = obs.rate1;
    m.mean1 = obs.nu1_mean / obs.rate1;
  }
  return m;
}

/// Advance one observation cell [times[k], times[k+1]]. If pre_jump_hook is
/// set it sees the state after the continuous move and private jumps but
/// before the shared N1 jumps of this cell.
FilterState propagate_cell(
    const FilterState& state, const CoefficientSet& coeffs,
    const std::optional<JumpActivity>& act0, const ObservationRecord& obs,
    const CompensatorMeans& cm, std::size_t k, const FilterOptions& opt,
    const std::function<void(const FilterState&,
                             const std::vector<const JumpEvent*>&)>& pre_jump_hook =
        nullptr) {
  const double t = obs.times[k];
  const double t1 = obs.times[k + 1];
  const double h = t1 - t;
  const Vec& y = obs.y[k];
  const Vec dvt = obs.innovation_increment(k);
  const auto events = obs.jumps_in_cell(k);

  FilterState next = state;
  next.time = t1;
  const double sqh = std::sqrt(h);
  const int d1 = coeffs.d1;

  for (std::size_t i = 0; i < next.count(); ++i) {
    Rng rng(derive_seed(opt.seed, k, i));
    Vec& x = next.particles[i];
    const Vec bv = coeffs.B(t, x, y);

    Vec drift = coeffs.b(t, x, y) - coeffs.rho(t, x, y) * bv;
    if (cm.rate0 > 0.0) drift -= cm.rate0 * coeffs.eta(t, x, y, cm.mean0);
    if (cm.rate1 > 0.0) drift -= cm.rate1 * coeffs.xi(t, x, y, cm.mean1);

    Vec dw(d1);
    for (int j = 0; j < d1; ++j) dw[j] = sqh * rng.normal();
    x += drift * h + coeffs.sigma(t, x, y) * dw + coeffs.rho(t, x, y) * dvt;

    next.log_weights[i] += bv.dot(dvt) - 0.5 * bv.squaredNorm() * h;

    // Private signal-only jumps.
    if (cm.rate0 > 0.0) {
      const long n0 = rng.poisson(cm.rate0 * h);
      for (long e = 0; e < n0; ++e) {
        const Vec mark = act0->sample_mark(rng);
        x += coeffs.eta(t1, x, y, mark);
      }
    }
  }

  if (pre_jump_hook) pre_jump_hook(next, events);
  if (!events.empty()) {
    // Shared jumps revealed by the observation act on every particle, with
    // Y at its left limit.
    Vec y_pre = obs.y[k + 1];
    for (const JumpEvent* ev : events) y_pre -= ev->mark;
    for (const JumpEvent* ev : events) {
      for (std::size_t i = 0; i < next.count(); ++i) {
        Vec& x = next.particles[i];
        x += coeffs.xi(t1, x, y_pre, ev->mark);
      }
      y_pre += ev->mark;
    }
  }

  check_finite(next, "propagate");
  recentre(next);

  if (opt.resample &&
      next.effective_sample_size() < 0.5 * static_cast<double>(next.count())) {
    next = resample_systematic(next, derive_seed(opt.seed, k, 0x5253504cULL));
  }
  return next;
}

std::pair<std::size_t, std::size_t> cell_range(const ObservationRecord& obs,
                                               double t_begin, double t_end) {
  const double tol = 1e-12;
  std::size_t k0 = 0;
  while (k0 + 1 < obs.times.size() && obs.times[k0] < t_begin - tol) ++k0;
  std::size_t k1 = k0;
  while (k1 + 1 < obs.times.size() && obs.times[k1 + 1] <= t_end + tol) ++k1;
  return {k0, k1};
}

}  // namespace

FilterState init_filter(const std::function<Vec(Rng&)>& pi0_sampler, int N,
                        double eps_out, std::uint64_t seed) {
  if (N < 1) throw ContractViolation("init_filter: N must be >= 1");
  FilterState s;
  s.eps_out = eps_out;
  Rng rng(derive_seed(seed, 0xCAFE));
  s.particles.reserve(N);
  for (int i = 0; i < N; ++i) s.particles.push_back(pi0_sampler(rng));
  s.log_weights.assign(N, 0.0);
  return s;
}

FilterState propagate(const FilterState& state, const CoefficientSet& coeffs,
                      const std::optional<JumpActivity>& act0,
                      const ObservationRecord& obs, double t_begin,
                      double t_end, const FilterOptions& opt) {
  auto [k0, k1] = cell_range(obs, t_begin, t_end);
  const CompensatorMeans cm = make_means(act0, obs);
  FilterState s = state;
  for (std::size_t k = k0; k < k1; ++k)
    s = propagate_cell(s, coeffs, act0, obs, cm, k, opt);
  return s;
}

double unnormalized_estimate(const FilterState& state,
                             const std::function<double(const Vec&)>& phi) {
  double s = 0.0;
  for (std::size_t i = 0; i < state.count(); ++i)
    s += std::exp(state.log_weights[i]) * phi(state.particles[i]);
  return std::exp(state.log_offset) * s / state.count();
}

double normalized_estimate(const FilterState& state,
                           const std::function<double(const Vec&)>& phi) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < state.count(); ++i) {
    const double w = std::exp(state.log_weights[i]);
    num += w * phi(state.particles[i]);
    den += w;
  }
  if (!(den > 0.0)) throw DegenerateFilter("normalized_estimate: zero total mass");
  return num / den;
}

double density_estimate(const FilterState& state, const Vec& x, bool normalized) {
  const double v = mollify(state.measure(), state.eps_out, x);
  if (!normalized) return v;
  const double mass = state.unnormalized_mass();
  if (!(mass > 0.0)) throw DegenerateFilter("density_estimate: zero total mass");
  return v / mass;
}

FilterState resample_systematic(const FilterState& state, std::uint64_t seed) {
  const std::size_t n = state.count();
  std::vector<double> w(n);
  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(state.log_weights[i]);
    wsum += w[i];
  }
  if (!(wsum > 0.0)) throw DegenerateFilter("resample_systematic: zero total mass");

  const double mass = state.unnormalized_mass();
  Rng rng(seed);
  const double u0 = rng.uniform() / n;
  FilterState out;
  out.time = state.time;
  out.eps_out = state.eps_out;
  out.particles.reserve(n);
  double cum = w[0] / wsum;
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = u0 + static_cast<double>(i) / n;
    while (cum < u && j + 1 < n) cum += w[++j] / wsum;
    out.particles.push_back(state.particles[j]);
  }
  // Equal weights carrying the same total unnormalized mass.
  out.log_weights.assign(n, 0.0);
  out.log_offset = std::log(mass);
  return out;
}

ZakaiResidualReport zakai_residual(const CoefficientSet& coeffs,
                                   const std::optional<JumpActivity>& act0,
                                   const std::optional<JumpActivity>& act1,
                                   const TestFunction& phi,
                                   const ZakaiResidualConfig& cfg, int n_runs,
                                   std::uint64_t seed, int threads) {
  if ((act0 && act0->rate > 0.0 && act0->mark_quadrature.empty()) ||
      (act1 && act1->rate > 0.0 && act1->mark_quadrature.empty()))
    throw ContractViolation("zakai_residual: activities need mark quadrature nodes");

  ZakaiResidualReport rep;
  rep.runs = n_runs;
  rep.residuals.assign(n_runs, 0.0);

  auto run_one = [&](int r) {
    const std::uint64_t rs = derive_seed(seed, 1000 + r);
    Rng init_rng(derive_seed(rs, 7));
    const Vec x0 = cfg.pi0_sampler(init_rng);
    const PathBundle bundle = sample_bundle(
        cfg.T, cfg.dt, act0, act1, BundleDims{coeffs.d1, coeffs.dprime}, rs);
    const SystemPath path = simulate_system(coeffs, x0, cfg.y0, bundle);
    const ObservationRecord obs = observation_record(path);

    FilterOptions fopt;
    fopt.seed = derive_seed(rs, 8);
    FilterState st =
        init_filter(cfg.pi0_sampler, cfg.particles, 0.05, derive_seed(rs, 9));
    const CompensatorMeans cm = make_means(act0, obs);

    const double mu0_phi = unnormalized_estimate(st, phi.value);
    double drift_acc = 0.0, mart_V = 0.0, mart_N = 0.0;

    for (std::size_t k = 0; k + 1 < obs.times.size(); ++k) {
      const double t = obs.times[k];
      const double h = obs.times[k + 1] - t;
      const Vec& y = obs.y[k];
      const Vec& xs = path.X[k];  // ground truth enters beta_t

      drift_acc += h * unnormalized_estimate(st, [&](const Vec& x) {
        return apply_tilde_L(coeffs, t, xs, y, phi, x);
      });
      if (act0 && act0->rate > 0.0) {
        for (const auto& [mark, qw] : act0->mark_quadrature) {
          drift_acc += h * act0->rate * qw *
                       unnormalized_estimate(st, [&](const Vec& x) {
                         return apply_J(
                             [&](const Vec& xx) { return coeffs.eta(t, xx, y, mark); },
                             phi, x);
                       });
        }
      }
      if (act1 && act1->rate > 0.0) {
        for (const auto& [mark, qw] : act1->mark_quadrature) {
          drift_acc += h * act1->rate * qw *
                       unnormalized_estimate(st, [&](const Vec& x) {
                         return apply_J(
                             [&](const Vec& xx) { return coeffs.xi(t, xx, y, mark); },
                             phi, x);
                       });
          // Compensator of the N1 martingale term.
          mart_N -= h * act1->rate * qw *
                    unnormalized_estimate(st, [&](const Vec& x) {
                      return apply_I(
                          [&](const Vec& xx) { return coeffs.xi(t, xx, y, mark); },
                          phi, x);
                    });
        }
      }
      for (int j = 1; j <= coeffs.dprime; ++j) {
        mart_V += path.bundle.dV[k][j - 1] *
                  unnormalized_estimate(st, [&](const Vec& x) {
                    return apply_M(coeffs, t, y, j, phi, x);
                  });
      }

      st = propagate_cell(st, coeffs, act0, obs, cm, k, fopt,
                          [&](const FilterState& pre,
                              const std::vector<const JumpEvent*>& events) {
                            if (events.empty()) return;
                            Vec y_pre = obs.y[k + 1];
                            for (auto* ev : events) y_pre -= ev->mark;
                            for (auto* ev : events) {
                              mart_N += unnormalized_estimate(pre, [&](const Vec& x) {
                                return apply_I(
                                    [&](const Vec& xx) {
                                      return coeffs.xi(ev->time, xx, y_pre, ev->mark);
                                    },
                                    phi, x);
                              });
                            }
                          });
    }
    const double muT_phi = unnormalized_estimate(st, phi.value);
    rep.residuals[r] = (muT_phi - mu0_phi - drift_acc) - (mart_V + mart_N);
  };

  if (threads <= 1) {
    for (int r = 0; r < n_runs; ++r) run_one(r);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> counter{0};
    for (int tix = 0; tix < threads; ++tix)
      pool.emplace_back([&] {
        for (int r = counter.fetch_add(1); r < n_runs; r = counter.fetch_add(1))
          run_one(r);
      });
    for (auto& th : pool) th.join();
  }

  double mean = 0.0;
  for (double v : rep.residuals) mean += v;
  mean /= n_runs;
  double var = 0.0;
  for (double v : rep.residuals) var += (v - mean) * (v - mean);
  var /= std::max(1, n_runs - 1);
  rep.mean = mean;
  rep.std_error = std::sqrt(var / n_runs);
  rep.within_3se = rep.std_error > 0.0 ? std::abs(mean) <= 3.0 * rep.std_error
                                       : mean == 0.0;
  return rep;
}

namespace {

// Exact atom sums of the mollified adjoint fields used in the Lp Ito check.
struct MollifiedFields {
  const ParticleMeasure& mu;
  double eps;
  const CoefficientSet& coeffs;
  double t;
  Vec y;

  double kernel(int d, double sq) const {
    return std::pow(6.283185307179586 * eps, -0.5 * d) * std::exp(-sq / (2.0 * eps));
  }

  double mol(const Vec& x) const { return mollify(mu, eps, x); }

  // (M^{k*} mu)^(eps)(x): M acts in the atom variable of k_eps(x - .).
  double molM(const Vec& x, int k) const {
    double s = 0.0;
    const int d = mu.dim();
    for (const auto& a : mu.atoms()) {
      const Vec u = x - a.x;
      const double kv = kernel(d, u.squaredNorm());
      const Mat r = coeffs.rho(t, a.x, y);
      const Vec bv = coeffs.B(t, a.x, y);
      s += a.w * kv * (r.col(k - 1).dot(u) / eps + bv[k - 1]);
    }
    return s;
  }

  // (L* mu)^(eps) with L = a^{ij} D_ij + b^i D_i.
  double molL(const Vec& x) const {
    double s = 0.0;
    const int d = mu.dim();
    for (const auto& a : mu.atoms()) {
      const Vec u = x - a.x;
      const double kv = kernel(d, u.squaredNorm());
      const Mat am = coeffs.diffusion_a(t, a.x, y);
      const Vec bv = coeffs.b(t, a.x, y);
      double dd = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          dd += am(i, j) * (u[i] * u[j] / (eps * eps) - (i == j ? 1.0 / eps : 0.0));
      s += a.w * kv * (dd + bv.dot(u) / eps);
    }
    return s;
  }
};

}  // namespace

LpEvolutionReport lp_evolution_check(const CoefficientSet& coeffs,
                                     const std::optional<JumpActivity>& act0,
                                     const std::optional<JumpActivity>& act1,
                                     const ObservationRecord& obs,
                                     const FilterState& initial, int p,
                                     double eps, const FilterOptions& opt) {
  if (p < 2 || p % 2 != 0)
    throw ContractViolation("lp_evolution_check: p must be even and >= 2");
  if ((act0 && act0->rate > 0.0 && act0->mark_quadrature.empty()) ||
      (act1 && act1->rate > 0.0 && act1->mark_quadrature.empty()))
    throw ContractViolation("lp_evolution_check: activities need mark quadrature nodes");

  FilterState st = initial;
  const double norm0 = lp_norm_exact(st.measure(), eps, p);
  const CompensatorMeans cm = make_means(act0, obs);
  double ito = 0.0, jump_part = 0.0;

  for (std::size_t k = 0; k + 1 < obs.times.size(); ++k) {
    const double t = obs.times[k];
    const double h = obs.times[k + 1] - t;
    const ParticleMeasure mu = st.measure();
    if (mu.dim() != 1)
      throw UnsupportedDimension("lp_evolution_check: d = 1 only");
    MollifiedFields f{mu, eps, coeffs, t, obs.y[k]};

    Vec lo, hi;
    mu.bounding_box(lo, hi);
    const double pad = 10.0 * std::sqrt(eps);
    auto pair1d = [&](const std::function<double(double)>& g) {
      return integrate_adaptive(g, lo[0] - pad, hi[0] + pad, 1e-11);
    };

    const Vec dvt = obs.innovation_increment(k);
    // V-martingale and quadratic M terms of the Ito display (the innovation
    // form: drift operator L, driven by dVt).
    for (int j = 1; j <= coeffs.dprime; ++j) {
      const double m1 = pair1d([&](double xv) {
        Vec x(1);
        x << xv;
        const double m = f.mol(x);
        return std::pow(std::abs(m), p - 2) * m * f.molM(x, j);
      });
      const double m2 = pair1d([&](double xv) {
        Vec x(1);
        x << xv;
        const double m = f.mol(x);
        const double mm = f.molM(x, j);
        return std::pow(std::abs(m), p - 2) * mm * mm;
      });
      ito += p * m1 * dvt[j - 1] + 0.5 * p * (p - 1) * m2 * h;
    }
    ito += p * h * pair1d([&](double xv) {
      Vec x(1);
      x << xv;
      const double m = f.mol(x);
      return std::pow(std::abs(m), p - 2) * m * f.molL(x);
    });

    // Jump drift terms: J against nu0 and nu1, plus the compensator of the
    // N1 martingale (I against nu1, subtracted).
    auto jump_drift = [&](const JumpActivity& act, bool is_xi) {
      for (const auto& [mark, qw] : act.mark_quadrature) {
        auto zeta = [&](const Vec& xx) {
          return is_xi ? coeffs.xi(t, xx, obs.y[k], mark)
                       : coeffs.eta(t, xx, obs.y[k], mark);
        };
        const ParticleMeasure push = mu.pushforward(zeta);
        auto molJ = [&](const Vec& x) {
          double s = mollify(push, eps, x) - f.mol(x);
          for (const auto& a : mu.atoms()) {
            const Vec u = x - a.x;
            s -= a.w * f.kernel(1, u.squaredNorm()) * zeta(a.x).dot(u) / eps;
          }
          return s;
        };
        ito += h * act.rate * qw * pair1d([&](double xv) {
          Vec x(1);
          x << xv;
          const double m = f.mol(x);
          return p * std::pow(std::abs(m), p - 2) * m * molJ(x);
        });
        if (is_xi) {
          ito -= h * act.rate * qw * pair1d([&](double xv) {
            Vec x(1);
            x << xv;
            const double m = f.mol(x);
            return p * std::pow(std::abs(m), p - 2) * m *
                   (mollify(push, eps, x) - m);
          });
        }
      }
    };
    if (act0 && act0->rate > 0.0) jump_drift(*act0, false);
    if (act1 && act1->rate > 0.0) jump_drift(*act1, true);

    st = propagate_cell(st, coeffs, act0, obs, cm, k, opt,
                        [&](const FilterState& pre,
                            const std::vector<const JumpEvent*>& events) {
                          if (events.empty()) return;
                          Vec y_pre = obs.y[k + 1];
                          for (auto* ev : events) y_pre -= ev->mark;
                          ParticleMeasure mpre = pre.measure();
                          for (auto* ev : events) {
                            const ParticleMeasure push =
                                mpre.pushforward([&](const Vec& xx) {
                                  return coeffs.xi(ev->time, xx, y_pre, ev->mark);
                                });
                            const double delta = lp_norm_exact(push, eps, p) -
                                                 lp_norm_exact(mpre, eps, p);
                            ito += delta;
                            jump_part += delta;
                            mpre = push;
                          }
                        });
  }

  LpEvolutionReport rep;
  rep.direct_increment = lp_norm_exact(st.measure(), eps, p) - norm0;
  rep.ito_increment = ito;
  rep.discrepancy = std::abs(rep.direct_increment - rep.ito_increment);
  rep.jump_contribution = jump_part;
  return rep;
}

}  // namespace jumpfilter
