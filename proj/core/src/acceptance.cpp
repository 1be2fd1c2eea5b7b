#include "jumpfilter/acceptance.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "jumpfilter/errors.hpp"
#include "jumpfilter/filter.hpp"
#include "jumpfilter/grid_solver.hpp"
#include "jumpfilter/kalman.hpp"
#include "jumpfilter/measure.hpp"
#include "jumpfilter/models.hpp"
#include "jumpfilter/operators.hpp"
#include "jumpfilter/quadrature.hpp"
#include "jumpfilter/shift.hpp"
#include "jumpfilter/simulate.hpp"
#include "jumpfilter/truncation.hpp"
#include "jumpfilter/verifier.hpp"

namespace jumpfilter {

namespace {

constexpr std::uint64_t kSuiteSeed = 0x4a46414343ULL;

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> counter{0};
  std::vector<std::thread> pool;
  const int workers = std::min(threads, n);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = counter.fetch_add(1); i < n; i = counter.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

ParticleMeasure random_measure(Rng& rng, int d, int max_atoms, double box) {
  const int m = 1 + static_cast<int>(rng.uniform() * max_atoms);
  ParticleMeasure mu(d);
  for (int i = 0; i < m; ++i) {
    Vec x(d);
    for (int j = 0; j < d; ++j) x[j] = rng.uniform(-box, box);
    double w = rng.uniform(-1.0, 1.0);
    if (std::abs(w) < 0.05) w = w < 0 ? -0.05 : 0.05;
    mu.add(x, w);
  }
  return mu;
}

struct SmoothShift {
  ShiftMap map;
  double lip;
};

/// zeta_i(x) = c_i + a_i sin(omega_i . x + s_i), Lipschitz below `max_lip`.
SmoothShift random_shift(Rng& rng, int d, double max_lip) {
  Vec c(d), a(d), s(d);
  Mat omega(d, d);
  for (int i = 0; i < d; ++i) {
    c[i] = rng.uniform(-0.5, 0.5);
    a[i] = rng.uniform(0.2, 1.0);
    s[i] = rng.uniform(0.0, 6.28);
    for (int j = 0; j < d; ++j) omega(i, j) = rng.uniform(-1.0, 1.0);
  }
  double lip = 0.0;
  for (int i = 0; i < d; ++i) lip += std::pow(a[i] * omega.row(i).norm(), 2);
  lip = std::sqrt(lip);
  const double scale = lip > 0.0 ? max_lip * rng.uniform(0.3, 1.0) / lip : 1.0;
  a *= scale;
  lip *= scale;

  SmoothShift out;
  out.lip = lip;
  out.map.dim = d;
  out.map.lip = lip;
  out.map.lambda = 1.0 - lip;
  out.map.zeta = [c, a, omega, s, d](const Vec& x) {
    Vec z(d);
    for (int i = 0; i < d; ++i) z[i] = c[i] + a[i] * std::sin(omega.row(i).dot(x) + s[i]);
    return z;
  };
  out.map.jacobian = [a, omega, s, d](const Vec& x) {
    Mat j(d, d);
    for (int i = 0; i < d; ++i) {
      const double cs = a[i] * std::cos(omega.row(i).dot(x) + s[i]);
      for (int jj = 0; jj < d; ++jj) j(i, jj) = cs * omega(i, jj);
    }
    return j;
  };
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------- criterion 1
CriterionResult criterion_kernel_calculus() {
  CriterionResult r{1, "kernel-calculus", false, "", 0};
  Rng rng(derive_seed(kSuiteSeed, 1));
  double worst_rho = 0.0, worst_sg = 0.0;
  for (int n = 0; n < 50; ++n) {
    const int d = 1 + static_cast<int>(rng.uniform() * 2);
    const int p = 2 + static_cast<int>(rng.uniform() * 3);
    const double eps = rng.uniform(0.3, 1.5);
    std::vector<Vec> pts(p);
    for (auto& y : pts) {
      y = Vec(d);
      for (int j = 0; j < d; ++j) y[j] = rng.uniform(-1.5, 1.5);
    }
    const double closed = rho_eps(pts, eps);
    const double quad = rho_eps_quadrature(pts, eps, 1e-11);
    worst_rho = std::max(worst_rho, std::abs(closed - quad));

    Vec u(d);
    for (int j = 0; j < d; ++j) u[j] = rng.uniform(-2.0, 2.0);
    const double er = rng.uniform(0.2, 1.5), es = rng.uniform(0.2, 1.5);
    const double conv = kernel_convolve(er, es, u);  // asserts 1e-10 internally
    const GaussianKernel k(er + es, d);
    worst_sg = std::max(worst_sg, std::abs(conv - k(u)) / std::max(k(u), 1e-300));
  }
  r.pass = worst_rho <= 1e-8 && worst_sg <= 1e-10;
  r.details = "max|rho-quad|=" + fmt(worst_rho) + " max sg rel=" + fmt(worst_sg);
  return r;
}

// ---------------------------------------------------------------- criterion 2
CriterionResult criterion_lp_exact_vs_quadrature() {
  CriterionResult r{2, "exact-Lp-sums", false, "", 0};
  Rng rng(derive_seed(kSuiteSeed, 2));
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    const int d = 1 + (n % 2);
    const int p = (n % 4 < 2) ? 2 : 4;
    const double eps = rng.uniform(0.25, 1.0);
    const ParticleMeasure mu = random_measure(rng, d, 5, 1.5);
    const double exact = lp_norm_exact(mu, eps, p);
    const double tol = std::max(1e-13, 1e-8 * std::abs(exact));
    const double quad = lp_norm_quadrature(mu, eps, p, tol);
    const double rel = std::abs(exact - quad) / std::max(std::abs(exact), 1e-300);
    worst = std::max(worst, rel);
  }
  r.pass = worst <= 1e-6;
  r.details = "max rel err=" + fmt(worst);
  return r;
}

// ---------------------------------------------------------------- criterion 3
CriterionResult criterion_lemma_zero_cases() {
  CriterionResult r{3, "lemma-zero-cases", false, "", 0};
  Rng rng(derive_seed(kSuiteSeed, 3));
  double worst = 0.0;

  auto sig_const = [](const Vec&) { Mat m(1, 1); m << 1.3; return m; };
  auto b_const = [](const Vec&) { Vec v(1); v << 0.7; return v; };
  auto sig_var = [](const Vec& x) { Mat m(1, 1); m << std::sin(x[0]); return m; };
  auto b_var = [](const Vec& x) { Vec v(1); v << std::cos(x[0]); return v; };

  const ParticleMeasure multi = random_measure(rng, 1, 4, 1.5);
  const Pe1Report p1c = verify_pe1(sig_const, b_const, multi, 0.7, 2);
  worst = std::max({worst, std::abs(p1c.lhs_A), std::abs(p1c.lhs_B)});

  ParticleMeasure single(1);
  Vec x0(1);
  x0 << 0.4;
  single.add(x0, 0.8);
  const Pe1Report p1s = verify_pe1(sig_var, b_var, single, 0.7, 2);
  worst = std::max({worst, std::abs(p1s.lhs_A), std::abs(p1s.lhs_B)});

  const Pe4Report p4 = verify_pe4(
      [](const Vec&) { Vec v(1); v << 0.9; return v; },
      [](const Vec&) { return 0.7; }, multi, 0.7, 2);
  worst = std::max(worst, std::abs(p4.lhs_2));

  ShiftMap zero;
  zero.dim = 1;
  zero.lip = 0.0;
  zero.lambda = 1.0;
  zero.zeta = [](const Vec& x) { return Vec::Zero(x.size()).eval(); };
  zero.jacobian = [](const Vec& x) {
    return Mat::Zero(x.size(), x.size()).eval();
  };
  const Pe3Report p3 = verify_pe3(zero, multi, 0.7, 2);
  const JumpNormReport jn = verify_J_and_76(zero, multi, 0.7, 2);
  worst = std::max({worst, std::abs(p3.C_exact), std::abs(p3.C_quadrature),
                    std::abs(jn.D_exact), std::abs(jn.D_quadrature)});

  r.pass = worst <= 1e-12;
  r.details = "max |zero-case lhs|=" + fmt(worst);
  return r;
}

// ---------------------------------------------------------------- criterion 4
CriterionResult criterion_lemma_inequalities() {
  CriterionResult r{4, "lemma-inequality-structure", false, "", 0};
  Rng rng(derive_seed(kSuiteSeed, 4));
  bool finite_ok = true, sharp_ok = true;

  // Pointwise eps-halving factors are not meaningful here: a single
  // instance's ratio can legitimately move several-fold when the dominant
  // atom-distance shell crosses the kernel scale. What the lemmas assert is
  // eps-uniformity of the constants, so stability is measured on the
  // empirical constant sweep: the max ratio over the instance ensemble at
  // the base scales against the max at the halved scales, per quantity.
  const int kQuantities = 5;
  double max_coarse[kQuantities] = {0, 0, 0, 0, 0};
  double max_fine[kQuantities] = {0, 0, 0, 0, 0};

  for (int inst = 0; inst < 100; ++inst) {
    const ParticleMeasure mu = random_measure(rng, 1, 4, 1.5);
    const double s0 = rng.uniform(0.5, 1.5), s1 = rng.uniform(0.1, 0.6);
    const double w1 = rng.uniform(0.5, 2.0), b0 = rng.uniform(-0.5, 0.5);
    const double b1 = rng.uniform(0.1, 0.6), w2 = rng.uniform(0.5, 2.0);
    auto sig = [=](const Vec& x) { Mat m(1, 1); m << s0 + s1 * std::sin(w1 * x[0]); return m; };
    auto bfn = [=](const Vec& x) { Vec v(1); v << b0 + b1 * std::cos(w2 * x[0]); return v; };
    auto sig_v = [=](const Vec& x) { Vec v(1); v << s0 + s1 * std::sin(w1 * x[0]); return v; };
    auto b_s = [=](const Vec& x) { return b0 + b1 * std::cos(w2 * x[0]); };
    const SmoothShift sh = random_shift(rng, 1, 0.35);
    const double eps = rng.uniform(0.3, 1.0);

    const Pe1Report a1 = verify_pe1(sig, bfn, mu, eps, 2);
    const Pe1Report a2 = verify_pe1(sig, bfn, mu, 0.5 * eps, 2);
    const Pe4Report f1 = verify_pe4(sig_v, b_s, mu, eps, 2);
    const Pe4Report f2 = verify_pe4(sig_v, b_s, mu, 0.5 * eps, 2);
    const Pe3Report c1 = verify_pe3(sh.map, mu, eps, 2, 1e-9);
    const Pe3Report c2 = verify_pe3(sh.map, mu, 0.5 * eps, 2, 1e-9);
    const JumpNormReport d1 = verify_J_and_76(sh.map, mu, eps, 2, 1e-9);
    const JumpNormReport d2 = verify_J_and_76(sh.map, mu, 0.5 * eps, 2, 1e-9);

    for (double v : {a1.ratio_A, a1.ratio_B, a1.ratio_A_majorant, a1.ratio_B_majorant,
                     a2.ratio_A, a2.ratio_B, f1.ratio_2, f1.ratio_2_majorant,
                     c1.bound_ratio, c1.bound_ratio_majorant, c2.bound_ratio,
                     d1.ratio_D, d1.ratio_D_majorant, d2.ratio_D})
      finite_ok = finite_ok && std::isfinite(v);
    sharp_ok = sharp_ok && f1.sharp_bound_ok && f2.sharp_bound_ok;

    const double coarse[kQuantities] = {a1.ratio_A_majorant, a1.ratio_B_majorant,
                                        f1.ratio_2_majorant, c1.bound_ratio_majorant,
                                        d1.ratio_D_majorant};
    const double fine[kQuantities] = {a2.ratio_A_majorant, a2.ratio_B_majorant,
                                      f2.ratio_2_majorant, c2.bound_ratio_majorant,
                                      d2.ratio_D_majorant};
    for (int q = 0; q < kQuantities; ++q) {
      max_coarse[q] = std::max(max_coarse[q], coarse[q]);
      max_fine[q] = std::max(max_fine[q], fine[q]);
    }
  }

  double worst_factor = 1.0, max_ratio = 0.0;
  for (int q = 0; q < kQuantities; ++q) {
    max_ratio = std::max({max_ratio, max_coarse[q], max_fine[q]});
    if (max_coarse[q] > 0.0 && max_fine[q] > 0.0)
      worst_factor = std::max({worst_factor, max_coarse[q] / max_fine[q],
                               max_fine[q] / max_coarse[q]});
    else
      finite_ok = false;
  }
  r.pass = finite_ok && sharp_ok && worst_factor <= 4.0;
  r.details = std::string("finite=") + (finite_ok ? "yes" : "no") +
              " pe4-sharp-violations=" + (sharp_ok ? "0" : ">0") +
              " ensemble eps-halving factor=" + fmt(worst_factor) +
              " max ratio=" + fmt(max_ratio);
  return r;
}

// ---------------------------------------------------------------- criterion 5
CriterionResult criterion_adjoint_duality(int threads) {
  CriterionResult r{5, "adjoint-duality", false, "", 0};

  // Pre-draw the suite so the instances are independent of the thread count.
  struct Triple {
    SmoothShift sh;
    Vec cphi, cpsi;
    double rphi, rpsi;
  };
  std::vector<Triple> triples(50);
  {
    Rng rng(derive_seed(kSuiteSeed, 5));
    for (int n = 0; n < 50; ++n) {
      const int d = (n < 25) ? 1 : 2;
      Triple& t = triples[n];
      t.sh = random_shift(rng, d, 0.35);
      // A nonvanishing constant part keeps the J pairings away from zero.
      auto base = t.sh.map.zeta;
      Vec c(d);
      for (int j = 0; j < d; ++j)
        c[j] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.25, 0.5);
      t.sh.map.zeta = [base, c](const Vec& x) { return (base(x) + c).eval(); };
      t.cphi = Vec(d);
      t.cpsi = Vec(d);
      for (int j = 0; j < d; ++j) {
        t.cphi[j] = rng.uniform(-0.8, 0.8);
        t.cpsi[j] = rng.uniform(-0.8, 0.8);
      }
      t.rphi = rng.uniform(1.5, 2.5);
      t.rpsi = rng.uniform(1.5, 2.5);
    }
  }

  std::vector<double> rels(triples.size(), 0.0);
  parallel_for(static_cast<int>(triples.size()), threads, [&](int n) {
    const Triple& t = triples[n];
    // Bumps scaled to unit height so the pairings sit at O(0.1..1).
    const TestFunction phi =
        TestFunction::scale(TestFunction::bump(t.cphi, t.rphi), M_E);
    const TestFunction psi =
        TestFunction::scale(TestFunction::bump(t.cpsi, t.rpsi), M_E);
    // The shifted test function sees arguments moved by at most sup|zeta|
    // (= sup|zeta*|); intersecting supports trims the integration boxes.
    const double sup_shift = 1.6;
    for (AdjointKind kind : {AdjointKind::T, AdjointKind::I, AdjointKind::J}) {
      auto forward = [&](const TestFunction& g, const Vec& x) {
        switch (kind) {
          case AdjointKind::T:
            return apply_T(t.sh.map.zeta, g, x);
          case AdjointKind::I:
            return apply_I(t.sh.map.zeta, g, x);
          default:
            return apply_J(t.sh.map.zeta, g, x);
        }
      };
      Vec lo = (t.cphi.array() - phi.support_radius)
                   .max(t.cpsi.array() - psi.support_radius - sup_shift);
      Vec hi = (t.cphi.array() + phi.support_radius)
                   .min(t.cpsi.array() + psi.support_radius + sup_shift);
      const double lhs =
          (lo.array() < hi.array()).all()
              ? integrate_box(
                    [&](const Vec& x) { return phi.value(x) * forward(psi, x); },
                    lo, hi, 3e-10)
              : 0.0;
      lo = (t.cpsi.array() - psi.support_radius)
               .max(t.cphi.array() - phi.support_radius - sup_shift);
      hi = (t.cpsi.array() + psi.support_radius)
               .min(t.cphi.array() + phi.support_radius + sup_shift);
      const double rhs =
          (lo.array() < hi.array()).all()
              ? integrate_box(
                    [&](const Vec& x) {
                      return adjoint_apply(t.sh.map, kind, phi, x, 1e-12) *
                             psi.value(x);
                    },
                    lo, hi, 3e-10)
              : 0.0;
      const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-3});
      rels[n] = std::max(rels[n], std::abs(lhs - rhs) / scale);
    }
  });
  double worst_rel = 0.0;
  for (double v : rels) worst_rel = std::max(worst_rel, v);

  // Analytic case zeta(x) = x/2.
  ShiftMap half;
  half.dim = 1;
  half.lip = 0.5;
  half.lambda = 1.0;
  half.zeta = [](const Vec& x) { return (0.5 * x).eval(); };
  half.jacobian = [](const Vec&) { Mat m(1, 1); m << 0.5; return m; };
  Vec xp(1);
  xp << 0.7;
  const Vec zs = zeta_star(half, xp, 1e-13);
  const FrakC fc = frak_c(half, xp);
  const double analytic_err =
      std::max({std::abs(zs[0] + xp[0] / 3.0), std::abs(fc.c + 1.0 / 3.0),
                std::abs(fc.c_bar)});

  r.pass = worst_rel <= 1e-7 && analytic_err <= 1e-10;
  r.details = "max duality rel err=" + fmt(worst_rel) +
              " analytic case err=" + fmt(analytic_err);
  return r;
}

// ---------------------------------------------------------------- criterion 6
CriterionResult criterion_truncation() {
  CriterionResult r{6, "truncation", false, "", 0};
  Rng rng(derive_seed(kSuiteSeed, 6));

  // chi_n: exact inside, zero outside.
  auto f = [](const Vec& z) { return (2.0 * z).eval(); };
  const double n_level = 1.5;
  auto fn = truncate_chi(f, n_level);
  double chi_err = 0.0;
  for (int i = 0; i < 2000; ++i) {
    Vec z(1);
    z << rng.uniform(-4.5, 4.5);
    const double a = std::abs(z[0]);
    const Vec v = fn(z);
    if (a <= n_level) chi_err = std::max(chi_err, (v - f(z)).norm());
    if (a >= 2.0 * n_level) chi_err = std::max(chi_err, v.norm());
  }

  // Sandy-function Lipschitz bound over 1e4 pairs, d = 1.
  const double R = 1.5, epsc = 0.5;
  double sandy_excess = 0.0;
  const double rbar = (R + 1.0) * std::exp(1.0 / epsc) + 1.0;
  for (int i = 0; i < 10000; ++i) {
    Vec x(1), y(1);
    x << rng.uniform(-rbar - 2.0, rbar + 2.0);
    y << x[0] + rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-2.0, 1.0));
    if (std::abs(y[0]) > std::abs(x[0])) std::swap(x[0], y[0]);
    const double lhs = std::abs(kappa_R_eps(x, R, epsc) - kappa_R_eps(y, R, epsc));
    const double bound =
        epsc * std::abs(x[0] - y[0]) / std::max(R, std::abs(y[0]) - 1.0);
    sandy_excess = std::max(sandy_excess, lhs - bound * (1.0 + 1e-9) - 1e-12);
  }

  // biLipschitz truncation with 1e4 sampled pairs.
  ShiftMap lin;
  lin.dim = 1;
  lin.lip = 0.4;
  lin.lambda = 1.0;
  lin.zeta = [](const Vec& x) { return (0.4 * x).eval(); };
  lin.jacobian = [](const Vec&) { Mat m(1, 1); m << 0.4; return m; };
  const BiLipTruncation tr =
      bilipschitz_truncate(lin, 1.0, 2.0, derive_seed(kSuiteSeed, 61), 10000);

  r.pass = chi_err == 0.0 && sandy_excess <= 0.0 && tr.sampled_bilip <= 2.0;
  r.details = "chi err=" + fmt(chi_err) + " sandy excess=" + fmt(sandy_excess) +
              " biLip=" + fmt(tr.sampled_bilip) + " support R=" +
              fmt(tr.support_radius);
  return r;
}

// ------------------------------------------------------- filter/grid helpers
struct FilterRunResult {
  FilterState state;
  ObservationRecord obs;
  SystemPath path;
};

FilterRunResult run_filter_once(const ModelSpec& model, double T, double dt,
                                int N, double eps_out, std::uint64_t seed) {
  const PathBundle bundle =
      sample_bundle(T, dt, model.act0, model.act1,
                    BundleDims{model.coeffs.d1, model.coeffs.dprime}, seed);
  Rng x0rng(derive_seed(seed, 0x58));
  const Vec x0 = model.pi0_sampler(x0rng);
  FilterRunResult out;
  out.path = simulate_system(model.coeffs, x0, model.y0, bundle);
  out.obs = observation_record(out.path);
  FilterOptions fopt;
  fopt.seed = derive_seed(seed, 0x46);
  FilterState st =
      init_filter(model.pi0_sampler, N, eps_out, derive_seed(seed, 0x49));
  out.state = propagate(st, model.coeffs, model.act0, out.obs, 0.0, T, fopt);
  return out;
}

// ---------------------------------------------------------------- criterion 7
CriterionResult criterion_filter_vs_grid(int threads) {
  CriterionResult r{7, "filter-vs-grid-oracle", false, "", 0};
  const ModelSpec model = make_model("jump-shared-1d");
  const double T = 1.0, dt = 1e-3, eps_out = 0.0025;
  const int N = 10000, seeds = 8;

  const int gn = 1601;
  std::vector<double> xg(gn), pi0(gn);
  const double xlo = -6.0, xhi = 6.0;
  for (int j = 0; j < gn; ++j) {
    xg[j] = xlo + (xhi - xlo) * j / (gn - 1);
    const double s = model.pi0_std;
    pi0[j] = std::exp(-0.5 * xg[j] * xg[j] / (s * s)) / (s * std::sqrt(2.0 * M_PI));
  }

  std::vector<double> l1(seeds, 1e300);
  std::vector<std::string> errors(seeds);
  parallel_for(seeds, threads, [&](int s) {
    try {
      const std::uint64_t seed = derive_seed(kSuiteSeed, 7, s);
      FilterRunResult run = run_filter_once(model, T, dt, N, eps_out, seed);
      GridSolverResult grid = reference_grid_solver(model.coeffs, model.act0,
                                                    run.obs, xg, pi0, {});
      const double gmass = grid.mass.back();
      const ParticleMeasure mu = run.state.measure();
      const double pmass = run.state.unnormalized_mass();
      double dist = 0.0;
      Vec xv(1);
      for (int j = 0; j + 1 < gn; ++j) {
        const double h = xg[j + 1] - xg[j];
        xv << xg[j];
        const double a = mollify(mu, eps_out, xv) / pmass;
        const double b = grid.final_density()[j] / gmass;
        xv << xg[j + 1];
        const double a2 = mollify(mu, eps_out, xv) / pmass;
        const double b2 = grid.final_density()[j + 1] / gmass;
        dist += 0.5 * h * (std::abs(a - b) + std::abs(a2 - b2));
      }
      l1[s] = dist;
    } catch (const std::exception& e) {
      errors[s] = e.what();
    }
  });

  double worst = 0.0;
  std::string err;
  for (int s = 0; s < seeds; ++s) {
    worst = std::max(worst, l1[s]);
    if (!errors[s].empty()) err = errors[s];
  }
  r.pass = err.empty() && worst <= 0.1;
  r.details = err.empty() ? "max L1 over seeds=" + fmt(worst) : "error: " + err;
  return r;
}

// ---------------------------------------------------------------- criterion 8
CriterionResult criterion_kalman(int threads) {
  CriterionResult r{8, "kalman-sanity", false, "", 0};
  // Clip at 8 on a process with stationary std 1: saturation probability
  // is far below 1e-6 on [0, 1].
  const ModelSpec model = make_model("clipped-linear-1d", {{"clip", 8.0}});
  const double T = 1.0, dt = 1e-3;
  const int N = 8000, seeds = 32;

  std::vector<double> mean_sq(seeds, 0.0), var_sq(seeds, 0.0), p_sq(seeds, 0.0);
  std::vector<std::string> errors(seeds);
  parallel_for(seeds, threads, [&](int s) {
    try {
      const std::uint64_t seed = derive_seed(kSuiteSeed, 8, s);
      const PathBundle bundle = sample_bundle(T, dt, model.act0, model.act1,
                                              BundleDims{1, 1}, seed);
      Rng x0rng(derive_seed(seed, 0x58));
      const Vec x0 = model.pi0_sampler(x0rng);
      const SystemPath path = simulate_system(model.coeffs, x0, model.y0, bundle);
      const ObservationRecord obs = observation_record(path);

      KalmanBucy kb;
      kb.a1 = model.lin_a1;
      kb.sigma = model.lin_sigma;
      kb.c1 = model.lin_c1;
      const KalmanBucy::Result ref =
          kb.run(obs, model.x0_mean[0], model.pi0_std * model.pi0_std);

      FilterOptions fopt;
      fopt.seed = derive_seed(seed, 0x46);
      FilterState st = init_filter(model.pi0_sampler, N, 0.01,
                                   derive_seed(seed, 0x49));
      double msq = 0.0, vsq = 0.0, psq = 0.0;
      int count = 0;
      std::size_t k = 0;
      const std::size_t stride = 20;
      auto xfun = [](const Vec& x) { return x[0]; };
      while (k + stride < obs.times.size()) {
        st = propagate(st, model.coeffs, model.act0, obs, obs.times[k],
                       obs.times[k + stride], fopt);
        k += stride;
        const double m = normalized_estimate(st, xfun);
        const double m2 = normalized_estimate(
            st, [&](const Vec& x) { return (x[0] - m) * (x[0] - m); });
        msq += (m - ref.mean[k]) * (m - ref.mean[k]);
        vsq += (m2 - ref.var[k]) * (m2 - ref.var[k]);
        psq += ref.var[k];
        ++count;
      }
      mean_sq[s] = msq / count;
      var_sq[s] = vsq / count;
      p_sq[s] = psq / count;
    } catch (const std::exception& e) {
      errors[s] = e.what();
    }
  });

  double msq = 0.0, vsq = 0.0, pbar = 0.0;
  std::string err;
  for (int s = 0; s < seeds; ++s) {
    msq += mean_sq[s];
    vsq += var_sq[s];
    pbar += p_sq[s];
    if (!errors[s].empty()) err = errors[s];
  }
  msq /= seeds;
  vsq /= seeds;
  pbar /= seeds;
  const double rel_mean = std::sqrt(msq) / std::sqrt(pbar);
  const double rel_var = std::sqrt(vsq) / pbar;
  r.pass = err.empty() && rel_mean <= 0.05 && rel_var <= 0.05;
  r.details = err.empty() ? "mean RMSE/posterior std=" + fmt(rel_mean) +
                                " var RMSE/posterior var=" + fmt(rel_var)
                          : "error: " + err;
  return r;
}

// ---------------------------------------------------------------- criterion 9
CriterionResult criterion_zakai_residual(int threads) {
  CriterionResult r{9, "zakai-weak-residual", false, "", 0};
  const ModelSpec model = make_model("jump-shared-1d");
  ZakaiResidualConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 2e-3;
  cfg.particles = 384;
  cfg.y0 = model.y0;
  cfg.pi0_sampler = model.pi0_sampler;

  Vec c0(1);
  c0 << 0.0;
  const TestFunction bump = TestFunction::bump(c0, 3.0);
  const TestFunction one = TestFunction::constant(1, 1.0);

  const ZakaiResidualReport rb =
      zakai_residual(model.coeffs, model.act0, model.act1, bump, cfg, 200,
                     derive_seed(kSuiteSeed, 91), threads);
  const ZakaiResidualReport ro =
      zakai_residual(model.coeffs, model.act0, model.act1, one, cfg, 200,
                     derive_seed(kSuiteSeed, 92), threads);

  r.pass = rb.within_3se && ro.within_3se;
  r.details = "bump: mean=" + fmt(rb.mean) + " se=" + fmt(rb.std_error) +
              "; mass identity (phi=1): mean=" + fmt(ro.mean) +
              " se=" + fmt(ro.std_error);
  return r;
}

// --------------------------------------------------------------- criterion 10
CriterionResult criterion_no_blowup(int threads) {
  CriterionResult r{10, "no-blow-up", false, "", 0};
  const ModelSpec model = make_model("jump-shared-1d");
  const double T = 1.0, dt = 1e-3;
  const int N = 2000, seeds = 4;
  const std::vector<int> ps = {2, 4};
  const std::vector<double> eps_levels = {0.04, 0.02};

  bool finite_ok = true, mass_ok = true, pone_ok = true;
  std::vector<std::vector<double>> sup_ratio(
      eps_levels.size(), std::vector<double>(seeds * ps.size(), 0.0));
  std::vector<std::string> errors(seeds);

  parallel_for(seeds, threads, [&](int s) {
    try {
      const std::uint64_t seed = derive_seed(kSuiteSeed, 10, s);
      const PathBundle bundle = sample_bundle(T, dt, model.act0, model.act1,
                                              BundleDims{1, 1}, seed);
      Rng x0rng(derive_seed(seed, 0x58));
      const Vec x0 = model.pi0_sampler(x0rng);
      const SystemPath path = simulate_system(model.coeffs, x0, model.y0, bundle);
      const ObservationRecord obs = observation_record(path);
      FilterOptions fopt;
      fopt.seed = derive_seed(seed, 0x46);
      FilterState st = init_filter(model.pi0_sampler, N, 0.01,
                                   derive_seed(seed, 0x49));

      std::vector<std::vector<double>> norm0(eps_levels.size(),
                                             std::vector<double>(ps.size(), 0.0));
      for (std::size_t e = 0; e < eps_levels.size(); ++e)
        for (std::size_t pi = 0; pi < ps.size(); ++pi)
          norm0[e][pi] = lp_norm_quadrature(st.measure(), eps_levels[e],
                                            ps[pi], 1e-9);

      const double snap = 0.1;
      for (double t = snap; t <= T + 1e-9; t += snap) {
        st = propagate(st, model.coeffs, model.act0, obs, t - snap,
                       std::min(t, T), fopt);
        if (!(st.unnormalized_mass() > 0.0)) mass_ok = false;
        const double pone = normalized_estimate(
            st, [](const Vec&) { return 1.0; });
        if (pone != 1.0) pone_ok = false;
        for (std::size_t e = 0; e < eps_levels.size(); ++e)
          for (std::size_t pi = 0; pi < ps.size(); ++pi) {
            const double nrm = lp_norm_quadrature(st.measure(), eps_levels[e],
                                                  ps[pi], 1e-9);
            const double ratio = nrm / norm0[e][pi];
            if (!std::isfinite(ratio)) finite_ok = false;
            auto& cell = sup_ratio[e][s * ps.size() + pi];
            cell = std::max(cell, ratio);
          }
      }
    } catch (const std::exception& e) {
      errors[s] = e.what();
    }
  });

  std::string err;
  for (const auto& e : errors)
    if (!e.empty()) err = e;

  // Stability of the seed-max under eps halving, per p.
  double worst_change = 1.0;
  for (std::size_t pi = 0; pi < ps.size(); ++pi) {
    double m0 = 0.0, m1 = 0.0;
    for (int s = 0; s < seeds; ++s) {
      m0 = std::max(m0, sup_ratio[0][s * ps.size() + pi]);
      m1 = std::max(m1, sup_ratio[1][s * ps.size() + pi]);
    }
    if (m0 > 0.0 && m1 > 0.0)
      worst_change = std::max(worst_change, std::max(m0 / m1, m1 / m0));
    else
      finite_ok = false;
  }

  r.pass = err.empty() && finite_ok && mass_ok && pone_ok && worst_change < 2.0;
  r.details = err.empty()
                  ? "eps-halving change of max ratio=" + fmt(worst_change) +
                        std::string(pone_ok ? "; P(1)=1 exact" : "; P(1) != 1")
                  : "error: " + err;
  return r;
}

// --------------------------------------------------------------- criterion 11
std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CriterionResult criterion_determinism(const AcceptanceOptions& opt) {
  CriterionResult r{11, "determinism", false, "", 0};
  if (opt.cli_path.empty()) {
    r.details = "no CLI path provided";
    return r;
  }
  namespace fs = std::filesystem;
  const fs::path base = fs::path(opt.work_dir) / "determinism";
  fs::remove_all(base);
  fs::create_directories(base);

  const std::string cfg_common =
      "model = jump-shared-1d\nT = 0.2\ndt = 0.002\nparticles = 200\n"
      "seed = 7\ngrid_n = 201\ngrid_lo = -5\ngrid_hi = 5\n"
      "instances = 5\nruns = 4\n";
  const fs::path cfg_path = base / "cfg.txt";
  {
    std::ofstream out(cfg_path);
    out << cfg_common;
  }

  const std::vector<std::string> subs = {"simulate", "filter", "verify-lemmas",
                                         "verify-adjoints", "benchmark"};
  std::string failure;
  for (const std::string& sub : subs) {
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out_dir = base / (sub + "-" + std::to_string(rep));
      std::string cmd = "'" + opt.cli_path + "' " + sub;
      if (sub == "benchmark")
        cmd += " --only 1";
      else
        cmd += " --config '" + cfg_path.string() + "'";
      cmd += " --out-dir '" + out_dir.string() + "'";
      cmd += " > '" + (base / (sub + std::to_string(rep) + ".log")).string() +
             "' 2>&1";
      const int rc = std::system(cmd.c_str());
      if (rc != 0) {
        failure = sub + ": exit code " + std::to_string(rc);
        break;
      }
    }
    if (!failure.empty()) break;
    // Compare artifact trees byte for byte.
    std::vector<fs::path> files0;
    for (const auto& e : fs::recursive_directory_iterator(base / (sub + "-0")))
      if (e.is_regular_file()) files0.push_back(fs::relative(e.path(), base / (sub + "-0")));
    std::sort(files0.begin(), files0.end());
    if (files0.empty()) {
      failure = sub + ": produced no artifacts";
      break;
    }
    for (const auto& rel : files0) {
      const std::string a = read_all(base / (sub + "-0") / rel);
      const std::string b = read_all(base / (sub + "-1") / rel);
      if (a.empty() || a != b) {
        failure = sub + ": artifact differs or empty: " + rel.string();
        break;
      }
    }
    if (!failure.empty()) break;
  }
  r.pass = failure.empty();
  r.details = failure.empty() ? "all subcommands byte-identical" : failure;
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
  std::vector<int> ids = opt.only;
  if (ids.empty()) ids = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  std::vector<CriterionResult> results;
  for (int id : ids) {
    const auto t0 = Clock::now();
    CriterionResult res;
    try {
      switch (id) {
        case 1: res = criterion_kernel_calculus(); break;
        case 2: res = criterion_lp_exact_vs_quadrature(); break;
        case 3: res = criterion_lemma_zero_cases(); break;
        case 4: res = criterion_lemma_inequalities(); break;
        case 5: res = criterion_adjoint_duality(opt.threads); break;
        case 6: res = criterion_truncation(); break;
        case 7: res = criterion_filter_vs_grid(opt.threads); break;
        case 8: res = criterion_kalman(opt.threads); break;
        case 9: res = criterion_zakai_residual(opt.threads); break;
        case 10: res = criterion_no_blowup(opt.threads); break;
        case 11: res = criterion_determinism(opt); break;
        default:
          res.id = id;
          res.name = "unknown";
          res.details = "no such criterion";
      }
    } catch (const std::exception& e) {
      res.id = id;
      res.name = "criterion-" + std::to_string(id);
      res.pass = false;
      res.details = std::string("exception: ") + e.what();
    }
    res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    // Stated runtime budgets are part of the criteria.
    const double budget = (id == 1) ? 10.0 : (id == 2) ? 30.0 : (id == 7) ? 600.0 : 0.0;
    if (budget > 0.0 && res.seconds > budget) {
      res.pass = false;
      res.details += " [over runtime budget " + fmt(budget) + "s]";
    }
    results.push_back(std::move(res));
  }
  return results;
}

std::string render_acceptance_table(const std::vector<CriterionResult>& results,
                                    bool include_timing) {
  std::ostringstream out;
  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass;
    char line[512];
    if (include_timing)
      std::snprintf(line, sizeof(line), "[%s] %2d %-26s %7.1fs  %s\n",
                    r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds,
                    r.details.c_str());
    else
      std::snprintf(line, sizeof(line), "[%s] %2d %-26s %s\n",
                    r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.details.c_str());
    out << line;
  }
  out << (all ? "ACCEPTANCE: all criteria passed\n"
              : "ACCEPTANCE: FAILURES PRESENT\n");
  return out.str();
}

bool all_passed(const std::vector<CriterionResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace jumpfilter
