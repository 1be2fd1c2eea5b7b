#include <doctest.h>

#include <cmath>

#include "jumpfilter/models.hpp"
#include "jumpfilter/simulate.hpp"

using namespace jumpfilter;

namespace {

Vec v1(double x) {
  Vec v(1);
  v << x;
  return v;
}

bool bundles_identical(const PathBundle& a, const PathBundle& b) {
  if (a.grid != b.grid) return false;
  if (a.n0_events.size() != b.n0_events.size()) return false;
  if (a.n1_events.size() != b.n1_events.size()) return false;
  for (std::size_t i = 0; i < a.n1_events.size(); ++i) {
    if (a.n1_events[i].time != b.n1_events[i].time) return false;
    if (a.n1_events[i].mark != b.n1_events[i].mark) return false;
  }
  for (std::size_t k = 0; k < a.dW.size(); ++k)
    if (a.dW[k] != b.dW[k] || a.dV[k] != b.dV[k]) return false;
  return true;
}

/// Coarsen a bundle by summing increments over blocks of `factor` cells;
/// only valid when the fine grid is uniform (no events).
PathBundle coarsen(const PathBundle& fine, int factor) {
  PathBundle c;
  c.act0 = fine.act0;
  c.act1 = fine.act1;
  c.mean_mark0 = fine.mean_mark0;
  c.mean_mark1 = fine.mean_mark1;
  for (std::size_t k = 0; k < fine.grid.size(); k += factor) c.grid.push_back(fine.grid[k]);
  if (c.grid.back() != fine.grid.back()) c.grid.push_back(fine.grid.back());
  for (std::size_t k = 0; k + 1 < fine.grid.size(); k += factor) {
    Vec dw = Vec::Zero(fine.dW[k].size());
    Vec dv = Vec::Zero(fine.dV[k].size());
    for (int j = 0; j < factor && k + j + 1 < fine.grid.size(); ++j) {
      dw += fine.dW[k + j];
      dv += fine.dV[k + j];
    }
    c.dW.push_back(dw);
    c.dV.push_back(dv);
  }
  return c;
}

}  // namespace

TEST_CASE("sample_bundle determinism and structure") {
  const ModelSpec m = make_model("jump-shared-1d");
  const PathBundle a = sample_bundle(1.0, 0.01, m.act0, m.act1, {1, 1}, 42);
  const PathBundle b = sample_bundle(1.0, 0.01, m.act0, m.act1, {1, 1}, 42);
  CHECK(bundles_identical(a, b));
  const PathBundle c = sample_bundle(1.0, 0.01, m.act0, m.act1, {1, 1}, 43);
  CHECK_FALSE(bundles_identical(a, c));

  CHECK(a.grid.front() == 0.0);
  CHECK(a.grid.back() == 1.0);
  for (std::size_t k = 0; k + 1 < a.grid.size(); ++k) CHECK(a.grid[k] < a.grid[k + 1]);
  // Every event time is a grid point.
  for (const auto& ev : a.n1_events) {
    bool found = false;
    for (double t : a.grid) found = found || (t == ev.time);
    CHECK(found);
  }
}

TEST_CASE("near-zero rate produces no events") {
  JumpActivity tiny;
  tiny.rate = 1e-12;
  tiny.mark_dim = 1;
  tiny.sample_mark = [](Rng&) { return Vec::Ones(1).eval(); };
  tiny.second_moment = 1e-12;
  const PathBundle b = sample_bundle(1.0, 0.05, tiny, {}, {1, 1}, 7);
  CHECK(b.n0_events.empty());
}

TEST_CASE("Poisson event counts match the rate") {
  JumpActivity act;
  act.rate = 3.0;
  act.mark_dim = 1;
  act.sample_mark = [](Rng&) { return Vec::Zero(1).eval(); };
  act.second_moment = 0.0;
  double total = 0.0;
  const int n = 10000;
  for (int s = 0; s < n; ++s) {
    const PathBundle b = sample_bundle(1.0, 0.25, {}, act, {1, 1}, 1000 + s);
    total += static_cast<double>(b.n1_events.size());
  }
  const double mean = total / n;
  CHECK(std::abs(mean - 3.0) <= 3.0 * std::sqrt(3.0 / n));
}

TEST_CASE("simulate_system deterministic special cases") {
  const ModelSpec m = make_model("trivial-constants");
  const PathBundle b = sample_bundle(1.0, 0.01, m.act0, m.act1, {1, 1}, 5);
  const SystemPath path = simulate_system(m.coeffs, v1(0.4), v1(-0.2), b);
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    CHECK(path.X[k][0] == 0.4);
  }
  // Y still carries dV: the observation line has the raw Wiener noise.
  // With B = 0 the increments are exactly dV.
  for (std::size_t k = 0; k + 1 < path.times.size(); ++k)
    CHECK(path.Y[k + 1][0] - path.Y[k][0] == doctest::Approx(b.dV[k][0]).epsilon(1e-12));

  // b = 1, everything else zero: X_t = x0 + t.
  CoefficientSet c = m.coeffs;
  c.b = [](double, const Vec&, const Vec&) { return v1(1.0); };
  const SystemPath drift = simulate_system(c, v1(0.0), v1(0.0), b);
  for (std::size_t k = 0; k < drift.times.size(); ++k)
    CHECK(drift.X[k][0] == doctest::Approx(drift.times[k]).epsilon(1e-12));
}

TEST_CASE("shared jumps move X and Y in the same grid row") {
  ModelSpec m = make_model("jump-shared-1d");
  // Remove diffusion noise so the jump bookkeeping is exact.
  m.coeffs.sigma = [](double, const Vec&, const Vec&) { return Mat::Zero(1, 1).eval(); };
  m.coeffs.b = [](double, const Vec&, const Vec&) { return v1(0.0); };
  m.coeffs.B = [](double, const Vec&, const Vec&) { return v1(0.0); };
  const PathBundle b = sample_bundle(1.0, 0.05, m.act0, m.act1, {1, 1}, 99);
  REQUIRE(!b.n1_events.empty());
  const SystemPath path = simulate_system(m.coeffs, v1(0.0), v1(0.0), b);
  // With B = 0 and centred marks: dY = dV + mark at event rows.
  auto ev = b.n1_events.begin();
  for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
    const double dy = path.Y[k + 1][0] - path.Y[k][0];
    if (ev != b.n1_events.end() && path.times[k + 1] == ev->time) {
      CHECK(dy - b.dV[k][0] == doctest::Approx(ev->mark[0]).epsilon(1e-12));
      // X jumped by xi = g * mark (default alpha = 0, g = 0.5).
      CHECK(path.X[k + 1][0] - path.X[k][0] ==
            doctest::Approx(0.5 * ev->mark[0]).epsilon(1e-12));
      ++ev;
    } else {
      CHECK(dy == doctest::Approx(b.dV[k][0]).epsilon(1e-12));
    }
  }
}

TEST_CASE("second moments stable under dt refinement") {
  const ModelSpec m = make_model("jump-shared-1d");
  auto sup_moment = [&](double dt) {
    double acc = 0.0;
    const int n = 4000;
    for (int s = 0; s < n; ++s) {
      const PathBundle b = sample_bundle(0.5, dt, m.act0, m.act1, {1, 1}, 500 + s);
      Rng r0(derive_seed(500 + s, 0x58));
      const SystemPath p = simulate_system(m.coeffs, m.pi0_sampler(r0), v1(0.0), b);
      double sup = 0.0;
      for (std::size_t k = 0; k < p.times.size(); ++k)
        sup = std::max(sup, p.X[k].squaredNorm() + p.Y[k].squaredNorm());
      acc += sup;
    }
    return acc / n;
  };
  const double coarse = sup_moment(0.02);
  const double fine = sup_moment(0.01);
  CHECK(std::isfinite(coarse));
  CHECK(std::abs(coarse - fine) <= 0.05 * std::max(coarse, fine));
}

TEST_CASE("girsanov weights") {
  const ModelSpec m = make_model("trivial-constants");
  const PathBundle b = sample_bundle(1.0, 0.01, {}, {}, {1, 1}, 21);
  const SystemPath p = simulate_system(m.coeffs, v1(0.0), v1(0.0), b);
  for (double g : girsanov_weight_path(m.coeffs, p)) CHECK(g == 1.0);

  // E gamma_T = 1 for bounded B (martingale property), by Monte Carlo.
  const ModelSpec lin = make_model("clipped-linear-1d");
  const int n = 10000;
  double acc = 0.0, acc2 = 0.0;
  double supinv = 0.0;
  for (int s = 0; s < n; ++s) {
    const PathBundle bs = sample_bundle(0.5, 0.01, {}, {}, {1, 1}, 3000 + s);
    Rng r0(derive_seed(3000 + s, 0x58));
    const SystemPath ps = simulate_system(lin.coeffs, lin.pi0_sampler(r0), v1(0.0), bs);
    const auto g = girsanov_weight_path(lin.coeffs, ps);
    acc += g.back();
    acc2 += g.back() * g.back();
    for (double gv : g) supinv = std::max(supinv, 1.0 / gv);
  }
  const double mean = acc / n;
  const double se = std::sqrt((acc2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0) <= 3.0 * se);
  CHECK(std::isfinite(supinv));  // E sup gamma^{-r'} finite in practice
}

TEST_CASE("innovation path") {
  // B = 0: tilde V = V exactly.
  const ModelSpec m = make_model("trivial-constants");
  const PathBundle b = sample_bundle(1.0, 0.01, {}, {}, {1, 1}, 33);
  const SystemPath p = simulate_system(m.coeffs, v1(0.0), v1(0.0), b);
  const auto vt = innovation_path(m.coeffs, p);
  Vec acc = Vec::Zero(1);
  for (std::size_t k = 0; k + 1 < p.times.size(); ++k) {
    acc += b.dV[k];
    CHECK(vt[k + 1][0] == doctest::Approx(acc[0]).epsilon(1e-12));
  }

  // Quadratic variation of tilde V over [0,1] is d' within ~5% at dt = 1e-4.
  const ModelSpec lin = make_model("clipped-linear-1d");
  const PathBundle bf = sample_bundle(1.0, 1e-4, {}, {}, {1, 1}, 77);
  Rng r0(derive_seed(77, 0x58));
  const SystemPath pf = simulate_system(lin.coeffs, lin.pi0_sampler(r0), v1(0.0), bf);
  const auto vtf = innovation_path(lin.coeffs, pf);
  double qv = 0.0;
  for (std::size_t k = 0; k + 1 < pf.times.size(); ++k) {
    const double dv = vtf[k + 1][0] - vtf[k][0];
    qv += dv * dv;
  }
  CHECK(std::abs(qv - 1.0) <= 0.05);

  // The innovation is recoverable from the observation record.
  const ModelSpec js = make_model("jump-shared-1d");
  const PathBundle bj = sample_bundle(1.0, 0.01, js.act0, js.act1, {1, 1}, 55);
  Rng r1(derive_seed(55, 0x58));
  const SystemPath pj = simulate_system(js.coeffs, js.pi0_sampler(r1), v1(0.0), bj);
  const ObservationRecord obs = observation_record(pj);
  const auto vtj = innovation_path(js.coeffs, pj);
  for (std::size_t k = 0; k + 1 < obs.times.size(); ++k) {
    const Vec dv = obs.innovation_increment(k);
    CHECK(dv[0] == doctest::Approx(vtj[k + 1][0] - vtj[k][0]).epsilon(1e-10));
  }
}

TEST_CASE("strong dt-refinement on the linear model") {
  const ModelSpec lin = make_model("clipped-linear-1d");
  const int runs = 200;
  double err_coarse = 0.0, err_mid = 0.0;
  for (int s = 0; s < runs; ++s) {
    const PathBundle fine = sample_bundle(1.0, 1.0 / 512, {}, {}, {1, 1}, 9000 + s);
    const PathBundle mid = coarsen(fine, 2);    // dt = 1/256
    const PathBundle coarse = coarsen(fine, 4); // dt = 1/128
    Rng r0(derive_seed(9000 + s, 0x58));
    const Vec x0 = lin.pi0_sampler(r0);
    const double ref = simulate_system(lin.coeffs, x0, v1(0.0), fine).X.back()[0];
    err_mid += std::pow(simulate_system(lin.coeffs, x0, v1(0.0), mid).X.back()[0] - ref, 2);
    err_coarse += std::pow(simulate_system(lin.coeffs, x0, v1(0.0), coarse).X.back()[0] - ref, 2);
  }
  const double order =
      0.5 * std::log2(err_coarse / err_mid);  // strong order in L2
  CHECK(order >= 0.5);
}
