#include <doctest.h>

#include <cmath>

#include "jumpfilter/errors.hpp"
#include "jumpfilter/rng.hpp"
#include "jumpfilter/verifier.hpp"

using namespace jumpfilter;

namespace {

Vec v1(double x) {
  Vec v(1);
  v << x;
  return v;
}

Mat m11(double x) {
  Mat m(1, 1);
  m << x;
  return m;
}

ParticleMeasure random_measure(Rng& rng, int m) {
  ParticleMeasure mu(1);
  for (int i = 0; i < m; ++i) mu.add(v1(rng.uniform(-1.5, 1.5)), rng.uniform(-1.0, 1.0));
  return mu;
}

ShiftMap sine_shift(double amp) {
  ShiftMap s;
  s.dim = 1;
  s.lip = amp;
  s.lambda = 1.0 - amp;
  s.zeta = [amp](const Vec& x) { return v1(amp * std::sin(x[0])); };
  s.jacobian = [amp](const Vec& x) { return m11(amp * std::cos(x[0])); };
  return s;
}

ShiftMap zero_shift() {
  ShiftMap s;
  s.dim = 1;
  s.lip = 0.0;
  s.lambda = 1.0;
  s.zeta = [](const Vec&) { return v1(0.0); };
  s.jacobian = [](const Vec&) { return m11(0.0); };
  return s;
}

}  // namespace

TEST_CASE("pe1: constant coefficients and single atoms give exact zeros") {
  Rng rng(3);
  const ParticleMeasure mu = random_measure(rng, 4);
  auto sig_c = [](const Vec&) { return m11(1.1); };
  auto b_c = [](const Vec&) { return v1(-0.4); };
  const Pe1Report rc = verify_pe1(sig_c, b_c, mu, 0.6, 2);
  CHECK(rc.lhs_A == 0.0);
  CHECK(rc.lhs_B == 0.0);
  CHECK(rc.ratio_A == 0.0);  // zero-Lipschitz denominator maps to zero

  ParticleMeasure single(1);
  single.add(v1(0.3), 0.7);
  auto sig_v = [](const Vec& x) { return m11(std::sin(2.0 * x[0])); };
  auto b_v = [](const Vec& x) { return v1(std::cos(x[0])); };
  const Pe1Report rs = verify_pe1(sig_v, b_v, single, 0.6, 4);
  CHECK(rs.lhs_A == 0.0);
  CHECK(rs.lhs_B == 0.0);
}

TEST_CASE("pe1: exact expansion matches the quadrature of the pairings") {
  // The spec's pinned instance: mu = delta_0 + delta_1, sigma(x) = x, b = 0,
  // eps = 1, p = 2.
  ParticleMeasure mu(1);
  mu.add(v1(0.0), 1.0);
  mu.add(v1(1.0), 1.0);
  auto sig = [](const Vec& x) { return m11(x[0]); };
  auto b0 = [](const Vec&) { return v1(0.0); };
  const Pe1Report rep = verify_pe1(sig, b0, mu, 1.0, 2);
  const double quad = pe1_A_quadrature(sig, mu, 1.0, 2, 1e-10);
  CHECK(rep.lhs_A == doctest::Approx(quad).epsilon(1e-6));

  // And for p = 4 on the same instance.
  const Pe1Report rep4 = verify_pe1(sig, b0, mu, 1.0, 4);
  const double quad4 = pe1_A_quadrature(sig, mu, 1.0, 4, 1e-11);
  CHECK(rep4.lhs_A == doctest::Approx(quad4).epsilon(1e-6));
}

TEST_CASE("pe1 quadrature dual on a fixed random instance") {
  Rng rng(11);
  const ParticleMeasure mu = random_measure(rng, 3);
  auto sig = [](const Vec& x) { return m11(1.0 + 0.5 * std::sin(x[0])); };
  auto b0 = [](const Vec&) { return v1(0.0); };
  const double eps = 0.8;
  const Pe1Report rep = verify_pe1(sig, b0, mu, eps, 2);
  const double quad = pe1_A_quadrature(sig, mu, eps, 2, 1e-11);
  CHECK(rep.lhs_A == doctest::Approx(quad).epsilon(1e-6));
}

TEST_CASE("pe1 L-scaling: the ratio is exactly scale-free") {
  Rng rng(13);
  const ParticleMeasure mu = random_measure(rng, 4);
  auto b0 = [](const Vec&) { return v1(0.0); };
  const double eps = 0.5;
  double ratio1 = 0.0;
  for (double c : {1.0, 0.5, 0.25}) {
    auto sig = [c](const Vec& x) { return m11(c * std::sin(1.3 * x[0])); };
    const Pe1Report rep = verify_pe1(sig, b0, mu, eps, 2);
    CHECK(std::isfinite(rep.ratio_A));
    if (c == 1.0)
      ratio1 = rep.ratio_A;
    else
      CHECK(rep.ratio_A == doctest::Approx(ratio1).epsilon(1e-10));
  }
}

TEST_CASE("pe4 reports") {
  Rng rng(17);
  const ParticleMeasure mu = random_measure(rng, 3);

  // b = 0: both left-hand sides vanish.
  const Pe4Report r0 = verify_pe4([](const Vec& x) { return v1(std::sin(x[0])); },
                                  [](const Vec&) { return 0.0; }, mu, 0.7, 2);
  CHECK(r0.lhs_1 == 0.0);
  CHECK(r0.lhs_2 == 0.0);
  CHECK(r0.sharp_bound_ok);

  // Constant b and sigma: the (f,g) difference form vanishes exactly.
  const Pe4Report rc = verify_pe4([](const Vec&) { return v1(0.8); },
                                  [](const Vec&) { return 0.9; }, mu, 0.7, 2);
  CHECK(rc.lhs_2 == 0.0);
  CHECK(rc.sharp_bound_ok);

  // Random instance: the paper-sharp K^2 bound holds with reported slack.
  const Pe4Report rr = verify_pe4(
      [](const Vec& x) { return v1(1.0 + 0.4 * std::sin(x[0])); },
      [](const Vec& x) { return 0.7 * std::tanh(x[0]) + 0.1; }, mu, 0.5, 2);
  CHECK(rr.sharp_bound_ok);
  CHECK(rr.slack_1 >= 0.0);
  CHECK(std::isfinite(rr.ratio_2));
}

TEST_CASE("pe3 zero shift and dual-route agreement") {
  Rng rng(23);
  const ParticleMeasure mu = random_measure(rng, 3);

  const Pe3Report z = verify_pe3(zero_shift(), mu, 0.6, 2);
  CHECK(z.C_exact == 0.0);
  CHECK(z.C_quadrature == 0.0);

  // Constant shift: pure translation; both routes agree.
  ShiftMap cst;
  cst.dim = 1;
  cst.lip = 0.0;
  cst.lambda = 1.0;
  cst.zeta = [](const Vec&) { return v1(0.45); };
  cst.jacobian = [](const Vec&) { return m11(0.0); };
  const Pe3Report rc = verify_pe3(cst, mu, 0.6, 2, 1e-11);
  CHECK(rc.agreement <= 1e-6 * std::max(1.0, std::abs(rc.C_exact)));

  // Smooth shift, p = 2: the remark's two-term form equals C.
  const ShiftMap s = sine_shift(0.3);
  const Pe3Report rs = verify_pe3(s, mu, 0.5, 2, 1e-11);
  CHECK(rs.agreement <= 1e-6 * std::max(1.0, std::abs(rs.C_exact)));
  CHECK(rs.p2_identity == doctest::Approx(rs.C_quadrature).epsilon(1e-6));
  CHECK(std::isfinite(rs.bound_ratio));

  // p = 4 keeps the two routes consistent as well.
  const Pe3Report r4 = verify_pe3(s, mu, 0.5, 4, 1e-11);
  CHECK(r4.agreement <= 1e-6 * std::max(1.0, std::abs(r4.C_exact)));
}

TEST_CASE("7.6.2 jump-norm difference") {
  Rng rng(29);
  const ParticleMeasure mu = random_measure(rng, 3);

  const JumpNormReport z = verify_J_and_76(zero_shift(), mu, 0.6, 2);
  CHECK(z.D_exact == 0.0);
  CHECK(z.D_quadrature == 0.0);
  CHECK(z.J_pairing == 0.0);
  CHECK(z.convexity_ok);

  const ShiftMap s = sine_shift(0.3);
  const JumpNormReport r = verify_J_and_76(s, mu, 0.5, 2, 1e-11);
  CHECK(r.agreement <= 1e-6 * std::max(1.0, std::abs(r.D_exact)));
  CHECK(r.convexity_ok);
  CHECK(std::isfinite(r.ratio_D));

  // D scales linearly in the shift amplitude for small shifts.
  auto D_at = [&](double c) {
    ShiftMap sc = sine_shift(0.3);
    auto base = sc.zeta;
    sc.zeta = [base, c](const Vec& x) { return (c * base(x)).eval(); };
    sc.lip = 0.3 * c;
    return verify_J_and_76(sc, mu, 0.5, 2, 1e-11).D_exact;
  };
  const double d1 = D_at(1.0), dh = D_at(0.5), dq = D_at(0.25);
  CHECK(std::abs(dh / dq) == doctest::Approx(2.0).epsilon(0.35));
  CHECK(std::abs(d1 / dh) == doctest::Approx(2.0).epsilon(0.5));
}

TEST_CASE("verifier budget guard") {
  ParticleMeasure big(1);
  Rng rng(31);
  for (int i = 0; i < 80; ++i) big.add(v1(rng.uniform(-1.0, 1.0)), 1.0);
  auto sig = [](const Vec&) { return m11(1.0); };
  auto b0 = [](const Vec&) { return v1(0.0); };
  CHECK_THROWS_AS(verify_pe1(sig, b0, big, 0.5, 4), BudgetExceeded);
}
