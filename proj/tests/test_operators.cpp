#include <doctest.h>

#include <cmath>

#include "jumpfilter/errors.hpp"
#include "jumpfilter/models.hpp"
#include "jumpfilter/operators.hpp"

using namespace jumpfilter;

namespace {

Vec v1(double x) {
  Vec v(1);
  v << x;
  return v;
}

// d = 1 coefficient set with scalar constants.
CoefficientSet scalar_coeffs(double b, double B, double sigma, double rho) {
  CoefficientSet c;
  c.d = c.d1 = c.dprime = 1;
  c.b = [b](double, const Vec&, const Vec&) { return v1(b); };
  c.B = [B](double, const Vec&, const Vec&) { return v1(B); };
  c.sigma = [sigma](double, const Vec&, const Vec&) {
    Mat m(1, 1);
    m << sigma;
    return m;
  };
  c.rho = [rho](double, const Vec&, const Vec&) {
    Mat m(1, 1);
    m << rho;
    return m;
  };
  c.eta = [](double, const Vec&, const Vec&, const Vec&) { return v1(0.0); };
  c.xi = [](double, const Vec&, const Vec&, const Vec&) { return v1(0.0); };
  return c;
}

}  // namespace

TEST_CASE("apply_L") {
  const Vec y = v1(0.0);
  const TestFunction cst = TestFunction::constant(1, 3.2);
  const TestFunction quad = TestFunction::quadratic(1);

  auto c = scalar_coeffs(0.0, 0.0, std::sqrt(2.0), 0.0);
  CHECK(apply_L(c, 0.0, y, cst, v1(0.4)) == 0.0);
  // a = sigma^2/2 = 1, D^2(x^2) = 2.
  CHECK(apply_L(c, 0.0, y, quad, v1(0.4)) == doctest::Approx(2.0).epsilon(1e-14));

  // Linearity in phi.
  auto c2 = scalar_coeffs(0.3, 0.0, 1.1, 0.7);
  const TestFunction s = TestFunction::sine(v1(1.7), 0.2);
  const TestFunction sum = TestFunction::sum(quad, s);
  const Vec x = v1(-0.8);
  CHECK(apply_L(c2, 0.0, y, sum, x) ==
        doctest::Approx(apply_L(c2, 0.0, y, quad, x) + apply_L(c2, 0.0, y, s, x))
            .epsilon(1e-12));
}

TEST_CASE("apply_M") {
  const Vec y = v1(0.0);
  const TestFunction lin = TestFunction::coordinate(1, 0);

  auto c0 = scalar_coeffs(0.0, 0.0, 1.0, 0.0);
  CHECK(apply_M(c0, 0.0, y, 1, lin, v1(2.0)) == 0.0);

  auto cB = scalar_coeffs(0.0, 0.9, 1.0, 0.0);
  const TestFunction one = TestFunction::constant(1, 1.0);
  CHECK(apply_M(cB, 0.0, y, 1, one, v1(5.0)) == doctest::Approx(0.9));

  // rho = 2, B = 0.5, phi(x) = x at x = 3: 2*1 + 0.5*3 = 3.5.
  auto c = scalar_coeffs(0.0, 0.5, 1.0, 2.0);
  CHECK(apply_M(c, 0.0, y, 1, lin, v1(3.0)) == doctest::Approx(3.5).epsilon(1e-14));

  CHECK_THROWS_AS(apply_M(c, 0.0, y, 0, lin, v1(0.0)), ContractViolation);
  CHECK_THROWS_AS(apply_M(c, 0.0, y, 2, lin, v1(0.0)), ContractViolation);
}

TEST_CASE("apply_tilde_L") {
  const Vec y = v1(0.0);
  const TestFunction quad = TestFunction::quadratic(1);
  const TestFunction one = TestFunction::constant(1, 1.0);
  const Vec x = v1(0.7), xs = v1(-1.2);

  auto cB0 = scalar_coeffs(0.4, 0.0, 1.3, 0.6);
  CHECK(apply_tilde_L(cB0, 0.0, xs, y, quad, x) ==
        doctest::Approx(apply_L(cB0, 0.0, y, quad, x)).epsilon(1e-14));

  // phi = 1: tilde-L 1 = beta^k B^k, the total-mass drift integrand.
  auto cB = scalar_coeffs(0.4, 0.8, 1.3, 0.0);
  CHECK(apply_tilde_L(cB, 0.0, xs, y, one, x) ==
        doctest::Approx(0.8 * 0.8).epsilon(1e-14));

  // Additivity of the two summands.
  auto c = scalar_coeffs(0.4, 0.8, 1.3, 0.6);
  const double whole = apply_tilde_L(c, 0.0, xs, y, quad, x);
  const double parts =
      apply_L(c, 0.0, y, quad, x) +
      c.B(0.0, xs, y)[0] * apply_M(c, 0.0, y, 1, quad, x);
  CHECK(whole == doctest::Approx(parts).epsilon(1e-12));
}

TEST_CASE("shift operators T, I, J") {
  const TestFunction quad = TestFunction::quadratic(1);
  const TestFunction lin = TestFunction::coordinate(1, 0);

  auto zero = [](const Vec& x) { return Vec::Zero(x.size()).eval(); };
  CHECK(apply_I(zero, quad, v1(0.3)) == 0.0);
  CHECK(apply_J(zero, quad, v1(0.3)) == 0.0);
  CHECK(apply_T(zero, quad, v1(0.3)) == doctest::Approx(0.09));

  // Linear phi: the second-order remainder vanishes (a few ulps of rounding
  // from phi(x + zeta) - phi(x)).
  auto wave = [](const Vec& x) { return v1(0.5 * std::sin(x[0])); };
  CHECK(std::abs(apply_J(wave, lin, v1(0.9))) <= 1e-15);
  CHECK(apply_J(wave, lin, v1(0.0)) == 0.0);

  // zeta = 1, phi = x^2 at x = 0: T = 1, I = 1, J = 1.
  auto unit = [](const Vec&) { return v1(1.0); };
  CHECK(apply_T(unit, quad, v1(0.0)) == doctest::Approx(1.0));
  CHECK(apply_I(unit, quad, v1(0.0)) == doctest::Approx(1.0));
  CHECK(apply_J(unit, quad, v1(0.0)) == doctest::Approx(1.0));
}

TEST_CASE("J equals I minus gradient term identically") {
  auto zeta = [](const Vec& x) { return v1(0.4 * std::cos(x[0])); };
  const TestFunction phi = TestFunction::gaussian(v1(0.3), 0.7);
  for (double xv : {-1.2, -0.3, 0.0, 0.8, 2.1}) {
    const Vec x = v1(xv);
    const double lhs = apply_J(zeta, phi, x);
    const double rhs = apply_I(zeta, phi, x) - zeta(x).dot(phi.gradient(x));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("assumption checks on registry models") {
  AssumptionCheckOptions opt;
  opt.samples = 2000;
  Vec mark = v1(0.4);
  opt.marks1 = {mark, v1(-0.4)};

  const ModelSpec lin = make_model("clipped-linear-1d");
  const AssumptionReport ra = check_assumptions(lin.coeffs, opt);
  CHECK(ra.ok);
  CHECK(ra.max_B <= lin.coeffs.K + 1e-12);

  const ModelSpec js = make_model("jump-shared-1d");
  const AssumptionReport rb = check_assumptions(js.coeffs, opt);
  CHECK(rb.ok);
  CHECK(rb.min_pc2_ratio >= 1.0 - 1e-9);

  // A set violating |B| <= K must be flagged.
  CoefficientSet bad = js.coeffs;
  bad.B = [](double, const Vec& x, const Vec&) { return v1(x[0]); };
  bad.K = 0.5;
  const AssumptionReport rc = check_assumptions(bad, opt);
  CHECK_FALSE(rc.ok);
}

TEST_CASE("jump activity moment check") {
  const ModelSpec js = make_model("jump-shared-1d");
  REQUIRE(js.act1.has_value());
  const auto mc = js.act1->check_moments(99);
  CHECK(mc.ok);
  CHECK(mc.rel_error <= 0.05);
  // Mean mark from quadrature nodes is exactly zero for the two-point law.
  CHECK(js.act1->mean_mark().norm() == 0.0);
}
