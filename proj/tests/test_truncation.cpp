#include <doctest.h>

#include <cmath>

#include "jumpfilter/rng.hpp"
#include "jumpfilter/truncation.hpp"

using namespace jumpfilter;

namespace {

Vec v1(double x) {
  Vec v(1);
  v << x;
  return v;
}

}  // namespace

TEST_CASE("smooth cutoff chi") {
  CHECK(smooth_cutoff_chi(0.0) == 1.0);
  CHECK(smooth_cutoff_chi(1.0) == 1.0);
  CHECK(smooth_cutoff_chi(-1.0) == 1.0);
  CHECK(smooth_cutoff_chi(2.0) == 0.0);
  CHECK(smooth_cutoff_chi(-3.5) == 0.0);
  CHECK(smooth_cutoff_chi(1.5) > 0.0);
  CHECK(smooth_cutoff_chi(1.5) < 1.0);

  // chi' stays in [-2, 2]; the extreme value sits at the midpoints.
  Rng rng(3);
  double worst = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const double r = rng.uniform(-2.5, 2.5);
    const double dp = smooth_cutoff_chi_prime(r);
    worst = std::max(worst, std::abs(dp));
    // cross-check against finite differences
    const double h = 1e-6;
    const double fd = (smooth_cutoff_chi(r + h) - smooth_cutoff_chi(r - h)) / (2.0 * h);
    CHECK(dp == doctest::Approx(fd).epsilon(1e-4));
  }
  CHECK(worst <= 2.0 + 1e-9);
  CHECK(std::abs(smooth_cutoff_chi_prime(1.5)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("truncate_chi support and identity zones") {
  auto f = [](const Vec& z) { return (3.0 * z).eval(); };
  const double n = 1.5;
  auto fn = truncate_chi(f, n);
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const Vec z = v1(rng.uniform(-4.5, 4.5));
    const double a = std::abs(z[0]);
    if (a <= n) CHECK((fn(z) - f(z)).norm() == 0.0);
    if (a >= 2.0 * n) CHECK(fn(z).norm() == 0.0);
  }
}

TEST_CASE("truncated Lipschitz constant bound") {
  // b(z) = b0 + L z (Lipschitz L); b_n must stay (5L + 2|b(0)|)-Lipschitz.
  const double L = 0.8, b0 = 0.6, n = 2.0;
  auto b = [L, b0](const Vec& z) { return v1(b0 + L * z[0]); };
  auto bn = truncate_chi(b, n);
  Rng rng(7);
  double worst = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const Vec z1 = v1(rng.uniform(-5.0, 5.0));
    const Vec z2 = v1(z1[0] + rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-3.0, 0.5)));
    const double dz = (z1 - z2).norm();
    if (dz < 1e-12) continue;
    worst = std::max(worst, (bn(z1) - bn(z2)).norm() / dz);
  }
  CHECK(worst <= 5.0 * L + 2.0 * b0 + 1e-9);
}

TEST_CASE("kappa plateau and support") {
  const double R = 1.5, eps = 0.5;
  const double outer = (R + 1.0) * std::exp(1.0 / eps) + 1.0;
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Vec x = v1(rng.uniform(-R, R));
    CHECK(kappa_R_eps(x, R, eps) == 1.0);
  }
  for (int i = 0; i < 200; ++i) {
    const double sgn = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const Vec x = v1(sgn * rng.uniform(outer, outer + 10.0));
    CHECK(kappa_R_eps(x, R, eps) == 0.0);
  }
  // Middle zone is strictly between.
  const double mid = kappa_R_eps(v1(0.5 * (R + outer)), R, eps);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
}

TEST_CASE("kappa Lipschitz bound") {
  const double R = 1.5, eps = 0.5;
  const double rbar = (R + 1.0) * std::exp(1.0 / eps) + 1.0;
  Rng rng(13);
  for (int i = 0; i < 3000; ++i) {
    Vec x = v1(rng.uniform(-rbar - 2.0, rbar + 2.0));
    Vec y = v1(x[0] + rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-2.0, 1.0)));
    if (std::abs(y[0]) > std::abs(x[0])) std::swap(x, y);
    const double lhs = std::abs(kappa_R_eps(x, R, eps) - kappa_R_eps(y, R, eps));
    const double bound = eps * std::abs(x[0] - y[0]) / std::max(R, std::abs(y[0]) - 1.0);
    CHECK(lhs <= bound * (1.0 + 1e-9) + 1e-12);
  }
}

TEST_CASE("kappa in two dimensions") {
  const double R = 1.0, eps = 0.5;
  Vec x(2);
  x << 0.4, -0.3;
  CHECK(kappa_R_eps(x, R, eps) == 1.0);
  x << 50.0, 50.0;
  CHECK(kappa_R_eps(x, R, eps) == 0.0);
}

TEST_CASE("bilipschitz truncation") {
  // Zero shift: truncation is still zero.
  ShiftMap zero;
  zero.dim = 1;
  zero.lip = 0.0;
  zero.lambda = 1.0;
  zero.zeta = [](const Vec& x) { return Vec::Zero(x.size()).eval(); };
  const BiLipTruncation z = bilipschitz_truncate(zero, 1.0, 2.0, 17, 500);
  CHECK(z.map.zeta(v1(0.3)).norm() == 0.0);
  CHECK(z.map.zeta(v1(1e6)).norm() == 0.0);

  // Constant shift: equals c on |x| <= R, vanishes beyond the support.
  ShiftMap cst;
  cst.dim = 1;
  cst.lip = 0.0;
  cst.lambda = 1.0;
  cst.zeta = [](const Vec&) { return v1(0.7); };
  const BiLipTruncation tc = bilipschitz_truncate(cst, 1.0, 2.0, 19, 500);
  CHECK(tc.map.zeta(v1(0.5))[0] == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(tc.map.zeta(v1(tc.support_radius + 1.0)).norm() == 0.0);

  // Linear shift with L = 1.4, M = 2: sampled constants stay within M.
  ShiftMap lin;
  lin.dim = 1;
  lin.lip = 0.4;
  lin.lambda = 1.0;
  lin.zeta = [](const Vec& x) { return (0.4 * x).eval(); };
  lin.jacobian = [](const Vec&) {
    Mat m(1, 1);
    m << 0.4;
    return m;
  };
  const BiLipTruncation tl = bilipschitz_truncate(lin, 1.0, 2.0, 23, 3000);
  CHECK(tl.sampled_bilip <= 2.0);
  CHECK(tl.support_radius > 1.0);
  CHECK(tl.map.zeta(v1(tl.support_radius + 0.5)).norm() == 0.0);
  // Inside the plateau the shift is untouched.
  CHECK(tl.map.zeta(v1(0.9))[0] == doctest::Approx(0.36).epsilon(1e-14));
}
