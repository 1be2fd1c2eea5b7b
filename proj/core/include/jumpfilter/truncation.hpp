#pragma once

#include <cstdint>
#include <functional>

#include "jumpfilter/shift.hpp"

namespace jumpfilter {

/// Smooth cutoff: chi(r) = 1 on [-1,1], 0 for |r| >= 2, built from the
/// smoothstep of exp(-1/t); chi' stays within [-2, 2].
double smooth_cutoff_chi(double r);
double smooth_cutoff_chi_prime(double r);

/// z -> chi(|z|/n) f(z); equals f for |z| <= n, vanishes for |z| >= 2n.
std::function<Vec(const Vec&)> truncate_chi(std::function<Vec(const Vec&)> f,
                                            double n);
std::function<double(const Vec&)> truncate_chi_scalar(
    std::function<double(const Vec&)> f, double n);

/// Normalized bump exp(-1/(1-|x|^2)) on the unit ball (unnormalized value).
double bump_kernel(const Vec& x);

/// Iterate the fixed tensor Gauss-Legendre rule over [-1,1]^d, calling
/// visit(u, w) with w = quadrature weight times bump value; points outside
/// the unit ball are skipped. Normalizing by the total visited weight makes
/// discrete convolutions of the constant 1 exactly 1.
void bump_ball_quadrature(int d, const std::function<void(const Vec&, double)>& visit,
                          int order = 32);

/// Mollified cutoff kappa^R_eps = (phi^R_eps * k)(x): exactly 1 for
/// |x| <= R and exactly 0 for |x| >= (R+1) e^{1/eps} + 1.
double kappa_R_eps(const Vec& x, double R, double eps_cut);

/// Piecewise-log plateau function before mollification.
double kappa_plateau(double r, double R, double eps_cut);

struct BiLipTruncation {
  ShiftMap map;            // zeta^R = kappa^R_eps * zeta
  double eps_cut;          // selected by bisection
  double support_radius;   // zeta^R vanishes for |x| >= this
  double sampled_bilip;    // worst sampled biLipschitz constant of x + theta zeta^R
};

/// Truncate a shift so that x + theta zeta^R(x) stays M-biLipschitz (sampled
/// over random pairs and theta in {0, .25, .5, .75, 1}) while zeta^R keeps
/// compact support. eps_cut is found by bisection; failure after 60 steps
/// raises NumericalFailure.
BiLipTruncation bilipschitz_truncate(const ShiftMap& shift, double R, double M,
                                     std::uint64_t seed = 2024,
                                     int pairs = 2000);

}  // namespace jumpfilter
