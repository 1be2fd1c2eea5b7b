#pragma once

#include <functional>

#include "jumpfilter/measure.hpp"
#include "jumpfilter/shift.hpp"

namespace jumpfilter {

// Numerical verifiers for the mollified L_p estimates. Left-hand sides are
// computed by the exact expansion of the defining pairings into sums over
// p-tuples of atoms against rho_eps and its derivative factors; the
// expansions are written in difference form so that constant coefficients
// and single-atom measures produce exact zeros. Quadrature duals are
// provided where the spec pins a cross-check.

struct Pe1Report {
  double lhs_A;            // second-order pairing of the lemma
  double lhs_B;            // first-order (drift) pairing
  double majorant_A;       // triangle-inequality majorant of A
  double majorant_B;
  double rhs_scale;        // || |mu|^(eps) ||_p^p
  double lipschitz;        // sampled over atom pairs
  double ratio_A;          // lhs_A / (L^2 rhs), 0 when L^2 rhs vanishes
  double ratio_B;
  double ratio_A_majorant;
  double ratio_B_majorant;
  // Majorant ratios against the coarsened-kernel norm || |mu|^(2eps) ||_p^p,
  // the form the proofs dominate through; these are the eps-stable ones.
  double ratio_A_majorant_coarse;
  double ratio_B_majorant_coarse;
};

Pe1Report verify_pe1(const std::function<Mat(const Vec&)>& sigma_fn,
                     const std::function<Vec(const Vec&)>& b_fn,
                     const ParticleMeasure& mu, double eps, int p);

/// Quadrature dual of the pe1 A-pairing for d = 1 (oracle for tests).
double pe1_A_quadrature(const std::function<Mat(const Vec&)>& sigma_fn,
                        const ParticleMeasure& mu, double eps, int p,
                        double tol);

struct Pe4Report {
  double lhs_1;       // ((mu^eps)^{p-2}(b mu)^eps, (b mu)^eps)
  double rhs_1;       // K^2 || |mu|^eps ||_p^p with K = max |b| over atoms
  bool sharp_bound_ok;  // lhs_1 <= rhs_1 (paper-sharp constant K^2)
  double slack_1;
  double lhs_2;       // mixed first-order pairing, difference form
  double majorant_2;
  double rhs_scale;
  double K;           // max |b| over atoms
  double lipschitz;   // sampled Lipschitz constant of sigma and b*sigma
  double ratio_2;
  double ratio_2_majorant;
  double ratio_2_majorant_coarse;  // against || |mu|^(2eps) ||_p^p
};

Pe4Report verify_pe4(const std::function<Vec(const Vec&)>& sigma_fn,
                     const std::function<double(const Vec&)>& b_fn,
                     const ParticleMeasure& mu, double eps, int p);

struct Pe3Report {
  double C_exact;        // tuple-sum route through rho
  double C_majorant;     // tuple-sum of |bracket| (positive, eps-monotone)
  double C_quadrature;   // four-term integrand route
  double agreement;      // |exact - quadrature|
  double p2_identity;    // p = 2 only: the remark's two-term form (else 0)
  double rhs_scale;
  double lipschitz;
  double bound_ratio;    // |C| / ((1+L^2) L^2 rhs)
  double bound_ratio_majorant;
  // Against || |mu|^(2 kappa eps) ||_p^p with kappa = lambda^{-2} from (pc2).
  double bound_ratio_majorant_coarse;
};

Pe3Report verify_pe3(const ShiftMap& shift, const ParticleMeasure& mu,
                     double eps, int p, double quad_tol = 1e-9);

struct JumpNormReport {
  double J_pairing;        // ((mu^eps)^{p-1}, (J^{xi*}mu)^eps) by quadrature
  double D_exact;          // ||(T^{xi*}mu)^eps||_p^p - ||mu^eps||_p^p, tuple route
  double D_majorant;       // tuple-sum of |rho(tau y) - rho(y)|
  double D_quadrature;
  double agreement;
  double convexity_min;    // min over grid of the corollary's convex expression
  bool convexity_ok;
  double rhs_scale;
  double lipschitz;
  double ratio_D;          // |D| / ((1+L) L rhs)
  double ratio_D_majorant;
  double ratio_D_majorant_coarse;  // against || |mu|^(2 kappa eps) ||_p^p
};

JumpNormReport verify_J_and_76(const ShiftMap& shift, const ParticleMeasure& mu,
                               double eps, int p, double quad_tol = 1e-9);

}  // namespace jumpfilter
