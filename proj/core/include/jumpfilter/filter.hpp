#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "jumpfilter/measure.hpp"
#include "jumpfilter/path.hpp"

namespace jumpfilter {

/// Particle approximation of the unnormalized conditional distribution mu_t.
/// Log-weights are re-centred after every update so their maximum is zero;
/// the subtracted normalizer is accumulated in log_offset.
struct FilterState {
  double time{0};
  std::vector<Vec> particles;
  std::vector<double> log_weights;
  double log_offset{0};
  double eps_out{0.05};

  std::size_t count() const { return particles.size(); }
  /// 1/N sum_i exp(l_i + offset).
  double unnormalized_mass() const;
  double effective_sample_size() const;
  /// Weighted particle cloud as a measure (weights exp(l_i + offset)/N).
  ParticleMeasure measure() const;
  /// Weighted standard deviation of particle locations (largest axis).
  double spread() const;
};

struct FilterOptions {
  bool resample{false};           // systematic resampling at ESS < N/2
  std::uint64_t seed{0};          // base seed for particle streams
};

FilterState init_filter(const std::function<Vec(Rng&)>& pi0_sampler, int N,
                        double eps_out, std::uint64_t seed);

/// Advance the filter across the observation cells inside [t_begin, t_end].
/// Each particle consumes an independent Wiener stream and private N0
/// events; shared N1 jumps come from the observation record.
FilterState propagate(const FilterState& state, const CoefficientSet& coeffs,
                      const std::optional<JumpActivity>& act0,
                      const ObservationRecord& obs, double t_begin,
                      double t_end, const FilterOptions& opt);

/// mu_t(phi) = 1/N sum exp(l_i + offset) phi(X^i).
double unnormalized_estimate(const FilterState& state,
                             const std::function<double(const Vec&)>& phi);

/// P_t(phi) = mu_t(phi) / mu_t(1); P_t(1) == 1 exactly.
double normalized_estimate(const FilterState& state,
                           const std::function<double(const Vec&)>& phi);

/// Mollified density mu_t^(eps)(x), optionally normalized by mu_t(1).
double density_estimate(const FilterState& state, const Vec& x, bool normalized);

struct ZakaiResidualReport {
  int runs{0};
  double mean{0};
  double std_error{0};
  bool within_3se{false};
  std::vector<double> residuals;
};

struct ZakaiResidualConfig {
  double T{1.0};
  double dt{1e-3};
  int particles{512};
  Vec x0, y0;
  std::function<Vec(Rng&)> pi0_sampler;
};

/// Weak-form Zakai residual over independent simulations: the drift and
/// martingale sides of the rewritten Zakai equation must balance on average.
ZakaiResidualReport zakai_residual(const CoefficientSet& coeffs,
                                   const std::optional<JumpActivity>& act0,
                                   const std::optional<JumpActivity>& act1,
                                   const TestFunction& phi,
                                   const ZakaiResidualConfig& cfg, int n_runs,
                                   std::uint64_t seed, int threads = 1);

struct LpEvolutionReport {
  double direct_increment;   // ||mu_T^(eps)||_p^p - ||mu_0^(eps)||_p^p
  double ito_increment;      // accumulated Ito-formula terms
  double discrepancy;        // |direct - ito|
  double jump_contribution;  // event terms alone
};

/// Compares the realized increment of ||mu_t^(eps)||_p^p along one filter
/// run with the terms of the Ito formula for the smoothed measure, evaluated
/// on the discrete grid. Exact L_p sums keep the particle count small.
LpEvolutionReport lp_evolution_check(const CoefficientSet& coeffs,
                                     const std::optional<JumpActivity>& act0,
                                     const std::optional<JumpActivity>& act1,
                                     const ObservationRecord& obs,
                                     const FilterState& initial, int p,
                                     double eps, const FilterOptions& opt);

/// Systematic resampling helper (exposed for tests).
FilterState resample_systematic(const FilterState& state, std::uint64_t seed);

}  // namespace jumpfilter
