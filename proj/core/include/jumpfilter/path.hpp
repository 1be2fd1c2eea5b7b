#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "jumpfilter/coefficients.hpp"
#include "jumpfilter/rng.hpp"

namespace jumpfilter {

/// Finite-activity jump source: total rate and the normalized mark law.
/// mark_quadrature, when provided, is a list of (mark, probability) nodes
/// that represents the normalized law exactly (discrete laws) or as a fixed
/// quadrature (continuous laws); integrals against nu use these nodes.
struct JumpActivity {
  double rate{0};
  int mark_dim{1};
  std::function<Vec(Rng&)> sample_mark;
  double second_moment{0};                 // declared int |z|^2 nu(dz)
  std::optional<double> r_moment;          // declared int |z|^r nu(dz)
  double r_order{2};
  std::vector<std::pair<Vec, double>> mark_quadrature;

  /// Mean of the normalized mark law: exact from quadrature nodes when
  /// present, otherwise estimated once from 1e5 sampled marks with a fixed
  /// derived seed (cached by callers).
  Vec mean_mark(std::uint64_t seed = 0x6d61726bULL) const;

  struct MomentCheck {
    double empirical_second_moment;
    double declared_second_moment;
    double rel_error;
    bool ok;  // within 5%
  };
  MomentCheck check_moments(std::uint64_t seed, int samples = 100000) const;
};

struct JumpEvent {
  double time;
  Vec mark;
};

/// One realization of the driving noise (W, V, N0, N1) on a jump-adapted
/// grid: the union of the uniform mesh and all event times.
struct PathBundle {
  std::vector<double> grid;        // strictly increasing, grid[0]=0, back()=T
  std::vector<Vec> dW, dV;         // per cell, variance (t_{k+1}-t_k) I
  std::vector<JumpEvent> n0_events, n1_events;  // sorted by time
  std::optional<JumpActivity> act0, act1;
  Vec mean_mark0, mean_mark1;      // cached compensator means (zero if absent)

  std::size_t cells() const { return grid.size() - 1; }
};

/// The simulated signal/observation pair on the bundle grid. Rows are
/// post-jump states; events happen at their grid time.
struct SystemPath {
  std::vector<double> times;
  std::vector<Vec> X, Y;
  PathBundle bundle;
};

/// Observation data available to the filter: Y samples plus the revealed
/// N1 atoms (Y's jumps are exactly the N1 marks).
struct ObservationRecord {
  std::vector<double> times;
  std::vector<Vec> y;
  std::vector<JumpEvent> jumps;
  double rate1{0};
  Vec nu1_mean;  // int z nu_1(dz) = rate1 * mean mark (zero vector if none)

  /// Marks attached to the cell ending at times[k+1] (empty for most cells).
  std::vector<const JumpEvent*> jumps_in_cell(std::size_t k) const;
  /// Innovation increment over cell k: continuous part of dY plus the jump
  /// compensator drift, i.e. dY - sum(marks) + nu1_mean dt.
  Vec innovation_increment(std::size_t k) const;
};

ObservationRecord observation_record(const SystemPath& path);

}  // namespace jumpfilter
