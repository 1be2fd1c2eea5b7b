#include "jumpfilter/kalman.hpp"

#include "jumpfilter/errors.hpp"

namespace jumpfilter {

KalmanBucy::Result KalmanBucy::run(const ObservationRecord& obs, double m0,
                                   double v0) const {
  if (obs.y.empty() || obs.y.front().size() != 1)
    throw ContractViolation("KalmanBucy: scalar observation required");
  Result r;
  r.times = obs.times;
  r.mean.resize(obs.times.size());
  r.var.resize(obs.times.size());
  double m = m0, P = v0;
  r.mean[0] = m;
  r.var[0] = P;
  for (std::size_t k = 0; k + 1 < obs.times.size(); ++k) {
    const double h = obs.times[k + 1] - obs.times[k];
    const double dy = obs.y[k + 1][0] - obs.y[k][0];
    const double innov = dy - (c0 + c1 * m) * h;
    m += (a0 + a1 * m) * h + P * c1 * innov;
    P += (2.0 * a1 * P + sigma * sigma - c1 * c1 * P * P) * h;
    r.mean[k + 1] = m;
    r.var[k + 1] = P;
  }
  return r;
}

}  // namespace jumpfilter
