#include "jumpfilter/coefficients.hpp"

#include <cmath>

#include "jumpfilter/errors.hpp"

namespace jumpfilter {

Mat CoefficientSet::diffusion_a(double t, const Vec& x, const Vec& y) const {
  const Mat s = sigma(t, x, y);
  const Mat r = rho(t, x, y);
  return 0.5 * (s * s.transpose() + r * r.transpose());
}

namespace {

double frob(const Mat& m) { return m.norm(); }

}  // namespace

AssumptionReport check_assumptions(const CoefficientSet& c,
                                   const AssumptionCheckOptions& opt) {
  AssumptionReport rep;
  Rng rng(opt.seed);
  auto sample_point = [&](Vec& x, Vec& y) {
    x = Vec::NullaryExpr(c.d, [&](Eigen::Index) {
      return rng.uniform(-opt.box_radius, opt.box_radius);
    });
    y = Vec::NullaryExpr(c.dprime, [&](Eigen::Index) {
      return rng.uniform(-opt.box_radius, opt.box_radius);
    });
  };
  auto note = [&](const std::string& msg) {
    rep.ok = false;
    if (rep.violations.size() < 16) rep.violations.push_back(msg);
  };

  const double tiny = 1e-12;
  for (int n = 0; n < opt.samples; ++n) {
    const double t = rng.uniform(0.0, opt.time_horizon);
    Vec x1, y1, x2, y2;
    sample_point(x1, y1);
    sample_point(x2, y2);
    const double z1 = std::sqrt(x1.squaredNorm() + y1.squaredNorm());
    Vec dz(c.d + c.dprime);
    dz << (x1 - x2), (y1 - y2);
    const double dznorm = dz.norm();

    // Growth: |b| + |sigma| + |rho| <= K0 + K1 |z|, |B| <= K.
    const double growth = c.b(t, x1, y1).norm() + frob(c.sigma(t, x1, y1)) +
                          frob(c.rho(t, x1, y1));
    const double cap = c.K0 + c.K1 * z1;
    rep.max_growth_ratio = std::max(rep.max_growth_ratio, growth / std::max(cap, tiny));
    if (growth > cap * (1.0 + 1e-9) + tiny) note("growth bound violated for b/sigma/rho");

    const double bnorm = c.B(t, x1, y1).norm();
    rep.max_B = std::max(rep.max_B, bnorm);
    if (bnorm > c.K * (1.0 + 1e-9) + tiny) note("|B| exceeds K");

    if (dznorm > tiny) {
      const double lip =
          (c.b(t, x1, y1) - c.b(t, x2, y2)).norm() +
          (c.B(t, x1, y1) - c.B(t, x2, y2)).norm() +
          frob(c.sigma(t, x1, y1) - c.sigma(t, x2, y2)) +
          frob(c.rho(t, x1, y1) - c.rho(t, x2, y2));
      rep.max_lipschitz_ratio = std::max(rep.max_lipschitz_ratio, lip / dznorm);
      if (lip > c.L * dznorm * (1.0 + 1e-9) + tiny) note("Lipschitz bound violated for b/B/sigma/rho");

      // rho B Lipschitz in x, uniformly in (t, y).
      const Vec rb1 = c.rho(t, x1, y1) * c.B(t, x1, y1);
      const Vec rb2 = c.rho(t, x2, y1) * c.B(t, x2, y1);
      const double dx = (x1 - x2).norm();
      if (dx > tiny) {
        const double r = (rb1 - rb2).norm() / dx;
        rep.max_rhoB_lipschitz = std::max(rep.max_rhoB_lipschitz, r);
        if (r > c.L * (1.0 + 1e-9)) note("rho*B Lipschitz bound violated");
      }
    }

    // Jump coefficients against their envelopes, plus the (pc2) condition.
    auto check_jump = [&](const std::function<Vec(double, const Vec&, const Vec&, const Vec&)>& f,
                          const std::function<double(const Vec&)>& envelope,
                          double env_cap, const std::vector<Vec>& marks,
                          double& growth_ratio, double& lip_ratio, const char* name) {
      if (!f || marks.empty()) return;
      for (const Vec& mark : marks) {
        const double env = envelope ? envelope(mark) : env_cap;
        if (env > env_cap * (1.0 + 1e-9) + tiny) note(std::string(name) + " envelope exceeds its bound");
        const Vec v1 = f(t, x1, y1, mark);
        growth_ratio = std::max(growth_ratio, v1.norm() / std::max(env * cap, tiny));
        if (v1.norm() > env * cap * (1.0 + 1e-9) + tiny)
          note(std::string(name) + " growth bound violated");
        if (dznorm > tiny) {
          const Vec v2 = f(t, x2, y2, mark);
          lip_ratio = std::max(lip_ratio, (v1 - v2).norm() / (env * dznorm + tiny));
          if ((v1 - v2).norm() > env * dznorm * (1.0 + 1e-9) + tiny)
            note(std::string(name) + " Lipschitz bound violated");
        }
        // (pc2): lambda |x1-x2| <= |x1-x2+theta(f(x1)-f(x2))| in x only.
        const double dx = (x1 - x2).norm();
        if (dx > tiny) {
          for (double theta : {0.25, 0.5, 0.75, 1.0}) {
            const Vec lhs = (x1 - x2) + theta * (f(t, x1, y1, mark) - f(t, x2, y1, mark));
            const double ratio = lhs.norm() / (c.lambda * dx);
            rep.min_pc2_ratio = std::min(rep.min_pc2_ratio, ratio);
            if (ratio < 1.0 - 1e-9) note(std::string(name) + " (pc2) condition violated");
          }
        }
      }
    };
    check_jump(c.eta, c.eta_bar, c.K_eta, opt.marks0, rep.max_eta_ratio,
               rep.max_eta_lipschitz, "eta");
    check_jump(c.xi, c.xi_bar, c.K_xi, opt.marks1, rep.max_xi_ratio,
               rep.max_xi_lipschitz, "xi");
  }
  return rep;
}

}  // namespace jumpfilter
