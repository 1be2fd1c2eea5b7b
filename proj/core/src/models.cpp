#include "jumpfilter/models.hpp"

#include <cmath>
#include <set>

#include "jumpfilter/errors.hpp"

namespace jumpfilter {

namespace {

double get(const std::map<std::string, double>& params, const std::string& key,
           double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::map<std::string, double>& params,
                    const std::set<std::string>& known, const std::string& id) {
  for (const auto& [k, v] : params)
    if (!known.count(k))
      throw ConfigError("model '" + id + "': unknown parameter '" + k + "'");
}

std::function<Vec(Rng&)> gaussian_sampler(const Vec& mean, double std) {
  return [mean, std](Rng& rng) {
    Vec x = mean;
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += std * rng.normal();
    return x;
  };
}

/// Two-point mark law at +-h (componentwise on axis 0), mean zero.
JumpActivity two_point_marks(double rate, double h, int mark_dim) {
  JumpActivity act;
  act.rate = rate;
  act.mark_dim = mark_dim;
  act.sample_mark = [h, mark_dim](Rng& rng) {
    Vec z = Vec::Zero(mark_dim);
    z[0] = rng.uniform() < 0.5 ? -h : h;
    return z;
  };
  act.second_moment = rate * h * h;
  act.r_moment = rate * h * h * h * h;
  act.r_order = 4;
  Vec zp = Vec::Zero(mark_dim), zm = Vec::Zero(mark_dim);
  zp[0] = h;
  zm[0] = -h;
  act.mark_quadrature = {{zm, 0.5}, {zp, 0.5}};
  return act;
}

CoefficientSet zero_coefficients(int d, int d1, int dprime) {
  CoefficientSet c;
  c.d = d;
  c.d1 = d1;
  c.dprime = dprime;
  c.b = [d](double, const Vec&, const Vec&) { return Vec::Zero(d).eval(); };
  c.B = [dprime](double, const Vec&, const Vec&) { return Vec::Zero(dprime).eval(); };
  c.sigma = [d, d1](double, const Vec&, const Vec&) { return Mat::Zero(d, d1).eval(); };
  c.rho = [d, dprime](double, const Vec&, const Vec&) { return Mat::Zero(d, dprime).eval(); };
  c.eta = [d](double, const Vec&, const Vec&, const Vec&) { return Vec::Zero(d).eval(); };
  c.xi = [d](double, const Vec&, const Vec&, const Vec&) { return Vec::Zero(d).eval(); };
  c.xi_jacobian_x = [d](double, const Vec&, const Vec&, const Vec&) {
    return Mat::Zero(d, d).eval();
  };
  c.eta_jacobian_x = [d](double, const Vec&, const Vec&, const Vec&) {
    return Mat::Zero(d, d).eval();
  };
  c.xi_bar = [](const Vec&) { return 0.0; };
  c.eta_bar = [](const Vec&) { return 0.0; };
  return c;
}

ModelSpec trivial_constants(const std::map<std::string, double>& params) {
  reject_unknown(params, {"pi0_std"}, "trivial-constants");
  ModelSpec m;
  m.id = "trivial-constants";
  m.coeffs = zero_coefficients(1, 1, 1);
  m.coeffs.K0 = 0;
  m.coeffs.K1 = 0;
  m.coeffs.K = 0;
  m.coeffs.L = 0;
  m.coeffs.lambda = 1;
  m.x0_mean = Vec::Zero(1);
  m.pi0_std = get(params, "pi0_std", 1.0);
  m.y0 = Vec::Zero(1);
  m.pi0_sampler = gaussian_sampler(m.x0_mean, m.pi0_std);
  return m;
}

ModelSpec clipped_linear_1d(const std::map<std::string, double>& params) {
  reject_unknown(params, {"a1", "sigma", "c1", "clip", "pi0_std", "pi0_mean"},
                 "clipped-linear-1d");
  const double a1 = get(params, "a1", -0.5);
  const double sig = get(params, "sigma", 1.0);
  const double c1 = get(params, "c1", 1.0);
  const double clip = get(params, "clip", 8.0);
  ModelSpec m;
  m.id = "clipped-linear-1d";
  m.coeffs = zero_coefficients(1, 1, 1);
  m.coeffs.b = [a1](double, const Vec& x, const Vec&) { return (a1 * x).eval(); };
  m.coeffs.sigma = [sig](double, const Vec&, const Vec&) {
    Mat s(1, 1);
    s << sig;
    return s;
  };
  m.coeffs.B = [c1, clip](double, const Vec& x, const Vec&) {
    Vec v(1);
    v << std::clamp(c1 * x[0], -clip, clip);
    return v;
  };
  m.coeffs.K0 = sig + 1.0;
  m.coeffs.K1 = std::abs(a1);
  m.coeffs.K = clip;
  m.coeffs.L = std::abs(a1) + std::abs(c1);
  m.coeffs.lambda = 1.0;
  m.x0_mean = Vec::Zero(1);
  m.x0_mean[0] = get(params, "pi0_mean", 0.0);
  m.pi0_std = get(params, "pi0_std", 1.0);
  m.y0 = Vec::Zero(1);
  m.pi0_sampler = gaussian_sampler(m.x0_mean, m.pi0_std);
  m.kalman_applicable = true;
  m.lin_a1 = a1;
  m.lin_sigma = sig;
  m.lin_c1 = c1;
  return m;
}

ModelSpec jump_shared_1d(const std::map<std::string, double>& params) {
  reject_unknown(params,
                 {"b1", "sigma", "B_scale", "B_slope", "rate", "mark", "g",
                  "alpha", "pi0_std", "pi0_mean"},
                 "jump-shared-1d");
  const double b1 = get(params, "b1", -0.5);
  const double sig = get(params, "sigma", 0.5);
  const double Bs = get(params, "B_scale", 0.8);
  const double Bsl = get(params, "B_slope", 1.0);
  const double rate = get(params, "rate", 2.0);
  const double mark = get(params, "mark", 0.4);
  const double g = get(params, "g", 0.5);
  const double alpha = get(params, "alpha", 0.0);

  ModelSpec m;
  m.id = "jump-shared-1d";
  m.coeffs = zero_coefficients(1, 1, 1);
  m.coeffs.b = [b1](double, const Vec& x, const Vec&) { return (b1 * x).eval(); };
  m.coeffs.sigma = [sig](double, const Vec&, const Vec&) {
    Mat s(1, 1);
    s << sig;
    return s;
  };
  m.coeffs.B = [Bs, Bsl](double, const Vec& x, const Vec&) {
    Vec v(1);
    v << Bs * std::tanh(Bsl * x[0]);
    return v;
  };
  // xi(t, z, mark) = g * mark * (1 + alpha sin x); shared jump observed in Y.
  m.coeffs.xi = [g, alpha](double, const Vec& x, const Vec&, const Vec& mk) {
    Vec v(1);
    v << g * mk[0] * (1.0 + alpha * std::sin(x[0]));
    return v;
  };
  m.coeffs.xi_jacobian_x = [g, alpha](double, const Vec& x, const Vec&, const Vec& mk) {
    Mat j(1, 1);
    j << g * mk[0] * alpha * std::cos(x[0]);
    return j;
  };
  m.coeffs.K0 = sig + std::abs(b1) + 1.0;
  m.coeffs.K1 = std::abs(b1);
  m.coeffs.K = Bs;
  m.coeffs.L = std::abs(b1) + Bs * Bsl;
  const double lip_xi = std::abs(g) * mark * std::abs(alpha);
  m.coeffs.lambda = std::max(1.0 - lip_xi, 0.1);
  m.coeffs.xi_bar = [g, alpha](const Vec& mk) {
    return std::abs(g) * std::abs(mk[0]) * (1.0 + std::abs(alpha));
  };
  m.coeffs.K_xi = std::abs(g) * mark * (1.0 + std::abs(alpha));
  m.act1 = two_point_marks(rate, mark, 1);
  m.x0_mean = Vec::Zero(1);
  m.x0_mean[0] = get(params, "pi0_mean", 0.0);
  m.pi0_std = get(params, "pi0_std", 0.5);
  m.y0 = Vec::Zero(1);
  m.pi0_sampler = gaussian_sampler(m.x0_mean, m.pi0_std);
  return m;
}

ModelSpec pure_jump_2d(const std::map<std::string, double>& params) {
  reject_unknown(params,
                 {"rate0", "rate1", "mark0", "mark1", "g1", "g2", "h1", "h2",
                  "B_scale", "pi0_std"},
                 "pure-jump-2d");
  const double rate0 = get(params, "rate0", 1.5);
  const double rate1 = get(params, "rate1", 2.0);
  const double mark0 = get(params, "mark0", 1.0);
  const double mark1 = get(params, "mark1", 0.35);
  const double g1 = get(params, "g1", 0.4);
  const double g2 = get(params, "g2", 0.1);
  const double h1 = get(params, "h1", 0.3);
  const double h2 = get(params, "h2", -0.2);
  const double Bs = get(params, "B_scale", 0.5);

  ModelSpec m;
  m.id = "pure-jump-2d";
  m.coeffs = zero_coefficients(2, 1, 1);
  m.coeffs.B = [Bs](double, const Vec& x, const Vec&) {
    Vec v(1);
    v << Bs * std::tanh(x[0] + x[1]);
    return v;
  };
  m.coeffs.eta = [h1, h2](double, const Vec&, const Vec&, const Vec& mk) {
    Vec v(2);
    v << h1 * mk[0], h2 * mk[0];
    return v;
  };
  m.coeffs.xi = [g1, g2](double, const Vec&, const Vec&, const Vec& mk) {
    Vec v(2);
    v << g1 * mk[0], g2 * mk[0];
    return v;
  };
  m.coeffs.K0 = 1.0;
  m.coeffs.K1 = 0.0;
  m.coeffs.K = Bs;
  m.coeffs.L = std::sqrt(2.0) * Bs;
  m.coeffs.lambda = 1.0;  // x-independent jumps
  m.coeffs.xi_bar = [g1, g2](const Vec& mk) {
    return std::hypot(g1, g2) * std::abs(mk[0]);
  };
  m.coeffs.eta_bar = [h1, h2](const Vec& mk) {
    return std::hypot(h1, h2) * std::abs(mk[0]);
  };
  m.coeffs.K_xi = std::hypot(g1, g2) * mark1;
  m.coeffs.K_eta = std::hypot(h1, h2) * mark0;
  m.act0 = two_point_marks(rate0, mark0, 1);
  m.act1 = two_point_marks(rate1, mark1, 1);
  m.x0_mean = Vec::Zero(2);
  m.pi0_std = get(params, "pi0_std", 0.5);
  m.y0 = Vec::Zero(1);
  m.pi0_sampler = gaussian_sampler(m.x0_mean, m.pi0_std);
  return m;
}

}  // namespace

ModelSpec make_model(const std::string& id,
                     const std::map<std::string, double>& params) {
  if (id == "trivial-constants") return trivial_constants(params);
  if (id == "clipped-linear-1d") return clipped_linear_1d(params);
  if (id == "jump-shared-1d") return jump_shared_1d(params);
  if (id == "pure-jump-2d") return pure_jump_2d(params);
  throw ConfigError("unknown model id '" + id + "'");
}

std::vector<std::string> model_registry_ids() {
  return {"trivial-constants", "clipped-linear-1d", "jump-shared-1d", "pure-jump-2d"};
}

}  // namespace jumpfilter
