#include "jumpfilter/measure.hpp"

#include <algorithm>
#include <cmath>

#include "jumpfilter/errors.hpp"
#include "jumpfilter/quadrature.hpp"

namespace jumpfilter {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

void require_finite(const Vec& x, const char* what) {
  if (!x.allFinite()) throw ContractViolation(std::string(what) + ": non-finite entry");
}

double gauss1d(double eps, double t) {
  return std::exp(-t * t / (2.0 * eps)) / std::sqrt(kTwoPi * eps);
}

}  // namespace

ParticleMeasure::ParticleMeasure(int dim) : dim_(dim) {
  if (dim < 1) throw ContractViolation("ParticleMeasure: dim must be >= 1");
}

ParticleMeasure::ParticleMeasure(int dim, std::vector<Atom> atoms) : ParticleMeasure(dim) {
  for (auto& a : atoms) add(a.x, a.w);
}

void ParticleMeasure::add(const Vec& x, double w) {
  if (x.size() != dim_) throw ContractViolation("ParticleMeasure::add: location dimension mismatch");
  require_finite(x, "ParticleMeasure::add");
  if (!std::isfinite(w)) throw ContractViolation("ParticleMeasure::add: non-finite weight");
  atoms_.push_back({x, w});
}

double ParticleMeasure::mass() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.w;
  return s;
}

double ParticleMeasure::total_variation() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += std::abs(a.w);
  return s;
}

ParticleMeasure ParticleMeasure::abs() const {
  ParticleMeasure out(dim_);
  for (const auto& a : atoms_) out.add(a.x, std::abs(a.w));
  return out;
}

ParticleMeasure ParticleMeasure::pushforward(
    const std::function<Vec(const Vec&)>& zeta) const {
  ParticleMeasure out(dim_);
  for (const auto& a : atoms_) out.add(a.x + zeta(a.x), a.w);
  return out;
}

double ParticleMeasure::integrate(const std::function<double(const Vec&)>& phi) const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.w * phi(a.x);
  return s;
}

void ParticleMeasure::bounding_box(Vec& lo, Vec& hi) const {
  lo = Vec::Zero(dim_);
  hi = Vec::Zero(dim_);
  if (atoms_.empty()) return;
  lo = hi = atoms_.front().x;
  for (const auto& a : atoms_) {
    lo = lo.cwiseMin(a.x);
    hi = hi.cwiseMax(a.x);
  }
}

GaussianKernel::GaussianKernel(double eps, int d) : epsilon(eps), dim(d) {
  if (!(eps > 0.0)) throw ContractViolation("GaussianKernel: epsilon must be > 0");
  if (d < 1) throw ContractViolation("GaussianKernel: dim must be >= 1");
}

double GaussianKernel::operator()(const Vec& u) const {
  return at_sq_norm(u.squaredNorm());
}

double GaussianKernel::at_sq_norm(double sq) const {
  return std::pow(kTwoPi * epsilon, -0.5 * dim) * std::exp(-sq / (2.0 * epsilon));
}

double mollify(const ParticleMeasure& mu, double eps, const Vec& x) {
  if (!(eps > 0.0)) throw ContractViolation("mollify: eps must be > 0");
  if (x.size() != mu.dim()) throw ContractViolation("mollify: point dimension mismatch");
  const GaussianKernel k(eps, mu.dim());
  double s = 0.0;
  for (const auto& a : mu.atoms()) s += a.w * k.at_sq_norm((x - a.x).squaredNorm());
  return s;
}

double rho_normalizer(int d, int p, double eps) {
  return std::pow(static_cast<double>(p), -0.5 * d) *
         std::pow(kTwoPi * eps, 0.5 * (1.0 - p) * d);
}

double rho_eps(const std::vector<Vec>& points, double eps) {
  const int p = static_cast<int>(points.size());
  if (p < 2) throw ContractViolation("rho_eps: needs p >= 2 points");
  if (!(eps > 0.0)) throw ContractViolation("rho_eps: eps must be > 0");
  const int d = static_cast<int>(points.front().size());
  for (const auto& y : points)
    if (y.size() != d) throw ContractViolation("rho_eps: mixed dimensions");

  std::vector<double> sq;
  sq.reserve(p * (p - 1) / 2);
  for (int r = 0; r < p; ++r)
    for (int s = r + 1; s < p; ++s) sq.push_back((points[r] - points[s]).squaredNorm());
  std::sort(sq.begin(), sq.end());
  double acc = 0.0;
  for (double v : sq) acc += v;
  return rho_normalizer(d, p, eps) * std::exp(-acc / (2.0 * eps * p));
}

double rho_eps_quadrature(const std::vector<Vec>& points, double eps, double tol) {
  const int p = static_cast<int>(points.size());
  if (p < 2) throw ContractViolation("rho_eps_quadrature: needs p >= 2 points");
  const int d = static_cast<int>(points.front().size());
  // The kernel product factorizes over coordinates; each axis is a 1-D
  // integral of a product of p one-dimensional Gaussians.
  double result = 1.0;
  const double axis_tol = tol / d;
  for (int j = 0; j < d; ++j) {
    double lo = points[0][j], hi = points[0][j];
    for (const auto& y : points) {
      lo = std::min(lo, y[j]);
      hi = std::max(hi, y[j]);
    }
    const double pad = 12.0 * std::sqrt(eps);
    result *= integrate_adaptive(
        [&](double t) {
          double prod = 1.0;
          for (const auto& y : points) prod *= gauss1d(eps, t - y[j]);
          return prod;
        },
        lo - pad, hi + pad, axis_tol);
  }
  return result;
}

Vec rho_grad_factor(const std::vector<Vec>& points, double eps, int r) {
  const int p = static_cast<int>(points.size());
  Vec g = Vec::Zero(points.front().size());
  for (int s = 0; s < p; ++s) g += points[s] - points[r];
  return g / (eps * p);
}

double rho_second_factor(const std::vector<Vec>& points, double eps, int r,
                         int i, int s, int j) {
  const int p = static_cast<int>(points.size());
  const Vec gr = rho_grad_factor(points, eps, r);
  const Vec gs = rho_grad_factor(points, eps, s);
  double v = gr[i] * gs[j];
  if (i == j) v += (1.0 - (r == s ? p : 0.0)) / (eps * p);
  return v;
}

double kernel_convolve(double eps_r, double eps_s, const Vec& u) {
  if (!(eps_r > 0.0) || !(eps_s > 0.0))
    throw ContractViolation("kernel_convolve: scales must be > 0");
  const int d = static_cast<int>(u.size());
  // Per axis the product k_r(u-t)k_s(t) is a Gaussian in t centered at
  // t* = u s/(r+s) with width sqrt(rs/(r+s)); integrate around it.
  const double w = std::sqrt(eps_r * eps_s / (eps_r + eps_s));
  double quad = 1.0;
  for (int j = 0; j < d; ++j) {
    const double tstar = u[j] * eps_s / (eps_r + eps_s);
    quad *= integrate_adaptive(
        [&](double t) { return gauss1d(eps_r, u[j] - t) * gauss1d(eps_s, t); },
        tstar - 14.0 * w, tstar + 14.0 * w, 1e-13);
  }
  const GaussianKernel k(eps_r + eps_s, d);
  const double exact = k(u);
  const double scale = std::max(std::abs(exact), 1e-300);
  if (std::abs(quad - exact) > 1e-10 * scale)
    throw NumericalFailure("kernel_convolve: semigroup identity violated",
                           std::abs(quad - exact) / scale);
  return quad;
}

double lp_norm_exact(const ParticleMeasure& mu, double eps, int p, double budget) {
  if (p < 2 || p % 2 != 0) throw ContractViolation("lp_norm_exact: p must be even and >= 2");
  if (!(eps > 0.0)) throw ContractViolation("lp_norm_exact: eps must be > 0");
  const std::size_t m = mu.size();
  if (m == 0) return 0.0;
  if (std::pow(static_cast<double>(m), p) > budget)
    throw BudgetExceeded("lp_norm_exact: m^p exceeds work budget; down-sample the measure");

  const auto& atoms = mu.atoms();
  std::vector<int> idx(p, 0);
  std::vector<Vec> tuple(p);
  double total = 0.0;
  for (;;) {
    double w = 1.0;
    for (int r = 0; r < p; ++r) {
      tuple[r] = atoms[idx[r]].x;
      w *= atoms[idx[r]].w;
    }
    if (w != 0.0) total += w * rho_eps(tuple, eps);
    int pos = p - 1;
    while (pos >= 0 && ++idx[pos] == static_cast<int>(m)) idx[pos--] = 0;
    if (pos < 0) break;
  }
  return total;
}

double lp_norm_quadrature(const ParticleMeasure& mu, double eps, double p, double tol) {
  if (!(tol > 0.0)) throw ContractViolation("lp_norm_quadrature: tol must be > 0");
  if (!(p >= 1.0)) throw ContractViolation("lp_norm_quadrature: p must be >= 1");
  if (mu.dim() > 3) throw UnsupportedDimension("lp_norm_quadrature: d <= 3 supported");
  if (mu.empty()) return 0.0;
  Vec lo, hi;
  mu.bounding_box(lo, hi);
  const double pad = 10.0 * std::sqrt(eps);
  lo.array() -= pad;
  hi.array() += pad;
  return integrate_box(
      [&](const Vec& x) { return std::pow(std::abs(mollify(mu, eps, x)), p); },
      lo, hi, tol);
}

RhoIdentityReport rho_identities_check(const std::vector<Vec>& points,
                                       double eps, int p) {
  if (static_cast<int>(points.size()) != p || p < 2)
    throw ContractViolation("rho_identities_check: needs exactly p >= 2 points");
  const int d = static_cast<int>(points.front().size());
  const double rho = rho_eps(points, eps);

  RhoIdentityReport rep{};
  rep.rho_value = rho;

  // (a) closed-form partials against central differences.
  double worst_fd = 0.0;
  for (int r = 0; r < p; ++r) {
    const Vec g = rho_grad_factor(points, eps, r);
    for (int i = 0; i < d; ++i) {
      const double h = 1e-5 * (1.0 + std::abs(points[r][i]));
      auto shifted = points;
      shifted[r][i] += h;
      const double up = rho_eps(shifted, eps);
      shifted[r][i] -= 2.0 * h;
      const double dn = rho_eps(shifted, eps);
      const double fd = (up - dn) / (2.0 * h);
      const double cf = g[i] * rho;
      worst_fd = std::max(worst_fd,
                          std::abs(fd - cf) / std::max({std::abs(cf), std::abs(fd), 1e-12}));
    }
  }
  rep.max_fd_deviation = worst_fd;

  // (b) sum over r of the partials vanishes identically.
  double worst_sum = 0.0;
  for (int j = 0; j < d; ++j) {
    double s = 0.0;
    for (int r = 0; r < p; ++r) s += rho_grad_factor(points, eps, r)[j] * rho;
    worst_sum = std::max(worst_sum, std::abs(s));
  }
  rep.max_gradient_sum = worst_sum;
  rep.gradient_sum_ok = worst_sum <= 1e-9 * std::abs(rho);

  // (c) the (qrho) ratio, reported rather than asserted.
  const double rho2 = rho_eps(points, 2.0 * eps);
  for (int q = 1; q <= 2; ++q) {
    double acc = 0.0;
    for (int r = 0; r < p; ++r)
      for (int s = 0; s < p; ++s)
        if (s != r) acc += std::pow((points[s] - points[r]).squaredNorm(), q);
    const double ratio = std::pow(eps, -q) * acc * rho / rho2;
    if (q == 1)
      rep.ratio_q1 = ratio;
    else
      rep.ratio_q2 = ratio;
  }
  return rep;
}

double mollify_function(const TestFunction& phi, double eps, const Vec& y, double tol) {
  const int d = static_cast<int>(y.size());
  ParticleMeasure delta(d);
  delta.add(y, 1.0);
  // phi^(eps)(y) = int k_eps(y-x) phi(x) dx; reuse the box machinery with the
  // kernel centered at y.
  Vec lo = y, hi = y;
  const double pad = 10.0 * std::sqrt(eps);
  lo.array() -= pad;
  hi.array() += pad;
  const GaussianKernel k(eps, d);
  return integrate_box(
      [&](const Vec& x) { return k.at_sq_norm((y - x).squaredNorm()) * phi.value(x); },
      lo, hi, tol);
}

}  // namespace jumpfilter
