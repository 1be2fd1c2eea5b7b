#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "jumpfilter/test_function.hpp"

namespace jumpfilter {

/// Finite signed Borel measure represented as a weighted atom cloud.
class ParticleMeasure {
 public:
  struct Atom {
    Vec x;
    double w;
  };

  explicit ParticleMeasure(int dim);
  ParticleMeasure(int dim, std::vector<Atom> atoms);

  void add(const Vec& x, double w);

  int dim() const { return dim_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  /// mu(1): signed total mass.
  double mass() const;
  /// ||mu||: total variation.
  double total_variation() const;
  /// |mu|: measure with absolute weights.
  ParticleMeasure abs() const;
  /// Pushforward under x -> x + zeta(x); atom weights unchanged (exact).
  ParticleMeasure pushforward(const std::function<Vec(const Vec&)>& zeta) const;

  /// mu(phi) = sum_i w_i phi(x_i).
  double integrate(const std::function<double(const Vec&)>& phi) const;

  /// Bounding box of atom locations (empty measure gives [0,0]^d).
  void bounding_box(Vec& lo, Vec& hi) const;

 private:
  int dim_;
  std::vector<Atom> atoms_;
};

/// Gaussian density on R^d with mean 0 and covariance eps*I.
struct GaussianKernel {
  double epsilon;
  int dim;
  GaussianKernel(double eps, int d);
  double operator()(const Vec& u) const;
  double at_sq_norm(double sq) const;
};

/// mu^(eps)(x) = sum_i w_i k_eps(x - y_i).
double mollify(const ParticleMeasure& mu, double eps, const Vec& x);

/// c_{p,eps} = p^{-d/2} (2 pi eps)^{(1-p)d/2}.
double rho_normalizer(int d, int p, double eps);

/// rho_eps(y_1..y_p) = c_{p,eps} exp(-sum_{r<s}|y_r-y_s|^2/(2 eps p)).
/// Pairwise squared distances are accumulated in sorted order, so the value
/// is bit-identical under any permutation of the points.
double rho_eps(const std::vector<Vec>& points, double eps);

/// Quadrature oracle for rho_eps: per-axis adaptive integration of the
/// kernel product (the integral factorizes across coordinates).
double rho_eps_quadrature(const std::vector<Vec>& points, double eps, double tol);

/// Gradient factor g_r = (1/(eps p)) sum_s (y_s - y_r), so that
/// d rho / d y_r^i = g_r^i * rho.
Vec rho_grad_factor(const std::vector<Vec>& points, double eps, int r);

/// d^2 rho / (d y_r^i d y_s^j) = rho * (g_r^i g_s^j + delta_ij (1 - p delta_rs)/(eps p)).
double rho_second_factor(const std::vector<Vec>& points, double eps, int r,
                         int i, int s, int j);

/// int k_r(u - x) k_s(x) dx by per-axis quadrature; asserts agreement with
/// the semigroup value k_{r+s}(u) to 1e-10 relative.
double kernel_convolve(double eps_r, double eps_s, const Vec& u);

/// ||mu^(eps)||_{L_p}^p by the exact expansion over p-tuples of atoms.
/// p must be even; the m^p tuple count is capped by a work budget.
double lp_norm_exact(const ParticleMeasure& mu, double eps, int p,
                     double budget = 1e7);

/// Adaptive quadrature of int |mu^(eps)|^p dx over the support box
/// [min - 10 sqrt(eps), max + 10 sqrt(eps)]^d; d <= 3.
double lp_norm_quadrature(const ParticleMeasure& mu, double eps, double p,
                          double tol);

struct RhoIdentityReport {
  double max_fd_deviation;     // closed-form partial vs central differences
  double max_gradient_sum;     // max_j |sum_r d rho/d y_r^j|, should be ~0
  double rho_value;
  double ratio_q1;             // eps^-q sum |y_s-y_r|^{2q} rho / rho_{2eps}
  double ratio_q2;
  bool gradient_sum_ok;        // <= 1e-9 * rho
};

RhoIdentityReport rho_identities_check(const std::vector<Vec>& points,
                                       double eps, int p);

/// phi^(eps)(y) = int k_eps(y-x) phi(x) dx by quadrature (duality tests).
double mollify_function(const TestFunction& phi, double eps, const Vec& y,
                        double tol);

}  // namespace jumpfilter
