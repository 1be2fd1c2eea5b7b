#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace jumpfilter {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Adaptive Simpson integration with an absolute error target.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double abs_tol, int max_depth = 48);

/// Gauss-Legendre nodes and weights on [-1,1], computed once per order by
/// Newton iteration on the Legendre recurrence.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int n);

/// Fixed-order Gauss-Legendre on [a,b].
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int order = 32);

/// Iterated adaptive integration over an axis-aligned box, d <= 3.
double integrate_box(const std::function<double(const Vec&)>& f, const Vec& lo,
                     const Vec& hi, double abs_tol);

/// Tensor panel Gauss-Legendre over a box; fast and spectrally accurate for
/// smooth integrands (duality pairings of bump functions).
double integrate_box_gl(const std::function<double(const Vec&)>& f,
                        const Vec& lo, const Vec& hi, int panels = 10,
                        int order = 12);

}  // namespace jumpfilter
