#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace vitalkit {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

double std_normal_cdf(double x);
double std_normal_pdf(double x);

// Mills ratio R(a) = Phi(-a) / phi(a), stable for large a.
double mills_ratio(double a);

// Modified Bessel function of the first kind, orders 0 and 1 only.
double bessel_i(int k, double x);

// e^{-x} I_k(x); finite for arbitrarily large x.
double bessel_i_scaled(int k, double x);

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

enum class QuadratureKind { GaussLaguerre, GaussLegendre, Trapezoid };

// A fixed rule sum_i w_i f(x_i). Gauss-Laguerre rules absorb the weight e^{-v}.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  QuadratureKind kind = QuadratureKind::GaussLegendre;
};

QuadratureRule gauss_laguerre(int n);
QuadratureRule gauss_legendre(int n, double lo = -1.0, double hi = 1.0);
QuadratureRule trapezoid(int n_panels, double lo, double hi);

// Cached Gauss-Laguerre rule, built once per order.
const QuadratureRule& gauss_laguerre_cached(int n);

// Throws NumericalError if f is non-finite at a node.
double integrate(const QuadratureRule& rule, const std::function<double(double)>& f);

struct IntegralResult {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod on [lo, hi]; infinite upper limits are allowed.
// Throws ConvergenceError if the estimated error exceeds max(abs_tol, rel_tol*|value|).
IntegralResult adaptive_integrate(const std::function<double(double)>& f, double lo, double hi,
                                  double abs_tol = 1e-10, double rel_tol = 1e-10,
                                  int max_depth = 18);

// Same as adaptive_integrate, but splits [lo, hi] geometrically towards `hi` so that
// integrands with steep structure right at the upper endpoint are resolved.
IntegralResult integrate_refined_at_upper(const std::function<double(double)>& f, double lo,
                                          double hi, double abs_tol = 1e-10,
                                          int n_levels = 16);

// Bisection on a sign-changing bracket.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double x_tol = 1e-13, int max_iter = 400);

// ---------------------------------------------------------------------------
// Laplace inversion
// ---------------------------------------------------------------------------

using LaplaceTransform = std::function<std::complex<double>(std::complex<double>)>;

struct LaplaceOptions {
  int order = 16;             // Euler-summation parameter M; 2M+1 transform evaluations
  double tolerance = 1e-6;    // allowed gap between orders M and M-4
};

// Inverts F at t > 0 with the unified Euler algorithm (Bromwich contour shifted
// to Re q = M ln(10) / (3t)), so F is only evaluated in the right half plane.
// When orders M and M-4 disagree, M is raised by 4 up to twice; ConvergenceError after that.
double laplace_invert(const LaplaceTransform& transform, double t, int order);
double laplace_invert(const LaplaceTransform& transform, double t,
                      const LaplaceOptions& options = {});

// Deterministic pairwise summation.
double pairwise_sum(std::span<const double> values);

}  // namespace vitalkit
