#include "vitalkit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>

#include <Eigen/Dense>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "vitalkit/errors.hpp"

namespace vitalkit {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

double mills_ratio(double a) {
  if (a < 30.0) return std_normal_cdf(-a) / std_normal_pdf(a);
  // Laplace continued fraction R(a) = 1/(a + 1/(a + 2/(a + 3/(a + ...)))),
  // evaluated bottom-up; 60 levels is far past convergence for a >= 30.
  double tail = a;
  for (int k = 60; k >= 1; --k) tail = a + k / tail;
  return 1.0 / tail;
}

namespace {

double bessel_series(int k, double x) {
  const double half = 0.5 * x;
  const double q = half * half;
  double term = (k == 0) ? 1.0 : half;
  double sum = term;
  for (int n = 1; n < 500; ++n) {
    term *= q / (static_cast<double>(n) * static_cast<double>(n + k));
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

// Hankel asymptotic expansion of e^{-x} I_k(x), accurate to round-off for x >= 30.
double bessel_asymptotic_scaled(int k, double x) {
  const double mu = 4.0 * k * k;
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j < 60; ++j) {
    const double odd = 2.0 * j - 1.0;
    const double next = -term * (mu - odd * odd) / (j * 8.0 * x);
    if (std::abs(next) > std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * kPi * x);
}

constexpr double kBesselSwitch = 30.0;

void check_bessel_args(int k, double x) {
  require(k == 0 || k == 1, "bessel_i: only orders 0 and 1 are supported");
  require(x >= 0.0 && !std::isnan(x), "bessel_i: argument must be non-negative");
}

}  // namespace

double bessel_i(int k, double x) {
  check_bessel_args(k, x);
  if (x <= kBesselSwitch) return bessel_series(k, x);
  return bessel_asymptotic_scaled(k, x) * std::exp(x);
}

double bessel_i_scaled(int k, double x) {
  check_bessel_args(k, x);
  if (x <= kBesselSwitch) return bessel_series(k, x) * std::exp(-x);
  return bessel_asymptotic_scaled(k, x);
}

// ---------------------------------------------------------------------------

namespace {

// Laguerre L_n(x) and L_{n-1}(x) by the three-term recurrence, in extended precision.
std::pair<long double, long double> laguerre_pair(int n, long double x) {
  long double p0 = 1.0L;
  long double p1 = 1.0L - x;
  if (n == 0) return {p0, 0.0L};
  for (int j = 1; j < n; ++j) {
    const long double p2 = ((2.0L * j + 1.0L - x) * p1 - j * p0) / (j + 1.0L);
    p0 = p1;
    p1 = p2;
  }
  return {p1, p0};
}

}  // namespace

QuadratureRule gauss_laguerre(int n) {
  require(n >= 1, "gauss_laguerre: order must be positive");
  // Golub-Welsch for the starting nodes, then Newton polishing on L_n.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    jacobi(i, i) = 2.0 * i + 1.0;
    if (i + 1 < n) {
      jacobi(i, i + 1) = i + 1.0;
      jacobi(i + 1, i) = i + 1.0;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);
  QuadratureRule rule;
  rule.kind = QuadratureKind::GaussLaguerre;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    long double x = solver.eigenvalues()(i);
    for (int it = 0; it < 10; ++it) {
      auto [ln, lnm1] = laguerre_pair(n, x);
      const long double deriv = n * (ln - lnm1) / x;
      const long double step = ln / deriv;
      x -= step;
      if (std::abs(step) < 1e-18L * x) break;
    }
    const long double lnp1 = laguerre_pair(n + 1, x).first;
    rule.nodes[i] = static_cast<double>(x);
    rule.weights[i] = static_cast<double>(x / ((n + 1.0L) * (n + 1.0L) * lnp1 * lnp1));
  }
  return rule;
}

const QuadratureRule& gauss_laguerre_cached(int n) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_laguerre(n)).first;
  return it->second;
}

QuadratureRule gauss_legendre(int n, double lo, double hi) {
  require(n >= 1, "gauss_legendre: order must be positive");
  require(hi > lo, "gauss_legendre: empty interval");
  QuadratureRule rule;
  rule.kind = QuadratureKind::GaussLegendre;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (hi + lo);
  const double half = 0.5 * (hi - lo);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double deriv = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      deriv = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / deriv;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    // x decreases with i; store ascending
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[n - 1 - i] = 2.0 * half / ((1.0 - x * x) * deriv * deriv);
  }
  return rule;
}

QuadratureRule trapezoid(int n_panels, double lo, double hi) {
  require(n_panels >= 1, "trapezoid: need at least one panel");
  require(hi > lo, "trapezoid: empty interval");
  QuadratureRule rule;
  rule.kind = QuadratureKind::Trapezoid;
  const double h = (hi - lo) / n_panels;
  for (int i = 0; i <= n_panels; ++i) {
    rule.nodes.push_back(lo + i * h);
    rule.weights.push_back((i == 0 || i == n_panels) ? 0.5 * h : h);
  }
  return rule;
}

double integrate(const QuadratureRule& rule, const std::function<double(double)>& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double value = f(rule.nodes[i]);
    if (!std::isfinite(value)) {
      throw NumericalError("integrate: integrand is not finite at node " +
                           std::to_string(rule.nodes[i]));
    }
    sum += rule.weights[i] * value;
  }
  return sum;
}

// ---------------------------------------------------------------------------

namespace {

struct GslSetup {
  GslSetup() { gsl_set_error_handler_off(); }
};

double gsl_trampoline(double x, void* params) {
  const auto& f = *static_cast<const std::function<double(double)>*>(params);
  return f(x);
}

struct Workspace {
  explicit Workspace(std::size_t n) : ptr(gsl_integration_workspace_alloc(n)) {}
  ~Workspace() { gsl_integration_workspace_free(ptr); }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
  gsl_integration_workspace* ptr;
};

}  // namespace

IntegralResult adaptive_integrate(const std::function<double(double)>& f, double lo, double hi,
                                  double abs_tol, double rel_tol, int max_depth) {
  static const GslSetup setup;
  if (hi == lo) return {};
  require(hi > lo, "adaptive_integrate: upper limit below lower limit");
  const std::size_t limit = std::size_t{1} << std::min(max_depth, 12);
  Workspace ws(limit);
  gsl_function gf{&gsl_trampoline, const_cast<std::function<double(double)>*>(&f)};
  double result = 0.0;
  double abserr = 0.0;
  int status;
  if (std::isinf(hi)) {
    status = gsl_integration_qagiu(&gf, lo, abs_tol, rel_tol, limit, ws.ptr, &result, &abserr);
  } else {
    status = gsl_integration_qags(&gf, lo, hi, abs_tol, rel_tol, limit, ws.ptr, &result, &abserr);
  }
  if (!std::isfinite(result)) throw ConvergenceError("adaptive_integrate: non-finite result");
  if (status != GSL_SUCCESS) {
    const double target = std::max(abs_tol, rel_tol * std::abs(result));
    if (!(abserr <= 10.0 * target)) {
      throw ConvergenceError(std::string("adaptive_integrate: ") + gsl_strerror(status) +
                             " (error estimate " + std::to_string(abserr) + ")");
    }
  }
  return {result, abserr};
}

IntegralResult integrate_refined_at_upper(const std::function<double(double)>& f, double lo,
                                          double hi, double abs_tol, int n_levels) {
  if (hi <= lo) return {};
  const double width = hi - lo;
  IntegralResult total;
  double a = lo;
  for (int level = 1; level <= n_levels; ++level) {
    const double b = hi - width * std::pow(10.0, -level);
    if (b <= a) continue;
    auto part = adaptive_integrate(f, a, b, abs_tol / n_levels, 1e-12);
    total.value += part.value;
    total.error += part.error;
    a = b;
  }
  auto tail = adaptive_integrate(f, a, hi, abs_tol / n_levels, 1e-12);
  total.value += tail.value;
  total.error += tail.error;
  return total;
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                   int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw NumericalError("bisect_root: bracket has no sign change");
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= x_tol * std::max(1.0, std::abs(mid)) || mid == lo || mid == hi) return mid;
    const double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------

namespace {

double euler_inversion(const LaplaceTransform& transform, double t, int m) {
  // Abate-Whitt unified Euler algorithm: nodes beta_k = A + i pi k, A = M ln(10)/3.
  std::vector<double> xi(2 * m + 1);
  xi[0] = 0.5;
  for (int k = 1; k <= m; ++k) xi[k] = 1.0;
  const double two_pow = std::pow(2.0, -m);
  xi[2 * m] = two_pow;
  double binom = 1.0;
  for (int k = 1; k < m; ++k) {
    binom = binom * (m - k + 1) / k;
    xi[2 * m - k] = xi[2 * m - k + 1] + two_pow * binom;
  }
  const double a = m * std::log(10.0) / 3.0;
  const double scale = std::pow(10.0, m / 3.0);
  double sum = 0.0;
  for (int k = 0; k <= 2 * m; ++k) {
    const std::complex<double> beta(a, kPi * k);
    const double value = std::real(transform(beta / t));
    if (!std::isfinite(value)) {
      throw NumericalError("laplace_invert: transform is not finite at q = " +
                           std::to_string(a / t) + "+" + std::to_string(kPi * k / t) + "i");
    }
    sum += ((k % 2) ? -1.0 : 1.0) * xi[k] * value;
  }
  return scale * sum / t;
}

}  // namespace

double laplace_invert(const LaplaceTransform& transform, double t, int order) {
  return laplace_invert(transform, t, LaplaceOptions{order, 1e-6});
}

double laplace_invert(const LaplaceTransform& transform, double t, const LaplaceOptions& options) {
  require(t > 0.0, "laplace_invert: t must be positive");
  require(options.order >= 2 && options.order <= 40, "laplace_invert: order must be in [2, 40]");
  double estimate = euler_inversion(transform, t, options.order);
  if (options.order < 6) return estimate;
  // the M-4 estimate is the less accurate one, so a large gap can mean only it is off:
  // raise the order a few times before giving up (roundoff grows with M)
  double coarse = euler_inversion(transform, t, options.order - 4);
  int order = options.order;
  while (std::abs(estimate - coarse) > options.tolerance) {
    if (order + 4 > std::min(40, options.order + 8)) {
      throw ConvergenceError("laplace_invert: orders " + std::to_string(order - 4) + " and " + std::to_string(order) +
                             " disagree by " + std::to_string(std::abs(estimate - coarse)));
    }
    order += 4;
    coarse = estimate;
    estimate = euler_inversion(transform, t, order);
  }
  return estimate;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace vitalkit
