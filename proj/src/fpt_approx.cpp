#include "vitalkit/fpt_approx.hpp"

#include <cmath>

#include "vitalkit/errors.hpp"
#include "vitalkit/numerics.hpp"

namespace vitalkit {

BoundaryFn boundary_from_trend(const BaseTrend& trend, double age_x) {
  BoundaryFn boundary;
  boundary.H = [trend, age_x](double t, double v) { return v - cumulative_hazard(trend, age_x, t); };
  boundary.H_t = [trend, age_x](double t, double) { return -trend_rate(trend, age_x, t); };
  boundary.concave = std::holds_alternative<GompertzTrend>(trend);
  return boundary;
}

double tangent_density(const BoundaryFn& boundary, double sigma, double v, double t) {
  require(t > 0.0, "tangent_density: t must be positive");
  require(sigma > 0.0, "tangent_density: sigma must be positive");
  const double h = boundary.H(t, v);
  const double slope = boundary.H_t(t, v);
  return std::abs(h - t * slope) / (sigma * std::sqrt(2.0 * kPi * t * t * t)) *
         std::exp(-h * h / (2.0 * sigma * sigma * t));
}

double inverse_gaussian_density(double v, double delta, double sigma, double t) {
  require(t > 0.0 && sigma > 0.0, "inverse_gaussian_density: need t > 0 and sigma > 0");
  const double gap = v - delta * t;
  return v / (sigma * std::sqrt(2.0 * kPi * t * t * t)) * std::exp(-gap * gap / (2.0 * sigma * sigma * t));
}

namespace {

// Gaussian N(0, s) density at x.
double gauss(double x, double s) { return std::exp(-x * x / (2.0 * s)) / std::sqrt(2.0 * kPi * s); }

struct Scaled {
  const BoundaryFn& boundary;
  double sigma;
  double v;
  double a(double t) const { return boundary.H(t, v) / sigma; }
  double da(double t) const { return boundary.H_t(t, v) / sigma; }
};

// Earliest time from which B(s) can plausibly sit on the boundary: below it
// a(s)^2 / (2 s) > 80 and every Gaussian factor is negligible.
double support_start(const Scaled& s, double t) {
  auto excess = [&](double u) {
    const double a = s.a(u);
    return a * a / (2.0 * u) - 80.0;
  };
  double lo = 1e-12 * t;
  if (excess(lo) <= 0.0) return 0.0;
  if (excess(t) > 0.0) return t;
  // a^2 / (2u) decreases while a stays positive and shrinking
  return bisect_root(excess, lo, t, 1e-12);
}

double q1(const Scaled& s, double t) {
  const double a = s.a(t);
  return (a / t - s.da(t)) * gauss(a, t);
}

double q2(const Scaled& s, double t) {
  const double a0 = s.a(t);
  const double da0 = s.da(t);
  const double lo = support_start(s, t);
  if (lo >= t) return 0.0;
  auto integrand = [&](double t1) {
    if (t1 <= 0.0 || t1 >= t) return 0.0;
    const double a1 = s.a(t1);
    const double outer = a1 / t1 - s.da(t1);
    const double link = (a0 - a1) / (t - t1) - da0;
    return outer * link * gauss(a1, t1) * gauss(a0 - a1, t - t1);
  };
  return adaptive_integrate(integrand, lo, t, 1e-8, 1e-8).value;
}

double q3(const Scaled& s, double t) {
  const double a0 = s.a(t);
  const double da0 = s.da(t);
  const double lo = support_start(s, t);
  if (lo >= t) return 0.0;
  auto inner = [&](double t1) {
    if (t1 <= lo || t1 >= t) return 0.0;
    const double a1 = s.a(t1);
    const double da1 = s.da(t1);
    const double link01 = (a0 - a1) / (t - t1) - da0;
    const double g01 = gauss(a0 - a1, t - t1);
    if (link01 == 0.0 || g01 == 0.0) return 0.0;
    auto integrand = [&](double t2) {
      if (t2 <= 0.0 || t2 >= t1) return 0.0;
      const double a2 = s.a(t2);
      const double outer = a2 / t2 - s.da(t2);
      const double link12 = (a1 - a2) / (t1 - t2) - da1;
      return outer * link12 * gauss(a2, t2) * gauss(a1 - a2, t1 - t2);
    };
    return link01 * g01 * adaptive_integrate(integrand, lo, t1, 1e-9, 1e-7).value;
  };
  return adaptive_integrate(inner, lo, t, 1e-6, 1e-6).value;
}

}  // namespace

std::array<double, 3> durbin_terms(const BoundaryFn& boundary, double sigma, double v, double t, int k) {
  require(t > 0.0, "durbin_density: t must be positive");
  require(sigma > 0.0, "durbin_density: sigma must be positive");
  require(k >= 1 && k <= 3, "durbin_density: k must be 1, 2 or 3");
  const Scaled s{boundary, sigma, v};
  std::array<double, 3> terms{q1(s, t), 0.0, 0.0};
  if (k >= 2) terms[1] = q2(s, t);
  if (k >= 3) terms[2] = q3(s, t);
  return terms;
}

double durbin_density(const BoundaryFn& boundary, double sigma, double v, double t, int k) {
  const auto q = durbin_terms(boundary, sigma, v, t, k);
  return q[0] - q[1] + q[2];
}

SurvivalFromDensity density_to_survival(const std::function<double(double)>& density, double T) {
  require(T >= 0.0, "density_to_survival: T must be non-negative");
  SurvivalFromDensity out;
  if (T == 0.0) return out;
  // fixed panels first so that a narrow density spike cannot slip between the
  // nodes of a single Gauss-Kronrod rule
  constexpr int kPanels = 200;
  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double lo = T * i / kPanels;
    const double hi = T * (i + 1) / kPanels;
    total += adaptive_integrate([&](double t) { return t > 0.0 ? density(t) : 0.0; }, lo, hi, 1e-12, 1e-10).value;
  }
  if (total > 1.0 + 1e-3) {
    throw NumericalError("density_to_survival: density integrates to " + std::to_string(total) +
                         " > 1; the approximation has broken down");
  }
  out.survival = 1.0 - total;
  if (out.survival < 0.0) {
    out.survival = 0.0;
    out.clamped = true;
  }
  return out;
}

}  // namespace vitalkit
