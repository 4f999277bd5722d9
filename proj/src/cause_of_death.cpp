#include "vitalkit/cause_of_death.hpp"

#include <cmath>

#include "vitalkit/errors.hpp"
#include "vitalkit/numerics.hpp"

namespace vitalkit {

double CodParams::t_star() const { return (std::log(b * std::pow(c, age_x) + v * std::log(c)) - std::log(b)) / std::log(c) - age_x; }

double CodParams::b_star(double t) const {
  return v - b * std::pow(c, age_x) * std::expm1(t * std::log(c)) / std::log(c);
}

void validate(const CodParams& p) {
  require(std::isfinite(p.age_x), "cod.age must be finite");
  require(p.b > 0.0, "cod.b must be positive");
  require(p.c > 1.0, "cod.c must exceed 1");
  require(p.lambda >= 0.0 && std::isfinite(p.lambda), "cod.lambda must be non-negative");
  require(p.alpha > 0.0 && std::isfinite(p.alpha), "cod.alpha must be positive");
  require(p.v > 0.0, "cod.v must be positive");
}

namespace {

constexpr double kSeriesSwitch = 1e-8;

// Accident density times e^{-q t}, for t in (0, t*).
double accident_integrand(const CodParams& p, double q, double t) {
  const double bs = std::max(p.b_star(t), 0.0);
  const double z = 2.0 * std::sqrt(p.alpha * p.lambda * t * bs);
  // -(q + lambda) t - alpha b* + z <= -q t
  return p.lambda * std::exp(-(q + p.lambda) * t - p.alpha * bs + z) * bessel_i_scaled(0, z);
}

double natural_integrand(const CodParams& p, double q, double t) {
  const double bs = std::max(p.b_star(t), 0.0);
  const double rate = p.b * std::pow(p.c, p.age_x + t);
  const double alt = p.alpha * p.lambda * t;
  if (bs < kSeriesSwitch) {
    // sqrt(alt / b*) I_1(2 sqrt(alt b*)) = alt sum_n (alt b*)^n / (n! (n+1)!)
    double term = alt;
    double sum = term;
    for (int n = 1; n < 20; ++n) {
      term *= alt * bs / (n * (n + 1.0));
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return std::exp(-(q + p.lambda) * t - p.alpha * bs) * rate * sum;
  }
  const double z = 2.0 * std::sqrt(alt * bs);
  return std::exp(-(q + p.lambda) * t - p.alpha * bs + z) * bessel_i_scaled(1, z) * rate * std::sqrt(alt / bs);
}

}  // namespace

double cod_laplace_accident(const CodParams& p, double q) {
  validate(p);
  require(q >= 0.0, "cod_laplace_accident: q must be non-negative");
  if (p.lambda == 0.0) return 0.0;
  return integrate_refined_at_upper([&](double t) { return accident_integrand(p, q, t); }, 0.0, p.t_star(), 1e-9)
      .value;
}

double cod_laplace_natural(const CodParams& p, double q) {
  validate(p);
  require(q >= 0.0, "cod_laplace_natural: q must be non-negative");
  const double ts = p.t_star();
  const double atom = std::exp(-(q + p.lambda) * ts);
  if (p.lambda == 0.0) return atom;
  return integrate_refined_at_upper([&](double t) { return natural_integrand(p, q, t); }, 0.0, ts, 1e-9).value +
         atom;
}

CodDensity cod_density(const CodParams& p, Cause cause, double t) {
  validate(p);
  require(t > 0.0, "cod_density: t must be positive");
  CodDensity out;
  const double ts = p.t_star();
  if (cause == Cause::Natural) {
    out.atom_time = ts;
    out.atom_mass = std::exp(-p.lambda * ts);
  }
  if (t >= ts || p.lambda == 0.0) return out;
  out.density = cause == Cause::Accident ? accident_integrand(p, 0.0, t) : natural_integrand(p, 0.0, t);
  return out;
}

CauseSplit prob_cause_split(const CodParams& p) {
  CauseSplit split;
  split.p_accident = cod_laplace_accident(p, 0.0);
  split.p_natural = cod_laplace_natural(p, 0.0);
  split.complete = std::abs(split.p_accident + split.p_natural - 1.0) <= 1e-6;
  return split;
}

}  // namespace vitalkit
