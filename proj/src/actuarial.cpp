#include "vitalkit/actuarial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "vitalkit/errors.hpp"
#include "vitalkit/fpt_approx.hpp"
#include "vitalkit/numerics.hpp"
#include "vitalkit/parallel.hpp"

namespace vitalkit {

void validate(const PricingBasis& basis) {
  require(basis.force_of_interest > 0.0 && std::isfinite(basis.force_of_interest),
          "force of interest must be positive");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Payoff g(tau) with g(0) = 0 and its derivative: E[g(tau)] = int g'(t) S(t) dt.
struct Payoff {
  std::function<double(double)> g;
  std::function<double(double)> dg;
};

Payoff lifetime() {
  return {[](double t) { return t; }, [](double) { return 1.0; }};
}

Payoff annuity_payoff(double d) {
  return {[d](double t) { return -std::expm1(-d * t) / d; }, [d](double t) { return std::exp(-d * t); }};
}

bool is_frailty(const VitalityModel& m) { return std::holds_alternative<FrailtyScaled>(m.trend); }

// Mix a conditional expectation over the initial law.
double mix_over_initial(const InitialVitalityDist& initial, const std::function<double(double)>& h) {
  if (const auto* d = std::get_if<Degenerate>(&initial)) return h(d->v);
  if (const auto* e = std::get_if<Exponential>(&initial)) {
    const auto& rule = gauss_laguerre_cached(64);
    std::vector<double> terms(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) terms[i] = rule.weights[i] * h(rule.nodes[i] / e->rate);
    return pairwise_sum(terms);
  }
  return adaptive_integrate([&](double u) { return h(quantile(initial, u)); }, 0.0, 1.0, 1e-9, 1e-9).value;
}

// Deterministic trend with optional fatal jumps.
double expect_without_diffusion(const VitalityModel& model, const Payoff& pay, std::optional<double> v) {
  const bool jumps = has_jumps(model.jump);
  if (jumps && !is_fatal(model.jump.size)) throw NoDensityRoute("non-fatal jumps have no death-time density route");
  auto jump_factor = [&](double t) { return jumps ? std::exp(-cumulative_intensity(model.jump.intensity, t)) : 1.0; };

  if (!v) {
    // unconditional survival is available in closed form for every deterministic trend
    return adaptive_integrate([&](double t) { return pay.dg(t) * survival_static(model, t); }, 0.0, kInf, 1e-11,
                              1e-11)
        .value;
  }
  require(*v > 0.0, "conditional vitality must be positive");
  if (const auto* f = std::get_if<FrailtyScaled>(&model.trend)) {
    auto s = [&](double t) {
      if (t <= 0.0) return 1.0;
      const double y = cumulative_hazard(f->base, model.age_x, t);
      return mixing_cdf(f->mix, *v / y) * jump_factor(t);
    };
    return adaptive_integrate([&](double t) { return pay.dg(t) * s(t); }, 0.0, kInf, 1e-11, 1e-11).value;
  }
  const double death = inverse_cumulative_hazard(as_base(model.trend), model.age_x, *v);
  if (!std::isfinite(death)) throw NumericalError("vitality is never exhausted: infinite death time");
  if (!jumps) return pay.g(death);
  return adaptive_integrate([&](double t) { return pay.dg(t) * jump_factor(t); }, 0.0, death, 1e-12, 1e-12).value;
}

// Diffusion without jumps: integrate g against the tangent density.
double expect_with_diffusion(const VitalityModel& model, const Payoff& pay, std::optional<double> v) {
  if (has_jumps(model.jump)) throw NoDensityRoute("jumps with diffusion: use a Monte Carlo mean of tau");
  if (is_frailty(model)) throw NoDensityRoute("frailty with diffusion has no density route");
  const BaseTrend base = as_base(model.trend);
  const double sigma = diffusion_sigma(model);
  const BoundaryFn boundary = boundary_from_trend(base, model.age_x);
  auto conditional = [&](double vi) {
    auto integrand = [&](double t) { return t > 0.0 ? pay.g(t) * tangent_density(boundary, sigma, vi, t) : 0.0; };
    const double mid = inverse_cumulative_hazard(base, model.age_x, vi);
    if (!std::isfinite(mid) || mid <= 0.0) return adaptive_integrate(integrand, 0.0, kInf, 1e-10, 1e-9).value;
    return adaptive_integrate(integrand, 0.0, mid, 1e-10, 1e-9).value +
           adaptive_integrate(integrand, mid, kInf, 1e-10, 1e-9).value;
  };
  if (v) {
    require(*v > 0.0, "conditional vitality must be positive");
    return conditional(*v);
  }
  return mix_over_initial(model.initial, conditional);
}

double expect(const VitalityModel& model, const Payoff& pay, std::optional<double> v) {
  validate(model);
  return has_diffusion(model) ? expect_with_diffusion(model, pay, v) : expect_without_diffusion(model, pay, v);
}

}  // namespace

double life_expectancy(const VitalityModel& model, std::optional<double> v) { return expect(model, lifetime(), v); }

double annuity_price(const VitalityModel& model, const PricingBasis& basis, std::optional<double> v) {
  validate(basis);
  return expect(model, annuity_payoff(basis.force_of_interest), v);
}

double insurance_price(const VitalityModel& model, const PricingBasis& basis, std::optional<double> v) {
  return 1.0 - basis.force_of_interest * annuity_price(model, basis, v);
}

BeliefGap belief_gap(double b, double c, double x) {
  require(b > 0.0 && c > 1.0 && std::isfinite(x), "belief_gap: need b > 0, c > 1");
  BeliefGap gap;
  const auto& rule = gauss_laguerre_cached(64);
  std::vector<double> terms(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) terms[i] = rule.weights[i] * gompertz_death_time(rule.nodes[i], x, b, c);
  gap.pop_le = pairwise_sum(terms);
  gap.avg_v_le = gompertz_death_time(1.0, x, b, c);
  gap.median_v_le = gompertz_death_time(std::log(2.0), x, b, c);
  if (!(gap.pop_le <= gap.avg_v_le)) throw NumericalError("belief_gap: Jensen inequality violated numerically");
  return gap;
}

void validate(const DisabilityQuery& query) {
  require(query.omega > 0.0 && std::isfinite(query.omega), "disability threshold must be positive");
  require(query.T >= 0.0 && std::isfinite(query.T), "disability horizon must be non-negative");
}

double healthy_stay_prob(const VitalityModel& model, const DisabilityQuery& query) {
  validate(model);
  validate(query);
  const auto* e = std::get_if<Exponential>(&model.initial);
  require(e != nullptr, "healthy_stay_prob needs an exponential initial vitality");
  require(!has_diffusion(model) && !has_jumps(model.jump), "healthy_stay_prob: diffusion and jumps not supported");
  require(!is_frailty(model), "healthy_stay_prob needs a deterministic trend");
  const double y = cumulative_hazard(model.trend, model.age_x, query.T);
  if (!query.threshold_density) return std::exp(-e->rate * y);
  // randomized threshold: ratio of mixed tail masses
  const auto& pi = query.threshold_density;
  const double num =
      adaptive_integrate([&](double w) { return pi(w) * std::exp(-e->rate * (w + y)); }, 0.0, kInf, 1e-13, 1e-11).value;
  const double den =
      adaptive_integrate([&](double w) { return pi(w) * std::exp(-e->rate * w); }, 0.0, kInf, 1e-13, 1e-11).value;
  require(den > 0.0, "healthy_stay_prob: threshold density has no mass");
  return num / den;
}

double joint_max_endpoint_density(double m, double w, double T, double delta, double sigma) {
  require(T > 0.0 && sigma > 0.0, "joint_max_endpoint_density: T and sigma must be positive");
  if (m < 0.0 || w > m) return 0.0;
  const double mu = delta / sigma;
  const double s = 2.0 * m - w;
  return 2.0 * s / (T * std::sqrt(2.0 * kPi * T)) * std::exp(mu * w - 0.5 * mu * mu * T - s * s / (2.0 * T));
}

namespace {

struct RecoverySetup {
  double delta;
  double sigma;
};

RecoverySetup recovery_setup(const VitalityModel& model, const DisabilityQuery& query) {
  validate(model);
  validate(query);
  const auto* rate = std::get_if<ConstantRate>(&model.trend);
  require(rate != nullptr, "recovery_prob needs a constant trend rate");
  require(has_diffusion(model), "recovery_prob needs a diffusion component");
  require(!has_jumps(model.jump), "recovery_prob does not support jumps");
  require(cdf(model.initial, query.omega) > 0.0, "recovery_prob: no initial mass below the threshold");
  return {rate->delta, diffusion_sigma(model)};
}

// Pr(max < a, end < b) for B(t) + mu t on [0, T], b <= a, a >= 0 (reflection principle).
double max_end_prob(double a, double b, double mu, double T) {
  if (a <= 0.0) return 0.0;
  const double rt = std::sqrt(T);
  return std::max(0.0, std::clamp(std_normal_cdf((b - mu * T) / rt) -
                                      std::exp(2.0 * mu * a) * std_normal_cdf((b - 2.0 * a - mu * T) / rt),
                                  0.0, 1.0));
}

// Same probability by integrating the joint density: m over [max(0, w), a], w over (-inf, b].
double max_end_prob_quadrature(double a, double b, double T, double delta, double sigma) {
  auto inner = [&](double w) {
    const double lo = std::max(0.0, w);
    if (lo >= a) return 0.0;
    return adaptive_integrate([&](double m) { return joint_max_endpoint_density(m, w, T, delta, sigma); }, lo, a,
                              1e-13, 1e-10)
        .value;
  };
  // w = b - u, u in [0, inf)
  return adaptive_integrate([&](double u) { return inner(b - u); }, 0.0, kInf, 1e-12, 1e-9).value;
}

}  // namespace

double recovery_prob(const VitalityModel& model, const DisabilityQuery& query, RecoveryForm form) {
  const auto [delta, sigma] = recovery_setup(model, query);
  const double omega = query.omega, T = query.T;
  if (T == 0.0) return 0.0;
  const double mu = delta / sigma;
  auto inner = [&](double v) {
    const double a = v / sigma, b = (v - omega) / sigma;
    return form == RecoveryForm::Conditional ? max_end_prob(a, b, mu, T)
                                             : max_end_prob_quadrature(a, b, T, delta, sigma);
  };
  double numerator;
  if (const auto* d = std::get_if<Degenerate>(&model.initial)) {
    numerator = d->v < omega ? inner(d->v) : 0.0;
  } else {
    auto integrand = [&](double v) { return v > 0.0 ? inner(v) * density(model.initial, v) : 0.0; };
    // at short horizons only a thin band below omega contributes
    const double band = std::clamp(omega - 12.0 * sigma * std::sqrt(T) - std::abs(delta) * T, 0.0, omega);
    numerator = adaptive_integrate(integrand, band, omega, 1e-14, 1e-10).value;
    if (band > 0.0) numerator += adaptive_integrate(integrand, 0.0, band, 1e-12, 1e-9).value;
  }
  if (form == RecoveryForm::Conditional) return numerator / cdf(model.initial, omega);
  const double tail = survival(model.initial, omega);
  if (tail <= 0.0) throw NumericalError("recovery_prob (printed form): 1 - F0(omega) is zero");
  return numerator / tail;
}

McEstimate recovery_prob_mc(const VitalityModel& model, const DisabilityQuery& query, const McConfig& cfg) {
  const auto [delta, sigma] = recovery_setup(model, query);
  require(cfg.n_paths >= 2, "recovery_prob_mc: need at least two paths");
  const double omega = query.omega, T = query.T;
  const double below = cdf(model.initial, omega);
  auto values = parallel_map(cfg.n_paths, [&](std::size_t i) {
    if (T == 0.0) return 0.0;
    const RngStream stream = cfg.rng.substream(i);
    Engine init(stream.substream(4));
    Engine grid(stream.substream(1));
    const auto* d = std::get_if<Degenerate>(&model.initial);
    const double v = d ? d->v : quantile(model.initial, init.uniform() * below);
    std::normal_distribution<double> normal;
    const double x = delta * T + sigma * std::sqrt(T) * normal(grid);  // Y(T) + W(T)
    const double end = v - x;
    if (end <= omega) return 0.0;
    return -std::expm1(-2.0 * v * end / (sigma * sigma * T));
  });
  return summarize_probability(values);
}

}  // namespace vitalkit
