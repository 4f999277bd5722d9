#include "vitalkit/dynamic.hpp"

#include <cmath>
#include <random>

#include "vitalkit/errors.hpp"
#include "vitalkit/numerics.hpp"
#include "vitalkit/parallel.hpp"

namespace vitalkit {

void validate(const DynamicGompertzParams& p) {
  require(std::isfinite(p.b0) && p.b0 > 0.0, "dynamic.b0 must be positive");
  require(std::isfinite(p.c0) && p.c0 > 1.0, "dynamic.c0 must exceed 1");
  require(std::isfinite(p.mu_b) && std::isfinite(p.mu_c), "dynamic drifts must be finite");
  require(p.sigma_b >= 0.0 && p.sigma_c >= 0.0, "dynamic volatilities must be non-negative");
  require(std::abs(p.rho) <= 1.0, "dynamic.rho must lie in [-1, 1]");
}

namespace {

void validate_gamma(const GammaRate& g) {
  require(std::isfinite(g.mu_gamma), "cohort.mu_gamma must be finite");
  require(g.sigma_gamma >= 0.0, "cohort.sigma_gamma must be non-negative");
  require(std::isfinite(g.birth_year), "cohort.birth_year must be finite");
}

struct CohortScaling {
  double rate = 1.0;         // rate of the exponential initial vitality
  double trend_scale = 1.0;  // Y is multiplied by this
};

CohortScaling cohort_scaling(const CohortSpec& cohort, double age_x, Engine& engine) {
  if (std::holds_alternative<NoCohort>(cohort)) return {};
  if (const auto* g = std::get_if<GammaRate>(&cohort)) return {sample_cohort_rate(*g, engine), 1.0};
  if (const auto* a = std::get_if<AgeScaled>(&cohort)) {
    const double ax = std::pow(a->a, age_x);
    return {sample_cohort_rate(a->gamma, engine) * ax, 1.0 / ax};
  }
  const auto& p = std::get<PowerDecay>(cohort);
  return {std::pow(sample_cohort_rate(p.gamma, engine), p.x_c - age_x), 1.0};
}

// Y(T) only, without storing the path.
double terminal_hazard(const DynamicGompertzParams& p, double age_x, double T, double dt, Engine& engine) {
  std::normal_distribution<double> normal;
  const double shared = std::sqrt(1.0 - p.rho * p.rho);
  double ln_b = std::log(p.b0);
  double ln_c = std::log(p.c0);
  double t = 0.0;
  double y = 0.0;
  double rate_prev = std::exp(ln_b + age_x * ln_c);
  while (t < T - 1e-12) {
    const double h = std::min(dt, T - t);
    const double z_c = normal(engine);
    const double z_b = normal(engine);
    const double sq = std::sqrt(h);
    ln_c += p.mu_c * h + p.sigma_c * sq * z_c;
    ln_b += p.mu_b * h + p.sigma_b * sq * (shared * z_b + p.rho * z_c);
    t += h;
    const double rate = std::exp(ln_b + (age_x + t) * ln_c);
    y += 0.5 * h * (rate_prev + rate);
    rate_prev = rate;
  }
  return y;
}

}  // namespace

void validate(const CohortSpec& cohort, double age_x) {
  if (const auto* g = std::get_if<GammaRate>(&cohort)) validate_gamma(*g);
  if (const auto* a = std::get_if<AgeScaled>(&cohort)) {
    require(a->a > 1.0, "cohort.a must exceed 1");
    validate_gamma(a->gamma);
  }
  if (const auto* p = std::get_if<PowerDecay>(&cohort)) {
    require(p->x_c > age_x, "cohort.x_c must exceed the age");
    validate_gamma(p->gamma);
  }
}

double sample_cohort_rate(const GammaRate& g, Engine& engine) {
  if (g.sigma_gamma == 0.0) return std::exp(g.mu_gamma * g.birth_year);
  std::normal_distribution<double> normal;
  const double y = g.birth_year;
  return std::exp((g.mu_gamma - 0.5 * g.sigma_gamma * g.sigma_gamma) * y +
                  g.sigma_gamma * std::sqrt(std::abs(y)) * normal(engine));
}

TrendPath simulate_trend_path(const DynamicGompertzParams& p, double age_x, double T, double dt,
                              const RngStream& rng) {
  validate(p);
  require(T > 0.0, "simulate_trend_path: T must be positive");
  require(dt > 0.0 && dt <= 1.0 / 12.0 + 1e-15, "simulate_trend_path: dt must lie in (0, 1/12]");
  Engine engine(rng);
  std::normal_distribution<double> normal;
  const double shared = std::sqrt(1.0 - p.rho * p.rho);
  TrendPath path;
  path.times.push_back(0.0);
  path.ln_b.push_back(std::log(p.b0));
  path.ln_c.push_back(std::log(p.c0));
  path.Y_values.push_back(0.0);
  double t = 0.0;
  while (t < T - 1e-12) {
    const double h = std::min(dt, T - t);
    const double z_c = normal(engine);
    const double z_b = normal(engine);
    const double sq = std::sqrt(h);
    const double ln_c = path.ln_c.back() + p.mu_c * h + p.sigma_c * sq * z_c;
    const double ln_b = path.ln_b.back() + p.mu_b * h + p.sigma_b * sq * (shared * z_b + p.rho * z_c);
    const double rate_prev = std::exp(path.ln_b.back() + (age_x + t) * path.ln_c.back());
    t += h;
    const double rate = std::exp(ln_b + (age_x + t) * ln_c);
    path.times.push_back(t);
    path.ln_b.push_back(ln_b);
    path.ln_c.push_back(ln_c);
    path.Y_values.push_back(path.Y_values.back() + 0.5 * h * (rate_prev + rate));
  }
  path.times.back() = T;
  return path;
}

std::vector<double> simulate_terminal_hazard(const DynamicGompertzParams& params, double age_x, double T,
                                             const DynamicOptions& options) {
  validate(params);
  require(options.dt > 0.0 && options.dt <= 1.0 / 12.0 + 1e-15, "dynamic: dt must lie in (0, 1/12]");
  require(options.n_paths >= 1, "dynamic: n_paths must be positive");
  if (T == 0.0) return std::vector<double>(options.n_paths, 0.0);
  return parallel_map(options.n_paths, [&](std::size_t i) {
    Engine engine(options.rng.substream(i).substream(0));
    return terminal_hazard(params, age_x, T, options.dt, engine);
  });
}

McEstimate survival_dynamic(const DynamicGompertzParams& params, const CohortSpec& cohort, double age_x, double T,
                            const DynamicOptions& options) {
  validate(params);
  validate(cohort, age_x);
  require(T >= 0.0, "survival_dynamic: T must be non-negative");
  if (T == 0.0) return {1.0, 0.0, options.n_paths};
  const auto hazards = simulate_terminal_hazard(params, age_x, T, options);
  std::vector<double> values(options.n_paths);
  parallel_for(options.n_paths, [&](std::size_t i) {
    Engine cohort_engine(options.rng.substream(i).substream(1));
    const CohortScaling scaling = cohort_scaling(cohort, age_x, cohort_engine);
    const double y = hazards[i] * scaling.trend_scale;
    if (options.estimator == DynamicEstimator::Conditional) {
      values[i] = std::exp(-scaling.rate * y);
    } else {
      Engine init_engine(options.rng.substream(i).substream(2));
      const double v0 = -std::log(init_engine.uniform()) / scaling.rate;
      values[i] = v0 > y ? 1.0 : 0.0;
    }
  });
  return summarize_probability(values);
}

LognormalFit lognormal_approx_survival(const DynamicGompertzParams& params, double age_x, double T,
                                       const DynamicOptions& options) {
  require(T >= 0.0, "lognormal_approx_survival: T must be non-negative");
  LognormalFit fit;
  if (T == 0.0) return fit;
  const auto hazards = simulate_terminal_hazard(params, age_x, T, options);
  // Welford in index order: deterministic regardless of worker count
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < hazards.size(); ++i) {
    const double delta = hazards[i] - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (hazards[i] - mean);
  }
  const double var = hazards.size() > 1 ? m2 / static_cast<double>(hazards.size() - 1) : 0.0;
  if (var < 0.0) throw NumericalError("lognormal_approx_survival: negative variance estimate");
  require(mean > 0.0, "lognormal_approx_survival: Y(T) must have positive mean");
  fit.s = std::sqrt(std::log1p(var / (mean * mean)));
  fit.m = std::log(mean) - 0.5 * fit.s * fit.s;
  if (fit.s == 0.0) {
    fit.survival = std::exp(-mean);
    return fit;
  }
  static const QuadratureRule rule = gauss_legendre(64, -12.0, 12.0);
  fit.survival = integrate(rule, [&](double z) { return std_normal_pdf(z) * std::exp(-std::exp(fit.m + fit.s * z)); });
  return fit;
}

McEstimate survival_dynamic_with_jumps(const DynamicGompertzParams& params, double age_x, double T,
                                       const JumpSpec& jump, const DynamicOptions& options) {
  validate(jump.intensity);
  validate(jump.size);
  const McEstimate base = survival_dynamic(params, NoCohort{}, age_x, T, options);
  if (!has_jumps(jump) || T == 0.0) return base;
  const double total = cumulative_intensity(jump.intensity, T);
  double factor;
  if (is_fatal(jump.size)) {
    factor = std::exp(-total);
  } else if (std::holds_alternative<ExponentialJump>(jump.size)) {
    // Given Y(T) = u, V(0) - u is again Exp(1) on {V(0) > u}, so the jump term
    // int_0^inf Pr(J(T) <= w) e^{-w} dw does not depend on the path.
    const auto& rule = gauss_laguerre_cached(64);
    factor = 0.0;
    double poisson = std::exp(-total);
    // stop once past the Poisson mode and the weights are negligible
    for (int k = 0; k < 100000 && (k <= total || poisson > 1e-17); ++k) {
      const double inner =
          k == 0 ? 1.0 : integrate(rule, [&](double w) { return mixture_exponential_convolution_cdf(jump.size, k, w); });
      factor += poisson * inner;
      poisson *= total / (k + 1.0);
    }
  } else {
    throw ValidationError("survival_dynamic_with_jumps: jump sizes must be fatal or exponential");
  }
  return {base.value * factor, base.std_error * factor, base.n_effective};
}

CbdLink cbd_reparameterization(double kappa1, double kappa2, double x_bar) {
  CbdLink link;
  link.b = std::exp(kappa1 - kappa2 * x_bar);
  link.c = std::exp(kappa2);
  link.degenerate = !(link.c > 1.0);
  return link;
}

CbdLink m6_reparameterization(double kappa1, double kappa2, double gamma, double x_bar) {
  CbdLink link = cbd_reparameterization(kappa1, kappa2, x_bar);
  link.gamma_rate = std::exp(gamma);
  return link;
}

CbdFactors cbd_inverse(const CbdLink& link, double x_bar) {
  require(link.b > 0.0 && link.c > 0.0 && link.gamma_rate > 0.0, "cbd_inverse: parameters must be positive");
  CbdFactors f;
  f.kappa2 = std::log(link.c);
  f.kappa1 = std::log(link.b) + f.kappa2 * x_bar;
  f.gamma = std::log(link.gamma_rate);
  return f;
}

}  // namespace vitalkit
