#include "vitalkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <sstream>
#include <vector>

#include "vitalkit/errors.hpp"
#include "vitalkit/numerics.hpp"

namespace vitalkit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

double piecewise_value(const std::vector<double>& rates, double t) {
  if (t < 0.0) t = 0.0;
  const double idx = std::floor(t);
  const std::size_t i = idx >= static_cast<double>(rates.size() - 1)
                            ? rates.size() - 1
                            : static_cast<std::size_t>(idx);
  return rates[i];
}

double piecewise_integral(const std::vector<double>& rates, double T) {
  double total = 0.0;
  const std::size_t whole = static_cast<std::size_t>(std::floor(T));
  const std::size_t n = rates.size();
  for (std::size_t i = 0; i < std::min(whole, n); ++i) total += rates[i];
  if (whole >= n) {
    total += rates.back() * (T - static_cast<double>(n));
  } else {
    total += rates[whole] * (T - static_cast<double>(whole));
  }
  return total;
}

}  // namespace

void validate(const TrendSpec& trend) {
  auto check_base = overloaded{
      [](const ConstantRate& t) { require(positive(t.delta), "trend.delta must be positive"); },
      [](const PiecewiseConstant& t) {
        require(!t.rates.empty(), "trend.rates must be non-empty");
        for (double r : t.rates) require(positive(r), "trend.rates must be positive");
      },
      [](const GompertzTrend& t) {
        require(positive(t.b), "trend.b must be positive");
        require(std::isfinite(t.c) && t.c > 1.0, "trend.c must exceed 1");
      },
  };
  std::visit(overloaded{
                 [&](const FrailtyScaled& f) {
                   std::visit(check_base, f.base);
                   validate(f.mix);
                 },
                 [&](const auto& t) { check_base(t); },
             },
             trend);
}

void validate(const IntensitySpec& intensity) {
  std::visit(overloaded{
                 [](const ConstantIntensity& i) {
                   require(std::isfinite(i.lambda) && i.lambda >= 0.0, "jump.lambda must be non-negative");
                 },
                 [](const PiecewiseIntensity& i) {
                   require(!i.rates.empty(), "jump.rates must be non-empty");
                   for (double r : i.rates) require(std::isfinite(r) && r >= 0.0, "jump.rates must be non-negative");
                 },
             },
             intensity);
}

void validate(const VitalityModel& model) {
  require(std::isfinite(model.age_x) && model.age_x >= 0.0, "model.age must be non-negative");
  validate(model.initial);
  validate(model.trend);
  if (const auto* d = std::get_if<BrownianConst>(&model.diffusion)) {
    require(positive(d->sigma), "diffusion.sigma must be positive");
  }
  validate(model.jump.intensity);
  validate(model.jump.size);
}

std::string describe(const TrendSpec& trend) {
  std::ostringstream out;
  auto base = overloaded{
      [&](const ConstantRate& t) { out << "Constant(delta=" << t.delta << ")"; },
      [&](const PiecewiseConstant& t) { out << "Piecewise(n=" << t.rates.size() << ")"; },
      [&](const GompertzTrend& t) { out << "Gompertz(b=" << t.b << ", c=" << t.c << ")"; },
  };
  std::visit(overloaded{
                 [&](const FrailtyScaled& f) {
                   out << "Frailty[";
                   std::visit(base, f.base);
                   out << "]";
                 },
                 [&](const auto& t) { base(t); },
             },
             trend);
  return out.str();
}

BaseTrend as_base(const TrendSpec& trend) {
  return std::visit(overloaded{
                        [](const FrailtyScaled&) -> BaseTrend {
                          throw ValidationError("trend requires mixing over the frailty; use survival_static");
                        },
                        [](const auto& t) -> BaseTrend { return t; },
                    },
                    trend);
}

double trend_rate(const BaseTrend& trend, double age_x, double t) {
  return std::visit(overloaded{
                        [&](const ConstantRate& r) { return r.delta; },
                        [&](const PiecewiseConstant& r) { return piecewise_value(r.rates, t); },
                        [&](const GompertzTrend& r) { return r.b * std::pow(r.c, age_x + t); },
                    },
                    trend);
}

double trend_rate(const TrendSpec& trend, double age_x, double t) {
  return trend_rate(as_base(trend), age_x, t);
}

double cumulative_hazard(const BaseTrend& trend, double age_x, double T) {
  require(T >= 0.0, "cumulative_hazard: T must be non-negative");
  return std::visit(overloaded{
                        [&](const ConstantRate& r) { return r.delta * T; },
                        [&](const PiecewiseConstant& r) { return piecewise_integral(r.rates, T); },
                        [&](const GompertzTrend& r) {
                          const double lc = std::log(r.c);
                          return r.b * std::pow(r.c, age_x) * std::expm1(T * lc) / lc;
                        },
                    },
                    trend);
}

double cumulative_hazard(const TrendSpec& trend, double age_x, double T) {
  return cumulative_hazard(as_base(trend), age_x, T);
}

double inverse_cumulative_hazard(const BaseTrend& trend, double age_x, double y) {
  require(y >= 0.0, "inverse_cumulative_hazard: level must be non-negative");
  return std::visit(overloaded{
                        [&](const ConstantRate& r) { return y / r.delta; },
                        [&](const GompertzTrend& r) { return gompertz_death_time(y, age_x, r.b, r.c); },
                        [&](const PiecewiseConstant& r) {
                          double acc = 0.0;
                          for (std::size_t i = 0; i + 1 < r.rates.size(); ++i) {
                            if (acc + r.rates[i] >= y) return i + (y - acc) / r.rates[i];
                            acc += r.rates[i];
                          }
                          return static_cast<double>(r.rates.size() - 1) + (y - acc) / r.rates.back();
                        },
                    },
                    trend);
}

double intensity_at(const IntensitySpec& intensity, double t) {
  return std::visit(overloaded{
                        [&](const ConstantIntensity& i) { return i.lambda; },
                        [&](const PiecewiseIntensity& i) { return piecewise_value(i.rates, t); },
                    },
                    intensity);
}

double cumulative_intensity(const IntensitySpec& intensity, double T) {
  require(T >= 0.0, "cumulative_intensity: T must be non-negative");
  return std::visit(overloaded{
                        [&](const ConstantIntensity& i) { return i.lambda * T; },
                        [&](const PiecewiseIntensity& i) { return piecewise_integral(i.rates, T); },
                    },
                    intensity);
}

bool has_jumps(const JumpSpec& jump) {
  return std::visit(overloaded{
                        [](const ConstantIntensity& i) { return i.lambda > 0.0; },
                        [](const PiecewiseIntensity& i) {
                          return std::any_of(i.rates.begin(), i.rates.end(), [](double r) { return r > 0.0; });
                        },
                    },
                    jump.intensity);
}

bool has_diffusion(const VitalityModel& model) {
  return std::holds_alternative<BrownianConst>(model.diffusion);
}

double diffusion_sigma(const VitalityModel& model) {
  if (const auto* d = std::get_if<BrownianConst>(&model.diffusion)) return d->sigma;
  return 0.0;
}

std::string closed_form_case(const VitalityModel& model) {
  const bool jumps_ok = !has_jumps(model.jump) || is_fatal(model.jump.size);
  if (!jumps_ok) return {};
  const bool frailty = std::holds_alternative<FrailtyScaled>(model.trend);
  if (!has_diffusion(model)) {
    if (!frailty) return "pure-trend";
    if (std::holds_alternative<Exponential>(model.initial)) return "frailty-exponential";
    if (std::holds_alternative<Degenerate>(model.initial)) return "frailty-degenerate";
    return {};
  }
  if (std::holds_alternative<ConstantRate>(model.trend)) return "drifted-brownian";
  return {};
}

double drifted_bm_survival(double v, double delta, double sigma, double T) {
  if (v <= 0.0) return 0.0;
  if (T <= 0.0) return 1.0;
  const double s = sigma * std::sqrt(T);
  const double d1 = (v - delta * T) / s;
  const double a = (v + delta * T) / s;
  // Phi(d1) - e^{2 delta v / sigma^2} Phi(-a), rewritten to avoid overflow
  const double value = std_normal_cdf(d1) - std_normal_pdf(d1) * mills_ratio(a);
  return std::clamp(value, 0.0, 1.0);
}

namespace {

// `width` is the scale over which p climbs from 0 to 1; Laguerre nodes are too
// sparse to resolve a step much narrower than the mean of the exponential.
double mix_over_initial(const InitialVitalityDist& initial, const std::function<double(double)>& p,
                        double width, double center) {
  return std::visit(
      overloaded{
          [&](const Degenerate& d) { return p(d.v); },
          [&](const Exponential& d) {
            if (width * d.rate < 1.0) {
              auto weighted = [&](double v) { return p(v) * d.rate * std::exp(-d.rate * v); };
              return adaptive_integrate(weighted, 0.0, center, 1e-13, 1e-10).value +
                     adaptive_integrate(weighted, center, std::numeric_limits<double>::infinity(), 1e-13, 1e-10)
                         .value;
            }
            const auto& rule = gauss_laguerre_cached(64);
            return integrate(rule, [&](double u) { return p(u / d.rate); });
          },
          [&](const auto&) {
            constexpr double kTail = 1e-10;
            const double lo = quantile(initial, kTail);
            const double hi = quantile(initial, 1.0 - kTail);
            // break points around the step of p so each piece is smooth
            std::vector<double> cuts{lo};
            for (double k : {-8.0, 0.0, 8.0}) {
              const double x = center + k * width;
              if (x > cuts.back() && x < hi) cuts.push_back(x);
            }
            cuts.push_back(hi);
            double body = 0.0;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
              body += adaptive_integrate([&](double v) { return p(v) * density(initial, v); }, cuts[i], cuts[i + 1],
                                         1e-13, 1e-10)
                          .value;
            // p -> 1 above the upper quantile, p -> 0 below the lower one
            return body + kTail * p(hi);
          },
      },
      initial);
}

}  // namespace

double survival_static(const VitalityModel& model, double T) {
  validate(model);
  require(T >= 0.0, "survival_static: T must be non-negative");
  if (T == 0.0) return 1.0;
  const std::string route = closed_form_case(model);
  if (route.empty()) {
    throw NoClosedFormError("no closed form for this model; use Monte Carlo or Laplace inversion");
  }
  const double jump_factor = has_jumps(model.jump) ? std::exp(-cumulative_intensity(model.jump.intensity, T)) : 1.0;

  if (route == "pure-trend") {
    return survival(model.initial, cumulative_hazard(model.trend, model.age_x, T)) * jump_factor;
  }
  if (route == "frailty-exponential" || route == "frailty-degenerate") {
    const auto& f = std::get<FrailtyScaled>(model.trend);
    const double lambda = cumulative_hazard(f.base, model.age_x, T);
    if (route == "frailty-exponential") {
      const double rate = std::get<Exponential>(model.initial).rate;
      return mixing_laplace(f.mix, rate * lambda) * jump_factor;
    }
    const double v = std::get<Degenerate>(model.initial).v;
    return mixing_cdf(f.mix, v / lambda) * jump_factor;
  }
  // drifted Brownian motion with fatal jumps
  const double delta = std::get<ConstantRate>(model.trend).delta;
  const double sigma = std::get<BrownianConst>(model.diffusion).sigma;
  const double mixed =
      mix_over_initial(model.initial, [&](double v) { return drifted_bm_survival(v, delta, sigma, T); },
                       sigma * std::sqrt(T), delta * T);
  return std::clamp(mixed, 0.0, 1.0) * jump_factor;
}

double gompertz_death_time(double v, double age_x, double b, double c) {
  require(v > 0.0, "gompertz_death_time: v must be positive");
  require(b > 0.0 && c > 1.0, "gompertz_death_time: need b > 0 and c > 1");
  const double lc = std::log(c);
  return std::log1p(v * lc / (b * std::pow(c, age_x))) / lc;
}

TransformDescription exp_transform(const VitalityModel& model) {
  TransformDescription out;
  out.threshold = 1.0;
  out.note = "death time unchanged: exp(V(t)) reaches 1 exactly when V(t) reaches 0";
  std::ostringstream name;
  std::visit(overloaded{
                 [&](const Exponential& d) {
                   name << "Pareto(shape=" << d.rate << ", location=scale=1), threshold 1";
                 },
                 [&](const GompertzDist& d) {
                   name << "inverse Weibull (log-Gompertz), same shape " << d.shape << " and scale 1";
                 },
                 [&](const Degenerate& d) { name << "Degenerate(" << std::exp(d.v) << ")"; },
                 [&](const ParetoII& d) {
                   name << "log-ParetoII(shape=" << d.shape << ", scale=" << d.scale << ") on [1, inf)";
                 },
             },
             model.initial);
  out.initial = name.str();
  return out;
}

}  // namespace vitalkit
