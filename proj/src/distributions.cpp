#include "vitalkit/distributions.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

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

}  // namespace

void validate(const InitialVitalityDist& dist) {
  std::visit(overloaded{
                 [](const Exponential& d) { require(positive(d.rate), "initial.rate must be positive"); },
                 [](const ParetoII& d) {
                   require(positive(d.shape), "initial.shape must be positive");
                   require(positive(d.scale), "initial.scale must be positive");
                 },
                 [](const GompertzDist& d) { require(positive(d.shape), "initial.shape must be positive"); },
                 [](const Degenerate& d) { require(positive(d.v), "initial.v must be positive"); },
             },
             dist);
}

void validate(const JumpSizeDist& dist) {
  std::visit(overloaded{
                 [](const Fatal&) {},
                 [](const ExponentialJump& d) { require(positive(d.rate), "jump.rate must be positive"); },
                 [](const MixtureExponential& d) {
                   require(!d.weights.empty(), "jump.weights must be non-empty");
                   require(d.weights.size() == d.rates.size(), "jump.weights and jump.rates differ in length");
                   double total = 0.0;
                   for (std::size_t i = 0; i < d.weights.size(); ++i) {
                     require(d.weights[i] >= 0.0 && d.weights[i] <= 1.0, "jump.weights must be probabilities");
                     require(positive(d.rates[i]), "jump.rates must be positive");
                     total += d.weights[i];
                   }
                   require(std::abs(total - 1.0) <= 1e-12, "jump.weights must sum to 1");
                 },
                 [](const NormalJump& d) {
                   require(std::isfinite(d.mean), "jump.mean must be finite");
                   require(positive(d.sd), "jump.sd must be positive");
                 },
             },
             dist);
}

void validate(const MixingDist& dist) {
  std::visit(overloaded{
                 [](const GammaMix& d) {
                   require(positive(d.shape), "mix.shape must be positive");
                   require(positive(d.rate), "mix.rate must be positive");
                 },
                 [](const DagumMix& d) {
                   require(positive(d.p) && positive(d.a) && positive(d.b),
                           "mix.p, mix.a and mix.b must be positive");
                 },
             },
             dist);
}

std::string describe(const InitialVitalityDist& dist) {
  std::ostringstream out;
  std::visit(overloaded{
                 [&](const Exponential& d) { out << "Exponential(rate=" << d.rate << ")"; },
                 [&](const ParetoII& d) { out << "ParetoII(shape=" << d.shape << ", scale=" << d.scale << ")"; },
                 [&](const GompertzDist& d) { out << "Gompertz(shape=" << d.shape << ")"; },
                 [&](const Degenerate& d) { out << "Degenerate(" << d.v << ")"; },
             },
             dist);
  return out.str();
}

std::string describe(const JumpSizeDist& dist) {
  std::ostringstream out;
  std::visit(overloaded{
                 [&](const Fatal&) { out << "Fatal"; },
                 [&](const ExponentialJump& d) { out << "Exponential(rate=" << d.rate << ")"; },
                 [&](const MixtureExponential& d) { out << "MixtureExponential(n=" << d.rates.size() << ")"; },
                 [&](const NormalJump& d) { out << "Normal(mean=" << d.mean << ", sd=" << d.sd << ")"; },
             },
             dist);
  return out.str();
}

double survival(const InitialVitalityDist& dist, double v) {
  require(v >= 0.0, "survival: v must be non-negative");
  return std::visit(overloaded{
                        [&](const Exponential& d) { return std::exp(-d.rate * v); },
                        [&](const ParetoII& d) { return std::pow(1.0 + v / d.scale, -d.shape); },
                        [&](const GompertzDist& d) { return std::exp(-d.shape * std::expm1(v)); },
                        [&](const Degenerate& d) { return v < d.v ? 1.0 : 0.0; },
                    },
                    dist);
}

double cdf(const InitialVitalityDist& dist, double v) {
  require(v >= 0.0, "cdf: v must be non-negative");
  return std::visit(overloaded{
                        [&](const Exponential& d) { return -std::expm1(-d.rate * v); },
                        [&](const ParetoII& d) { return -std::expm1(-d.shape * std::log1p(v / d.scale)); },
                        [&](const GompertzDist& d) { return -std::expm1(-d.shape * std::expm1(v)); },
                        [&](const Degenerate& d) { return v < d.v ? 0.0 : 1.0; },
                    },
                    dist);
}

double density(const InitialVitalityDist& dist, double v) {
  require(v >= 0.0, "density: v must be non-negative");
  return std::visit(
      overloaded{
          [&](const Exponential& d) { return d.rate * std::exp(-d.rate * v); },
          [&](const ParetoII& d) { return d.shape / d.scale * std::pow(1.0 + v / d.scale, -d.shape - 1.0); },
          [&](const GompertzDist& d) { return d.shape * std::exp(v - d.shape * std::expm1(v)); },
          [&](const Degenerate&) -> double { throw ValidationError("density: Degenerate has no density"); },
      },
      dist);
}

double quantile(const InitialVitalityDist& dist, double p) {
  require(p > 0.0 && p < 1.0, "quantile: p must lie in (0, 1)");
  return std::visit(overloaded{
                        [&](const Exponential& d) { return -std::log1p(-p) / d.rate; },
                        [&](const ParetoII& d) { return d.scale * std::expm1(-std::log1p(-p) / d.shape); },
                        [&](const GompertzDist& d) { return std::log1p(-std::log1p(-p) / d.shape); },
                        [&](const Degenerate& d) { return d.v; },
                    },
                    dist);
}

double sample(const InitialVitalityDist& dist, Engine& engine) {
  if (const auto* d = std::get_if<Degenerate>(&dist)) return d->v;
  return quantile(dist, engine.uniform());
}

double mean(const InitialVitalityDist& dist) {
  return std::visit(overloaded{
                        [](const Exponential& d) { return 1.0 / d.rate; },
                        [](const ParetoII& d) {
                          return d.shape > 1.0 ? d.scale / (d.shape - 1.0)
                                               : std::numeric_limits<double>::infinity();
                        },
                        [](const GompertzDist& d) {
                          // E[V] = e^eta E_1(eta)
                          return adaptive_integrate(
                                     [&](double v) { return std::exp(-d.shape * std::expm1(v)); }, 0.0,
                                     std::numeric_limits<double>::infinity())
                              .value;
                        },
                        [](const Degenerate& d) { return d.v; },
                    },
                    dist);
}

double sample_jump(const JumpSizeDist& dist, Engine& engine) {
  return std::visit(overloaded{
                        [](const Fatal&) { return std::numeric_limits<double>::infinity(); },
                        [&](const ExponentialJump& d) { return -std::log(engine.uniform()) / d.rate; },
                        [&](const MixtureExponential& d) {
                          const double u = engine.uniform();
                          double acc = 0.0;
                          std::size_t pick = d.rates.size() - 1;
                          for (std::size_t i = 0; i < d.weights.size(); ++i) {
                            acc += d.weights[i];
                            if (u < acc) {
                              pick = i;
                              break;
                            }
                          }
                          return -std::log(engine.uniform()) / d.rates[pick];
                        },
                        [&](const NormalJump& d) {
                          std::normal_distribution<double> normal(d.mean, d.sd);
                          return normal(engine);
                        },
                    },
                    dist);
}

double jump_mean(const JumpSizeDist& dist) {
  return std::visit(overloaded{
                        [](const Fatal&) { return std::numeric_limits<double>::infinity(); },
                        [](const ExponentialJump& d) { return 1.0 / d.rate; },
                        [](const MixtureExponential& d) {
                          double m = 0.0;
                          for (std::size_t i = 0; i < d.rates.size(); ++i) m += d.weights[i] / d.rates[i];
                          return m;
                        },
                        [](const NormalJump& d) { return d.mean; },
                    },
                    dist);
}

bool is_fatal(const JumpSizeDist& dist) { return std::holds_alternative<Fatal>(dist); }

double mixing_cdf(const MixingDist& dist, double z) {
  if (z <= 0.0) return 0.0;
  return std::visit(overloaded{
                        [&](const GammaMix& d) { return boost::math::gamma_p(d.shape, d.rate * z); },
                        [&](const DagumMix& d) { return std::pow(1.0 + std::pow(z / d.b, -d.a), -d.p); },
                    },
                    dist);
}

double mixing_sample(const MixingDist& dist, Engine& engine) {
  return std::visit(overloaded{
                        [&](const GammaMix& d) {
                          std::gamma_distribution<double> gamma(d.shape, 1.0 / d.rate);
                          return gamma(engine);
                        },
                        [&](const DagumMix& d) {
                          const double u = engine.uniform();
                          return d.b * std::pow(std::pow(u, -1.0 / d.p) - 1.0, -1.0 / d.a);
                        },
                    },
                    dist);
}

double mixing_laplace(const MixingDist& dist, double s) {
  require(s >= 0.0, "mixing_laplace: s must be non-negative");
  if (s == 0.0) return 1.0;
  return std::visit(overloaded{
                        [&](const GammaMix& d) { return std::pow(1.0 + s / d.rate, -d.shape); },
                        [&](const DagumMix& d) {
                          // E[e^{-sZ}] = int_0^inf e^{-u} F(u/s) du
                          return adaptive_integrate(
                                     [&](double u) {
                                       return std::exp(-u) * mixing_cdf(MixingDist{d}, u / s);
                                     },
                                     0.0, std::numeric_limits<double>::infinity(), 1e-13, 1e-12)
                              .value;
                        },
                    },
                    dist);
}

double mixture_exponential_convolution_cdf(const JumpSizeDist& dist, int n, double z) {
  const auto* d = std::get_if<ExponentialJump>(&dist);
  if (d == nullptr) {
    throw ValidationError("convolution cdf: closed form only for a single exponential jump size");
  }
  require(n >= 0, "convolution cdf: n must be non-negative");
  require(z >= 0.0, "convolution cdf: z must be non-negative");
  if (n == 0) return 1.0;
  const double x = d->rate * z;
  if (x == 0.0) return 0.0;
  // Poisson(x) tail Pr(N >= n); sum whichever side avoids cancellation.
  auto log_term = [&](int i) { return -x + i * std::log(x) - std::lgamma(i + 1.0); };
  if (x < n) {
    double sum = 0.0;
    for (int i = n; i < n + 2000; ++i) {
      const double term = std::exp(log_term(i));
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return std::min(1.0, sum);
  }
  double lower = 0.0;
  for (int i = 0; i < n; ++i) lower += std::exp(log_term(i));
  return std::max(0.0, 1.0 - lower);
}

}  // namespace vitalkit
