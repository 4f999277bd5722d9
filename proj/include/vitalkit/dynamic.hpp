#pragma once

#include <variant>
#include <vector>

#include "vitalkit/model.hpp"
#include "vitalkit/montecarlo.hpp"
#include "vitalkit/rng.hpp"

namespace vitalkit {

// ln b and ln c follow correlated Brownian motions with drift.
struct DynamicGompertzParams {
  double b0 = 0.0001744;
  double c0 = 1.082;
  double mu_b = 0.0;
  double mu_c = 0.0;
  double sigma_b = 0.0;
  double sigma_c = 0.0;
  double rho = 0.0;
};

// Cohort rate Gamma(y): geometric Brownian motion in birth year with Gamma(0) = 1.
struct GammaRate {
  double mu_gamma = 0.0;
  double sigma_gamma = 0.0;
  double birth_year = 0.0;
};
struct NoCohort {};
// V(0) ~ Exp(Gamma a^x) with the trend divided by a^x.
struct AgeScaled {
  double a = 1.1;
  GammaRate gamma;
};
// V(0) ~ Exp(Gamma^{x_c - x}).
struct PowerDecay {
  double x_c = 100.0;
  GammaRate gamma;
};

using CohortSpec = std::variant<NoCohort, GammaRate, AgeScaled, PowerDecay>;

struct TrendPath {
  std::vector<double> times;
  std::vector<double> ln_b;
  std::vector<double> ln_c;
  std::vector<double> Y_values;
};

void validate(const DynamicGompertzParams& params);
void validate(const CohortSpec& cohort, double age_x);

// Exact Gaussian steps of length dt (last step shortened to land on T); Y by the
// trapezoid rule. Paths for different T from the same stream share their prefix.
TrendPath simulate_trend_path(const DynamicGompertzParams& params, double age_x, double T, double dt,
                              const RngStream& rng);

// Gamma(y) for one draw; exactly 1 when mu and sigma are zero.
double sample_cohort_rate(const GammaRate& gamma, Engine& engine);

enum class DynamicEstimator {
  Conditional,  // average exp(-rate Y(T))
  Explicit,     // draw V(0) ~ Exp(rate) and average 1{V(0) > Y(T)}
};

struct DynamicOptions {
  std::size_t n_paths = 10000;
  double dt = 1.0 / 12.0;
  RngStream rng{};
  DynamicEstimator estimator = DynamicEstimator::Conditional;
};

McEstimate survival_dynamic(const DynamicGompertzParams& params, const CohortSpec& cohort, double age_x, double T,
                            const DynamicOptions& options);

// Simulated Y(T) values, one per path, for moment matching and diagnostics.
std::vector<double> simulate_terminal_hazard(const DynamicGompertzParams& params, double age_x, double T,
                                             const DynamicOptions& options);

struct LognormalFit {
  double survival = 1.0;
  double m = 0.0;  // log-scale location
  double s = 0.0;  // log-scale spread; 0 means a point mass at exp(m)
};

// Matches a log-normal to the simulated first two moments of Y(T) and returns E[exp(-Y)].
LognormalFit lognormal_approx_survival(const DynamicGompertzParams& params, double age_x, double T,
                                       const DynamicOptions& options);

// Exp(1) initial vitality, dynamic trend and compound Poisson jumps (fatal or exponential).
McEstimate survival_dynamic_with_jumps(const DynamicGompertzParams& params, double age_x, double T,
                                       const JumpSpec& jump, const DynamicOptions& options);

struct CbdLink {
  double b = 1.0;
  double c = 1.0;
  double gamma_rate = 1.0;
  bool degenerate = false;  // c <= 1: depletion rate does not increase with age
};

CbdLink cbd_reparameterization(double kappa1, double kappa2, double x_bar);
CbdLink m6_reparameterization(double kappa1, double kappa2, double gamma, double x_bar);

struct CbdFactors {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double gamma = 0.0;
};
CbdFactors cbd_inverse(const CbdLink& link, double x_bar);

}  // namespace vitalkit
