#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vitalkit/model.hpp"
#include "vitalkit/montecarlo.hpp"

namespace vitalkit {

struct CohortData {
  int age_x = 60;
  std::int64_t exposure = 0;
  std::vector<std::int64_t> deaths;  // deaths[t] at age x + t, t = 0..T_max
};

struct AccidentBand {
  int age_lo = 0;
  int age_hi = 0;
  double rate = 0.0;
};

struct AccidentRateTable {
  std::vector<AccidentBand> rows;
};

void validate(const CohortData& data);
void validate(const AccidentRateTable& table);

// `age,deaths` rows plus a `# exposure=<n> start_age=<x>` line.
CohortData load_cohort_csv(const std::string& path);
// `age_lo,age_hi,rate` rows.
AccidentRateTable load_accident_csv(const std::string& path);

struct LikelihoodOptions {
  bool censoring_cell = true;  // survivors past T_max form a final cell
};

struct LogLikelihood {
  double value = 0.0;     // including the multinomial constant
  double constant = 0.0;  // ln E! - sum ln D! (- ln survivors! with the censoring cell)
  bool floored = false;   // some cell probability was below 1e-300
};

// survival[t] = Pr(tau > t) for t = 0..T_max+1.
LogLikelihood log_likelihood(const std::vector<double>& survival, const CohortData& data,
                             const LikelihoodOptions& options = {});

// Evaluation strategy: survival values at integer horizons 0..k_max.
using SurvivalFn = std::function<std::vector<double>(const VitalityModel&, int k_max)>;

LogLikelihood log_likelihood(const VitalityModel& model, const CohortData& data, const SurvivalFn& survival_fn,
                             const LikelihoodOptions& options = {});

// Closed-form survival curve (survival_static at each integer horizon).
SurvivalFn static_survival_fn();
// Integer-age simulation with V(0) stratified over the initial law; fixed cfg gives common random numbers.
SurvivalFn piecewise_survival_fn(const McConfig& cfg);

// Rates for elapsed years 0..n_years-1 from the band containing age x + t.
// A boundary age shared by two bands goes to the lower band.
PiecewiseIntensity calibrate_jump_intensity(const AccidentRateTable& table, int age_x, int n_years);

struct FreeParams {
  bool b = true;
  bool c = true;
  bool sigma = true;
};

struct FitOptions {
  int starts = 5;
  double tolerance = 1e-6;  // simplex size in transformed coordinates
  int max_iterations = 2000;
  McConfig mc{10000, 0, RngStream{}, false, JumpTimeMethod::OrderStatistics};
  LikelihoodOptions likelihood{};
  bool std_errors = false;
};

struct FitResult {
  std::map<std::string, double> params;
  double loglik = 0.0;
  double loglik_constant = 0.0;
  int n_iterations = 0;
  bool converged = false;
  bool boundary = false;  // estimate pinned at the edge of the parameter space
  std::optional<std::map<std::string, double>> std_errors;
};

// Maximum likelihood over the free subset of (b, c, sigma) with the template's
// Gompertz trend; the jump intensity is held at `fixed_intensity` (fatal jumps).
FitResult fit_mle(const VitalityModel& model_template, const FreeParams& free, const CohortData& data,
                  const IntensitySpec& fixed_intensity, const FitOptions& options = {});

// Gompertz law: V(0) ~ Exp(1), Gompertz trend, no diffusion or jumps.
FitResult fit_gompertz_law(const CohortData& data, const FitOptions& options = {});

// Multinomial death counts from survival[0..T_max+1].
CohortData simulate_cohort(const std::vector<double>& survival, int age_x, std::int64_t exposure, RngStream rng);

std::string to_json(const FitResult& fit);

}  // namespace vitalkit
