#pragma once

#include <string>
#include <variant>
#include <vector>

#include "vitalkit/distributions.hpp"

namespace vitalkit {

// --- trend Y(t) -----------------------------------------------------------

struct ConstantRate {
  double delta = 0.05;
};
// rates[i] applies on elapsed years [i, i+1); the last rate continues past the list.
struct PiecewiseConstant {
  std::vector<double> rates;
};
// mu(t) = b c^{x+t}
struct GompertzTrend {
  double b = 0.0001744;
  double c = 1.082;
};

using BaseTrend = std::variant<ConstantRate, PiecewiseConstant, GompertzTrend>;

// dY = Z mu(t) dt with a random multiplier Z drawn once per individual.
struct FrailtyScaled {
  BaseTrend base;
  MixingDist mix;
};

using TrendSpec = std::variant<ConstantRate, PiecewiseConstant, GompertzTrend, FrailtyScaled>;

// --- diffusion W(t) -------------------------------------------------------

struct NoDiffusion {};
struct BrownianConst {
  double sigma = 0.1;
};

using DiffusionSpec = std::variant<NoDiffusion, BrownianConst>;

// --- jumps J(t) -----------------------------------------------------------

struct ConstantIntensity {
  double lambda = 0.0;
};
// rates[i] applies on elapsed years [i, i+1); the last rate continues past the list.
struct PiecewiseIntensity {
  std::vector<double> rates;
};

using IntensitySpec = std::variant<ConstantIntensity, PiecewiseIntensity>;

struct JumpSpec {
  IntensitySpec intensity = ConstantIntensity{0.0};
  JumpSizeDist size = Fatal{};
};

struct VitalityModel {
  double age_x = 0.0;
  InitialVitalityDist initial = Exponential{1.0};
  TrendSpec trend = GompertzTrend{};
  DiffusionSpec diffusion = NoDiffusion{};
  JumpSpec jump;
};

void validate(const TrendSpec& trend);
void validate(const IntensitySpec& intensity);
void validate(const VitalityModel& model);

std::string describe(const TrendSpec& trend);

// Depletion rate mu at elapsed time t.
double trend_rate(const BaseTrend& trend, double age_x, double t);
double trend_rate(const TrendSpec& trend, double age_x, double t);

// int_0^T mu(s) ds. Throws ValidationError for FrailtyScaled.
double cumulative_hazard(const BaseTrend& trend, double age_x, double T);
double cumulative_hazard(const TrendSpec& trend, double age_x, double T);

// Smallest t with cumulative_hazard(t) = y (the deterministic death time of vitality y).
double inverse_cumulative_hazard(const BaseTrend& trend, double age_x, double y);

double intensity_at(const IntensitySpec& intensity, double t);
double cumulative_intensity(const IntensitySpec& intensity, double T);
bool has_jumps(const JumpSpec& jump);  // positive intensity anywhere
bool has_diffusion(const VitalityModel& model);
double diffusion_sigma(const VitalityModel& model);  // 0 when absent

BaseTrend as_base(const TrendSpec& trend);  // throws for FrailtyScaled

// Name of the closed-form case that applies, or empty if none does.
std::string closed_form_case(const VitalityModel& model);

// Pr(tau > T) by closed form; throws NoClosedFormError when no case matches.
double survival_static(const VitalityModel& model, double T);

// Non-crossing probability of v - delta t - sigma B(t) over [0, T].
double drifted_bm_survival(double v, double delta, double sigma, double T);

// Death time of vitality v under a pure Gompertz trend.
double gompertz_death_time(double v, double age_x, double b, double c);

struct TransformDescription {
  std::string initial;
  double threshold = 1.0;
  std::string note;
};

// Exponential transform V~ = e^V: same death time, threshold moved to one.
TransformDescription exp_transform(const VitalityModel& model);

}  // namespace vitalkit
