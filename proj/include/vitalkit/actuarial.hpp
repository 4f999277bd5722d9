#pragma once

#include <functional>
#include <optional>

#include "vitalkit/model.hpp"
#include "vitalkit/montecarlo.hpp"

namespace vitalkit {

struct PricingBasis {
  double force_of_interest = 0.05;
};

void validate(const PricingBasis& basis);

// E[tau], conditional on V(0) = v when given. Routes: deterministic trend with
// optional fatal jumps (survival integral), diffusion without jumps (tangent
// density). Anything else throws NoDensityRoute.
double life_expectancy(const VitalityModel& model, std::optional<double> v = std::nullopt);

// Continuous whole-life annuity E[(1 - e^{-d tau}) / d].
double annuity_price(const VitalityModel& model, const PricingBasis& basis, std::optional<double> v = std::nullopt);
// E[e^{-d tau}] = 1 - d * annuity
double insurance_price(const VitalityModel& model, const PricingBasis& basis, std::optional<double> v = std::nullopt);

// Death time of the pure Gompertz model with V(0) = v.
struct BeliefGap {
  double pop_le = 0.0;       // E[tau(V(0))], V(0) ~ Exp(1), Gauss-Laguerre
  double avg_v_le = 0.0;     // tau(1)
  double median_v_le = 0.0;  // tau(ln 2)
};

BeliefGap belief_gap(double b, double c, double x);

struct DisabilityQuery {
  double omega = 0.5;  // disability threshold
  double T = 1.0;
  std::function<double(double)> threshold_density;  // optional randomized threshold
};

void validate(const DisabilityQuery& query);

// Pr(stay above the threshold for T years | start above it), permanent-disability setting.
double healthy_stay_prob(const VitalityModel& model, const DisabilityQuery& query);

// Joint density of (running max, endpoint) of B(t) + (delta / sigma) t on [0, T].
double joint_max_endpoint_density(double m, double w, double T, double delta, double sigma);

enum class RecoveryForm {
  Conditional,  // Pr(V(T) > omega, no ruin | V(0) < omega)
  Printed,      // same numerator by nested quadrature of the joint density, over 1 - F0(omega)
};

// Recovery within T years for a currently disabled person (V(0) < omega);
// constant trend rate plus Brownian diffusion, no jumps.
double recovery_prob(const VitalityModel& model, const DisabilityQuery& query,
                     RecoveryForm form = RecoveryForm::Conditional);

// Simulation of the conditional event: V(0) drawn below omega, Gaussian
// endpoint, bridge factor for the no-ruin condition.
McEstimate recovery_prob_mc(const VitalityModel& model, const DisabilityQuery& query, const McConfig& cfg);

}  // namespace vitalkit
