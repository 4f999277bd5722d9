#pragma once

#include <cstddef>
#include <vector>

#include "vitalkit/model.hpp"
#include "vitalkit/rng.hpp"

namespace vitalkit {

enum class JumpTimeMethod {
  OrderStatistics,  // sort k iid draws with density lambda(s) / Lambda(T)
  Sequential,       // each arrival drawn on (previous arrival, T) with the truncated law
};

struct McConfig {
  std::size_t n_paths = 10000;
  int n_time_points = 0;  // grid points on [0, T]; 0 means 12 per year
  RngStream rng{};
  bool antithetic = false;
  JumpTimeMethod jump_times = JumpTimeMethod::OrderStatistics;
};

struct McEstimate {
  double value = 1.0;
  double std_error = 0.0;
  std::size_t n_effective = 0;
};

// Pr(B(t) < a t + b for all t <= s | B(s) = x); 0 when the start or end is on or
// above the boundary.
double linear_noncrossing_prob(double a, double b, double s, double x);

// Arrival times of the jump process on (0, T), ascending.
std::vector<double> simulate_jump_times(const IntensitySpec& intensity, double T, Engine& engine,
                                        JumpTimeMethod method = JumpTimeMethod::OrderStatistics);

// Smallest t with cumulative_intensity(t) = level.
double inverse_cumulative_intensity(const IntensitySpec& intensity, double level);

// Pr(tau > T | V(0) = v) by simulation of the Brownian skeleton on the merged
// grid/jump-time partition with bridge non-crossing factors.
McEstimate mc_survival(const VitalityModel& model, double v, double T, const McConfig& cfg);

// Integer-age scheme: piecewise-linear trend, fatal jumps only, one Brownian
// value per year. Returns k-year survival given V(0) = v.
McEstimate piecewise_survival_fatal(const VitalityModel& model, double v, int k, const McConfig& cfg);

// All horizons 0..k_max from one set of paths; entry k is k-year survival.
// With `v` empty, each path draws V(0) from the model's initial law by
// stratified inversion (one stratum per path).
std::vector<McEstimate> piecewise_survival_curve(const VitalityModel& model, const double* v, int k_max,
                                                 const McConfig& cfg);

enum class MixingMethod { GaussLaguerre, Sampling };

// Pr(tau > T) mixing mc_survival over the initial law.
McEstimate survival_unconditional(const VitalityModel& model, double T, const McConfig& cfg,
                                  MixingMethod method = MixingMethod::GaussLaguerre);

// Mean and standard error of per-path values (pairwise sums, deterministic).
McEstimate summarize(const std::vector<double>& values);
// Same, with the mean clamped to [0, 1].
McEstimate summarize_probability(const std::vector<double>& values);

}  // namespace vitalkit
