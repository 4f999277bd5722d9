#pragma once

#include <array>
#include <functional>

#include "vitalkit/model.hpp"

namespace vitalkit {

// Distance to the death boundary for the diffusion-only model: H(t, v) = v - Y(t).
struct BoundaryFn {
  std::function<double(double, double)> H;
  std::function<double(double, double)> H_t;
  bool concave = false;  // Y convex in t
};

BoundaryFn boundary_from_trend(const BaseTrend& trend, double age_x);

// First-passage density by the tangent approximation.
double tangent_density(const BoundaryFn& boundary, double sigma, double v, double t);

// Individual series terms q_1..q_3 (zero beyond k).
std::array<double, 3> durbin_terms(const BoundaryFn& boundary, double sigma, double v, double t, int k);

// sum_{j<=k} (-1)^{j-1} q_j(t), k in {1, 2, 3}.
double durbin_density(const BoundaryFn& boundary, double sigma, double v, double t, int k);

struct SurvivalFromDensity {
  double survival = 1.0;
  bool clamped = false;  // 1 - integral fell below zero and was clamped
};

// 1 - int_0^T density. Throws NumericalError when the integral exceeds 1 + 1e-3.
SurvivalFromDensity density_to_survival(const std::function<double(double)>& density, double T);

// Exact first-passage density of v - delta t - sigma B(t) (inverse Gaussian).
double inverse_gaussian_density(double v, double delta, double sigma, double t);

}  // namespace vitalkit
