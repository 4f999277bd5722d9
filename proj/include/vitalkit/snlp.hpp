#pragma once

#include <complex>
#include <vector>

#include "vitalkit/model.hpp"
#include "vitalkit/numerics.hpp"

namespace vitalkit {

// Constant drift, Brownian noise and compound Poisson jumps with a
// mixture-of-exponentials size law. Duplicate rates are merged.
struct SnlpParams {
  double delta = 0.0;
  double sigma = 0.0;
  double lambda = 0.0;
  std::vector<double> weights;
  std::vector<double> rates;
};

// Extracts the parameters; throws ValidationError if the model is outside this class.
SnlpParams snlp_params(const VitalityModel& model);

// Roots of the Cramer-Lundberg-type equation for real q > 0, sorted descending
// (theta_1 > 0 >= theta_2 > ... ), found by bracketing between the poles.
std::vector<double> snlp_roots(const SnlpParams& params, double q);

// Same roots for complex q with Re q > 0, via the companion matrix.
std::vector<std::complex<double>> snlp_roots(const SnlpParams& params, std::complex<double> q);

// E_v[exp(-q tau)].
double snlp_laplace_tau(const SnlpParams& params, double v, double q);
std::complex<double> snlp_laplace_tau(const SnlpParams& params, double v, std::complex<double> q);
double snlp_laplace_tau(const VitalityModel& model, double v, double q);

// Pr(tau > T | V(0) = v) by inverting (1 - E_v[e^{-q tau}]) / q.
double survival_snlp(const VitalityModel& model, double v, double T, const LaplaceOptions& options = {});

}  // namespace vitalkit
