#pragma once

#include <string>
#include <variant>
#include <vector>

#include "vitalkit/rng.hpp"

namespace vitalkit {

// --- initial vitality V(0) -------------------------------------------------

struct Exponential {
  double rate = 1.0;
};
struct ParetoII {
  double shape = 1.0;
  double scale = 1.0;
};
// Gompertz law with scale fixed at one: Pr(V > v) = exp(-shape (e^v - 1)).
struct GompertzDist {
  double shape = 1.0;
};
struct Degenerate {
  double v = 1.0;
};

using InitialVitalityDist = std::variant<Exponential, ParetoII, GompertzDist, Degenerate>;

// --- jump sizes -----------------------------------------------------------

struct Fatal {};
struct ExponentialJump {
  double rate = 1.0;
};
struct MixtureExponential {
  std::vector<double> weights;
  std::vector<double> rates;
};
// May be negative: a jump can raise vitality.
struct NormalJump {
  double mean = 0.0;
  double sd = 1.0;
};

using JumpSizeDist = std::variant<Fatal, ExponentialJump, MixtureExponential, NormalJump>;

// --- frailty / decay-rate multipliers ---------------------------------------

struct GammaMix {
  double shape = 1.0;
  double rate = 1.0;
};
// Dagum (inverse Burr): F(z) = (1 + (z/b)^{-a})^{-p}.
struct DagumMix {
  double p = 1.0;
  double a = 1.0;
  double b = 1.0;
};

using MixingDist = std::variant<GammaMix, DagumMix>;

void validate(const InitialVitalityDist& dist);
void validate(const JumpSizeDist& dist);
void validate(const MixingDist& dist);

std::string describe(const InitialVitalityDist& dist);
std::string describe(const JumpSizeDist& dist);

double survival(const InitialVitalityDist& dist, double v);
double cdf(const InitialVitalityDist& dist, double v);
double density(const InitialVitalityDist& dist, double v);
double quantile(const InitialVitalityDist& dist, double p);
double sample(const InitialVitalityDist& dist, Engine& engine);
double mean(const InitialVitalityDist& dist);

// +inf for Fatal.
double sample_jump(const JumpSizeDist& dist, Engine& engine);
double jump_mean(const JumpSizeDist& dist);
bool is_fatal(const JumpSizeDist& dist);

double mixing_cdf(const MixingDist& dist, double z);
double mixing_sample(const MixingDist& dist, Engine& engine);
// E[exp(-s Z)], s >= 0.
double mixing_laplace(const MixingDist& dist, double s);

// Erlang cdf: n-fold convolution of Exponential(rate) evaluated at z.
double mixture_exponential_convolution_cdf(const JumpSizeDist& dist, int n, double z);

}  // namespace vitalkit
