#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "vitalkit/model.hpp"
#include "vitalkit/montecarlo.hpp"
#include "vitalkit/rng.hpp"

namespace vitalkit {

struct MarketParams {
  double r = 0.02;
  double theta = 0.3;    // market price of risk
  double sigma_S = 0.2;  // risky-asset volatility
  double beta = 0.03;    // time preference
  double lambda_bequest = 0.0;
};

// dV = -delta dt + sigma_V dB_V, V(0) = v0
struct VitalitySDE {
  double delta = 0.05;
  double sigma_V = 0.0;
  double v0 = 1.0;
};

void validate(const MarketParams& market);
void validate(const VitalitySDE& sde);

// Negative root of sigma_V^2 k^2 / 2 - delta k - beta = 0 (-beta / delta when sigma_V = 0).
double consumption_exponent(const MarketParams& market, const VitalitySDE& sde);

// f(v) = (lambda - 1/beta) e^{k v} + 1/beta; consumption is wealth / f(v).
double consumption_factor(double v, const MarketParams& market, const VitalitySDE& sde);

struct Policy {
  double risky_share = 0.0;  // theta / sigma_S
  double consumption = 0.0;  // a / f(v)
};

Policy optimal_policy(double a, double v, const MarketParams& market, const VitalitySDE& sde);

struct InfiniteHorizon {};
// Deterministic force of mortality from `trend` at age `age_x`; T may be infinite.
struct WithMortality {
  BaseTrend trend = GompertzTrend{};
  double age_x = 60.0;
  double T = 1e300;
  double lambda1 = 0.0;  // bequest weight
  double lambda2 = 0.0;  // terminal-wealth weight
};

using MertonHorizon = std::variant<InfiniteHorizon, WithMortality>;

// J(t, a) = F(t) ln a + G(t)
struct MertonReference {
  std::function<double(double)> F;
  std::function<double(double)> G;
};

MertonReference merton_reference(const MarketParams& market, const MertonHorizon& horizon);

// (r + theta^2/2 - beta) / beta + ln beta, all over beta.
double merton_infinite_G(const MarketParams& market);

struct ValueFunction {
  std::vector<double> g;  // on the input grid
  bool monotone = true;   // g non-decreasing along the grid
};

// g in J(a, v) = f(v) ln a + g(v) from its linear ODE with g(0) = 0 and
// g(v_max) = the infinite-horizon constant (v_max = last grid point).
// With sigma_V = 0 the ODE is first order and only g(0) = 0 is imposed.
ValueFunction value_function_g(const std::vector<double>& v_grid, const MarketParams& market, const VitalitySDE& sde);

// Source term of the g equation: f (r + theta^2/2) - 1 - ln f.
double value_source(double v, const MarketParams& market, const VitalitySDE& sde);

struct LifecycleOptions {
  double dt = 1.0 / 252.0;
  double consumption_scale = 1.0;  // multiplies the optimal consumption
  double max_years = 500.0;
  bool record = true;
};

struct LifecyclePath {
  std::vector<double> times, assets, consumption, vitality;
  double tau = 0.0;
  double terminal_assets = 0.0;
  double utility = 0.0;  // discounted log consumption plus discounted bequest
  bool absorbed = false;
  bool bankrupt = false;
};

LifecyclePath simulate_lifecycle(double a0, const MarketParams& market, const VitalitySDE& sde,
                                 const LifecycleOptions& options, RngStream rng);

// Mean realized utility over paths (path i uses rng.substream(i)).
McEstimate lifecycle_utility(double a0, const MarketParams& market, const VitalitySDE& sde,
                             const LifecycleOptions& options, std::size_t n_paths, RngStream rng);

}  // namespace vitalkit
