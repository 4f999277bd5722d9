#include "vitalkit/lifecycle.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "vitalkit/errors.hpp"
#include "vitalkit/numerics.hpp"
#include "vitalkit/parallel.hpp"

namespace vitalkit {

void validate(const MarketParams& m) {
  require(std::isfinite(m.r) && std::isfinite(m.theta), "market r and theta must be finite");
  require(m.sigma_S > 0.0 && std::isfinite(m.sigma_S), "market.sigma_S must be positive");
  require(m.beta > 0.0 && std::isfinite(m.beta), "market.beta must be positive");
  require(m.lambda_bequest >= 0.0 && std::isfinite(m.lambda_bequest), "market.lambda_bequest must be non-negative");
}

void validate(const VitalitySDE& s) {
  require(s.delta > 0.0 && std::isfinite(s.delta), "vitality.delta must be positive");
  require(s.sigma_V >= 0.0 && std::isfinite(s.sigma_V), "vitality.sigma_V must be non-negative");
  require(s.v0 > 0.0 && std::isfinite(s.v0), "vitality.v0 must be positive");
}

double consumption_exponent(const MarketParams& market, const VitalitySDE& sde) {
  validate(market);
  validate(sde);
  // rationalized root, no cancellation as sigma_V -> 0
  const double s2 = sde.sigma_V * sde.sigma_V;
  return -2.0 * market.beta / (sde.delta + std::sqrt(sde.delta * sde.delta + 2.0 * s2 * market.beta));
}

double consumption_factor(double v, const MarketParams& market, const VitalitySDE& sde) {
  require(v >= 0.0, "consumption_factor: v must be non-negative");
  const double k = consumption_exponent(market, sde);
  const double inv_beta = 1.0 / market.beta;
  return (market.lambda_bequest - inv_beta) * std::exp(k * v) + inv_beta;
}

Policy optimal_policy(double a, double v, const MarketParams& market, const VitalitySDE& sde) {
  require(a > 0.0 && v > 0.0, "optimal_policy: a and v must be positive");
  return {market.theta / market.sigma_S, a / consumption_factor(v, market, sde)};
}

double merton_infinite_G(const MarketParams& m) {
  validate(m);
  return ((m.r + 0.5 * m.theta * m.theta - m.beta) / m.beta + std::log(m.beta)) / m.beta;
}

MertonReference merton_reference(const MarketParams& market, const MertonHorizon& horizon) {
  validate(market);
  if (std::holds_alternative<InfiniteHorizon>(horizon)) {
    const double F = 1.0 / market.beta, G = merton_infinite_G(market);
    return {[F](double) { return F; }, [G](double) { return G; }};
  }
  const auto h = std::get<WithMortality>(horizon);
  require(h.T > 0.0, "merton_reference: horizon must be positive");
  require(h.lambda1 >= 0.0 && h.lambda2 >= 0.0, "merton_reference: weights must be non-negative");
  validate(std::visit([](const auto& t) -> TrendSpec { return t; }, h.trend));
  const bool infinite = !std::isfinite(h.T) || h.T >= 1e300;
  const double end = infinite ? std::numeric_limits<double>::infinity() : h.T;
  const double beta = market.beta;
  const double growth = market.r + 0.5 * market.theta * market.theta;

  auto discount = [h, beta](double t, double s) {
    return std::exp(-beta * (s - t) - (cumulative_hazard(h.trend, h.age_x, s) - cumulative_hazard(h.trend, h.age_x, t)));
  };
  auto F = [=](double t) {
    require(t >= 0.0 && t <= end, "F(t): t outside [0, T]");
    const double terminal = infinite ? 0.0 : h.lambda2 * discount(t, end);
    if (t == end) return terminal;
    return terminal + adaptive_integrate(
                          [&](double s) {
                            const double w = discount(t, s);
                            return w == 0.0 ? 0.0 : w * (1.0 + h.lambda1 * trend_rate(h.trend, h.age_x, s));
                          },
                          t, end, 1e-13, 1e-12)
                          .value;
  };
  auto G = [=](double t) {
    require(t >= 0.0 && t <= end, "G(t): t outside [0, T]");
    if (t == end) return 0.0;
    return adaptive_integrate(
               [&](double s) {
                 const double w = discount(t, s);
                 if (w == 0.0) return 0.0;
                 const double f = F(s);
                 return w * (f * growth - 1.0 - std::log(f));
               },
               t, end, 1e-10, 1e-9)
        .value;
  };
  return {F, G};
}

double value_source(double v, const MarketParams& market, const VitalitySDE& sde) {
  const double f = consumption_factor(v, market, sde);
  return f * (market.r + 0.5 * market.theta * market.theta) - 1.0 - std::log(f);
}

ValueFunction value_function_g(const std::vector<double>& grid, const MarketParams& market, const VitalitySDE& sde) {
  validate(market);
  validate(sde);
  require(grid.size() >= 3, "value_function_g: grid needs at least 3 points");
  require(grid.front() > 0.0 && grid.front() <= 1e-3, "value_function_g: grid must start in (0, 1e-3]");
  for (std::size_t i = 1; i < grid.size(); ++i) require(grid[i] > grid[i - 1], "value_function_g: grid must increase");
  const std::size_t n = grid.size();
  const double beta = market.beta, delta = sde.delta;
  ValueFunction out;
  out.g.assign(n, 0.0);

  if (sde.sigma_V == 0.0) {
    // -delta g' - beta g + s = 0 from g(0) = 0, exact integrating factor per interval
    double prev_x = 0.0, prev_g = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = grid[i];
      const double part = adaptive_integrate(
                              [&](double u) {
                                return u > 0.0 ? std::exp(-beta * (x - u) / delta) * value_source(u, market, sde) : 0.0;
                              },
                              prev_x, x, 1e-13, 1e-12)
                              .value;
      out.g[i] = std::exp(-beta * (x - prev_x) / delta) * prev_g + part / delta;
      prev_x = x;
      prev_g = out.g[i];
    }
  } else {
    // nodes x_0 = 0 (g = 0), grid[0..n-2] unknown, grid[n-1] pinned at G
    const double half_s2 = 0.5 * sde.sigma_V * sde.sigma_V;
    const std::size_t m = n - 1;
    std::vector<double> lower(m), diag(m), upper(m), rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double xl = i == 0 ? 0.0 : grid[i - 1];
      const double x = grid[i], xr = grid[i + 1];
      const double h1 = x - xl, h2 = xr - x;
      // second derivative and central first derivative on an uneven stencil
      const double d2l = 2.0 / (h1 * (h1 + h2)), d2c = -2.0 / (h1 * h2), d2r = 2.0 / (h2 * (h1 + h2));
      const double d1l = -h2 / (h1 * (h1 + h2)), d1c = (h2 - h1) / (h1 * h2), d1r = h1 / (h2 * (h1 + h2));
      lower[i] = half_s2 * d2l - delta * d1l;
      diag[i] = half_s2 * d2c - delta * d1c - beta;
      upper[i] = half_s2 * d2r - delta * d1r;
      rhs[i] = -value_source(x, market, sde);
    }
    rhs[m - 1] -= upper[m - 1] * merton_infinite_G(market);
    // Thomas algorithm
    for (std::size_t i = 1; i < m; ++i) {
      if (diag[i - 1] == 0.0 || !std::isfinite(diag[i - 1])) throw NumericalError("value_function_g: singular system");
      const double w = lower[i] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    if (diag[m - 1] == 0.0 || !std::isfinite(diag[m - 1])) throw NumericalError("value_function_g: singular system");
    out.g[m - 1] = rhs[m - 1] / diag[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) out.g[i] = (rhs[i] - upper[i] * out.g[i + 1]) / diag[i];
    out.g[n - 1] = merton_infinite_G(market);
  }
  for (double g : out.g)
    if (!std::isfinite(g)) throw NumericalError("value_function_g: non-finite solution");
  double scale = 0.0;
  for (double g : out.g) scale = std::max(scale, std::abs(g));
  for (std::size_t i = 1; i < n; ++i)
    if (out.g[i] < out.g[i - 1] - 1e-12 * scale) out.monotone = false;
  return out;
}

namespace {

// Antiderivative of 1 / f(v).
struct InverseFactorIntegral {
  double a, b, k;  // f = a e^{k v} + b

  double operator()(double v) const {
    const double inner = a * std::exp(k * v) + b;
    return (v - std::log(inner) / k) / b;
  }

  double f(double v) const { return a * std::exp(k * v) + b; }

  // int over a step of length h along the segment v0 -> v1
  double along(double v0, double v1, double h) const {
    const double dv = v1 - v0;
    if (std::abs(dv) < 1e-9) return h / f(0.5 * (v0 + v1));
    return h / dv * ((*this)(v1) - (*this)(v0));
  }
};

}  // namespace

LifecyclePath simulate_lifecycle(double a0, const MarketParams& market, const VitalitySDE& sde,
                                 const LifecycleOptions& options, RngStream rng) {
  validate(market);
  validate(sde);
  require(a0 > 0.0, "simulate_lifecycle: a0 must be positive");
  require(options.dt > 0.0 && options.dt <= 1.0 / 252.0 + 1e-15, "simulate_lifecycle: dt must be at most 1/252");
  require(options.consumption_scale > 0.0, "simulate_lifecycle: consumption scale must be positive");
  const double k = consumption_exponent(market, sde);
  const InverseFactorIntegral inv{market.lambda_bequest - 1.0 / market.beta, 1.0 / market.beta, k};
  const double growth = market.r + 0.5 * market.theta * market.theta;
  const double log_scale = std::log(options.consumption_scale);
  Engine asset_engine(rng.substream(0));
  Engine vitality_engine(rng.substream(1));
  std::normal_distribution<double> asset_normal, vitality_normal;

  LifecyclePath path;
  double t = 0.0, v = sde.v0, log_a = std::log(a0);
  auto log_consumption = [&](double la, double vv) { return log_scale + la - std::log(inv.f(vv)); };
  auto record = [&](double tt, double la, double vv) {
    if (!options.record) return;
    path.times.push_back(tt);
    path.assets.push_back(std::exp(la));
    path.consumption.push_back(vv > 0.0 ? std::exp(log_consumption(la, vv)) : 0.0);
    path.vitality.push_back(std::max(vv, 0.0));
  };
  record(t, log_a, v);
  const double sqdt = std::sqrt(options.dt);
  std::vector<double> utility_terms;
  while (t < options.max_years) {
    const double z_a = asset_normal(asset_engine), z_v = vitality_normal(vitality_engine);
    double v_next = v - sde.delta * options.dt + sde.sigma_V * sqdt * z_v;
    double h = options.dt;
    bool hit = false;
    if (v_next <= 0.0) {
      h = options.dt * v / (v - v_next);
      v_next = 0.0;
      hit = true;
    }
    const double drain = options.consumption_scale * inv.along(v, v_next, h);
    const double la_next = log_a + growth * h - drain + market.theta * std::sqrt(h) * z_a;
    const double lc = log_consumption(log_a, v);
    if (hit) {
      utility_terms.push_back(h * std::exp(-market.beta * t) * lc);
    } else {
      const double lc_next = log_consumption(la_next, v_next);
      utility_terms.push_back(0.5 * h * (std::exp(-market.beta * t) * lc + std::exp(-market.beta * (t + h)) * lc_next));
    }
    t += h;
    v = v_next;
    log_a = la_next;
    record(t, log_a, v);
    if (hit) {
      path.absorbed = true;
      break;
    }
    if (!std::isfinite(log_a)) {
      path.bankrupt = true;
      break;
    }
  }
  path.tau = t;
  path.terminal_assets = std::isfinite(log_a) ? std::exp(log_a) : 0.0;
  if (path.absorbed && market.lambda_bequest > 0.0)
    utility_terms.push_back(market.lambda_bequest * std::exp(-market.beta * t) * log_a);
  path.utility = pairwise_sum(utility_terms);
  return path;
}

McEstimate lifecycle_utility(double a0, const MarketParams& market, const VitalitySDE& sde,
                             const LifecycleOptions& options, std::size_t n_paths, RngStream rng) {
  require(n_paths >= 2, "lifecycle_utility: need at least two paths");
  LifecycleOptions quiet = options;
  quiet.record = false;
  auto values = parallel_map(n_paths, [&](std::size_t i) {
    return simulate_lifecycle(a0, market, sde, quiet, rng.substream(i)).utility;
  });
  return summarize(values);
}

}  // namespace vitalkit
