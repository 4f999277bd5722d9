#include <cmath>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "vitalkit/actuarial.hpp"
#include "vitalkit/errors.hpp"
#include "vitalkit/lifecycle.hpp"

using namespace vitalkit;

namespace {

MarketParams market(double lambda = 0.0) {
  MarketParams m;
  m.r = 0.02;
  m.theta = 0.3;
  m.sigma_S = 0.2;
  m.beta = 0.03;
  m.lambda_bequest = lambda;
  return m;
}

VitalitySDE sde(double sigma_V = 0.0, double delta = 0.05, double v0 = 1.0) { return {delta, sigma_V, v0}; }

// f, f', f'' written out from f = (lambda - 1/beta) e^{k v} + 1/beta
struct FactorOracle {
  double A, k, c;
  double f(double v) const { return A * std::exp(k * v) + c; }
  double d1(double v) const { return A * k * std::exp(k * v); }
  double d2(double v) const { return A * k * k * std::exp(k * v); }
};

FactorOracle oracle(const MarketParams& m, const VitalitySDE& s) {
  const double k = s.sigma_V == 0.0
                       ? -m.beta / s.delta
                       : (s.delta - std::sqrt(s.delta * s.delta + 2.0 * s.sigma_V * s.sigma_V * m.beta)) /
                             (s.sigma_V * s.sigma_V);
  return {m.lambda_bequest - 1.0 / m.beta, k, 1.0 / m.beta};
}

std::vector<double> v_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  return g;
}

}  // namespace

TEST_SUITE("lifecycle") {
  TEST_CASE("consumption factor solves its ode") {
    for (double sigma_V : {0.0, 0.05, 0.2})
      for (double lambda : {0.0, 10.0, 50.0}) {
        const auto m = market(lambda);
        const auto s = sde(sigma_V);
        const auto o = oracle(m, s);
        double worst = 0.0;
        for (double v = 0.01; v <= 30.0 + 1e-12; v += 0.01) {
          CHECK(consumption_factor(v, m, s) == doctest::Approx(o.f(v)).epsilon(1e-13));
          const double residual = s.delta * o.d1(v) - 0.5 * s.sigma_V * s.sigma_V * o.d2(v) - 1.0 + m.beta * o.f(v);
          worst = std::max(worst, std::abs(residual));
        }
        CHECK(worst <= 1e-10);
        CHECK(consumption_factor(0.0, m, s) == doctest::Approx(lambda).epsilon(1e-12));
      }
    // the library exponent is the rationalized root: compare with the textbook form
    const auto s = sde(0.2);
    CHECK(consumption_exponent(market(), s) == doctest::Approx(oracle(market(), s).k).epsilon(1e-12));
    CHECK(std::abs(consumption_factor(30.0, market(), sde(0.1)) - 1.0 / 0.03) <= 1e-3 / 0.03 * 30);
  }

  TEST_CASE("exponent continuity as vitality noise vanishes") {
    CHECK(std::abs(consumption_exponent(market(), sde(1e-4)) + 0.03 / 0.05) <= 1e-6);
    CHECK(consumption_exponent(market(), sde(0.0)) == -0.03 / 0.05);
  }

  TEST_CASE("annuity-certain identity without vitality noise") {
    const auto m = market();
    const auto s = sde(0.0);
    const double f1 = consumption_factor(1.0, m, s);
    CHECK(std::abs(f1 - 15.040) <= 5e-4);
    for (double lambda : {0.0, 5.0, 40.0})
      for (double v : {0.1, 1.0, 3.0}) {
        const double t_star = v / s.delta;
        const double annuity = -std::expm1(-0.03 * t_star) / 0.03 + lambda * std::exp(-0.03 * t_star);
        CHECK(std::abs(consumption_factor(v, market(lambda), s) - annuity) <= 1e-10);
      }
    // the same number through the pricing module
    VitalityModel lin;
    lin.initial = Degenerate{1.0};
    lin.trend = ConstantRate{0.05};
    CHECK(std::abs(annuity_price(lin, PricingBasis{0.03}) - f1) <= 1e-10);
  }

  TEST_CASE("sign law for the bequest weight") {
    const auto s = sde(0.1);
    for (double lambda : {0.0, 10.0, 30.0, 36.0, 60.0}) {
      const auto m = market(lambda);
      bool increasing = true, decreasing = true;
      double prev = consumption_factor(0.01, m, s);
      for (double v = 0.02; v <= 30.0; v += 0.01) {
        const double f = consumption_factor(v, m, s);
        increasing &= f > prev;
        decreasing &= f < prev;
        prev = f;
      }
      CHECK(increasing == (lambda < 1.0 / 0.03));
      CHECK(decreasing == (lambda > 1.0 / 0.03));
    }
    // exactly at 1/beta the factor is flat
    const auto flat = market(1.0 / 0.03);
    CHECK(consumption_factor(0.5, flat, s) == doctest::Approx(consumption_factor(20.0, flat, s)).epsilon(1e-14));
  }

  TEST_CASE("optimal policy") {
    const auto m = market();
    const auto p = optimal_policy(100.0, 1.0, m, sde(0.0));
    CHECK(std::abs(p.consumption - 6.649) <= 5e-4);
    CHECK(p.risky_share == doctest::Approx(1.5));
    for (double a : {1.0, 50.0, 1e4})
      for (double v : {0.1, 2.0, 25.0}) CHECK(optimal_policy(a, v, m, sde(0.1)).risky_share == p.risky_share);
    auto no_premium = m;
    no_premium.theta = 0.0;
    CHECK(optimal_policy(10.0, 1.0, no_premium, sde()).risky_share == 0.0);
    CHECK_THROWS_AS(optimal_policy(0.0, 1.0, m, sde()), ValidationError);
  }

  TEST_CASE("merton references") {
    const auto m = market();
    const auto inf = merton_reference(m, InfiniteHorizon{});
    CHECK(inf.F(0.0) == 1.0 / 0.03);
    const double G = ((0.02 + 0.045 - 0.03) / 0.03 + std::log(0.03)) / 0.03;
    CHECK(inf.G(5.0) == doctest::Approx(G).epsilon(1e-14));
    CHECK(std::abs(merton_infinite_G(m) - (-77.99637)) <= 1e-4);

    // F(0) with mortality and no bequest is the life annuity at discount beta
    const auto mort = merton_reference(m, WithMortality{});
    VitalityModel law;
    law.age_x = 60.0;
    law.initial = Exponential{1.0};
    law.trend = GompertzTrend{};
    CHECK(std::abs(mort.F(0.0) - annuity_price(law, PricingBasis{0.03})) <= 1e-8);

    // no mortality: collapses to the infinite-horizon solution
    const auto none = merton_reference(m, WithMortality{ConstantRate{1e-300}, 60.0});
    CHECK(std::abs(none.F(0.0) - 1.0 / 0.03) <= 1e-8);
    CHECK(std::abs(none.G(0.0) - G) <= 1e-6);

    // finite horizon with terminal weight: F(T) = lambda2
    const auto fin = merton_reference(m, WithMortality{GompertzTrend{}, 60.0, 10.0, 2.0, 4.0});
    CHECK(fin.F(10.0) == 4.0);
    CHECK(fin.G(10.0) == 0.0);
    CHECK(fin.F(0.0) > 4.0 * std::exp(-0.03 * 10.0 - cumulative_hazard(BaseTrend{GompertzTrend{}}, 60.0, 10.0)));
  }

  TEST_CASE("value function without vitality noise matches an integrating-factor oracle") {
    for (double lambda : {0.0, 5.0}) {
      const auto m = market(lambda);
      const auto s = sde(0.0);
      const auto grid = v_grid(1e-3, 10.0, 101);
      const auto vf = value_function_g(grid, m, s);
      // RK4 on g' = (source - beta g) / delta. With lambda = 0 the source has a log
      // singularity at 0: start at eps with the leading-order integral.
      auto rhs = [&](double v, double g) { return (value_source(v, m, s) - m.beta * g) / s.delta; };
      const double eps = lambda == 0.0 ? 1e-10 : 0.0;
      double v = eps, g = lambda == 0.0 ? -(eps / s.delta) * std::log(eps / s.delta) : 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        // geometric substeps resolve the singular start
        const int sub = 4000;
        const double ratio = i == 0 && lambda == 0.0 ? std::pow(grid[0] / v, 1.0 / sub) : 0.0;
        for (int j = 0; j < sub; ++j) {
          const double next = ratio > 0.0 ? v * ratio : v + (grid[i] - v) / (sub - j);
          const double h = next - v;
          const double k1 = rhs(v, g), k2 = rhs(v + h / 2, g + h / 2 * k1), k3 = rhs(v + h / 2, g + h / 2 * k2),
                       k4 = rhs(next, g + h * k3);
          g += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
          v = next;
        }
        v = grid[i];
        CHECK(std::abs(vf.g[i] - g) <= 1e-6);
      }
      MESSAGE("lambda " << lambda << ": g monotone on the grid: " << vf.monotone);
    }
  }

  TEST_CASE("value function finite differences") {
    const auto m = market();
    const auto s = sde(0.2);
    const auto grid = v_grid(1e-3, 40.0, 801);
    const auto vf = value_function_g(grid, m, s);
    double scale = 0.0;
    for (double g : vf.g) scale = std::max(scale, std::abs(g));
    CHECK(vf.g.back() == merton_infinite_G(m));
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const double h = grid[i + 1] - grid[i];
      const double d2 = (vf.g[i + 1] - 2 * vf.g[i] + vf.g[i - 1]) / (h * h);
      const double d1 = (vf.g[i + 1] - vf.g[i - 1]) / (2 * h);
      const double r = value_source(grid[i], m, s) - s.delta * d1 + 0.5 * s.sigma_V * s.sigma_V * d2 - m.beta * vf.g[i];
      worst = std::max(worst, std::abs(r));
    }
    CHECK(worst <= 1e-8 * scale);
    // refinement changes the solution at O(h^2)
    const auto fine = value_function_g(v_grid(1e-3, 40.0, 1601), m, s);
    CHECK(std::abs(fine.g[800] - vf.g[400]) <= 1e-3 * scale);
    MESSAGE("g monotone: " << vf.monotone << ", g(0+) " << vf.g.front() << ", g(40) " << vf.g.back());
    CHECK_THROWS_AS(value_function_g({0.5, 1.0, 2.0}, m, s), ValidationError);
  }

  TEST_CASE("deterministic path matches an ode oracle") {
    auto m = market(10.0);
    m.theta = 0.0;
    const auto s = sde(0.0, 0.05, 1.0);
    LifecycleOptions opt;
    const auto path = simulate_lifecycle(100.0, m, s, opt, RngStream{1, 0});
    CHECK(path.absorbed);
    CHECK(std::abs(path.tau - 20.0) <= opt.dt);
    CHECK(path.vitality.back() == 0.0);
    // dA = r A - A / f(v0 - delta t)
    auto rhs = [&](double t, double a) { return m.r * a - a / consumption_factor(std::max(1.0 - 0.05 * t, 0.0), m, s); };
    double a = 100.0, t = 0.0;
    const int steps = 200000;
    const double h = path.tau / steps;
    for (int i = 0; i < steps; ++i) {
      const double k1 = rhs(t, a), k2 = rhs(t + h / 2, a + h / 2 * k1), k3 = rhs(t + h / 2, a + h / 2 * k2),
                   k4 = rhs(t + h, a + h * k3);
      a += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      t += h;
    }
    CHECK(path.terminal_assets == doctest::Approx(a).epsilon(1e-6));
    // consumption per unit wealth along a depleting path: rises for a small bequest
    // weight, falls once the weight exceeds 1/beta
    auto direction = [&](double lambda) {
      const auto p = simulate_lifecycle(100.0, market(lambda), s, opt, RngStream{1, 0});
      bool up = true, down = true;
      for (std::size_t i = 1; i + 1 < p.consumption.size(); ++i) {
        const double now = p.consumption[i] / p.assets[i], before = p.consumption[i - 1] / p.assets[i - 1];
        up &= now > before;
        down &= now < before;
      }
      return std::pair{up, down};
    };
    CHECK(direction(10.0) == std::pair{true, false});
    CHECK(direction(60.0) == std::pair{false, true});
  }

  TEST_CASE("simulation records and flags") {
    const auto m = market();
    const auto s = sde(0.1);
    LifecycleOptions opt;
    opt.max_years = 5.0;
    const auto a = simulate_lifecycle(10.0, m, s, opt, RngStream{4, 0});
    const auto b = simulate_lifecycle(10.0, m, s, opt, RngStream{4, 0});
    CHECK(a.assets == b.assets);
    CHECK(a.times.size() == a.assets.size());
    CHECK(a.times.size() == a.vitality.size());
    for (std::size_t i = 1; i < a.times.size(); ++i) CHECK(a.times[i] > a.times[i - 1]);
    opt.dt = 1.0 / 100.0;
    CHECK_THROWS_AS(simulate_lifecycle(10.0, m, s, opt, RngStream{4, 0}), ValidationError);
  }

  TEST_CASE("perturbing the optimal consumption lowers expected utility") {
    const auto m = market();
    const auto s = sde(0.05, 0.05, 1.0);
    LifecycleOptions opt;
    opt.record = false;
    const int n = 10000;
    std::vector<double> base(n), lower(n), higher(n);
    LifecycleOptions down = opt, up = opt;
    down.consumption_scale = 0.95;
    up.consumption_scale = 1.05;
    for (int i = 0; i < n; ++i) {
      const RngStream rng = RngStream{77, 0}.substream(i);
      base[i] = simulate_lifecycle(100.0, m, s, opt, rng).utility;
      lower[i] = simulate_lifecycle(100.0, m, s, down, rng).utility;
      higher[i] = simulate_lifecycle(100.0, m, s, up, rng).utility;
    }
    for (const auto* alt : {&lower, &higher}) {
      double mean = 0.0, var = 0.0;
      for (int i = 0; i < n; ++i) mean += (base[i] - (*alt)[i]) / n;
      for (int i = 0; i < n; ++i) var += std::pow(base[i] - (*alt)[i] - mean, 2) / (n - 1);
      const double z = mean / std::sqrt(var / n);
      MESSAGE("optimal minus perturbed " << mean << " (z = " << z << ")");
      CHECK(z > 1.645);
    }
  }
}
