#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "vitalkit/cause_of_death.hpp"
#include "vitalkit/errors.hpp"

using namespace vitalkit;

namespace {

// Density of tau = min(tau_J, tau_Y), continuous part only.
double total_density(const CodParams& p, double t) {
  return cod_density(p, Cause::Accident, t).density + cod_density(p, Cause::Natural, t).density;
}

// Integral over (0, t*) of g; the natural-cause integrand has a square-root cusp at t*,
// so a substitution t = t*(1 - u^2) smooths it.
template <class F>
double integrate_to_t_star(const CodParams& p, F g, int n = 4000) {
  const double ts = p.t_star();
  return testsupport::simpson([&](double u) { return g(std::max(ts * (1.0 - u * u), 1e-12 * ts)) * 2.0 * ts * u; }, 0.0, 1.0,
                              n);
}

std::vector<CodParams> parameter_grid() {
  std::vector<CodParams> grid;
  for (double lambda : {0.005, 0.03, 0.1, 0.3})
    for (double alpha : {0.5, 2.0, 8.0})
      grid.push_back({60.0, 0.0001744, 1.082, lambda, alpha, 1.0});
  for (double v : {0.3, 2.0}) grid.push_back({60.0, 0.0001744, 1.082, 0.03, 2.0, v});
  for (double age : {30.0, 80.0}) grid.push_back({age, 0.0001744, 1.082, 0.03, 2.0, 1.0});
  grid.push_back({60.0, 0.00005, 1.1, 0.03, 2.0, 1.0});
  grid.push_back({60.0, 0.0005, 1.05, 0.03, 2.0, 1.0});
  grid.push_back({60.0, 0.0001744, 1.082, 1.0, 1.0, 1.0});
  grid.push_back({60.0, 0.0001744, 1.082, 0.03, 50.0, 1.0});
  return grid;
}

}  // namespace

TEST_SUITE("cod") {
  TEST_CASE("no-jump remaining lifetime") {
    const CodParams p;
    CHECK(std::abs(p.t_star() - 20.4) <= 0.05);
    CHECK(std::abs(p.b_star(p.t_star())) <= 1e-12);
    CHECK(p.b_star(0.0) == p.v);
    const auto d = cod_density(p, Cause::Natural, 1.0);
    CHECK(d.atom_time == doctest::Approx(p.t_star()).epsilon(1e-15));
    CHECK(d.atom_mass == doctest::Approx(std::exp(-0.03 * p.t_star())).epsilon(1e-14));
    CHECK(std::abs(d.atom_mass - 0.5423) <= 2e-4);
  }

  TEST_CASE("vanishing jump intensity") {
    CodParams p;
    p.lambda = 1e-12;
    for (double q : {0.0, 0.5, 2.0}) {
      CHECK(cod_laplace_accident(p, q) <= 1e-10);
      CHECK(std::abs(cod_laplace_natural(p, q) - std::exp(-q * p.t_star())) <= 1e-9);
    }
    const auto split = prob_cause_split(p);
    CHECK(split.p_accident <= 1e-10);
    CHECK(std::abs(split.p_natural - 1.0) <= 1e-9);
    p.lambda = 0.0;
    CHECK(cod_laplace_accident(p, 0.0) == 0.0);
    CHECK(cod_laplace_natural(p, 0.0) == 1.0);
  }

  TEST_CASE("laplace transforms decrease in q") {
    const CodParams p;
    double acc_prev = 2.0, nat_prev = 2.0;
    for (double q : {0.0, 0.01, 0.1, 0.5, 1.0, 3.0}) {
      const double a = cod_laplace_accident(p, q), n = cod_laplace_natural(p, q);
      CHECK(a < acc_prev);
      CHECK(n < nat_prev);
      acc_prev = a, nat_prev = n;
    }
  }

  TEST_CASE("density values at the ends of the support") {
    const CodParams p;
    CHECK(cod_density(p, Cause::Accident, p.t_star()).density == 0.0);
    CHECK(cod_density(p, Cause::Accident, p.t_star() + 3.0).density == 0.0);
    CHECK(cod_density(p, Cause::Natural, p.t_star() + 3.0).density == 0.0);
    CHECK(cod_density(p, Cause::Accident, 1e-9).density ==
          doctest::Approx(p.lambda * std::exp(-p.alpha * p.v)).epsilon(1e-7));
    CHECK(cod_density(p, Cause::Accident, 1e-9).atom_mass == 0.0);
    // continuous across the series switch near t*
    const double ts = p.t_star();
    double prev = cod_density(p, Cause::Natural, ts * (1.0 - 1e-6)).density;
    for (double eps : {1e-7, 1e-8, 1e-9, 1e-10, 1e-11}) {
      const double f = cod_density(p, Cause::Natural, ts * (1.0 - eps)).density;
      CHECK(f > 0.0);
      CHECK(std::abs(f - prev) <= 1e-3 * prev);
      prev = f;
    }
    CHECK_THROWS_AS(cod_density(p, Cause::Accident, 0.0), ValidationError);
  }

  TEST_CASE("completeness across a parameter grid") {
    const auto grid = parameter_grid();
    CHECK(grid.size() == 20);
    for (const auto& p : grid) {
      const auto split = prob_cause_split(p);
      CHECK(split.complete);
      CHECK(std::abs(split.p_accident + split.p_natural - 1.0) <= 1e-6);
      CHECK(split.p_accident > 0.0);
    }
  }

  TEST_CASE("densities and atom carry unit mass") {
    for (const CodParams& p : {CodParams{}, CodParams{60.0, 0.0001744, 1.082, 0.3, 0.5, 1.0}}) {
      const double acc = integrate_to_t_star(p, [&](double t) { return cod_density(p, Cause::Accident, t).density; });
      const double nat = integrate_to_t_star(p, [&](double t) { return cod_density(p, Cause::Natural, t).density; });
      const double atom = cod_density(p, Cause::Natural, 1.0).atom_mass;
      CHECK(std::abs(acc + nat + atom - 1.0) <= 1e-6);
      CHECK(std::abs(acc - cod_laplace_accident(p, 0.0)) <= 1e-6);
    }
  }

  TEST_CASE("laplace consistency with the densities") {
    const CodParams p;
    for (double q : {0.5, 1.0, 2.0}) {
      const double acc =
          integrate_to_t_star(p, [&](double t) { return std::exp(-q * t) * cod_density(p, Cause::Accident, t).density; });
      const double nat =
          integrate_to_t_star(p, [&](double t) { return std::exp(-q * t) * cod_density(p, Cause::Natural, t).density; }) +
          std::exp(-q * p.t_star()) * cod_density(p, Cause::Natural, 1.0).atom_mass;
      CHECK(std::abs(acc - cod_laplace_accident(p, q)) <= 1e-6);
      CHECK(std::abs(nat - cod_laplace_natural(p, q)) <= 1e-6);
    }
  }

  TEST_CASE("accident probability agrees with direct simulation") {
    const CodParams p;
    std::mt19937_64 gen(31);
    const int n = 100000;
    int accidents = 0;
    for (int i = 0; i < n; ++i) accidents += testsupport::simulate_cod(p.age_x, p.b, p.c, p.lambda, p.alpha, p.v, gen).accident;
    const double rate = static_cast<double>(accidents) / n;
    const double se = std::sqrt(rate * (1.0 - rate) / n);
    const double exact = cod_laplace_accident(p, 0.0);
    MESSAGE("accident probability " << exact << " simulated " << rate << " +- " << se);
    CHECK(std::abs(exact - rate) <= 3.0 * se);
  }

  TEST_CASE("very small jumps: overshoot deaths still occur") {
    CodParams p;
    p.alpha = 1e6;
    const auto split = prob_cause_split(p);
    CHECK(split.complete);
    CHECK(split.p_accident > 0.0);
    std::mt19937_64 gen(17);
    const int n = 100000;
    int accidents = 0;
    for (int i = 0; i < n; ++i) accidents += testsupport::simulate_cod(p.age_x, p.b, p.c, p.lambda, p.alpha, p.v, gen).accident;
    const double rate = static_cast<double>(accidents) / n;
    const double se = std::sqrt(std::max(rate, 1.0 / n) * (1.0 - rate) / n);
    MESSAGE("alpha=1e6 accident probability " << split.p_accident << " simulated " << rate);
    CHECK(std::abs(split.p_accident - rate) <= 3.0 * se);
  }

  TEST_CASE("distribution of the death time agrees with simulation") {
    const CodParams p;
    const double ts = p.t_star();
    // cdf table on (0, t*) from the density, then the atom at t*
    const int m = 20000;
    std::vector<double> grid(m + 1), cdf(m + 1, 0.0);
    for (int i = 0; i <= m; ++i) grid[i] = ts * i / m;
    for (int i = 1; i <= m; ++i) {
      const double a = grid[i - 1], b = grid[i], mid = 0.5 * (a + b);
      const double fa = a > 0.0 ? total_density(p, a) : p.lambda * std::exp(-p.alpha * p.v);
      cdf[i] = cdf[i - 1] + (b - a) / 6.0 * (fa + 4.0 * total_density(p, mid) + total_density(p, std::min(b, ts * (1 - 1e-15))));
    }
    auto F = [&](double t) {
      if (t >= ts) return 1.0;
      const double pos = t / ts * m;
      const int i = std::min(static_cast<int>(pos), m - 1);
      return cdf[i] + (pos - i) * (cdf[i + 1] - cdf[i]);
    };
    std::mt19937_64 gen(5);
    const int n = 100000;
    std::vector<double> draws(n);
    for (auto& d : draws) d = testsupport::simulate_cod(p.age_x, p.b, p.c, p.lambda, p.alpha, p.v, gen).time;
    // mixed law: continuous below t*, atom at t*. Sup over the continuous part
    // plus the left limit at t*.
    std::sort(draws.begin(), draws.end());
    double D = 0.0;
    std::size_t below = 0;
    for (std::size_t i = 0; i < draws.size() && draws[i] < ts; ++i, ++below) {
      const double f = F(draws[i]);
      D = std::max({D, (i + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    D = std::max(D, std::abs(static_cast<double>(below) / n - cdf[m]));
    MESSAGE("KS distance " << D << " critical " << testsupport::ks_critical_1pct(n));
    CHECK(D < testsupport::ks_critical_1pct(n));
    CHECK(std::abs(cdf[m] + cod_density(p, Cause::Natural, 1.0).atom_mass - 1.0) <= 1e-5);
  }
}
