#include <cmath>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "vitalkit/errors.hpp"
#include "vitalkit/fpt_approx.hpp"
#include "vitalkit/numerics.hpp"
#include "vitalkit/montecarlo.hpp"

using namespace vitalkit;

namespace {

constexpr double kSigma = 0.0036;
constexpr double kAge = 60.0;

// 1 - Y(t), Y written out independently of the library
double gompertz_gap(double t) {
  const GompertzTrend g{};
  return 1.0 - g.b * std::pow(g.c, kAge) * std::expm1(t * std::log(g.c)) / std::log(g.c);
}

BoundaryFn gompertz_boundary() { return boundary_from_trend(GompertzTrend{}, kAge); }

VitalityModel gompertz_model() {
  VitalityModel m;
  m.age_x = kAge;
  m.initial = Degenerate{1.0};
  m.trend = GompertzTrend{};
  m.diffusion = BrownianConst{kSigma};
  return m;
}

}  // namespace

TEST_SUITE("fpt") {
  TEST_CASE("linear boundary: tangent and every series order equal the inverse gaussian") {
    for (double delta : {0.2, 1.0}) {
      for (double sigma : {0.3, 1.0}) {
        const BoundaryFn b = boundary_from_trend(ConstantRate{delta}, 0.0);
        for (double t : {0.1, 0.5, 1.0, 2.5}) {
          const double ig = inverse_gaussian_density(1.0, delta, sigma, t);
          CHECK(std::abs(tangent_density(b, sigma, 1.0, t) - ig) <= 1e-12 * std::max(1.0, ig));
          CHECK(std::abs(durbin_density(b, sigma, 1.0, t, 1) - tangent_density(b, sigma, 1.0, t)) <= 1e-10);
          for (int k = 2; k <= 3; ++k) CHECK(std::abs(durbin_density(b, sigma, 1.0, t, k) - ig) <= 1e-8);
        }
      }
    }
  }

  TEST_CASE("durbin first order equals the tangent density on the gompertz boundary") {
    const BoundaryFn b = gompertz_boundary();
    for (double t : {19.8, 20.2, 20.4, 20.7}) {
      const double tan = tangent_density(b, kSigma, 1.0, t);
      CHECK(std::abs(durbin_density(b, kSigma, 1.0, t, 1) - tan) <= 1e-10 * std::max(1.0, tan));
    }
  }

  TEST_CASE("series corrections shrink with order on the central mass") {
    const BoundaryFn b = gompertz_boundary();
    for (double t = 20.0; t <= 20.8 + 1e-9; t += 0.1) {
      const auto q = durbin_terms(b, kSigma, 1.0, t, 3);
      CHECK(std::abs(q[2]) <= std::abs(q[1]));
      CHECK(std::abs(q[1]) <= 1e-3 * q[0]);
    }
  }

  TEST_CASE("tangent density mass") {
    const BoundaryFn b = gompertz_boundary();
    const double mass = testsupport::simpson([&](double t) { return t > 0.0 ? tangent_density(b, kSigma, 1.0, t) : 0.0; },
                                             15.0, 26.0, 20000);
    CHECK(mass <= 1.02);
    CHECK(mass >= 0.98);
  }

  TEST_CASE("density to survival") {
    CHECK(density_to_survival([](double) { return 5.0; }, 0.0).survival == 1.0);
    auto ig = [](double t) { return inverse_gaussian_density(1.0, 1.0, 1.0, t); };
    // Pr(tau > 1) = Phi(0) - e^2 Phi(-2)
    const double exact = 0.5 - std::exp(2.0) * std_normal_cdf(-2.0);
    CHECK(std::abs(exact - 0.331897999) < 1e-8);
    CHECK(std::abs(density_to_survival(ig, 1.0).survival - exact) <= 1e-8);
    CHECK_THROWS_AS(density_to_survival([](double) { return 2.0; }, 1.0), NumericalError);
    const auto clamp = density_to_survival([](double) { return 1.0005; }, 1.0);
    CHECK(clamp.clamped);
    CHECK(clamp.survival == 0.0);
  }

  TEST_CASE("gompertz survival from the series agrees with simulation") {
    const BoundaryFn b = gompertz_boundary();
    const auto model = gompertz_model();
    for (double T : {20.3, 20.6}) {
      const double approx =
          density_to_survival([&](double t) { return durbin_density(b, kSigma, 1.0, t, 3); }, T).survival;
      McConfig cfg;
      cfg.n_paths = 20000;
      cfg.rng = RngStream{77, 0};
      cfg.n_time_points = static_cast<int>(T * 50);
      const auto mc = mc_survival(model, 1.0, T, cfg);
      MESSAGE("T=" << T << " series " << approx << " mc " << mc.value << " +- " << mc.std_error);
      CHECK(std::abs(approx - mc.value) <= std::max(0.01, 3.0 * mc.std_error));
    }
  }

  TEST_CASE("tangent density matches simulated passage times near the mode") {
    const BoundaryFn b = gompertz_boundary();
    testsupport::FptSimulator sim(gompertz_gap, kSigma, 30.0);
    std::mt19937_64 gen(20240611);
    const int n = 200000;
    std::vector<double> times(n);
    for (auto& t : times) t = sim(gen);
    // mode of the tangent density
    double mode = 20.0, best = 0.0;
    for (double t = 19.5; t <= 21.5; t += 1e-3) {
      const double f = tangent_density(b, kSigma, 1.0, t);
      if (f > best) best = f, mode = t;
    }
    const double h = 0.02;
    double kde = 0.0;
    for (double t : times) {
      const double z = (t - mode) / h;
      kde += std::exp(-0.5 * z * z);
    }
    kde /= n * h * std::sqrt(2.0 * kPi);
    MESSAGE("mode " << mode << " tangent " << best << " kde " << kde);
    CHECK(std::abs(kde - best) <= 0.05 * best);
  }

  TEST_CASE("simulated histogram is consistent with the third-order series") {
    const BoundaryFn b = gompertz_boundary();
    testsupport::FptSimulator sim(gompertz_gap, kSigma, 30.0);
    std::mt19937_64 gen(99);
    const int n = 100000;
    const double lo = 19.9, width = 0.1;
    std::vector<int> counts(10, 0);
    for (int i = 0; i < n; ++i) {
      const double t = sim(gen);
      const int k = static_cast<int>(std::floor((t - lo) / width));
      if (k >= 0 && k < 10) ++counts[k];
    }
    double worst_z = 0.0;
    for (int k = 0; k < 10; ++k) {
      const double a = lo + k * width;
      const double p = testsupport::simpson([&](double t) { return durbin_density(b, kSigma, 1.0, t, 3); }, a, a + width, 40);
      const double se = std::sqrt(n * p * (1.0 - p));
      worst_z = std::max(worst_z, std::abs(counts[k] - n * p) / se);
    }
    MESSAGE("max |z| over 10 bins " << worst_z);
    CHECK(worst_z <= 4.0);
  }

  TEST_CASE("argument validation") {
    const BoundaryFn b = gompertz_boundary();
    CHECK_THROWS_AS(tangent_density(b, kSigma, 1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(durbin_density(b, kSigma, 1.0, 1.0, 4), ValidationError);
    CHECK_THROWS_AS(durbin_density(b, 0.0, 1.0, 1.0, 1), ValidationError);
  }
}
