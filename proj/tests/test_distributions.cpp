#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "vitalkit/distributions.hpp"
#include "vitalkit/errors.hpp"
#include "vitalkit/numerics.hpp"

using namespace vitalkit;

namespace {

std::vector<InitialVitalityDist> samplable() {
  return {Exponential{1.0}, Exponential{2.5}, ParetoII{2.0, 1.0}, ParetoII{0.7, 3.0}, GompertzDist{0.05},
          GompertzDist{2.0}};
}

// n-fold convolution of Exp(a) densities by nested Simpson quadrature
double convolution_oracle(double a, int n, double z) {
  std::function<double(int, double)> dens = [&](int k, double x) -> double {
    if (x < 0.0) return 0.0;
    if (k == 1) return a * std::exp(-a * x);
    return testsupport::simpson([&](double u) { return a * std::exp(-a * u) * dens(k - 1, x - u); }, 0.0, x, 60);
  };
  return testsupport::simpson([&](double x) { return dens(n, x); }, 0.0, z, 60);
}

}  // namespace

TEST_SUITE("distributions") {
  TEST_CASE("survival values") {
    CHECK(survival(Exponential{1.0}, 0.0) == 1.0);
    CHECK(survival(ParetoII{2.0, 1.0}, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(survival(Exponential{1.0}, 0.300262) == doctest::Approx(std::exp(-0.300262)).epsilon(1e-15));
    CHECK(survival(GompertzDist{1.5}, 0.4) == doctest::Approx(std::exp(-1.5 * (std::exp(0.4) - 1.0))).epsilon(1e-14));
    CHECK(survival(Degenerate{2.0}, 1.99) == 1.0);
    CHECK(survival(Degenerate{2.0}, 2.0) == 0.0);
    CHECK_THROWS_AS(survival(Exponential{1.0}, -0.1), ValidationError);
  }

  TEST_CASE("survival is a monotone probability on a fine grid") {
    for (const auto& d : samplable()) {
      double prev = 1.0;
      for (int i = 0; i < 1000; ++i) {
        const double s = survival(d, i * 0.02);
        CHECK((s >= 0.0 && s <= 1.0));
        CHECK(s <= prev);
        prev = s;
      }
      CHECK(survival(d, 0.0) == 1.0);
    }
  }

  TEST_CASE("quantile inverts the cdf") {
    CHECK(quantile(Exponential{1.0}, 1.0 - std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    for (const auto& d : samplable())
      for (double v : {0.05, 0.3, 1.0, 2.2}) {
        const double p = 1.0 - survival(d, v);
        CHECK(std::abs(quantile(d, p) - v) <= 1e-9);
      }
    CHECK_THROWS_AS(quantile(Exponential{1.0}, 1.0), ValidationError);
  }

  TEST_CASE("densities") {
    CHECK(density(GompertzDist{1.0}, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(density(Degenerate{1.0}, 0.5), ValidationError);
    for (const auto& d : std::vector<InitialVitalityDist>{Exponential{1.3}, ParetoII{2.0, 1.0}, GompertzDist{0.5}}) {
      const double mass = adaptive_integrate([&](double v) { return density(d, v); }, 0.0, INFINITY).value;
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
      for (double v : {0.2, 1.0, 3.0}) {
        const double h = 1e-6;
        CHECK(density(d, v) == doctest::Approx((cdf(d, v + h) - cdf(d, v - h)) / (2 * h)).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("sample mean of exponential draws") {
    Engine e(RngStream{2024, 0});
    double s = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) s += sample(Exponential{1.0}, e);
    CHECK(std::abs(s / n - 1.0) <= 0.005);
  }

  TEST_CASE("samples pass a KS test against the analytic cdf") {
    int k = 0;
    for (const auto& d : samplable()) {
      Engine e(RngStream{99, static_cast<std::uint64_t>(k++)});
      std::vector<double> xs(100000);
      for (auto& x : xs) x = sample(d, e);
      CHECK(testsupport::ks_distance(xs, [&](double v) { return cdf(d, v); }) <= testsupport::ks_critical_1pct(xs.size()));
    }
  }

  TEST_CASE("mixing laws") {
    const MixingDist g = GammaMix{2.0, 3.0};
    CHECK(mixing_cdf(g, 0.5) == doctest::Approx(boost::math::gamma_p(2.0, 1.5)).epsilon(1e-14));
    CHECK(mixing_laplace(g, 0.7) == doctest::Approx(std::pow(1.0 + 0.7 / 3.0, -2.0)).epsilon(1e-14));
    // Dagum with a = 1 has Laplace transform int e^{-u} (1 + b s / u)^{-p} du; check against Simpson
    const MixingDist dg = DagumMix{1.5, 1.0, 0.8};
    const double s = 1.7;
    const double oracle =
        testsupport::simpson([&](double u) { return u <= 0 ? 0.0 : std::exp(-u) * std::pow(1.0 + 0.8 * s / u, -1.5); },
                             0.0, 60.0, 200000);
    CHECK(mixing_laplace(dg, s) == doctest::Approx(oracle).epsilon(1e-6));
    for (const auto& m : {g, dg}) {
      Engine e(RngStream{5, 1});
      std::vector<double> xs(100000);
      for (auto& x : xs) x = mixing_sample(m, e);
      CHECK(testsupport::ks_distance(xs, [&](double z) { return mixing_cdf(m, z); }) <=
            testsupport::ks_critical_1pct(xs.size()));
    }
  }

  TEST_CASE("jump sizes") {
    Engine e(RngStream{1, 1});
    CHECK(std::isinf(sample_jump(Fatal{}, e)));
    CHECK(is_fatal(Fatal{}));
    CHECK_FALSE(is_fatal(ExponentialJump{1.0}));
    CHECK(jump_mean(MixtureExponential{{0.25, 0.75}, {1.0, 3.0}}) == doctest::Approx(0.5));
    // negative sizes are allowed for NormalJump
    bool negative = false;
    for (int i = 0; i < 1000; ++i) negative |= sample_jump(NormalJump{0.0, 1.0}, e) < 0.0;
    CHECK(negative);
    CHECK_THROWS_AS(validate(JumpSizeDist{MixtureExponential{{0.5, 0.4}, {1.0, 2.0}}}), ValidationError);
    CHECK_THROWS_AS(validate(JumpSizeDist{ExponentialJump{0.0}}), ValidationError);
    double m = 0.0;
    for (int i = 0; i < 200000; ++i) m += sample_jump(MixtureExponential{{0.25, 0.75}, {1.0, 3.0}}, e);
    CHECK(std::abs(m / 200000 - 0.5) < 0.01);
  }

  TEST_CASE("erlang cdf") {
    CHECK(mixture_exponential_convolution_cdf(ExponentialJump{1.0}, 1, 0.0) == 0.0);
    CHECK(mixture_exponential_convolution_cdf(ExponentialJump{1.0}, 0, 5.0) == 1.0);
    CHECK(std::abs(mixture_exponential_convolution_cdf(ExponentialJump{2.0}, 3, 1.0) - 0.3233236) <= 1e-7);
    for (int n : {1, 2, 5, 40})
      for (double z : {0.1, 1.0, 10.0, 60.0})
        CHECK(mixture_exponential_convolution_cdf(ExponentialJump{2.0}, n, z) ==
              doctest::Approx(boost::math::gamma_p(static_cast<double>(n), 2.0 * z)).epsilon(1e-12));
    CHECK_THROWS_AS(mixture_exponential_convolution_cdf(MixtureExponential{{1.0}, {1.0}}, 2, 1.0), ValidationError);
  }

  TEST_CASE("erlang cdf equals brute-force convolution") {
    for (int n = 1; n <= 4; ++n)
      for (double z : {0.3, 1.0, 2.5})
        CHECK(std::abs(mixture_exponential_convolution_cdf(ExponentialJump{1.5}, n, z) - convolution_oracle(1.5, n, z)) <=
              1e-6);
  }

  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(validate(InitialVitalityDist{Exponential{-1.0}}), ValidationError);
    CHECK_THROWS_AS(validate(InitialVitalityDist{ParetoII{1.0, 0.0}}), ValidationError);
    CHECK_THROWS_AS(validate(InitialVitalityDist{GompertzDist{0.0}}), ValidationError);
    CHECK_THROWS_AS(validate(MixingDist{DagumMix{1.0, -1.0, 1.0}}), ValidationError);
    CHECK_NOTHROW(validate(InitialVitalityDist{Degenerate{0.5}}));
  }
}
