#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace testsupport {

// Two-sided KS statistic of a sample against a continuous cdf.
inline double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

// 1% critical value of the one-sample KS test, large-n approximation.
inline double ks_critical_1pct(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

// Composite Simpson rule; oracle for smooth integrands independent of the library quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline bool within_se(double a, double b, double se, double k = 3.0) { return std::abs(a - b) <= k * se; }

}  // namespace testsupport

#include <random>

namespace testsupport {

// First passage of sigma B(t) through a decreasing boundary H(t). Coarse
// Gaussian steps, then exact Brownian-bridge bisection down to dt_min wherever
// a crossing has non-negligible probability. Independent of the library engine.
class FptSimulator {
 public:
  FptSimulator(std::function<double(double)> H, double sigma, double t_end, double dt = 0.01, double dt_min = 1e-5)
      : H_(std::move(H)), sigma_(sigma), dt_(dt), dt_min_(dt_min) {
    // start where the boundary sits 12 sd above the walk: earlier crossings are negligible
    double lo = 1e-9, hi = t_end;
    auto gap = [&](double t) { return H_(t) - 12.0 * sigma_ * std::sqrt(t); };
    if (gap(lo) <= 0.0) {
      t0_ = 0.0;
    } else {
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? lo : hi) = mid;
      }
      t0_ = lo;
    }
    for (double t = t0_; t <= t_end + dt_; t += dt_) {
      grid_.push_back(t);
      h_grid_.push_back(H_(t));
    }
  }

  // Returns the passage time, or +inf if none before the end of the grid.
  double operator()(std::mt19937_64& gen) const {
    double x = t0_ > 0.0 ? sigma_ * std::sqrt(t0_) * normal_(gen) : 0.0;
    for (std::size_t i = 1; i < grid_.size(); ++i) {
      const double x1 = x + sigma_ * std::sqrt(grid_[i] - grid_[i - 1]) * normal_(gen);
      double hit;
      if (x1 >= h_grid_[i]) {
        hit = locate_sure(grid_[i - 1], x, grid_[i], x1, gen);
      } else {
        hit = locate(grid_[i - 1], x, h_grid_[i - 1], grid_[i], x1, h_grid_[i], gen);
      }
      if (hit >= 0.0) return hit;
      x = x1;
    }
    return INFINITY;
  }

  double start() const { return t0_; }

 private:
  double bridge_mid(double a, double xa, double b, double xb, std::mt19937_64& gen) const {
    return 0.5 * (xa + xb) + sigma_ * std::sqrt(0.25 * (b - a)) * normal_(gen);
  }

  // both ends below the boundary
  double locate(double a, double xa, double ha, double b, double xb, double hb, std::mt19937_64& gen) const {
    const double p = std::exp(-2.0 * (ha - xa) * (hb - xb) / (sigma_ * sigma_ * (b - a)));
    if (p < 1e-14) return -1.0;
    if (b - a <= dt_min_) return uniform_(gen) < p ? 0.5 * (a + b) : -1.0;
    const double m = 0.5 * (a + b), xm = bridge_mid(a, xa, b, xb, gen), hm = H_(m);
    if (xm >= hm) return locate_sure(a, xa, m, xm, gen);
    const double r = locate(a, xa, ha, m, xm, hm, gen);
    return r >= 0.0 ? r : locate(m, xm, hm, b, xb, hb, gen);
  }

  // start below, end on or above the boundary
  double locate_sure(double a, double xa, double b, double xb, std::mt19937_64& gen) const {
    while (b - a > dt_min_) {
      const double m = 0.5 * (a + b), xm = bridge_mid(a, xa, b, xb, gen), hm = H_(m);
      if (xm >= hm) {
        b = m, xb = xm;
        continue;
      }
      const double r = locate(a, xa, H_(a), m, xm, hm, gen);
      if (r >= 0.0) return r;
      a = m, xa = xm;
    }
    return 0.5 * (a + b);
  }

  std::function<double(double)> H_;
  double sigma_, dt_, dt_min_, t0_ = 0.0;
  std::vector<double> grid_, h_grid_;
  mutable std::normal_distribution<double> normal_;
  mutable std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace testsupport

namespace testsupport {

struct CodDraw {
  double time = 0.0;
  bool accident = false;
};

// Direct simulation of v - Y(t) - J(t) for a Gompertz trend and compound Poisson
// Exp(alpha) jumps. Between jumps the path is deterministic, so the natural
// death time follows from inverting Y in closed form.
inline CodDraw simulate_cod(double age, double b, double c, double lambda, double alpha, double v,
                            std::mt19937_64& gen) {
  const double lc = std::log(c), scale = b * std::pow(c, age);
  auto Y = [&](double t) { return scale * std::expm1(t * lc) / lc; };
  auto Y_inv = [&](double y) { return std::log1p(y * lc / scale) / lc; };
  std::exponential_distribution<double> arrival(lambda), size(alpha);
  double t = 0.0, J = 0.0;
  for (;;) {
    const double natural = Y_inv(v - J);
    t += arrival(gen);
    if (t >= natural) return {natural, false};
    J += size(gen);
    if (J >= v - Y(t)) return {t, true};
  }
}

}  // namespace testsupport
