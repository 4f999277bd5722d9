#include "vitalkit/snlp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "vitalkit/errors.hpp"

namespace vitalkit {

SnlpParams snlp_params(const VitalityModel& model) {
  validate(model);
  const auto* trend = std::get_if<ConstantRate>(&model.trend);
  const auto* diffusion = std::get_if<BrownianConst>(&model.diffusion);
  const auto* intensity = std::get_if<ConstantIntensity>(&model.jump.intensity);
  require(trend != nullptr, "snlp: trend must be a constant rate");
  require(diffusion != nullptr, "snlp: diffusion must be Brownian with sigma > 0");
  require(intensity != nullptr, "snlp: jump intensity must be constant");

  SnlpParams p;
  p.delta = trend->delta;
  p.sigma = diffusion->sigma;
  p.lambda = intensity->lambda;
  if (p.lambda == 0.0) return p;

  std::map<double, double> merged;  // rate -> weight
  if (const auto* e = std::get_if<ExponentialJump>(&model.jump.size)) {
    merged[e->rate] = 1.0;
  } else if (const auto* m = std::get_if<MixtureExponential>(&model.jump.size)) {
    for (std::size_t i = 0; i < m->rates.size(); ++i) {
      if (m->weights[i] > 0.0) merged[m->rates[i]] += m->weights[i];
    }
  } else {
    throw ValidationError("snlp: jump sizes must be exponential or a mixture of exponentials");
  }
  for (const auto& [rate, weight] : merged) {
    p.rates.push_back(rate);
    p.weights.push_back(weight);
  }
  return p;
}

namespace {

template <class T>
T lundberg(const SnlpParams& p, T y, T q) {
  T value = 0.5 * p.sigma * p.sigma * y * y - p.delta * y - p.lambda - q;
  for (std::size_t i = 0; i < p.rates.size(); ++i) value += p.lambda * p.weights[i] * p.rates[i] / (y + p.rates[i]);
  return value;
}

template <class T>
T lundberg_derivative(const SnlpParams& p, T y) {
  T value = p.sigma * p.sigma * y - p.delta;
  for (std::size_t i = 0; i < p.rates.size(); ++i) {
    value -= p.lambda * p.weights[i] * p.rates[i] / ((y + p.rates[i]) * (y + p.rates[i]));
  }
  return value;
}

// Root strictly inside (lo, hi) where lo and/or hi may sit on a pole.
double bracketed_root(const SnlpParams& p, double q, double lo, double hi) {
  auto h = [&](double y) { return lundberg(p, y, q); };
  double a = lo;
  double b = hi;
  // step inward from the poles until the expected signs appear: + near lo, - near hi
  for (double eps = 1e-3 * (hi - lo); !(h(a) > 0.0); eps *= 0.5) {
    a = lo + eps;
    if (eps < 1e-300) throw NumericalError("snlp: could not bracket root near a pole");
  }
  for (double eps = 1e-3 * (hi - lo); !(h(b) < 0.0); eps *= 0.5) {
    b = hi - eps;
    if (eps < 1e-300) throw NumericalError("snlp: could not bracket root near a pole");
  }
  return bisect_root(h, a, b, 1e-13);
}

}  // namespace

std::vector<double> snlp_roots(const SnlpParams& p, double q) {
  require(q > 0.0, "snlp_roots: q must be positive");
  auto h = [&](double y) { return lundberg(p, y, q); };
  std::vector<double> roots;

  // theta_1 in (0, inf): h(0) = -q < 0 and h grows like y^2
  double upper = 1.0;
  while (h(upper) <= 0.0) {
    upper *= 2.0;
    if (upper > 1e300) throw NumericalError("snlp: theta_1 not bracketed");
  }
  roots.push_back(bisect_root(h, 0.0, upper, 1e-13));

  // poles at -rate, listed from closest to zero outwards
  std::vector<double> poles;
  for (double r : p.rates) poles.push_back(-r);
  std::sort(poles.begin(), poles.end(), std::greater<>());

  if (poles.empty()) {
    double lower = -1.0;
    while (h(lower) <= 0.0) lower *= 2.0;
    roots.push_back(bisect_root(h, lower, 0.0, 1e-13));
  } else {
    // (-alpha_min, 0): h -> +inf at the pole, h(0) < 0
    roots.push_back(bracketed_root(p, q, poles.front(), 0.0));
    for (std::size_t j = 0; j + 1 < poles.size(); ++j) {
      roots.push_back(bracketed_root(p, q, poles[j + 1], poles[j]));
    }
    // (-inf, -alpha_max): h -> -inf at the pole from the left, +inf at -inf
    const double pole = poles.back();
    double far = pole - 1.0;
    while (h(far) <= 0.0) far = pole - 2.0 * (pole - far);
    double near = pole - 1e-3;
    for (double eps = 1e-3; !(h(near) < 0.0); eps *= 0.5) {
      near = pole - eps;
      if (eps < 1e-300) throw NumericalError("snlp: could not bracket the last root");
    }
    roots.push_back(bisect_root(h, far, near, 1e-13));
  }

  // the root near zero is O(q), so an absolute bisection tolerance is not enough: polish by Newton
  for (double& y : roots) {
    for (int it = 0; it < 4; ++it) {
      const double step = h(y) / lundberg_derivative<double>(p, y);
      if (!std::isfinite(step) || std::abs(h(y - step)) >= std::abs(h(y))) break;
      y -= step;
    }
  }
  if (roots.size() != p.rates.size() + 2) throw NumericalError("snlp: root count mismatch");
  for (std::size_t i = 1; i < roots.size(); ++i) {
    if (!(roots[i] < roots[i - 1])) throw NumericalError("snlp: root ordering violated");
  }
  if (!(roots[0] >= 0.0 && roots[1] <= 0.0)) throw NumericalError("snlp: root ordering violated");
  return roots;
}

std::vector<std::complex<double>> snlp_roots(const SnlpParams& p, std::complex<double> q) {
  using cd = std::complex<double>;
  // Multiply through by prod (y + alpha_i): polynomial coefficients, lowest degree first.
  auto mul = [](const std::vector<cd>& a, const std::vector<cd>& b) {
    std::vector<cd> out(a.size() + b.size() - 1, cd(0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
  };
  const std::size_t n = p.rates.size();
  std::vector<cd> prod{cd(1.0)};
  for (double r : p.rates) prod = mul(prod, {cd(r), cd(1.0)});
  std::vector<cd> poly = mul(prod, {-p.lambda - q, cd(-p.delta), cd(0.5 * p.sigma * p.sigma)});
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<cd> others{cd(p.lambda * p.weights[i] * p.rates[i])};
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others = mul(others, {cd(p.rates[j]), cd(1.0)});
    for (std::size_t k = 0; k < others.size(); ++k) poly[k] += others[k];
  }
  const std::size_t degree = n + 2;
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
  for (std::size_t i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (std::size_t i = 0; i < degree; ++i) companion(i, degree - 1) = -poly[i] / poly[degree];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw NumericalError("snlp: eigenvalue solver failed");

  std::vector<cd> roots;
  for (std::size_t i = 0; i < degree; ++i) {
    cd y = solver.eigenvalues()(i);
    for (int it = 0; it < 4; ++it) {
      const cd step = lundberg<cd>(p, y, q) / lundberg_derivative<cd>(p, y);
      if (!std::isfinite(std::abs(step))) break;
      y -= step;
    }
    roots.push_back(y);
  }
  std::sort(roots.begin(), roots.end(), [](cd a, cd b) { return a.real() > b.real(); });
  const auto positive =
      std::count_if(roots.begin(), roots.end(), [](cd r) { return r.real() > 0.0; });
  if (positive != 1) throw NumericalError("snlp: expected exactly one root with positive real part");
  return roots;
}

namespace {

template <class T>
T laplace_from_roots(const SnlpParams& p, double v, T q, const std::vector<T>& roots) {
  // The i = 1 term of the two sums cancels exactly; keep the rest.
  const T theta1 = roots[0];
  T sum = 0.0;
  for (std::size_t i = 1; i < roots.size(); ++i) {
    const T theta = roots[i];
    sum += std::exp(theta * v) / lundberg_derivative<T>(p, theta) * (1.0 / theta - 1.0 / theta1);
  }
  return q * sum;
}

}  // namespace

double snlp_laplace_tau(const SnlpParams& p, double v, double q) {
  require(v > 0.0, "snlp_laplace_tau: v must be positive");
  require(q > 0.0, "snlp_laplace_tau: q must be positive");
  return laplace_from_roots<double>(p, v, q, snlp_roots(p, q));
}

std::complex<double> snlp_laplace_tau(const SnlpParams& p, double v, std::complex<double> q) {
  require(v > 0.0, "snlp_laplace_tau: v must be positive");
  require(q.real() > 0.0, "snlp_laplace_tau: q must have positive real part");
  return laplace_from_roots<std::complex<double>>(p, v, q, snlp_roots(p, q));
}

double snlp_laplace_tau(const VitalityModel& model, double v, double q) {
  return snlp_laplace_tau(snlp_params(model), v, q);
}

double survival_snlp(const VitalityModel& model, double v, double T, const LaplaceOptions& options) {
  require(T >= 0.0, "survival_snlp: T must be non-negative");
  const SnlpParams p = snlp_params(model);
  require(v > 0.0, "survival_snlp: v must be positive");
  if (T == 0.0) return 1.0;
  auto transform = [&](std::complex<double> q) { return (1.0 - snlp_laplace_tau(p, v, q)) / q; };
  return std::clamp(laplace_invert(transform, T, options), 0.0, 1.0);
}

}  // namespace vitalkit
