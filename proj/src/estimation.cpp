#include "vitalkit/estimation.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "json.hpp"
#include "vitalkit/errors.hpp"
#include "vitalkit/numerics.hpp"

namespace vitalkit {

namespace {

std::string trim(const std::string& s) {
  const auto lo = s.find_first_not_of(" \t\r");
  if (lo == std::string::npos) return "";
  const auto hi = s.find_last_not_of(" \t\r");
  return s.substr(lo, hi - lo + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string where(const std::string& path, int line_no) { return path + ":" + std::to_string(line_no) + ": "; }

template <class T>
T parse_number(const std::string& text, const std::string& context) {
  std::size_t used = 0;
  T value{};
  try {
    if constexpr (std::is_same_v<T, double>) {
      value = std::stod(text, &used);
    } else {
      value = static_cast<T>(std::stoll(text, &used));
    }
  } catch (const std::exception&) {
    throw ValidationError(context + "cannot parse '" + text + "'");
  }
  if (used != text.size()) throw ValidationError(context + "cannot parse '" + text + "'");
  return value;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return in;
}

double log_factorial(std::int64_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace

void validate(const CohortData& data) {
  require(data.exposure > 0, "cohort exposure must be positive");
  require(!data.deaths.empty(), "cohort needs at least one death count");
  std::int64_t total = 0;
  for (auto d : data.deaths) {
    require(d >= 0, "cohort death counts must be non-negative");
    total += d;
  }
  require(total <= data.exposure, "cohort deaths exceed exposure");
}

void validate(const AccidentRateTable& table) {
  require(!table.rows.empty(), "accident table is empty");
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    require(r.age_lo <= r.age_hi, "accident band has age_lo > age_hi");
    require(r.rate >= 0.0 && std::isfinite(r.rate), "accident rate must be non-negative");
    // touching endpoints are allowed; the shared age goes to the lower band
    if (i > 0) require(r.age_lo >= table.rows[i - 1].age_hi, "accident bands must be ordered and non-overlapping");
  }
}

CohortData load_cohort_csv(const std::string& path) {
  auto in = open_or_throw(path);
  CohortData data;
  bool have_header = false, have_exposure = false, have_start = false;
  int expected_age = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string token;
      while (ss >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
        if (key == "exposure") {
          data.exposure = parse_number<std::int64_t>(value, where(path, line_no));
          have_exposure = true;
        } else if (key == "start_age") {
          data.age_x = parse_number<int>(value, where(path, line_no));
          have_start = true;
        }
      }
      continue;
    }
    const auto cells = split_csv(line);
    if (!have_header) {
      if (cells.size() != 2 || cells[0] != "age" || cells[1] != "deaths")
        throw ValidationError(where(path, line_no) + "expected header 'age,deaths'");
      have_header = true;
      continue;
    }
    if (cells.size() != 2) throw ValidationError(where(path, line_no) + "expected 2 fields");
    const int age = parse_number<int>(cells[0], where(path, line_no));
    const auto deaths = parse_number<std::int64_t>(cells[1], where(path, line_no));
    if (data.deaths.empty()) {
      expected_age = age;
    } else if (age != expected_age) {
      throw ValidationError(where(path, line_no) + "ages must be contiguous");
    }
    if (deaths < 0) throw ValidationError(where(path, line_no) + "negative death count");
    data.deaths.push_back(deaths);
    ++expected_age;
  }
  require(have_header, path + ": missing header");
  require(have_exposure, path + ": missing '# exposure=' metadata");
  const int first_age = expected_age - static_cast<int>(data.deaths.size());
  if (have_start) {
    require(data.deaths.empty() || first_age == data.age_x, path + ": first age differs from start_age");
  } else {
    data.age_x = first_age;
  }
  validate(data);
  return data;
}

AccidentRateTable load_accident_csv(const std::string& path) {
  auto in = open_or_throw(path);
  AccidentRateTable table;
  bool have_header = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (!have_header) {
      if (cells.size() != 3 || cells[0] != "age_lo" || cells[1] != "age_hi" || cells[2] != "rate")
        throw ValidationError(where(path, line_no) + "expected header 'age_lo,age_hi,rate'");
      have_header = true;
      continue;
    }
    if (cells.size() != 3) throw ValidationError(where(path, line_no) + "expected 3 fields");
    AccidentBand band;
    band.age_lo = parse_number<int>(cells[0], where(path, line_no));
    band.age_hi = parse_number<int>(cells[1], where(path, line_no));
    band.rate = parse_number<double>(cells[2], where(path, line_no));
    table.rows.push_back(band);
  }
  require(have_header, path + ": missing header");
  validate(table);
  return table;
}

LogLikelihood log_likelihood(const std::vector<double>& survival, const CohortData& data,
                             const LikelihoodOptions& options) {
  validate(data);
  const std::size_t n = data.deaths.size();
  require(survival.size() >= n + 1, "log_likelihood: survival must cover horizons 0..T_max+1");
  for (std::size_t t = 0; t <= n; ++t) {
    require(std::isfinite(survival[t]) && survival[t] >= 0.0 && survival[t] <= 1.0 + 1e-12,
            "log_likelihood: survival values must lie in [0, 1]");
    if (t > 0) require(survival[t] <= survival[t - 1] + 1e-12, "log_likelihood: survival input is not monotone");
  }
  constexpr double kFloor = 1e-300;
  LogLikelihood ll;
  ll.constant = log_factorial(data.exposure);
  std::vector<double> terms;
  terms.reserve(n + 1);
  std::int64_t total = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto d = data.deaths[t];
    total += d;
    ll.constant -= log_factorial(d);
    if (d == 0) continue;
    double p = survival[t] - survival[t + 1];
    if (p < kFloor) {
      p = kFloor;
      ll.floored = true;
    }
    terms.push_back(static_cast<double>(d) * std::log(p));
  }
  if (options.censoring_cell) {
    const auto alive = data.exposure - total;
    ll.constant -= log_factorial(alive);
    if (alive > 0) {
      double p = survival[n];
      if (p < kFloor) {
        p = kFloor;
        ll.floored = true;
      }
      terms.push_back(static_cast<double>(alive) * std::log(p));
    }
  }
  ll.value = pairwise_sum(terms) + ll.constant;
  return ll;
}

LogLikelihood log_likelihood(const VitalityModel& model, const CohortData& data, const SurvivalFn& survival_fn,
                             const LikelihoodOptions& options) {
  validate(data);
  return log_likelihood(survival_fn(model, static_cast<int>(data.deaths.size())), data, options);
}

SurvivalFn static_survival_fn() {
  return [](const VitalityModel& model, int k_max) {
    std::vector<double> s(k_max + 1);
    for (int k = 0; k <= k_max; ++k) s[k] = survival_static(model, k);
    return s;
  };
}

SurvivalFn piecewise_survival_fn(const McConfig& cfg) {
  return [cfg](const VitalityModel& model, int k_max) {
    const auto curve = piecewise_survival_curve(model, nullptr, k_max, cfg);
    std::vector<double> s(curve.size());
    for (std::size_t k = 0; k < curve.size(); ++k) s[k] = curve[k].value;
    // stratified estimates are monotone per path, so the mean is too; clamp rounding
    for (std::size_t k = 1; k < s.size(); ++k) s[k] = std::min(s[k], s[k - 1]);
    return s;
  };
}

PiecewiseIntensity calibrate_jump_intensity(const AccidentRateTable& table, int age_x, int n_years) {
  validate(table);
  require(n_years >= 1, "calibrate_jump_intensity: n_years must be positive");
  PiecewiseIntensity out;
  out.rates.reserve(n_years);
  for (int t = 0; t < n_years; ++t) {
    const int age = age_x + t;
    const auto it = std::find_if(table.rows.begin(), table.rows.end(),
                                 [&](const AccidentBand& r) { return r.age_lo <= age && age <= r.age_hi; });
    if (it == table.rows.end()) throw ValidationError("accident table does not cover age " + std::to_string(age));
    out.rates.push_back(it->rate);
  }
  return out;
}

// --- fitting ---------------------------------------------------------------

namespace {

enum class Coord { LogB, LogCm1, LogSigma };

struct Problem {
  VitalityModel base;
  std::vector<Coord> coords;
  const CohortData* data;
  SurvivalFn survival_fn;
  LikelihoodOptions likelihood;
  double sigma0 = 0.0;

  VitalityModel at(const double* x) const {
    VitalityModel m = base;
    auto g = std::get<GompertzTrend>(m.trend);
    double sigma = sigma0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      switch (coords[i]) {
        case Coord::LogB: g.b = std::exp(x[i]); break;
        case Coord::LogCm1: g.c = 1.0 + std::exp(x[i]); break;
        case Coord::LogSigma: sigma = std::exp(x[i]); break;
      }
    }
    m.trend = g;
    if (sigma > 0.0) m.diffusion = BrownianConst{sigma};
    return m;
  }

  LogLikelihood evaluate(const double* x) const {
    return log_likelihood(at(x), *data, survival_fn, likelihood);
  }

  double negative(const double* x) const {
    try {
      const double v = evaluate(x).value;
      return std::isfinite(v) ? -v : 1e300;
    } catch (const std::exception&) {
      return 1e300;
    }
  }
};

double gsl_objective(const gsl_vector* x, void* params) {
  return static_cast<const Problem*>(params)->negative(x->data);
}

struct SimplexRun {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

SimplexRun run_simplex(const Problem& problem, const std::vector<double>& start, const FitOptions& options) {
  const std::size_t n = start.size();
  gsl_multimin_function fn{&gsl_objective, n, const_cast<Problem*>(&problem)};
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), &gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(n), &gsl_vector_free);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x.get(), i, start[i]);
    gsl_vector_set(step.get(), i, 0.1);
  }
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), &gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());
  SimplexRun run;
  while (run.iterations < options.max_iterations) {
    ++run.iterations;
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), options.tolerance) == GSL_SUCCESS) {
      run.converged = true;
      break;
    }
  }
  run.x.assign(s->x->data, s->x->data + n);
  run.f = s->fval;
  return run;
}

// Inverse Hessian of -ll in transformed coordinates by central differences.
// A simulated likelihood is rough at small scales, so it gets a wider step.
std::optional<Eigen::MatrixXd> covariance(const Problem& problem, const std::vector<double>& x, double h) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd hess(n, n);
  auto f = [&](std::vector<double> p) { return problem.negative(p.data()); };
  const double f0 = f(x);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double value;
      if (i == j) {
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        value = (f(xp) - 2.0 * f0 + f(xm)) / (h * h);
      } else {
        auto pp = x, pm = x, mp = x, mm = x;
        pp[i] += h, pp[j] += h;
        pm[i] += h, pm[j] -= h;
        mp[i] -= h, mp[j] += h;
        mm[i] -= h, mm[j] -= h;
        value = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
      }
      hess(i, j) = hess(j, i) = value;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(hess);
  if (llt.info() != Eigen::Success || !hess.allFinite()) return std::nullopt;
  return llt.solve(Eigen::MatrixXd::Identity(n, n));
}

}  // namespace

FitResult fit_mle(const VitalityModel& model_template, const FreeParams& free, const CohortData& data,
                  const IntensitySpec& fixed_intensity, const FitOptions& options) {
  validate(data);
  validate(fixed_intensity);
  require(std::holds_alternative<GompertzTrend>(model_template.trend), "fit_mle: template trend must be Gompertz");
  require(options.starts >= 1, "fit_mle: starts must be positive");
  require(options.tolerance > 0.0 && options.max_iterations > 0, "fit_mle: bad optimizer settings");
  require(free.b || free.c || free.sigma, "fit_mle: no free parameters");

  Problem problem;
  problem.base = model_template;
  problem.base.jump = JumpSpec{fixed_intensity, Fatal{}};
  problem.data = &data;
  problem.likelihood = options.likelihood;
  problem.sigma0 = diffusion_sigma(model_template);
  const auto g0 = std::get<GompertzTrend>(model_template.trend);
  std::vector<double> x0;
  if (free.b) problem.coords.push_back(Coord::LogB), x0.push_back(std::log(g0.b));
  if (free.c) problem.coords.push_back(Coord::LogCm1), x0.push_back(std::log(g0.c - 1.0));
  if (free.sigma) {
    require(problem.sigma0 > 0.0, "fit_mle: free sigma needs a positive starting sigma in the template");
    problem.coords.push_back(Coord::LogSigma), x0.push_back(std::log(problem.sigma0));
  }
  const bool stochastic = problem.sigma0 > 0.0;
  problem.survival_fn = stochastic ? piecewise_survival_fn(options.mc) : static_survival_fn();
  validate(problem.at(x0.data()));

  // fixed offsets in transformed coordinates; start 0 is the template itself
  static const double kOffsets[][3] = {{0, 0, 0}, {0.5, -0.1, 0.5}, {-0.5, 0.1, -0.5}, {1.0, -0.2, 1.0}, {-1.0, 0.2, -1.0},
                                       {0.25, 0.05, -1.5}, {-0.25, -0.05, 1.5}};
  constexpr int kNumOffsets = sizeof(kOffsets) / sizeof(kOffsets[0]);
  SimplexRun best;
  best.f = std::numeric_limits<double>::infinity();
  int total_iterations = 0;
  for (int s = 0; s < options.starts; ++s) {
    auto start = x0;
    const int row = s % kNumOffsets;
    const double scale = 1.0 + s / kNumOffsets;
    for (std::size_t i = 0; i < start.size(); ++i) start[i] += scale * kOffsets[row][static_cast<int>(problem.coords[i])];
    SimplexRun run = run_simplex(problem, start, options);
    total_iterations += run.iterations;
    if (run.f < best.f) best = run;
  }

  FitResult fit;
  const VitalityModel fitted = problem.at(best.x.data());
  const auto g = std::get<GompertzTrend>(fitted.trend);
  const double sigma = diffusion_sigma(fitted);
  fit.params["b"] = g.b;
  fit.params["c"] = g.c;
  if (stochastic) fit.params["sigma"] = sigma;
  const LogLikelihood ll = problem.evaluate(best.x.data());
  fit.loglik = ll.value;
  fit.loglik_constant = ll.constant;
  fit.n_iterations = total_iterations;
  fit.converged = best.converged && std::isfinite(best.f) && best.f < 1e300;
  fit.boundary = g.b < 1e-12 || g.b > 1e3 || g.c - 1.0 < 1e-4 || g.c > 10.0 ||
                 (free.sigma && (sigma < 1e-6 || sigma > 10.0));
  if (options.std_errors) {
    if (auto cov = covariance(problem, best.x, stochastic ? 2e-2 : 1e-3)) {
      std::map<std::string, double> se;
      for (std::size_t i = 0; i < problem.coords.size(); ++i) {
        const double sd = std::sqrt((*cov)(i, i));
        switch (problem.coords[i]) {
          case Coord::LogB: se["b"] = g.b * sd; break;
          case Coord::LogCm1: se["c"] = (g.c - 1.0) * sd; break;
          case Coord::LogSigma: se["sigma"] = sigma * sd; break;
        }
      }
      fit.std_errors = se;
    }
  }
  return fit;
}

FitResult fit_gompertz_law(const CohortData& data, const FitOptions& options) {
  VitalityModel m;
  m.age_x = data.age_x;
  m.initial = Exponential{1.0};
  m.trend = GompertzTrend{};
  m.diffusion = NoDiffusion{};
  return fit_mle(m, FreeParams{true, true, false}, data, ConstantIntensity{0.0}, options);
}

CohortData simulate_cohort(const std::vector<double>& survival, int age_x, std::int64_t exposure, RngStream rng) {
  require(survival.size() >= 2, "simulate_cohort: need survival at horizons 0..T_max+1");
  require(exposure > 0, "simulate_cohort: exposure must be positive");
  CohortData data;
  data.age_x = age_x;
  data.exposure = exposure;
  Engine engine(rng);
  std::int64_t alive = exposure;
  for (std::size_t t = 0; t + 1 < survival.size(); ++t) {
    const double q = survival[t] > 0.0 ? std::clamp(1.0 - survival[t + 1] / survival[t], 0.0, 1.0) : 1.0;
    std::binomial_distribution<std::int64_t> deaths(alive, q);
    const auto d = alive > 0 ? deaths(engine) : 0;
    data.deaths.push_back(d);
    alive -= d;
  }
  return data;
}

std::string to_json(const FitResult& fit) {
  nlohmann::ordered_json j;
  j["params"] = fit.params;
  j["loglik"] = fit.loglik;
  j["loglik_constant"] = fit.loglik_constant;
  j["converged"] = fit.converged;
  j["boundary"] = fit.boundary;
  j["n_iterations"] = fit.n_iterations;
  if (fit.std_errors) j["std_errors"] = *fit.std_errors;
  return j.dump(2);
}

}  // namespace vitalkit
