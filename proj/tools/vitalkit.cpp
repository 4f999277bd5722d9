// Command-line front end: survival tables, fitting, pricing, cause-of-death
// splits, lifecycle policies and disability probabilities from an INI config.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vitalkit/actuarial.hpp"
#include "vitalkit/cause_of_death.hpp"
#include "vitalkit/errors.hpp"
#include "vitalkit/estimation.hpp"
#include "vitalkit/lifecycle.hpp"
#include "vitalkit/model.hpp"
#include "vitalkit/montecarlo.hpp"
#include "vitalkit/snlp.hpp"

using namespace vitalkit;

namespace {

// --- output tables -----------------------------------------------------------

using Cell = std::variant<std::monostate, double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        else if constexpr (std::is_same_v<T, double>) return format_real(v);
        else if constexpr (std::is_same_v<T, long long>) return std::to_string(v);
        else return v;
      },
      c);
}

std::string to_csv(const Table& t) {
  std::ostringstream out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << '\n';
  }
  return out.str();
}

nlohmann::ordered_json to_json_rows(const Table& t) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) obj[t.columns[i]] = nullptr;
            else obj[t.columns[i]] = v;
          },
          row[i]);
    }
    rows.push_back(obj);
  }
  return rows;
}

// --- config --------------------------------------------------------------------

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"model", {"age"}},
    {"initial", {"kind", "rate", "shape", "scale", "v"}},
    {"trend",
     {"kind", "delta", "rates", "b", "c", "base", "mix", "mix_shape", "mix_rate", "dagum_p", "dagum_a", "dagum_b"}},
    {"diffusion", {"sigma"}},
    {"jump", {"lambda", "rates", "size", "rate", "weights", "size_rates", "mean", "sd"}},
    {"survive", {"t_max", "t_step", "method", "v", "n_paths", "antithetic", "plot"}},
    {"fit", {"cohort", "accidents", "model", "starts", "n_paths", "censoring", "std_errors", "max_iterations",
             "tolerance"}},
    {"price", {"force_of_interest", "v"}},
    {"cod", {"age", "b", "c", "lambda", "alpha", "v", "q"}},
    {"lifecycle", {"r", "theta", "sigma_S", "beta", "lambda_bequest", "delta", "sigma_V", "v0", "a0", "v_max", "n_grid",
                   "dt", "n_paths", "paths_out"}},
    {"disability", {"kind", "omega", "T", "n_paths"}},
};

class Config {
 public:
  explicit Config(const std::string& path) {
    try {
      boost::property_tree::ini_parser::read_ini(path, tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ValidationError("config: " + std::string(e.what()));
    }
    for (const auto& [section, body] : tree_) {
      const auto known = kKnownKeys.find(section);
      if (known == kKnownKeys.end()) throw ValidationError("config: unknown section [" + section + "]");
      if (!body.data().empty()) throw ValidationError("config: " + section + " must be a section");
      for (const auto& kv : body)
        if (!known->second.count(kv.first)) throw ValidationError(section + "." + kv.first + ": unknown key");
    }
  }

  bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

  std::string str(const std::string& key, const std::string& fallback) const {
    return tree_.get<std::string>(key, fallback);
  }

  std::string required_str(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v || v->empty()) throw ValidationError(key + ": required");
    return *v;
  }

  double num(const std::string& key, double fallback) const {
    return has(key) ? parse(key, tree_.get<std::string>(key)) : fallback;
  }

  double required_num(const std::string& key) const {
    if (!has(key)) throw ValidationError(key + ": required");
    return parse(key, tree_.get<std::string>(key));
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback = {}) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    std::stringstream ss(tree_.get<std::string>(key));
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse(key, item));
    if (out.empty()) throw ValidationError(key + ": empty list");
    return out;
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto v = tree_.get<std::string>(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError(key + ": expected true or false, got '" + v + "'");
  }

 private:
  static double parse(const std::string& key, std::string text) {
    text.erase(0, text.find_first_not_of(" \t"));
    text.erase(text.find_last_not_of(" \t") + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(text, &used);
    } catch (const std::exception&) {
      throw ValidationError(key + ": not a number: '" + text + "'");
    }
    if (used != text.size() || !std::isfinite(value)) throw ValidationError(key + ": not a finite number: '" + text + "'");
    return value;
  }

  boost::property_tree::ptree tree_;
};

void check(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ValidationError(key + ": " + message);
}

double positive(const Config& c, const std::string& key, double fallback) {
  const double v = c.num(key, fallback);
  check(v > 0.0, key, "must be positive");
  return v;
}

double non_negative(const Config& c, const std::string& key, double fallback) {
  const double v = c.num(key, fallback);
  check(v >= 0.0, key, "must be non-negative");
  return v;
}

std::size_t count(const Config& c, const std::string& key, double fallback, double min = 1.0) {
  const double v = c.num(key, fallback);
  check(v >= min && v == std::floor(v) && v < 1e12, key, "must be an integer >= " + format_real(min));
  return static_cast<std::size_t>(v);
}

MixingDist read_mixing(const Config& c) {
  const auto kind = c.str("trend.mix", "gamma");
  if (kind == "gamma") return GammaMix{positive(c, "trend.mix_shape", 1.0), positive(c, "trend.mix_rate", 1.0)};
  if (kind == "dagum")
    return DagumMix{positive(c, "trend.dagum_p", 1.0), positive(c, "trend.dagum_a", 1.0), positive(c, "trend.dagum_b", 1.0)};
  throw ValidationError("trend.mix: unknown kind '" + kind + "' (gamma, dagum)");
}

BaseTrend read_base_trend(const Config& c, const std::string& kind, const std::string& key) {
  if (kind == "gompertz") {
    const double b = positive(c, "trend.b", 0.0001744);
    const double cc = c.num("trend.c", 1.082);
    check(cc > 1.0, "trend.c", "must exceed 1");
    return GompertzTrend{b, cc};
  }
  if (kind == "constant") return ConstantRate{non_negative(c, "trend.delta", 0.05)};
  if (kind == "piecewise") {
    auto rates = c.list("trend.rates");
    check(!rates.empty(), "trend.rates", "required for piecewise trend");
    for (double r : rates) check(r >= 0.0, "trend.rates", "must be non-negative");
    return PiecewiseConstant{rates};
  }
  throw ValidationError(key + ": unknown kind '" + kind + "' (gompertz, constant, piecewise, frailty)");
}

VitalityModel read_model(const Config& c) {
  VitalityModel m;
  m.age_x = c.num("model.age", 60.0);
  check(m.age_x >= 0.0, "model.age", "must be non-negative");

  const auto init = c.str("initial.kind", "exponential");
  if (init == "exponential") m.initial = Exponential{positive(c, "initial.rate", 1.0)};
  else if (init == "pareto") m.initial = ParetoII{positive(c, "initial.shape", 1.0), positive(c, "initial.scale", 1.0)};
  else if (init == "gompertz") m.initial = GompertzDist{positive(c, "initial.shape", 1.0)};
  else if (init == "degenerate") m.initial = Degenerate{positive(c, "initial.v", 1.0)};
  else throw ValidationError("initial.kind: unknown kind '" + init + "' (exponential, pareto, gompertz, degenerate)");

  const auto trend = c.str("trend.kind", "gompertz");
  if (trend == "frailty") {
    m.trend = FrailtyScaled{read_base_trend(c, c.str("trend.base", "gompertz"), "trend.base"), read_mixing(c)};
  } else {
    m.trend = std::visit([](const auto& t) -> TrendSpec { return t; }, read_base_trend(c, trend, "trend.kind"));
  }

  const double sigma = non_negative(c, "diffusion.sigma", 0.0);
  if (sigma > 0.0) m.diffusion = BrownianConst{sigma};

  if (c.has("jump.rates")) {
    auto rates = c.list("jump.rates");
    for (double r : rates) check(r >= 0.0, "jump.rates", "must be non-negative");
    m.jump.intensity = PiecewiseIntensity{rates};
  } else {
    m.jump.intensity = ConstantIntensity{non_negative(c, "jump.lambda", 0.0)};
  }
  const auto size = c.str("jump.size", "fatal");
  if (size == "fatal") m.jump.size = Fatal{};
  else if (size == "exponential") m.jump.size = ExponentialJump{positive(c, "jump.rate", 1.0)};
  else if (size == "mixture") m.jump.size = MixtureExponential{c.list("jump.weights"), c.list("jump.size_rates")};
  else if (size == "normal") m.jump.size = NormalJump{c.num("jump.mean", 0.0), positive(c, "jump.sd", 1.0)};
  else throw ValidationError("jump.size: unknown kind '" + size + "' (fatal, exponential, mixture, normal)");

  try {
    validate(m);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("model: ") + e.what());
  }
  return m;
}

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
};

std::uint64_t need_seed(const Globals& g, const std::string& why) {
  if (!g.seed) throw ValidationError("--seed: required for " + why);
  return *g.seed;
}

std::vector<double> time_grid(double t_max, double step) {
  std::vector<double> ts;
  const auto n = static_cast<long long>(std::floor(t_max / step + 1e-9));
  for (long long i = 0; i <= n; ++i) ts.push_back(static_cast<double>(i) * step);
  return ts;
}

// --- commands --------------------------------------------------------------------

Table cmd_survive(const Config& c, const Globals& g) {
  VitalityModel m = read_model(c);
  const double t_max = non_negative(c, "survive.t_max", 40.0);
  const double t_step = positive(c, "survive.t_step", 1.0);
  const bool plot = c.flag("survive.plot", false);
  const std::string requested = c.str("survive.method", "auto");
  std::optional<double> v;
  if (c.has("survive.v")) {
    v = positive(c, "survive.v", 1.0);
    m.initial = Degenerate{*v};
  }
  McConfig mc;
  mc.n_paths = count(c, "survive.n_paths", 10000, 2);
  mc.antithetic = c.flag("survive.antithetic", false);

  std::vector<double> ts = time_grid(t_max, t_step);
  if (plot) {
    check(t_step == 1.0, "survive.t_step", "plot output needs unit steps");
    ts.push_back(ts.back() + 1.0);
  }

  std::string method = requested;
  if (method == "auto") method = closed_form_case(m).empty() ? "monte-carlo" : "closed-form";
  std::vector<double> s(ts.size()), se(ts.size(), std::nan(""));
  if (method == "closed-form") {
    for (std::size_t i = 0; i < ts.size(); ++i) s[i] = survival_static(m, ts[i]);
  } else if (method == "laplace") {
    check(v.has_value(), "survive.v", "required for the laplace method");
    for (std::size_t i = 0; i < ts.size(); ++i) s[i] = ts[i] == 0.0 ? 1.0 : survival_snlp(m, *v, ts[i]);
  } else if (method == "monte-carlo") {
    mc.rng = RngStream{need_seed(g, "Monte Carlo survival"), 0};
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const McEstimate e = survival_unconditional(m, ts[i], mc, MixingMethod::Sampling);
      s[i] = e.value;
      se[i] = e.std_error;
    }
  } else if (method == "piecewise") {
    check(t_step == 1.0, "survive.t_step", "piecewise method needs unit steps");
    mc.rng = RngStream{need_seed(g, "Monte Carlo survival"), 0};
    const auto curve = piecewise_survival_curve(m, v ? &*v : nullptr, static_cast<int>(ts.back()), mc);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      s[i] = curve[i].value;
      se[i] = curve[i].std_error;
    }
  } else {
    throw ValidationError("survive.method: unknown method '" + requested +
                          "' (auto, closed-form, laplace, monte-carlo, piecewise)");
  }

  Table t;
  t.columns = {"t", "survival", "std_error", "method"};
  if (plot) t.columns = {"t", "age", "survival", "std_error", "log_death_rate", "method"};
  const std::size_t n_rows = plot ? ts.size() - 1 : ts.size();
  for (std::size_t i = 0; i < n_rows; ++i) {
    const Cell err = std::isnan(se[i]) ? Cell{} : Cell{se[i]};
    if (plot) {
      const double q = s[i] > 0.0 ? 1.0 - s[i + 1] / s[i] : std::nan("");
      const Cell lq = q > 0.0 ? Cell{std::log(q)} : Cell{};
      t.rows.push_back({ts[i], m.age_x + ts[i], s[i], err, lq, method});
    } else {
      t.rows.push_back({ts[i], s[i], err, method});
    }
  }
  return t;
}

Table fit_table(const FitResult& fit) {
  Table t;
  t.columns = {"key", "value"};
  for (const auto& [k, v] : fit.params) t.rows.push_back({k, v});
  if (fit.std_errors)
    for (const auto& [k, v] : *fit.std_errors) t.rows.push_back({"se_" + k, v});
  t.rows.push_back({std::string("loglik"), fit.loglik});
  t.rows.push_back({std::string("loglik_constant"), fit.loglik_constant});
  t.rows.push_back({std::string("converged"), static_cast<long long>(fit.converged)});
  t.rows.push_back({std::string("boundary"), static_cast<long long>(fit.boundary)});
  t.rows.push_back({std::string("n_iterations"), static_cast<long long>(fit.n_iterations)});
  return t;
}

FitResult cmd_fit(const Config& c, const Globals& g) {
  const CohortData data = load_cohort_csv(c.required_str("fit.cohort"));
  VitalityModel m = read_model(c);
  m.age_x = data.age_x;
  FitOptions opt;
  opt.starts = static_cast<int>(count(c, "fit.starts", 5));
  opt.max_iterations = static_cast<int>(count(c, "fit.max_iterations", 2000));
  opt.tolerance = positive(c, "fit.tolerance", 1e-6);
  opt.likelihood.censoring_cell = c.flag("fit.censoring", true);
  opt.std_errors = c.flag("fit.std_errors", false);
  opt.mc.n_paths = count(c, "fit.n_paths", 10000, 2);

  const std::string kind = c.str("fit.model", has_diffusion(m) ? "vitality" : "gompertz");
  if (kind == "gompertz") return fit_gompertz_law(data, opt);
  if (kind != "vitality") throw ValidationError("fit.model: unknown model '" + kind + "' (gompertz, vitality)");
  check(std::holds_alternative<GompertzTrend>(m.trend), "trend.kind", "vitality fit needs a gompertz trend");
  IntensitySpec intensity = m.jump.intensity;
  if (c.has("fit.accidents"))
    intensity = calibrate_jump_intensity(load_accident_csv(c.required_str("fit.accidents")), data.age_x,
                                         static_cast<int>(data.deaths.size()));
  FreeParams free{true, true, has_diffusion(m)};
  if (has_diffusion(m)) opt.mc.rng = RngStream{need_seed(g, "the simulated likelihood"), 0};
  return fit_mle(m, free, data, intensity, opt);
}

Table cmd_price(const Config& c) {
  const VitalityModel m = read_model(c);
  const auto rates = c.list("price.force_of_interest", {0.05});
  std::optional<double> v;
  if (c.has("price.v")) v = positive(c, "price.v", 1.0);
  Table t;
  t.columns = {"force_of_interest", "life_expectancy", "annuity", "insurance"};
  const double le = life_expectancy(m, v);
  for (double d : rates) {
    check(d > 0.0, "price.force_of_interest", "must be positive");
    const double a = annuity_price(m, PricingBasis{d}, v);
    t.rows.push_back({d, le, a, 1.0 - d * a});
  }
  return t;
}

Table cmd_cod(const Config& c) {
  CodParams p;
  p.age_x = c.num("cod.age", 60.0);
  p.b = positive(c, "cod.b", p.b);
  p.c = c.num("cod.c", p.c);
  check(p.c > 1.0, "cod.c", "must exceed 1");
  p.lambda = non_negative(c, "cod.lambda", p.lambda);
  p.alpha = positive(c, "cod.alpha", p.alpha);
  Table t;
  t.columns = {"v", "q", "t_star", "accident", "natural", "total"};
  for (double v : c.list("cod.v", {1.0})) {
    check(v > 0.0, "cod.v", "must be positive");
    p.v = v;
    for (double q : c.list("cod.q", {0.0})) {
      check(q >= 0.0, "cod.q", "must be non-negative");
      const double acc = cod_laplace_accident(p, q), nat = cod_laplace_natural(p, q);
      t.rows.push_back({v, q, p.t_star(), acc, nat, acc + nat});
    }
  }
  return t;
}

struct LifecycleOutput {
  Table policy;
  Table paths;
};

LifecycleOutput cmd_lifecycle(const Config& c, const Globals& g) {
  MarketParams market;
  market.r = c.num("lifecycle.r", market.r);
  market.theta = c.num("lifecycle.theta", market.theta);
  market.sigma_S = positive(c, "lifecycle.sigma_S", market.sigma_S);
  market.beta = positive(c, "lifecycle.beta", market.beta);
  market.lambda_bequest = non_negative(c, "lifecycle.lambda_bequest", market.lambda_bequest);
  VitalitySDE sde;
  sde.delta = positive(c, "lifecycle.delta", sde.delta);
  sde.sigma_V = non_negative(c, "lifecycle.sigma_V", sde.sigma_V);
  sde.v0 = positive(c, "lifecycle.v0", sde.v0);
  const double a0 = positive(c, "lifecycle.a0", 100.0);
  const double v_max = positive(c, "lifecycle.v_max", 40.0);
  const std::size_t n_grid = count(c, "lifecycle.n_grid", 401, 3);
  check(v_max > 1e-3, "lifecycle.v_max", "must exceed 0.001");

  std::vector<double> grid(n_grid);
  for (std::size_t i = 0; i < n_grid; ++i) grid[i] = 1e-3 + (v_max - 1e-3) * static_cast<double>(i) / (n_grid - 1);
  const ValueFunction vf = value_function_g(grid, market, sde);
  LifecycleOutput out;
  out.policy.columns = {"v", "f", "consumption_rate", "risky_share", "g"};
  for (std::size_t i = 0; i < n_grid; ++i) {
    const double f = consumption_factor(grid[i], market, sde);
    out.policy.rows.push_back({grid[i], f, 1.0 / f, market.theta / market.sigma_S, vf.g[i]});
  }
  const std::size_t n_paths = count(c, "lifecycle.n_paths", 0, 0);
  if (n_paths > 0) {
    const RngStream rng{need_seed(g, "lifecycle paths"), 0};
    LifecycleOptions opt;
    opt.dt = positive(c, "lifecycle.dt", opt.dt);
    out.paths.columns = {"path", "t", "assets", "consumption", "vitality"};
    for (std::size_t p = 0; p < n_paths; ++p) {
      const auto path = simulate_lifecycle(a0, market, sde, opt, rng.substream(p));
      for (std::size_t i = 0; i < path.times.size(); ++i)
        out.paths.rows.push_back({static_cast<long long>(p), path.times[i], path.assets[i], path.consumption[i],
                                  path.vitality[i]});
    }
  }
  return out;
}

Table cmd_disability(const Config& c, const Globals& g) {
  const VitalityModel m = read_model(c);
  DisabilityQuery q;
  q.omega = positive(c, "disability.omega", 0.5);
  const auto horizons = c.list("disability.T", {1.0, 5.0, 10.0});
  const std::string kind = c.str("disability.kind", has_diffusion(m) ? "recovery" : "healthy");
  Table t;
  if (kind == "healthy") {
    t.columns = {"T", "healthy_stay"};
    for (double T : horizons) {
      check(T >= 0.0, "disability.T", "must be non-negative");
      q.T = T;
      t.rows.push_back({T, healthy_stay_prob(m, q)});
    }
    return t;
  }
  if (kind != "recovery") throw ValidationError("disability.kind: unknown kind '" + kind + "' (healthy, recovery)");
  const std::size_t n_paths = count(c, "disability.n_paths", 0, 0);
  McConfig mc;
  if (n_paths > 0) {
    mc.n_paths = n_paths;
    mc.rng = RngStream{need_seed(g, "Monte Carlo recovery"), 0};
  }
  t.columns = {"T", "recovery", "recovery_printed", "recovery_mc", "mc_std_error"};
  for (double T : horizons) {
    check(T >= 0.0, "disability.T", "must be non-negative");
    q.T = T;
    Cell mc_value, mc_se;
    if (n_paths > 0) {
      const auto e = recovery_prob_mc(m, q, mc);
      mc_value = e.value;
      mc_se = e.std_error;
    }
    t.rows.push_back({T, recovery_prob(m, q), recovery_prob(m, q, RecoveryForm::Printed), mc_value, mc_se});
  }
  return t;
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw ValidationError("--out: cannot write " + g.out);
  f << text;
}

std::string render(const Globals& g, const Table& t) {
  return g.format == "json" ? to_json_rows(t).dump(2) + "\n" : to_csv(t);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vitality mortality models: survival, fitting, pricing, cause of death, lifecycle, disability"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "INI configuration file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "random seed (required by simulation-based commands)");
  app.add_option("--out", g.out, "output file (default stdout)");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.fallthrough();  // global flags may follow the subcommand
  auto* survive = app.add_subcommand("survive", "survival probabilities on a time grid");
  auto* fit = app.add_subcommand("fit", "maximum likelihood fit to cohort death counts");
  auto* price = app.add_subcommand("price", "life expectancy, annuity and insurance prices");
  auto* cod = app.add_subcommand("cod", "accident versus natural cause-of-death split");
  auto* lifecycle = app.add_subcommand("lifecycle", "optimal consumption policy and simulated paths");
  auto* disability = app.add_subcommand("disability", "healthy-stay and recovery probabilities");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (*seed_opt) g.seed = seed;

  try {
    const Config config(g.config);
    if (*survive) {
      emit(g, render(g, cmd_survive(config, g)));
    } else if (*fit) {
      const FitResult result = cmd_fit(config, g);
      emit(g, g.format == "json" ? to_json(result) + "\n" : to_csv(fit_table(result)));
    } else if (*price) {
      emit(g, render(g, cmd_price(config)));
    } else if (*cod) {
      emit(g, render(g, cmd_cod(config)));
    } else if (*lifecycle) {
      const auto out = cmd_lifecycle(config, g);
      if (g.format == "json") {
        nlohmann::ordered_json j;
        j["policy"] = to_json_rows(out.policy);
        j["paths"] = to_json_rows(out.paths);
        emit(g, j.dump(2) + "\n");
      } else {
        emit(g, to_csv(out.policy));
        if (!out.paths.rows.empty()) {
          const std::string path = config.required_str("lifecycle.paths_out");
          std::ofstream f(path, std::ios::binary);
          if (!f) throw ValidationError("lifecycle.paths_out: cannot write " + path);
          f << to_csv(out.paths);
        }
      }
    } else if (*disability) {
      emit(g, render(g, cmd_disability(config, g)));
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NoClosedFormError& e) {
    // the configured model has no route for the requested computation
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
