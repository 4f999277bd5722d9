#include "vitalkit/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "vitalkit/errors.hpp"
#include "vitalkit/numerics.hpp"
#include "vitalkit/parallel.hpp"

namespace vitalkit {

double linear_noncrossing_prob(double a, double b, double s, double x) {
  require(s > 0.0, "linear_noncrossing_prob: s must be positive");
  const double end_gap = a * s + b - x;
  if (b <= 0.0 || end_gap <= 0.0) return 0.0;
  return -std::expm1(-2.0 * b * end_gap / s);
}

double inverse_cumulative_intensity(const IntensitySpec& intensity, double level) {
  require(level >= 0.0, "inverse_cumulative_intensity: level must be non-negative");
  if (const auto* c = std::get_if<ConstantIntensity>(&intensity)) {
    require(c->lambda > 0.0, "inverse_cumulative_intensity: zero intensity");
    return level / c->lambda;
  }
  const auto& rates = std::get<PiecewiseIntensity>(intensity).rates;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < rates.size(); ++i) {
    if (rates[i] > 0.0 && acc + rates[i] >= level) return static_cast<double>(i) + (level - acc) / rates[i];
    acc += rates[i];
  }
  require(rates.back() > 0.0, "inverse_cumulative_intensity: level beyond the reachable range");
  return static_cast<double>(rates.size() - 1) + (level - acc) / rates.back();
}

std::vector<double> simulate_jump_times(const IntensitySpec& intensity, double T, Engine& engine,
                                        JumpTimeMethod method) {
  require(T > 0.0, "simulate_jump_times: T must be positive");
  const double total = cumulative_intensity(intensity, T);
  std::vector<double> times;
  if (total <= 0.0) return times;
  std::poisson_distribution<long> count_dist(total);
  const long k = count_dist(engine);
  times.reserve(static_cast<std::size_t>(k));
  if (method == JumpTimeMethod::OrderStatistics) {
    for (long i = 0; i < k; ++i) times.push_back(inverse_cumulative_intensity(intensity, engine.uniform() * total));
    std::sort(times.begin(), times.end());
  } else {
    double previous_level = 0.0;
    for (long i = 0; i < k; ++i) {
      const double level = previous_level + engine.uniform() * (total - previous_level);
      times.push_back(std::min(T, inverse_cumulative_intensity(intensity, level)));
      previous_level = level;
    }
  }
  return times;
}

McEstimate summarize(const std::vector<double>& values) {
  McEstimate out;
  out.n_effective = values.size();
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  const double mean = pairwise_sum(values) / n;
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dev[i] = (values[i] - mean) * (values[i] - mean);
  const double var = pairwise_sum(dev) / n;
  out.value = mean;
  out.std_error = std::sqrt(var / n);
  return out;
}

McEstimate summarize_probability(const std::vector<double>& values) {
  McEstimate out = summarize(values);
  out.value = std::clamp(out.value, 0.0, 1.0);
  return out;
}

namespace {

void require_mc_model(const VitalityModel& model) {
  validate(model);
  require(has_diffusion(model), "Monte Carlo survival needs sigma > 0; deterministic models go through survival_static");
}

double frailty_draw(const VitalityModel& model, Engine& engine) {
  if (const auto* f = std::get_if<FrailtyScaled>(&model.trend)) return mixing_sample(f->mix, engine);
  return 1.0;
}

BaseTrend base_of(const TrendSpec& trend) {
  if (const auto* f = std::get_if<FrailtyScaled>(&trend)) return f->base;
  return as_base(trend);
}

std::size_t unit_count(const McConfig& cfg) {
  return cfg.antithetic ? (cfg.n_paths + 1) / 2 : cfg.n_paths;
}

// One work unit: a single path, or an antithetic pair averaged.
std::vector<double> run_units(const McConfig& cfg, const std::function<double(std::size_t, bool)>& path) {
  require(cfg.n_paths >= 1, "Monte Carlo: n_paths must be positive");
  return parallel_map(unit_count(cfg), [&](std::size_t i) {
    if (!cfg.antithetic) return path(i, false);
    return 0.5 * (path(i, false) + path(i, true));
  });
}

class PathSimulator {
 public:
  PathSimulator(const VitalityModel& model, double T, const McConfig& cfg)
      : model_(model), base_(base_of(model.trend)), T_(T), cfg_(cfg), sigma_(diffusion_sigma(model)) {
    const int n = cfg.n_time_points > 0 ? cfg.n_time_points : std::max(1, static_cast<int>(std::ceil(12.0 * T - 1e-9)));
    grid_.resize(n + 1);
    hazard_.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
      grid_[i] = T * i / n;
      hazard_[i] = cumulative_hazard(base_, model.age_x, grid_[i]);
    }
    grid_[n] = T;
    fatal_ = is_fatal(model.jump.size);
    jumps_ = has_jumps(model.jump);
  }

  // Survival indicator weight Q for one path given V(0) = v.
  double operator()(const RngStream& stream, double v, bool negate) const {
    if (v <= 0.0) return 0.0;
    Engine jump_engine(stream.substream(0));
    Engine grid_engine(stream.substream(1));
    Engine bridge_engine(stream.substream(2));
    Engine frailty_engine(stream.substream(3));
    const double z = frailty_draw(model_, frailty_engine);

    std::vector<double> times;
    std::vector<double> sizes;
    if (jumps_) {
      times = simulate_jump_times(model_.jump.intensity, T_, jump_engine, cfg_.jump_times);
      if (fatal_ && !times.empty()) return 0.0;
      for (std::size_t j = 0; j < times.size(); ++j) sizes.push_back(sample_jump(model_.jump.size, jump_engine));
    }

    // one distribution object per engine: the cached second variate must not cross streams
    std::normal_distribution<double> grid_normal;
    std::normal_distribution<double> bridge_normal;
    const double sign = negate ? -1.0 : 1.0;
    const double inv_sigma = 1.0 / sigma_;

    // state at the previous partition point
    double u_prev = 0.0;
    double y_prev = 0.0;
    double b_plus_prev = v * inv_sigma;
    double jumps_so_far = 0.0;
    std::size_t next_jump = 0;
    double q = 1.0;

    auto step = [&](double u, double y, double hazard, bool is_jump, double jump_size) {
      const double level = (v - z * hazard - jumps_so_far) * inv_sigma;  // b^- : jumps strictly before u
      if (is_jump) jumps_so_far += jump_size;
      const double level_plus = (v - z * hazard - jumps_so_far) * inv_sigma;  // b^+ : jumps at or before u
      if (!(y < level_plus)) return false;
      const double factor = -std::expm1(-2.0 * (b_plus_prev - y_prev) * (level - y) / (u - u_prev));
      q *= std::clamp(factor, 0.0, 1.0);
      u_prev = u;
      y_prev = y;
      b_plus_prev = level_plus;
      return q > 0.0;
    };

    // grid increments come from their own stream so that jump insertion does not shift them
    double grid_y = 0.0;
    for (std::size_t i = 1; i < grid_.size(); ++i) {
      const double t_right = grid_[i];
      grid_y += sign * std::sqrt(t_right - grid_[i - 1]) * grid_normal(grid_engine);
      const double y_right_grid_value = grid_y;
      // jump times inside (t_left, t_right]: fill by Brownian bridge towards the grid value
      double a_time = u_prev;
      double a_value = y_prev;
      while (next_jump < times.size() && times[next_jump] <= t_right) {
        const double s = times[next_jump];
        double y_s;
        if (s >= t_right) {
          y_s = y_right_grid_value;
        } else {
          const double w = (s - a_time) / (t_right - a_time);
          const double mean = a_value + w * (y_right_grid_value - a_value);
          const double sd = std::sqrt((s - a_time) * (t_right - s) / (t_right - a_time));
          y_s = mean + sign * sd * bridge_normal(bridge_engine);
        }
        const double hz = cumulative_hazard(base_, model_.age_x, s);
        if (s > u_prev) {
          if (!step(s, y_s, hz, true, sizes[next_jump])) return 0.0;
        } else {
          // coincident arrivals: apply the extra jump at the same instant
          jumps_so_far += sizes[next_jump];
          b_plus_prev = (v - z * hz - jumps_so_far) * inv_sigma;
          if (!(y_prev < b_plus_prev)) return 0.0;
        }
        a_time = s;
        a_value = y_s;
        ++next_jump;
      }
      if (t_right > u_prev) {
        if (!step(t_right, y_right_grid_value, hazard_[i], false, 0.0)) return 0.0;
      }
    }
    return q;
  }

 private:
  const VitalityModel& model_;
  BaseTrend base_;
  double T_;
  const McConfig& cfg_;
  double sigma_;
  bool fatal_ = false;
  bool jumps_ = false;
  std::vector<double> grid_;
  std::vector<double> hazard_;
};

}  // namespace

McEstimate mc_survival(const VitalityModel& model, double v, double T, const McConfig& cfg) {
  require_mc_model(model);
  require(v > 0.0, "mc_survival: v must be positive");
  require(T >= 0.0, "mc_survival: T must be non-negative");
  if (T == 0.0) return {1.0, 0.0, unit_count(cfg)};
  const PathSimulator prototype(model, T, cfg);
  auto values = run_units(cfg, [&](std::size_t i, bool negate) {
    return prototype(cfg.rng.substream(i), v, negate);
  });
  return summarize_probability(values);
}

std::vector<McEstimate> piecewise_survival_curve(const VitalityModel& model, const double* v, int k_max,
                                                 const McConfig& cfg) {
  require_mc_model(model);
  require(k_max >= 0, "piecewise_survival_curve: k must be non-negative");
  require(!has_jumps(model.jump) || is_fatal(model.jump.size), "piecewise survival needs fatal jumps");
  if (v != nullptr) require(*v > 0.0, "piecewise_survival_curve: v must be positive");
  const BaseTrend base = base_of(model.trend);
  const double sigma = diffusion_sigma(model);
  std::vector<double> hazard(k_max + 1);
  std::vector<double> jump_factor(k_max + 1);
  for (int k = 0; k <= k_max; ++k) {
    hazard[k] = cumulative_hazard(base, model.age_x, k);
    jump_factor[k] = std::exp(-cumulative_intensity(model.jump.intensity, k));
  }
  const std::size_t units = unit_count(cfg);
  const std::size_t width = static_cast<std::size_t>(k_max) + 1;
  std::vector<double> table(units * width);

  auto path = [&](std::size_t i, bool negate, double* out) {
    const RngStream stream = cfg.rng.substream(i);
    Engine engine(stream.substream(1));
    Engine init_engine(stream.substream(4));
    Engine frailty_engine(stream.substream(3));
    double vi;
    if (v != nullptr) {
      vi = *v;
    } else if (const auto* d = std::get_if<Degenerate>(&model.initial)) {
      vi = d->v;
    } else {
      const double u = (static_cast<double>(i) + init_engine.uniform()) / static_cast<double>(units);
      vi = quantile(model.initial, u);
    }
    const double z = frailty_draw(model, frailty_engine);
    std::normal_distribution<double> normal;
    double q = vi > 0.0 ? 1.0 : 0.0;
    double gap_prev = vi;  // v - Y - sigma B at the previous integer age
    double b = 0.0;
    out[0] += q;
    for (int k = 1; k <= k_max; ++k) {
      if (q > 0.0) {
        b += (negate ? -1.0 : 1.0) * normal(engine);
        const double gap = vi - z * hazard[k] - sigma * b;
        if (gap <= 0.0) {
          q = 0.0;
        } else {
          q *= -std::expm1(-2.0 * gap_prev * gap / (sigma * sigma));
          gap_prev = gap;
        }
      }
      out[k] += q * jump_factor[k];
    }
  };

  parallel_for(units, [&](std::size_t i) {
    double* row = &table[i * width];
    std::fill(row, row + width, 0.0);
    path(i, false, row);
    if (cfg.antithetic) {
      path(i, true, row);
      for (std::size_t k = 0; k < width; ++k) row[k] *= 0.5;
    }
  });

  std::vector<McEstimate> curve(width);
  std::vector<double> column(units);
  for (std::size_t k = 0; k < width; ++k) {
    for (std::size_t i = 0; i < units; ++i) column[i] = table[i * width + k];
    curve[k] = summarize_probability(column);
  }
  return curve;
}

McEstimate piecewise_survival_fatal(const VitalityModel& model, double v, int k, const McConfig& cfg) {
  require(k >= 0, "piecewise_survival_fatal: k must be non-negative");
  if (k == 0) return {1.0, 0.0, unit_count(cfg)};
  return piecewise_survival_curve(model, &v, k, cfg)[k];
}

McEstimate survival_unconditional(const VitalityModel& model, double T, const McConfig& cfg, MixingMethod method) {
  require_mc_model(model);
  require(T >= 0.0, "survival_unconditional: T must be non-negative");
  if (T == 0.0) return {1.0, 0.0, unit_count(cfg)};
  if (const auto* d = std::get_if<Degenerate>(&model.initial)) return mc_survival(model, d->v, T, cfg);

  const auto* e = std::get_if<Exponential>(&model.initial);
  if (method == MixingMethod::GaussLaguerre && e != nullptr) {
    const auto& rule = gauss_laguerre_cached(64);
    McEstimate out{0.0, 0.0, 0};
    double var = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      // independent streams per node keep the variance formula below exact
      McConfig node_cfg = cfg;
      node_cfg.rng = cfg.rng.substream(1000003 + i);
      const McEstimate node = mc_survival(model, rule.nodes[i] / e->rate, T, node_cfg);
      out.value += rule.weights[i] * node.value;
      var += rule.weights[i] * rule.weights[i] * node.std_error * node.std_error;
      out.n_effective += node.n_effective;
    }
    out.value = std::clamp(out.value, 0.0, 1.0);
    out.std_error = std::sqrt(var);
    return out;
  }

  const PathSimulator prototype(model, T, cfg);
  auto values = run_units(cfg, [&](std::size_t i, bool negate) {
    const RngStream stream = cfg.rng.substream(i);
    Engine init_engine(stream.substream(4));
    const double v = sample(model.initial, init_engine);
    return prototype(stream, v, negate);
  });
  return summarize_probability(values);
}

}  // namespace vitalkit
