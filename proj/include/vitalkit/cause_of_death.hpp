#pragma once

namespace vitalkit {

// Gompertz trend, compound Poisson exponential jumps, no diffusion, V(0) = v.
struct CodParams {
  double age_x = 60.0;
  double b = 0.0001744;
  double c = 1.082;
  double lambda = 0.03;
  double alpha = 2.0;  // jump-size rate
  double v = 1.0;

  // Remaining lifetime when no jump occurs.
  double t_star() const;
  // Vitality left at t in the jump-free path: v - b c^x (c^t - 1) / ln c.
  double b_star(double t) const;
};

void validate(const CodParams& p);

enum class Cause { Accident, Natural };

// E_v[exp(-q tau_J) 1(tau_J < tau_Y)]
double cod_laplace_accident(const CodParams& p, double q);
// E_v[exp(-q tau_Y) 1(tau_Y < tau_J)], including the atom at t_star
double cod_laplace_natural(const CodParams& p, double q);

struct CodDensity {
  double density = 0.0;    // continuous part at t
  double atom_time = 0.0;  // natural cause only: point mass location
  double atom_mass = 0.0;
};

CodDensity cod_density(const CodParams& p, Cause cause, double t);

struct CauseSplit {
  double p_accident = 0.0;
  double p_natural = 0.0;
  bool complete = true;  // |sum - 1| <= 1e-6
};

CauseSplit prob_cause_split(const CodParams& p);

}  // namespace vitalkit
