#pragma once

// Hazard rate of a solved equilibrium and an exponential fit of its tail.

#include <vector>

#include "qae/model.hpp"

namespace qae {

struct HazardSample {
  double t = 0.0;
  double h = 0.0;
};

struct TailReport {
  std::vector<HazardSample> hazard_samples;
  double eta_hat = 0.0;          ///< fitted rate of 1 - F(t) ~ C exp(-eta t)
  double tail_constant = 0.0;    ///< C from the fit intercept
  double envelope_ratio = 0.0;   ///< max/min of exp(eta t)(1 - F(t)) over the window
  double window_begin = 0.0;
  double window_end = 0.0;
  std::size_t window_samples = 0;
  bool mu_bound_ok = false;      ///< h(t) < mu on the whole post-opening grid
  bool monotone_tail_ok = false; ///< h nondecreasing over the fit window
  double conjecture_rate = 0.0;  ///< mu / (1 + alpha / (gamma mu)); 0 when gamma = 0
  bool conjecture_ok = false;    ///< |eta_hat - conjecture_rate| <= 2% of the rate
};

/// h(t) = f(t) / (1 - F(t)) at every post-opening grid point with F < 1.
std::vector<HazardSample> hazard_curve(const ArrivalDistribution& distribution);

/// Least-squares slope of ln(1 - F) over F in [1 - 1e4 eps, 1 - 10 eps].
/// Throws NumericalError when fewer than 8 grid points fall in the window.
TailReport estimate_tail_rate(const ArrivalDistribution& distribution, const ModelParams& params,
                              double epsilon);
TailReport estimate_tail_rate(const EquilibriumSolution& solution);

}  // namespace qae
