#pragma once

// Exact equilibria of the two-customer game (one other customer, N = 1).
// These double as oracles for the numerical solver.

#include "qae/model.hpp"

namespace qae::closed_form {

enum class Scenario {
  kIndex,                 ///< order penalty, early birds, no closing time
  kIndexNoEarly,          ///< order penalty, arrivals from 0 on
  kIndexClosing,          ///< order penalty, early birds, closing time T
  kIndexClosingNoEarly,   ///< order penalty, arrivals only in [0, T]
  kTardiness,             ///< tardiness only (gamma = 0), early birds
};

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

/// Analytic equilibrium. After opening, the density on [start, t_end] is
///
///     f(t) = A exp(-r (t - start)) + B + C (t - start)
///
/// which covers the exponential (order penalty) and linear (tardiness) cases.
/// Evaluation is lazy; `to_solution` samples it on a step-`delta` grid.
struct TwoCustomerEquilibrium {
  Scenario scenario = Scenario::kIndex;
  ModelParams params;
  double t_a = 0.0;
  double pre_density = 0.0;
  double p0 = 0.0;
  double t_e = 0.0;
  double start = 0.0;      ///< first post-opening time with positive density
  double start_cdf = 0.0;  ///< F(start)
  double A = 0.0;
  double r = 0.0;
  double B = 0.0;
  double C = 0.0;
  double t_end = kInfinity;
  double c_e = 0.0;

  [[nodiscard]] double cdf(double t) const;
  [[nodiscard]] double density(double t) const;
  /// f(t)/(1 - F(t)) for t >= start.
  [[nodiscard]] double hazard(double t) const;
  /// Total mass, integrated analytically (should be 1).
  [[nodiscard]] double total_mass() const;

  /// Samples the closed form onto the grid representation. Infinite
  /// supports are truncated where 1 - F drops to `numerics.epsilon`.
  [[nodiscard]] EquilibriumSolution to_solution(const NumericsConfig& numerics = {}) const;
};

/// Order penalty, early birds, T = infinity. c_e = gamma.
TwoCustomerEquilibrium two_customer_index(const ModelParams& params);
/// Order penalty, no early birds, T = infinity.
TwoCustomerEquilibrium two_customer_index_no_early(const ModelParams& params);
/// Order penalty, early birds, closing time T.
TwoCustomerEquilibrium two_customer_index_closing(const ModelParams& params);
/// Order penalty, arrivals restricted to [0, T].
TwoCustomerEquilibrium two_customer_index_closing_no_early(const ModelParams& params);
/// Tardiness-only benchmark (gamma = 0, beta > 0).
TwoCustomerEquilibrium two_customer_tardiness(const ModelParams& params);

/// Dispatches on the scenario name.
TwoCustomerEquilibrium solve(Scenario scenario, const ModelParams& params);

/// Gap end for one other customer: -(1/mu) ln((1 - gamma mu / alpha) / 2).
double gap_end(const ModelParams& params);

}  // namespace qae::closed_form
