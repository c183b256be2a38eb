#pragma once

// Equilibrium arrival distributions for general N (and Poisson N) by
// forward integration of the indifference condition, with bisection on the
// unknown boundary value (the lower support t_a, or the atom p0 when early
// birds are not allowed).

#include <optional>
#include <variant>

#include "qae/model.hpp"

namespace qae {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] bool contains(double x) const { return lo <= x && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct BoundaryConditions {
  enum class Mode { kFixed, kSearchOverTa, kSearchOverP0 };

  Mode mode = Mode::kFixed;
  /// Cost bounds translated to t_a: [-N(a+b+g mu)/(a mu), -N(b+g mu)/(a mu)].
  Interval t_a_range;
  Interval p0_range{0.0, 1.0};
  std::optional<double> t_a_fixed;
  std::optional<double> p0_fixed;
};

const char* to_string(BoundaryConditions::Mode mode);

/// Pins the boundary value when the theory determines it (beta = 0 and no
/// closing time), otherwise describes the bisection bracket. Throws
/// UnsupportedScenario for combinations without a known characterization
/// (no early birds with beta > 0; Poisson populations without early birds
/// or with a closing time).
BoundaryConditions boundary_conditions(const ModelParams& params);

/// Candidate lower support for the early-birds scenarios.
struct LowerSupport {
  double t_a;
};
/// Candidate atom at opening for the no-early-birds scenarios.
struct AtomMass {
  double p0;
};
using ProfileStart = std::variant<LowerSupport, AtomMass>;

struct ProfileResult {
  ArrivalDistribution distribution;
  StopFlag flag = StopFlag::kMassReached;
  /// True when the pass ran out of mass: another step would push F past 1.
  bool overshoot = false;
  double stop_time = 0.0;
  double residual = 0.0;          ///< 1 - F at the stop
  double terminal_density = 0.0;  ///< raw density at the stop (may be < 0)
  double absorbed = 0.0;          ///< p_{0,N} at the stop (0 for Poisson)
  double max_mass_error = 0.0;    ///< max |sum p - 1| over the pass
};

/// One forward pass: the pre-opening uniform piece (or atom and gap), then
///
///     f(t) = mu ((a+b)(1 - P(Q(t)=0)) - b) / (N (a+b+g mu))
///
/// co-integrated with the queue state. Stops when F reaches 1 - epsilon
/// (pinned boundary only), when another step would exceed F = 1, when f
/// falls to the density threshold (beta > 0), or at the closing time.
/// Throws NumericalError when f < 0 with beta = 0.
ProfileResult integrate_profile(const ProfileStart& start, const ModelParams& params,
                                const NumericsConfig& numerics);

/// Root t_e of (N p0/2)(g + a/mu) = N p0 g + (a/mu) q_p0(t), by bisection.
/// Throws InvalidParams unless a/mu > g and 0 < p0 <= 1.
double solve_gap_end(double p0, const ModelParams& params);

/// Full procedure. Throws ConvergenceError when the bisection exhausts
/// max_bisect with a residual above mass_tolerance.
EquilibriumSolution solve_equilibrium(const ModelParams& params,
                                      const NumericsConfig& numerics = {});

/// Poisson(lambda) population: same shooting structure on the queue-length
/// chain. Requires early birds and no closing time.
EquilibriumSolution solve_poisson(const ModelParams& params, const NumericsConfig& numerics = {});

/// N (b/mu + g) and N ((a+b)/mu + g), with lambda in place of N for a
/// Poisson population.
Interval equilibrium_cost_bounds(const ModelParams& params);

}  // namespace qae
