#pragma once

// Monte Carlo check of the indifference property: a probe customer arrives
// at a fixed time while the others draw from the candidate distribution,
// and its realized cost is averaged over independent replications.
//
// Replications run in fixed-size blocks, each with its own generator seeded
// from (seed, probe, block); block sums are combined in block order, so the
// results do not depend on the number of worker threads.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qae/model.hpp"

namespace qae {

/// Inverse transform at u in [0, 1): uniform piece before opening, atom at
/// 0, linear interpolation on the grid, exponential tail past t_end.
double sample_arrival(const ArrivalDistribution& distribution, double u);

template <typename Engine>
double sample_arrival(const ArrivalDistribution& distribution, Engine& rng) {
  return sample_arrival(distribution, std::uniform_real_distribution<double>(0.0, 1.0)(rng));
}

struct CostEstimate {
  double mean = 0.0;
  double half_width = 0.0;  ///< 95% normal-approximation half-width
  long replications = 0;
};

/// Worker threads: QAE_THREADS when set and positive, else the hardware count.
unsigned simulation_threads();

/// Realized cost of the probe is alpha (S - t) + beta max(S, 0) + gamma K,
/// where S is the time the probe enters service and K is the number of
/// customers served before it (exact ties broken uniformly at random).
/// Its expectation is the analytic cost of arriving at t.
CostEstimate estimate_cost(double probe_t, const ArrivalDistribution& distribution,
                           const ModelParams& params, long replications, std::uint64_t seed,
                           std::uint64_t stream = 0);

struct ProbeResult {
  double t = 0.0;
  CostEstimate cost;
  bool in_support = true;
  std::string label;  ///< "support", "before_support" or "gap"
};

struct SimulationReport {
  std::vector<double> probe_times;  ///< in-support probes
  std::vector<double> mean_costs;
  std::vector<double> half_widths;
  std::vector<ProbeResult> outside;  ///< out-of-support probes
  double c_e_ref = 0.0;
  double max_abs_deviation = 0.0;
  double tolerance = 0.0;
  bool indifference_ok = false;  ///< every in-support deviation within max(CI, tolerance)
  bool outside_ok = false;       ///< no out-of-support probe significantly below c_e
  long replications = 0;
  std::uint64_t seed = 0;
};

struct VerifyOptions {
  int grid_size = 50;
  long replications = 100000;
  std::uint64_t seed = 42;
  /// Relative tolerance on |mean - c_e| / c_e for in-support probes.
  double relative_tolerance = 0.02;
};

/// Probes `grid_size` points across the support ([t_a, t_end], or the atom
/// plus [t_e, t_end]) and, where they exist, one point before t_a and one
/// inside the gap.
SimulationReport verify_equilibrium(const EquilibriumSolution& solution,
                                    const VerifyOptions& options = {});

}  // namespace qae
