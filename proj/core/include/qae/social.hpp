#pragma once

// Social-optimum benchmarks and the price of anarchy.

#include <iosfwd>
#include <vector>

#include "qae/model.hpp"

namespace qae {

struct ThreeCustomerOptimum {
  double t_star = 0.0;  ///< arrival of the second customer; the others come at 0 and T
  double c_opt = 0.0;   ///< total cost, order penalties 3 gamma included
};

/// Optimal deterministic schedule for three customers on [0, T] with
/// beta = 0: arrivals at 0, t*, T with
///
///     t* = min{(1/mu) ln((1 + sqrt(1 + 4 e^{mu T})) / 2), T}
///     c_opt = alpha (e^{-mu t*} + e^{-mu T}(1 + mu T - mu t* + e^{mu t*})) + 3 gamma
///
/// The waiting term is alpha times the summed expected queue lengths seen
/// on arrival. Requires two others, beta = 0 and a closing time.
ThreeCustomerOptimum three_customer_schedule(const ModelParams& params);

enum class SocialBenchmark {
  kThreeCustomerSchedule,  ///< c_opt from three_customer_schedule
  kDynamicRelease,         ///< c_opt = gamma N(N+1)/2 + beta N(N+1)/(2 mu)
};

const char* to_string(SocialBenchmark b);

struct PoARecord {
  ModelParams params;
  SocialBenchmark benchmark = SocialBenchmark::kThreeCustomerSchedule;
  double c_e = 0.0;
  double c_opt = 0.0;
  double poa = 0.0;
};

/// (N+1) c_e / c_opt.
PoARecord price_of_anarchy(double c_e, const ModelParams& params, SocialBenchmark benchmark);

struct PoATable {
  std::vector<double> mus;     ///< rows
  std::vector<double> gammas;  ///< columns
  std::vector<PoARecord> cells;  ///< row-major

  [[nodiscard]] const PoARecord& at(std::size_t row, std::size_t col) const {
    return cells[row * gammas.size() + col];
  }
};

/// Solves the three-customer equilibrium (two others, early birds, beta = 0,
/// closing time T) for every (mu, gamma) pair and compares it with the
/// optimal schedule.
PoATable poa_table(const std::vector<double>& mus, const std::vector<double>& gammas,
                   double alpha = 1.0, double closing_time = 1.0,
                   const NumericsConfig& numerics = {});

/// Rows mu, columns gamma: header "mu,<gamma_1>,<gamma_2>,...".
void write_poa_csv(std::ostream& out, const PoATable& table);

}  // namespace qae
