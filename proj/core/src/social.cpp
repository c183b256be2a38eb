#include "qae/social.hpp"

#include <cmath>
#include <ostream>

#include "qae/error.hpp"
#include "qae/solver.hpp"

namespace qae {

ThreeCustomerOptimum three_customer_schedule(const ModelParams& params) {
  const ValidatedParams checked_params = validate(params);
  const ModelParams& p = checked_params.get();
  if (p.is_poisson() || p.others() != 2) {
    throw InvalidParams("three-customer schedule needs exactly two others");
  }
  if (p.beta != 0.0) throw InvalidParams("three-customer schedule requires beta = 0");
  if (!p.has_closing_time()) throw InvalidParams("three-customer schedule requires a closing time");
  const double T = *p.closing_time;
  const double mu = p.mu;
  ThreeCustomerOptimum opt;
  opt.t_star = std::min(std::log((1.0 + std::sqrt(1.0 + 4.0 * std::exp(mu * T))) / 2.0) / mu, T);
  const double s = opt.t_star;
  const double waiting =
      std::exp(-mu * s) + std::exp(-mu * T) * (1.0 + mu * T - mu * s + std::exp(mu * s));
  opt.c_opt = p.alpha * waiting + 3.0 * p.gamma;
  return opt;
}

const char* to_string(SocialBenchmark b) {
  switch (b) {
    case SocialBenchmark::kThreeCustomerSchedule: return "three_customer_schedule";
    case SocialBenchmark::kDynamicRelease: return "dynamic_release";
  }
  return "unknown";
}

PoARecord price_of_anarchy(double c_e, const ModelParams& params, SocialBenchmark benchmark) {
  const ValidatedParams checked_params = validate(params);
  const ModelParams& p = checked_params.get();
  if (!(c_e > 0.0)) throw InvalidParams("equilibrium cost must be positive");
  const double n = p.expected_others();
  PoARecord rec;
  rec.params = p;
  rec.benchmark = benchmark;
  rec.c_e = c_e;
  if (benchmark == SocialBenchmark::kThreeCustomerSchedule) {
    rec.c_opt = three_customer_schedule(p).c_opt;
  } else {
    rec.c_opt = p.gamma * n * (n + 1.0) / 2.0 + p.beta * n * (n + 1.0) / (2.0 * p.mu);
  }
  if (!(rec.c_opt > 0.0)) throw InvalidParams("social optimum cost is zero");
  rec.poa = (n + 1.0) * c_e / rec.c_opt;
  return rec;
}

PoATable poa_table(const std::vector<double>& mus, const std::vector<double>& gammas,
                   double alpha, double closing_time, const NumericsConfig& numerics) {
  PoATable table;
  table.mus = mus;
  table.gammas = gammas;
  for (double mu : mus) {
    for (double gamma : gammas) {
      ModelParams p;
      p.mu = mu;
      p.alpha = alpha;
      p.gamma = gamma;
      p.population = FixedOthers{2};
      p.closing_time = closing_time;
      const EquilibriumSolution sol = solve_equilibrium(p, numerics);
      table.cells.push_back(
          price_of_anarchy(sol.c_e, p, SocialBenchmark::kThreeCustomerSchedule));
    }
  }
  return table;
}

void write_poa_csv(std::ostream& out, const PoATable& table) {
  out << "mu";
  for (double g : table.gammas) out << ',' << g;
  out << '\n';
  const auto old_precision = out.precision(6);
  for (std::size_t r = 0; r < table.mus.size(); ++r) {
    out << table.mus[r];
    for (std::size_t c = 0; c < table.gammas.size(); ++c) out << ',' << table.at(r, c).poa;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace qae
