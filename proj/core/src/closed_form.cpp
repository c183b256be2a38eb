#include "qae/closed_form.hpp"

#include <cmath>

#include "qae/error.hpp"

namespace qae::closed_form {

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::kIndex: return "index";
    case Scenario::kIndexNoEarly: return "index-no-early";
    case Scenario::kIndexClosing: return "index-closing";
    case Scenario::kIndexClosingNoEarly: return "index-closing-no-early";
    case Scenario::kTardiness: return "tardiness";
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& s) {
  for (Scenario sc : {Scenario::kIndex, Scenario::kIndexNoEarly, Scenario::kIndexClosing,
                      Scenario::kIndexClosingNoEarly, Scenario::kTardiness}) {
    if (s == to_string(sc)) return sc;
  }
  throw InvalidParams("unknown closed-form scenario '" + s + "'");
}

namespace {

struct Requirements {
  bool order_penalty;  // beta == 0 and gamma > 0, otherwise gamma == 0 and beta > 0
  bool early_birds;
  bool closing;
};

ModelParams checked(const ModelParams& raw, Requirements req, const char* name) {
  const ValidatedParams valid = validate(raw);
  const ModelParams& p = valid.get();
  const std::string where = std::string(name) + ": ";
  if (p.is_poisson() || p.others() != 1) throw InvalidParams(where + "requires exactly one other customer");
  if (req.order_penalty) {
    if (p.beta != 0.0) throw InvalidParams(where + "requires beta = 0");
  } else if (p.gamma != 0.0) {
    throw InvalidParams(where + "requires gamma = 0");
  }
  if (p.early_birds_allowed != req.early_birds) {
    throw InvalidParams(where + (req.early_birds ? "requires early birds" : "requires no early birds"));
  }
  if (p.has_closing_time() != req.closing) {
    throw InvalidParams(where + (req.closing ? "requires a closing time" : "requires no closing time"));
  }
  return p;
}

// alpha / (gamma mu): ratio of the cost of waiting one service to the order penalty.
double waiting_ratio(const ModelParams& p) { return p.alpha / (p.gamma * p.mu); }

// Exponential rate after opening: mu / (1 + alpha / (gamma mu)).
double exponential_rate(const ModelParams& p) { return p.mu / (1.0 + waiting_ratio(p)); }

TwoCustomerEquilibrium atom_only(Scenario sc, const ModelParams& p) {
  TwoCustomerEquilibrium eq;
  eq.scenario = sc;
  eq.params = p;
  eq.p0 = 1.0;
  eq.start = 0.0;
  eq.start_cdf = 1.0;
  eq.t_end = 0.0;
  eq.c_e = 0.5 * (p.alpha / p.mu + p.gamma);
  return eq;
}

}  // namespace

double gap_end(const ModelParams& p) {
  const double inner = 0.5 * (1.0 - p.gamma * p.mu / p.alpha);
  if (!(inner > 0.0)) throw InvalidParams("gap end requires alpha/mu > gamma");
  return -std::log(inner) / p.mu;
}

TwoCustomerEquilibrium two_customer_index(const ModelParams& raw) {
  const ModelParams p = checked(raw, {true, true, false}, "two_customer_index");
  TwoCustomerEquilibrium eq;
  eq.scenario = Scenario::kIndex;
  eq.params = p;
  eq.t_a = -p.gamma / p.alpha;
  eq.pre_density = p.alpha / (p.gamma + p.alpha / p.mu);
  eq.start = 0.0;
  eq.start_cdf = eq.pre_density * (-eq.t_a);
  eq.r = exponential_rate(p);
  eq.A = (1.0 - eq.start_cdf) * eq.r;
  eq.c_e = p.gamma;
  return eq;
}

TwoCustomerEquilibrium two_customer_index_no_early(const ModelParams& raw) {
  const ModelParams p = checked(raw, {true, false, false}, "two_customer_index_no_early");
  // Ties at alpha/mu == gamma fall on the all-at-zero branch.
  if (p.alpha / p.mu <= p.gamma) return atom_only(Scenario::kIndexNoEarly, p);
  TwoCustomerEquilibrium eq;
  eq.scenario = Scenario::kIndexNoEarly;
  eq.params = p;
  eq.p0 = 2.0 * p.gamma / (p.gamma + p.alpha / p.mu);
  eq.t_e = gap_end(p);
  eq.start = eq.t_e;
  eq.start_cdf = eq.p0;
  eq.r = 0.5 * p.mu * eq.p0;
  eq.A = (1.0 - eq.p0) * eq.r;
  eq.c_e = p.gamma;
  return eq;
}

TwoCustomerEquilibrium two_customer_index_closing(const ModelParams& raw) {
  const ModelParams p = checked(raw, {true, true, true}, "two_customer_index_closing");
  const double T = *p.closing_time;
  const double a = waiting_ratio(p);
  const double r = exponential_rate(p);
  const double decay = std::exp(-r * T);
  TwoCustomerEquilibrium eq;
  eq.scenario = Scenario::kIndexClosing;
  eq.params = p;
  eq.t_a = -(p.gamma / p.alpha) / (1.0 - decay / (1.0 + 1.0 / a));
  eq.pre_density = p.alpha / (p.gamma + p.alpha / p.mu);
  eq.start = 0.0;
  eq.start_cdf = eq.pre_density * (-eq.t_a);
  eq.r = r;
  eq.A = r / (1.0 + 1.0 / a - decay);
  eq.t_end = T;
  eq.c_e = -p.alpha * eq.t_a;
  return eq;
}

TwoCustomerEquilibrium two_customer_index_closing_no_early(const ModelParams& raw) {
  const ModelParams p =
      checked(raw, {true, false, true}, "two_customer_index_closing_no_early");
  const double T = *p.closing_time;
  if ((p.alpha / p.mu) * (1.0 - 2.0 * std::exp(-p.mu * T)) <= p.gamma) {
    return atom_only(Scenario::kIndexClosingNoEarly, p);
  }
  const double a = waiting_ratio(p);
  const double r = exponential_rate(p);
  TwoCustomerEquilibrium eq;
  eq.scenario = Scenario::kIndexClosingNoEarly;
  eq.params = p;
  eq.t_e = gap_end(p);
  eq.p0 = 2.0 / (1.0 + a - (a - 1.0) * std::exp(-r * (T - eq.t_e)));
  eq.start = eq.t_e;
  eq.start_cdf = eq.p0;
  eq.r = r;
  eq.A = 0.5 * eq.p0 * p.mu * (a - 1.0) / (a + 1.0);
  eq.t_end = T;
  eq.c_e = 0.5 * eq.p0 * (p.alpha / p.mu + p.gamma);
  return eq;
}

TwoCustomerEquilibrium two_customer_tardiness(const ModelParams& raw) {
  const ModelParams p = checked(raw, {false, true, false}, "two_customer_tardiness");
  const double ratio = p.beta / p.alpha;
  TwoCustomerEquilibrium eq;
  eq.scenario = Scenario::kTardiness;
  eq.params = p;
  eq.t_a = -std::sqrt(ratio * (2.0 + ratio)) / p.mu;
  eq.t_end = (std::sqrt(1.0 + 2.0 * p.alpha / p.beta) - 1.0) / p.mu;
  const double total = p.alpha + p.beta;
  eq.pre_density = p.mu * p.alpha / total;
  eq.start = 0.0;
  eq.start_cdf = eq.pre_density * (-eq.t_a);
  eq.B = -p.mu * p.beta / total - p.mu * p.mu * p.alpha * eq.t_a / total;
  eq.C = -p.mu * p.mu * p.beta / total;
  eq.c_e = -p.alpha * eq.t_a;
  return eq;
}

TwoCustomerEquilibrium solve(Scenario scenario, const ModelParams& params) {
  switch (scenario) {
    case Scenario::kIndex: return two_customer_index(params);
    case Scenario::kIndexNoEarly: return two_customer_index_no_early(params);
    case Scenario::kIndexClosing: return two_customer_index_closing(params);
    case Scenario::kIndexClosingNoEarly: return two_customer_index_closing_no_early(params);
    case Scenario::kTardiness: return two_customer_tardiness(params);
  }
  throw InvalidParams("unknown scenario");
}

// ---------------------------------------------------------------------------

double TwoCustomerEquilibrium::cdf(double t) const {
  if (t < 0.0) return t < t_a ? 0.0 : pre_density * (t - t_a);
  if (t < start) return pre_density * (-t_a) + p0;
  if (t > t_end) return 1.0;
  const double s = t - start;
  const double exp_part = r > 0.0 ? A * (-std::expm1(-r * s)) / r : A * s;
  return start_cdf + exp_part + B * s + 0.5 * C * s * s;
}

double TwoCustomerEquilibrium::density(double t) const {
  if (t < 0.0) return t < t_a ? 0.0 : pre_density;
  if (t < start || t > t_end) return 0.0;
  const double s = t - start;
  return A * std::exp(-r * s) + B + C * s;
}

double TwoCustomerEquilibrium::hazard(double t) const {
  return density(t) / (1.0 - cdf(t));
}

double TwoCustomerEquilibrium::total_mass() const {
  if (std::isinf(t_end)) return start_cdf + (r > 0.0 ? A / r : 0.0);
  return cdf(t_end);
}

EquilibriumSolution TwoCustomerEquilibrium::to_solution(const NumericsConfig& numerics) const {
  validate(numerics);
  EquilibriumSolution sol;
  sol.params = params;
  sol.numerics = numerics;
  sol.c_e = c_e;
  sol.source = std::string("closed_form:") + to_string(scenario);

  ArrivalDistribution& d = sol.distribution;
  d.t_a = t_a;
  d.pre_density = pre_density;
  d.p0 = p0;
  d.t_e = t_e;

  if (p0 >= 1.0) {
    d.t_end = 0.0;
    sol.stop = StopFlag::kAtomOnly;
    return sol;
  }

  const double delta = numerics.delta;
  const bool infinite = std::isinf(t_end);
  for (long k = 0;; ++k) {
    double t = start + static_cast<double>(k) * delta;
    if (!infinite && t >= t_end - 1e-12 * delta) t = t_end;
    const double F = cdf(t);
    d.grid.push_back({t, F, std::max(0.0, density(t))});
    if (infinite ? (1.0 - F <= numerics.epsilon) : (t == t_end)) break;
  }
  d.t_end = d.grid.back().t;
  sol.residual = 1.0 - d.grid.back().cdf;
  sol.terminal_density = density(d.t_end);
  if (infinite) {
    d.tail = {1.0 - d.grid.back().cdf, hazard(d.t_end)};
    sol.stop = StopFlag::kMassReached;
  } else {
    sol.stop = scenario == Scenario::kTardiness ? StopFlag::kDensityVanished : StopFlag::kClosingTime;
    d.grid.back().density = scenario == Scenario::kTardiness ? 0.0 : d.grid.back().density;
  }
  return sol;
}

}  // namespace qae::closed_form
