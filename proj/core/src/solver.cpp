#include "qae/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qae/error.hpp"
#include "qae/queue_dynamics.hpp"

namespace qae {

const char* to_string(BoundaryConditions::Mode mode) {
  switch (mode) {
    case BoundaryConditions::Mode::kFixed: return "fixed";
    case BoundaryConditions::Mode::kSearchOverTa: return "search_t_a";
    case BoundaryConditions::Mode::kSearchOverP0: return "search_p0";
  }
  return "unknown";
}

Interval equilibrium_cost_bounds(const ModelParams& params) {
  const ValidatedParams checked_params = validate(params);
  const ModelParams& p = checked_params.get();
  const double n = p.expected_others();
  return {n * (p.beta / p.mu + p.gamma), n * ((p.alpha + p.beta) / p.mu + p.gamma)};
}

BoundaryConditions boundary_conditions(const ModelParams& params) {
  const ValidatedParams checked_params = validate(params);
  const ModelParams& p = checked_params.get();
  const double n = p.expected_others();
  const Interval cost = equilibrium_cost_bounds(p);
  BoundaryConditions bc;
  bc.t_a_range = {-cost.hi / p.alpha, -cost.lo / p.alpha};

  if (p.is_poisson() && (!p.early_birds_allowed || p.has_closing_time())) {
    throw UnsupportedScenario("Poisson population requires early birds and no closing time");
  }

  if (p.early_birds_allowed) {
    if (p.beta == 0.0 && !p.has_closing_time()) {
      bc.mode = BoundaryConditions::Mode::kFixed;
      bc.t_a_fixed = -n * p.gamma / p.alpha;
    } else {
      bc.mode = BoundaryConditions::Mode::kSearchOverTa;
    }
    return bc;
  }

  if (p.beta > 0.0) {
    throw UnsupportedScenario("no early birds with a tardiness cost has no known characterization");
  }
  bc.mode = BoundaryConditions::Mode::kFixed;
  const double wait = p.alpha / p.mu;
  if (wait <= p.gamma) {
    bc.p0_fixed = 1.0;
    return bc;
  }
  const double p0_open = 2.0 * p.gamma / (p.gamma + wait);
  if (!p.has_closing_time()) {
    bc.p0_fixed = p0_open;
    return bc;
  }
  // Everyone at zero when the gap would outlast the closing time.
  const double threshold = 0.5 * n * (1.0 - p.gamma / wait);
  if (threshold <= q_atom(1.0, *p.closing_time, p.others(), p.mu)) {
    bc.p0_fixed = 1.0;
    return bc;
  }
  bc.mode = BoundaryConditions::Mode::kSearchOverP0;
  bc.p0_range = {p0_open, 1.0};
  return bc;
}

double solve_gap_end(double p0, const ModelParams& params) {
  const ValidatedParams checked_params = validate(params);
  const ModelParams& p = checked_params.get();
  if (!(p0 > 0.0 && p0 <= 1.0)) throw InvalidParams("gap end needs p0 in (0, 1]");
  const double wait = p.alpha / p.mu;
  if (wait <= p.gamma) throw InvalidParams("no gap: alpha/mu <= gamma puts all mass at zero");
  const int n = p.others();
  const double lhs = 0.5 * n * p0 * (p.gamma + wait);
  auto excess = [&](double t) { return n * p0 * p.gamma + wait * q_atom(p0, t, n, p.mu) - lhs; };

  double lo = 0.0;
  double hi = 1.0 / p.mu;
  while (excess(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12 / p.mu) throw NumericalError("gap end bracket diverged");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// Queue-state backends with a common stepping interface.
class FixedChain {
 public:
  explicit FixedChain(StateDistribution s) : state_(std::move(s)) {}
  [[nodiscard]] double empty() const { return state_.empty_probability(); }
  [[nodiscard]] double mass_error() const { return std::abs(state_.total() - 1.0); }
  [[nodiscard]] double absorbed() const { return state_.absorbed(); }
  void step(double arrival_prob, double /*density*/, double mu, double h) {
    advance(state_, arrival_prob, mu, h, ws_);
  }

 private:
  StateDistribution state_;
  StepWorkspace ws_;
};

class PoissonChain {
 public:
  PoissonChain(double lambda, double opening_mass)
      : lambda_(lambda),
        state_(poisson_queue_state(lambda * opening_mass, poisson_truncation_level(lambda))) {}
  [[nodiscard]] double empty() const { return state_.empty_probability(); }
  [[nodiscard]] double mass_error() const { return std::abs(state_.total() - 1.0); }
  [[nodiscard]] double absorbed() const { return 0.0; }
  void step(double /*arrival_prob*/, double density, double mu, double h) {
    advance_poisson(state_, lambda_ * density, mu, h, scratch_);
  }

 private:
  double lambda_;
  QueueLengthDistribution state_;
  std::vector<double> scratch_;
};

struct PassSetup {
  const ModelParams& p;
  const NumericsConfig& numerics;
  double start;  // first post-opening time
  double F;      // F(start)
};

template <typename Chain>
ProfileResult run_pass(const PassSetup& setup, Chain chain, ProfileResult out) {
  const ModelParams& p = setup.p;
  const double scale = p.expected_others() * (p.alpha + p.beta + p.gamma * p.mu);
  const double T = p.horizon();
  const double delta = setup.numerics.delta;
  const double eps = setup.numerics.epsilon;
  const double density_eps = setup.numerics.density_threshold();
  // With beta = 0 and no closing time the boundary is pinned and the
  // infinite support is cut where 1 - F reaches epsilon.
  const bool truncate = p.beta == 0.0 && !p.has_closing_time();

  ArrivalDistribution& d = out.distribution;
  double F = setup.F;
  double t = setup.start;
  for (long k = 0;; ++k) {
    const double f = p.mu * ((p.alpha + p.beta) * (1.0 - chain.empty()) - p.beta) / scale;
    out.max_mass_error = std::max(out.max_mass_error, chain.mass_error());
    if (p.beta == 0.0 && f < -1e-12) {
      throw NumericalError("negative density with beta = 0 at t=" + std::to_string(t) +
                           "; reduce delta");
    }
    const double f_pos = std::max(f, 0.0);

    bool stop = true;
    if (t >= T) {
      out.flag = StopFlag::kClosingTime;
    } else if (p.beta > 0.0 && f <= density_eps) {
      out.flag = StopFlag::kDensityVanished;
    } else if (truncate && 1.0 - F <= eps) {
      out.flag = StopFlag::kMassReached;
    } else {
      stop = false;
    }

    double t_next = setup.start + static_cast<double>(k + 1) * delta;
    if (t_next >= T - 1e-9 * delta) t_next = T;
    const double h = t_next - t;
    if (!stop && F + h * f_pos > 1.0) {
      out.flag = StopFlag::kMassReached;
      out.overshoot = true;
      stop = true;
    }

    d.grid.push_back({t, F, stop && out.flag == StopFlag::kDensityVanished ? 0.0 : f_pos});
    if (stop) {
      out.stop_time = t;
      out.residual = 1.0 - F;
      out.terminal_density = f;
      out.absorbed = chain.absorbed();
      d.t_end = t;
      if (out.flag == StopFlag::kMassReached && !out.overshoot && F < 1.0 && f_pos > 0.0) {
        d.tail = {1.0 - F, f_pos / (1.0 - F)};
      }
      return out;
    }

    chain.step(h * f_pos / (1.0 - F), f_pos, p.mu, h);
    F += h * f_pos;
    t = t_next;
  }
}

}  // namespace

ProfileResult integrate_profile(const ProfileStart& start, const ModelParams& params,
                                const NumericsConfig& numerics) {
  const ValidatedParams checked_params = validate(params);
  const ModelParams& p = checked_params.get();
  validate(numerics);
  const double n = p.expected_others();

  ProfileResult out;
  ArrivalDistribution& d = out.distribution;

  if (const auto* lower = std::get_if<LowerSupport>(&start)) {
    if (!p.early_birds_allowed) throw InvalidParams("a lower support needs early birds");
    if (!(lower->t_a <= 0.0)) throw InvalidParams("t_a must be <= 0");
    d.t_a = lower->t_a;
    d.pre_density = p.alpha * p.mu / (n * (p.alpha + p.beta + p.gamma * p.mu));
    const double F0 = d.mass_before_opening();
    if (F0 > 1.0) {
      // Too early: the uniform piece alone holds more than all the mass.
      out.overshoot = true;
      out.residual = 1.0 - F0;
      d.grid.push_back({0.0, F0, 0.0});
      return out;
    }
    const PassSetup setup{p, numerics, 0.0, F0};
    if (p.is_poisson()) return run_pass(setup, PoissonChain(n, F0), std::move(out));
    return run_pass(setup, FixedChain(arrivals_only_state(p.others(), F0)), std::move(out));
  }

  const double p0 = std::get<AtomMass>(start).p0;
  if (p.early_birds_allowed) throw InvalidParams("an atom at zero needs early birds disallowed");
  if (p.is_poisson()) throw UnsupportedScenario("Poisson population requires early birds");
  if (!(p0 > 0.0 && p0 <= 1.0)) throw InvalidParams("p0 must lie in (0, 1]");
  d.p0 = p0;
  if (p0 >= 1.0) {
    out.flag = StopFlag::kAtomOnly;
    return out;
  }
  d.t_e = solve_gap_end(p0, p);
  if (d.t_e >= p.horizon()) {
    // The gap covers the whole opening window: nobody else arrives.
    d.t_e = p.horizon();
    d.t_end = d.t_e;
    d.grid.push_back({d.t_e, p0, 0.0});
    out.flag = StopFlag::kClosingTime;
    out.stop_time = d.t_e;
    out.residual = 1.0 - p0;
    return out;
  }
  const PassSetup setup{p, numerics, d.t_e, p0};
  return run_pass(setup, FixedChain(atom_then_services_state(p.others(), p0, p.mu, d.t_e)),
                  std::move(out));
}

namespace {

EquilibriumSolution assemble(const ModelParams& p, const NumericsConfig& numerics,
                             ProfileResult r, int iterations) {
  EquilibriumSolution sol;
  sol.params = p;
  sol.numerics = numerics;
  sol.iterations = iterations;
  sol.residual = r.residual;
  sol.stop = r.flag;
  sol.terminal_density = r.terminal_density;
  sol.distribution = std::move(r.distribution);
  const ArrivalDistribution& d = sol.distribution;
  const double n = p.expected_others();
  if (p.early_birds_allowed) {
    sol.c_e = -p.alpha * d.t_a;
  } else {
    // Cost at the atom: a uniform place among the tied arrivals.
    sol.c_e = 0.5 * n * d.p0 * (p.alpha / p.mu + p.gamma);
  }
  return sol;
}

template <typename MakeStart>
EquilibriumSolution bisect(const ModelParams& p, const NumericsConfig& numerics, Interval range,
                           bool overshoot_moves_up, MakeStart make_start) {
  double lo = range.lo;
  double hi = range.hi;
  std::optional<ProfileResult> best;
  int best_iteration = 0;
  int it = 0;
  while (it < numerics.max_bisect) {
    const double mid = 0.5 * (lo + hi);
    if (it > 0 && (mid <= lo || mid >= hi)) break;  // bracket at machine precision
    ++it;
    ProfileResult r = integrate_profile(make_start(mid), p, numerics);
    if (r.overshoot) {
      (overshoot_moves_up ? lo : hi) = mid;
      continue;
    }
    if (r.residual <= numerics.epsilon) return assemble(p, numerics, std::move(r), it);
    (overshoot_moves_up ? hi : lo) = mid;
    if (!best || r.residual < best->residual) {
      best = std::move(r);
      best_iteration = it;
    }
  }
  if (best && best->residual <= numerics.mass_tolerance) {
    return assemble(p, numerics, std::move(*best), it > 0 ? it : best_iteration);
  }
  throw ConvergenceError("bisection did not converge after " + std::to_string(it) +
                         " passes (best residual " +
                         (best ? std::to_string(best->residual) : std::string("n/a")) + ")");
}

}  // namespace

EquilibriumSolution solve_equilibrium(const ModelParams& params, const NumericsConfig& numerics) {
  const ValidatedParams checked_params = validate(params);
  const ModelParams& p = checked_params.get();
  validate(numerics);
  if (p.is_poisson()) return solve_poisson(p, numerics);

  const BoundaryConditions bc = boundary_conditions(p);
  switch (bc.mode) {
    case BoundaryConditions::Mode::kFixed: {
      const ProfileStart start = bc.t_a_fixed ? ProfileStart(LowerSupport{*bc.t_a_fixed})
                                              : ProfileStart(AtomMass{*bc.p0_fixed});
      ProfileResult r = integrate_profile(start, p, numerics);
      if (r.overshoot) throw NumericalError("pinned pass overshot F = 1; reduce delta");
      return assemble(p, numerics, std::move(r), 1);
    }
    case BoundaryConditions::Mode::kSearchOverTa:
      // Too much mass means the first arrival must move later.
      return bisect(p, numerics, bc.t_a_range, true,
                    [](double x) { return ProfileStart(LowerSupport{x}); });
    case BoundaryConditions::Mode::kSearchOverP0:
      return bisect(p, numerics, bc.p0_range, false,
                    [](double x) { return ProfileStart(AtomMass{x}); });
  }
  throw InvalidParams("unknown boundary mode");
}

EquilibriumSolution solve_poisson(const ModelParams& params, const NumericsConfig& numerics) {
  const ValidatedParams checked_params = validate(params);
  const ModelParams& p = checked_params.get();
  validate(numerics);
  if (!p.is_poisson()) throw InvalidParams("solve_poisson needs a Poisson population");
  const BoundaryConditions bc = boundary_conditions(p);
  if (bc.mode == BoundaryConditions::Mode::kFixed) {
    ProfileResult r = integrate_profile(LowerSupport{*bc.t_a_fixed}, p, numerics);
    if (r.overshoot) throw NumericalError("pinned pass overshot F = 1; reduce delta");
    EquilibriumSolution sol = assemble(p, numerics, std::move(r), 1);
    sol.source = "solver:poisson";
    return sol;
  }
  EquilibriumSolution sol = bisect(p, numerics, bc.t_a_range, true,
                                   [](double x) { return ProfileStart(LowerSupport{x}); });
  sol.source = "solver:poisson";
  return sol;
}

}  // namespace qae
