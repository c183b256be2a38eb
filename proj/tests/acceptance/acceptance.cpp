// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "qae/closed_form.hpp"
#include "qae/simulator.hpp"
#include "qae/social.hpp"
#include "qae/solver.hpp"
#include "qae/tail_analysis.hpp"

using namespace qae;
namespace cf = qae::closed_form;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

ModelParams make(int n, double mu, double alpha, double beta, double gamma) {
  ModelParams p;
  p.mu = mu;
  p.alpha = alpha;
  p.beta = beta;
  p.gamma = gamma;
  p.population = FixedOthers{n};
  return p;
}

double sup_error(const ArrivalDistribution& d, const cf::TwoCustomerEquilibrium& e) {
  double worst = 0.0;
  for (const GridPoint& g : d.grid) worst = std::max(worst, std::abs(g.cdf - e.cdf(g.t)));
  for (int k = 0; k <= 200; ++k) {
    const double t = d.t_a * k / 200.0;
    worst = std::max(worst, std::abs(d.cdf(t) - e.cdf(t)));
  }
  return worst;
}

struct Outcome {
  bool ok = true;
  std::string detail;

  void check(bool cond, const std::string& what) {
    if (!cond) ok = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (cond ? "" : " [failed]");
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Outcome closed_form_fidelity() {
  Outcome o;
  const auto start = Clock::now();
  const auto index = cf::two_customer_index(make(1, 3, 6, 0, 1));
  const double before = index.density(-1e-3);
  const double after = index.density(0.0);
  o.check(std::abs(before - 2.0) <= 1e-12, fmt("f(0-) = %.15g", before));
  o.check(std::abs(after - 2.0 / 3.0) <= 1e-12, fmt("f(0+) = %.15g", after));
  o.check(std::abs(index.r - 1.0) <= 1e-12, fmt("rate = %.15g", index.r));
  const auto tard = cf::two_customer_tardiness(make(1, 3, 6, 2, 0));
  o.check(std::abs(tard.t_a + 0.2940) <= 1e-4, fmt("t_a = %.6f", tard.t_a));
  o.check(std::abs(tard.t_end - 0.5486) <= 1e-4, fmt("t_b = %.6f", tard.t_end));
  const double s = seconds_since(start);
  o.check(s < 1.0, fmt("%.3f s", s));
  return o;
}

Outcome solver_vs_oracle() {
  Outcome o;
  const auto start = Clock::now();
  const ModelParams p = make(1, 3, 6, 0, 1);
  const EquilibriumSolution s = solve_equilibrium(p);
  const double err = sup_error(s.distribution, cf::two_customer_index(p));
  o.check(err < 1e-3, fmt("sup error %.3g", err));
  o.check(std::abs(s.c_e - 1.0) <= 1e-6, fmt("c_e = %.12g", s.c_e));
  const double secs = seconds_since(start);
  o.check(secs < 5.0, fmt("%.3f s", secs));
  return o;
}

const std::vector<int> kPopulations{2, 4, 9};

Outcome indifference() {
  Outcome o;
  for (int n : kPopulations) {
    const auto start = Clock::now();
    const EquilibriumSolution s = solve_equilibrium(make(n, 20, 0.1, 0, 1.0 / n));
    VerifyOptions v;
    v.grid_size = 50;
    v.replications = 200000;
    const SimulationReport r = verify_equilibrium(s, v);
    const double rel = r.max_abs_deviation / s.c_e;
    const double secs = seconds_since(start);
    o.check(rel < 0.02 && secs < 300.0,
            "N=" + std::to_string(n) + fmt(" max rel dev %.4f in %.1f s", rel, secs));
  }
  return o;
}

Outcome boundary_pins() {
  Outcome o;
  for (int n : kPopulations) {
    const ModelParams p = make(n, 20, 0.1, 0, 1.0 / n);
    const EquilibriumSolution s = solve_equilibrium(p);
    const double f0 = s.distribution.cdf(0.0);
    const double expect = p.gamma * p.mu / (p.alpha + p.gamma * p.mu);
    o.check(s.distribution.t_a == -10.0 && std::abs(f0 - expect) <= 1e-6,
            "N=" + std::to_string(n) + fmt(" t_a = %.17g, F(0) - target = %.2g", s.distribution.t_a,
                                           f0 - expect));
  }
  return o;
}

Outcome hazard_tail() {
  Outcome o;
  NumericsConfig num;
  num.epsilon = 1e-9;
  for (int n : {1, 2, 5}) {
    const EquilibriumSolution s = solve_equilibrium(make(n, 1, 1, 0, 1), num);
    const TailReport r = estimate_tail_rate(s);
    bool ok = r.eta_hat >= 0.49 && r.eta_hat <= 0.51 && r.mu_bound_ok;
    double spread = 0.0;
    if (n == 1) {
      double lo = kInfinity;
      double hi = 0.0;
      for (const HazardSample& h : r.hazard_samples) {
        lo = std::min(lo, h.h);
        hi = std::max(hi, h.h);
      }
      spread = hi / lo - 1.0;
      ok = ok && spread < 1e-3;
    }
    o.check(ok, "N=" + std::to_string(n) + fmt(" eta_hat %.5f, h spread %.2g", r.eta_hat, spread) +
                    (r.mu_bound_ok ? "" : ", h >= mu somewhere"));
  }
  return o;
}

Outcome tardiness_generalization() {
  Outcome o;
  for (int n : kPopulations) {
    const ModelParams p = make(n, 20, 0.1, 0.1, 1.0 / n);
    const EquilibriumSolution s = solve_equilibrium(p);
    const Interval b = equilibrium_cost_bounds(p);
    const double margin = std::min(s.c_e - b.lo, b.hi - s.c_e);
    const bool ok = std::isfinite(s.distribution.t_end) &&
                    s.terminal_density <= s.numerics.epsilon && margin > 1e-6;
    o.check(ok, "N=" + std::to_string(n) + fmt(" t_b %.5f, c_e margin %.3g", s.distribution.t_end,
                                               margin));
  }
  return o;
}

Outcome poa_table_cells() {
  Outcome o;
  const auto start = Clock::now();
  const PoATable t = poa_table({0.5, 1.0, 2.0}, {0.05, 1.0, 5.0});
  const double expected[3][3] = {{4.025, 2.909, 2.273}, {2.079, 2.002, 1.995}, {1.266, 1.731, 1.928}};
  double worst = 0.0;
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      worst = std::max(worst, std::abs(t.at(r, c).poa / expected[r][c] - 1.0));
    }
  }
  o.check(worst < 5e-3, fmt("worst relative error %.2g", worst));
  o.check(std::abs(t.at(1, 1).poa / 2.002 - 1.0) < 5e-3, fmt("cell (1,1) = %.4f", t.at(1, 1).poa));
  const double secs = seconds_since(start);
  o.check(secs < 120.0, fmt("%.2f s", secs));
  return o;
}

Outcome conservation_and_convergence() {
  Outcome o;
  double worst_mass = 0.0;
  for (int n : {1, 2, 5, 9}) {
    const ModelParams p = make(n, 2, 1, 0, 0.5);
    worst_mass = std::max(worst_mass,
                          integrate_profile(LowerSupport{*boundary_conditions(p).t_a_fixed}, p, {})
                              .max_mass_error);
    ModelParams tard = make(n, 2, 1, 0.3, 0.5);
    const BoundaryConditions bc = boundary_conditions(tard);
    for (int k = 0; k <= 4; ++k) {
      const double t_a = bc.t_a_range.lo + (bc.t_a_range.hi - bc.t_a_range.lo) * k / 4.0;
      worst_mass =
          std::max(worst_mass, integrate_profile(LowerSupport{t_a}, tard, {}).max_mass_error);
    }
  }
  o.check(worst_mass < 1e-9, fmt("max |sum p - 1| = %.2g", worst_mass));

  const ModelParams p = make(1, 3, 6, 0, 1);
  const auto oracle = cf::two_customer_index(p);
  NumericsConfig coarse;
  coarse.delta = 2e-4;
  NumericsConfig fine;
  fine.delta = 1e-4;
  const double e1 = sup_error(solve_equilibrium(p, coarse).distribution, oracle);
  const double e2 = sup_error(solve_equilibrium(p, fine).distribution, oracle);
  const double ratio = e1 / e2;
  o.check(std::abs(ratio - 2.0) <= 0.3, fmt("error ratio %.4f", ratio));
  return o;
}

Outcome no_early_birds() {
  Outcome o;
  ModelParams p = make(1, 2, 6, 0, 1);
  p.early_birds_allowed = false;
  const EquilibriumSolution open = solve_equilibrium(p);
  o.check(std::abs(open.distribution.p0 - 0.5) <= 1e-12, fmt("p0 = %.12g", open.distribution.p0));
  o.check(std::abs(open.distribution.t_e - 0.5493) <= 1e-3, fmt("t_e = %.5f", open.distribution.t_e));
  p.closing_time = 1.0;
  const EquilibriumSolution closing = solve_equilibrium(p);
  o.check(std::abs(closing.distribution.p0 - 0.832) <= 1e-3,
          fmt("closing p0 = %.5f", closing.distribution.p0));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"closed-form fidelity", closed_form_fidelity},
      {"solver against the one-opponent oracle", solver_vs_oracle},
      {"indifference by simulation", indifference},
      {"boundary pins", boundary_pins},
      {"hazard tail", hazard_tail},
      {"tardiness generalization", tardiness_generalization},
      {"price of anarchy table", poa_table_cells},
      {"conservation and convergence", conservation_and_convergence},
      {"no early birds", no_early_birds},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail = std::string("exception: ") + e.what();
    }
    if (!out.ok) ++failures;
    std::printf("%s criterion %d: %s (%s)\n", out.ok ? "PASS" : "FAIL", index, name,
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
