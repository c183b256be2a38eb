#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "qae/closed_form.hpp"
#include "qae/error.hpp"
#include "qae/queue_dynamics.hpp"

using namespace qae;
namespace cf = qae::closed_form;

namespace {

ModelParams index_params(double mu, double alpha, double gamma) {
  ModelParams p;
  p.mu = mu;
  p.alpha = alpha;
  p.gamma = gamma;
  return p;
}

// Composite Simpson on [a, b] with n (even) panels.
template <typename F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

// Total mass by quadrature of the density plus the atom, independent of
// the analytic integral used by total_mass().
double quadrature_mass(const cf::TwoCustomerEquilibrium& e) {
  double mass = e.p0;
  if (e.t_a < 0.0) {
    // density(0) is the right limit, so stop the pre-opening panel just short of it.
    const double left_of_zero = std::nextafter(0.0, -1.0);
    mass += simpson([&](double t) { return e.density(std::min(t, left_of_zero)); }, e.t_a, 0.0, 2000);
  }
  if (e.p0 < 1.0) {
    const double end = std::isinf(e.t_end) ? e.start + 60.0 / e.r : e.t_end;
    mass += simpson([&](double t) { return e.density(t); }, e.start, end, 200000);
  }
  return mass;
}

double max_cost_deviation(const cf::TwoCustomerEquilibrium& e) {
  NumericsConfig n;
  const EquilibriumSolution sol = e.to_solution(n);
  const ArrivalDistribution& d = sol.distribution;
  if (d.grid.empty()) return 0.0;
  const StateTrace trace = trace_queue(sol.params, d, n.delta);
  const double lo = d.support_begin();
  const double hi = d.t_end;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    double t = lo + (hi - lo) * k / 99.0;
    if (d.has_gap() && t > 0.0 && t < d.t_e) t = d.t_e;
    worst = std::max(worst, std::abs(cost_of_arrival(t, d, sol.params, trace) - sol.c_e));
  }
  return worst;
}

}  // namespace

TEST_SUITE("closed_form") {

TEST_CASE("index: uniform then exponential at mu=3, alpha=6, gamma=1") {
  const auto e = cf::two_customer_index(index_params(3, 6, 1));
  CHECK(e.pre_density == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(e.density(-0.1) == doctest::Approx(2.0));
  CHECK(e.density(0.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(e.density(1.5) == doctest::Approx(2.0 / 3.0 * std::exp(-1.5)).epsilon(1e-14));
  CHECK(e.r == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e.t_a == doctest::Approx(-1.0 / 6.0));
  CHECK(e.cdf(0.0) == doctest::Approx(1.0 / 3.0));
  CHECK(e.c_e == 1.0);
}

TEST_CASE("index: unit parameters") {
  const auto e = cf::two_customer_index(index_params(1, 1, 1));
  CHECK(e.t_a == doctest::Approx(-1.0));
  CHECK(e.density(-0.5) == doctest::Approx(0.5));
  CHECK(e.density(2.0) == doctest::Approx(0.25 * std::exp(-1.0)));
  CHECK(e.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("index: constant hazard and downward jump at opening") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int k = 0; k < 50; ++k) {
    const auto e = cf::two_customer_index(index_params(u(rng), u(rng), u(rng)));
    const double rate = e.params.mu / (1.0 + e.params.alpha / (e.params.gamma * e.params.mu));
    // Keep 1 - F well above round-off.
    for (double rt : {0.0, 0.3, 2.0, 5.0}) {
      CHECK(e.hazard(rt / rate) == doctest::Approx(rate).epsilon(1e-10));
    }
    CHECK(e.density(-1e-12) > e.density(0.0));
  }
}

TEST_CASE("index without early birds") {
  ModelParams p = index_params(2, 6, 1);
  p.early_birds_allowed = false;
  const auto e = cf::two_customer_index_no_early(p);
  CHECK(e.p0 == doctest::Approx(0.5));
  CHECK(e.t_e == doctest::Approx(0.5493061443).epsilon(1e-9));
  CHECK(e.density(e.t_e) == doctest::Approx(0.25));
  CHECK(e.cdf(e.t_e + 1.0) == doctest::Approx(1.0 - 0.5 * std::exp(-0.5)));
  CHECK(e.density(0.3) == 0.0);
  CHECK(e.c_e == 1.0);

  ModelParams q = index_params(1, 1, 2);
  q.early_birds_allowed = false;
  const auto all = cf::two_customer_index_no_early(q);
  CHECK(all.p0 == 1.0);
  CHECK(all.c_e == doctest::Approx(1.5));

  // alpha/mu == gamma exactly falls on the all-at-zero branch.
  ModelParams tie = index_params(2, 2, 1);
  tie.early_birds_allowed = false;
  CHECK(cf::two_customer_index_no_early(tie).p0 == 1.0);
}

TEST_CASE("index with closing time") {
  ModelParams p = index_params(3, 6, 2);
  p.closing_time = 1.0;
  const auto e = cf::two_customer_index_closing(p);
  CHECK(e.pre_density == doctest::Approx(1.5));
  CHECK(e.A == doctest::Approx(0.8442).epsilon(1e-4));
  CHECK(e.r == doctest::Approx(1.5));
  CHECK(e.t_a == doctest::Approx(-0.3752).epsilon(1e-4));
  CHECK(e.c_e == doctest::Approx(2.2511).epsilon(1e-4));
  CHECK(e.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-12));

  ModelParams far = p;
  far.closing_time = 50.0;
  const auto lim = cf::two_customer_index_closing(far);
  CHECK(std::abs(lim.c_e - 2.0) < 1e-6);
  const auto open = cf::two_customer_index(index_params(3, 6, 2));
  double sup = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double t = -0.5 + k * 0.01;
    sup = std::max(sup, std::abs(lim.cdf(t) - open.cdf(t)));
  }
  CHECK(sup < 1e-6);
}

TEST_CASE("index with closing time and no early birds") {
  ModelParams p = index_params(2, 6, 1);
  p.early_birds_allowed = false;
  p.closing_time = 1.0;
  const auto e = cf::two_customer_index_closing_no_early(p);
  CHECK(e.p0 == doctest::Approx(0.832).epsilon(1e-3));
  CHECK(e.t_e == doctest::Approx(0.549).epsilon(1e-3));
  CHECK(e.c_e == doctest::Approx(1.664).epsilon(1e-3));
  CHECK(e.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-12));

  ModelParams q = index_params(1, 1, 2);
  q.early_birds_allowed = false;
  q.closing_time = 1.0;
  CHECK(cf::two_customer_index_closing_no_early(q).p0 == 1.0);
}

TEST_CASE("tardiness benchmark") {
  ModelParams p;
  p.mu = 3;
  p.alpha = 6;
  p.beta = 2;
  const auto e = cf::two_customer_tardiness(p);
  CHECK(e.t_a == doctest::Approx(-0.2940).epsilon(1e-4));
  CHECK(e.t_end == doctest::Approx(0.5486).epsilon(1e-4));
  CHECK(e.pre_density == doctest::Approx(2.25));
  CHECK(e.density(0.0) == doctest::Approx(1.2343).epsilon(1e-4));
  CHECK(e.density(0.2) == doctest::Approx(1.2343 - 2.25 * 0.2).epsilon(1e-4));
  CHECK(e.c_e == doctest::Approx(1.7638).epsilon(1e-4));
  CHECK(std::abs(e.density(e.t_end)) < 1e-12);
}

TEST_CASE("every closed form carries unit mass") {
  ModelParams idx = index_params(3, 6, 1);
  ModelParams no_early = index_params(2, 6, 1);
  no_early.early_birds_allowed = false;
  ModelParams closing = index_params(3, 6, 2);
  closing.closing_time = 1.0;
  ModelParams closing_no_early = no_early;
  closing_no_early.closing_time = 1.0;
  ModelParams tard;
  tard.mu = 3;
  tard.alpha = 6;
  tard.beta = 2;
  const std::vector<cf::TwoCustomerEquilibrium> all{
      cf::two_customer_index(idx), cf::two_customer_index_no_early(no_early),
      cf::two_customer_index_closing(closing),
      cf::two_customer_index_closing_no_early(closing_no_early), cf::two_customer_tardiness(tard)};
  for (const auto& e : all) {
    CAPTURE(cf::to_string(e.scenario));
    CHECK(std::abs(e.total_mass() - 1.0) < 1e-10);
    CHECK(std::abs(quadrature_mass(e) - 1.0) < 1e-8);
    CHECK(e.to_solution().distribution.invariant_violations(1e-6).empty());
  }
}

TEST_CASE("cost is constant on the support of every closed form") {
  ModelParams idx = index_params(3, 6, 1);
  ModelParams no_early = index_params(2, 6, 1);
  no_early.early_birds_allowed = false;
  ModelParams closing = index_params(3, 6, 2);
  closing.closing_time = 1.0;
  ModelParams closing_no_early = no_early;
  closing_no_early.closing_time = 1.0;
  ModelParams tard;
  tard.mu = 3;
  tard.alpha = 6;
  tard.beta = 2;
  CHECK(max_cost_deviation(cf::two_customer_index(idx)) < 1e-3);
  CHECK(max_cost_deviation(cf::two_customer_index_no_early(no_early)) < 1e-3);
  CHECK(max_cost_deviation(cf::two_customer_index_closing(closing)) < 1e-3);
  CHECK(max_cost_deviation(cf::two_customer_index_closing_no_early(closing_no_early)) < 1e-3);
  CHECK(max_cost_deviation(cf::two_customer_tardiness(tard)) < 1e-3);
}

TEST_CASE("preconditions are enforced") {
  ModelParams p = index_params(3, 6, 1);
  p.population = FixedOthers{2};
  CHECK_THROWS_AS(cf::two_customer_index(p), InvalidParams);
  p.population = FixedOthers{1};
  p.beta = 0.5;
  CHECK_THROWS_AS(cf::two_customer_index(p), InvalidParams);
  p.beta = 0.0;
  p.closing_time = 1.0;
  CHECK_THROWS_AS(cf::two_customer_index(p), InvalidParams);
  CHECK_THROWS_AS(cf::two_customer_index_no_early(p), InvalidParams);
  p.closing_time.reset();
  CHECK_THROWS_AS(cf::two_customer_index_closing(p), InvalidParams);
  CHECK_THROWS_AS(cf::two_customer_tardiness(p), InvalidParams);  // gamma != 0
  CHECK_THROWS_AS(cf::scenario_from_string("other"), InvalidParams);
  CHECK(cf::scenario_from_string("tardiness") == cf::Scenario::kTardiness);
}

TEST_CASE("sampled grid follows the analytic cdf") {
  const auto e = cf::two_customer_index(index_params(3, 6, 1));
  NumericsConfig n;
  const EquilibriumSolution s = e.to_solution(n);
  CHECK(s.source == "closed_form:index");
  CHECK(1.0 - s.distribution.grid.back().cdf <= n.epsilon);
  CHECK(s.distribution.tail.rate == doctest::Approx(1.0));
  for (double t : {-0.1, 0.0, 0.37, 2.0, 9.0}) {
    CHECK(s.distribution.cdf(t) == doctest::Approx(e.cdf(t)).epsilon(1e-8));
  }
}

}
