#include "qae/tail_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qae/error.hpp"

namespace qae {

std::vector<HazardSample> hazard_curve(const ArrivalDistribution& d) {
  std::vector<HazardSample> out;
  out.reserve(d.grid.size());
  for (const GridPoint& g : d.grid) {
    const double survival = 1.0 - g.cdf;
    if (survival <= 0.0) continue;
    out.push_back({g.t, g.density / survival});
  }
  return out;
}

TailReport estimate_tail_rate(const ArrivalDistribution& d, const ModelParams& params,
                              double epsilon) {
  const ValidatedParams checked_params = validate(params);
  const ModelParams& p = checked_params.get();
  TailReport rep;
  rep.hazard_samples = hazard_curve(d);
  rep.mu_bound_ok = std::all_of(rep.hazard_samples.begin(), rep.hazard_samples.end(),
                                [&](const HazardSample& s) { return s.h < p.mu; });

  const double upper_survival = 1e4 * epsilon;
  const double lower_survival = 10.0 * epsilon;
  std::vector<double> ts;
  std::vector<double> logs;
  std::vector<double> hs;
  std::vector<double> survivals;
  for (const GridPoint& g : d.grid) {
    const double s = 1.0 - g.cdf;
    if (s <= upper_survival && s >= lower_survival) {
      ts.push_back(g.t);
      logs.push_back(std::log(s));
      hs.push_back(g.density / s);
      survivals.push_back(s);
    }
  }
  if (ts.size() < 8) {
    throw NumericalError("tail window holds " + std::to_string(ts.size()) +
                         " samples; decrease epsilon or delta");
  }
  rep.window_samples = ts.size();
  rep.window_begin = ts.front();
  rep.window_end = ts.back();

  // Centered least squares for numerical stability.
  const double n = static_cast<double>(ts.size());
  double mt = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    mt += ts[k];
    my += logs[k];
  }
  mt /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    sxy += (ts[k] - mt) * (logs[k] - my);
    sxx += (ts[k] - mt) * (ts[k] - mt);
  }
  const double slope = sxy / sxx;
  rep.eta_hat = -slope;
  rep.tail_constant = std::exp(my - slope * mt);

  double lo = kInfinity;
  double hi = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double e = std::exp(rep.eta_hat * ts[k] + logs[k]);
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  rep.envelope_ratio = hi / lo;

  // 1 - F carries an absolute rounding error of a few ulps of 1, so h is
  // only known to a relative accuracy of about eps_machine / (1 - F).
  rep.monotone_tail_ok = true;
  for (std::size_t k = 1; k < hs.size(); ++k) {
    const double rel = 1e-9 + 8.0 * std::numeric_limits<double>::epsilon() / survivals[k];
    if (hs[k] < hs[k - 1] * (1.0 - rel)) {
      rep.monotone_tail_ok = false;
      break;
    }
  }

  if (p.gamma > 0.0) {
    rep.conjecture_rate = p.mu / (1.0 + p.alpha / (p.gamma * p.mu));
    rep.conjecture_ok = std::abs(rep.eta_hat - rep.conjecture_rate) <= 0.02 * rep.conjecture_rate;
  }
  return rep;
}

TailReport estimate_tail_rate(const EquilibriumSolution& solution) {
  return estimate_tail_rate(solution.distribution, solution.params, solution.numerics.epsilon);
}

}  // namespace qae
