#include "qae/queue_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qae/error.hpp"

namespace qae {

StateDistribution::StateDistribution(int n, double time)
    : n_(n), time_(time), probs_(size_for(n), 0.0) {
  if (n < 0) throw InvalidParams("state needs a nonnegative population");
}

double StateDistribution::operator()(int i, int j) const {
  if (i < 0 || j < 0 || j > n_ || i > j) return 0.0;
  return probs_[index(i, j)];
}

double& StateDistribution::at(int i, int j) {
  if (i < 0 || j < 0 || j > n_ || i > j) throw std::out_of_range("state index outside triangle");
  return probs_[index(i, j)];
}

double StateDistribution::total() const {
  return std::accumulate(probs_.begin(), probs_.end(), 0.0);
}

double StateDistribution::empty_probability() const {
  double s = 0.0;
  for (int j = 0; j <= n_; ++j) s += probs_[index(0, j)];
  return s;
}

double StateDistribution::mean_queue() const {
  double s = 0.0;
  for (int j = 0; j <= n_; ++j) {
    for (int i = 1; i <= j; ++i) s += i * probs_[index(i, j)];
  }
  return s;
}

double StateDistribution::mean_arrived() const {
  double s = 0.0;
  for (int j = 1; j <= n_; ++j) {
    for (int i = 0; i <= j; ++i) s += j * probs_[index(i, j)];
  }
  return s;
}

namespace {

double binomial_pmf(int n, int k, double p) {
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const double log_choose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(log_choose + k * std::log(p) + (n - k) * std::log1p(-p));
}

// Binomial(m, q) pmf into w[0..m].
void binomial_weights(int m, double q, std::vector<double>& w) {
  w.assign(static_cast<std::size_t>(m) + 1, 0.0);
  if (q <= 0.0) {
    w[0] = 1.0;
    return;
  }
  if (q >= 1.0) {
    w[static_cast<std::size_t>(m)] = 1.0;
    return;
  }
  const double odds = q / (1.0 - q);
  w[0] = std::pow(1.0 - q, m);
  for (int k = 0; k < m; ++k) {
    w[static_cast<std::size_t>(k) + 1] = w[static_cast<std::size_t>(k)] * (m - k) / (k + 1.0) * odds;
  }
}

}  // namespace

double poisson_pmf(int k, double mean) {
  if (k < 0) return 0.0;
  if (mean <= 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
}

StateDistribution arrivals_only_state(int n, double arrived, double time) {
  StateDistribution s(n, time);
  for (int i = 0; i <= n; ++i) s.at(i, i) = binomial_pmf(n, i, arrived);
  return s;
}

StateDistribution atom_then_services_state(int n, double p0, double mu, double t) {
  StateDistribution s(n, t);
  const double mean_services = mu * t;
  for (int j = 0; j <= n; ++j) {
    const double arrived = binomial_pmf(n, j, p0);
    if (arrived == 0.0) continue;
    double served_fewer = 0.0;  // P(fewer than j completions by t)
    for (int i = j; i >= 1; --i) {
      const double pmf = poisson_pmf(j - i, mean_services);
      s.at(i, j) = arrived * pmf;
      served_fewer += pmf;
    }
    // The queue empties once j services complete; later completions are idle time.
    s.at(0, j) = arrived * std::max(0.0, 1.0 - served_fewer);
  }
  return s;
}

StateDistribution init_state(const ModelParams& params, const ArrivalDistribution& d) {
  const int n = params.others();
  if (params.early_birds_allowed) {
    if (d.p0 > 0.0) throw InvalidParams("atom at zero is inconsistent with early birds");
    return arrivals_only_state(n, d.mass_at_opening(), 0.0);
  }
  if (d.t_a < 0.0 || d.pre_density > 0.0) {
    throw InvalidParams("pre-opening mass is inconsistent with no early birds");
  }
  return atom_then_services_state(n, d.p0, params.mu, d.t_e);
}

void advance(StateDistribution& state, double arrival_prob, double mu, double delta,
             StepWorkspace& ws) {
  const double served = mu * delta;
  if (!(served < 0.5)) throw NumericalError("step too large: mu * delta >= 0.5");
  if (!(arrival_prob >= 0.0 && arrival_prob <= 1.0)) {
    throw NumericalError("arrival probability per step outside [0, 1]");
  }
  const int n = state.others();
  auto probs = state.probabilities();
  ws.next.assign(probs.size(), 0.0);
  for (int j = 0; j <= n; ++j) {
    const int pending = n - j;
    binomial_weights(pending, arrival_prob, ws.weights);
    for (int i = 0; i <= j; ++i) {
      const double p = probs[StateDistribution::index(i, j)];
      if (p == 0.0) continue;
      const double leave = i >= 1 ? served : 0.0;
      for (int k = 0; k <= pending; ++k) {
        const double moved = p * ws.weights[static_cast<std::size_t>(k)];
        if (moved == 0.0) continue;
        ws.next[StateDistribution::index(i + k, j + k)] += moved * (1.0 - leave);
        if (leave > 0.0) ws.next[StateDistribution::index(i + k - 1, j + k)] += moved * leave;
      }
    }
  }
  std::copy(ws.next.begin(), ws.next.end(), probs.begin());
  state.set_time(state.time() + delta);
}

StateDistribution euler_step(const StateDistribution& state, double hazard,
                             const ModelParams& params, double delta) {
  if (!(hazard >= 0.0)) throw NumericalError("hazard must be nonnegative");
  if (!(delta * (params.mu + state.others() * hazard) < 0.5)) {
    throw NumericalError("step too large: delta * (mu + N h) >= 0.5");
  }
  StateDistribution next = state;
  StepWorkspace ws;
  advance(next, hazard * delta, params.mu, delta, ws);
  for (double p : next.probabilities()) {
    if (p < -1e-12) throw NumericalError("negative probability after step");
  }
  return next;
}

double q_atom(double p, double t, int n, double mu) {
  if (t < 0.0) throw InvalidParams("q_atom needs t >= 0");
  if (std::isinf(t)) return 0.0;
  const double mean_services = mu * t;
  double q = 0.0;
  for (int j = 1; j <= n; ++j) {
    const double arrived = binomial_pmf(n, j, p);
    if (arrived == 0.0) continue;
    double left = 0.0;
    for (int i = 0; i < j; ++i) left += (j - i) * poisson_pmf(i, mean_services);
    q += arrived * left;
  }
  return q;
}

// ---------------------------------------------------------------------------

double QueueLengthDistribution::total() const {
  return std::accumulate(probs.begin(), probs.end(), 0.0);
}

double QueueLengthDistribution::mean_queue() const {
  double s = 0.0;
  for (std::size_t i = 1; i < probs.size(); ++i) s += static_cast<double>(i) * probs[i];
  return s;
}

int poisson_truncation_level(double lambda, double tail) {
  double cdf = 0.0;
  for (int k = 0;; ++k) {
    cdf += poisson_pmf(k, lambda);
    if (1.0 - cdf < tail && static_cast<double>(k) >= lambda) return k;
    if (k > 100000) throw NumericalError("Poisson truncation level did not converge");
  }
}

QueueLengthDistribution poisson_queue_state(double mean, int truncation, double time) {
  QueueLengthDistribution s;
  s.time = time;
  s.probs.assign(static_cast<std::size_t>(truncation) + 1, 0.0);
  double acc = 0.0;
  for (int k = 0; k < truncation; ++k) {
    s.probs[static_cast<std::size_t>(k)] = poisson_pmf(k, mean);
    acc += s.probs[static_cast<std::size_t>(k)];
  }
  s.probs.back() = std::max(0.0, 1.0 - acc);
  return s;
}

void advance_poisson(QueueLengthDistribution& state, double arrival_rate, double mu,
                     double delta, std::vector<double>& scratch) {
  if (!(arrival_rate >= 0.0)) throw NumericalError("negative arrival rate");
  if (!(delta * (mu + arrival_rate) < 0.5)) {
    throw NumericalError("step too large: delta * (mu + lambda f) >= 0.5");
  }
  auto& p = state.probs;
  const std::size_t top = p.size() - 1;
  scratch.assign(p.size(), 0.0);
  const double arrive = arrival_rate * delta;
  const double serve = mu * delta;
  for (std::size_t i = 0; i <= top; ++i) {
    const double up = i < top ? arrive : 0.0;
    const double down = i > 0 ? serve : 0.0;
    scratch[i] += p[i] * (1.0 - up - down);
    if (i < top) scratch[i + 1] += p[i] * up;
    if (i > 0) scratch[i - 1] += p[i] * down;
  }
  p.swap(scratch);
  state.time += delta;
}

// ---------------------------------------------------------------------------

StateTrace::StateTrace(double start, double delta, std::vector<TracePoint> points)
    : start_(start), delta_(delta), points_(std::move(points)) {}

std::pair<std::size_t, double> StateTrace::locate(double t) const {
  if (points_.empty()) throw std::out_of_range("empty state trace");
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  if (t < start_ - tol || t > end() + tol) {
    throw std::out_of_range("time " + std::to_string(t) + " outside state trace");
  }
  if (points_.size() == 1) return {0, 0.0};
  const double pos = std::clamp((t - start_) / delta_, 0.0, static_cast<double>(points_.size() - 1));
  auto k = static_cast<std::size_t>(pos);
  if (k >= points_.size() - 1) k = points_.size() - 2;
  // The last step may be shorter than delta; interpolate on actual times.
  const double span = points_[k + 1].t - points_[k].t;
  const double w = span > 0.0 ? std::clamp((t - points_[k].t) / span, 0.0, 1.0) : 0.0;
  return {k, w};
}

double StateTrace::mean_queue(double t) const {
  const auto [k, w] = locate(t);
  if (w == 0.0) return points_[k].mean_queue;
  return points_[k].mean_queue + w * (points_[k + 1].mean_queue - points_[k].mean_queue);
}

double StateTrace::empty_probability(double t) const {
  const auto [k, w] = locate(t);
  if (w == 0.0) return points_[k].empty_prob;
  return points_[k].empty_prob + w * (points_[k + 1].empty_prob - points_[k].empty_prob);
}

namespace {

// Conditional probability that a pending customer arrives in (t0, t1].
double step_arrival_probability(const ArrivalDistribution& d, double t0, double t1) {
  const double F0 = d.cdf(t0);
  const double pending = 1.0 - F0;
  if (pending <= 0.0) return 0.0;
  return std::clamp((d.cdf(t1) - F0) / pending, 0.0, 1.0);
}

}  // namespace

StateTrace trace_queue(const ModelParams& params, const ArrivalDistribution& d, double delta,
                       double horizon) {
  if (!(delta > 0.0)) throw InvalidParams("trace step must be positive");
  if (horizon < 0.0) horizon = d.t_end;
  const double start = d.grid.empty() ? d.t_e : d.post_start();
  horizon = std::max(horizon, start);
  std::vector<TracePoint> points;
  const auto steps = static_cast<long>(std::ceil((horizon - start) / delta - 1e-9));
  points.reserve(static_cast<std::size_t>(steps) + 1);

  auto time_at = [&](long k) { return std::min(horizon, start + static_cast<double>(k) * delta); };

  if (params.is_poisson()) {
    const double lambda = params.expected_others();
    const int K = poisson_truncation_level(lambda);
    QueueLengthDistribution s = poisson_queue_state(lambda * d.mass_at_opening(), K, start);
    std::vector<double> scratch;
    for (long k = 0;; ++k) {
      const double t = time_at(k);
      points.push_back({t, s.mean_queue(), s.empty_probability(), 0.0});
      if (k >= steps) break;
      const double t1 = time_at(k + 1);
      const double h = t1 - t;
      const double rate = lambda * (d.cdf(t1) - d.cdf(t)) / h;
      advance_poisson(s, rate, params.mu, h, scratch);
    }
  } else {
    StateDistribution s = init_state(params, d);
    StepWorkspace ws;
    for (long k = 0;; ++k) {
      const double t = time_at(k);
      points.push_back({t, s.mean_queue(), s.empty_probability(), s.absorbed()});
      if (k >= steps) break;
      const double t1 = time_at(k + 1);
      advance(s, step_arrival_probability(d, t, t1), params.mu, t1 - t, ws);
    }
  }
  return StateTrace(start, delta, std::move(points));
}

double cost_of_arrival(double t, const ArrivalDistribution& d, const ModelParams& p,
                       const StateTrace& trace) {
  const double n = p.expected_others();
  const double wait_rate = (p.alpha + p.beta) / p.mu;
  if (t < 0.0) return -p.alpha * t + (wait_rate + p.gamma) * n * d.cdf(t);
  if (t == 0.0 && d.has_atom()) {
    // Uniform position among the customers tied at the atom.
    return (wait_rate + p.gamma) * n * d.p0 / 2.0;
  }
  if (d.has_atom() && t < trace.start()) {
    if (p.is_poisson()) throw UnsupportedScenario("gap cost needs a fixed population");
    return wait_rate * q_atom(d.p0, t, p.others(), p.mu) + p.beta * t + p.gamma * n * d.p0;
  }
  return wait_rate * trace.mean_queue(t) + p.beta * t + p.gamma * n * d.cdf(t);
}

}  // namespace qae
