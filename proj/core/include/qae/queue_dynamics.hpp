#pragma once

// Transient law of the queue seen by a tagged customer when the N others
// arrive independently according to an ArrivalDistribution, and the
// resulting expected cost of arriving at a given time.

#include <span>
#include <vector>

#include "qae/model.hpp"

namespace qae {

/// p_{i,j}(t) = P(Q(t) = i, A(t) = j) over 0 <= i <= j <= N, stored densely
/// on the triangular index set ((N+1)(N+2)/2 entries).
class StateDistribution {
 public:
  StateDistribution() = default;
  explicit StateDistribution(int n, double time = 0.0);

  [[nodiscard]] int others() const { return n_; }
  [[nodiscard]] double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  /// 0 for indices outside the triangle.
  [[nodiscard]] double operator()(int i, int j) const;
  double& at(int i, int j);

  [[nodiscard]] std::span<const double> probabilities() const { return probs_; }
  [[nodiscard]] std::span<double> probabilities() { return probs_; }

  [[nodiscard]] double total() const;
  [[nodiscard]] double empty_probability() const;
  [[nodiscard]] double mean_queue() const;
  [[nodiscard]] double mean_arrived() const;
  /// p_{0,N}: everyone has arrived and been served.
  [[nodiscard]] double absorbed() const { return (*this)(0, n_); }

  static constexpr std::size_t index(int i, int j) {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(j + 1) / 2 +
           static_cast<std::size_t>(i);
  }
  static constexpr std::size_t size_for(int n) { return index(0, n + 1); }

 private:
  int n_ = 0;
  double time_ = 0.0;
  std::vector<double> probs_;
};

/// Binomial(N, arrived) customers present, none served yet.
StateDistribution arrivals_only_state(int n, double arrived, double time = 0.0);

/// Each of N others arrived at 0 with probability p0; nothing arrives in
/// (0, t]; services run at rate mu. Returns the state at time t.
StateDistribution atom_then_services_state(int n, double p0, double mu, double t);

/// State at the start of the post-opening dynamics: time 0 with the
/// pre-opening mass (early birds), or time t_e after the atom drained by
/// Poisson services (no early birds). Throws InvalidParams when the
/// distribution has an atom while early birds are allowed, or early mass
/// while they are not.
StateDistribution init_state(const ModelParams& params, const ArrivalDistribution& distribution);

/// Reusable buffers for advance(); keeps the stepping loop allocation-free.
struct StepWorkspace {
  std::vector<double> next;
  std::vector<double> weights;
};

/// One forward step of length `delta` in which each customer who has not
/// yet arrived does so with probability `arrival_prob` (the step's
/// conditional arrival mass (F(t+delta) - F(t)) / (1 - F(t))) and a busy
/// server completes a service with probability mu * delta. Departure and
/// arrival rates are taken at the left end of the step, so the expected
/// queue and arrival counts move exactly as under explicit Euler; the
/// arrival part is a binomial transfer, which keeps every entry
/// nonnegative and the total mass conserved even when the hazard is large.
/// Throws NumericalError if mu * delta >= 0.5 or arrival_prob is outside
/// [0, 1].
void advance(StateDistribution& state, double arrival_prob, double mu, double delta,
             StepWorkspace& workspace);

/// Euler step driven by the hazard rate h(t) = f(t) / (1 - F(t)).
/// Requires delta * (mu + N h) < 0.5.
StateDistribution euler_step(const StateDistribution& state, double hazard,
                             const ModelParams& params, double delta);

/// P(Q(t) = 0) = sum_j p_{0,j}.
inline double empty_probability(const StateDistribution& state) {
  return state.empty_probability();
}

/// Expected queue length at t when each of n others arrived at 0 with
/// probability p and nobody arrived in (0, t].
double q_atom(double p, double t, int n, double mu);

/// Poisson(mean) pmf at k, evaluated in log space.
double poisson_pmf(int k, double mean);

// ---------------------------------------------------------------------------
// Poisson population: the queue length alone is Markov.

/// P(Q(t) = i) for i = 0..K; arrivals into level K are blocked so the
/// truncated chain conserves mass.
struct QueueLengthDistribution {
  double time = 0.0;
  std::vector<double> probs;

  [[nodiscard]] double total() const;
  [[nodiscard]] double empty_probability() const { return probs.empty() ? 1.0 : probs.front(); }
  [[nodiscard]] double mean_queue() const;
};

/// Smallest K with P(Poisson(lambda) > K) < tail.
int poisson_truncation_level(double lambda, double tail = 1e-12);

/// Poisson(mean) truncated at K, the remainder folded into level K.
QueueLengthDistribution poisson_queue_state(double mean, int truncation, double time = 0.0);

/// Explicit Euler step with total arrival intensity `arrival_rate`
/// (lambda f(t)). Requires delta * (mu + arrival_rate) < 0.5.
void advance_poisson(QueueLengthDistribution& state, double arrival_rate, double mu,
                     double delta, std::vector<double>& scratch);

// ---------------------------------------------------------------------------
// Cost evaluation

struct TracePoint {
  double t = 0.0;
  double mean_queue = 0.0;
  double empty_prob = 0.0;
  double absorbed = 0.0;  ///< p_{0,N}; 0 for Poisson populations
};

/// E[Q(s)] and P(Q(s) = 0) on a uniform grid starting at the distribution's
/// post-opening start.
class StateTrace {
 public:
  StateTrace() = default;
  StateTrace(double start, double delta, std::vector<TracePoint> points);

  [[nodiscard]] double start() const { return start_; }
  [[nodiscard]] double end() const { return points_.empty() ? start_ : points_.back().t; }
  [[nodiscard]] double delta() const { return delta_; }
  [[nodiscard]] const std::vector<TracePoint>& points() const { return points_; }

  /// Linear interpolation; throws std::out_of_range outside [start, end].
  [[nodiscard]] double mean_queue(double t) const;
  [[nodiscard]] double empty_probability(double t) const;

 private:
  [[nodiscard]] std::pair<std::size_t, double> locate(double t) const;

  double start_ = 0.0;
  double delta_ = 0.0;
  std::vector<TracePoint> points_;
};

/// Integrates the queue forward from init_state (or the Poisson analogue)
/// using the distribution's cdf increments as arrival probabilities, up to
/// `horizon` (defaults to the distribution's t_end).
StateTrace trace_queue(const ModelParams& params, const ArrivalDistribution& distribution,
                       double delta, double horizon = -1.0);

/// Expected cost of arriving at t when the others follow `distribution`:
///
///     -alpha t 1{t<0} + (alpha+beta)/mu E[Q(t)] + beta t 1{t>=0} + gamma N F(t)
///
/// For t < 0, E[Q(t)] = N F(t). At an atom the tagged customer is placed
/// uniformly among the tied arrivals; inside the gap E[Q] = q_atom.
double cost_of_arrival(double t, const ArrivalDistribution& distribution,
                       const ModelParams& params, const StateTrace& trace);

}  // namespace qae
