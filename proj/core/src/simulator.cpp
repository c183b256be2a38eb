#include "qae/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <utility>

#include "qae/error.hpp"

namespace qae {

double sample_arrival(const ArrivalDistribution& d, double u) {
  const double before = d.mass_before_opening();
  if (u < before) return d.t_a + u / d.pre_density;
  if (u < d.mass_at_opening() || d.grid.empty()) return 0.0;
  const auto& g = d.grid;
  if (u <= g.back().cdf) {
    // First point whose cdf reaches u; the segment before it is not flat.
    auto it = std::lower_bound(g.begin(), g.end(), u,
                               [](const GridPoint& p, double v) { return p.cdf < v; });
    if (it == g.begin()) return it->t;
    const GridPoint& b = *it;
    const GridPoint& a = *(it - 1);
    return a.t + (u - a.cdf) / (b.cdf - a.cdf) * (b.t - a.t);
  }
  if (d.truncated()) {
    const double survival = std::max(1.0 - u, 1e-300);
    return d.t_end + std::log(d.tail.mass / survival) / d.tail.rate;
  }
  return d.t_end;
}

unsigned simulation_threads() {
  if (const char* env = std::getenv("QAE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

constexpr long kBlock = 4096;

struct BlockSums {
  double sum = 0.0;
  double sum_sq = 0.0;
};

struct Customer {
  double t;
  double rank;
};

BlockSums run_block(double probe_t, const ArrivalDistribution& d, const ModelParams& p, long reps,
                    std::uint64_t seed, std::uint64_t stream, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> service(p.mu);
  const bool poisson = p.is_poisson();
  std::poisson_distribution<int> count(poisson ? p.expected_others() : 1.0);
  const int fixed_n = poisson ? 0 : p.others();

  std::vector<Customer> ahead;
  BlockSums s;
  for (long r = 0; r < reps; ++r) {
    const int n = poisson ? count(rng) : fixed_n;
    const double probe_rank = unif(rng);
    ahead.clear();
    for (int k = 0; k < n; ++k) {
      const double t = sample_arrival(d, unif(rng));
      const double rank = unif(rng);
      if (t < probe_t || (t == probe_t && rank < probe_rank)) ahead.push_back({t, rank});
    }
    std::sort(ahead.begin(), ahead.end(), [](const Customer& a, const Customer& b) {
      return a.t < b.t || (a.t == b.t && a.rank < b.rank);
    });
    // Only the customers served before the probe affect its entry time.
    double free_at = 0.0;
    for (const Customer& c : ahead) free_at = std::max(free_at, c.t) + service(rng);
    const double start = std::max({probe_t, 0.0, free_at});
    const double cost = p.alpha * (start - probe_t) + p.beta * std::max(start, 0.0) +
                        p.gamma * static_cast<double>(ahead.size());
    s.sum += cost;
    s.sum_sq += cost * cost;
  }
  return s;
}

}  // namespace

CostEstimate estimate_cost(double probe_t, const ArrivalDistribution& d, const ModelParams& params,
                           long replications, std::uint64_t seed, std::uint64_t stream) {
  const ValidatedParams checked_params = validate(params);
  const ModelParams& p = checked_params.get();
  if (replications < 1) throw InvalidParams("replications must be at least 1");
  if (probe_t < 0.0 && !p.early_birds_allowed) {
    throw InvalidParams("probe before opening while early birds are not allowed");
  }
  const long blocks = (replications + kBlock - 1) / kBlock;
  std::vector<BlockSums> sums(static_cast<std::size_t>(blocks));
  std::atomic<long> next{0};
  auto worker = [&] {
    for (long b = next++; b < blocks; b = next++) {
      const long reps = std::min(kBlock, replications - b * kBlock);
      sums[static_cast<std::size_t>(b)] =
          run_block(probe_t, d, p, reps, seed, stream, static_cast<std::uint64_t>(b));
    }
  };
  const unsigned threads =
      static_cast<unsigned>(std::min<long>(simulation_threads(), blocks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }

  double sum = 0.0;
  double sum_sq = 0.0;
  for (const BlockSums& b : sums) {
    sum += b.sum;
    sum_sq += b.sum_sq;
  }
  const double n = static_cast<double>(replications);
  CostEstimate est;
  est.replications = replications;
  est.mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * est.mean * est.mean) / (n - 1.0)) : 0.0;
  est.half_width = 1.96 * std::sqrt(var / n);
  return est;
}

SimulationReport verify_equilibrium(const EquilibriumSolution& solution,
                                    const VerifyOptions& options) {
  if (options.grid_size < 1) throw InvalidParams("grid_size must be at least 1");
  const ArrivalDistribution& d = solution.distribution;
  const ModelParams& p = solution.params;
  SimulationReport rep;
  rep.c_e_ref = solution.c_e;
  rep.replications = options.replications;
  rep.seed = options.seed;
  rep.tolerance = options.relative_tolerance * std::abs(solution.c_e);

  std::vector<double>& probes = rep.probe_times;
  auto linspace = [&](double a, double b, int count) {
    for (int k = 0; k < count; ++k) {
      probes.push_back(count == 1 ? a : a + (b - a) * k / (count - 1.0));
    }
  };
  if (d.grid.empty()) {
    probes.push_back(0.0);
  } else if (d.has_gap()) {
    probes.push_back(0.0);
    if (options.grid_size > 1) linspace(d.t_e, d.t_end, options.grid_size - 1);
  } else {
    linspace(d.support_begin(), d.t_end, options.grid_size);
  }

  std::uint64_t stream = 0;
  rep.indifference_ok = true;
  for (double t : probes) {
    const CostEstimate c = estimate_cost(t, d, p, options.replications, options.seed, stream++);
    rep.mean_costs.push_back(c.mean);
    rep.half_widths.push_back(c.half_width);
    const double dev = std::abs(c.mean - solution.c_e);
    rep.max_abs_deviation = std::max(rep.max_abs_deviation, dev);
    if (dev > std::max(c.half_width, rep.tolerance)) rep.indifference_ok = false;
  }

  if (d.t_a < 0.0) {
    const double t = d.t_a - 0.25 * (d.t_end - d.t_a);
    rep.outside.push_back({t, estimate_cost(t, d, p, options.replications, options.seed, stream++),
                           false, "before_support"});
  }
  if (d.has_gap()) {
    const double t = 0.5 * d.t_e;
    rep.outside.push_back(
        {t, estimate_cost(t, d, p, options.replications, options.seed, stream++), false, "gap"});
  }
  rep.outside_ok = std::none_of(rep.outside.begin(), rep.outside.end(), [&](const ProbeResult& r) {
    return r.cost.mean + r.cost.half_width < solution.c_e;
  });
  return rep;
}

}  // namespace qae
