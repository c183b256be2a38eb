#pragma once

// Domain types shared by every module: cost/service parameters, numerics
// knobs, and the piecewise equilibrium arrival distribution.
//
// Time origin is the server opening (t = 0). Negative times are legal only
// when early birds are allowed.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qae {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// N other customers, known to everyone.
struct FixedOthers {
  int n = 1;

  friend bool operator==(const FixedOthers&, const FixedOthers&) = default;
};

/// A Poisson(lambda) number of other customers.
struct PoissonOthers {
  double lambda = 1.0;

  friend bool operator==(const PoissonOthers&, const PoissonOthers&) = default;
};

using Population = std::variant<FixedOthers, PoissonOthers>;

struct ModelParams {
  double mu = 1.0;     ///< service rate
  double alpha = 1.0;  ///< waiting cost per unit time
  double beta = 0.0;   ///< tardiness cost per unit time after opening
  double gamma = 0.0;  ///< penalty per customer admitted ahead
  Population population = FixedOthers{1};
  bool early_birds_allowed = true;
  std::optional<double> closing_time;  ///< absent means no closing time

  [[nodiscard]] bool is_poisson() const {
    return std::holds_alternative<PoissonOthers>(population);
  }
  /// N for a fixed population; throws UnsupportedScenario for Poisson.
  [[nodiscard]] int others() const;
  /// N or lambda: the expected number of other customers.
  [[nodiscard]] double expected_others() const;
  [[nodiscard]] double horizon() const { return closing_time.value_or(kInfinity); }
  [[nodiscard]] bool has_closing_time() const { return closing_time.has_value(); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// ModelParams that passed validate(). Only validate() can construct one.
class ValidatedParams {
 public:
  [[nodiscard]] const ModelParams& get() const { return params_; }
  const ModelParams* operator->() const { return &params_; }
  operator const ModelParams&() const { return params_; }  // NOLINT(google-explicit-constructor)

  friend bool operator==(const ValidatedParams&, const ValidatedParams&) = default;

 private:
  explicit ValidatedParams(ModelParams p) : params_(std::move(p)) {}
  friend ValidatedParams validate(const ModelParams&);
  ModelParams params_;
};

/// Checks every ModelParams invariant; throws InvalidParams on failure.
ValidatedParams validate(const ModelParams& params);
inline ValidatedParams validate(const ValidatedParams& params) { return params; }

struct NumericsConfig {
  double delta = 1e-4;           ///< integration step
  double epsilon = 1e-6;         ///< mass tolerance |F - 1| and truncation level
  /// Threshold for the "density vanished" stop; defaults to epsilon.
  std::optional<double> density_epsilon;
  int max_bisect = 200;
  double mass_tolerance = 1e-3;  ///< residual still accepted after max_bisect
  std::uint64_t rng_seed = 42;

  [[nodiscard]] double density_threshold() const { return density_epsilon.value_or(epsilon); }

  friend bool operator==(const NumericsConfig&, const NumericsConfig&) = default;
};

void validate(const NumericsConfig& numerics);

/// Reads a flat `key = value` file (keys: delta, epsilon, density_epsilon,
/// max_bisect, mass_tolerance, rng_seed). Blank lines and `#` comments are
/// ignored; missing keys keep `base` values.
NumericsConfig load_numerics(const std::filesystem::path& path, NumericsConfig base = {});
NumericsConfig parse_numerics(const std::string& text, NumericsConfig base = {});

/// One sample of the post-opening cdf. `density` is the right-hand density
/// on [t, next t): the cdf between samples is linear.
struct GridPoint {
  double t = 0.0;
  double cdf = 0.0;
  double density = 0.0;

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Mass cut off beyond the last grid point of an infinite support, and the
/// exponential rate used to extrapolate it. `mass == 0` for finite supports.
struct TailTruncation {
  double mass = 0.0;
  double rate = 0.0;

  friend bool operator==(const TailTruncation&, const TailTruncation&) = default;
};

/// Symmetric equilibrium arrival strategy.
///
/// Layout along the time axis:
///   [t_a, 0)        uniform pre-opening density (early birds only)
///   {0}             atom of mass p0 (no early birds only)
///   (0, t_e)        gap with zero density (only when 0 < p0 < 1)
///   [grid.front().t, t_end]  sampled cdf/density
///   (t_end, inf)    exponential tail carrying `tail.mass` when truncated
class ArrivalDistribution {
 public:
  double t_a = 0.0;
  double pre_density = 0.0;
  double p0 = 0.0;
  double t_e = 0.0;
  double t_end = 0.0;
  std::vector<GridPoint> grid;
  TailTruncation tail;

  /// F(t), right-continuous.
  [[nodiscard]] double cdf(double t) const;
  /// f(t); zero inside the gap and outside the support. At t = 0 returns
  /// the post-opening density f(0+).
  [[nodiscard]] double density(double t) const;
  /// F(0-): mass that arrived strictly before opening.
  [[nodiscard]] double mass_before_opening() const { return pre_density * (-t_a); }
  /// F(0), including the atom.
  [[nodiscard]] double mass_at_opening() const { return mass_before_opening() + p0; }
  /// Where the sampled post-opening part starts: max(0, t_e).
  [[nodiscard]] double post_start() const { return grid.empty() ? 0.0 : grid.front().t; }
  [[nodiscard]] bool has_atom() const { return p0 > 0.0; }
  [[nodiscard]] bool has_gap() const { return p0 > 0.0 && p0 < 1.0 && t_e > 0.0; }
  [[nodiscard]] bool truncated() const { return tail.mass > 0.0 && tail.rate > 0.0; }
  /// Lower end of the support (t_a, or 0 when there are no early birds).
  [[nodiscard]] double support_begin() const { return t_a < 0.0 ? t_a : 0.0; }

  /// Human-readable list of violated invariants; empty when the
  /// distribution is well formed.
  [[nodiscard]] std::vector<std::string> invariant_violations(double epsilon) const;

  friend bool operator==(const ArrivalDistribution&, const ArrivalDistribution&) = default;
};

/// Why an integration pass stopped.
enum class StopFlag {
  kMassReached,      ///< F reached 1 (within epsilon) or would overshoot it
  kDensityVanished,  ///< f dropped to the density threshold
  kClosingTime,      ///< t reached T
  kAtomOnly,         ///< all mass sits in the atom; nothing to integrate
};

const char* to_string(StopFlag flag);
StopFlag stop_flag_from_string(const std::string& s);

struct EquilibriumSolution {
  ModelParams params;
  NumericsConfig numerics;
  ArrivalDistribution distribution;
  double c_e = 0.0;
  int iterations = 0;   ///< integration passes (1 when the boundary is pinned)
  double residual = 0.0;  ///< 1 - F(t_end) at the accepted pass
  StopFlag stop = StopFlag::kMassReached;
  double terminal_density = 0.0;  ///< raw f at the stopping step
  std::string source = "solver";

  friend bool operator==(const EquilibriumSolution&, const EquilibriumSolution&) = default;
};

}  // namespace qae
