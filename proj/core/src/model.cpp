#include "qae/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qae/error.hpp"

namespace qae {

int ModelParams::others() const {
  if (const auto* fixed = std::get_if<FixedOthers>(&population)) return fixed->n;
  throw UnsupportedScenario("population is Poisson; no fixed N");
}

double ModelParams::expected_others() const {
  return std::visit(
      [](const auto& p) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, FixedOthers>) {
          return static_cast<double>(p.n);
        } else {
          return p.lambda;
        }
      },
      population);
}

namespace {

bool finite(double x) { return std::isfinite(x); }

}  // namespace

ValidatedParams validate(const ModelParams& p) {
  if (!finite(p.mu) || p.mu <= 0.0) throw InvalidParams("mu must be positive and finite");
  if (!finite(p.alpha) || p.alpha <= 0.0) throw InvalidParams("alpha must be positive and finite");
  if (!finite(p.beta) || p.beta < 0.0) throw InvalidParams("beta must be nonnegative");
  if (!finite(p.gamma) || p.gamma < 0.0) throw InvalidParams("gamma must be nonnegative");
  if (p.beta == 0.0 && p.gamma == 0.0) {
    throw InvalidParams("degenerate cost: beta and gamma are both zero");
  }
  if (const auto* fixed = std::get_if<FixedOthers>(&p.population)) {
    if (fixed->n < 1) throw InvalidParams("population must contain at least one other customer");
  } else {
    const double lambda = std::get<PoissonOthers>(p.population).lambda;
    if (!finite(lambda) || lambda <= 0.0) throw InvalidParams("lambda must be positive");
  }
  if (p.closing_time && !(*p.closing_time > 0.0)) {
    throw InvalidParams("closing time must be positive");
  }
  return ValidatedParams(p);
}

void validate(const NumericsConfig& n) {
  if (!(n.delta > 0.0) || !finite(n.delta)) throw InvalidParams("delta must be positive");
  if (!(n.epsilon > 0.0) || n.epsilon >= 1.0) throw InvalidParams("epsilon must lie in (0, 1)");
  if (n.density_epsilon && !(*n.density_epsilon > 0.0)) {
    throw InvalidParams("density_epsilon must be positive");
  }
  if (n.max_bisect < 1) throw InvalidParams("max_bisect must be at least 1");
  if (!(n.mass_tolerance > 0.0)) throw InvalidParams("mass_tolerance must be positive");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double x = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': not a number: " + value);
  }
}

template <typename Int>
Int to_integer(const std::string& key, const std::string& value) {
  Int out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError("config key '" + key + "': not an integer: " + value);
  }
  return out;
}

}  // namespace

NumericsConfig parse_numerics(const std::string& text, NumericsConfig cfg) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key == "delta") {
      cfg.delta = to_double(key, value);
    } else if (key == "epsilon") {
      cfg.epsilon = to_double(key, value);
    } else if (key == "density_epsilon") {
      cfg.density_epsilon = to_double(key, value);
    } else if (key == "max_bisect") {
      cfg.max_bisect = to_integer<int>(key, value);
    } else if (key == "mass_tolerance") {
      cfg.mass_tolerance = to_double(key, value);
    } else if (key == "rng_seed") {
      cfg.rng_seed = to_integer<std::uint64_t>(key, value);
    } else {
      throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  validate(cfg);
  return cfg;
}

NumericsConfig load_numerics(const std::filesystem::path& path, NumericsConfig base) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_numerics(buf.str(), base);
}

// ---------------------------------------------------------------------------
// ArrivalDistribution

namespace {

// Index of the last grid point with t <= x (grid non-empty, x >= front).
std::size_t segment_of(const std::vector<GridPoint>& grid, double x) {
  auto it = std::upper_bound(grid.begin(), grid.end(), x,
                             [](double v, const GridPoint& g) { return v < g.t; });
  return static_cast<std::size_t>(std::distance(grid.begin(), it)) - 1;
}

}  // namespace

double ArrivalDistribution::cdf(double t) const {
  if (t < 0.0) {
    if (t < t_a) return 0.0;
    return pre_density * (t - t_a);
  }
  if (grid.empty()) return std::min(1.0, mass_at_opening());
  if (t < grid.front().t) return mass_at_opening();
  if (t >= t_end) {
    if (truncated()) return 1.0 - tail.mass * std::exp(-tail.rate * (t - t_end));
    return t == t_end ? grid.back().cdf : 1.0;
  }
  const std::size_t k = segment_of(grid, t);
  if (k + 1 >= grid.size()) return grid.back().cdf;
  const GridPoint& a = grid[k];
  const GridPoint& b = grid[k + 1];
  const double w = (t - a.t) / (b.t - a.t);
  return a.cdf + w * (b.cdf - a.cdf);
}

double ArrivalDistribution::density(double t) const {
  if (t < 0.0) return t < t_a ? 0.0 : pre_density;
  if (grid.empty() || t < grid.front().t) return 0.0;
  if (t >= t_end) {
    if (truncated()) return tail.mass * tail.rate * std::exp(-tail.rate * (t - t_end));
    return t == t_end ? grid.back().density : 0.0;
  }
  return grid[segment_of(grid, t)].density;
}

std::vector<std::string> ArrivalDistribution::invariant_violations(double epsilon) const {
  std::vector<std::string> out;
  constexpr double kSlack = 1e-12;
  if (t_a > 0.0) out.emplace_back("t_a must be <= 0");
  if (pre_density < 0.0) out.emplace_back("negative pre-opening density");
  if (p0 < 0.0 || p0 > 1.0) out.emplace_back("atom mass outside [0, 1]");
  if (p0 > 0.0 && (t_a < 0.0 || pre_density > 0.0)) {
    out.emplace_back("atom at zero together with early arrivals");
  }
  if (t_e < 0.0) out.emplace_back("gap end must be >= 0");
  if (t_e > 0.0 && !(p0 > 0.0 && p0 < 1.0)) out.emplace_back("gap without a fractional atom");
  if (grid.empty()) {
    if (std::abs(mass_at_opening() - 1.0) > epsilon) out.emplace_back("empty grid but F(0) < 1");
    return out;
  }
  if (std::abs(grid.front().cdf - mass_at_opening()) > 1e-9) {
    out.emplace_back("grid does not start at F(0)");
  }
  if (has_gap() && std::abs(grid.front().t - t_e) > 1e-12) {
    out.emplace_back("grid does not start at the gap end");
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const GridPoint& g = grid[k];
    if (g.density < 0.0) {
      out.emplace_back("negative density at t=" + std::to_string(g.t));
      break;
    }
    if (k > 0) {
      if (!(g.t > grid[k - 1].t)) {
        out.emplace_back("grid times not strictly increasing");
        break;
      }
      if (g.cdf < grid[k - 1].cdf - kSlack) {
        out.emplace_back("cdf decreases at t=" + std::to_string(g.t));
        break;
      }
    }
  }
  const double last = grid.back().cdf;
  if (last > 1.0 + kSlack || last < 1.0 - epsilon) {
    out.emplace_back("F(t_end) outside [1 - epsilon, 1]");
  }
  if (std::abs(grid.back().t - t_end) > 1e-12) out.emplace_back("t_end differs from last grid time");
  return out;
}

const char* to_string(StopFlag flag) {
  switch (flag) {
    case StopFlag::kMassReached: return "mass_reached";
    case StopFlag::kDensityVanished: return "density_vanished";
    case StopFlag::kClosingTime: return "closing_time";
    case StopFlag::kAtomOnly: return "atom_only";
  }
  return "unknown";
}

StopFlag stop_flag_from_string(const std::string& s) {
  if (s == "mass_reached") return StopFlag::kMassReached;
  if (s == "density_vanished") return StopFlag::kDensityVanished;
  if (s == "closing_time") return StopFlag::kClosingTime;
  if (s == "atom_only") return StopFlag::kAtomOnly;
  throw ParseError("unknown stop flag '" + s + "'");
}

}  // namespace qae
