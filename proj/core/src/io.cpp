#include "qae/io.hpp"

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "qae/error.hpp"

namespace qae {

using nlohmann::json;

namespace {

json params_json(const ModelParams& p) {
  json j;
  j["mu"] = p.mu;
  j["alpha"] = p.alpha;
  j["beta"] = p.beta;
  j["gamma"] = p.gamma;
  if (p.is_poisson()) {
    j["population"] = {{"type", "poisson"}, {"lambda", p.expected_others()}};
  } else {
    j["population"] = {{"type", "fixed"}, {"n", p.others()}};
  }
  j["early_birds_allowed"] = p.early_birds_allowed;
  j["closing_time"] = p.closing_time ? json(*p.closing_time) : json(nullptr);
  return j;
}

json numerics_json(const NumericsConfig& n) {
  json j;
  j["delta"] = n.delta;
  j["epsilon"] = n.epsilon;
  j["density_epsilon"] = n.density_epsilon ? json(*n.density_epsilon) : json(nullptr);
  j["max_bisect"] = n.max_bisect;
  j["mass_tolerance"] = n.mass_tolerance;
  j["rng_seed"] = n.rng_seed;
  return j;
}

ModelParams params_from(const json& j) {
  ModelParams p;
  p.mu = j.at("mu").get<double>();
  p.alpha = j.at("alpha").get<double>();
  p.beta = j.at("beta").get<double>();
  p.gamma = j.at("gamma").get<double>();
  const json& pop = j.at("population");
  const std::string type = pop.at("type").get<std::string>();
  if (type == "fixed") {
    p.population = FixedOthers{pop.at("n").get<int>()};
  } else if (type == "poisson") {
    p.population = PoissonOthers{pop.at("lambda").get<double>()};
  } else {
    throw ParseError("unknown population type '" + type + "'");
  }
  p.early_birds_allowed = j.at("early_birds_allowed").get<bool>();
  if (const auto it = j.find("closing_time"); it != j.end() && !it->is_null()) {
    p.closing_time = it->get<double>();
  }
  return p;
}

NumericsConfig numerics_from(const json& j) {
  NumericsConfig n;
  n.delta = j.at("delta").get<double>();
  n.epsilon = j.at("epsilon").get<double>();
  if (const auto it = j.find("density_epsilon"); it != j.end() && !it->is_null()) {
    n.density_epsilon = it->get<double>();
  }
  n.max_bisect = j.at("max_bisect").get<int>();
  n.mass_tolerance = j.at("mass_tolerance").get<double>();
  n.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  return n;
}

// Row indices kept when thinning `size` rows to about `max_points`.
std::vector<std::size_t> decimate(std::size_t size, std::size_t max_points) {
  std::vector<std::size_t> rows;
  if (size == 0) return rows;
  const std::size_t stride =
      max_points == 0 || size <= max_points ? 1 : (size + max_points - 1) / max_points;
  for (std::size_t k = 0; k < size; k += stride) rows.push_back(k);
  if (rows.back() != size - 1) rows.push_back(size - 1);
  return rows;
}

// One CSV row, each value in the shortest form that parses back exactly.
void csv_row(std::ostream& out, std::initializer_list<double> values) {
  char buf[32];
  bool first = true;
  for (double v : values) {
    if (!first) out << ',';
    first = false;
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
  }
  out << '\n';
}

}  // namespace

std::string params_to_json(const ModelParams& params) { return params_json(params).dump(); }
std::string numerics_to_json(const NumericsConfig& numerics) {
  return numerics_json(numerics).dump();
}

std::string solution_to_json(const EquilibriumSolution& s, int indent) {
  const ArrivalDistribution& d = s.distribution;
  json j;
  j["params"] = params_json(s.params);
  j["numerics"] = numerics_json(s.numerics);
  j["t_a"] = d.t_a;
  j["pre_density"] = d.pre_density;
  j["p0"] = d.p0;
  j["t_e"] = d.t_e;
  j["t_end"] = d.t_end;
  j["c_e"] = s.c_e;
  j["tail"] = {{"mass", d.tail.mass}, {"rate", d.tail.rate}};
  json grid = json::array();
  for (const GridPoint& g : d.grid) grid.push_back({g.t, g.cdf, g.density});
  j["grid"] = std::move(grid);
  j["diagnostics"] = {{"iterations", s.iterations},
                      {"residual", s.residual},
                      {"stop", to_string(s.stop)},
                      {"terminal_density", s.terminal_density},
                      {"source", s.source}};
  return j.dump(indent);
}

EquilibriumSolution solution_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    EquilibriumSolution s;
    s.params = params_from(j.at("params"));
    s.numerics = numerics_from(j.at("numerics"));
    ArrivalDistribution& d = s.distribution;
    d.t_a = j.at("t_a").get<double>();
    d.pre_density = j.at("pre_density").get<double>();
    d.p0 = j.at("p0").get<double>();
    d.t_e = j.at("t_e").get<double>();
    d.t_end = j.at("t_end").get<double>();
    d.tail.mass = j.at("tail").at("mass").get<double>();
    d.tail.rate = j.at("tail").at("rate").get<double>();
    for (const json& row : j.at("grid")) {
      if (!row.is_array() || row.size() != 3) throw ParseError("grid rows must be [t, F, f]");
      d.grid.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
    }
    s.c_e = j.at("c_e").get<double>();
    const json& diag = j.at("diagnostics");
    s.iterations = diag.at("iterations").get<int>();
    s.residual = diag.at("residual").get<double>();
    s.stop = stop_flag_from_string(diag.at("stop").get<std::string>());
    s.terminal_density = diag.at("terminal_density").get<double>();
    s.source = diag.at("source").get<std::string>();
    validate(s.params);
    validate(s.numerics);
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("solution JSON: ") + e.what());
  } catch (const InvalidParams& e) {
    throw ParseError(std::string("solution JSON: ") + e.what());
  }
}

void save_solution(const std::filesystem::path& path, const EquilibriumSolution& solution) {
  write_text_file(path, solution_to_json(solution) + "\n");
}

EquilibriumSolution load_solution(const std::filesystem::path& path) {
  return solution_from_json(read_text_file(path));
}

std::string report_to_json(const SimulationReport& r, int indent) {
  json j;
  j["c_e_ref"] = r.c_e_ref;
  j["max_abs_deviation"] = r.max_abs_deviation;
  j["tolerance"] = r.tolerance;
  j["indifference_ok"] = r.indifference_ok;
  j["outside_ok"] = r.outside_ok;
  j["replications"] = r.replications;
  j["seed"] = r.seed;
  json probes = json::array();
  for (std::size_t k = 0; k < r.probe_times.size(); ++k) {
    probes.push_back(
        {{"t", r.probe_times[k]}, {"mean", r.mean_costs[k]}, {"half_width", r.half_widths[k]}});
  }
  j["probes"] = std::move(probes);
  json outside = json::array();
  for (const ProbeResult& p : r.outside) {
    outside.push_back({{"t", p.t},
                       {"label", p.label},
                       {"mean", p.cost.mean},
                       {"half_width", p.cost.half_width}});
  }
  j["outside"] = std::move(outside);
  return j.dump(indent);
}

std::string tail_report_to_json(const TailReport& r, int indent) {
  json j;
  j["eta_hat"] = r.eta_hat;
  j["tail_constant"] = r.tail_constant;
  j["envelope_ratio"] = r.envelope_ratio;
  j["window"] = {{"begin", r.window_begin}, {"end", r.window_end}, {"samples", r.window_samples}};
  j["mu_bound_ok"] = r.mu_bound_ok;
  j["monotone_tail_ok"] = r.monotone_tail_ok;
  j["conjecture_rate"] = r.conjecture_rate;
  j["conjecture_ok"] = r.conjecture_ok;
  return j.dump(indent);
}

void write_grid_csv(std::ostream& out, const ArrivalDistribution& d, std::size_t max_points) {
  out << "t,F,f\n";
  if (d.t_a < 0.0) csv_row(out, {d.t_a, 0.0, d.pre_density});
  for (std::size_t k : decimate(d.grid.size(), max_points)) {
    const GridPoint& g = d.grid[k];
    csv_row(out, {g.t, g.cdf, g.density});
  }
}

void write_trace_csv(std::ostream& out, const StateTrace& trace, std::size_t max_points) {
  out << "t,mean_queue,empty_prob,absorbed\n";
  const auto& pts = trace.points();
  for (std::size_t k : decimate(pts.size(), max_points)) {
    const TracePoint& p = pts[k];
    csv_row(out, {p.t, p.mean_queue, p.empty_prob, p.absorbed});
  }
}

void write_hazard_csv(std::ostream& out, const std::vector<HazardSample>& hazard,
                      std::size_t max_points) {
  out << "t,h\n";
  for (std::size_t k : decimate(hazard.size(), max_points)) csv_row(out, {hazard[k].t, hazard[k].h});
}

void write_simulation_csv(std::ostream& out, const SimulationReport& r) {
  out << "t,mean,ci_low,ci_high\n";
  for (std::size_t k = 0; k < r.probe_times.size(); ++k) {
    const double m = r.mean_costs[k];
    const double h = r.half_widths[k];
    csv_row(out, {r.probe_times[k], m, m - h, m + h});
  }
}

std::string manifest_to_json(const RunManifest& m, int indent) {
  json j;
  j["command"] = m.command;
  j["arguments"] = m.arguments;
  j["params"] = m.params_json.empty() ? json(nullptr) : json::parse(m.params_json);
  j["numerics"] = m.numerics_json.empty() ? json(nullptr) : json::parse(m.numerics_json);
  j["outputs"] = m.outputs;
  j["wall_time_seconds"] = m.wall_time_seconds;
  j["version"] = m.version;
  return j.dump(indent);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace qae
