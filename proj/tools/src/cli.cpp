#include "qae/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qae/closed_form.hpp"
#include "qae/error.hpp"
#include "qae/io.hpp"
#include "qae/queue_dynamics.hpp"
#include "qae/simulator.hpp"
#include "qae/social.hpp"
#include "qae/solver.hpp"
#include "qae/tail_analysis.hpp"

#ifndef QAE_VERSION
#define QAE_VERSION "unknown"
#endif

namespace qae::cli {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct ModelFlags {
  double mu = 1.0;
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 0.0;
  int n = 1;
  std::optional<double> lambda;
  std::optional<double> closing_time;
  bool no_early_birds = false;
};

struct NumericsFlags {
  std::string config;
  std::optional<double> delta;
  std::optional<double> epsilon;
  std::optional<double> density_epsilon;
  std::optional<int> max_bisect;
  std::optional<double> mass_tolerance;
  std::optional<std::uint64_t> seed;
};

struct OutputFlags {
  std::string out;
  std::string grid_csv;
  std::string trace_csv;
  std::string csv;
  std::size_t max_grid_points = 0;
};

void add_cost_flags(CLI::App* app, ModelFlags& m) {
  app->add_option("--mu", m.mu, "service rate")->capture_default_str();
  app->add_option("--alpha", m.alpha, "waiting cost per unit time")->capture_default_str();
  app->add_option("--beta", m.beta, "tardiness cost per unit time")->capture_default_str();
  app->add_option("--gamma", m.gamma, "penalty per customer ahead")->capture_default_str();
  app->add_option("--closing-time", m.closing_time, "closing time T (default: none)");
}

void add_model_flags(CLI::App* app, ModelFlags& m) {
  add_cost_flags(app, m);
  auto* n = app->add_option("--n", m.n, "number of other customers")->capture_default_str();
  auto* lambda = app->add_option("--lambda", m.lambda, "Poisson mean number of other customers");
  n->excludes(lambda);
  app->add_flag("--no-early-birds", m.no_early_birds, "forbid arrivals before opening");
}

void add_numerics_flags(CLI::App* app, NumericsFlags& n) {
  app->add_option("--config", n.config, "key = value file with numerics defaults")
      ->check(CLI::ExistingFile);
  app->add_option("--delta", n.delta, "integration step");
  app->add_option("--epsilon", n.epsilon, "mass tolerance and truncation level");
  app->add_option("--density-epsilon", n.density_epsilon, "density stop threshold");
  app->add_option("--max-bisect", n.max_bisect, "bisection pass limit");
  app->add_option("--mass-tolerance", n.mass_tolerance, "residual accepted after max-bisect");
  app->add_option("--seed", n.seed, "random seed");
}

ModelParams build_params(const ModelFlags& m) {
  ModelParams p;
  p.mu = m.mu;
  p.alpha = m.alpha;
  p.beta = m.beta;
  p.gamma = m.gamma;
  if (m.lambda) {
    p.population = PoissonOthers{*m.lambda};
  } else {
    p.population = FixedOthers{m.n};
  }
  p.early_birds_allowed = !m.no_early_birds;
  p.closing_time = m.closing_time;
  validate(p);
  return p;
}

NumericsConfig build_numerics(const NumericsFlags& f, NumericsConfig base = {}) {
  NumericsConfig n = f.config.empty() ? base : load_numerics(f.config, base);
  if (f.delta) n.delta = *f.delta;
  if (f.epsilon) n.epsilon = *f.epsilon;
  if (f.density_epsilon) n.density_epsilon = *f.density_epsilon;
  if (f.max_bisect) n.max_bisect = *f.max_bisect;
  if (f.mass_tolerance) n.mass_tolerance = *f.mass_tolerance;
  if (f.seed) n.rng_seed = *f.seed;
  validate(n);
  return n;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  return out;
}

// Collects output paths and writes the manifest next to the main output.
class Run {
 public:
  Run(std::string command, const std::vector<std::string>& args)
      : started_(Clock::now()) {
    manifest_.command = std::move(command);
    manifest_.arguments = args;
    manifest_.version = QAE_VERSION;
  }

  void set_model(const ModelParams& p) { manifest_.params_json = params_to_json(p); }
  void set_numerics(const NumericsConfig& n) { manifest_.numerics_json = numerics_to_json(n); }
  void wrote(const std::string& path) { manifest_.outputs.push_back(path); }

  void finish(const std::string& main_output) {
    if (main_output.empty()) return;
    manifest_.wall_time_seconds =
        std::chrono::duration<double>(Clock::now() - started_).count();
    write_text_file(main_output + ".manifest.json", manifest_to_json(manifest_) + "\n");
  }

 private:
  Clock::time_point started_;
  RunManifest manifest_;
};

json solution_summary(const EquilibriumSolution& s) {
  const ArrivalDistribution& d = s.distribution;
  json j;
  j["source"] = s.source;
  j["t_a"] = d.t_a;
  j["pre_density"] = d.pre_density;
  j["p0"] = d.p0;
  j["t_e"] = d.t_e;
  j["t_end"] = d.t_end;
  j["F0"] = d.mass_at_opening();
  j["c_e"] = s.c_e;
  j["iterations"] = s.iterations;
  j["residual"] = s.residual;
  j["stop"] = to_string(s.stop);
  j["terminal_density"] = s.terminal_density;
  j["tail"] = {{"mass", d.tail.mass}, {"rate", d.tail.rate}};
  j["grid_points"] = d.grid.size();
  return j;
}

void write_solution_outputs(const EquilibriumSolution& sol, const OutputFlags& o, Run& run) {
  if (!o.out.empty()) {
    save_solution(o.out, sol);
    run.wrote(o.out);
  }
  if (!o.grid_csv.empty()) {
    auto f = open_output(o.grid_csv);
    write_grid_csv(f, sol.distribution, o.max_grid_points);
    run.wrote(o.grid_csv);
  }
  if (!o.trace_csv.empty() && !sol.distribution.grid.empty()) {
    const StateTrace trace = trace_queue(sol.params, sol.distribution, sol.numerics.delta);
    auto f = open_output(o.trace_csv);
    write_trace_csv(f, trace, o.max_grid_points);
    run.wrote(o.trace_csv);
  }
}

void add_solution_outputs(CLI::App* app, OutputFlags& o) {
  app->add_option("--out", o.out, "solution JSON path (a manifest is written beside it)");
  app->add_option("--grid-csv", o.grid_csv, "grid CSV path (t,F,f)");
  app->add_option("--trace-csv", o.trace_csv, "queue trace CSV path");
  app->add_option("--max-grid-points", o.max_grid_points,
                  "thin CSV exports to about this many rows (0 keeps all)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equilibrium arrival times to a single-server exponential queue"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QAE_VERSION);

  ModelFlags model;
  NumericsFlags numerics;
  OutputFlags outputs;

  auto* solve = app.add_subcommand("solve", "solve for the symmetric equilibrium");
  add_model_flags(solve, model);
  add_numerics_flags(solve, numerics);
  add_solution_outputs(solve, outputs);

  std::string scenario;
  auto* closed = app.add_subcommand("closed-form", "exact one-opponent equilibria");
  closed->add_option("--scenario", scenario, "scenario name")
      ->required()
      ->check(CLI::IsMember({"index", "index-no-early", "index-closing", "index-closing-no-early",
                             "tardiness"}));
  add_cost_flags(closed, model);
  add_numerics_flags(closed, numerics);
  add_solution_outputs(closed, outputs);

  std::string solution_path;
  long reps = 100000;
  int grid = 50;
  double tolerance = 0.02;
  auto* verify = app.add_subcommand("verify", "Monte Carlo check of the indifference property");
  verify->add_option("--solution", solution_path, "solution JSON")->required()->check(
      CLI::ExistingFile);
  verify->add_option("--reps", reps, "replications per probe")->capture_default_str();
  verify->add_option("--grid", grid, "number of in-support probes")->capture_default_str();
  verify->add_option("--tolerance", tolerance, "relative tolerance on c_e")->capture_default_str();
  verify->add_option("--seed", numerics.seed, "random seed (default: the solution's rng_seed)");
  verify->add_option("--out", outputs.out, "report JSON path");
  verify->add_option("--csv", outputs.csv, "report CSV path (t,mean,ci_low,ci_high)");

  auto* tail = app.add_subcommand("tail", "hazard rate and tail fit of a solution");
  tail->add_option("--solution", solution_path, "solution JSON")->required()->check(
      CLI::ExistingFile);
  tail->add_option("--out", outputs.out, "report JSON path");
  tail->add_option("--csv", outputs.csv, "hazard CSV path (t,h)");
  tail->add_option("--max-grid-points", outputs.max_grid_points, "thin the CSV (0 keeps all)");

  bool table = false;
  std::vector<double> mus{0.5, 1.0, 2.0};
  std::vector<double> gammas{0.05, 1.0, 5.0};
  std::string benchmark = "three-customer";
  ModelFlags poa_model;
  poa_model.n = 2;
  auto* poa = app.add_subcommand("poa", "price of anarchy");
  poa->add_flag("--table", table, "reproduce the mu x gamma table for three customers");
  poa->add_option("--mus", mus, "table rows")->capture_default_str();
  poa->add_option("--gammas", gammas, "table columns")->capture_default_str();
  poa->add_option("--benchmark", benchmark, "social optimum benchmark")
      ->check(CLI::IsMember({"three-customer", "dynamic-release"}))
      ->capture_default_str();
  add_model_flags(poa, poa_model);
  add_numerics_flags(poa, numerics);
  poa->add_option("--out", outputs.out, "CSV (table) or JSON (single cell) path");

  std::vector<double> probes;
  auto* simulate = app.add_subcommand("simulate-cost", "simulated cost of arriving at given times");
  simulate->add_option("--solution", solution_path, "solution JSON")->required()->check(
      CLI::ExistingFile);
  simulate->add_option("--probe-t", probes, "probe arrival times")->required();
  simulate->add_option("--reps", reps, "replications per probe")->capture_default_str();
  simulate->add_option("--seed", numerics.seed, "random seed (default: the solution's rng_seed)");
  simulate->add_option("--out", outputs.out, "JSON path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (solve->parsed()) {
      Run run("solve", args);
      const ModelParams p = build_params(model);
      const NumericsConfig n = build_numerics(numerics);
      run.set_model(p);
      run.set_numerics(n);
      const EquilibriumSolution sol = solve_equilibrium(p, n);
      write_solution_outputs(sol, outputs, run);
      out << solution_summary(sol).dump(2) << '\n';
      run.finish(outputs.out);
      return kOk;
    }

    if (closed->parsed()) {
      Run run("closed-form", args);
      const auto sc = closed_form::scenario_from_string(scenario);
      model.n = 1;
      model.no_early_birds =
          sc == closed_form::Scenario::kIndexNoEarly || sc == closed_form::Scenario::kIndexClosingNoEarly;
      const ModelParams p = build_params(model);
      const NumericsConfig n = build_numerics(numerics);
      run.set_model(p);
      run.set_numerics(n);
      const closed_form::TwoCustomerEquilibrium eq = closed_form::solve(sc, p);
      const EquilibriumSolution sol = eq.to_solution(n);
      write_solution_outputs(sol, outputs, run);
      json j = solution_summary(sol);
      j["density_before_opening"] = eq.t_a < 0.0 ? eq.pre_density : 0.0;
      j["density_after_opening"] = eq.density(eq.start);
      j["post_density"] = {{"A", eq.A}, {"r", eq.r}, {"B", eq.B}, {"C", eq.C}, {"start", eq.start}};
      j["total_mass"] = eq.total_mass();
      out << j.dump(2) << '\n';
      run.finish(outputs.out);
      return kOk;
    }

    if (verify->parsed()) {
      Run run("verify", args);
      const EquilibriumSolution sol = load_solution(solution_path);
      run.set_model(sol.params);
      run.set_numerics(sol.numerics);
      VerifyOptions opt;
      opt.grid_size = grid;
      opt.replications = reps;
      opt.seed = numerics.seed.value_or(sol.numerics.rng_seed);
      opt.relative_tolerance = tolerance;
      const SimulationReport rep = verify_equilibrium(sol, opt);
      if (!outputs.out.empty()) {
        write_text_file(outputs.out, report_to_json(rep) + "\n");
        run.wrote(outputs.out);
      }
      if (!outputs.csv.empty()) {
        auto f = open_output(outputs.csv);
        write_simulation_csv(f, rep);
        run.wrote(outputs.csv);
      }
      json j;
      j["c_e"] = rep.c_e_ref;
      j["max_abs_deviation"] = rep.max_abs_deviation;
      j["relative_deviation"] = rep.c_e_ref != 0.0 ? rep.max_abs_deviation / rep.c_e_ref : 0.0;
      j["indifference_ok"] = rep.indifference_ok;
      j["outside_ok"] = rep.outside_ok;
      j["probes"] = rep.probe_times.size();
      j["replications"] = rep.replications;
      j["seed"] = rep.seed;
      out << j.dump(2) << '\n';
      run.finish(outputs.out);
      return kOk;
    }

    if (tail->parsed()) {
      Run run("tail", args);
      const EquilibriumSolution sol = load_solution(solution_path);
      run.set_model(sol.params);
      run.set_numerics(sol.numerics);
      const TailReport rep = estimate_tail_rate(sol);
      if (!outputs.out.empty()) {
        write_text_file(outputs.out, tail_report_to_json(rep) + "\n");
        run.wrote(outputs.out);
      }
      if (!outputs.csv.empty()) {
        auto f = open_output(outputs.csv);
        write_hazard_csv(f, rep.hazard_samples, outputs.max_grid_points);
        run.wrote(outputs.csv);
      }
      out << tail_report_to_json(rep) << '\n';
      run.finish(outputs.out);
      return kOk;
    }

    if (poa->parsed()) {
      Run run("poa", args);
      const NumericsConfig n = build_numerics(numerics);
      run.set_numerics(n);
      const bool three = benchmark == "three-customer";
      if (table) {
        if (!three) throw InvalidParams("--table uses the three-customer benchmark");
        const double T = poa_model.closing_time.value_or(1.0);
        const PoATable t = poa_table(mus, gammas, poa_model.alpha, T, n);
        if (!outputs.out.empty()) {
          auto f = open_output(outputs.out);
          write_poa_csv(f, t);
          run.wrote(outputs.out);
        }
        write_poa_csv(out, t);
        run.finish(outputs.out);
        return kOk;
      }
      if (three && !poa_model.closing_time) poa_model.closing_time = 1.0;
      const ModelParams p = build_params(poa_model);
      run.set_model(p);
      const EquilibriumSolution sol = solve_equilibrium(p, n);
      const PoARecord rec = price_of_anarchy(
          sol.c_e, p,
          three ? SocialBenchmark::kThreeCustomerSchedule : SocialBenchmark::kDynamicRelease);
      json j;
      j["benchmark"] = to_string(rec.benchmark);
      j["c_e"] = rec.c_e;
      j["c_opt"] = rec.c_opt;
      j["poa"] = rec.poa;
      if (three) j["t_star"] = three_customer_schedule(p).t_star;
      if (!outputs.out.empty()) {
        write_text_file(outputs.out, j.dump(2) + "\n");
        run.wrote(outputs.out);
      }
      out << j.dump(2) << '\n';
      run.finish(outputs.out);
      return kOk;
    }

    if (simulate->parsed()) {
      Run run("simulate-cost", args);
      const EquilibriumSolution sol = load_solution(solution_path);
      run.set_model(sol.params);
      run.set_numerics(sol.numerics);
      const std::uint64_t seed = numerics.seed.value_or(sol.numerics.rng_seed);
      const ArrivalDistribution& d = sol.distribution;
      std::optional<StateTrace> trace;
      if (!d.grid.empty() && !sol.params.is_poisson()) {
        const double last = *std::max_element(probes.begin(), probes.end());
        trace = trace_queue(sol.params, d, sol.numerics.delta, std::max(last, d.t_end));
      }
      json rows = json::array();
      std::uint64_t stream = 0;
      for (double t : probes) {
        const CostEstimate c = estimate_cost(t, d, sol.params, reps, seed, stream++);
        json row = {{"t", t}, {"mean", c.mean}, {"half_width", c.half_width}};
        if (trace && (t < 0.0 || t <= trace->end())) {
          row["analytic"] = cost_of_arrival(t, d, sol.params, *trace);
        }
        rows.push_back(std::move(row));
      }
      json j = {{"c_e", sol.c_e}, {"replications", reps}, {"seed", seed}, {"probes", rows}};
      if (!outputs.out.empty()) {
        write_text_file(outputs.out, j.dump(2) + "\n");
        run.wrote(outputs.out);
      }
      out << j.dump(2) << '\n';
      run.finish(outputs.out);
      return kOk;
    }
  } catch (const ConvergenceError& e) {
    err << "not converged: " << e.what() << '\n';
    return kNotConverged;
  } catch (const InvalidParams& e) {
    err << "invalid arguments: " << e.what() << '\n';
    return kUsage;
  } catch (const UnsupportedScenario& e) {
    err << "unsupported scenario: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNotConverged;
  }
  return kUsage;
}

}  // namespace qae::cli
