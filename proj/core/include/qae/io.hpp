#pragma once

// JSON (canonical) and CSV (plot-ready) serialization.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qae/model.hpp"
#include "qae/queue_dynamics.hpp"
#include "qae/simulator.hpp"
#include "qae/tail_analysis.hpp"

namespace qae {

/// {params, numerics, t_a, pre_density, p0, t_e, t_end, c_e, tail,
///  grid: [[t, F, f], ...], diagnostics}. Doubles use the shortest
/// representation that round-trips exactly, so output is deterministic.
std::string solution_to_json(const EquilibriumSolution& solution, int indent = 2);
/// Throws ParseError on malformed or incomplete input.
EquilibriumSolution solution_from_json(const std::string& text);

void save_solution(const std::filesystem::path& path, const EquilibriumSolution& solution);
EquilibriumSolution load_solution(const std::filesystem::path& path);

std::string params_to_json(const ModelParams& params);
std::string numerics_to_json(const NumericsConfig& numerics);

std::string report_to_json(const SimulationReport& report, int indent = 2);
std::string tail_report_to_json(const TailReport& report, int indent = 2);

/// "t,F,f"; `max_points` > 0 keeps roughly that many evenly spaced rows
/// (always including both ends).
void write_grid_csv(std::ostream& out, const ArrivalDistribution& distribution,
                    std::size_t max_points = 0);
/// "t,mean_queue,empty_prob,absorbed"
void write_trace_csv(std::ostream& out, const StateTrace& trace, std::size_t max_points = 0);
/// "t,h"
void write_hazard_csv(std::ostream& out, const std::vector<HazardSample>& hazard,
                      std::size_t max_points = 0);
/// "t,mean,ci_low,ci_high"
void write_simulation_csv(std::ostream& out, const SimulationReport& report);

/// Record of one CLI invocation and the files it produced.
struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::string params_json;    ///< empty when the command has no model
  std::string numerics_json;  ///< empty when the command has no numerics
  std::vector<std::string> outputs;
  double wall_time_seconds = 0.0;
  std::string version;
};

std::string manifest_to_json(const RunManifest& manifest, int indent = 2);

/// Writes `text` to `path`, throwing qae::Error on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace qae
