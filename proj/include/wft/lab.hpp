#pragma once

#include "wft/characteristics.hpp"
#include "wft/random.hpp"
#include "wft/sensitivity.hpp"
#include "wft/tracker.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace wft::lab {

using Json = nlohmann::json;

/// Initial profile in Riemann coordinates, given explicitly or by a seeded generator.
struct InitialSpec {
  bool generated = false;
  Vec left;
  std::vector<std::pair<double, Vec>> breakpoints;
  bool project = true;  // snap explicit states onto E^nu instead of requiring exact grid values
  RandomDataSpec generator;
};

struct Scenario {
  std::string model = "decoupled";
  ModelParams params;
  int nu = 3;
  int extra_bits = 0;
  double domain_lo = 0.0;  // spatial window [a, b] for distances and decay
  double domain_hi = 1.0;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  InitialSpec initial;
  std::string experiment = "run";
  Json experiment_params = Json::object();
  std::string output = "out";
};

/// ScenarioError on missing or malformed fields.
Scenario scenario_from_json(const Json& j);
Json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);
/// FNV-1a of the canonical JSON dump, 16 hex digits.
std::string scenario_hash(const Scenario& s);

std::shared_ptr<const SystemModel> build_model(const Scenario& s);
GridSpec grid_of(const Scenario& s);
InitialData build_initial_data(const Scenario& s, const SystemModel& model, const GridSpec& grid);

/// Piecewise constant function: v[k] holds left of x[k], v.back() right of all breakpoints.
struct StepFunction {
  std::vector<double> x;
  std::vector<Vec> v;
};

StepFunction conserved_profile(const Trajectory& traj, double t);
StepFunction riemann_profile(const Trajectory& traj, double t, int k);
StepFunction conserved_initial(const SystemModel& model, const GridSpec& grid, const InitialData& data);
/// Exact L1 distance summed over components on [lo, hi]; infinite bounds are allowed.
double l1_between(const StepFunction& a, const StepFunction& b, double lo, double hi);

/// Exact L1 distance on [lo, hi] between the decoupled model's tracked solution at t and the closed-form
/// solution of its Riemann problem at x0 (Burgers wave in the first component, advection in the second).
double l1_to_decoupled_riemann(const Trajectory& traj, double t, double lo, double hi, const Vec& wl, const Vec& wr,
                               double x0);

struct RunResult {
  Trajectory traj;
  Monitors initial;
  Monitors final;
  int violations = 0;
  Json metrics;
};

/// Tracker run of the scenario with in-run invariant checks and metrics; no I/O.
RunResult execute_run(const Scenario& s);

void write_event_log(const Trajectory& traj, std::ostream& out);
void write_trajectory(const Trajectory& traj, std::ostream& out);
void write_path(const CharacteristicPath& path, int index, std::ostream& out, bool header);
void write_integral_shift(const IntegralShift& v, std::ostream& out);
void write_fd_shift(const FdIntegralShift& f, std::ostream& out);

/// Experiment reports embed "scenario_hash", "violations", "checks" and "passed".
Json experiment_validate(const Scenario& s);
Json experiment_converge(const Scenario& s);
Json experiment_stability(const Scenario& s);
Json experiment_decay(const Scenario& s);
Json experiment_epsilon_shock(const Scenario& s);
Json experiment_sensitivity(const Scenario& s, const std::filesystem::path& out = {});
Json experiment_characteristics(const Scenario& s, const std::filesystem::path& out = {});

/// Runs the scenario's experiment (or a plain run) and writes its artifacts into `out`.
Json run_scenario(const Scenario& s, const std::string& kind, const std::filesystem::path& out);

/// Fixed-format number for CSV cells.
std::string fmt(double v);

}  // namespace wft::lab
