#include "wft/errors.hpp"
#include "wft/lab.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct Options {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> nu;
  std::optional<double> horizon;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--scenario", o.scenario, "scenario file (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory (default: the scenario's output)");
  cmd->add_option("--seed", o.seed, "override the generator seed");
  cmd->add_option("--nu", o.nu, "override the refinement level")->check(CLI::Range(0, 20));
  cmd->add_option("--horizon", o.horizon, "override the final time")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wave-front tracking lab for Temple-class systems"};
  app.require_subcommand(1);
  Options o;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"validate", "check the model and the initial data"},
      {"run", "track fronts to the horizon and write the event log, trajectory and metrics"},
      {"converge", "refinement study over nu"},
      {"stability", "L1 stability ratios under a TV sweep"},
      {"decay", "decay of positive waves"},
      {"epsilon-shock", "response to an epsilon perturbation of a linearly degenerate coordinate"},
      {"sensitivity", "integral shift against finite-difference reruns"},
      {"characteristics", "trace characteristics and check the transport map"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), o);
  CLI11_PARSE(app, argc, argv);
  const std::string kind = app.get_subcommands().front()->get_name();

  try {
    wft::lab::Scenario s = wft::lab::load_scenario(o.scenario);
    if (o.seed) s.seed = *o.seed;
    if (o.nu) s.nu = *o.nu;
    if (o.horizon) s.horizon = *o.horizon;
    const std::string out = o.out.empty() ? s.output : o.out;
    const wft::lab::Json report = wft::lab::run_scenario(s, kind, out);
    std::cout << kind << ' ' << wft::lab::scenario_hash(s) << ' ' << (report.value("passed", false) ? "ok" : "FAILED")
              << " violations=" << report.value("violations", 0) << " -> " << out << '\n';
    return report.value("passed", false) ? 0 : 1;
  } catch (const wft::Error& e) {
    std::cerr << "error [" << wft::to_string(e.code()) << "] in scenario " << o.scenario << ": " << e.what() << '\n';
    return 2;
  }
}
