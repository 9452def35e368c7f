#include <doctest.h>

#include "support/helpers.hpp"
#include "wft/errors.hpp"
#include "wft/lab.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wft;
using namespace wft::lab;
using testing::v2;

namespace {

Scenario explicit_scenario(const std::string& model, Vec left, std::vector<std::pair<double, Vec>> bps, double T) {
  Scenario s;
  s.model = model;
  s.nu = 2;
  s.horizon = T;
  s.initial.left = std::move(left);
  s.initial.breakpoints = std::move(bps);
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("wft_lab_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

StepFunction step(std::vector<double> x, std::vector<double> v) {
  StepFunction f;
  f.x = std::move(x);
  for (double a : v) f.v.push_back(Vec::Constant(1, a));
  return f;
}

}  // namespace

TEST_CASE("scenario files round-trip") {
  const Json j = Json::parse(R"({
    "model": {"id": "aw-rascle", "params": {"gamma": 1.5}},
    "grid": {"nu": 4, "extra_bits": 2},
    "domain": [-1.0, 2.5],
    "horizon": 0.1,
    "seed": 18446744073709551615,
    "initial": {"left": [0.5, 3.5], "breakpoints": [{"x": 0.1, "w": [0.25, 3.5]}], "project": false},
    "experiment": {"kind": "sensitivity", "thetas": [1e-4, 1e-5]},
    "output": "somewhere"
  })");
  const Scenario s = scenario_from_json(j);
  CHECK(s.seed == 18446744073709551615ull);
  CHECK(s.params.at("gamma") == 1.5);
  CHECK(s.experiment == "sensitivity");
  CHECK_FALSE(s.initial.project);
  const Json once = scenario_to_json(s);
  const Json twice = scenario_to_json(scenario_from_json(once));
  CHECK(once == twice);
  CHECK(once.dump() == twice.dump());
  CHECK(scenario_hash(s) == scenario_hash(scenario_from_json(once)));
  Scenario other = s;
  other.seed = 1;
  CHECK(scenario_hash(other) != scenario_hash(s));

  Scenario g;
  g.initial.generated = true;
  g.initial.generator.jumps = 9;
  g.initial.generator.families = {1};
  CHECK(scenario_to_json(scenario_from_json(scenario_to_json(g))) == scenario_to_json(g));
}

TEST_CASE("malformed scenarios are rejected") {
  auto code_of = [](const char* text) {
    try {
      scenario_from_json(Json::parse(text));
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of(R"({"initial": {"left": [0, 0]}})") == ErrorCode::ScenarioError);
  CHECK(code_of(R"({"model": {"id": "decoupled"}})") == ErrorCode::ScenarioError);
  CHECK(code_of(R"({"model": {"id": "decoupled"}, "initial": {"left": []}})") == ErrorCode::ScenarioError);
  CHECK(code_of(R"({"model": {"id": "decoupled"}, "initial": {"left": [0, 0]}, "domain": [1, 0]})") ==
        ErrorCode::ScenarioError);
  CHECK(code_of(R"({"model": {"id": "decoupled"}, "initial": {"left": [0, 0]}, "grid": {"nu": "x"}})") ==
        ErrorCode::ScenarioError);
}

TEST_CASE("exact L1 distance of step functions") {
  const StepFunction a = step({0.0, 1.0}, {0.0, 2.0, 0.0});
  const StepFunction b = step({0.5}, {0.0, 1.0});
  const double inf = std::numeric_limits<double>::infinity();
  // |a - b|: 0 on (-inf,0), 2 on (0,0.5), 1 on (0.5,1), 1 on (1,inf)
  CHECK(l1_between(a, b, -1.0, 3.0) == doctest::Approx(1.0 + 0.5 + 2.0));
  CHECK(l1_between(a, b, 0.25, 0.75) == doctest::Approx(0.5 + 0.25));
  CHECK(std::isinf(l1_between(a, b, -inf, inf)));
  CHECK(l1_between(a, a, -inf, inf) == 0.0);
  const StepFunction c = step({0.0, 1.0}, {0.0, 1.0, 0.0});
  const StepFunction d = step({0.25, 1.25}, {0.0, 1.0, 0.0});
  CHECK(l1_between(c, d, -inf, inf) == doctest::Approx(0.5));
}

TEST_CASE("closed-form Burgers reference") {
  SUBCASE("a shock on the grid is reproduced exactly") {
    Scenario s = explicit_scenario("decoupled", v2(1.0, 0.25), {{0.0, v2(0.5, 0.75)}}, 2.0);
    const RunResult r = execute_run(s);
    CHECK(l1_to_decoupled_riemann(r.traj, 2.0, -5.0, 15.0, v2(1.0, 0.25), v2(0.5, 0.75), 0.0) <= 1e-12);
  }
  SUBCASE("a rarefaction against midpoint quadrature") {
    Scenario s = explicit_scenario("decoupled", v2(0.0, 0.5), {{0.0, v2(1.0, 0.5)}}, 1.0);
    const RunResult r = execute_run(s);
    const StepFunction u = conserved_profile(r.traj, 1.0);
    const int n = 200000;
    double q = 0.0;
    for (int k = 0; k < n; ++k) {
      const double x = -1.0 + 3.0 * (k + 0.5) / n;
      const double exact = std::clamp(x, 0.0, 1.0);
      const auto idx = static_cast<std::size_t>(std::upper_bound(u.x.begin(), u.x.end(), x) - u.x.begin());
      q += std::abs(u.v[idx][0] - exact) * 3.0 / n;
    }
    CHECK(l1_to_decoupled_riemann(r.traj, 1.0, -1.0, 2.0, v2(0.0, 0.5), v2(1.0, 0.5), 0.0) ==
          doctest::Approx(q).epsilon(1e-6));
    // four shards of width 1/4: each step misses a triangle pair of area 2 * (1/8)^2 / 2
    CHECK(q == doctest::Approx(4 * (1.0 / 64.0)).epsilon(1e-6));
  }
}

TEST_CASE("plain runs") {
  SUBCASE("zero jumps: empty log and trivial metrics") {
    Scenario s = explicit_scenario("aw-rascle", v2(0.5, 3.5), {}, 1.0);
    const RunResult r = execute_run(s);
    CHECK(r.traj.events().empty());
    CHECK(r.violations == 0);
    CHECK(r.metrics["series"]["tv"] == Json::array({0.0}));
    CHECK(r.metrics["series"]["count"] == Json::array({0}));
    std::ostringstream log;
    write_event_log(r.traj, log);
    CHECK(log.str().find('\n') == log.str().size() - 1);  // header only
  }
  SUBCASE("single shock: one front, constant variation") {
    Scenario s = explicit_scenario("decoupled", v2(1.0, 0.5), {{0.0, v2(0.0, 0.5)}}, 3.0);
    const RunResult r = execute_run(s);
    CHECK(r.traj.fronts().size() == 1);
    CHECK(r.metrics["series"]["tv"] == Json::array({1.0}));
    std::ostringstream rows;
    write_trajectory(r.traj, rows);
    CHECK(rows.str() == "id,family,kind,x0,t0,t_end,birth_event,death_event,speed,left_state,right_state,strength_units\n"
                        "0,1,shock,0,0,3,-1,-1,0.5,4;2,0;2,-4\n");
  }
}

TEST_CASE("artifacts are byte-identical across runs") {
  Scenario s;
  s.model = "aw-rascle";
  s.nu = 3;
  s.horizon = 2.0;
  s.seed = 42;
  s.initial.generated = true;
  s.initial.generator = testing::random_spec(15, 0.0, 5.0);
  for (const char* kind : {"run", "sensitivity"}) {
    const auto a = scratch_dir(std::string(kind) + "_a"), b = scratch_dir(std::string(kind) + "_b");
    run_scenario(s, kind, a);
    run_scenario(s, kind, b);
    int files = 0;
    for (const auto& e : std::filesystem::directory_iterator(a)) {
      CAPTURE(e.path());
      CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
      ++files;
    }
    CHECK(files >= 2);
    const Json m = Json::parse(slurp(a / "metrics.json"));
    CHECK(m["scenario_hash"] == scenario_hash(s));
    CHECK(m["violations"] == 0);
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
  }
}

TEST_CASE("metrics are recomputable from the event log") {
  Scenario s;
  s.model = "ld-ld";
  s.nu = 3;
  s.horizon = 3.0;
  s.seed = 9;
  s.initial.generated = true;
  s.initial.generator = testing::random_spec(12, 0.0, 4.0);
  const RunResult r = execute_run(s);
  std::ostringstream log;
  write_event_log(r.traj, log);
  std::istringstream in(log.str());
  std::string line;
  std::getline(in, line);
  const double unit = grid_of(s).unit();
  double tv = r.metrics["series"]["tv"][0].get<double>();
  std::size_t k = 1;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    tv += std::stod(cells.at(7)) * unit;
    CHECK(tv == r.metrics["series"]["tv"][k].get<double>());
    ++k;
  }
  CHECK(k == r.metrics["series"]["tv"].size());
}

TEST_CASE("refinement study") {
  SUBCASE("data on the coarsest grid without interactions: distances vanish") {
    Scenario s = explicit_scenario("decoupled", v2(1.0, 0.25), {{0.0, v2(0.5, 0.75)}}, 1.0);
    s.domain_lo = -2.0;
    s.domain_hi = 8.0;
    const Json r = experiment_converge(s);
    for (double d : r["distances"].get<std::vector<double>>()) CHECK(d == 0.0);
    CHECK(r["reference_error"].get<double>() <= 1e-12);
    CHECK(r["passed"] == true);
  }
  SUBCASE("Burgers rarefaction: errors shrink like the mesh") {
    Scenario s = explicit_scenario("decoupled", v2(0.1, 0.3), {{0.0, v2(0.9, 0.7)}}, 1.0);
    s.domain_lo = -1.0;
    s.domain_hi = 3.0;
    const Json r = experiment_converge(s);
    CHECK(r["checks"]["distances_decrease"] == true);
    CHECK(r["reference_error"].get<double>() <= r["reference_bound"].get<double>());
  }
}

TEST_CASE("stability ratios") {
  SUBCASE("identical data") {
    Scenario s = explicit_scenario("decoupled", v2(1.0, 0.5), {{0.0, v2(0.0, 0.5)}, {1.0, v2(1.0, 0.5)}}, 1.0);
    s.experiment_params = {{"delta", 0.0}};
    const Json r = experiment_stability(s);
    CHECK(r["identical"] == true);
    CHECK(r["passed"] == true);
  }
  SUBCASE("translated Burgers shock: ratio one, transport maps unchanged") {
    Scenario s = explicit_scenario("decoupled", v2(1.0, 0.5), {{0.0, v2(0.0, 0.5)}}, 1.0);
    s.experiment_params = {{"delta", 0.01}, {"tv_factors", {1}}, {"perturbation", "translate"}};
    const Json r = experiment_stability(s);
    const Json& row = r["table"]["rows"][0];
    CHECK(row[2].get<double>() == doctest::Approx(0.01));
    CHECK(row[3].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(row[4].get<double>() <= 1e-10);
  }
  SUBCASE("open-ended pattern cannot be repeated") {
    Scenario s = explicit_scenario("decoupled", v2(1.0, 0.5), {{0.0, v2(0.0, 0.5)}}, 1.0);
    CHECK_THROWS_AS(experiment_stability(s), Error);
  }
}

TEST_CASE("decay report") {
  SUBCASE("no rarefaction: vacuous") {
    Scenario s = explicit_scenario("decoupled", v2(1.0, 0.5), {{0.0, v2(0.0, 0.5)}}, 2.0);
    const Json r = experiment_decay(s);
    CHECK(r["vacuous"] == true);
    CHECK(r["passed"] == true);
  }
  SUBCASE("centered Burgers fan: kappa is the speed slope") {
    Scenario s = explicit_scenario("decoupled", v2(0.0, 0.5), {{0.0, v2(1.0, 0.5)}}, 2.0);
    s.experiment_params = {{"nus", {2, 3, 4}}};
    const Json r = experiment_decay(s);
    for (const Json& row : r["table"]["rows"]) CHECK(row[2].get<double>() == doctest::Approx(1.0));
    CHECK(r["passed"] == true);
  }
}

TEST_CASE("epsilon perturbation") {
  SUBCASE("empty window: identical runs") {
    Scenario s = explicit_scenario("aw-rascle", v2(0.5, 3.5), {{1.0, v2(0.25, 3.5)}}, 2.0);
    s.experiment_params = {{"family", 2}, {"y1", 0.3}, {"y2", 0.3}};
    const Json r = experiment_epsilon_shock(s);
    CHECK(r["identical"] == true);
    CHECK(r["L_hat"].get<double>() == 0.0);
    CHECK(r["L_prime_hat"].get<double>() == 0.0);
  }
  SUBCASE("advection field: pure translation of the bump") {
    Scenario s = explicit_scenario("decoupled", v2(0.0, 0.5), {{0.0, v2(1.0, 0.5)}, {2.0, v2(0.0, 0.5)}}, 1.0);
    s.experiment_params = {{"y1", -0.5}, {"y2", 0.75}, {"eps_exponents", {1, 3}}};
    const Json r = experiment_epsilon_shock(s);
    for (const Json& row : r["table"]["rows"]) {
      CHECK(row[1].get<double>() == doctest::Approx(1.25).epsilon(1e-12));
      CHECK(row[2].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(row[3].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
    }
    CHECK(r["passed"] == true);
  }
  SUBCASE("a genuinely nonlinear family is rejected") {
    Scenario s = explicit_scenario("decoupled", v2(0.0, 0.5), {}, 1.0);
    s.experiment_params = {{"family", 1}, {"y1", 0.0}, {"y2", 1.0}};
    CHECK_THROWS_AS(experiment_epsilon_shock(s), Error);
  }
}

TEST_CASE("sensitivity report") {
  Scenario s = explicit_scenario("ld-ld", v2(2.5, 0.5), {{0.0, v2(2.75, 0.5)}}, 1.0);
  SUBCASE("zero assignment: zero defect") {
    s.experiment_params = {{"rates", {0.0}}};
    const Json r = experiment_sensitivity(s);
    CHECK(r["max_l1_defect"].get<double>() == 0.0);
  }
  SUBCASE("single front before any interaction") {
    s.experiment_params = {{"rates", {0.5}}, {"thetas", {1e-3, 1e-4}}};
    const Json r = experiment_sensitivity(s);
    const Vec jump = make_builtin_model("ld-ld").to_conserved(v2(2.75, 0.5)) -
                     make_builtin_model("ld-ld").to_conserved(v2(2.5, 0.5));
    CHECK(r["table"]["rows"][0][2].get<double>() == doctest::Approx(0.5 * 0.25 * 1e-3 * jump.cwiseAbs().sum()));
    CHECK(r["table"]["rows"][1][3].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r["passed"] == true);
  }
}

TEST_CASE("characteristics report on the decoupled model") {
  Scenario s = explicit_scenario("decoupled", v2(0.0, 0.25), {{0.0, v2(1.0, 0.75)}, {2.0, v2(0.0, 0.25)}}, 1.0);
  s.domain_lo = -1.0;
  s.domain_hi = 3.0;
  s.experiment_params = {{"family", 2}, {"samples", 33}};
  const Json r = experiment_characteristics(s);
  CHECK(r["C_hat"].get<double>() == doctest::Approx(1.0));
  CHECK(r["broad_solution_mismatches"] == 0);
  CHECK(r["passed"] == true);
}

TEST_CASE("validate accepts the built-in models") {
  for (const auto& name : builtin_model_names()) {
    Scenario s;
    s.model = name;
    const auto m = build_model(s);
    s.initial.left = to_w(project_to_grid(*m, grid_of(s), Vec::Zero(2)), grid_of(s));
    CHECK(experiment_validate(s)["passed"] == true);
  }
}
