#include "wft/errors.hpp"
#include "wft/lab.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace wft::lab {

namespace {

const Json& field(const Json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::ScenarioError, std::string(where) + ": missing '" + key + "'");
  return j.at(key);
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::ScenarioError, std::string("field '") + key + "': " + e.what());
  }
}

Vec vec_of(const Json& j, const char* where) {
  if (!j.is_array() || j.empty()) fail(ErrorCode::ScenarioError, std::string(where) + ": expected a non-empty array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) fail(ErrorCode::ScenarioError, std::string(where) + ": expected numbers");
    v[static_cast<Eigen::Index>(k)] = j[k].get<double>();
  }
  return v;
}

Json json_of(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

}  // namespace

Scenario scenario_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::ScenarioError, "scenario must be a JSON object");
  Scenario s;
  const Json& model = field(j, "model", "scenario");
  s.model = field(model, "id", "model").get<std::string>();
  if (model.contains("params")) {
    for (const auto& [k, v] : model.at("params").items()) {
      if (!v.is_number()) fail(ErrorCode::ScenarioError, "model parameter '" + k + "' must be a number");
      s.params[k] = v.get<double>();
    }
  }
  if (j.contains("grid")) {
    s.nu = get_or(j.at("grid"), "nu", s.nu);
    s.extra_bits = get_or(j.at("grid"), "extra_bits", s.extra_bits);
  }
  if (s.nu < 0 || s.nu > 20 || s.extra_bits < 0 || s.extra_bits > 20)
    fail(ErrorCode::ScenarioError, "grid: nu and extra_bits must lie in [0, 20]");
  if (j.contains("domain")) {
    const Vec d = vec_of(j.at("domain"), "domain");
    if (d.size() != 2 || !(d[0] < d[1])) fail(ErrorCode::ScenarioError, "domain: expected [a, b] with a < b");
    s.domain_lo = d[0];
    s.domain_hi = d[1];
  }
  s.horizon = get_or(j, "horizon", s.horizon);
  if (!(s.horizon >= 0.0)) fail(ErrorCode::ScenarioError, "horizon must be nonnegative");
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  s.output = get_or<std::string>(j, "output", s.output);

  const Json& init = field(j, "initial", "scenario");
  if (init.contains("generator")) {
    s.initial.generated = true;
    const Json& g = init.at("generator");
    RandomDataSpec& r = s.initial.generator;
    r.jumps = get_or(g, "jumps", r.jumps);
    r.x_min = get_or(g, "x_min", r.x_min);
    r.x_max = get_or(g, "x_max", r.x_max);
    r.max_step = get_or(g, "max_step", r.max_step);
    r.families = get_or(g, "families", r.families);
    r.equal_ends = get_or(g, "equal_ends", r.equal_ends);
    if (r.jumps < 0 || !(r.x_min < r.x_max)) fail(ErrorCode::ScenarioError, "generator: bad jumps or x range");
  } else {
    s.initial.left = vec_of(field(init, "left", "initial"), "initial.left");
    s.initial.project = get_or(init, "project", true);
    if (init.contains("breakpoints")) {
      for (const Json& b : init.at("breakpoints")) {
        const double x = field(b, "x", "breakpoint").get<double>();
        s.initial.breakpoints.emplace_back(x, vec_of(field(b, "w", "breakpoint"), "breakpoint.w"));
      }
    }
  }

  if (j.contains("experiment")) {
    const Json& e = j.at("experiment");
    if (!e.is_object()) fail(ErrorCode::ScenarioError, "experiment must be an object");
    s.experiment = get_or<std::string>(e, "kind", s.experiment);
    s.experiment_params = e;
    s.experiment_params.erase("kind");
  }
  return s;
}

Json scenario_to_json(const Scenario& s) {
  Json j;
  j["model"]["id"] = s.model;
  j["model"]["params"] = Json::object();
  for (const auto& [k, v] : s.params) j["model"]["params"][k] = v;
  j["grid"] = {{"nu", s.nu}, {"extra_bits", s.extra_bits}};
  j["domain"] = {s.domain_lo, s.domain_hi};
  j["horizon"] = s.horizon;
  j["seed"] = s.seed;
  j["output"] = s.output;
  if (s.initial.generated) {
    const RandomDataSpec& r = s.initial.generator;
    j["initial"]["generator"] = {{"jumps", r.jumps},       {"x_min", r.x_min},       {"x_max", r.x_max},
                                 {"max_step", r.max_step}, {"families", r.families}, {"equal_ends", r.equal_ends}};
  } else {
    j["initial"]["left"] = json_of(s.initial.left);
    j["initial"]["project"] = s.initial.project;
    j["initial"]["breakpoints"] = Json::array();
    for (const auto& [x, w] : s.initial.breakpoints) j["initial"]["breakpoints"].push_back({{"x", x}, {"w", json_of(w)}});
  }
  j["experiment"] = s.experiment_params;
  j["experiment"]["kind"] = s.experiment;
  return j;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ScenarioError, "cannot open scenario file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::ScenarioError, path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

std::string scenario_hash(const Scenario& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : scenario_to_json(s).dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::shared_ptr<const SystemModel> build_model(const Scenario& s) {
  return std::make_shared<const SystemModel>(make_builtin_model(s.model, s.params));
}

GridSpec grid_of(const Scenario& s) { return GridSpec{s.nu, s.extra_bits}; }

InitialData build_initial_data(const Scenario& s, const SystemModel& model, const GridSpec& grid) {
  if (s.initial.generated) {
    std::mt19937_64 rng(s.seed);
    return random_initial_data(model, grid, s.initial.generator, rng);
  }
  if (s.initial.left.size() != model.n()) fail(ErrorCode::ScenarioError, "initial.left has the wrong dimension");
  for (const auto& [x, w] : s.initial.breakpoints)
    if (w.size() != model.n()) fail(ErrorCode::ScenarioError, "breakpoint state has the wrong dimension");
  return s.initial.project ? project_initial_data(model, grid, s.initial.left, s.initial.breakpoints)
                           : make_initial_data(model, grid, s.initial.left, s.initial.breakpoints);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace wft::lab
