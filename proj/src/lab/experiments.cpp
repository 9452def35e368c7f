#include "wft/errors.hpp"
#include "wft/lab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <random>

namespace wft::lab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent simulations run concurrently; results are collected in index order.
template <class F>
auto parallel_map(std::size_t count, F f) {
  using R = decltype(f(std::size_t{0}));
  std::vector<std::future<R>> jobs;
  for (std::size_t k = 0; k < count; ++k) jobs.push_back(std::async(std::launch::async, f, k));
  std::vector<R> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

template <class T>
T param(const Scenario& s, const char* key, T fallback) {
  if (!s.experiment_params.contains(key)) return fallback;
  try {
    return s.experiment_params.at(key).get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::ScenarioError, std::string("experiment parameter '") + key + "': " + e.what());
  }
}

double required(const Scenario& s, const char* key) {
  if (!s.experiment_params.contains(key))
    fail(ErrorCode::ScenarioError, std::string("experiment parameter '") + key + "' is required");
  return param(s, key, 0.0);
}

Json begin_report(const Scenario& s, const std::string& kind) {
  return {{"experiment", kind}, {"scenario_hash", scenario_hash(s)}, {"model", s.model}, {"nu", s.nu}};
}

Json& finish(Json& report, int violations, const Json& checks) {
  report["violations"] = violations;
  report["checks"] = checks;
  bool ok = violations == 0;
  for (const auto& [name, value] : checks.items()) ok = ok && value.get<bool>();
  report["passed"] = ok;
  return report;
}

int event_violations(const Trajectory& traj) {
  int v = 0;
  for (const auto& ev : traj.events())
    if (ev.alternative == Alternative::None || ev.conservation_defect > 1e-10 || ev.d_q > 0) ++v;
  return v;
}

int default_family(const SystemModel& m, bool gnl) {
  for (int i = 0; i < m.n(); ++i)
    if (m.is_gnl(i) == gnl) return i;
  fail(ErrorCode::ScenarioError, std::string("model has no ") + (gnl ? "genuinely nonlinear" : "linearly degenerate") +
                                     " family");
}

int family_param(const Scenario& s, const SystemModel& m, bool gnl) {
  const int i = param(s, "family", default_family(m, gnl) + 1) - 1;
  if (i < 0 || i >= m.n()) fail(ErrorCode::ScenarioError, "family out of range");
  if (m.is_gnl(i) != gnl)
    fail(ErrorCode::ScenarioError, std::string("family must be ") + (gnl ? "genuinely nonlinear" : "linearly degenerate"));
  return i;
}

// Real-valued profile of the scenario: explicit data as given, generated data drawn on the scenario grid.
std::pair<Vec, std::vector<std::pair<double, Vec>>> real_profile(const Scenario& s, const SystemModel& m) {
  if (!s.initial.generated) return {s.initial.left, s.initial.breakpoints};
  const GridSpec g = grid_of(s);
  const InitialData d = build_initial_data(s, m, g);
  std::vector<std::pair<double, Vec>> bps;
  for (const Breakpoint& b : d.breakpoints) bps.emplace_back(b.x, to_w(b.w, g));
  return {to_w(d.left, g), bps};
}

std::vector<double> uniform_samples(double lo, double hi, int count) {
  std::vector<double> ys;
  for (int k = 0; k < count; ++k) ys.push_back(count == 1 ? lo : lo + (hi - lo) * k / (count - 1));
  return ys;
}

Json table(std::vector<std::string> columns) { return {{"columns", columns}, {"rows", Json::array()}}; }

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json experiment_validate(const Scenario& s) {
  Json report = begin_report(s, "validate");
  const auto model = build_model(s);
  const ValidationReport v = inspect_model(*model, param(s, "samples", 256));
  Json checks = Json::object();
  for (const CheckResult& c : v.checks) {
    checks[c.name] = c.passed;
    report["measured"][c.name] = c.measured;
    report["tolerance"][c.name] = c.tolerance;
  }
  report["gap_d"] = v.gap_d;
  report["gnl_c"] = v.gnl_c ? Json(*v.gnl_c) : Json(nullptr);
  const InitialData d = build_initial_data(s, *model, grid_of(s));
  report["initial_breakpoints"] = d.breakpoints.size();
  return finish(report, 0, checks);
}

Json experiment_converge(const Scenario& s) {
  Json report = begin_report(s, "converge");
  const auto model = build_model(s);
  const auto nus = param(s, "nus", std::vector<int>{2, 3, 4, 5});
  if (nus.size() < 2) fail(ErrorCode::ScenarioError, "converge needs at least two refinement levels");
  const auto [left, bps] = real_profile(s, *model);
  const double lo = s.domain_lo, hi = s.domain_hi, T = s.horizon;
  const bool reference = model->name() == "decoupled" && bps.size() == 1;

  struct Level {
    StepFunction u;
    double ref_error = 0.0;
    int violations = 0;
    std::size_t events = 0;
  };
  const auto levels = parallel_map(nus.size(), [&](std::size_t k) {
    const GridSpec g{nus[k], s.extra_bits};
    const Trajectory traj = run_tracker(model, g, project_initial_data(*model, g, left, bps), T);
    Level l{conserved_profile(traj, T), 0.0, event_violations(traj), traj.events().size()};
    if (reference) l.ref_error = l1_to_decoupled_riemann(traj, T, lo, hi, left, bps[0].second, bps[0].first);
    return l;
  });

  Json t = table({"nu", "events", "distance_to_next", "reference_error"});
  int violations = 0;
  std::vector<double> dist;
  for (std::size_t k = 0; k < nus.size(); ++k) {
    violations += levels[k].violations;
    const double d = k + 1 < nus.size() ? l1_between(levels[k].u, levels[k + 1].u, lo, hi) : kInf;
    if (k + 1 < nus.size()) dist.push_back(d);
    t["rows"].push_back({nus[k], levels[k].events, number_or_null(d),
                         reference ? Json(levels[k].ref_error) : Json(nullptr)});
  }
  bool monotone = true;
  for (std::size_t k = 0; k + 1 < dist.size(); ++k) monotone = monotone && dist[k + 1] <= dist[k] + 1e-14;
  Json checks = {{"distances_decrease", monotone}};
  report["distances"] = dist;
  if (reference) {
    const double bound = 4.0 * std::ldexp(1.0, -nus.back()) * (hi - lo);
    report["reference_error"] = levels.back().ref_error;
    report["reference_bound"] = bound;
    checks["reference_within_bound"] = levels.back().ref_error <= bound;
  }
  report["table"] = t;
  return finish(report, violations, checks);
}

Json experiment_stability(const Scenario& s) {
  Json report = begin_report(s, "stability");
  const auto model = build_model(s);
  const GridSpec g = grid_of(s);
  const double delta = param(s, "delta", 1e-3);
  const auto factors = param(s, "tv_factors", std::vector<int>{1, 2, 4});
  const auto times = param(s, "times", std::vector<double>{s.horizon});
  const int samples = param(s, "ld_samples", 201);
  const double gap = param(s, "copy_gap", 1.0);
  const InitialData base = build_initial_data(s, *model, g);
  if (base.breakpoints.empty()) fail(ErrorCode::ScenarioError, "stability needs at least one jump");
  if (base.right() != base.left && factors != std::vector<int>{1})
    fail(ErrorCode::ScenarioError, "TV scaling repeats the jump pattern, which must return to its left state");
  const double span = base.breakpoints.back().x - base.breakpoints.front().x;
  const double t_max = *std::max_element(times.begin(), times.end());

  struct Sweep {
    double tv0 = 0.0, k_gnl = 0.0, k_ld = 0.0, denominator = 0.0;
    int violations = 0;
  };
  const std::string perturbation = param<std::string>(s, "perturbation", "random");
  if (perturbation != "random" && perturbation != "translate")
    fail(ErrorCode::ScenarioError, "perturbation must be 'random' or 'translate'");
  // per-breakpoint offsets in [-delta, delta], drawn once for the largest sweep
  std::vector<double> offsets;
  std::mt19937_64 rng(s.seed ^ 0x57ab1e5eedull);
  const int max_factor = *std::max_element(factors.begin(), factors.end());
  for (std::size_t k = 0; k < base.breakpoints.size() * static_cast<std::size_t>(max_factor); ++k)
    offsets.push_back(perturbation == "translate" ? delta : delta * uniform(rng, -1.0, 1.0));

  const auto sweeps = parallel_map(factors.size(), [&](std::size_t f) {
    InitialData d1{base.left, {}}, d2{base.left, {}};
    std::size_t k = 0;
    for (int c = 0; c < factors[f]; ++c)
      for (const Breakpoint& b : base.breakpoints) {
        d1.breakpoints.push_back({b.x + c * (span + gap), b.w});
        d2.breakpoints.push_back({b.x + c * (span + gap) + offsets[k++], b.w});
      }
    const Trajectory t1 = run_tracker(model, g, d1, t_max), t2 = run_tracker(model, g, d2, t_max);
    Sweep r;
    r.violations = event_violations(t1) + event_violations(t2);
    for (const Front& fr : t1.fronts())
      if (fr.birth_event < 0) r.tv0 += std::abs(fr.wave.strength(g));
    r.denominator = l1_between(conserved_initial(*model, g, d1), conserved_initial(*model, g, d2), -kInf, kInf);
    if (r.denominator == 0.0) return r;
    const double y_lo = d1.breakpoints.front().x - 1.0, y_hi = d1.breakpoints.back().x + 1.0;
    const std::vector<double> ys = uniform_samples(y_lo, y_hi, samples);
    for (double t : times)
      for (int k = 0; k < model->n(); ++k) {
        if (model->is_gnl(k)) {
          const double num = l1_between(riemann_profile(t1, t, k), riemann_profile(t2, t, k), -kInf, kInf);
          r.k_gnl = std::max(r.k_gnl, num / r.denominator);
        } else {
          const TransportMap h1 = h_map(t1, k, t, ys), h2 = h_map(t2, k, t, ys);
          double sup = 0.0;
          for (std::size_t a = 0; a < ys.size(); ++a) sup = std::max(sup, std::abs(h1.h[a] - h2.h[a]));
          r.k_ld = std::max(r.k_ld, sup / r.denominator);
        }
      }
    return r;
  });

  Json t = table({"tv_factor", "tv0", "l1_data", "k_gnl", "k_ld", "k_prime"});
  int violations = 0;
  double k_min = kInf, k_max = 0.0;
  const bool identical = sweeps.front().denominator == 0.0;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const Sweep& r = sweeps[f];
    violations += r.violations;
    const double kp = std::max(r.k_gnl, r.k_ld);
    k_min = std::min(k_min, kp);
    k_max = std::max(k_max, kp);
    if (identical)
      t["rows"].push_back({factors[f], r.tv0, 0.0, nullptr, nullptr, nullptr});
    else
      t["rows"].push_back({factors[f], r.tv0, r.denominator, r.k_gnl, r.k_ld, kp});
  }
  report["identical"] = identical;
  report["table"] = t;
  Json checks = Json::object();
  if (!identical) {
    report["k_prime_min"] = k_min;
    report["k_prime_max"] = k_max;
    // growth relative to the unscaled data; a ratio that shrinks with TV is within the estimate
    const double k_first = std::max(sweeps.front().k_gnl, sweeps.front().k_ld);
    report["k_prime_growth"] = k_first > 0.0 ? k_max / k_first : 0.0;
    checks["k_prime_bounded"] = k_max < 2.0 * k_first || k_max == 0.0;
  }
  return finish(report, violations, checks);
}

Json experiment_decay(const Scenario& s) {
  Json report = begin_report(s, "decay");
  const auto model = build_model(s);
  const int k = family_param(s, *model, true);
  const auto nus = param(s, "nus", std::vector<int>{s.nu});
  const auto taus = param(s, "taus", std::vector<double>{0.25 * s.horizon, 0.5 * s.horizon, s.horizon});
  const double t_max = *std::max_element(taus.begin(), taus.end());
  if (!(t_max > 0.0)) fail(ErrorCode::ScenarioError, "decay needs positive times");

  struct Row {
    double tau = 0.0;
    bool vacuous = true;
    DecayMeasure m;
    double bound = 0.0;
  };
  struct Level {
    std::vector<Row> rows;
    int violations = 0;
  };
  const auto levels = parallel_map(nus.size(), [&](std::size_t a) {
    Scenario si = s;
    si.nu = nus[a];
    const GridSpec g = grid_of(si);
    const InitialData d = build_initial_data(si, *model, g);
    const Trajectory traj = run_tracker(model, g, d, t_max);
    Level l;
    l.violations = event_violations(traj);
    for (double tau : taus) {
      Row r;
      r.tau = tau;
      try {
        r.m = decay_measure(traj, k, tau);
        r.vacuous = false;
        r.bound = decay_tv_bound(r.m.window_hi - r.m.window_lo, 0.5 * r.m.kappa_hat, tau, r.m.sup_w,
                                 static_cast<int>(d.breakpoints.size()), nus[a]);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoAdjacentShards) throw;
      }
      l.rows.push_back(r);
    }
    return l;
  });

  Json t = table({"nu", "tau", "kappa_hat", "adjacent_pairs", "tv", "bound"});
  int violations = 0;
  bool positive = true, within = true, nonincreasing = true, stable = true, any = false;
  for (std::size_t a = 0; a < nus.size(); ++a) {
    violations += levels[a].violations;
    double prev_tv = kInf;
    for (const Row& r : levels[a].rows) {
      if (r.vacuous) {
        t["rows"].push_back({nus[a], r.tau, nullptr, 0, nullptr, nullptr});
        continue;
      }
      any = true;
      positive = positive && r.m.kappa_hat > 0.0;
      within = within && r.m.tv <= r.bound;
      nonincreasing = nonincreasing && r.m.tv <= prev_tv + 1e-12;
      prev_tv = r.m.tv;
      t["rows"].push_back({nus[a], r.tau, r.m.kappa_hat, r.m.adjacent_pairs, r.m.tv, r.bound});
    }
  }
  for (std::size_t b = 0; b < taus.size(); ++b) {
    double lo = kInf, hi = 0.0;
    for (const Level& l : levels)
      if (!l.rows[b].vacuous) {
        lo = std::min(lo, l.rows[b].m.kappa_hat);
        hi = std::max(hi, l.rows[b].m.kappa_hat);
      }
    if (hi > 0.0) stable = stable && hi <= 2.0 * lo;
  }
  report["vacuous"] = !any;
  report["table"] = t;
  Json checks = Json::object();
  if (any)
    checks = {{"kappa_positive", positive},
              {"kappa_stable_across_nu", stable},
              {"tv_within_bound", within},
              {"tv_nonincreasing", nonincreasing}};
  return finish(report, violations, checks);
}

Json experiment_epsilon_shock(const Scenario& s) {
  Json report = begin_report(s, "epsilon-shock");
  const auto model = build_model(s);
  const int i = family_param(s, *model, false);
  const double y1 = required(s, "y1"), y2 = required(s, "y2");
  if (y2 < y1) fail(ErrorCode::ScenarioError, "epsilon-shock needs y1 <= y2");
  const auto exps = param(s, "eps_exponents", std::vector<int>{1, 2, 3});
  if (exps.empty() || *std::min_element(exps.begin(), exps.end()) < 0)
    fail(ErrorCode::ScenarioError, "eps_exponents must be nonnegative");
  Scenario sg = s;
  sg.extra_bits = std::max(s.extra_bits, *std::max_element(exps.begin(), exps.end()));
  const GridSpec g = grid_of(sg);
  const InitialData base = build_initial_data(sg, *model, g);
  const double T = s.horizon;

  auto state_right_of = [&](double x) {
    GridPoint w = base.left;
    for (const Breakpoint& b : base.breakpoints)
      if (b.x <= x) w = b.w;
    return w;
  };
  auto perturbed = [&](std::int64_t units) {
    std::vector<double> xs{y1, y2};
    for (const Breakpoint& b : base.breakpoints) xs.push_back(b.x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    InitialData d{base.left, {}};
    GridPoint prev = base.left;
    for (double x : xs) {
      GridPoint w = state_right_of(x);
      if (y1 <= x && x < y2) w[i] += units;
      require_admissible(*model, g, w, "perturbed data");
      if (w != prev) d.breakpoints.push_back({x, w});
      prev = w;
    }
    return d;
  };

  const Trajectory ref = run_tracker(model, g, base, T);
  const double x1 = T > 0.0 ? trace(ref, i, y1, T).x_end() : y1;
  const double x2 = T > 0.0 ? trace(ref, i, y2, T).x_end() : y2;
  struct Row {
    double eps = 0.0, l1 = 0.0, d1 = 0.0, d2 = 0.0;
    int violations = 0;
  };
  const auto rows = parallel_map(exps.size(), [&](std::size_t a) {
    Row r;
    r.eps = std::ldexp(1.0, -(s.nu + exps[a]));
    const Trajectory pt = run_tracker(model, g, perturbed(std::int64_t{1} << (g.extra_bits - exps[a])), T);
    r.violations = event_violations(pt);
    r.l1 = l1_between(conserved_profile(ref, T), conserved_profile(pt, T), -kInf, kInf) / r.eps;
    if (T > 0.0) {
      r.d1 = std::abs(trace(pt, i, y1, T).x_end() - x1) / (r.eps * T);
      r.d2 = std::abs(trace(pt, i, y2, T).x_end() - x2) / (r.eps * T);
    }
    return r;
  });

  Json t = table({"epsilon", "l1_over_eps", "shift1_over_eps_t", "shift2_over_eps_t"});
  int violations = event_violations(ref);
  double l_max = 0.0, lp_max = 0.0;
  for (const Row& r : rows) {
    violations += r.violations;
    l_max = std::max(l_max, r.l1);
    lp_max = std::max({lp_max, r.d1, r.d2});
    t["rows"].push_back({r.eps, r.l1, r.d1, r.d2});
  }
  // boundedness: no ratio exceeds four times its value at the largest epsilon
  const Row& first = rows.front();
  bool bounded = true;
  for (const Row& r : rows)
    bounded = bounded && r.l1 <= 4.0 * first.l1 + 1e-9 && std::max(r.d1, r.d2) <= 4.0 * std::max(first.d1, first.d2) + 1e-9;
  report["identical"] = y1 == y2;
  report["L_hat"] = l_max;
  report["L_prime_hat"] = lp_max;
  report["table"] = t;
  return finish(report, violations, {{"ratios_bounded", bounded}});
}

Json experiment_sensitivity(const Scenario& s, const std::filesystem::path& out) {
  Json report = begin_report(s, "sensitivity");
  const auto model = build_model(s);
  const GridSpec g = grid_of(s);
  const InitialData d = build_initial_data(s, *model, g);
  auto rates = param(s, "rates", std::vector<double>{});
  if (rates.empty()) {
    std::mt19937_64 rng(s.seed ^ 0x5ca1ab1eull);
    for (std::size_t b = 0; b < d.breakpoints.size(); ++b) rates.push_back(uniform(rng, -1.0, 1.0));
  }
  if (rates.size() != d.breakpoints.size()) fail(ErrorCode::ScenarioError, "one shift rate per breakpoint is required");
  const auto times = param(s, "times", std::vector<double>{s.horizon});
  const auto thetas = param(s, "thetas", std::vector<double>{1e-4, 1e-5, 1e-6});
  const double t_max = *std::max_element(times.begin(), times.end());
  const Trajectory traj = run_tracker(model, g, d, t_max);
  const ShiftAssignment a = breakpoint_assignment(traj, rates);

  struct Probe {
    IntegralShift v;
    std::vector<FdIntegralShift> fd;
    std::vector<double> defect;  // NaN: reordered
  };
  const auto probes = parallel_map(times.size(), [&](std::size_t k) {
    Probe p{integral_shift(traj, times[k], a), {}, {}};
    for (double theta : thetas) {
      try {
        p.fd.push_back(fd_integral_shift(traj, a, times[k], theta));
        p.defect.push_back(l1_distance(p.v, p.fd.back()));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EventReorder) throw;
        p.fd.push_back({});
        p.defect.push_back(std::nan(""));
      }
    }
    return p;
  });

  Json t = table({"t", "theta", "l1_defect", "slope"});
  double max_defect = 0.0;
  bool in_range = true;
  int reordered = 0, slopes = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Probe& p = probes[k];
    for (std::size_t b = 0; b < thetas.size(); ++b) {
      double slope = std::nan("");
      if (std::isnan(p.defect[b])) ++reordered;
      else max_defect = std::max(max_defect, p.defect[b]);
      if (b > 0 && !std::isnan(p.defect[b]) && !std::isnan(p.defect[b - 1])) {
        const double scale = 1e-12 * (1.0 + l1_norm(p.fd[b]));
        if (p.defect[b] > scale && p.defect[b - 1] > scale) {
          slope = std::log(p.defect[b - 1] / p.defect[b]) / std::log(thetas[b - 1] / thetas[b]);
          in_range = in_range && slope >= 0.8 && slope <= 1.2;
          ++slopes;
        }
      }
      t["rows"].push_back({times[k], thetas[b], number_or_null(p.defect[b]), number_or_null(slope)});
    }
    if (!out.empty()) {
      std::ofstream f(out / ("integral_shift_" + std::to_string(k) + ".csv"));
      write_integral_shift(p.v, f);
      for (std::size_t b = 0; b < thetas.size(); ++b) {
        if (std::isnan(p.defect[b])) continue;
        std::ofstream h(out / ("fd_shift_" + std::to_string(k) + "_" + std::to_string(b) + ".csv"));
        write_fd_shift(p.fd[b], h);
      }
    }
  }
  report["rates"] = rates;
  report["max_l1_defect"] = max_defect;
  report["reordered"] = reordered;
  report["slopes"] = slopes;
  report["table"] = t;
  return finish(report, event_violations(traj), {{"slopes_in_range", in_range}});
}

Json experiment_characteristics(const Scenario& s, const std::filesystem::path& out) {
  Json report = begin_report(s, "characteristics");
  const auto model = build_model(s);
  const GridSpec g = grid_of(s);
  const int i = param(s, "family", 1) - 1;
  if (i < 0 || i >= model->n()) fail(ErrorCode::ScenarioError, "family out of range");
  const double t = param(s, "time", s.horizon);
  const std::vector<double> ys = uniform_samples(s.domain_lo, s.domain_hi, param(s, "samples", 65));
  const Trajectory traj = run_tracker(model, g, build_initial_data(s, *model, g), t);

  int blocked = 0;
  std::ofstream paths;
  if (!out.empty()) paths.open(out / "paths.csv");
  for (std::size_t k = 0; k < ys.size(); ++k) {
    try {
      const CharacteristicPath p = trace(traj, i, ys[k], t);
      if (paths.is_open()) write_path(p, static_cast<int>(k), paths, k == 0);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::GNLShockEncounter) throw;
      ++blocked;
    }
  }
  report["shock_encounters"] = blocked;

  int violations = event_violations(traj);
  Json checks = Json::object();
  if (!model->is_gnl(i)) {
    const TransportMap h = h_map(traj, i, t, ys);
    report["C_hat"] = h.c_hat;
    report["min_ratio"] = h.min_ratio;
    report["max_ratio"] = h.max_ratio;
    checks["monotone"] = h.monotone;
    int mismatches = 0;
    for (const TransportSample& ts : transport_ld(traj, i, ys, t))
      if (ts.value != traj.sample(0.0, ts.y, Side::Right)[i] || ts.state_at_x[i] != ts.value) ++mismatches;
    report["broad_solution_mismatches"] = mismatches;
    violations += mismatches;
  }
  double worst = 0.0;
  int probes = 0;
  for (double y : ys) {
    try {
      worst = std::max(worst, derivative_formula_check(traj, i, t, y).residual);
      ++probes;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DiscontinuousAtProbe && e.code() != ErrorCode::GNLShockEncounter) throw;
    }
  }
  report["derivative_probes"] = probes;
  report["derivative_max_residual"] = worst;
  if (probes > 0) checks["derivative_formula"] = worst <= 1e-3;
  return finish(report, violations, checks);
}

Json run_scenario(const Scenario& s, const std::string& kind, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  auto write_json = [&](const Json& j) {
    std::ofstream f(out / "metrics.json");
    f << j.dump(2) << '\n';
  };
  if (kind == "run") {
    const RunResult r = execute_run(s);
    std::ofstream events(out / "events.csv"), fronts(out / "trajectory.csv");
    write_event_log(r.traj, events);
    write_trajectory(r.traj, fronts);
    Json report = r.metrics;
    report["experiment"] = "run";
    report["passed"] = r.violations == 0;
    write_json(report);
    return report;
  }
  Json report;
  if (kind == "validate")
    report = experiment_validate(s);
  else if (kind == "converge")
    report = experiment_converge(s);
  else if (kind == "stability")
    report = experiment_stability(s);
  else if (kind == "decay")
    report = experiment_decay(s);
  else if (kind == "epsilon-shock")
    report = experiment_epsilon_shock(s);
  else if (kind == "sensitivity")
    report = experiment_sensitivity(s, out);
  else if (kind == "characteristics")
    report = experiment_characteristics(s, out);
  else
    fail(ErrorCode::ScenarioError, "unknown experiment kind '" + kind + "'");
  if (report.contains("table")) {
    std::ofstream f(out / (kind + ".csv"));
    const Json& tab = report["table"];
    for (std::size_t c = 0; c < tab["columns"].size(); ++c) f << (c ? "," : "") << tab["columns"][c].get<std::string>();
    f << '\n';
    for (const Json& row : tab["rows"]) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) f << ',';
        if (row[c].is_null())
          f << "nan";
        else if (row[c].is_number_float())
          f << fmt(row[c].get<double>());
        else
          f << row[c].dump();
      }
      f << '\n';
    }
  }
  write_json(report);
  return report;
}

}  // namespace wft::lab
