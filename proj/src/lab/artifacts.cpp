#include "wft/errors.hpp"
#include "wft/lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace wft::lab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const Vec& value_at(const StepFunction& f, double xq) {
  const auto k = static_cast<std::size_t>(std::upper_bound(f.x.begin(), f.x.end(), xq) - f.x.begin());
  return f.v[k];
}

// Integral over an interval of length len of |d| for d affine with end values d0, d1.
double abs_affine(double d0, double d1, double len) {
  if ((d0 >= 0.0) == (d1 >= 0.0)) return 0.5 * std::abs(d0 + d1) * len;
  const double a = std::abs(d0), b = std::abs(d1);
  return 0.5 * (a * a + b * b) / (a + b) * len;
}

std::string join(const std::vector<FrontId>& ids) {
  std::string s;
  for (std::size_t k = 0; k < ids.size(); ++k) s += (k ? ";" : "") + std::to_string(ids[k]);
  return s;
}

std::string join(const GridPoint& p) {
  std::string s;
  for (int k = 0; k < p.n; ++k) s += (k ? ";" : "") + std::to_string(p[k]);
  return s;
}

}  // namespace

StepFunction conserved_profile(const Trajectory& traj, double t) {
  const Profile p = traj.profile(t);
  StepFunction f;
  f.x = p.x;
  for (const GridPoint& s : p.states) f.v.push_back(traj.model().to_conserved(to_w(s, traj.grid())));
  return f;
}

StepFunction riemann_profile(const Trajectory& traj, double t, int k) {
  const Profile p = traj.profile(t);
  StepFunction f;
  f.x = p.x;
  for (const GridPoint& s : p.states) f.v.push_back(Vec::Constant(1, to_w(s, traj.grid())[k]));
  return f;
}

StepFunction conserved_initial(const SystemModel& model, const GridSpec& grid, const InitialData& data) {
  StepFunction f;
  f.v.push_back(model.to_conserved(to_w(data.left, grid)));
  for (const Breakpoint& b : data.breakpoints) {
    f.x.push_back(b.x);
    f.v.push_back(model.to_conserved(to_w(b.w, grid)));
  }
  return f;
}

double l1_between(const StepFunction& a, const StepFunction& b, double lo, double hi) {
  std::vector<double> cuts = a.x;
  cuts.insert(cuts.end(), b.x.begin(), b.x.end());
  std::sort(cuts.begin(), cuts.end());
  auto gap = [&](double xq) { return (value_at(a, xq) - value_at(b, xq)).cwiseAbs().sum(); };
  if (cuts.empty()) return gap(0.0) == 0.0 ? 0.0 : gap(0.0) * (hi - lo);
  double total = 0.0;
  // the constant ends; an unbounded end with a nonzero gap gives infinity
  if (lo < cuts.front()) {
    const double g = gap(cuts.front() - 1.0);
    if (g > 0.0) total += g * (std::min(hi, cuts.front()) - lo);
  }
  if (hi > cuts.back()) {
    const double g = gap(cuts.back() + 1.0);
    if (g > 0.0) total += g * (hi - std::max(lo, cuts.back()));
  }
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double p = std::max(cuts[k], lo), q = std::min(cuts[k + 1], hi);
    if (!(q > p)) continue;
    total += gap(0.5 * (p + q)) * (q - p);
  }
  return total;
}

double l1_to_decoupled_riemann(const Trajectory& traj, double t, double lo, double hi, const Vec& wl, const Vec& wr,
                               double x0) {
  const SystemModel& model = traj.model();
  if (model.name() != "decoupled") fail(ErrorCode::InvalidArgument, "closed-form reference needs the decoupled model");
  const StepFunction f = conserved_profile(traj, t);
  const double ul = wl[0], ur = wr[0];
  const double a = model.speed_w(1, wl);
  const bool fan = ul < ur && t > 0.0;
  const double shock = x0 + 0.5 * (ul + ur) * t;
  auto burgers = [&](double x, double mid) {
    if (!fan) return mid < shock ? ul : ur;
    if (mid < x0 + ul * t) return ul;
    if (mid > x0 + ur * t) return ur;
    return (x - x0) / t;
  };
  std::vector<double> cuts = f.x;
  for (double c : {lo, hi, x0 + a * t, shock, x0 + ul * t, x0 + ur * t}) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double p = std::max(cuts[k], lo), q = std::min(cuts[k + 1], hi);
    if (!(q > p)) continue;
    const double m = 0.5 * (p + q);
    const Vec& u = value_at(f, m);
    total += abs_affine(u[0] - burgers(p, m), u[0] - burgers(q, m), q - p);
    const double adv = m < x0 + a * t ? wl[1] : wr[1];
    total += std::abs(u[1] - adv) * (q - p);
  }
  return total;
}

RunResult execute_run(const Scenario& s) {
  const auto model = build_model(s);
  const GridSpec grid = grid_of(s);
  Tracker tracker(model, grid, build_initial_data(s, *model, grid));
  RunResult r;
  r.initial = tracker.monitors();
  tracker.run_until(s.horizon);
  r.final = tracker.monitors();
  r.traj = std::move(tracker).take_trajectory();
  const Trajectory& traj = r.traj;

  const double unit = grid.unit();
  Json series = {{"t", {0.0}},
                 {"tv", {static_cast<double>(r.initial.tv) * unit}},
                 {"q", {static_cast<double>(r.initial.q) * unit * unit}},
                 {"count", {r.initial.count}}};
  Json examples = Json::array();
  auto violation = [&](const InteractionRecord& ev, const std::string& what) {
    ++r.violations;
    if (examples.size() < 10) examples.push_back("event " + std::to_string(ev.index) + ": " + what);
  };
  Monitors m = r.initial;
  const std::int64_t q_cap = r.initial.tv * r.initial.tv;
  for (const auto& ev : traj.events()) {
    m.tv += ev.d_tv;
    m.q += ev.d_q;
    m.count += ev.d_count;
    series["t"].push_back(ev.t);
    series["tv"].push_back(static_cast<double>(m.tv) * unit);
    series["q"].push_back(static_cast<double>(m.q) * unit * unit);
    series["count"].push_back(m.count);
    if (ev.alternative == Alternative::None) violation(ev, "no interaction alternative holds");
    if (ev.conservation_defect > 1e-10) violation(ev, "conservation defect " + fmt(ev.conservation_defect));
    if (ev.d_q > 0) violation(ev, "interaction potential increased");
    if (m.q > q_cap) violation(ev, "interaction potential above TV(0)^2");
    const TransversalCheck c = transversal_check(traj, ev);
    if (c.transversal && std::max({c.span_residual, c.identity_residual_i, c.identity_residual_j}) > 1e-8)
      violation(ev, "span or speed-strength identity residual above 1e-8");
  }

  Json c_hat = Json::object(), kappa = Json::object(), d_hat = Json::object();
  const SystemModel& md = *model;
  std::vector<double> ys;
  for (int k = 0; k <= 64; ++k) ys.push_back(s.domain_lo + (s.domain_hi - s.domain_lo) * k / 64.0);
  for (int i = 0; i < md.n(); ++i) {
    const std::string key = std::to_string(i + 1);
    d_hat[key] = estimate_shift_constant(md, i);
    if (!md.is_gnl(i)) {
      c_hat[key] = s.horizon > 0.0 ? h_map(traj, i, s.horizon, ys).c_hat : 1.0;
    } else if (s.horizon > 0.0) {
      try {
        kappa[key] = decay_measure(traj, i, s.horizon).kappa_hat;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoAdjacentShards) throw;
        kappa[key] = nullptr;
      }
    }
  }

  r.metrics = {{"scenario_hash", scenario_hash(s)},
               {"model", s.model},
               {"nu", s.nu},
               {"horizon", s.horizon},
               {"events", traj.events().size()},
               {"fronts", traj.fronts().size()},
               {"series", series},
               {"constants", {{"C_hat", c_hat}, {"kappa_hat", kappa}, {"D_hat", d_hat}}},
               {"violations", r.violations},
               {"violation_examples", examples}};
  return r;
}

void write_event_log(const Trajectory& traj, std::ostream& out) {
  out << "index,t,x,incoming,outgoing,left_state,right_state,d_tv,d_q,d_count,alternative,conservation_defect\n";
  for (const auto& ev : traj.events())
    out << ev.index << ',' << fmt(ev.t) << ',' << fmt(ev.x) << ',' << join(ev.incoming) << ',' << join(ev.outgoing)
        << ',' << join(ev.left_state) << ',' << join(ev.right_state) << ',' << ev.d_tv << ',' << ev.d_q << ','
        << ev.d_count << ',' << to_string(ev.alternative) << ',' << fmt(ev.conservation_defect) << '\n';
}

void write_trajectory(const Trajectory& traj, std::ostream& out) {
  out << "id,family,kind,x0,t0,t_end,birth_event,death_event,speed,left_state,right_state,strength_units\n";
  for (const Front& f : traj.fronts())
    out << f.id << ',' << f.wave.family + 1 << ',' << to_string(f.wave.kind) << ',' << fmt(f.x0) << ','
        << fmt(f.t0) << ',' << fmt(std::min(f.t_end, traj.t_end())) << ',' << f.birth_event << ','
        << f.death_event << ',' << fmt(f.speed()) << ',' << join(f.wave.left) << ',' << join(f.wave.right) << ','
        << f.wave.strength_units() << '\n';
}

void write_path(const CharacteristicPath& path, int index, std::ostream& out, bool header) {
  if (header) out << "path,family,y,t,x\n";
  for (const PathVertex& v : path.vertices)
    out << index << ',' << path.family + 1 << ',' << fmt(path.y) << ',' << fmt(v.t) << ',' << fmt(v.x) << '\n';
}

void write_integral_shift(const IntegralShift& v, std::ostream& out) {
  const Eigen::Index n = v.v.front().size();
  out << "x";
  for (Eigen::Index c = 0; c < n; ++c) out << ",v" << c + 1;
  out << '\n';
  // each row: breakpoint and the value to its right; the first row holds the value at -infinity
  for (std::size_t k = 0; k < v.v.size(); ++k) {
    out << (k == 0 ? std::string("-inf") : fmt(v.x[k - 1]));
    for (Eigen::Index c = 0; c < n; ++c) out << ',' << fmt(v.v[k][c]);
    out << '\n';
  }
}

void write_fd_shift(const FdIntegralShift& f, std::ostream& out) {
  const Eigen::Index n = f.v.empty() ? 0 : f.v.front().size();
  out << "x";
  for (Eigen::Index c = 0; c < n; ++c) out << ",v" << c + 1;
  out << '\n';
  for (std::size_t k = 0; k < f.x.size(); ++k) {
    out << fmt(f.x[k]);
    for (Eigen::Index c = 0; c < n; ++c) out << ',' << fmt(f.v[k][c]);
    out << '\n';
  }
}

}  // namespace wft::lab
