#include "wft/sensitivity.hpp"

#include "wft/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wft {
namespace {

Vec state_u(const Trajectory& traj, const GridPoint& p) { return traj.model().to_conserved(to_w(p, traj.grid())); }

// Exact integral of |g| for g affine on an interval of length h with end values a, b.
double abs_affine_integral(double a, double b, double h) {
  if ((a >= 0.0) == (b >= 0.0)) return 0.5 * h * (std::abs(a) + std::abs(b));
  return 0.5 * h * (a * a + b * b) / (std::abs(a) + std::abs(b));
}

std::vector<double> merged_knots(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

}  // namespace

double ShiftAssignment::rate(FrontId id) const {
  auto it = rates.find(id);
  return it == rates.end() ? 0.0 : it->second;
}

std::vector<std::size_t> breakpoint_of_initial_fronts(const Trajectory& traj) {
  const auto& bps = traj.initial_data().breakpoints;
  std::vector<std::size_t> out;
  std::size_t b = 0;
  for (FrontId id : traj.initial_fronts()) {
    const double x0 = traj.front(id).x0;
    while (b < bps.size() && bps[b].x != x0) ++b;
    if (b == bps.size()) fail(ErrorCode::InvalidArgument, "time-0 front does not sit on a breakpoint");
    out.push_back(b);
  }
  return out;
}

ShiftAssignment breakpoint_assignment(const Trajectory& traj, const std::vector<double>& rates) {
  if (rates.size() != traj.initial_data().breakpoints.size())
    fail(ErrorCode::InvalidArgument, "one rate per breakpoint expected");
  ShiftAssignment a;
  const auto ids = traj.initial_fronts();
  const auto owner = breakpoint_of_initial_fronts(traj);
  for (std::size_t k = 0; k < ids.size(); ++k)
    if (rates[owner[k]] != 0.0) a.rates[ids[k]] = rates[owner[k]];
  return a;
}

ResolvedShifts resolve_interaction_shifts(const std::vector<Vec>& in_jumps, const std::vector<double>& in_rates,
                                          const std::vector<Vec>& out_jumps) {
  if (in_jumps.size() != in_rates.size()) fail(ErrorCode::InvalidArgument, "one rate per incoming jump expected");
  ResolvedShifts r;
  if (out_jumps.empty() && in_jumps.empty()) return r;
  const Eigen::Index n = !out_jumps.empty() ? out_jumps.front().size() : in_jumps.front().size();
  Vec rhs = Vec::Zero(n);
  double weight = 0.0;
  for (std::size_t a = 0; a < in_jumps.size(); ++a) {
    rhs += in_rates[a] * in_jumps[a];
    weight += std::abs(in_rates[a]) * in_jumps[a].norm();
  }
  if (out_jumps.empty()) {
    r.residual = weight > 0.0 ? rhs.norm() / weight : 0.0;
    return r;
  }
  Mat s(n, static_cast<Eigen::Index>(out_jumps.size()));
  for (std::size_t b = 0; b < out_jumps.size(); ++b) s.col(static_cast<Eigen::Index>(b)) = out_jumps[b] / out_jumps[b].norm();
  Eigen::JacobiSVD<Mat> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec sv = svd.singularValues();
  if (static_cast<std::size_t>(n) < out_jumps.size() || !(sv(sv.size() - 1) > 1e-10 * sv(0))) {
    std::ostringstream os;
    os << out_jumps.size() << " outgoing jumps are linearly dependent";
    fail(ErrorCode::DependentOutgoing, os.str());
  }
  const Vec c = svd.solve(rhs);
  Vec back = Vec::Zero(n);
  for (std::size_t b = 0; b < out_jumps.size(); ++b) {
    r.rates.push_back(c(static_cast<Eigen::Index>(b)) / out_jumps[b].norm());
    back += r.rates.back() * out_jumps[b];
  }
  r.residual = weight > 0.0 ? (back - rhs).norm() / weight : (back - rhs).norm();
  return r;
}

std::pair<double, double> sheaf_interaction_shifts(double xi_bar, double xi, double lambda_bar, double lambda,
                                                   double lambda_bar_after, double lambda_after) {
  // oracle-normalized: the collision point moves by ((xi - xi_bar), (lambda_bar xi - lambda xi_bar)) / (lambda_bar - lambda)
  const double den = lambda_bar - lambda;
  if (den == 0.0) fail(ErrorCode::ParallelSpeeds, "sheaf and front travel with the same speed");
  // written as rate plus correction so that equal rates come back bit for bit
  const double bar = xi_bar + (xi_bar - xi) * (lambda_bar_after - lambda_bar) / den;
  const double one = xi + (xi_bar - xi) * (lambda_after - lambda) / den;
  return {bar, one};
}

std::vector<double> chained_shifts(const Trajectory& traj, const ShiftAssignment& assignment) {
  std::vector<double> xi(traj.fronts().size(), 0.0);
  for (const auto& [id, rate] : assignment.rates) {
    const Front& f = traj.front(id);
    if (f.birth_event >= 0) fail(ErrorCode::InvalidArgument, "shift rates attach only to time-0 fronts");
    xi[static_cast<std::size_t>(id)] = rate;
  }
  for (const auto& ev : traj.events()) {
    std::vector<Vec> in, out;
    std::vector<double> rates;
    for (FrontId id : ev.incoming) {
      in.push_back(traj.front(id).wave.jump);
      rates.push_back(xi[static_cast<std::size_t>(id)]);
    }
    for (FrontId id : ev.outgoing) out.push_back(traj.front(id).wave.jump);
    const ResolvedShifts r = resolve_interaction_shifts(in, rates, out);
    for (std::size_t b = 0; b < ev.outgoing.size(); ++b) xi[static_cast<std::size_t>(ev.outgoing[b])] = r.rates[b];
  }
  return xi;
}

ShiftContext shift_context(const Trajectory& traj, double t, double x) {
  const double tol = 1e-9 * traj.length_scale();
  for (const auto& ev : traj.events())
    if (std::abs(ev.t - t) <= 1e-12 * std::max(1.0, t)) fail(ErrorCode::ProbeAtInteractionTime, "probe time is an interaction time");
  const Profile p = traj.profile(t);
  for (double xf : p.x)
    if (std::abs(xf - x) <= tol) fail(ErrorCode::ProbeOnFront, "u(t, .) jumps at the probe");
  ShiftContext c;
  c.t = t;
  c.x = x;
  c.w = p.sample(x, Side::Right);
  for (int i = 0; i < traj.model().n(); ++i) {
    const CharacteristicPath path = trace_back(traj, i, t, x);
    c.feet.push_back(path.y);
    c.foot_keys.push_back(foot_key(path.end));
  }
  return c;
}

int shift_index(const ShiftContext& ctx, FrontId beta) {
  int j = 1;
  for (double key : ctx.foot_keys)
    if (beta < key) ++j;
  return j;
}

Vec shift_vector_P(const Trajectory& traj, const ShiftContext& ctx, FrontId beta) {
  const SystemModel& model = traj.model();
  const GridSpec& grid = traj.grid();
  const int n = model.n();
  const Front& f = traj.front(beta);
  if (f.birth_event >= 0) fail(ErrorCode::InvalidArgument, "P is defined for time-0 fronts");
  const int j = shift_index(ctx, beta);
  const Vec sigma = f.wave.jump;
  if (j == 1) return Vec::Zero(n);
  if (j == n + 1) return sigma;
  const int k = f.wave.family + 1;
  const Vec wm0 = to_w(f.wave.left, grid);   // w(0, y-)
  const Vec wp0 = to_w(f.wave.right, grid);  // w(0, y+)
  const Vec wt = to_w(ctx.w, grid);
  Vec wl(n), wr(n), wm(n);
  for (int c = 1; c <= n; ++c) {
    const int a = c - 1;
    wl[a] = c < j ? wm0[a] : wt[a];
    wr[a] = c < j ? wt[a] : wp0[a];
    if (k < j)
      wm[a] = c < j ? (c == k ? wp0[a] : wt[a]) : wp0[a];
    else
      wm[a] = c < j ? wt[a] : (c == k ? wm0[a] : wp0[a]);
  }
  const FrameVectors lm = frame_vectors_w(model, wl, wm);
  if (k < j) {
    // The remainder meets the k-wave at the level where the (w_l, w_m) fan has resolved families < j,
    // so the second frame starts from that intermediate state rather than from w_m.
    Vec mid(n);
    for (int a = 0; a < n; ++a) mid[a] = a < j - 1 ? wm[a] : wl[a];
    const FrameVectors mr = frame_vectors_w(model, mid, wr);
    const Vec first = projection_P(lm, j - 1, sigma);
    return first + projection_P(mr, j - 1, sigma - first);
  }
  const FrameVectors mr = frame_vectors_w(model, wm, wr);
  return projection_P(lm, j - 1, projection_P(mr, j - 1, sigma));
}

Vec shift_vector_P(const Trajectory& traj, double t, double x, FrontId beta) {
  return shift_vector_P(traj, shift_context(traj, t, x), beta);
}

Vec IntegralShift::at(double xq) const {
  const auto k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), xq) - x.begin());
  return v[k];
}

IntegralShift integral_shift(const Trajectory& traj, double t, const ShiftAssignment& assignment) {
  const Profile p = traj.profile(t);
  const double tol = 1e-9 * traj.length_scale();
  IntegralShift out;
  out.t = t;
  out.x = p.x;
  const int n = traj.model().n();
  for (std::size_t k = 0; k <= p.x.size(); ++k) {
    double probe;
    if (p.x.empty())
      probe = 0.0;
    else if (k == 0)
      probe = p.x.front() - 1.0;
    else if (k == p.x.size())
      probe = p.x.back() + 1.0;
    else if (p.x[k] - p.x[k - 1] > 4.0 * tol)
      probe = 0.5 * (p.x[k - 1] + p.x[k]);
    else {
      out.v.push_back(out.v.back());  // fronts closer than the tracker resolution
      continue;
    }
    const ShiftContext ctx = shift_context(traj, t, probe);
    Vec v = Vec::Zero(n);
    for (const auto& [id, rate] : assignment.rates)
      if (rate != 0.0) v += rate * shift_vector_P(traj, ctx, id);
    out.v.push_back(v);
  }
  return out;
}

IntegralShift chained_integral_shift(const Trajectory& traj, double t, const std::vector<double>& rates) {
  const Profile p = traj.profile(t);
  IntegralShift out;
  out.t = t;
  out.x = p.x;
  Vec v = Vec::Zero(traj.model().n());
  out.v.push_back(v);
  for (FrontId id : p.ids) {
    v += rates.at(static_cast<std::size_t>(id)) * traj.front(id).wave.jump;
    out.v.push_back(v);
  }
  return out;
}

Vec FdIntegralShift::at(double xq) const {
  if (xq <= x.front()) return v.front();
  if (xq >= x.back()) return v.back();
  const auto k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), xq) - x.begin());
  const double s = (xq - x[k - 1]) / (x[k] - x[k - 1]);
  return (1.0 - s) * v[k - 1] + s * v[k];
}

Trajectory shifted_run(const Trajectory& traj, const ShiftAssignment& assignment, double theta, double t) {
  const auto ids = traj.initial_fronts();
  InitialData data;
  data.left = traj.initial_data().left;
  double last = -std::numeric_limits<double>::infinity();
  for (FrontId id : ids) {
    const Front& f = traj.front(id);
    const double y = f.x0 + theta * assignment.rate(id);
    if (y < last) fail(ErrorCode::EventReorder, "shift reverses the order of initial fronts");
    if (y == last)
      data.breakpoints.back().w = f.wave.right;
    else
      data.breakpoints.push_back({y, f.wave.right});
    last = y;
  }
  Trajectory out = run_tracker(traj.model_ptr(), traj.grid(), data, t);
  std::size_t base_events = 0;
  for (const auto& ev : traj.events()) base_events += ev.t <= t ? 1 : 0;
  const Profile pa = traj.profile(t);
  const Profile pb = out.profile(t);
  if (out.events().size() != base_events || pa.states != pb.states) {
    std::ostringstream os;
    os << "shifted run has " << out.events().size() << " events and " << pb.ids.size() << " fronts, base has "
       << base_events << " and " << pa.ids.size() << " at t=" << t;
    fail(ErrorCode::EventReorder, os.str());
  }
  return out;
}

FdIntegralShift fd_integral_shift(const Trajectory& traj, const ShiftAssignment& assignment, double t, double theta) {
  if (!(theta > 0.0)) fail(ErrorCode::InvalidArgument, "theta must be positive");
  const Trajectory shifted = shifted_run(traj, assignment, theta, t);
  const Profile pa = traj.profile(t);
  const Profile pb = shifted.profile(t);
  FdIntegralShift f;
  f.t = t;
  f.theta = theta;
  f.x = merged_knots(pa.x, pb.x);
  const int n = traj.model().n();
  if (f.x.empty()) {
    f.x.push_back(0.0);
    f.v.push_back(Vec::Zero(n));
    return f;
  }
  Vec acc = Vec::Zero(n);
  f.v.push_back(acc);
  for (std::size_t k = 1; k < f.x.size(); ++k) {
    const double mid = 0.5 * (f.x[k - 1] + f.x[k]);
    const Vec du = state_u(traj, pb.sample(mid, Side::Right)) - state_u(traj, pa.sample(mid, Side::Right));
    acc -= (f.x[k] - f.x[k - 1]) / theta * du;
    f.v.push_back(acc);
  }
  return f;
}

double l1_distance(const IntegralShift& v, const FdIntegralShift& f) {
  const auto knots = merged_knots(v.x, f.x);
  double sum = 0.0;
  for (std::size_t k = 1; k < knots.size(); ++k) {
    const double a = knots[k - 1], b = knots[k];
    if (b <= a) continue;
    const Vec c = v.at(0.5 * (a + b));
    const Vec ga = f.at(a) - c, gb = f.at(b) - c;
    for (Eigen::Index m = 0; m < c.size(); ++m) sum += abs_affine_integral(ga(m), gb(m), b - a);
  }
  return sum;
}

double l1_norm(const FdIntegralShift& f) {
  return l1_outside(f, std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity());
}

double l1_outside(const FdIntegralShift& f, double lo, double hi) {
  std::vector<double> knots = f.x;
  if (std::isfinite(lo)) knots.push_back(lo);
  if (std::isfinite(hi)) knots.push_back(hi);
  knots = merged_knots(knots, {});
  double sum = 0.0;
  for (std::size_t k = 1; k < knots.size(); ++k) {
    const double a = knots[k - 1], b = knots[k];
    if (b <= a || (a >= lo && b <= hi)) continue;
    const Vec ga = f.at(a), gb = f.at(b);
    for (Eigen::Index m = 0; m < ga.size(); ++m) sum += abs_affine_integral(ga(m), gb(m), b - a);
  }
  return sum;
}

bool check_involution(const Trajectory& traj, const std::vector<FrontId>& ids) {
  if (ids.empty()) return true;
  const int i = traj.front(ids.front()).wave.family;
  std::int64_t sum = 0;
  for (FrontId id : ids) {
    const Wave& w = traj.front(id).wave;
    if (w.family != i || traj.model().is_gnl(w.family) || w.kind != WaveKind::Contact)
      fail(ErrorCode::MixedFamilies, "involution needs contacts of one linearly degenerate family");
    sum += w.strength_units();
  }
  return sum == 0;
}

ShiftAssignment involution_shift_assignment(const Trajectory& traj, int i, const std::vector<FrontId>& ids, double T) {
  (void)T;  // the assignment is fixed at time 0; rates then propagate by conservation
  if (ids.empty()) fail(ErrorCode::InvalidArgument, "empty involution set");
  if (traj.front(ids.front()).wave.family != i) fail(ErrorCode::MixedFamilies, "set is not of the requested family");
  if (!check_involution(traj, ids)) fail(ErrorCode::InvalidArgument, "fronts are not in involution");
  const auto initial = traj.initial_fronts();
  auto pos = [&](FrontId id) {
    auto it = std::find(initial.begin(), initial.end(), id);
    if (it == initial.end()) fail(ErrorCode::InvalidArgument, "involution set must consist of time-0 fronts");
    return static_cast<std::size_t>(it - initial.begin());
  };
  const std::size_t first = pos(ids.front()), last = pos(ids.back());
  for (std::size_t k = first; k <= last; ++k) {
    const Wave& w = traj.front(initial[k]).wave;
    if (w.family == i && std::find(ids.begin(), ids.end(), initial[k]) == ids.end())
      fail(ErrorCode::InvalidArgument, "involution set must contain every family contact in its range");
  }
  const SystemModel& model = traj.model();
  const GridSpec& grid = traj.grid();
  const std::int64_t w_bar = traj.front(initial[first]).wave.left[i];
  // u - u~ where u~ has w_i replaced by w_bar
  auto gap = [&](const GridPoint& p) {
    GridPoint q = p;
    q[i] = w_bar;
    return Vec(model.to_conserved(to_w(p, grid)) - model.to_conserved(to_w(q, grid)));
  };
  ShiftAssignment a;
  double c = 0.0;
  for (std::size_t k = first; k <= last; ++k) {
    const Front& f = traj.front(initial[k]);
    const Wave& w = f.wave;
    if (k == first) {
      a.rates[f.id] = 1.0;
      c = 1.0;
      continue;
    }
    if (w.family == i) {
      a.rates[f.id] = c;
      if (k == last) c = 0.0;
      continue;
    }
    const Vec g_minus = gap(w.left), g_plus = gap(w.right);
    if (g_plus.norm() == 0.0) {
      // w_i is back at w_bar; the shift of this front must vanish and c is free
      a.rates[f.id] = 0.0;
      continue;
    }
    // xi sigma - c_plus g_plus = -c g_minus
    Mat m(w.jump.size(), 2);
    m.col(0) = w.jump;
    m.col(1) = -g_plus;
    const Vec sol = m.colPivHouseholderQr().solve(Vec(-c * g_minus));
    a.rates[f.id] = sol(0);
    c = sol(1);
  }
  return a;
}

FrontId descendant(const Trajectory& traj, FrontId id, double t) {
  for (std::size_t guard = 0; guard <= traj.fronts().size(); ++guard) {
    const Front& f = traj.front(id);
    if (t < f.t_end || f.death_event < 0) return id;
    const auto& ev = traj.events()[static_cast<std::size_t>(f.death_event)];
    FrontId next = -1;
    for (FrontId o : ev.outgoing)
      if (traj.front(o).wave.family == f.wave.family) next = o;
    if (next < 0) fail(ErrorCode::InvalidArgument, "front has no same-family descendant");
    id = next;
  }
  fail(ErrorCode::CrossingOrderViolation, "descendant chain does not terminate");
}

double estimate_shift_constant(const SystemModel& model, int i, int samples) {
  const int n = model.n();
  double d = 0.0;
  for (const Vec& w : sample_box(model.box(), samples)) {
    const Mat jac = model.chart_jacobian(w);
    const double lam = model.speed_w(i, w);
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      const double h = 1e-6 * model.box()[static_cast<std::size_t>(k)].width();
      Vec wp = w, wm = w;
      wp[k] = std::min(w[k] + h, model.box()[static_cast<std::size_t>(k)].hi);
      wm[k] = std::max(w[k] - h, model.box()[static_cast<std::size_t>(k)].lo);
      const double dl = (model.speed_w(i, wp) - model.speed_w(i, wm)) / (wp[k] - wm[k]);
      const double gap = std::abs(lam - model.speed_w(k, w));
      d = std::max(d, std::abs(dl) / (jac.col(k).norm() * gap));
    }
  }
  return 2.0 * d;
}

ShiftOdeCheck shift_ode_bound_check(const Trajectory& traj, int i, double y, const ShiftAssignment& assignment,
                                    double t, double theta, double d_hat) {
  ShiftOdeCheck r;
  r.d_hat = d_hat;
  for (const auto& [id, rate] : assignment.rates) r.weight += std::abs(rate) * traj.front(id).wave.jump.norm();
  r.bound = d_hat * r.weight;
  if (r.weight == 0.0) return r;
  const Trajectory shifted = shifted_run(traj, assignment, theta, t);
  const double x0 = trace(traj, i, y, t).x_end();
  const double x1 = trace(shifted, i, y, t).x_end();
  r.measured = std::abs(x1 - x0) / theta;
  return r;
}

}  // namespace wft
