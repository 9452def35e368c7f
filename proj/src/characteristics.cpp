#include "wft/characteristics.hpp"

#include "wft/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wft {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Tracer {
 public:
  Tracer(const Trajectory& traj, int i) : traj_(traj), i_(i), gnl_(traj.model().is_gnl(i)) {
    if (i < 0 || i >= traj.model().n()) fail(ErrorCode::InvalidArgument, "family index out of range");
    tol_ = 1e-9 * traj.length_scale();
  }

  CharacteristicPath forward(double t0, double x0, double T);
  CharacteristicPath backward(double t0, double x0);

 private:
  struct Region {
    GridPoint state;
    FrontId left, right;
    double lo, hi;  // speeds of the bounding fronts in the direction of tracing
  };

  const Front& front(FrontId id) const { return traj_.front(id); }
  double lambda(const GridPoint& w) const { return traj_.model().speed_w(i_, to_w(w, traj_.grid())); }
  double speed_eps(double lam) const { return 1e-11 * (1.0 + std::abs(lam)); }
  bool parallel(double a, double b) const { return std::abs(a - b) <= speed_eps(a); }

  PathSlot start_slot(double t, double x, bool forward_dir) const;
  PathSlot choose(const std::vector<Region>& regions, const PathSlot& in, bool forward_dir, double t, double x) const;
  PathSlot node_forward(int e, const PathSlot& in) const;
  PathSlot node_backward(int e, const PathSlot& in) const;
  [[noreturn]] void shock_hit(FrontId id, double t) const {
    std::ostringstream s;
    s << "family " << i_ + 1 << " path meets same-family shock " << id << " at t=" << t;
    fail(ErrorCode::GNLShockEncounter, s.str());
  }
  PathSlot ride(FrontId id, Side side) const {
    PathSlot s;
    s.ride = id;
    s.side = side;
    s.state = side == Side::Left ? front(id).wave.left : front(id).wave.right;
    return s;
  }
  std::size_t guard_limit() const { return 8 * (traj_.fronts().size() + traj_.events().size()) + 64; }

  const Trajectory& traj_;
  int i_;
  bool gnl_;
  double tol_;
};

// Region picked by the path at a node. Candidates are regions whose speed lies between the bounding
// front speeds; ties on a same-family contact mean the path rides it.
PathSlot Tracer::choose(const std::vector<Region>& regions, const PathSlot& in, bool forward_dir, double t,
                        double x) const {
  const std::int64_t c = in.state[i_];
  int best = -1;
  std::int64_t best_dist = std::numeric_limits<std::int64_t>::max();
  for (std::size_t k = 0; k < regions.size(); ++k) {
    const Region& r = regions[k];
    const double lam = lambda(r.state);
    const double eps = speed_eps(lam);
    if (lam < r.lo - eps || lam > r.hi + eps) continue;
    const std::int64_t dist = std::abs(r.state[i_] - c);
    if (!gnl_ && dist != 0) continue;
    if (dist < best_dist) {
      best = static_cast<int>(k);
      best_dist = dist;
    }
  }
  if (best < 0) {
    if (gnl_) {
      std::ostringstream s;
      s << "family " << i_ + 1 << " path has no continuation at node (" << t << ", " << x << ")";
      fail(ErrorCode::GNLShockEncounter, s.str());
    }
    fail(ErrorCode::CrossingOrderViolation, "characteristic lost its strip at a node");
  }
  const Region& r = regions[static_cast<std::size_t>(best)];
  const double lam = lambda(r.state);
  // forward: lo is the left bound's speed; backward: lo belongs to the right bound
  const FrontId lo_id = forward_dir ? r.left : r.right;
  const FrontId hi_id = forward_dir ? r.right : r.left;
  auto same_family = [&](FrontId id) { return id >= 0 && front(id).wave.family == i_; };
  if (!gnl_) {
    if (same_family(hi_id) && parallel(lam, r.hi)) return ride(hi_id, forward_dir ? Side::Left : Side::Right);
    if (same_family(lo_id) && parallel(lam, r.lo)) return ride(lo_id, forward_dir ? Side::Right : Side::Left);
  }
  PathSlot s;
  s.left = r.left;
  s.right = r.right;
  s.state = r.state;
  return s;
}

PathSlot Tracer::node_forward(int e, const PathSlot& in) const {
  const InteractionRecord& ev = traj_.events().at(static_cast<std::size_t>(e));
  const auto& out = ev.outgoing;
  std::vector<Region> regions;
  for (std::size_t k = 0; k <= out.size(); ++k) {
    Region r;
    r.state = k == 0 ? ev.left_state : front(out[k - 1]).wave.right;
    r.left = k == 0 ? ev.left_neighbor : out[k - 1];
    r.right = k == out.size() ? ev.right_neighbor : out[k];
    r.lo = k == 0 ? -kInf : front(out[k - 1]).speed();
    r.hi = k == out.size() ? kInf : front(out[k]).speed();
    regions.push_back(r);
  }
  return choose(regions, in, true, ev.t, ev.x);
}

PathSlot Tracer::node_backward(int e, const PathSlot& in) const {
  const InteractionRecord& ev = traj_.events().at(static_cast<std::size_t>(e));
  const auto& inc = ev.incoming;
  if (gnl_ && in.riding()) {
    const Wave& w = front(in.ride).wave;
    for (FrontId id : inc) {
      const Wave& v = front(id).wave;
      if (v.family == i_ && v.kind == WaveKind::RarefactionShard && v.left[i_] == w.left[i_] &&
          v.right[i_] == w.right[i_])
        return ride(id, in.side);
    }
  }
  // Going back in time a region between incoming fronts a (left) and b (right) holds the path iff
  // speed(b) <= lambda <= speed(a).
  std::vector<Region> regions;
  for (std::size_t k = 0; k <= inc.size(); ++k) {
    Region r;
    r.state = k == 0 ? ev.left_state : front(inc[k - 1]).wave.right;
    r.left = k == 0 ? ev.left_neighbor : inc[k - 1];
    r.right = k == inc.size() ? ev.right_neighbor : inc[k];
    r.lo = k == inc.size() ? -kInf : front(inc[k]).speed();
    r.hi = k == 0 ? kInf : front(inc[k - 1]).speed();
    regions.push_back(r);
  }
  return choose(regions, in, false, ev.t, ev.x);
}

PathSlot Tracer::start_slot(double t, double x, bool forward_dir) const {
  const Profile p = traj_.profile(t);
  // fronts within tol of x sit on the start point
  std::size_t lo = 0;
  while (lo < p.x.size() && p.x[lo] < x - tol_) ++lo;
  std::size_t hi = lo;
  while (hi < p.x.size() && p.x[hi] <= x + tol_) ++hi;
  PathSlot s;
  s.left = lo == 0 ? kLeftEnd : p.ids[lo - 1];
  s.right = hi == p.ids.size() ? kRightEnd : p.ids[hi];
  if (lo == hi) {
    s.state = p.states[lo];
    return s;
  }
  // Start on one or more fronts: treat them as a fan and take the right state as the carried value.
  if (!forward_dir || t > 0.0) {
    for (std::size_t k = lo; k < hi; ++k) {
      const Front& f = front(p.ids[k]);
      if (f.wave.family == i_ && (!gnl_ || f.wave.kind == WaveKind::RarefactionShard)) {
        if (k + 1 == hi) return ride(f.id, Side::Right);
      }
    }
    s.left = p.ids[hi - 1];
    s.state = p.states[hi];
    return s;
  }
  std::vector<Region> regions;
  for (std::size_t k = lo; k <= hi; ++k) {
    Region r;
    r.state = p.states[k];
    r.left = k == 0 ? kLeftEnd : p.ids[k - 1];
    r.right = k == p.ids.size() ? kRightEnd : p.ids[k];
    r.lo = k == lo ? -kInf : front(p.ids[k - 1]).speed();
    r.hi = k == hi ? kInf : front(p.ids[k]).speed();
    regions.push_back(r);
  }
  PathSlot in;
  in.state = p.states[hi];
  return choose(regions, in, true, t, x);
}

CharacteristicPath Tracer::forward(double t0, double x0, double T) {
  if (t0 < 0.0 || T > traj_.t_end() * (1.0 + 1e-12) || T < t0) fail(ErrorCode::OutOfSpan, "trace times outside the run");
  CharacteristicPath path;
  path.family = i_;
  path.y = x0;
  path.vertices.push_back({t0, x0});
  PathSlot s = start_slot(t0, x0, true);
  double t = t0, x = x0;
  for (std::size_t guard = 0;; ++guard) {
    if (guard > guard_limit()) fail(ErrorCode::CrossingOrderViolation, "characteristic trace does not terminate");
    if (s.riding()) {
      const Front& f = front(s.ride);
      const double te = std::min(f.t_end, T);
      t = te;
      x = f.position(te);
      if (te >= T || f.death_event < 0) break;
      path.vertices.push_back({t, x});
      s = node_forward(f.death_event, s);
      continue;
    }
    const double lam = lambda(s.state);
    double t_hit_r = kInf, t_hit_l = kInf, t_dr = kInf, t_dl = kInf;
    if (s.right >= 0) {
      const Front& R = front(s.right);
      const double rel = lam - R.speed();
      if (rel > speed_eps(lam)) t_hit_r = t + std::max(R.position(t) - x, 0.0) / rel;
      t_dr = R.t_end;
    }
    if (s.left >= 0) {
      const Front& L = front(s.left);
      const double rel = L.speed() - lam;
      if (rel > speed_eps(lam)) t_hit_l = t + std::max(x - L.position(t), 0.0) / rel;
      t_dl = L.t_end;
    }
    const double t_next = std::min({t_hit_r, t_hit_l, t_dr, t_dl});
    if (t_next >= T) {
      x += lam * (T - t);
      t = T;
      break;
    }
    if (t_dl <= t_next || t_dr <= t_next) {
      const FrontId dying = t_dl <= t_next ? s.left : s.right;
      const Front& f = front(dying);
      const InteractionRecord& ev = traj_.events().at(static_cast<std::size_t>(f.death_event));
      const double xp = x + lam * (t_next - t);
      t = t_next;
      if (std::abs(xp - ev.x) <= tol_) {
        x = ev.x;
        path.vertices.push_back({t, x});
        s = node_forward(f.death_event, s);
        continue;
      }
      x = xp;
      if (dying == s.right)
        s.right = ev.outgoing.empty() ? ev.right_neighbor : ev.outgoing.front();
      else
        s.left = ev.outgoing.empty() ? ev.left_neighbor : ev.outgoing.back();
      continue;
    }
    const FrontId hit = t_hit_r <= t_hit_l ? s.right : s.left;
    const Front& f = front(hit);
    const double xh = f.position(t_next);
    if (f.death_event >= 0) {
      const InteractionRecord& ev = traj_.events()[static_cast<std::size_t>(f.death_event)];
      if (std::abs(xh - ev.x) <= tol_ && std::abs(x + lam * (ev.t - t) - ev.x) <= tol_) {
        t = ev.t;
        x = ev.x;
        path.vertices.push_back({t, x});
        s = node_forward(f.death_event, s);
        continue;
      }
    }
    t = t_next;
    x = xh;
    path.vertices.push_back({t, x});
    if (f.wave.family == i_) {
      if (gnl_ && f.wave.kind == WaveKind::Shock) shock_hit(hit, t);
      s = ride(hit, hit == s.right ? Side::Left : Side::Right);
      continue;
    }
    path.crossings.push_back({hit, t});
    if (hit == s.right) {
      s.left = hit;
      s.right = traj_.right_neighbor(hit, t);
      s.state = f.wave.right;
    } else {
      s.right = hit;
      s.left = traj_.left_neighbor(hit, t);
      s.state = f.wave.left;
    }
  }
  path.vertices.push_back({t, x});
  path.end = s;
  return path;
}

CharacteristicPath Tracer::backward(double t0, double x0) {
  if (t0 < 0.0 || t0 > traj_.t_end() * (1.0 + 1e-12)) fail(ErrorCode::OutOfSpan, "trace time outside the run");
  CharacteristicPath path;
  path.family = i_;
  path.vertices.push_back({t0, x0});
  PathSlot s = start_slot(t0, x0, false);
  double t = t0, x = x0;
  for (std::size_t guard = 0;; ++guard) {
    if (guard > guard_limit()) fail(ErrorCode::CrossingOrderViolation, "characteristic trace does not terminate");
    if (s.riding()) {
      const Front& f = front(s.ride);
      t = f.t0;
      x = f.x0;
      if (f.birth_event < 0) break;
      path.vertices.push_back({t, x});
      s = node_backward(f.birth_event, s);
      continue;
    }
    const double lam = lambda(s.state);
    double t_hit_r = -kInf, t_hit_l = -kInf, t_br = -kInf, t_bl = -kInf;
    if (s.right >= 0) {
      const Front& R = front(s.right);
      const double rel = R.speed() - lam;
      if (rel > speed_eps(lam)) t_hit_r = t - std::max(R.position(t) - x, 0.0) / rel;
      if (R.birth_event >= 0) t_br = R.t0;
    }
    if (s.left >= 0) {
      const Front& L = front(s.left);
      const double rel = lam - L.speed();
      if (rel > speed_eps(lam)) t_hit_l = t - std::max(x - L.position(t), 0.0) / rel;
      if (L.birth_event >= 0) t_bl = L.t0;
    }
    const double t_next = std::max({t_hit_r, t_hit_l, t_br, t_bl});
    if (t_next <= 0.0) {
      x -= lam * t;
      t = 0.0;
      break;
    }
    if (t_bl >= t_next || t_br >= t_next) {
      const FrontId born = t_bl >= t_next ? s.left : s.right;
      const Front& f = front(born);
      const InteractionRecord& ev = traj_.events().at(static_cast<std::size_t>(f.birth_event));
      const double xp = x - lam * (t - t_next);
      t = t_next;
      const bool edge = born == s.right ? ev.outgoing.front() == born : ev.outgoing.back() == born;
      if (std::abs(xp - ev.x) <= tol_ || !edge) {
        x = ev.x;
        path.vertices.push_back({t, x});
        s = node_backward(f.birth_event, s);
        continue;
      }
      x = xp;
      if (born == s.right)
        s.right = ev.incoming.front();
      else
        s.left = ev.incoming.back();
      continue;
    }
    const FrontId hit = t_hit_r >= t_hit_l ? s.right : s.left;
    const Front& f = front(hit);
    const double xh = f.position(t_next);
    if (f.birth_event >= 0) {
      const InteractionRecord& ev = traj_.events()[static_cast<std::size_t>(f.birth_event)];
      if (std::abs(xh - ev.x) <= tol_ && std::abs(x - lam * (t - ev.t) - ev.x) <= tol_) {
        t = ev.t;
        x = ev.x;
        path.vertices.push_back({t, x});
        s = node_backward(f.birth_event, s);
        continue;
      }
    }
    t = t_next;
    x = xh;
    path.vertices.push_back({t, x});
    if (f.wave.family == i_) {
      if (gnl_ && f.wave.kind == WaveKind::Shock) shock_hit(hit, t);
      s = ride(hit, hit == s.right ? Side::Left : Side::Right);
      continue;
    }
    path.crossings.push_back({hit, t});
    if (hit == s.right) {
      s.left = hit;
      s.right = traj_.right_neighbor(hit, t);
      s.state = f.wave.right;
    } else {
      s.right = hit;
      s.left = traj_.left_neighbor(hit, t);
      s.state = f.wave.left;
    }
  }
  path.vertices.push_back({t, x});
  path.y = x;
  path.end = s;
  return path;
}

bool on_front(const Profile& p, double x, double tol) {
  auto it = std::lower_bound(p.x.begin(), p.x.end(), x - tol);
  return it != p.x.end() && *it <= x + tol;
}

}  // namespace

CharacteristicPath trace(const Trajectory& traj, int i, double y, double T) {
  return Tracer(traj, i).forward(0.0, y, T);
}

CharacteristicPath trace_from(const Trajectory& traj, int i, double t0, double x0, double T) {
  return Tracer(traj, i).forward(t0, x0, T);
}

CharacteristicPath trace_back(const Trajectory& traj, int i, double t, double x) {
  return Tracer(traj, i).backward(t, x);
}

double foot_key(const PathSlot& slot) {
  if (slot.riding()) return slot.ride + (slot.side == Side::Right ? 0.5 : -0.5);
  return slot.left == kLeftEnd ? -0.5 : slot.left + 0.5;
}

std::vector<TransportSample> transport_ld(const Trajectory& traj, int i, const std::vector<double>& ys, double t) {
  if (traj.model().is_gnl(i)) fail(ErrorCode::InvalidArgument, "transport_ld needs a linearly degenerate family");
  std::vector<TransportSample> out;
  out.reserve(ys.size());
  for (double y : ys) {
    const CharacteristicPath p = trace(traj, i, y, t);
    TransportSample s;
    s.y = y;
    s.x = p.x_end();
    s.value = traj.sample(0.0, y, Side::Right)[i];
    s.state_at_x = p.end.state;
    out.push_back(s);
  }
  return out;
}

TransportMap h_map(const Trajectory& traj, int i, double t, const std::vector<double>& ys) {
  TransportMap m;
  m.family = i;
  m.t = t;
  m.y = ys;
  m.h.reserve(ys.size());
  for (double y : ys) m.h.push_back(trace(traj, i, y, t).x_end());
  m.min_ratio = kInf;
  m.max_ratio = 0.0;
  for (std::size_t k = 1; k < ys.size(); ++k) {
    const double dy = ys[k] - ys[k - 1];
    if (dy <= 0.0) fail(ErrorCode::InvalidArgument, "h_map samples must increase");
    const double r = (m.h[k] - m.h[k - 1]) / dy;
    if (!(r > 0.0)) m.monotone = false;
    m.min_ratio = std::min(m.min_ratio, r);
    m.max_ratio = std::max(m.max_ratio, r);
  }
  if (ys.size() < 2) m.min_ratio = m.max_ratio = 1.0;
  m.c_hat = m.min_ratio > 0.0 ? std::max(m.max_ratio, 1.0 / m.min_ratio) : kInf;
  return m;
}

DerivativeCheck derivative_formula_check(const Trajectory& traj, int i, double t, double y, double step) {
  const SystemModel& model = traj.model();
  const GridSpec& grid = traj.grid();
  const double margin = 2.0 * step + 1e-9 * traj.length_scale();
  const Profile p0 = traj.profile(0.0);
  if (on_front(p0, y, margin)) fail(ErrorCode::DiscontinuousAtProbe, "initial data jumps near the probe");
  const CharacteristicPath mid = trace(traj, i, y, t);
  const CharacteristicPath plus = trace(traj, i, y + step, t);
  const CharacteristicPath minus = trace(traj, i, y - step, t);
  const double x = mid.x_end();
  const Profile pt = traj.profile(t);
  if (on_front(pt, x, std::abs(plus.x_end() - minus.x_end()) + 1e-9 * traj.length_scale()))
    fail(ErrorCode::DiscontinuousAtProbe, "solution jumps near the traced point");

  DerivativeCheck d;
  d.fd_slope = (plus.x_end() - minus.x_end()) / (2.0 * step);
  const Vec w0 = to_w(p0.sample(y, Side::Right), grid);
  const Vec wt = to_w(pt.sample(x, Side::Right), grid);
  const int n = model.n();
  Vec wl(n), wr(n);
  for (int j = 0; j < n; ++j) {
    wl[j] = j < i ? w0[j] : wt[j];
    wr[j] = j <= i ? wt[j] : w0[j];
  }
  const FrameVectors frame = frame_vectors_w(model, wl, wr);
  const Vec du0 = model.chart_jacobian(w0).col(i);
  const Vec dut = model.chart_jacobian(wt).col(i);
  d.formula = frame.l.row(i).dot(du0) / dut.norm();
  d.residual = std::abs(d.fd_slope - d.formula) / std::max(std::abs(d.formula), 1e-300);
  return d;
}

DecayMeasure decay_measure(const Trajectory& traj, int k, double tau, std::optional<std::pair<double, double>> window) {
  if (!traj.model().is_gnl(k)) fail(ErrorCode::InvalidArgument, "decay needs a genuinely nonlinear family");
  if (!(tau > 0.0)) fail(ErrorCode::InvalidArgument, "decay time must be positive");
  const Profile p = traj.profile(tau);
  const GridSpec& grid = traj.grid();
  DecayMeasure m;
  if (window) {
    m.window_lo = window->first;
    m.window_hi = window->second;
  } else if (!p.x.empty()) {
    m.window_lo = p.x.front();
    m.window_hi = p.x.back();
  }
  const double mesh = grid.mesh();
  m.kappa_hat = kInf;
  const Front* prev = nullptr;
  for (std::size_t a = 0; a < p.ids.size(); ++a) {
    const Front& f = traj.front(p.ids[a]);
    if (f.wave.family != k) continue;
    if (p.x[a] >= m.window_lo && p.x[a] <= m.window_hi)
      m.tv += std::abs(static_cast<double>(f.wave.strength_units())) * grid.unit();
    if (prev && prev->wave.kind == WaveKind::RarefactionShard && f.wave.kind == WaveKind::RarefactionShard) {
      m.kappa_hat = std::min(m.kappa_hat, (f.position(tau) - prev->position(tau)) / (tau * mesh));
      ++m.adjacent_pairs;
    }
    prev = &f;
  }
  for (std::size_t a = 0; a < p.states.size(); ++a) {
    const double lo = a == 0 ? -kInf : p.x[a - 1];
    const double hi = a == p.x.size() ? kInf : p.x[a];
    if (hi < m.window_lo || lo > m.window_hi) continue;
    m.sup_w = std::max(m.sup_w, std::abs(static_cast<double>(p.states[a][k]) * grid.unit()));
  }
  if (m.adjacent_pairs == 0) fail(ErrorCode::NoAdjacentShards, "no adjacent rarefaction shards at this time");
  return m;
}

double decay_tv_bound(double b_minus_a, double kappa, double tau, double sup_w, int n_initial, int nu) {
  return 2.0 * b_minus_a / (kappa * tau) + sup_w + (n_initial + 1) * std::ldexp(1.0, 1 - nu);
}

}  // namespace wft
