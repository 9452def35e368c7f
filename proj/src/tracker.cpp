#include "wft/tracker.hpp"

#include "wft/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

namespace wft {

const char* to_string(Alternative a) {
  switch (a) {
    case Alternative::CountDrop: return "i";
    case Alternative::VariationDrop: return "ii";
    case Alternative::PotentialDrop: return "iii";
    case Alternative::None: return "none";
  }
  return "?";
}

namespace {

void check_breakpoints(const std::vector<Breakpoint>& bps) {
  for (std::size_t k = 0; k < bps.size(); ++k) {
    if (!std::isfinite(bps[k].x)) fail(ErrorCode::NonMonotoneBreakpoints, "breakpoint position is not finite");
    if (k > 0 && !(bps[k].x > bps[k - 1].x)) {
      std::ostringstream os;
      os << "breakpoint " << k << " at x = " << bps[k].x << " does not lie right of " << bps[k - 1].x;
      fail(ErrorCode::NonMonotoneBreakpoints, os.str());
    }
  }
}

}  // namespace

InitialData make_initial_data(const SystemModel& model, const GridSpec& grid, const Vec& left,
                              const std::vector<std::pair<double, Vec>>& breakpoints) {
  InitialData d;
  d.left = grid_point(left, grid);
  require_admissible(model, grid, d.left, "initial data");
  for (const auto& [x, w] : breakpoints) {
    d.breakpoints.push_back({x, grid_point(w, grid)});
    require_admissible(model, grid, d.breakpoints.back().w, "initial data");
  }
  check_breakpoints(d.breakpoints);
  return d;
}

InitialData project_initial_data(const SystemModel& model, const GridSpec& grid, const Vec& left,
                                 const std::vector<std::pair<double, Vec>>& breakpoints) {
  InitialData d;
  d.left = project_to_grid(model, grid, left);
  for (const auto& [x, w] : breakpoints) d.breakpoints.push_back({x, project_to_grid(model, grid, w)});
  check_breakpoints(d.breakpoints);
  return d;
}

// ---------------------------------------------------------------------------------------------
// Profile and Trajectory

GridPoint Profile::sample(double xq, Side side, double tol) const {
  // k: fronts strictly left of xq; m: fronts at or left of xq.
  const auto lo = std::lower_bound(x.begin(), x.end(), xq - tol);
  const auto hi = std::upper_bound(x.begin(), x.end(), xq + tol);
  const auto k = static_cast<std::size_t>(lo - x.begin());
  const auto m = static_cast<std::size_t>(hi - x.begin());
  return side == Side::Left ? states[k] : states[m];
}

Trajectory::Trajectory(std::shared_ptr<const SystemModel> model, GridSpec grid, InitialData data)
    : model_(std::move(model)), grid_(grid), data_(std::move(data)) {
  if (!data_.breakpoints.empty())
    length_scale_ = std::max(1.0, data_.breakpoints.back().x - data_.breakpoints.front().x);
}

std::vector<FrontId> Trajectory::initial_fronts() const {
  std::vector<FrontId> out;
  for (const auto& f : fronts_)
    if (f.birth_event < 0) out.push_back(f.id);
  return out;
}

Trajectory::History& Trajectory::right_hist(FrontId id) {
  return id == kLeftEnd ? left_end_right_ : right_hist_.at(static_cast<std::size_t>(id));
}
Trajectory::History& Trajectory::left_hist(FrontId id) {
  return id == kRightEnd ? right_end_left_ : left_hist_.at(static_cast<std::size_t>(id));
}
const Trajectory::History& Trajectory::right_hist(FrontId id) const {
  return id == kLeftEnd ? left_end_right_ : right_hist_.at(static_cast<std::size_t>(id));
}
const Trajectory::History& Trajectory::left_hist(FrontId id) const {
  return id == kRightEnd ? right_end_left_ : left_hist_.at(static_cast<std::size_t>(id));
}

namespace {
FrontId lookup(const std::vector<std::pair<double, FrontId>>& h, double t) {
  auto it = std::upper_bound(h.begin(), h.end(), t, [](double v, const auto& e) { return v < e.first; });
  if (it == h.begin()) fail(ErrorCode::OutOfSpan, "neighbor query before the front was born");
  return std::prev(it)->second;
}
}  // namespace

FrontId Trajectory::right_neighbor(FrontId id, double t) const { return lookup(right_hist(id), t); }
FrontId Trajectory::left_neighbor(FrontId id, double t) const { return lookup(left_hist(id), t); }

Profile Trajectory::profile(double t) const {
  if (!(t >= 0.0 && t <= t_end_)) {
    std::ostringstream os;
    os << "time " << t << " outside [0, " << t_end_ << "]";
    fail(ErrorCode::OutOfSpan, os.str());
  }
  Profile p;
  p.t = t;
  p.states.push_back(data_.left);
  FrontId id = right_neighbor(kLeftEnd, t);
  std::size_t guard = 0;
  while (id != kRightEnd) {
    if (++guard > fronts_.size()) fail(ErrorCode::CrossingOrderViolation, "adjacency history is cyclic");
    const Front& f = front(id);
    p.ids.push_back(id);
    p.x.push_back(f.position(t));
    p.states.push_back(f.wave.right);
    id = right_neighbor(id, t);
  }
  return p;
}

GridPoint Trajectory::sample(double t, double x, Side side) const { return profile(t).sample(x, side); }

// ---------------------------------------------------------------------------------------------
// Tracker

bool Tracker::Candidate::operator>(const Candidate& o) const {
  return std::tie(t, x, left, right) > std::tie(o.t, o.x, o.left, o.right);
}

Tracker::Tracker(std::shared_ptr<const SystemModel> model, GridSpec grid, InitialData data, TrackerOptions options)
    : opt_(options) {
  if (grid.nu < 1 || grid.extra_bits < 0 || grid.nu + grid.extra_bits > 30)
    fail(ErrorCode::InvalidArgument, "grid refinement out of range");
  check_breakpoints(data.breakpoints);
  require_admissible(*model, grid, data.left, "initial data");
  for (const auto& bp : data.breakpoints) require_admissible(*model, grid, bp.w, "initial data");
  traj_ = Trajectory(std::move(model), grid, std::move(data));
  merge_ = opt_.merge_window * traj_.length_scale_;

  traj_.left_end_right_.push_back({0.0, kRightEnd});
  traj_.right_end_left_.push_back({0.0, kLeftEnd});
  GridPoint prev = traj_.data_.left;
  FrontId last = kLeftEnd;
  for (const auto& bp : traj_.data_.breakpoints) {
    const WaveFan fan = solve_riemann_grid(*traj_.model_, grid, prev, bp.w);
    for (const auto& w : fan.waves) {
      const FrontId id = add_front(w, bp.x, 0.0, -1);
      link(last, id, 0.0);
      last = id;
    }
    prev = bp.w;
  }
  link(last, kRightEnd, 0.0);
  for (FrontId a = head_; a != kRightEnd && next_[static_cast<std::size_t>(a)] != kRightEnd;
       a = next_[static_cast<std::size_t>(a)])
    push_candidate(a, next_[static_cast<std::size_t>(a)]);

  mon_ = mon0_ = compute_monitors();
  const std::int64_t two_q = 2 * grid.quantum();
  bound_ = static_cast<std::uint64_t>(mon0_.count + (mon0_.tv + two_q - 1) / two_q + mon0_.q);
  budget_ = opt_.event_budget ? opt_.event_budget : 10 * bound_ + 10;
}

FrontId Tracker::add_front(const Wave& w, double x, double t, int birth_event) {
  Front f;
  f.id = static_cast<FrontId>(traj_.fronts_.size());
  f.wave = w;
  f.x0 = x;
  f.t0 = t;
  f.birth_event = birth_event;
  traj_.fronts_.push_back(std::move(f));
  traj_.right_hist_.emplace_back();
  traj_.left_hist_.emplace_back();
  prev_.push_back(kLeftEnd);
  next_.push_back(kRightEnd);
  return traj_.fronts_.back().id;
}

void Tracker::link(FrontId a, FrontId b, double t) {
  if (a == kLeftEnd)
    head_ = b;
  else
    next_[static_cast<std::size_t>(a)] = b;
  if (b == kRightEnd)
    tail_ = a;
  else
    prev_[static_cast<std::size_t>(b)] = a;
  traj_.right_hist(a).push_back({t, b});
  traj_.left_hist(b).push_back({t, a});
}

void Tracker::push_candidate(FrontId a, FrontId b) {
  if (a < 0 || b < 0) return;
  const Front& fa = traj_.front(a);
  const Front& fb = traj_.front(b);
  const double sa = fa.speed(), sb = fb.speed();
  if (!(sa > sb)) return;
  const double t_ref = std::max(fa.t0, fb.t0);
  const double gap = std::max(0.0, fb.position(t_ref) - fa.position(t_ref));
  const double t = t_ref + gap / (sa - sb);
  const double x = 0.5 * (fa.position(t) + fb.position(t));
  queue_.push({t, x, a, b});
}

bool Tracker::valid(const Candidate& c) const {
  const Front& a = traj_.front(c.left);
  const Front& b = traj_.front(c.right);
  return std::isinf(a.t_end) && std::isinf(b.t_end) && next_[static_cast<std::size_t>(c.left)] == c.right;
}

std::vector<FrontId> Tracker::ordered_fronts() const {
  std::vector<FrontId> out;
  for (FrontId a = head_; a != kRightEnd; a = next_[static_cast<std::size_t>(a)]) out.push_back(a);
  return out;
}

TrackerState Tracker::state() const {
  TrackerState s;
  s.time = time_;
  s.leftmost = traj_.data_.left;
  for (FrontId id : ordered_fronts()) s.fronts.push_back(traj_.front(id));
  s.monitors = mon_;
  return s;
}

Monitors Tracker::compute_monitors() const {
  Monitors m;
  std::array<std::int64_t, kMaxDim> left_sum{};
  const int n = traj_.model_->n();
  for (FrontId a = head_; a != kRightEnd; a = next_[static_cast<std::size_t>(a)]) {
    const Wave& w = traj_.front(a).wave;
    const std::int64_t s = std::abs(w.strength_units());
    m.tv += s;
    ++m.count;
    // Approaching pairs: a front of a higher family to the left.
    for (int f = w.family + 1; f < n; ++f) m.q += s * left_sum[static_cast<std::size_t>(f)];
    left_sum[static_cast<std::size_t>(w.family)] += s;
  }
  return m;
}

std::optional<Collision> Tracker::next_collision() const {
  while (!queue_.empty() && !valid(queue_.top())) queue_.pop();
  if (queue_.empty()) return std::nullopt;
  const Candidate& c = queue_.top();
  Collision col{c.t, c.x, {c.left, c.right}};
  auto near = [&](FrontId id) { return std::abs(traj_.front(id).position(c.t) - c.x) <= merge_; };
  for (FrontId p = prev_[static_cast<std::size_t>(c.left)]; p != kLeftEnd && near(p);
       p = prev_[static_cast<std::size_t>(p)])
    col.ids.insert(col.ids.begin(), p);
  for (FrontId q = next_[static_cast<std::size_t>(c.right)]; q != kRightEnd && near(q);
       q = next_[static_cast<std::size_t>(q)])
    col.ids.push_back(q);
  return col;
}

const InteractionRecord& Tracker::step() {
  const auto col = next_collision();
  if (!col) fail(ErrorCode::InvalidArgument, "step() called with no pending collision");
  const SystemModel& model = *traj_.model_;
  const double t = std::max(time_, col->t);
  const double x = col->x;
  const auto& ids = col->ids;
  for (std::size_t k = 0; k + 1 < ids.size(); ++k) {
    if (traj_.front(ids[k]).wave.right != traj_.front(ids[k + 1]).wave.left)
      fail(ErrorCode::CrossingOrderViolation, "adjacent fronts disagree on their common state");
  }
  const FrontId left = prev_[static_cast<std::size_t>(ids.front())];
  const FrontId right = next_[static_cast<std::size_t>(ids.back())];

  InteractionRecord rec;
  rec.index = static_cast<int>(traj_.events_.size());
  rec.t = t;
  rec.x = x;
  rec.incoming = ids;
  rec.left_state = traj_.front(ids.front()).wave.left;
  rec.right_state = traj_.front(ids.back()).wave.right;
  rec.left_neighbor = left;
  rec.right_neighbor = right;

  const WaveFan fan = solve_riemann_grid(model, traj_.grid_, rec.left_state, rec.right_state);
  for (FrontId id : ids) {
    Front& f = traj_.fronts_[static_cast<std::size_t>(id)];
    f.t_end = t;
    f.death_event = rec.index;
  }
  FrontId last = left;
  for (const auto& w : fan.waves) {
    const FrontId id = add_front(w, x, t, rec.index);
    rec.outgoing.push_back(id);
    link(last, id, t);
    last = id;
  }
  link(last, right, t);
  time_ = t;

  if ((left != kLeftEnd && traj_.front(left).position(t) > x + merge_) ||
      (right != kRightEnd && traj_.front(right).position(t) < x - merge_)) {
    std::ostringstream os;
    os << "neighbor crossed the interaction point at t = " << t << ", x = " << x;
    fail(ErrorCode::CrossingOrderViolation, os.str());
  }
  if (rec.outgoing.empty()) {
    push_candidate(left, right);
  } else {
    push_candidate(left, rec.outgoing.front());
    push_candidate(rec.outgoing.back(), right);
  }

  const Monitors before = mon_;
  mon_ = compute_monitors();
  rec.d_tv = mon_.tv - before.tv;
  rec.d_q = mon_.q - before.q;
  rec.d_count = static_cast<int>(mon_.count - before.count);
  // A variation drop is reported ahead of a count drop: shock/shard cancellations do both.
  if (rec.d_tv <= -2 * traj_.grid_.quantum())
    rec.alternative = Alternative::VariationDrop;
  else if (rec.d_count <= -1)
    rec.alternative = Alternative::CountDrop;
  else if (rec.d_q <= -1)
    rec.alternative = Alternative::PotentialDrop;

  const Vec in = jump_rate(traj_, rec.incoming);
  const Vec out = jump_rate(traj_, rec.outgoing);
  double scale = 0.0;
  for (const auto* group : {&rec.incoming, &rec.outgoing})
    for (FrontId id : *group) scale += std::abs(traj_.front(id).speed()) * traj_.front(id).wave.jump.norm();
  rec.conservation_defect = scale > 0.0 ? (in - out).norm() / scale : 0.0;

  traj_.events_.push_back(std::move(rec));
  traj_.t_end_ = std::max(traj_.t_end_, t);
  if (traj_.events_.size() > budget_) {
    std::ostringstream os;
    os << "more than " << budget_ << " interactions by t = " << t;
    fail(ErrorCode::EventBudgetExceeded, os.str());
  }
  return traj_.events_.back();
}

void Tracker::run_until(double t_final) {
  if (t_final < time_) fail(ErrorCode::InvalidArgument, "run_until: target time lies in the past");
  for (auto c = next_collision(); c && c->t <= t_final; c = next_collision()) step();
  time_ = t_final;
  traj_.t_end_ = t_final;
}

Trajectory Tracker::take_trajectory() && { return std::move(traj_); }

Trajectory run_tracker(std::shared_ptr<const SystemModel> model, const GridSpec& grid, const InitialData& data,
                       double t_final, TrackerOptions options) {
  Tracker tr(std::move(model), grid, data, options);
  tr.run_until(t_final);
  return std::move(tr).take_trajectory();
}

Vec jump_rate(const Trajectory& traj, const std::vector<FrontId>& ids) {
  Vec acc = Vec::Zero(traj.model().n());
  for (FrontId id : ids) acc += traj.front(id).speed() * traj.front(id).wave.jump;
  return acc;
}

TransversalCheck transversal_check(const Trajectory& traj, const InteractionRecord& event) {
  TransversalCheck r;
  if (event.incoming.size() != 2) return r;
  const Front& a = traj.front(event.incoming[0]);
  const Front& b = traj.front(event.incoming[1]);
  if (a.wave.family == b.wave.family) return r;
  r.transversal = true;
  const int n = traj.model().n();

  Mat in(n, 2);
  in.col(0) = a.wave.jump;
  in.col(1) = b.wave.jump;
  const Eigen::HouseholderQR<Mat> qr(in);
  const Mat q = qr.householderQ() * Mat::Identity(n, 2);
  for (FrontId id : event.outgoing) {
    const Vec& s = traj.front(id).wave.jump;
    r.span_residual = std::max(r.span_residual, (s - q * (q.transpose() * s)).norm() / s.norm());
  }

  auto identity = [&](double c) {
    Vec lhs = Vec::Zero(n), rhs = Vec::Zero(n);
    double scale = 0.0;
    for (FrontId id : event.incoming) {
      const Front& f = traj.front(id);
      lhs += (f.speed() - c) * f.wave.jump;
      scale += std::abs(f.speed() - c) * f.wave.jump.norm();
    }
    for (FrontId id : event.outgoing) {
      const Front& f = traj.front(id);
      rhs += (f.speed() - c) * f.wave.jump;
      scale += std::abs(f.speed() - c) * f.wave.jump.norm();
    }
    return scale > 0.0 ? (lhs - rhs).norm() / scale : 0.0;
  };
  const double lambda_i = a.wave.family < b.wave.family ? a.speed() : b.speed();
  const double lambda_j = a.wave.family < b.wave.family ? b.speed() : a.speed();
  r.identity_residual_i = identity(lambda_j);
  r.identity_residual_j = identity(lambda_i);
  return r;
}

Vec mass_on_window(const Trajectory& traj, double t, double a, double b) {
  const Profile p = traj.profile(t);
  const SystemModel& m = traj.model();
  Vec acc = Vec::Zero(m.n());
  double lo = a;
  for (std::size_t k = 0; k <= p.ids.size(); ++k) {
    const double hi = k < p.ids.size() ? std::clamp(p.x[k], a, b) : b;
    if (hi > lo) acc += (hi - lo) * m.to_conserved(to_w(p.states[k], traj.grid()));
    lo = std::max(lo, hi);
  }
  return acc;
}

}  // namespace wft
