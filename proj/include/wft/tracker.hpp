#pragma once

#include "wft/grid.hpp"
#include "wft/model.hpp"
#include "wft/riemann.hpp"

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

namespace wft {

using FrontId = std::int32_t;
/// Pseudo-ids for the two ends of the line; they never name a real front.
inline constexpr FrontId kLeftEnd = -1;
inline constexpr FrontId kRightEnd = -2;

struct Front {
  FrontId id = 0;
  Wave wave;
  double x0 = 0.0;  // position at birth
  double t0 = 0.0;  // birth time
  double t_end = std::numeric_limits<double>::infinity();
  int birth_event = -1;  // -1: created by the initial Riemann problems
  int death_event = -1;  // -1: still alive

  double speed() const { return wave.speed; }
  double position(double t) const { return x0 + wave.speed * (t - t0); }
  bool alive_at(double t) const { return t0 <= t && t < t_end; }
};

enum class Alternative { CountDrop, VariationDrop, PotentialDrop, None };

const char* to_string(Alternative a);

struct InteractionRecord {
  int index = 0;
  double t = 0.0;
  double x = 0.0;
  std::vector<FrontId> incoming;  // left to right
  std::vector<FrontId> outgoing;  // left to right
  GridPoint left_state;
  GridPoint right_state;
  FrontId left_neighbor = kLeftEnd;
  FrontId right_neighbor = kRightEnd;
  std::int64_t d_tv = 0;  // storage units
  std::int64_t d_q = 0;   // storage units squared
  int d_count = 0;
  Alternative alternative = Alternative::None;
  double conservation_defect = 0.0;
};

struct Monitors {
  std::int64_t tv = 0;  // storage units
  std::int64_t q = 0;   // storage units squared
  std::int64_t count = 0;
};

/// One jump location; w is the state to the right of x.
struct Breakpoint {
  double x = 0.0;
  GridPoint w;
};

struct InitialData {
  GridPoint left;
  std::vector<Breakpoint> breakpoints;

  GridPoint right() const { return breakpoints.empty() ? left : breakpoints.back().w; }
};

/// Builds grid data from real-valued states; NotOnGrid when a state is off the lattice.
InitialData make_initial_data(const SystemModel& model, const GridSpec& grid, const Vec& left,
                              const std::vector<std::pair<double, Vec>>& breakpoints);

/// Snaps a real-valued step function onto E^nu (nearest grid value, ties toward the lower edge).
InitialData project_initial_data(const SystemModel& model, const GridSpec& grid, const Vec& left,
                                 const std::vector<std::pair<double, Vec>>& breakpoints);

enum class Side { Left, Right };

/// Piecewise-constant solution at one time: fronts in order and the states between them.
struct Profile {
  double t = 0.0;
  std::vector<FrontId> ids;
  std::vector<double> x;
  std::vector<GridPoint> states;  // states[k] lies left of front k; states.size() == ids.size() + 1

  GridPoint sample(double xq, Side side, double tol = 0.0) const;
};

/// Complete history of a run: every front ever created, every event, and adjacency over time.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::shared_ptr<const SystemModel> model, GridSpec grid, InitialData data);

  const SystemModel& model() const { return *model_; }
  std::shared_ptr<const SystemModel> model_ptr() const { return model_; }
  const GridSpec& grid() const { return grid_; }
  const InitialData& initial_data() const { return data_; }
  double t_end() const { return t_end_; }
  double length_scale() const { return length_scale_; }
  const GridPoint& leftmost_state() const { return data_.left; }

  const std::vector<Front>& fronts() const { return fronts_; }
  const Front& front(FrontId id) const { return fronts_.at(static_cast<std::size_t>(id)); }
  const std::vector<InteractionRecord>& events() const { return events_; }
  /// Ids of fronts born at time 0, left to right (ids are assigned in that order).
  std::vector<FrontId> initial_fronts() const;

  /// Neighbor of a front (or of an end pseudo-id) at time t.
  FrontId right_neighbor(FrontId id, double t) const;
  FrontId left_neighbor(FrontId id, double t) const;

  Profile profile(double t) const;
  /// OutOfSpan when t lies outside [0, t_end].
  GridPoint sample(double t, double x, Side side) const;

 private:
  friend class Tracker;
  using History = std::vector<std::pair<double, FrontId>>;
  History& right_hist(FrontId id);
  History& left_hist(FrontId id);
  const History& right_hist(FrontId id) const;
  const History& left_hist(FrontId id) const;

  std::shared_ptr<const SystemModel> model_;
  GridSpec grid_;
  InitialData data_;
  double t_end_ = 0.0;
  double length_scale_ = 1.0;
  std::vector<Front> fronts_;
  std::vector<InteractionRecord> events_;
  std::vector<History> right_hist_, left_hist_;
  History left_end_right_, right_end_left_;
};

struct TrackerOptions {
  double merge_window = 1e-9;  // relative to the data length scale
  /// Hard cap on events; 0 selects 10 x the analytic bound.
  std::uint64_t event_budget = 0;
};

struct Collision {
  double t = 0.0;
  double x = 0.0;
  std::vector<FrontId> ids;
};

struct TrackerState {
  double time = 0.0;
  GridPoint leftmost;
  std::vector<Front> fronts;  // alive, left to right
  Monitors monitors;
};

/// Event-driven front tracking. Single owner; the produced Trajectory is immutable.
class Tracker {
 public:
  Tracker(std::shared_ptr<const SystemModel> model, GridSpec grid, InitialData data, TrackerOptions options = {});

  double time() const { return time_; }
  const Monitors& monitors() const { return mon_; }
  const Monitors& initial_monitors() const { return mon0_; }
  std::uint64_t event_budget() const { return budget_; }
  /// Events-per-run bound from the three interaction alternatives (grid potential quantum).
  std::uint64_t analytic_event_bound() const { return bound_; }

  std::vector<FrontId> ordered_fronts() const;
  TrackerState state() const;

  std::optional<Collision> next_collision() const;
  const InteractionRecord& step();
  void run_until(double t_final);

  const Trajectory& trajectory() const { return traj_; }
  Trajectory take_trajectory() &&;

 private:
  struct Candidate {
    double t, x;
    FrontId left, right;
    bool operator>(const Candidate& o) const;
  };
  void push_candidate(FrontId a, FrontId b);
  bool valid(const Candidate& c) const;
  void link(FrontId a, FrontId b, double t);
  Monitors compute_monitors() const;
  FrontId add_front(const Wave& w, double x, double t, int birth_event);

  Trajectory traj_;
  TrackerOptions opt_;
  double merge_;
  double time_ = 0.0;
  std::vector<FrontId> prev_, next_;
  FrontId head_ = kRightEnd;
  FrontId tail_ = kLeftEnd;
  Monitors mon_, mon0_;
  std::uint64_t bound_ = 0, budget_ = 0;
  mutable std::priority_queue<Candidate, std::vector<Candidate>, std::greater<Candidate>> queue_;
};

/// Run to t_final from scratch and return the history.
Trajectory run_tracker(std::shared_ptr<const SystemModel> model, const GridSpec& grid, const InitialData& data,
                       double t_final, TrackerOptions options = {});

/// Conserved jump rate sum_alpha speed * (u_r - u_l) over the given fronts.
Vec jump_rate(const Trajectory& traj, const std::vector<FrontId>& ids);

/// Two fronts of different families crossing. Residuals are relative: the span residual is the part of
/// the outgoing jumps outside the span of the incoming ones, the identity residuals compare
/// sum sigma (Lambda - c) before and after for c = Lambda_i and c = Lambda_j.
struct TransversalCheck {
  bool transversal = false;
  double span_residual = 0.0;
  double identity_residual_i = 0.0;
  double identity_residual_j = 0.0;
};

TransversalCheck transversal_check(const Trajectory& traj, const InteractionRecord& event);

/// Integral of u(t, .) over [a, b], exact for the piecewise-constant profile.
Vec mass_on_window(const Trajectory& traj, double t, double a, double b);

}  // namespace wft
