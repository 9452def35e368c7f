#pragma once

#include "wft/tracker.hpp"

#include <optional>
#include <vector>

namespace wft {

inline constexpr FrontId kNoFront = -3;

struct PathVertex {
  double t = 0.0;
  double x = 0.0;
};

struct PathCrossing {
  FrontId front = kNoFront;
  double t = 0.0;
};

/// Where a path sits at its final time: inside a region bounded by two fronts, or riding a front.
struct PathSlot {
  FrontId left = kLeftEnd;
  FrontId right = kRightEnd;
  FrontId ride = kNoFront;
  Side side = Side::Right;  // side of the ridden front whose state the path carries
  GridPoint state;

  bool riding() const { return ride != kNoFront; }
};

struct CharacteristicPath {
  int family = 0;
  double y = 0.0;  // starting position (forward) or foot at t = 0 (backward)
  std::vector<PathVertex> vertices;  // in tracing order
  std::vector<PathCrossing> crossings;
  PathSlot end;

  double x_end() const { return vertices.back().x; }
  double t_end() const { return vertices.back().t; }
};

/// Forward characteristic of family i from (0, y) to time T. A start exactly on a front uses the state
/// to its right; linearly degenerate paths ride same-family contacts.
CharacteristicPath trace(const Trajectory& traj, int i, double y, double T);
/// Forward characteristic from (t0, x0).
CharacteristicPath trace_from(const Trajectory& traj, int i, double t0, double x0, double T);
/// Backward characteristic from (t, x) down to t = 0; genuinely nonlinear paths that meet a same-family
/// shard going backward ride it. The result's y is the foot.
CharacteristicPath trace_back(const Trajectory& traj, int i, double t, double x);

/// Ordering key of a path end at t = 0 relative to the time-0 fronts (ids are in spatial order):
/// a time-0 front with id b lies left of the path iff b < key.
double foot_key(const PathSlot& slot);

struct TransportSample {
  double y = 0.0;
  double x = 0.0;
  std::int64_t value = 0;  // w_i in storage units
  GridPoint state_at_x;    // the solution state the path carries at time t
};

/// Broad solution of the i-th (linearly degenerate) Riemann coordinate along traced paths.
std::vector<TransportSample> transport_ld(const Trajectory& traj, int i, const std::vector<double>& ys, double t);

struct TransportMap {
  int family = 0;
  double t = 0.0;
  std::vector<double> y;
  std::vector<double> h;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double c_hat = 0.0;  // max(max_ratio, 1 / min_ratio)
  bool monotone = true;
};

TransportMap h_map(const Trajectory& traj, int i, double t, const std::vector<double>& ys);

struct DerivativeCheck {
  double fd_slope = 0.0;
  double formula = 0.0;
  double residual = 0.0;  // relative
};

/// Finite-difference slope of y -> x_i(t, y) against the closed formula built from du/dw_i and
/// l^i(w_l, w_r). DiscontinuousAtProbe when the probe sits within the stencil of a jump.
DerivativeCheck derivative_formula_check(const Trajectory& traj, int i, double t, double y, double step = 1e-5);

struct DecayMeasure {
  double kappa_hat = 0.0;      // min gap / (tau 2^-nu) over adjacent k-shards
  double tv = 0.0;             // Tot.Var. of w_k on the window
  double sup_w = 0.0;          // max |w_k| on the window
  int adjacent_pairs = 0;
  double window_lo = 0.0;
  double window_hi = 0.0;
};

/// Positive-wave decay measurements at time tau for GNL family k. The window defaults to the span of
/// the fronts alive at tau.
DecayMeasure decay_measure(const Trajectory& traj, int k, double tau,
                           std::optional<std::pair<double, double>> window = std::nullopt);

/// Right-hand side of the total-variation bound 2(b-a)/(kappa tau) + sup|w_k| + (N+1) 2^(1-nu).
double decay_tv_bound(double b_minus_a, double kappa, double tau, double sup_w, int n_initial, int nu);

}  // namespace wft
