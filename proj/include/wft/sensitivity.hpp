#pragma once

#include "wft/characteristics.hpp"
#include "wft/tracker.hpp"

#include <map>
#include <utility>
#include <vector>

namespace wft {

/// Shift rates xi (length per unit theta) of time-0 fronts; missing ids have rate 0.
struct ShiftAssignment {
  std::map<FrontId, double> rates;

  double rate(FrontId id) const;
};

/// One rate per breakpoint, applied to every front of that breakpoint's fan.
ShiftAssignment breakpoint_assignment(const Trajectory& traj, const std::vector<double>& rates);
/// Breakpoint index each time-0 front emanates from.
std::vector<std::size_t> breakpoint_of_initial_fronts(const Trajectory& traj);

struct ResolvedShifts {
  std::vector<double> rates;
  double residual = 0.0;  // |sum out - sum in| / sum |sigma xi|
};

/// Outgoing rates from sum_out xi' sigma' = sum_in xi sigma (least squares). DependentOutgoing when the
/// outgoing jumps are not linearly independent.
ResolvedShifts resolve_interaction_shifts(const std::vector<Vec>& in_jumps, const std::vector<double>& in_rates,
                                          const std::vector<Vec>& out_jumps);

/// Post-interaction rates (sheaf, single front) when a sheaf of parallel contacts with common rate xi_bar
/// and speed lambda_bar meets one front of another family; denominator (lambda_bar - lambda), fixed
/// by the rigid translation. ParallelSpeeds when lambda == lambda_bar.
std::pair<double, double> sheaf_interaction_shifts(double xi_bar, double xi, double lambda_bar, double lambda,
                                                   double lambda_bar_after, double lambda_after);

/// Rate of every front (indexed by id), propagated through the event log.
std::vector<double> chained_shifts(const Trajectory& traj, const ShiftAssignment& assignment);

/// Backward-characteristic data of a probe point.
struct ShiftContext {
  double t = 0.0;
  double x = 0.0;
  GridPoint w;                    // u(t, x)
  std::vector<double> feet;       // x_1 .. x_n
  std::vector<double> foot_keys;  // ordering keys relative to the time-0 fronts
};

/// ProbeOnFront / ProbeAtInteractionTime when u(t, .) is not continuous at x or t is an event time.
ShiftContext shift_context(const Trajectory& traj, double t, double x);
/// Index j(y) in 1..n+1 of a time-0 front relative to the feet.
int shift_index(const ShiftContext& ctx, FrontId beta);
/// P(x, y_beta) for the time-0 front beta.
Vec shift_vector_P(const Trajectory& traj, const ShiftContext& ctx, FrontId beta);
Vec shift_vector_P(const Trajectory& traj, double t, double x, FrontId beta);

/// Piecewise constant x -> v(t, x): v[k] holds left of x[k], v.back() right of all fronts.
struct IntegralShift {
  double t = 0.0;
  std::vector<double> x;
  std::vector<Vec> v;

  Vec at(double xq) const;
};

/// Integral shift from the projection formula, summed over the time-0 fronts.
IntegralShift integral_shift(const Trajectory& traj, double t, const ShiftAssignment& assignment);
/// Integral shift as the running sum of sigma_beta xi_beta with chained rates.
IntegralShift chained_integral_shift(const Trajectory& traj, double t, const std::vector<double>& rates);

/// Piecewise linear finite-difference integral shift, -(1/theta) int_{-inf}^x (u^theta - u).
struct FdIntegralShift {
  double t = 0.0;
  double theta = 0.0;
  std::vector<double> x;  // knots
  std::vector<Vec> v;     // values at knots, constant outside

  Vec at(double xq) const;
};

/// Tracker rerun from the shifted data. EventReorder when the shift changes the interaction pattern up
/// to time t (or the initial order).
Trajectory shifted_run(const Trajectory& traj, const ShiftAssignment& assignment, double theta, double t);
FdIntegralShift fd_integral_shift(const Trajectory& traj, const ShiftAssignment& assignment, double t, double theta);

/// Sum over components of the exact L1 distance.
double l1_distance(const IntegralShift& v, const FdIntegralShift& f);
double l1_norm(const FdIntegralShift& f);
/// Integral of |f| (summed over components) outside [lo, hi].
double l1_outside(const FdIntegralShift& f, double lo, double hi);

/// True iff the strengths sum to zero in grid integers. MixedFamilies unless all fronts are contacts of
/// one linearly degenerate family.
bool check_involution(const Trajectory& traj, const std::vector<FrontId>& ids);

/// Rates of the time-0 fronts keeping the shift inside the strip between the first and last front of
/// an involutive set of time-0 contacts of family i (first rate 1).
ShiftAssignment involution_shift_assignment(const Trajectory& traj, int i, const std::vector<FrontId>& ids, double T);

/// Front carrying the same-family wave of `id` at time t, following deaths through events.
FrontId descendant(const Trajectory& traj, FrontId id, double t);

struct ShiftOdeCheck {
  double measured = 0.0;
  double bound = 0.0;
  double d_hat = 0.0;
  double weight = 0.0;  // sum |sigma xi|
};

/// Model constant bounding the characteristic displacement per unit |sigma xi| of a crossed front:
/// twice the largest |d lambda_i / d w_k| / (|du/dw_k| |lambda_i - lambda_k|) over samples of the box.
double estimate_shift_constant(const SystemModel& model, int i, int samples = 64);

ShiftOdeCheck shift_ode_bound_check(const Trajectory& traj, int i, double y, const ShiftAssignment& assignment,
                                    double t, double theta, double d_hat);

}  // namespace wft
