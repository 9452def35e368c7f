#pragma once

#include "wft/grid.hpp"
#include "wft/model.hpp"

#include <vector>

namespace wft {

enum class WaveKind { Contact, Shock, RarefactionShard };

const char* to_string(WaveKind kind);

struct Wave {
  int family = 0;
  WaveKind kind = WaveKind::Contact;
  GridPoint left;
  GridPoint right;
  double speed = 0.0;
  Vec jump;  // u(right) - u(left)

  /// right_i - left_i in storage units.
  std::int64_t strength_units() const { return right[family] - left[family]; }
  double strength(const GridSpec& grid) const { return static_cast<double>(strength_units()) * grid.unit(); }
};

struct WaveFan {
  std::vector<Wave> waves;
  std::vector<GridPoint> states;  // omega_0 .. omega_n
};

/// omega_0 = w-, omega_i takes coordinates 1..i from w+ and the rest from w-.
std::vector<GridPoint> intermediate_states(const GridPoint& w_minus, const GridPoint& w_plus);
std::vector<Vec> intermediate_states(const Vec& w_minus, const Vec& w_plus);
/// Same, rejecting states outside the model box.
std::vector<Vec> intermediate_states(const SystemModel& model, const Vec& w_minus, const Vec& w_plus);

struct FrameVectors {
  Mat secants;  // columns v_i
  Mat r;        // columns r_i, unit, oriented toward increasing w_i
  Mat l;        // rows l^i, dual to r
};

/// Frame of the Riemann problem [w-, w+] given in Riemann coordinates.
FrameVectors frame_vectors_w(const SystemModel& model, const Vec& w_minus, const Vec& w_plus);
/// Same frame with the endpoints given as conserved states.
FrameVectors frame_vectors(const SystemModel& model, const Vec& u_minus, const Vec& u_plus);

/// Sum_{i<=j} <l^i, v> r_i; families counted from 1 so j = 0 is the zero map and j = n the identity.
Vec projection_P(const FrameVectors& frame, int j, const Vec& v);

WaveFan solve_riemann_grid(const SystemModel& model, const GridSpec& grid, const GridPoint& w_minus,
                           const GridPoint& w_plus);

}  // namespace wft
