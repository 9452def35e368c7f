#pragma once

#include "wft/model.hpp"
#include "wft/random.hpp"
#include "wft/tracker.hpp"

#include <memory>

namespace wft::testing {

inline Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline std::shared_ptr<const SystemModel> shared_model(const std::string& name, const ModelParams& p = {}) {
  return std::make_shared<const SystemModel>(make_builtin_model(name, p));
}

inline RandomDataSpec random_spec(int jumps, double x_min, double x_max) {
  RandomDataSpec s;
  s.jumps = jumps;
  s.x_min = x_min;
  s.x_max = x_max;
  return s;
}

/// Brute-force interaction potential over all front pairs of a profile (storage units squared).
inline std::int64_t brute_force_q(const Trajectory& traj, const Profile& p) {
  std::int64_t q = 0;
  for (std::size_t a = 0; a < p.ids.size(); ++a)
    for (std::size_t b = a + 1; b < p.ids.size(); ++b) {
      const Wave& wa = traj.front(p.ids[a]).wave;
      const Wave& wb = traj.front(p.ids[b]).wave;
      if (wa.family > wb.family) q += std::abs(wa.strength_units()) * std::abs(wb.strength_units());
    }
  return q;
}

}  // namespace wft::testing
