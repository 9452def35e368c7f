#pragma once

#include "wft/grid.hpp"
#include "wft/model.hpp"
#include "wft/tracker.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace wft {

/// Engine-independent mappings so seeded data do not depend on the standard library's distributions.
double uniform01(std::mt19937_64& rng);
double uniform(std::mt19937_64& rng, double lo, double hi);
std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi);

struct RandomDataSpec {
  int jumps = 20;
  double x_min = 0.0;
  double x_max = 10.0;
  /// Largest change per coordinate and jump, in units of 2^-nu (0: anywhere in the box).
  int max_step = 0;
  /// Families allowed to vary; empty means all.
  std::vector<int> families;
  /// Return to the left state at the last breakpoint (compactly supported perturbation).
  bool equal_ends = true;
};

/// Lattice values admissible for coordinate i (GNL coordinates on 2^-nu, LD on the storage lattice).
std::vector<std::int64_t> admissible_values(const SystemModel& model, const GridSpec& grid, int i);

GridPoint random_grid_point(const SystemModel& model, const GridSpec& grid, std::mt19937_64& rng);

InitialData random_initial_data(const SystemModel& model, const GridSpec& grid, const RandomDataSpec& spec,
                                std::mt19937_64& rng);

}  // namespace wft
