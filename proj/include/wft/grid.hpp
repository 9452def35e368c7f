#pragma once

#include "wft/model.hpp"

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>

namespace wft {

inline constexpr int kMaxDim = 4;

/// A state of E^nu stored as exact integers, one per Riemann coordinate.
struct GridPoint {
  std::array<std::int64_t, kMaxDim> c{};
  int n = 0;

  GridPoint() = default;
  explicit GridPoint(int dim) : n(dim) {}
  GridPoint(std::initializer_list<std::int64_t> values);

  std::int64_t& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  std::int64_t operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  friend bool operator==(const GridPoint& a, const GridPoint& b) { return a.n == b.n && a.c == b.c; }
  friend bool operator!=(const GridPoint& a, const GridPoint& b) { return !(a == b); }
  std::string str() const;
};

/// Refinement level nu: rarefaction shards have Riemann strength 2^-nu. Integers are stored in units
/// of 2^-(nu + extra_bits); genuinely nonlinear coordinates must stay on the coarser 2^-nu lattice,
/// linearly degenerate ones may use the finer storage lattice.
struct GridSpec {
  int nu = 3;
  int extra_bits = 0;

  double mesh() const;
  double unit() const;
  std::int64_t quantum() const { return std::int64_t{1} << extra_bits; }
};

Vec to_w(const GridPoint& p, const GridSpec& grid);

/// Exact conversion; NotOnGrid when w is not an integer multiple of the storage unit.
GridPoint grid_point(const Vec& w, const GridSpec& grid);

/// Snaps each coordinate to the nearest admissible grid value, ties toward the lower box edge.
/// Values are clamped into the box first.
GridPoint project_to_grid(const SystemModel& model, const GridSpec& grid, const Vec& w);

/// NotOnGrid / OutOfDomain checks for a stored state.
void require_admissible(const SystemModel& model, const GridSpec& grid, const GridPoint& p, const char* context);

}  // namespace wft
