#include "wft/random.hpp"

#include "wft/errors.hpp"

#include <algorithm>
#include <cmath>

namespace wft {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  if (hi < lo) fail(ErrorCode::InvalidArgument, "uniform_int: empty range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(rng() % span);
}

std::vector<std::int64_t> admissible_values(const SystemModel& model, const GridSpec& grid, int i) {
  const auto& iv = model.box()[static_cast<std::size_t>(i)];
  const int e = model.is_gnl(i) ? grid.nu : grid.nu + grid.extra_bits;
  const std::int64_t mult = model.is_gnl(i) ? grid.quantum() : 1;
  const auto lo = static_cast<std::int64_t>(std::ceil(std::ldexp(iv.lo, e) - 1e-9));
  const auto hi = static_cast<std::int64_t>(std::floor(std::ldexp(iv.hi, e) + 1e-9));
  std::vector<std::int64_t> out;
  for (std::int64_t k = lo; k <= hi; ++k) out.push_back(k * mult);
  return out;
}

GridPoint random_grid_point(const SystemModel& model, const GridSpec& grid, std::mt19937_64& rng) {
  GridPoint p(model.n());
  for (int i = 0; i < model.n(); ++i) {
    const auto vals = admissible_values(model, grid, i);
    p[i] = vals[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(vals.size()) - 1))];
  }
  return p;
}

InitialData random_initial_data(const SystemModel& model, const GridSpec& grid, const RandomDataSpec& spec,
                                std::mt19937_64& rng) {
  if (spec.jumps < 0) fail(ErrorCode::InvalidArgument, "random data: negative jump count");
  InitialData d;
  d.left = random_grid_point(model, grid, rng);
  std::vector<double> xs;
  for (int k = 0; k < spec.jumps; ++k) xs.push_back(uniform(rng, spec.x_min, spec.x_max));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<bool> varies(static_cast<std::size_t>(model.n()), spec.families.empty());
  for (int f : spec.families) varies.at(static_cast<std::size_t>(f)) = true;

  GridPoint cur = d.left;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    GridPoint next = cur;
    const bool last = spec.equal_ends && k + 1 == xs.size();
    if (last) {
      next = d.left;
    } else {
      for (int i = 0; i < model.n(); ++i) {
        if (!varies[static_cast<std::size_t>(i)]) continue;
        const auto vals = admissible_values(model, grid, i);
        const auto pos = static_cast<std::int64_t>(std::find(vals.begin(), vals.end(), cur[i]) - vals.begin());
        std::int64_t lo = 0, hi = static_cast<std::int64_t>(vals.size()) - 1;
        if (spec.max_step > 0) {
          const std::int64_t reach = spec.max_step * (model.is_gnl(i) ? 1 : grid.quantum());
          lo = std::max(lo, pos - reach);
          hi = std::min(hi, pos + reach);
        }
        next[i] = vals[static_cast<std::size_t>(uniform_int(rng, lo, hi))];
      }
    }
    d.breakpoints.push_back({xs[k], next});
    cur = next;
  }
  return d;
}

}  // namespace wft
