#include "wft/grid.hpp"

#include "wft/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wft {

GridPoint::GridPoint(std::initializer_list<std::int64_t> values) : n(static_cast<int>(values.size())) {
  if (values.size() > kMaxDim) fail(ErrorCode::InvalidArgument, "grid point dimension exceeds 4");
  std::size_t k = 0;
  for (auto v : values) c[k++] = v;
}

std::string GridPoint::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < n; ++i) os << (i ? "," : "") << c[static_cast<std::size_t>(i)];
  os << ')';
  return os.str();
}

double GridSpec::mesh() const { return std::ldexp(1.0, -nu); }
double GridSpec::unit() const { return std::ldexp(1.0, -(nu + extra_bits)); }

Vec to_w(const GridPoint& p, const GridSpec& grid) {
  Vec w(p.n);
  const double u = grid.unit();
  for (int i = 0; i < p.n; ++i) w[i] = static_cast<double>(p[i]) * u;
  return w;
}

GridPoint grid_point(const Vec& w, const GridSpec& grid) {
  if (w.size() > kMaxDim) fail(ErrorCode::InvalidArgument, "state dimension exceeds 4");
  GridPoint p(static_cast<int>(w.size()));
  const int e = grid.nu + grid.extra_bits;
  for (int i = 0; i < p.n; ++i) {
    const double scaled = std::ldexp(w[i], e);
    const double r = std::nearbyint(scaled);
    if (r != scaled || !std::isfinite(scaled)) {
      std::ostringstream os;
      os << "w_" << i + 1 << " = " << w[i] << " is not a multiple of 2^-" << e;
      fail(ErrorCode::NotOnGrid, os.str());
    }
    p[i] = static_cast<std::int64_t>(r);
  }
  return p;
}

GridPoint project_to_grid(const SystemModel& model, const GridSpec& grid, const Vec& w) {
  GridPoint p(model.n());
  for (int i = 0; i < model.n(); ++i) {
    const auto& iv = model.box()[static_cast<std::size_t>(i)];
    const int e = model.is_gnl(i) ? grid.nu : grid.nu + grid.extra_bits;
    const double step = std::ldexp(1.0, -e);
    const double lo_k = std::ceil(iv.lo / step - 1e-9);
    const double hi_k = std::floor(iv.hi / step + 1e-9);
    const double x = std::clamp(w[i], iv.lo, iv.hi) / step;
    double k = std::floor(x);
    if (x - k > 0.5) k += 1.0;  // exact half goes down, toward the lower edge
    k = std::clamp(k, lo_k, hi_k);
    const std::int64_t mult = model.is_gnl(i) ? grid.quantum() : 1;
    p[i] = static_cast<std::int64_t>(k) * mult;
  }
  return p;
}

void require_admissible(const SystemModel& model, const GridSpec& grid, const GridPoint& p, const char* context) {
  if (p.n != model.n()) fail(ErrorCode::InvalidArgument, std::string(context) + ": state dimension mismatch");
  for (int i = 0; i < p.n; ++i) {
    if (model.is_gnl(i) && p[i] % grid.quantum() != 0)
      fail(ErrorCode::NotOnGrid, std::string(context) + ": genuinely nonlinear coordinate off the 2^-nu lattice " + p.str());
  }
  model.require_w(to_w(p, grid), context);
}

}  // namespace wft
