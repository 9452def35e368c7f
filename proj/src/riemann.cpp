#include "wft/riemann.hpp"

#include "wft/errors.hpp"

#include <cmath>
#include <sstream>

namespace wft {

const char* to_string(WaveKind kind) {
  switch (kind) {
    case WaveKind::Contact: return "contact";
    case WaveKind::Shock: return "shock";
    case WaveKind::RarefactionShard: return "shard";
  }
  return "?";
}

std::vector<GridPoint> intermediate_states(const GridPoint& w_minus, const GridPoint& w_plus) {
  if (w_minus.n != w_plus.n) fail(ErrorCode::InvalidArgument, "intermediate_states: dimension mismatch");
  std::vector<GridPoint> out{w_minus};
  GridPoint cur = w_minus;
  for (int i = 0; i < w_minus.n; ++i) {
    cur[i] = w_plus[i];
    out.push_back(cur);
  }
  return out;
}

std::vector<Vec> intermediate_states(const Vec& w_minus, const Vec& w_plus) {
  if (w_minus.size() != w_plus.size()) fail(ErrorCode::InvalidArgument, "intermediate_states: dimension mismatch");
  std::vector<Vec> out{w_minus};
  Vec cur = w_minus;
  for (int i = 0; i < w_minus.size(); ++i) {
    cur[i] = w_plus[i];
    out.push_back(cur);
  }
  return out;
}

std::vector<Vec> intermediate_states(const SystemModel& model, const Vec& w_minus, const Vec& w_plus) {
  auto out = intermediate_states(w_minus, w_plus);
  for (const auto& w : out) model.require_w(w, "intermediate_states");
  return out;
}

FrameVectors frame_vectors_w(const SystemModel& model, const Vec& w_minus, const Vec& w_plus) {
  const int n = model.n();
  model.require_w(w_minus, "frame_vectors");
  model.require_w(w_plus, "frame_vectors");
  const auto omega = intermediate_states(w_minus, w_plus);
  FrameVectors fr{Mat::Zero(n, n), Mat::Zero(n, n), Mat::Zero(n, n)};
  Vec u_prev = model.to_conserved(omega[0]);
  for (int i = 0; i < n; ++i) {
    const Vec u_next = model.to_conserved(omega[static_cast<std::size_t>(i) + 1]);
    fr.secants.col(i) = u_next - u_prev;
    if (w_plus[i] != w_minus[i]) {
      const double norm = fr.secants.col(i).norm();
      if (!(norm > 0.0)) fail(ErrorCode::DegenerateFrame, "zero secant for a nonzero Riemann jump");
      fr.r.col(i) = (w_plus[i] > w_minus[i] ? 1.0 : -1.0) * fr.secants.col(i) / norm;
    } else {
      fr.r.col(i) = model.right_eigvec(i, u_prev);
    }
    u_prev = u_next;
  }
  const double det = fr.r.determinant();
  if (!(std::abs(det) >= 1e-8)) {
    std::ostringstream os;
    os << "frame determinant " << det << " below 1e-8";
    fail(ErrorCode::DegenerateFrame, os.str());
  }
  fr.l = fr.r.inverse();
  return fr;
}

FrameVectors frame_vectors(const SystemModel& model, const Vec& u_minus, const Vec& u_plus) {
  return frame_vectors_w(model, model.to_riemann(u_minus), model.to_riemann(u_plus));
}

Vec projection_P(const FrameVectors& frame, int j, const Vec& v) {
  const int n = static_cast<int>(frame.r.cols());
  if (j < 0 || j > n) fail(ErrorCode::InvalidArgument, "projection_P: index out of range");
  Vec out = Vec::Zero(n);
  for (int i = 0; i < j; ++i) out += frame.l.row(i).dot(v) * frame.r.col(i);
  return out;
}

WaveFan solve_riemann_grid(const SystemModel& model, const GridSpec& grid, const GridPoint& w_minus,
                           const GridPoint& w_plus) {
  require_admissible(model, grid, w_minus, "solve_riemann_grid");
  require_admissible(model, grid, w_plus, "solve_riemann_grid");
  WaveFan fan;
  fan.states = intermediate_states(w_minus, w_plus);
  const std::int64_t q = grid.quantum();
  Vec u_left = model.to_conserved(to_w(fan.states[0], grid));
  for (int i = 0; i < model.n(); ++i) {
    const GridPoint& a = fan.states[static_cast<std::size_t>(i)];
    const GridPoint& b = fan.states[static_cast<std::size_t>(i) + 1];
    const std::int64_t delta = b[i] - a[i];
    if (delta == 0) continue;
    const Vec u_right = model.to_conserved(to_w(b, grid));
    if (!model.is_gnl(i)) {
      Wave wv{i, WaveKind::Contact, a, b, model.speed_w(i, to_w(b, grid)), u_right - u_left};
      const Vec df = model.flux(u_right) - model.flux(u_left);
      const double res = (df - wv.speed * wv.jump).norm();
      if (res > model.tolerances().rh_residual * wv.jump.norm()) {
        std::ostringstream os;
        os << "contact of family " << i + 1 << " between " << a.str() << " and " << b.str()
           << " violates Rankine-Hugoniot with the characteristic speed (residual " << res << ")";
        fail(ErrorCode::RHViolation, os.str());
      }
      fan.waves.push_back(std::move(wv));
    } else if (delta < 0) {
      const double s = rankine_hugoniot_speed(model, u_left, u_right).speed;
      fan.waves.push_back(Wave{i, WaveKind::Shock, a, b, s, u_right - u_left});
    } else {
      // p_i = delta / q shards, each a jump of one 2^-nu step.
      GridPoint cur = a;
      Vec u_cur = u_left;
      for (std::int64_t k = 0; k < delta / q; ++k) {
        GridPoint nxt = cur;
        nxt[i] += q;
        const Vec u_nxt = (nxt == b) ? u_right : model.to_conserved(to_w(nxt, grid));
        const double s = rankine_hugoniot_speed(model, u_cur, u_nxt).speed;
        fan.waves.push_back(Wave{i, WaveKind::RarefactionShard, cur, nxt, s, u_nxt - u_cur});
        cur = nxt;
        u_cur = u_nxt;
      }
    }
    u_left = u_right;
  }
  return fan;
}

}  // namespace wft
