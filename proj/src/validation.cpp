#include "wft/errors.hpp"
#include "wft/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wft {

namespace {

RankineHugoniot rh_least_squares(const SystemModel& model, const Vec& um, const Vec& up) {
  const Vec du = up - um;
  const double norm = du.norm();
  if (norm < model.tolerances().jump_floor) fail(ErrorCode::NotAJump, "states coincide");
  const Vec df = model.flux(up) - model.flux(um);
  RankineHugoniot rh;
  rh.speed = df.dot(du) / du.squaredNorm();
  rh.residual = (df - rh.speed * du).norm();
  rh.relative_residual = rh.residual / norm;
  return rh;
}

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  for (int i = index; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

Mat fd_flux_jacobian(const SystemModel& model, const Vec& u) {
  const int n = model.n();
  Mat j(n, n);
  for (int k = 0; k < n; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(u[k]));
    Vec a = u, b = u;
    a[k] += h;
    b[k] -= h;
    j.col(k) = (model.flux(a) - model.flux(b)) / (2.0 * h);
  }
  return j;
}

// Directional derivative of lambda_i along r_i.
double gnl_derivative(const SystemModel& model, int i, const Vec& u) {
  const Vec r = model.right_eigvec(i, u);
  const double h = 1e-6 * std::max(1.0, u.norm());
  return (model.eigenvalue(i, u + h * r) - model.eigenvalue(i, u - h * r)) / (2.0 * h);
}

struct CurveStats {
  double drift = 0.0;
  double rh = 0.0;
  double ld = 0.0;
};

// Integrates du/ds = s_i r_i(u) with classical RK4 until w_i has moved a quarter of the box width.
CurveStats integrate_curve(const SystemModel& model, int i, const Vec& w0) {
  const auto& box = model.box();
  const int n = model.n();
  const Interval iv = box[static_cast<std::size_t>(i)];
  const double span = 0.25 * iv.width();
  const double dir = (w0[i] + span <= iv.hi) ? 1.0 : -1.0;
  const double target = w0[i] + dir * span;
  const Vec u0 = model.to_conserved(w0);

  // Estimate dw_i/ds to size the steps and fix the orientation of r_i.
  const Vec r0 = model.right_eigvec(i, u0);
  const double probe = 1e-7 * std::max(1.0, u0.norm());
  const double rate = (model.to_riemann(u0 + probe * r0)[i] - model.to_riemann(u0 - probe * r0)[i]) / (2.0 * probe);
  if (!(std::abs(rate) > 0.0))
    fail(ErrorCode::ValidationFailed, "eigenvector r_" + std::to_string(i + 1) + " does not move w_" + std::to_string(i + 1));
  const double sgn = dir * (rate > 0 ? 1.0 : -1.0);
  constexpr int kSteps = 400;
  const double h = span / std::abs(rate) / kSteps;

  auto field = [&](const Vec& u) -> Vec { return sgn * model.right_eigvec(i, u); };
  const double lambda0 = model.eigenvalue(i, u0);
  CurveStats st;
  Vec u = u0;
  for (int step = 1; step <= 4 * kSteps; ++step) {
    Vec wprev = model.to_riemann(u);
    double hh = h;
    const Vec k1 = field(u);
    const Vec k2 = field(u + 0.5 * hh * k1);
    const Vec k3 = field(u + 0.5 * hh * k2);
    const Vec k4 = field(u + hh * k3);
    Vec next = u + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    Vec w = model.to_riemann(next);
    if (!model.contains_w(w)) {
      // Only the final step may overshoot the target in w_i; anything else escaped the domain.
      if ((w[i] - target) * dir <= 0.0 || !std::isfinite(w.norm())) {
        std::ostringstream os;
        os << "family " << i + 1 << " curve from w = (" << w0.transpose() << ") left the domain";
        fail(ErrorCode::CurveEscapesDomain, os.str());
      }
    }
    bool last = (w[i] - target) * dir >= 0.0;
    if (last) {
      // Shorten the final step so the endpoint sits on the target (linear correction is enough).
      const double frac = (target - wprev[i]) / (w[i] - wprev[i]);
      hh = h * std::clamp(frac, 0.0, 1.0);
      const Vec q1 = field(u);
      const Vec q2 = field(u + 0.5 * hh * q1);
      const Vec q3 = field(u + 0.5 * hh * q2);
      const Vec q4 = field(u + hh * q3);
      next = u + hh / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4);
      w = model.to_riemann(next);
    }
    u = next;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double width = box[static_cast<std::size_t>(j)].width();
      st.drift = std::max(st.drift, std::abs(w[j] - w0[j]) / width);
    }
    if (!model.is_gnl(i))
      st.ld = std::max(st.ld, std::abs(model.eigenvalue(i, u) - lambda0) / std::max(1.0, std::abs(lambda0)));
    if (last || step % (kSteps / 4) == 0) {
      if ((u - u0).norm() >= model.tolerances().jump_floor)
        st.rh = std::max(st.rh, rh_least_squares(model, u0, u).relative_residual);
    }
    if (last) return st;
  }
  fail(ErrorCode::ValidationFailed, "family " + std::to_string(i + 1) + " curve integration did not reach its target");
}

}  // namespace

RankineHugoniot rankine_hugoniot_speed(const SystemModel& model, const Vec& u_minus, const Vec& u_plus) {
  if ((u_plus - u_minus).norm() < model.tolerances().jump_floor) fail(ErrorCode::NotAJump, "|u+ - u-| below 1e-14");
  model.require_w(model.to_riemann(u_minus), "rankine_hugoniot_speed");
  model.require_w(model.to_riemann(u_plus), "rankine_hugoniot_speed");
  RankineHugoniot rh = rh_least_squares(model, u_minus, u_plus);
  if (rh.relative_residual > model.tolerances().rh_residual) {
    std::ostringstream os;
    os << "relative residual " << rh.relative_residual << " exceeds " << model.tolerances().rh_residual;
    fail(ErrorCode::RHViolation, os.str());
  }
  return rh;
}

std::vector<Vec> sample_box(const std::vector<Interval>& box, int count) {
  static constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13};
  const int n = static_cast<int>(box.size());
  std::vector<Vec> out;
  const int corners = 1 << n;
  for (int c = 0; c < corners && static_cast<int>(out.size()) < count; ++c) {
    Vec w(n);
    for (int i = 0; i < n; ++i) w[i] = (c >> i & 1) ? box[static_cast<std::size_t>(i)].hi : box[static_cast<std::size_t>(i)].lo;
    out.push_back(w);
  }
  for (int k = 1; static_cast<int>(out.size()) < count; ++k) {
    Vec w(n);
    for (int i = 0; i < n; ++i) {
      const auto& iv = box[static_cast<std::size_t>(i)];
      w[i] = iv.lo + halton(k, kPrimes[i]) * iv.width();
    }
    out.push_back(w);
  }
  return out;
}

bool ValidationReport::accepted() const { return first_failure() == nullptr; }

const CheckResult* ValidationReport::first_failure() const {
  for (const auto& c : checks)
    if (!c.passed) return &c;
  return nullptr;
}

ValidationReport inspect_model(const SystemModel& model, int sample_count) {
  if (sample_count <= 0) fail(ErrorCode::InvalidArgument, "sample_count must be positive");
  const int n = model.n();
  const auto& tol = model.tolerances();
  ValidationReport rep;
  const auto samples = sample_box(model.box(), sample_count);
  rep.samples = static_cast<int>(samples.size());

  std::vector<double> lam_min(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<double> lam_max(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());
  double c_min = std::numeric_limits<double>::infinity();
  bool any_gnl = false;

  for (const Vec& w : samples) {
    const Vec u = model.to_conserved(w);
    rep.max_roundtrip_error =
        std::max(rep.max_roundtrip_error, (model.to_conserved(model.to_riemann(u)) - u).norm() / std::max(1.0, u.norm()));
    const Mat df = fd_flux_jacobian(model, u);
    for (int i = 0; i < n; ++i) {
      const Vec r = model.right_eigvec(i, u);
      const Vec l = model.left_eigvec(i, u);
      const double lam = model.eigenvalue(i, u);
      lam_min[static_cast<std::size_t>(i)] = std::min(lam_min[static_cast<std::size_t>(i)], lam);
      lam_max[static_cast<std::size_t>(i)] = std::max(lam_max[static_cast<std::size_t>(i)], lam);
      for (int j = 0; j < n; ++j) {
        const double dot = model.left_eigvec(j, u).dot(model.right_eigvec(i, u));
        rep.max_biorthogonality_error = std::max(rep.max_biorthogonality_error, std::abs(dot - (i == j ? 1.0 : 0.0)));
      }
      const double scale = 1.0 + std::abs(lam);
      rep.max_eigen_residual = std::max(rep.max_eigen_residual, (df * r - lam * r).norm() / scale);
      rep.max_eigen_residual =
          std::max(rep.max_eigen_residual, (df.transpose() * l - lam * l).norm() / (scale * std::max(1.0, l.norm())));
      if (model.is_gnl(i)) {
        any_gnl = true;
        c_min = std::min(c_min, gnl_derivative(model, i, u));
      }
    }
  }

  rep.gap_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < n; ++i)
    rep.gap_d = std::min(rep.gap_d, lam_min[static_cast<std::size_t>(i + 1)] - lam_max[static_cast<std::size_t>(i)]);
  if (any_gnl) rep.gnl_c = c_min;

  for (int i = 0; i < n; ++i) {
    for (const Vec& w : samples) {
      const CurveStats st = integrate_curve(model, i, w);
      rep.max_curve_drift = std::max(rep.max_curve_drift, st.drift);
      rep.max_rh_residual = std::max(rep.max_rh_residual, st.rh);
      rep.max_ld_speed_variation = std::max(rep.max_ld_speed_variation, st.ld);
    }
  }

  auto add = [&](const char* name, double measured, double limit, bool pass) {
    rep.checks.push_back({name, pass, measured, limit});
  };
  add("chart roundtrip", rep.max_roundtrip_error, tol.roundtrip, rep.max_roundtrip_error <= tol.roundtrip);
  add("biorthogonality", rep.max_biorthogonality_error, tol.biorthogonality,
      rep.max_biorthogonality_error <= tol.biorthogonality);
  add("eigen residual", rep.max_eigen_residual, tol.eigen_residual, rep.max_eigen_residual <= tol.eigen_residual);
  add("strict hyperbolicity", rep.gap_d, 0.0, rep.gap_d > 0.0);
  if (any_gnl) add("genuine nonlinearity", c_min, 0.0, c_min > 0.0);
  add("curve drift", rep.max_curve_drift, tol.curve_drift, rep.max_curve_drift <= tol.curve_drift);
  add("rankine-hugoniot along curves", rep.max_rh_residual, tol.rh_residual, rep.max_rh_residual <= tol.rh_residual);
  add("linear degeneracy", rep.max_ld_speed_variation, tol.ld_speed, rep.max_ld_speed_variation <= tol.ld_speed);
  return rep;
}

ValidationReport validate_model(const SystemModel& model, int sample_count) {
  ValidationReport rep = inspect_model(model, sample_count);
  if (const CheckResult* bad = rep.first_failure()) {
    std::ostringstream os;
    os << bad->name << " (measured " << bad->measured << ", limit " << bad->tolerance << ") for model '" << model.name()
       << "'";
    fail(ErrorCode::ValidationFailed, os.str());
  }
  return rep;
}

}  // namespace wft
