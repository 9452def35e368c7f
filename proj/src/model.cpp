#include "wft/model.hpp"

#include "wft/errors.hpp"

#include <cmath>
#include <sstream>

namespace wft {

SystemModel::SystemModel(std::string name, std::vector<FieldKind> kinds, std::vector<Interval> box,
                         ModelCallbacks callbacks, ModelTolerances tolerances)
    : name_(std::move(name)),
      kinds_(std::move(kinds)),
      box_(std::move(box)),
      cb_(std::move(callbacks)),
      tol_(tolerances) {
  if (kinds_.empty() || kinds_.size() != box_.size())
    fail(ErrorCode::InvalidArgument, "model '" + name_ + "': field kinds and box disagree in size");
  if (kinds_.size() > 4) fail(ErrorCode::InvalidArgument, "model '" + name_ + "': at most 4 families supported");
  for (const auto& iv : box_)
    if (!(iv.hi > iv.lo)) fail(ErrorCode::InvalidArgument, "model '" + name_ + "': empty box interval");
  if (!cb_.flux || !cb_.eigenvalue || !cb_.right_eigvec || !cb_.left_eigvec || !cb_.to_riemann ||
      !cb_.to_conserved || !cb_.chart_jacobian)
    fail(ErrorCode::InvalidArgument, "model '" + name_ + "': missing callback");
}

double SystemModel::speed_w(int i, const Vec& w) const {
  if (cb_.speed_w) return cb_.speed_w(i, w);
  return cb_.eigenvalue(i, cb_.to_conserved(w));
}

bool SystemModel::contains_w(const Vec& w) const {
  if (w.size() != n()) return false;
  for (int i = 0; i < n(); ++i) {
    const auto& iv = box_[static_cast<std::size_t>(i)];
    double pad = tol_.domain_inflation * std::max(1.0, iv.width());
    if (!(w[i] >= iv.lo - pad && w[i] <= iv.hi + pad)) return false;
  }
  return true;
}

void SystemModel::require_w(const Vec& w, const char* context) const {
  if (!contains_w(w)) {
    std::ostringstream os;
    os << context << ": state w = (" << w.transpose() << ") outside the domain of model '" << name_ << "'";
    fail(ErrorCode::OutOfDomain, os.str());
  }
}

SystemModel chart_model(std::string name, std::vector<FieldKind> kinds, std::vector<Interval> box, ChartSpec spec,
                        ModelTolerances tolerances) {
  auto basis = [jac = spec.chart_jacobian](const Vec& w) {
    Mat r = jac(w);
    for (int i = 0; i < r.cols(); ++i) r.col(i).normalize();
    return r;
  };
  ModelCallbacks cb;
  cb.flux = spec.flux;
  cb.to_riemann = spec.to_riemann;
  cb.to_conserved = spec.to_conserved;
  cb.chart_jacobian = spec.chart_jacobian;
  cb.speed_w = spec.speed_w;
  cb.eigenvalue = [speed = spec.speed_w, chart = spec.to_riemann](int i, const Vec& u) { return speed(i, chart(u)); };
  cb.right_eigvec = [basis, chart = spec.to_riemann](int i, const Vec& u) -> Vec { return basis(chart(u)).col(i); };
  cb.left_eigvec = [basis, chart = spec.to_riemann](int i, const Vec& u) -> Vec {
    return basis(chart(u)).inverse().row(i).transpose();
  };
  return SystemModel(std::move(name), std::move(kinds), std::move(box), std::move(cb), tolerances);
}

namespace {

double param(const ModelParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void reject_unknown(const std::string& model, const ModelParams& p, std::initializer_list<const char*> known) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* kk : known) ok = ok || k == kk;
    if (!ok) fail(ErrorCode::InvalidArgument, "model '" + model + "' has no parameter '" + k + "'");
  }
}

std::vector<Interval> read_box(const ModelParams& p, Interval b1, Interval b2) {
  return {{param(p, "w1_min", b1.lo), param(p, "w1_max", b1.hi)}, {param(p, "w2_min", b2.lo), param(p, "w2_max", b2.hi)}};
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// f = (u1^2/2, a u2), w = u.
SystemModel decoupled(const ModelParams& p) {
  reject_unknown("decoupled", p, {"a", "w1_min", "w1_max", "w2_min", "w2_max"});
  const double a = param(p, "a", 5.0);
  ChartSpec s;
  s.flux = [a](const Vec& u) { return vec2(0.5 * u[0] * u[0], a * u[1]); };
  s.to_riemann = [](const Vec& u) { return u; };
  s.to_conserved = [](const Vec& w) { return w; };
  s.chart_jacobian = [](const Vec&) -> Mat { return Mat::Identity(2, 2); };
  s.speed_w = [a](int i, const Vec& w) { return i == 0 ? w[0] : a; };
  return chart_model("decoupled", {FieldKind::GenuinelyNonlinear, FieldKind::LinearlyDegenerate},
                     read_box(p, {0.0, 1.0}, {0.0, 1.0}), std::move(s));
}

// Aw-Rascle with p(rho) = rho^gamma. u = (rho, y), y = rho (v + p).
// w1 = v (GNL family, lambda1 = v - rho p'), w2 = v + p (LD family, lambda2 = v).
SystemModel aw_rascle(const ModelParams& p) {
  reject_unknown("aw-rascle", p, {"gamma", "w1_min", "w1_max", "w2_min", "w2_max"});
  const double g = param(p, "gamma", 1.0);
  if (!(g > 0.0)) fail(ErrorCode::InvalidArgument, "aw-rascle: gamma must be positive");
  ChartSpec s;
  s.flux = [g](const Vec& u) {
    const double rho = u[0], y = u[1];
    const double v = y / rho - std::pow(rho, g);
    return vec2(rho * v, y * v);
  };
  s.to_riemann = [g](const Vec& u) {
    const double w2 = u[1] / u[0];
    return vec2(w2 - std::pow(u[0], g), w2);
  };
  s.to_conserved = [g](const Vec& w) {
    const double rho = std::pow(w[1] - w[0], 1.0 / g);
    return vec2(rho, w[1] * rho);
  };
  s.chart_jacobian = [g](const Vec& w) -> Mat {
    const double q = w[1] - w[0];
    const double rho = std::pow(q, 1.0 / g);
    const double drho = rho / (g * q);
    Mat j(2, 2);
    j << -drho, drho, -w[1] * drho, rho + w[1] * drho;
    return j;
  };
  s.speed_w = [g](int i, const Vec& w) { return i == 0 ? w[0] - g * (w[1] - w[0]) : w[0]; };
  return chart_model("aw-rascle", {FieldKind::GenuinelyNonlinear, FieldKind::LinearlyDegenerate},
                     read_box(p, {0.0, 1.0}, {3.0, 4.0}), std::move(s));
}

// Chaplygin gas p = -A/rho: both fields linearly degenerate.
// w1 = v + c/rho = lambda2, w2 = v - c/rho = lambda1, c = sqrt(A).
SystemModel ld_ld(const ModelParams& p) {
  reject_unknown("ld-ld", p, {"A", "w1_min", "w1_max", "w2_min", "w2_max"});
  const double A = param(p, "A", 1.0);
  if (!(A > 0.0)) fail(ErrorCode::InvalidArgument, "ld-ld: A must be positive");
  const double c = std::sqrt(A);
  ChartSpec s;
  s.flux = [A](const Vec& u) { return vec2(u[1], u[1] * u[1] / u[0] - A / u[0]); };
  s.to_riemann = [c](const Vec& u) {
    const double v = u[1] / u[0];
    return vec2(v + c / u[0], v - c / u[0]);
  };
  s.to_conserved = [c](const Vec& w) {
    const double d = w[0] - w[1];
    return vec2(2.0 * c / d, c * (w[0] + w[1]) / d);
  };
  s.chart_jacobian = [c](const Vec& w) -> Mat {
    const double d = w[0] - w[1];
    const double k = 2.0 * c / (d * d);
    Mat j(2, 2);
    j << -k, k, -k * w[1], k * w[0];
    return j;
  };
  s.speed_w = [](int i, const Vec& w) { return i == 0 ? w[1] : w[0]; };
  return chart_model("ld-ld", {FieldKind::LinearlyDegenerate, FieldKind::LinearlyDegenerate},
                     read_box(p, {2.0, 3.0}, {0.0, 1.0}), std::move(s));
}

}  // namespace

std::vector<std::string> builtin_model_names() { return {"decoupled", "aw-rascle", "ld-ld"}; }

SystemModel make_builtin_model(const std::string& name, const ModelParams& params) {
  if (name == "decoupled") return decoupled(params);
  if (name == "aw-rascle") return aw_rascle(params);
  if (name == "ld-ld") return ld_ld(params);
  fail(ErrorCode::CatalogMiss, "no built-in model named '" + name + "'");
}

}  // namespace wft
