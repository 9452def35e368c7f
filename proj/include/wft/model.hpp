#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wft {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class FieldKind { GenuinelyNonlinear, LinearlyDegenerate };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

/// Numerical tolerances attached to a model. Defaults follow the library contract.
struct ModelTolerances {
  double biorthogonality = 1e-10;
  double roundtrip = 1e-10;
  double curve_drift = 1e-8;
  double rh_residual = 1e-7;
  double ld_speed = 1e-8;
  double eigen_residual = 1e-6;
  double domain_inflation = 1e-9;
  double jump_floor = 1e-14;
};

/// Callback bundle describing a hyperbolic system with a global chart of Riemann coordinates.
/// Families are indexed from 0. Right eigenvectors are unit vectors oriented toward increasing w_i;
/// left eigenvectors are the dual rows.
struct ModelCallbacks {
  std::function<Vec(const Vec& u)> flux;
  std::function<double(int i, const Vec& u)> eigenvalue;
  std::function<Vec(int i, const Vec& u)> right_eigvec;
  std::function<Vec(int i, const Vec& u)> left_eigvec;
  std::function<Vec(const Vec& u)> to_riemann;
  std::function<Vec(const Vec& w)> to_conserved;
  /// Columns are du/dw_i evaluated at w.
  std::function<Mat(const Vec& w)> chart_jacobian;
  /// Optional shortcut for lambda_i as a function of w; composed from the chart when empty.
  std::function<double(int i, const Vec& w)> speed_w;
};

class SystemModel {
 public:
  SystemModel(std::string name, std::vector<FieldKind> kinds, std::vector<Interval> box,
              ModelCallbacks callbacks, ModelTolerances tolerances = {});

  const std::string& name() const { return name_; }
  int n() const { return static_cast<int>(kinds_.size()); }
  FieldKind kind(int i) const { return kinds_.at(static_cast<std::size_t>(i)); }
  bool is_gnl(int i) const { return kind(i) == FieldKind::GenuinelyNonlinear; }
  const std::vector<FieldKind>& kinds() const { return kinds_; }
  const std::vector<Interval>& box() const { return box_; }
  const ModelTolerances& tolerances() const { return tol_; }
  const ModelCallbacks& callbacks() const { return cb_; }

  Vec flux(const Vec& u) const { return cb_.flux(u); }
  double eigenvalue(int i, const Vec& u) const { return cb_.eigenvalue(i, u); }
  Vec right_eigvec(int i, const Vec& u) const { return cb_.right_eigvec(i, u); }
  Vec left_eigvec(int i, const Vec& u) const { return cb_.left_eigvec(i, u); }
  Vec to_riemann(const Vec& u) const { return cb_.to_riemann(u); }
  Vec to_conserved(const Vec& w) const { return cb_.to_conserved(w); }
  Mat chart_jacobian(const Vec& w) const { return cb_.chart_jacobian(w); }
  double speed_w(int i, const Vec& w) const;

  /// Membership in the box E inflated by the domain tolerance (relative to each width).
  bool contains_w(const Vec& w) const;
  void require_w(const Vec& w, const char* context) const;

 private:
  std::string name_;
  std::vector<FieldKind> kinds_;
  std::vector<Interval> box_;
  ModelCallbacks cb_;
  ModelTolerances tol_;
};

/// Pieces needed to build a model from a closed-form chart. Eigen data are derived from the
/// chart Jacobian: r_i is the normalized i-th column, l^i the i-th row of the inverse basis.
struct ChartSpec {
  std::function<Vec(const Vec& u)> flux;
  std::function<Vec(const Vec& u)> to_riemann;
  std::function<Vec(const Vec& w)> to_conserved;
  std::function<Mat(const Vec& w)> chart_jacobian;
  std::function<double(int i, const Vec& w)> speed_w;
};

SystemModel chart_model(std::string name, std::vector<FieldKind> kinds, std::vector<Interval> box,
                        ChartSpec spec, ModelTolerances tolerances = {});

using ModelParams = std::map<std::string, double>;

/// Built-in catalog: "decoupled", "aw-rascle", "ld-ld".
std::vector<std::string> builtin_model_names();
SystemModel make_builtin_model(const std::string& name, const ModelParams& params = {});

struct RankineHugoniot {
  double speed = 0.0;
  double residual = 0.0;           // |f(u+) - f(u-) - speed (u+ - u-)|
  double relative_residual = 0.0;  // residual / |u+ - u-|
};

/// Least-squares shock speed along the jump direction.
RankineHugoniot rankine_hugoniot_speed(const SystemModel& model, const Vec& u_minus, const Vec& u_plus);

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  double gap_d = 0.0;
  std::optional<double> gnl_c;  // absent when no family is GNL
  double max_rh_residual = 0.0;
  double max_curve_drift = 0.0;
  double max_ld_speed_variation = 0.0;
  double max_biorthogonality_error = 0.0;
  double max_roundtrip_error = 0.0;
  double max_eigen_residual = 0.0;
  int samples = 0;

  bool accepted() const;
  const CheckResult* first_failure() const;
};

/// Runs every check and reports; never throws ValidationFailed.
ValidationReport inspect_model(const SystemModel& model, int sample_count);
/// Same as inspect_model but throws ValidationFailed naming the first failing check.
ValidationReport validate_model(const SystemModel& model, int sample_count);

/// Deterministic sample points covering the box (corners followed by a Halton sequence).
std::vector<Vec> sample_box(const std::vector<Interval>& box, int count);

}  // namespace wft
