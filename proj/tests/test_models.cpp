#include <doctest.h>

#include "support/fv_reference.hpp"
#include "wft/errors.hpp"
#include "wft/model.hpp"

#include <cmath>

using namespace wft;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

SystemModel burgers_pair() {
  ChartSpec s;
  s.flux = [](const Vec& u) { return v2(0.5 * u[0] * u[0], 0.5 * u[1] * u[1]); };
  s.to_riemann = [](const Vec& u) { return u; };
  s.to_conserved = [](const Vec& w) { return w; };
  s.chart_jacobian = [](const Vec&) -> Mat { return Mat::Identity(2, 2); };
  s.speed_w = [](int i, const Vec& w) { return w[i]; };
  return chart_model("burgers-pair", {FieldKind::GenuinelyNonlinear, FieldKind::GenuinelyNonlinear},
                     {{0.0, 1.0}, {0.0, 1.0}}, s);
}

}  // namespace

TEST_CASE("decoupled model validates with gap 4") {
  auto m = make_builtin_model("decoupled", {{"a", 5.0}});
  auto rep = validate_model(m, 100);
  CHECK(rep.accepted());
  CHECK(rep.gap_d == doctest::Approx(4.0).epsilon(1e-12));
  REQUIRE(rep.gnl_c.has_value());
  CHECK(*rep.gnl_c == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.max_curve_drift == 0.0);
}

TEST_CASE("identical Burgers components fail strict hyperbolicity") {
  auto m = burgers_pair();
  auto rep = inspect_model(m, 50);
  REQUIRE(rep.first_failure() != nullptr);
  CHECK(rep.first_failure()->name == "strict hyperbolicity");
  try {
    validate_model(m, 50);
    FAIL("expected ValidationFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationFailed);
    CHECK(std::string(e.what()).find("strict hyperbolicity") != std::string::npos);
  }
}

TEST_CASE("aw-rascle and ld-ld validate") {
  for (const char* name : {"aw-rascle", "ld-ld"}) {
    CAPTURE(name);
    auto m = make_builtin_model(name);
    auto rep = validate_model(m, 64);
    CHECK(rep.accepted());
    CHECK(rep.gap_d > 0.9);
    CHECK(rep.max_curve_drift <= 1e-8);
    CHECK(rep.max_rh_residual <= 1e-7);
  }
}

TEST_CASE("aw-rascle curves agree with an independent fine integration") {
  // Oracle: integrate du/drho along the closed-form curve tangent with many RK4 steps and
  // check that every other Riemann coordinate stays put and RH holds at each point.
  auto m = make_builtin_model("aw-rascle", {{"gamma", 2.0}, {"w2_min", 3.0}, {"w2_max", 4.0}});
  const double w1 = 0.2;
  // Family 2 curve (w1 fixed): y = rho (w1 + rho^2); tangent dy/drho = w1 + 3 rho^2.
  double rho = std::sqrt(3.2 - w1);
  double y = rho * (w1 + rho * rho);
  const Vec u0 = v2(rho, y);
  const int steps = 20000;
  const double h = (std::sqrt(3.9 - w1) - rho) / steps;
  auto slope = [&](double r) { return w1 + 3.0 * r * r; };
  double max_drift = 0.0, max_rh = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double k1 = slope(rho), k2 = slope(rho + h / 2), k4 = slope(rho + h);
    y += h / 6.0 * (k1 + 4.0 * k2 + k4);
    rho += h;
    const Vec u = v2(rho, y);
    max_drift = std::max(max_drift, std::abs(m.to_riemann(u)[0] - w1));
    if (k % 1000 == 999) max_rh = std::max(max_rh, rankine_hugoniot_speed(m, u0, u).relative_residual);
  }
  CHECK(max_drift <= 1e-10);
  CHECK(max_rh <= 1e-9);
  auto rep = validate_model(m, 32);
  CHECK(rep.max_curve_drift <= 1e-8);
  CHECK(rep.max_ld_speed_variation <= 1e-8);
}

TEST_CASE("rankine-hugoniot speeds") {
  auto dec = make_builtin_model("decoupled", {{"a", 5.0}});
  CHECK(rankine_hugoniot_speed(dec, v2(1, 0), v2(0, 0)).speed == doctest::Approx(0.5));
  CHECK(rankine_hugoniot_speed(dec, v2(0.3, 0.1), v2(0.3, 0.9)).speed == doctest::Approx(5.0));
  CHECK_THROWS_AS(rankine_hugoniot_speed(dec, v2(0.3, 0.1), v2(0.3, 0.1)), Error);
  try {
    rankine_hugoniot_speed(dec, v2(0.3, 0.1), v2(0.3, 0.1));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotAJump);
  }
  // A jump along no curve violates RH.
  try {
    rankine_hugoniot_speed(dec, v2(0.0, 0.0), v2(1.0, 1.0));
    FAIL("expected RHViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RHViolation);
  }
}

TEST_CASE("rankine-hugoniot speed is symmetric under swapping the states") {
  auto m = make_builtin_model("aw-rascle");
  for (double a : {0.0, 0.25, 0.5}) {
    for (double b : {0.125, 0.75, 1.0}) {
      if (a == b) continue;
      const Vec ul = m.to_conserved(v2(a, 3.5)), ur = m.to_conserved(v2(b, 3.5));
      const double s1 = rankine_hugoniot_speed(m, ul, ur).speed;
      const double s2 = rankine_hugoniot_speed(m, ur, ul).speed;
      CHECK(std::abs(s1 - s2) <= 1e-12);
    }
  }
}

TEST_CASE("aw-rascle 1-shock speed matches an HLL reference solution") {
  auto m = make_builtin_model("aw-rascle");
  const Vec ul = m.to_conserved(v2(0.75, 3.5)), ur = m.to_conserved(v2(0.5, 3.5));
  const double sigma = rankine_hugoniot_speed(m, ul, ur).speed;
  const double t = 0.4;
  auto ref = testing::hll_riemann(m, ul, ur, 2.0, 4000, t);
  // Locate the shock by the density midpoint crossing.
  const double mid = 0.5 * (ul[0] + ur[0]);
  double xs = NAN;
  for (std::size_t k = 0; k + 1 < ref.cells.size(); ++k) {
    const double a = ref.cells[k][0] - mid, b = ref.cells[k + 1][0] - mid;
    if (a * b <= 0.0 && a != b) {
      xs = ref.center(k) + ref.dx * a / (a - b);
      break;
    }
  }
  REQUIRE(std::isfinite(xs));
  CHECK(std::abs(xs / t - sigma) <= 5.0 * ref.dx / t);
}

TEST_CASE("catalog") {
  CHECK(builtin_model_names().size() == 3);
  try {
    make_builtin_model("euler");
    FAIL("expected CatalogMiss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CatalogMiss);
  }
}

TEST_CASE("chart roundtrip and biorthogonality hold on random interior points") {
  for (const auto& name : builtin_model_names()) {
    auto m = make_builtin_model(name);
    for (const Vec& w : sample_box(m.box(), 40)) {
      const Vec u = m.to_conserved(w);
      CHECK((m.to_riemann(u) - w).norm() <= 1e-12);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::abs(m.left_eigvec(i, u).dot(m.right_eigvec(j, u)) - (i == j)) <= 1e-10);
    }
  }
}
