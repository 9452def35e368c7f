#include <doctest.h>

#include "support/helpers.hpp"
#include "wft/characteristics.hpp"
#include "wft/errors.hpp"
#include "wft/random.hpp"

#include <cmath>

using namespace wft;
using testing::shared_model;
using testing::v2;

namespace {

Trajectory arz_single_shock(double t_end) {
  auto m = shared_model("aw-rascle");
  GridSpec g{2, 0};
  auto d = make_initial_data(*m, g, v2(1.0, 3.5), {{0.0, v2(0.5, 3.5)}});
  return run_tracker(m, g, d, t_end);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(a + (b - a) * k / (n - 1));
  return v;
}

// Time-0 breakpoints are avoided so every sample has a well defined start region.
std::vector<double> off_front_samples(const Trajectory& traj, double a, double b, int n) {
  std::vector<double> out;
  for (double y : linspace(a, b, n)) {
    bool near = false;
    for (const auto& bp : traj.initial_data().breakpoints) near = near || std::abs(bp.x - y) < 1e-6;
    if (!near) out.push_back(y);
  }
  return out;
}

}  // namespace

TEST_CASE("constant speed: pure translation") {
  auto m = shared_model("decoupled", {{"a", 5.0}});
  GridSpec g{2, 0};
  auto d = make_initial_data(*m, g, v2(0.5, 0.25), {{1.0, v2(0.5, 0.75)}, {2.0, v2(0.5, 0.0)}});
  auto traj = run_tracker(m, g, d, 2.0);
  for (double y : {-3.0, 0.3, 1.0, 1.5, 4.0}) {
    auto p = trace(traj, 1, y, 2.0);
    CHECK(p.x_end() == doctest::Approx(y + 10.0).epsilon(1e-14));
    CHECK(p.crossings.empty());
  }
  auto tr = transport_ld(traj, 1, {0.0, 1.5, 3.0}, 2.0);
  CHECK(tr[0].value == 1);
  CHECK(tr[1].value == 3);
  CHECK(tr[2].value == 0);
  CHECK(tr[1].x == doctest::Approx(11.5));
}

TEST_CASE("zero-front trajectory: h(y) = y + lambda t with ratio one") {
  auto m = shared_model("aw-rascle");
  GridSpec g{2, 0};
  auto d = make_initial_data(*m, g, v2(0.75, 3.25), {});
  auto traj = run_tracker(m, g, d, 3.0);
  auto h = h_map(traj, 1, 3.0, linspace(-2.0, 2.0, 9));
  for (std::size_t k = 0; k < h.y.size(); ++k) CHECK(h.h[k] == doctest::Approx(h.y[k] + 0.75 * 3.0));
  CHECK(h.min_ratio == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(h.max_ratio == doctest::Approx(1.0).epsilon(1e-14));
  auto dc = derivative_formula_check(traj, 1, 3.0, 0.1);
  CHECK(dc.residual <= 1e-9);
}

TEST_CASE("LD trace crossing one transversal shock kinks at the line intersection") {
  auto traj = arz_single_shock(10.0);
  REQUIRE(traj.fronts().size() == 1);
  const double s = traj.front(0).speed();
  const double lam_l = 1.0, lam_r = 0.5;
  REQUIRE(lam_l > s);
  REQUIRE(lam_r > s);
  const double y = -1.0;
  auto p = trace(traj, 1, y, 10.0);
  const double t_star = -y / (lam_l - s);
  REQUIRE(p.vertices.size() == 3);
  CHECK(p.vertices[1].t == doctest::Approx(t_star).epsilon(1e-13));
  CHECK(p.vertices[1].x == doctest::Approx(s * t_star).epsilon(1e-13));
  REQUIRE(p.crossings.size() == 1);
  CHECK(p.crossings[0].front == 0);
  CHECK(p.x_end() == doctest::Approx(s * t_star + lam_r * (10.0 - t_star)));

  // Two paths that both cross: dx/dy = (lam_r - s) / (lam_l - s).
  const double expected = (lam_r - s) / (lam_l - s);
  auto h = h_map(traj, 1, 10.0, {-2.0, -1.5, -1.0});
  CHECK(h.min_ratio == doctest::Approx(expected).epsilon(1e-10));
  CHECK(h.max_ratio == doctest::Approx(expected).epsilon(1e-10));
  auto dc = derivative_formula_check(traj, 1, 10.0, -1.0);
  CHECK(dc.fd_slope == doctest::Approx(expected).epsilon(1e-8));
  CHECK(dc.residual <= 1e-4);

  auto back = trace_back(traj, 1, 10.0, p.x_end());
  CHECK(back.y == doctest::Approx(y).epsilon(1e-12));
}

TEST_CASE("GNL trace aimed into a same-family shock is flagged") {
  auto m = shared_model("decoupled");
  GridSpec g{2, 0};
  auto d = make_initial_data(*m, g, v2(1.0, 0.0), {{0.0, v2(0.0, 0.0)}});
  auto traj = run_tracker(m, g, d, 3.0);
  try {
    trace(traj, 0, -1.0, 3.0);
    FAIL("expected GNLShockEncounter");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GNLShockEncounter);
  }
  // before the collision time the path is a clean line
  auto p = trace(traj, 0, -1.0, 1.5);
  CHECK(p.x_end() == doctest::Approx(0.5));
}

TEST_CASE("start on a front takes the right state") {
  auto traj = arz_single_shock(1.0);
  auto p = trace(traj, 1, 0.0, 1.0);
  CHECK(p.end.state[0] == 2);
  CHECK(p.x_end() == doctest::Approx(0.5));
}

TEST_CASE("LD trace rides a same-family contact") {
  auto m = shared_model("aw-rascle");
  GridSpec g{2, 0};
  auto d = make_initial_data(*m, g, v2(0.5, 3.25), {{0.0, v2(0.5, 3.75)}});
  auto traj = run_tracker(m, g, d, 2.0);
  auto p = trace(traj, 1, 0.0, 2.0);
  CHECK(p.end.riding());
  CHECK(p.end.side == Side::Right);
  CHECK(p.x_end() == doctest::Approx(1.0));
  CHECK(foot_key(trace_back(traj, 1, 2.0, 1.0).end) == 0.5);
  CHECK(foot_key(trace_back(traj, 1, 2.0, 0.9).end) == -0.5);
}

TEST_CASE("decay measure on a single fan grows linearly") {
  auto m = shared_model("decoupled");
  GridSpec g{3, 0};
  auto d = make_initial_data(*m, g, v2(0.0, 0.0), {{0.0, v2(1.0, 0.0)}});
  auto traj = run_tracker(m, g, d, 4.0);
  for (double tau : {1.0, 2.0, 4.0}) {
    auto dm = decay_measure(traj, 0, tau);
    // shard speeds differ by the mesh; gap / (tau mesh) = 1
    CHECK(dm.kappa_hat == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dm.adjacent_pairs == 7);
    CHECK(dm.tv == doctest::Approx(1.0));
  }
  auto shock = make_initial_data(*m, g, v2(1.0, 0.0), {{0.0, v2(0.0, 0.0)}});
  auto straj = run_tracker(m, g, shock, 1.0);
  CHECK_THROWS_AS(decay_measure(straj, 0, 0.5), Error);
}

TEST_CASE("decay measure: fan crossed by an LD contact keeps a positive gap") {
  auto m = shared_model("aw-rascle");
  GridSpec g{2, 0};
  // the fan moves left (speeds in [-3.75, -1.75]) through the contact at x = -1
  auto d2 = make_initial_data(*m, g, v2(0.0, 3.5), {{-1.0, v2(0.0, 3.75)}, {0.0, v2(1.0, 3.75)}});
  auto traj = run_tracker(m, g, d2, 6.0);
  auto dm = decay_measure(traj, 0, 6.0);
  CHECK(dm.kappa_hat > 0.0);
}

TEST_CASE("property: traced paths on random data") {
  std::mt19937_64 rng(7);
  for (const std::string name : {"aw-rascle", "ld-ld", "decoupled"}) {
    auto m = shared_model(name);
    const int fam = name == "ld-ld" ? 0 : 1;
    for (int nu = 2; nu <= 4; ++nu) {
      GridSpec g{nu, 0};
      for (int trial = 0; trial < 3; ++trial) {
        CAPTURE(name);
        CAPTURE(nu);
        CAPTURE(trial);
        auto d = random_initial_data(*m, g, testing::random_spec(10, 0.0, 4.0), rng);
        const double T = 2.0;
        auto traj = run_tracker(m, g, d, T);
        const auto ys = off_front_samples(traj, -1.0, 5.0, 61);
        std::vector<double> hs;
        for (int i : {fam, name == "ld-ld" ? 1 : fam}) {
          for (double y : ys) {
            auto p = trace(traj, i, y, T);
            // broad solution: transported value equals the initial value
            CHECK(p.end.state[i] == traj.sample(0.0, y, Side::Right)[i]);
            // slopes match lambda_i of the traversed region
            for (std::size_t k = 1; k < p.vertices.size(); ++k) {
              const auto& a = p.vertices[k - 1];
              const auto& b = p.vertices[k];
              if (b.t - a.t < 1e-3) continue;
              const double tm = 0.5 * (a.t + b.t), xm = 0.5 * (a.x + b.x);
              const double lam = m->speed_w(i, to_w(traj.sample(tm, xm, Side::Left), g));
              CHECK((b.x - a.x) / (b.t - a.t) == doctest::Approx(lam).epsilon(1e-10));
            }
            // each front is crossed at most once
            std::vector<FrontId> ids;
            for (auto c : p.crossings) ids.push_back(c.front);
            std::sort(ids.begin(), ids.end());
            CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
            // the tracker state at the end point agrees with the carried state
            if (!p.end.riding()) {
              const Profile pr = traj.profile(T);
              bool near = false;
              for (double x : pr.x) near = near || std::abs(x - p.x_end()) < 1e-9;
              if (!near) CHECK(traj.sample(T, p.x_end(), Side::Right) == p.end.state);
            }
            // backward from the end returns to the start
            auto back = trace_back(traj, i, T, p.x_end());
            CHECK(back.y == doctest::Approx(y).epsilon(1e-8));
          }
          auto h = h_map(traj, i, T, ys);
          CHECK(h.monotone);
        }
      }
    }
  }
}

TEST_CASE("property: derivative formula on smooth probes") {
  std::mt19937_64 rng(11);
  auto m = shared_model("aw-rascle");
  int checked = 0;
  for (int nu = 2; nu <= 3; ++nu) {
    GridSpec g{nu, 0};
    for (int trial = 0; trial < 4; ++trial) {
      auto d = random_initial_data(*m, g, testing::random_spec(8, 0.0, 4.0), rng);
      auto traj = run_tracker(m, g, d, 2.0);
      for (double y : off_front_samples(traj, 0.05, 3.95, 23)) {
        try {
          auto a = trace(traj, 1, y - 1e-5, 2.0);
          auto b = trace(traj, 1, y + 1e-5, 2.0);
          if (a.crossings.size() != b.crossings.size()) continue;
          auto dc = derivative_formula_check(traj, 1, 2.0, y);
          CAPTURE(y);
          CHECK(dc.residual <= 1e-3);
          ++checked;
        } catch (const Error& e) {
          CHECK(e.code() == ErrorCode::DiscontinuousAtProbe);
        }
      }
    }
  }
  CHECK(checked > 50);
}
