#include <doctest.h>

#include "support/helpers.hpp"
#include "wft/errors.hpp"
#include "wft/random.hpp"
#include "wft/tracker.hpp"

#include <cmath>

using namespace wft;
using testing::shared_model;
using testing::v2;

TEST_CASE("initial data without jumps has no fronts") {
  auto m = shared_model("decoupled");
  GridSpec g{2, 0};
  auto d = make_initial_data(*m, g, v2(0.5, 0.25), {{1.0, v2(0.5, 0.25)}});
  Tracker tr(m, g, d);
  CHECK(tr.monitors().count == 0);
  CHECK(tr.monitors().tv == 0);
  CHECK(tr.monitors().q == 0);
  CHECK_FALSE(tr.next_collision().has_value());
  tr.run_until(3.0);
  CHECK(tr.trajectory().events().empty());
  CHECK(tr.trajectory().sample(3.0, 7.0, Side::Left) == GridPoint{2, 1});
}

TEST_CASE("single shock is a straight line") {
  auto m = shared_model("decoupled");
  GridSpec g{2, 0};
  auto d = make_initial_data(*m, g, v2(1, 0), {{0.0, v2(0, 0)}});
  Tracker tr(m, g, d);
  REQUIRE(tr.ordered_fronts().size() == 1);
  const Front& f = tr.trajectory().front(0);
  CHECK(f.wave.kind == WaveKind::Shock);
  CHECK(f.speed() == 0.5);
  tr.run_until(4.0);
  CHECK(tr.trajectory().profile(4.0).x.at(0) == 2.0);
  CHECK(tr.monitors().tv == tr.initial_monitors().tv);
}

TEST_CASE("data off the grid or out of order is rejected") {
  auto m = shared_model("decoupled");
  GridSpec g{2, 0};
  try {
    make_initial_data(*m, g, v2(0.3, 0), {{0.0, v2(0, 0)}});
    FAIL("expected NotOnGrid");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotOnGrid);
  }
  try {
    make_initial_data(*m, g, v2(0.5, 0), {{1.0, v2(0, 0)}, {1.0, v2(0.25, 0)}});
    FAIL("expected NonMonotoneBreakpoints");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonMonotoneBreakpoints);
  }
}

TEST_CASE("contact left of a shock: Q is the product of strengths") {
  auto m = shared_model("decoupled", {{"a", 5.0}});
  GridSpec g{2, 0};
  auto d = make_initial_data(*m, g, v2(1, 0), {{0.0, v2(1, 0.5)}, {1.0, v2(0, 0.5)}});
  Tracker tr(m, g, d);
  CHECK(tr.monitors().count == 2);
  // 0.5 * 1.0 in real units = 2 * 4 storage units squared at nu = 2.
  CHECK(tr.monitors().q == 8);
  CHECK(static_cast<double>(tr.monitors().q) * g.unit() * g.unit() == 0.5);
  auto c = tr.next_collision();
  REQUIRE(c.has_value());
  CHECK(c->t == doctest::Approx(1.0 / 4.5));
  const auto& rec = tr.step();
  CHECK(rec.alternative == Alternative::PotentialDrop);
  CHECK(rec.d_q == -8);
  CHECK(rec.d_count == 0);
  CHECK(rec.d_tv == 0);
  CHECK(tr.monitors().q == 0);
}

TEST_CASE("collision kinematics and grouping") {
  auto m = shared_model("decoupled", {{"w1_min", -2.0}, {"w1_max", 2.0}});
  GridSpec g{1, 0};
  SUBCASE("two fronts") {
    auto d = make_initial_data(*m, g, v2(1.5, 0), {{0.0, v2(0.5, 0)}, {1.0, v2(-0.5, 0)}});
    Tracker tr(m, g, d);
    auto c = tr.next_collision();
    REQUIRE(c.has_value());
    CHECK(c->t == 1.0);
    CHECK(c->x == 1.0);
    CHECK(c->ids.size() == 2);
    const auto& rec = tr.step();
    CHECK(rec.alternative == Alternative::CountDrop);
    REQUIRE(rec.outgoing.size() == 1);
    CHECK(tr.trajectory().front(rec.outgoing[0]).speed() == 0.5);
  }
  SUBCASE("parallel contacts never meet") {
    auto d = make_initial_data(*m, g, v2(0, 0), {{0.0, v2(0, 0.5)}, {1.0, v2(0, 1.0)}});
    Tracker tr(m, g, d);
    CHECK_FALSE(tr.next_collision().has_value());
  }
  SUBCASE("three fronts meeting at one point form one event") {
    // Speeds 1, 0, -1 from x = -1, 0, 1 all reach (t, x) = (1, 0).
    auto d = make_initial_data(*m, g, v2(1.5, 0), {{-1.0, v2(0.5, 0)}, {0.0, v2(-0.5, 0)}, {1.0, v2(-1.5, 0)}});
    Tracker tr(m, g, d);
    auto c = tr.next_collision();
    REQUIRE(c.has_value());
    CHECK(c->ids.size() == 3);
    CHECK(c->t == doctest::Approx(1.0));
    CHECK(std::abs(c->x) <= 1e-12);
    const auto& rec = tr.step();
    REQUIRE(rec.outgoing.size() == 1);
    CHECK(tr.trajectory().front(rec.outgoing[0]).speed() == 0.0);
    CHECK(rec.d_count == -2);
    CHECK_FALSE(tr.next_collision().has_value());
  }
}

TEST_CASE("shock overtaking a shard at nu = 1 cancels 2^(1-nu) of variation") {
  auto m = shared_model("decoupled");
  GridSpec g{1, 0};
  auto d = make_initial_data(*m, g, v2(1.0, 0), {{0.0, v2(0.0, 0)}, {1.0, v2(0.5, 0)}});
  Tracker tr(m, g, d);
  const auto& rec = tr.step();
  CHECK(rec.t == doctest::Approx(4.0));
  CHECK(rec.x == doctest::Approx(2.0));
  CHECK(rec.alternative == Alternative::VariationDrop);
  CHECK(static_cast<double>(rec.d_tv) * g.unit() == -1.0);
  REQUIRE(rec.outgoing.size() == 1);
  CHECK(tr.trajectory().front(rec.outgoing[0]).speed() == 0.75);
}

TEST_CASE("transversal interaction on a three-front instance lowers Q by the enumerated amount") {
  auto m = shared_model("aw-rascle");
  GridSpec g{2, 0};
  // 2-contact, then a 1-shock, then a 1-shard further right.
  auto d = make_initial_data(*m, g, v2(0.5, 3.5), {{0.0, v2(0.5, 3.75)}, {0.5, v2(0.25, 3.75)}, {3.0, v2(0.5, 3.75)}});
  Tracker tr(m, g, d);
  const Trajectory& traj = tr.trajectory();
  const auto before = testing::brute_force_q(traj, traj.profile(0.0));
  CHECK(before == tr.monitors().q);
  const auto c = tr.next_collision();
  REQUIRE(c.has_value());
  const auto& rec = tr.step();
  const auto after = testing::brute_force_q(tr.trajectory(), tr.trajectory().profile(rec.t));
  CHECK(rec.d_q == after - before);
  if (rec.d_count == 0 && rec.d_tv == 0) CHECK(rec.alternative == Alternative::PotentialDrop);
  CHECK(rec.d_q <= -1);
}

TEST_CASE("sampling conventions") {
  auto m = shared_model("decoupled");
  GridSpec g{2, 0};
  auto d = make_initial_data(*m, g, v2(0, 0), {{0.0, v2(0.75, 0)}, {2.0, v2(0.75, 0.5)}});
  auto traj = run_tracker(m, g, d, 0.0);
  CHECK(traj.sample(0.0, -5.0, Side::Right) == GridPoint{0, 0});
  CHECK(traj.sample(0.0, 50.0, Side::Left) == GridPoint{3, 2});
  CHECK(traj.sample(0.0, 2.0, Side::Left) == GridPoint{3, 0});
  CHECK(traj.sample(0.0, 2.0, Side::Right) == GridPoint{3, 2});
  auto later = run_tracker(m, g, d, 0.2);
  // Shards leave x = 0 at speeds 0.125, 0.375, 0.625: between the first two sits omega_{1,1}.
  CHECK(later.sample(0.2, 0.05, Side::Left) == GridPoint{1, 0});
  CHECK_THROWS_AS(later.sample(0.3, 0.0, Side::Left), Error);
}

TEST_CASE("random decoupled data respect the analytic event budget") {
  auto m = shared_model("decoupled");
  GridSpec g{3, 0};
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 5; ++trial) {
    auto d = random_initial_data(*m, g, testing::random_spec(20, 0.0, 10.0), rng);
    Tracker tr(m, g, d);
    tr.run_until(50.0);
    CHECK(tr.trajectory().events().size() <= tr.analytic_event_bound());
  }
}

TEST_CASE("property: monitors, ordering, and conservation on random data") {
  std::mt19937_64 rng(99);
  for (const auto& name : builtin_model_names()) {
    auto m = shared_model(name);
    for (int nu = 2; nu <= 4; ++nu) {
      GridSpec g{nu, 0};
      for (int trial = 0; trial < 3; ++trial) {
        CAPTURE(name);
        CAPTURE(nu);
        CAPTURE(trial);
        auto d = random_initial_data(*m, g, testing::random_spec(12, 0.0, 4.0), rng);
        Tracker tr(m, g, d);
        const Monitors m0 = tr.monitors();
        tr.run_until(3.0);
        const Trajectory& traj = tr.trajectory();
        const Vec f_in = m->flux(m->to_conserved(to_w(d.left, g)));
        const Vec f_out = m->flux(m->to_conserved(to_w(d.right(), g)));
        const double a = -20.0, b = 24.0;
        const Vec mass0 = mass_on_window(traj, 0.0, a, b);
        std::int64_t tv = m0.tv, q = m0.q;
        for (const auto& ev : traj.events()) {
          CHECK(ev.alternative != Alternative::None);
          CHECK(ev.conservation_defect <= 1e-10);
          CHECK(ev.d_tv <= 0);
          CHECK(ev.d_q <= 0);
          tv += ev.d_tv;
          q += ev.d_q;
          CHECK(q <= m0.tv * m0.tv);
          const Profile p = traj.profile(ev.t);
          for (std::size_t k = 0; k + 1 < p.x.size(); ++k) CHECK(p.x[k] <= p.x[k + 1] + 1e-9);
          for (std::size_t k = 0; k < p.ids.size(); ++k) CHECK(traj.front(p.ids[k]).wave.left == p.states[k]);
          const Vec drift = mass_on_window(traj, ev.t, a, b) - mass0 - ev.t * (f_in - f_out);
          CHECK(drift.norm() <= 1e-10 * std::max(1.0, mass0.norm()));
        }
        CHECK(tv == tr.monitors().tv);
        CHECK(q == tr.monitors().q);
        CHECK(q == testing::brute_force_q(traj, traj.profile(3.0)));
      }
    }
  }
}

TEST_CASE("property: transversal interactions keep the span and the speed-strength identity") {
  std::mt19937_64 rng(123);
  int transversal = 0;
  for (const auto& name : builtin_model_names()) {
    auto m = shared_model(name);
    for (int nu = 2; nu <= 4; ++nu) {
      GridSpec g{nu, 0};
      for (int trial = 0; trial < 3; ++trial) {
        auto d = random_initial_data(*m, g, testing::random_spec(10, 0.0, 4.0), rng);
        auto traj = run_tracker(m, g, d, 3.0);
        for (const auto& ev : traj.events()) {
          const TransversalCheck c = transversal_check(traj, ev);
          if (!c.transversal) continue;
          ++transversal;
          CHECK(c.span_residual <= 1e-8);
          CHECK(c.identity_residual_i <= 1e-8);
          CHECK(c.identity_residual_j <= 1e-8);
        }
      }
    }
  }
  CHECK(transversal > 20);
}

TEST_CASE("same-family mergers are not transversal") {
  auto m = shared_model("decoupled");
  GridSpec g{2, 0};
  auto d = make_initial_data(*m, g, v2(1.0, 0.5), {{0.0, v2(0.5, 0.5)}, {1.0, v2(0.0, 0.5)}});
  auto traj = run_tracker(m, g, d, 5.0);
  REQUIRE(traj.events().size() == 1);
  CHECK_FALSE(transversal_check(traj, traj.events()[0]).transversal);
}
