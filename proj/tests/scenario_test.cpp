#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "uwbloc/errors.hpp"
#include "uwbloc/rng.hpp"
#include "uwbloc/scenario.hpp"

using namespace uwbloc;

namespace {

Scenario straight_walk(double duration = 20.0) {
  Scenario s;
  s.region = {0.0, 0.0, 9.0, 6.0};
  s.cluster = build_default_lab();
  s.trajectory.waypoints = {{0.0, {1.0, 1.0}}, {duration, {8.0, 5.0}}};
  s.duration_s = duration;
  s.seed = 5;
  return s;
}

}  // namespace

TEST_CASE("default lab places seven anchors with one initiator") {
  Cluster c = build_default_lab();
  REQUIRE(c.size() == 7);
  CHECK(c.initiator().id == 1);
  CHECK(c.initiator().position.x == doctest::Approx(0.5));
  CHECK(c.initiator().position.y == doctest::Approx(0.5));
  for (const Anchor& a : c.anchors) {
    CHECK(a.position.z == doctest::Approx(2.7));
    CHECK((a.initiator == (a.id == 1)));
  }
  CHECK(c.find(4)->position.x == doctest::Approx(0.5));
  CHECK(c.find(4)->position.y == doctest::Approx(5.5));
  CHECK(c.find(7)->position.x == doctest::Approx(4.5));
  CHECK(c.find(7)->position.y == doctest::Approx(3.0));
  CHECK(c.find(99) == nullptr);
  Vec2 mid = c.centroid_xy();
  CHECK(mid.x == doctest::Approx(4.5).epsilon(0.05));
}

TEST_CASE("trajectory interpolates linearly between waypoints") {
  Trajectory t;
  t.waypoints = {{0.0, {0.0, 0.0}}, {10.0, {10.0, 0.0}}, {20.0, {10.0, 5.0}}};
  Vec2 p = t.position_at(5.0);
  CHECK(p.x == doctest::Approx(5.0));
  CHECK(p.y == doctest::Approx(0.0));
  p = t.position_at(15.0);
  CHECK(p.x == doctest::Approx(10.0));
  CHECK(p.y == doctest::Approx(2.5));
  CHECK_THROWS_AS(t.position_at(-0.1), std::out_of_range);
  CHECK_THROWS_AS(t.position_at(20.1), std::out_of_range);
}

TEST_CASE("trajectory progress accumulates walked distance") {
  Trajectory t;
  t.waypoints = {{0.0, {0.0, 0.0}}, {10.0, {10.0, 0.0}}, {20.0, {10.0, 5.0}}};
  CHECK(t.progress_at(0.0) == doctest::Approx(0.0));
  CHECK(t.progress_at(10.0) == doctest::Approx(10.0));
  CHECK(t.progress_at(20.0) == doctest::Approx(15.0));
  CHECK(t.progress_at(15.0) == doctest::Approx(12.5));
}

TEST_CASE("scenario json round trip preserves the fingerprint") {
  Scenario s = straight_walk();
  s.obstacles.push_back(
      {{3.0, 2.0, 4.0, 3.0}, ObstacleKind::temporary, 5.0, 9.0});
  std::string text = to_json(s);
  Scenario back = parse_scenario(text);
  CHECK(scenario_fingerprint(back) == scenario_fingerprint(s));
  CHECK(back.cluster.size() == 7);
  CHECK(back.obstacles.size() == 1);
  CHECK(back.obstacles[0].t1 == doctest::Approx(9.0));
}

TEST_CASE("scenario parser rejects malformed input") {
  CHECK_THROWS_AS(parse_scenario("{"), config_error);
  CHECK_THROWS_AS(parse_scenario("{\"region\":[9,6]}"), config_error);
  // waypoint outside the region
  CHECK_THROWS_AS(
      parse_scenario("{\"region\":[9,6],\"duration_s\":1,"
                     "\"waypoints\":[[0,2,2],[1,12,2]]}"),
      config_error);
  // trajectory shorter than the run
  CHECK_THROWS_AS(
      parse_scenario("{\"region\":[9,6],\"duration_s\":50,"
                     "\"waypoints\":[[0,2,2],[1,3,2]]}"),
      config_error);
  // non-increasing waypoint times
  CHECK_THROWS_AS(
      parse_scenario("{\"region\":[9,6],\"duration_s\":1,"
                     "\"waypoints\":[[0,2,2],[0,3,2]]}"),
      config_error);
}

TEST_CASE("imu stream length follows the 16 Hz grid") {
  Scenario s = straight_walk(10.0);
  auto imu = synthesize_imu(s.trajectory, 10.0, 3);
  CHECK(imu.size() == 160);
  CHECK(imu[0].t == doctest::Approx(0.0));
  CHECK(imu[1].t == doctest::Approx(kTickSeconds));
}

TEST_CASE("imu of a stationary user is quiet around gravity") {
  Trajectory t;
  t.waypoints = {{0.0, {4.0, 3.0}}, {30.0, {4.0, 3.0}}};
  auto imu = synthesize_imu(t, 30.0, 7);
  double mean_z = 0.0;
  for (const auto& s : imu) mean_z += s.accel.z;
  mean_z /= imu.size();
  CHECK(mean_z == doctest::Approx(9.80665).epsilon(0.02));
  double mean_mag = 0.0, var = 0.0;
  std::vector<double> mags;
  for (const auto& s : imu) {
    double m = std::sqrt(s.accel.x * s.accel.x + s.accel.y * s.accel.y +
                         s.accel.z * s.accel.z);
    mags.push_back(m);
    mean_mag += m;
  }
  mean_mag /= mags.size();
  for (double m : mags) var += (m - mean_mag) * (m - mean_mag);
  var /= mags.size();
  CHECK(std::sqrt(var) < 0.1);
}

TEST_CASE("imu of a walking user carries visible motion energy") {
  Scenario s = straight_walk(20.0);
  auto imu = synthesize_imu(s.trajectory, 20.0, 7);
  double mean_mag = 0.0, var = 0.0;
  std::vector<double> mags;
  for (const auto& sm : imu) {
    double m = std::sqrt(sm.accel.x * sm.accel.x + sm.accel.y * sm.accel.y +
                         sm.accel.z * sm.accel.z);
    mags.push_back(m);
    mean_mag += m;
  }
  mean_mag /= mags.size();
  for (double m : mags) var += (m - mean_mag) * (m - mean_mag);
  var /= mags.size();
  CHECK(std::sqrt(var) > 0.1);
}

TEST_CASE("imu synthesis is deterministic in the seed") {
  Scenario s = straight_walk(5.0);
  auto a = synthesize_imu(s.trajectory, 5.0, 11);
  auto b = synthesize_imu(s.trajectory, 5.0, 11);
  auto c = synthesize_imu(s.trajectory, 5.0, 12);
  REQUIRE(a.size() == b.size());
  bool all_equal = true, any_diff = false;
  for (size_t i = 0; i < a.size(); ++i) {
    all_equal = all_equal && a[i].accel.x == b[i].accel.x &&
                a[i].gyro.z == b[i].gyro.z;
    any_diff = any_diff || a[i].accel.x != c[i].accel.x;
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("seed derivation separates streams and indices") {
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
}
