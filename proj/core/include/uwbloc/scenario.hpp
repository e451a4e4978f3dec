#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "uwbloc/geometry.hpp"

namespace uwbloc {

// The UWB listener runs its sensors on a common 16 Hz tick.
inline constexpr double kImuRateHz = 16.0;
inline constexpr double kTickSeconds = 0.0625;
// Height of a hand-held tag above the floor; all range geometry uses it.
inline constexpr double kUserHeight = 1.2;

struct Anchor {
  int id = 0;
  Vec3 position;
  bool initiator = false;
};

struct Cluster {
  std::vector<Anchor> anchors;  // sorted by id, exactly one initiator

  const Anchor& initiator() const;
  const Anchor* find(int id) const;
  Vec2 centroid_xy() const;
  int size() const { return static_cast<int>(anchors.size()); }
};

enum class ObstacleKind { temporary, permanent };

// Full-height block with a rectangular footprint. Temporary obstacles are
// only present during [t0, t1).
struct Obstacle {
  Rect footprint;
  ObstacleKind kind = ObstacleKind::permanent;
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();

  bool active_at(double t) const {
    if (kind == ObstacleKind::permanent) return true;
    return t >= t0 && t < t1;
  }
};

struct Waypoint {
  double t = 0.0;
  Vec2 pos;
};

// Piecewise-linear path through timestamped waypoints.
struct Trajectory {
  std::vector<Waypoint> waypoints;  // strictly increasing t

  double start_time() const { return waypoints.front().t; }
  double end_time() const { return waypoints.back().t; }
  // Throws std::out_of_range outside [start_time, end_time].
  Vec2 position_at(double t) const;
  // Piecewise-constant; the right-hand segment at waypoint instants.
  Vec2 velocity_at(double t) const;
  // Path length walked up to t, for progress axes in reports.
  double progress_at(double t) const;
};

struct ImuSample {
  double t = 0.0;
  Vec3 accel;  // m/s^2, world frame, gravity included on z
  Vec3 gyro;   // rad/s
};

struct Scenario {
  Rect region;
  Cluster cluster;
  Trajectory trajectory;
  std::vector<Obstacle> obstacles;
  std::uint64_t seed = 1;
  double duration_s = 0.0;
};

// Deployment used by the measurement campaign: four corner anchors pulled
// 0.5 m into the room, the midpoints of both long walls, and one anchor at
// the room centre, all at the same height. Anchor 1 initiates every round.
Cluster build_default_lab(double width = 9.0, double height = 6.0,
                          double anchor_z = 2.7);

// JSON scenario description; throws config_error on any malformed input.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);
std::string to_json(const Scenario& scenario);

// Hash of the semantic content plus the seed. Runs are only comparable when
// their fingerprints match.
std::string scenario_fingerprint(const Scenario& scenario);

struct ImuNoise {
  double sigma_a = 0.05;              // m/s^2 per axis
  double sigma_g = 0.01;              // rad/s per axis
  Vec3 accel_bias{0.02, 0.02, 0.02};  // constant offset, m/s^2
  double gravity = 9.80665;
};

// World-frame 16 Hz IMU stream along the trajectory: second difference of
// the sampled path, gravity on z, a gait oscillation while moving, constant
// sensor bias and white noise. ceil(duration * 16) samples from t = 0.
std::vector<ImuSample> synthesize_imu(const Trajectory& trajectory,
                                      double duration_s, std::uint64_t seed,
                                      const ImuNoise& noise = {});

}  // namespace uwbloc
