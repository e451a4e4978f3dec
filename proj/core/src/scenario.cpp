#include "uwbloc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "uwbloc/csvio.hpp"
#include "uwbloc/errors.hpp"
#include "uwbloc/rng.hpp"

namespace uwbloc {

using nlohmann::json;

const Anchor& Cluster::initiator() const {
  for (const auto& a : anchors)
    if (a.initiator) return a;
  throw std::logic_error("cluster has no initiator");
}

const Anchor* Cluster::find(int id) const {
  for (const auto& a : anchors)
    if (a.id == id) return &a;
  return nullptr;
}

Vec2 Cluster::centroid_xy() const {
  Vec2 c;
  for (const auto& a : anchors) {
    c.x += a.position.x;
    c.y += a.position.y;
  }
  double n = static_cast<double>(anchors.size());
  return {c.x / n, c.y / n};
}

Vec2 Trajectory::position_at(double t) const {
  if (t < start_time() || t > end_time())
    throw std::out_of_range("trajectory evaluated outside its span");
  auto it = std::upper_bound(
      waypoints.begin(), waypoints.end(), t,
      [](double v, const Waypoint& w) { return v < w.t; });
  if (it == waypoints.end()) return waypoints.back().pos;
  if (it == waypoints.begin()) return waypoints.front().pos;
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  double u = (t - a.t) / (b.t - a.t);
  return a.pos + (b.pos - a.pos) * u;
}

Vec2 Trajectory::velocity_at(double t) const {
  if (t < start_time() || t > end_time())
    throw std::out_of_range("trajectory evaluated outside its span");
  auto it = std::upper_bound(
      waypoints.begin(), waypoints.end(), t,
      [](double v, const Waypoint& w) { return v < w.t; });
  if (it == waypoints.end()) it = waypoints.end() - 1;
  if (it == waypoints.begin()) it = waypoints.begin() + 1;
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  return (b.pos - a.pos) * (1.0 / (b.t - a.t));
}

double Trajectory::progress_at(double t) const {
  if (t < start_time() || t > end_time())
    throw std::out_of_range("trajectory evaluated outside its span");
  double len = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    const Waypoint& a = waypoints[i - 1];
    const Waypoint& b = waypoints[i];
    if (t >= b.t) {
      len += (b.pos - a.pos).norm();
      continue;
    }
    double u = (t - a.t) / (b.t - a.t);
    len += ((b.pos - a.pos) * u).norm();
    break;
  }
  return len;
}

Cluster build_default_lab(double width, double height, double anchor_z) {
  const double in = 0.5;  // wall clearance
  std::vector<Vec2> spots = {
      {in, in},
      {width - in, in},
      {width - in, height - in},
      {in, height - in},
      {width / 2.0, in},
      {width / 2.0, height - in},
      {width / 2.0, height / 2.0},
  };
  Cluster c;
  for (std::size_t i = 0; i < spots.size(); ++i) {
    Anchor a;
    a.id = static_cast<int>(i) + 1;
    a.position = {spots[i].x, spots[i].y, anchor_z};
    a.initiator = (a.id == 1);
    c.anchors.push_back(a);
  }
  return c;
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw config_error(what); }

double require_finite(double v, const char* what) {
  if (!std::isfinite(v)) bad(std::string(what) + " must be finite");
  return v;
}

Scenario from_json(const json& j) {
  Scenario sc;
  try {
    if (!j.contains("region") || !j["region"].is_array() ||
        j["region"].size() != 2)
      bad("scenario: region must be [width, height]");
    double w = require_finite(j["region"][0].get<double>(), "region width");
    double h = require_finite(j["region"][1].get<double>(), "region height");
    if (w <= 0.0 || h <= 0.0) bad("scenario: region sides must be positive");
    sc.region = {0.0, 0.0, w, h};

    sc.seed = j.value("seed", std::uint64_t{1});

    if (!j.contains("duration_s")) bad("scenario: duration_s missing");
    sc.duration_s = require_finite(j["duration_s"].get<double>(), "duration_s");
    if (sc.duration_s <= 0.0) bad("scenario: duration_s must be positive");

    if (j.contains("anchors")) {
      std::set<int> ids;
      int initiators = 0;
      for (const auto& ja : j["anchors"]) {
        Anchor a;
        a.id = ja.at("id").get<int>();
        a.position.x = require_finite(ja.at("x").get<double>(), "anchor x");
        a.position.y = require_finite(ja.at("y").get<double>(), "anchor y");
        a.position.z = require_finite(ja.at("z").get<double>(), "anchor z");
        a.initiator = ja.value("initiator", false);
        if (a.id < 1) bad("scenario: anchor ids must be >= 1");
        if (!ids.insert(a.id).second) bad("scenario: duplicate anchor id");
        initiators += a.initiator ? 1 : 0;
        sc.cluster.anchors.push_back(a);
      }
      if (sc.cluster.anchors.size() < 3)
        bad("scenario: at least 3 anchors required");
      if (initiators > 1) bad("scenario: more than one initiator");
      std::sort(sc.cluster.anchors.begin(), sc.cluster.anchors.end(),
                [](const Anchor& a, const Anchor& b) { return a.id < b.id; });
      if (initiators == 0) sc.cluster.anchors.front().initiator = true;
    } else {
      sc.cluster = build_default_lab(w, h);
    }

    if (!j.contains("waypoints") || !j["waypoints"].is_array() ||
        j["waypoints"].size() < 2)
      bad("scenario: at least 2 waypoints required");
    double prev_t = -1.0;
    for (const auto& jw : j["waypoints"]) {
      if (!jw.is_array() || jw.size() != 3)
        bad("scenario: waypoint must be [t, x, y]");
      Waypoint wp;
      wp.t = require_finite(jw[0].get<double>(), "waypoint t");
      wp.pos.x = require_finite(jw[1].get<double>(), "waypoint x");
      wp.pos.y = require_finite(jw[2].get<double>(), "waypoint y");
      if (wp.t <= prev_t) bad("scenario: waypoint times must increase");
      if (!sc.region.contains(wp.pos)) bad("scenario: waypoint outside region");
      prev_t = wp.t;
      sc.trajectory.waypoints.push_back(wp);
    }
    if (sc.trajectory.waypoints.front().t != 0.0)
      bad("scenario: first waypoint must be at t = 0");
    if (sc.trajectory.end_time() < sc.duration_s)
      bad("scenario: trajectory ends before duration_s");

    if (j.contains("obstacles")) {
      for (const auto& jo : j["obstacles"]) {
        Obstacle ob;
        const auto& r = jo.at("rect");
        if (!r.is_array() || r.size() != 4)
          bad("scenario: obstacle rect must be [x0, y0, x1, y1]");
        ob.footprint = {r[0].get<double>(), r[1].get<double>(),
                        r[2].get<double>(), r[3].get<double>()};
        if (!(ob.footprint.x0 < ob.footprint.x1 &&
              ob.footprint.y0 < ob.footprint.y1))
          bad("scenario: obstacle rect not normalized");
        std::string kind = jo.value("kind", std::string("permanent"));
        if (kind == "permanent") {
          if (jo.contains("interval"))
            bad("scenario: permanent obstacle cannot have an interval");
          ob.kind = ObstacleKind::permanent;
        } else if (kind == "temporary") {
          ob.kind = ObstacleKind::temporary;
          if (jo.contains("interval")) {
            const auto& iv = jo["interval"];
            if (!iv.is_array() || iv.size() != 2)
              bad("scenario: obstacle interval must be [t0, t1]");
            ob.t0 = iv[0].get<double>();
            ob.t1 = iv[1].get<double>();
            if (!(ob.t0 < ob.t1)) bad("scenario: obstacle interval empty");
          } else {
            ob.t0 = 0.0;
            ob.t1 = std::numeric_limits<double>::infinity();
          }
        } else {
          bad("scenario: obstacle kind must be temporary or permanent");
        }
        sc.obstacles.push_back(ob);
      }
    }
  } catch (const json::exception& e) {
    bad(std::string("scenario: ") + e.what());
  }
  return sc;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw config_error(std::string("scenario: invalid json: ") + e.what());
  }
  return from_json(j);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("scenario: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string to_json(const Scenario& sc) {
  json j;
  j["region"] = {sc.region.width(), sc.region.height()};
  j["duration_s"] = sc.duration_s;
  j["seed"] = sc.seed;
  json anchors = json::array();
  for (const auto& a : sc.cluster.anchors) {
    json ja;
    ja["id"] = a.id;
    ja["x"] = a.position.x;
    ja["y"] = a.position.y;
    ja["z"] = a.position.z;
    ja["initiator"] = a.initiator;
    anchors.push_back(ja);
  }
  j["anchors"] = anchors;
  json wps = json::array();
  for (const auto& w : sc.trajectory.waypoints)
    wps.push_back({w.t, w.pos.x, w.pos.y});
  j["waypoints"] = wps;
  json obs = json::array();
  for (const auto& o : sc.obstacles) {
    json jo;
    jo["rect"] = {o.footprint.x0, o.footprint.y0, o.footprint.x1,
                  o.footprint.y1};
    jo["kind"] =
        o.kind == ObstacleKind::permanent ? "permanent" : "temporary";
    if (o.kind == ObstacleKind::temporary && std::isfinite(o.t1))
      jo["interval"] = {o.t0, o.t1};
    obs.push_back(jo);
  }
  j["obstacles"] = obs;
  return j.dump();
}

std::string scenario_fingerprint(const Scenario& sc) {
  std::string text = to_json(sc);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char b : text) {
    h ^= b;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::vector<ImuSample> synthesize_imu(const Trajectory& trajectory,
                                      double duration_s, std::uint64_t seed,
                                      const ImuNoise& noise) {
  if (duration_s <= 0.0)
    throw std::invalid_argument("imu: duration must be positive");
  if (trajectory.end_time() < duration_s)
    throw std::invalid_argument("imu: trajectory ends before duration");

  const double dt = kTickSeconds;
  const int n = static_cast<int>(std::ceil(duration_s * kImuRateHz));
  const double t_lo = trajectory.start_time();
  const double t_hi = trajectory.end_time();
  auto pos_cl = [&](double t) {
    return trajectory.position_at(std::clamp(t, t_lo, t_hi));
  };

  Rng rng(seed);
  std::vector<ImuSample> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    double t = k * dt;
    Vec2 pm = pos_cl(t - dt);
    Vec2 p0 = pos_cl(t);
    Vec2 pp = pos_cl(t + dt);

    ImuSample s;
    s.t = t;
    // Dynamic acceleration as the second difference of the sampled path, so
    // that its discrete-time integral telescopes to the exact velocity
    // change even across waypoint turns.
    s.accel.x = (pp.x - 2.0 * p0.x + pm.x) / (dt * dt);
    s.accel.y = (pp.y - 2.0 * p0.y + pm.y) / (dt * dt);
    s.accel.z = noise.gravity;

    Vec2 v = (pp - pm) * (1.0 / (2.0 * dt));
    double speed = v.norm();
    if (speed > 0.05) {
      // Gait oscillation: vertical bob at step rate plus a lateral sway.
      // Without it a constant-velocity walk would be indistinguishable from
      // standing still at accelerometer level.
      double gain = std::clamp(speed, 0.4, 1.5);
      double bob = 0.45 * gain * std::sin(4.0 * M_PI * t);
      double sway = 0.18 * gain * std::sin(2.0 * M_PI * t);
      s.accel.z += bob;
      s.accel.x += sway * (v.x / speed);
      s.accel.y += sway * (v.y / speed);
    }

    // Heading rate from the walking direction.
    Vec2 v2 = (pos_cl(t + 2.0 * dt) - p0) * (1.0 / (2.0 * dt));
    if (speed > 0.05 && v2.norm() > 0.05) {
      double d = std::atan2(v2.y, v2.x) - std::atan2(v.y, v.x);
      while (d > M_PI) d -= 2.0 * M_PI;
      while (d < -M_PI) d += 2.0 * M_PI;
      s.gyro.z = d / dt;
    }

    s.accel.x += noise.accel_bias.x + rng.normal(0.0, noise.sigma_a);
    s.accel.y += noise.accel_bias.y + rng.normal(0.0, noise.sigma_a);
    s.accel.z += noise.accel_bias.z + rng.normal(0.0, noise.sigma_a);
    s.gyro.x += rng.normal(0.0, noise.sigma_g);
    s.gyro.y += rng.normal(0.0, noise.sigma_g);
    s.gyro.z += rng.normal(0.0, noise.sigma_g);
    out.push_back(s);
  }
  return out;
}

}  // namespace uwbloc
