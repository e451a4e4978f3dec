#include "uwbloc/localizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uwbloc/errors.hpp"

namespace uwbloc {

namespace {

struct Participant {
  Vec3 pos;
  double alpha_s;
};

double clamped_dist(Vec3 a, Vec3 u) {
  double d = distance3(a, u);
  return d < 1e-9 ? 1e-9 : d;
}

// Smallest/largest eigenvalue of the centered XY second-moment matrix of the
// participating anchors; a vanishing ratio means they sit on one line.
void second_moment_eigs(const std::vector<Vec3>& pts, double& lo, double& hi) {
  double mx = 0.0, my = 0.0;
  for (const Vec3& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const Vec3& p : pts) {
    double dx = p.x - mx, dy = p.y - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  double tr = sxx + syy;
  double det = sxx * syy - sxy * sxy;
  double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  lo = tr / 2.0 - disc;
  hi = tr / 2.0 + disc;
}

}  // namespace

PositionEstimate solve_tdoa(const Cluster& cluster, int reference_id,
                            const std::vector<TdoaMeasurement>& tdoas,
                            Vec2 initial_guess, double t,
                            const SolverOptions& opts) {
  const Anchor* ref = cluster.find(reference_id);
  if (!ref) throw std::invalid_argument("solve_tdoa: unknown reference anchor");
  if (tdoas.size() < 2)
    throw std::invalid_argument("solve_tdoa: need at least two measurements");
  std::vector<Participant> parts;
  std::vector<Vec3> geometry{ref->position};
  parts.reserve(tdoas.size());
  for (const TdoaMeasurement& m : tdoas) {
    if (m.anchor_id == reference_id)
      throw std::invalid_argument("solve_tdoa: reference cannot respond");
    const Anchor* a = cluster.find(m.anchor_id);
    if (!a) throw std::invalid_argument("solve_tdoa: unknown responder");
    if (!std::isfinite(m.alpha_s))
      throw std::invalid_argument("solve_tdoa: non-finite measurement");
    for (const Participant& p : parts)
      if (p.pos.x == a->position.x && p.pos.y == a->position.y &&
          p.pos.z == a->position.z)
        throw std::invalid_argument("solve_tdoa: duplicate responder");
    parts.push_back({a->position, m.alpha_s});
    geometry.push_back(a->position);
  }
  double lo, hi;
  second_moment_eigs(geometry, lo, hi);
  if (hi <= 0.0 || lo < 1e-12 * hi)
    throw std::invalid_argument("solve_tdoa: collinear anchor geometry");

  Vec3 u{initial_guess.x, initial_guess.y, opts.user_z};
  auto cost_at = [&](const Vec3& p) {
    double c2 = 0.0;
    double dref = clamped_dist(ref->position, p);
    for (const Participant& part : parts) {
      double r = (clamped_dist(part.pos, p) - dref) -
                 kSpeedOfLight * part.alpha_s;
      c2 += r * r;
    }
    return c2;
  };

  double lambda = opts.lambda0;
  double cost = cost_at(u);
  int iterations = 0;
  bool converged = false;
  while (iterations < opts.max_iterations && !converged) {
    ++iterations;
    double dref = clamped_dist(ref->position, u);
    double gx_ref = (u.x - ref->position.x) / dref;
    double gy_ref = (u.y - ref->position.y) / dref;
    double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
    for (const Participant& part : parts) {
      double d = clamped_dist(part.pos, u);
      double jx = (u.x - part.pos.x) / d - gx_ref;
      double jy = (u.y - part.pos.y) / d - gy_ref;
      double r = (d - dref) - kSpeedOfLight * part.alpha_s;
      jtj00 += jx * jx;
      jtj01 += jx * jy;
      jtj11 += jy * jy;
      jtr0 += jx * r;
      jtr1 += jy * r;
    }
    double a00 = jtj00 + lambda, a01 = jtj01, a11 = jtj11 + lambda;
    double det = a00 * a11 - a01 * a01;
    if (!(det > 0.0) || !std::isfinite(det))
      throw numerical_error("solve_tdoa: singular normal equations");
    double dx = (-jtr0 * a11 + jtr1 * a01) / det;
    double dy = (jtr0 * a01 - jtr1 * a00) / det;
    Vec3 trial{u.x + dx, u.y + dy, opts.user_z};
    double trial_cost = cost_at(trial);
    if (trial_cost < cost) {
      u = trial;
      cost = trial_cost;
      lambda = std::max(lambda / 10.0, 1e-12);
      if (std::sqrt(dx * dx + dy * dy) < opts.step_tol_m) converged = true;
    } else if (std::sqrt(dx * dx + dy * dy) < opts.step_tol_m) {
      // A rejected step this small means no move from here can improve the
      // cost: the iterate already sits at a local minimum within tolerance.
      converged = true;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12)
        throw numerical_error("solve_tdoa: damping exhausted without progress");
    }
  }
  if (!converged)
    throw numerical_error("solve_tdoa: no convergence within iteration cap");

  PositionEstimate est;
  est.t = t;
  est.xy = {u.x, u.y};
  est.source = EstimateSource::least_squares;
  est.iterations = iterations;
  est.residual_norm_m = std::sqrt(cost);
  return est;
}

std::vector<TdoaMeasurement> augment_tdoa(const Cluster& cluster, Vec2 xy,
                                          double user_z) {
  if (!std::isfinite(xy.x) || !std::isfinite(xy.y))
    throw std::invalid_argument("augment_tdoa: non-finite position");
  if (cluster.size() < 2)
    throw std::invalid_argument("augment_tdoa: need at least two anchors");
  const Anchor& init = cluster.initiator();
  Vec3 u{xy.x, xy.y, user_z};
  double d1 = distance3(init.position, u);
  std::vector<TdoaMeasurement> out;
  for (const Anchor& a : cluster.anchors) {
    if (a.id == init.id) continue;
    out.push_back({a.id, (distance3(a.position, u) - d1) / kSpeedOfLight});
  }
  return out;
}

}  // namespace uwbloc
