#include "uwbloc/geometry.hpp"

namespace uwbloc {

bool segment_intersects_rect(Vec2 a, Vec2 b, const Rect& r) {
  double t0 = 0.0;
  double t1 = 1.0;
  double dx = b.x - a.x;
  double dy = b.y - a.y;

  // Clip parameter range against one half-plane p*t <= q.
  auto clip = [&](double p, double q) {
    if (p == 0.0) return q >= 0.0;
    double t = q / p;
    if (p < 0.0) {
      if (t > t1) return false;
      if (t > t0) t0 = t;
    } else {
      if (t < t0) return false;
      if (t < t1) t1 = t;
    }
    return true;
  };

  return clip(-dx, a.x - r.x0) && clip(dx, r.x1 - a.x) &&
         clip(-dy, a.y - r.y0) && clip(dy, r.y1 - a.y);
}

double distance3(Vec3 a, Vec3 b) { return (a - b).norm(); }

}  // namespace uwbloc
