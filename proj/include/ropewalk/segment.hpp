#pragma once

#include <algorithm>

#include "geometry.hpp"

namespace ropewalk {

struct SegmentPair {
  double u = 0.0;  // parameter on the first segment, in [0, 1]
  double v = 0.0;  // parameter on the second segment, in [0, 1]
  double dist = 0.0;
};

namespace detail {
inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }
// sin^2 of the angle between directions below which segments count as parallel.
inline constexpr double kParallelSin2 = 1e-12;
}  // namespace detail

/// Closest points between segments [a0, a1] and [b0, b1]. Parallel segments whose
/// projections overlap report the midpoint of the overlap on the first segment.
inline SegmentPair segment_min_distance(const Vec3& a0, const Vec3& a1, const Vec3& b0,
                                        const Vec3& b1) {
  using detail::clamp01;
  const Vec3 d1 = a1 - a0;
  const Vec3 d2 = b1 - b0;
  const Vec3 r = a0 - b0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  if (!(a > 0.0) || !(e > 0.0)) throw GeometryError("degenerate segment");
  const double b = d1.dot(d2);
  const double c = d1.dot(r);
  const double f = d2.dot(r);
  const double denom = a * e - b * b;

  double s = 0.0;
  double t = 0.0;
  if (denom <= detail::kParallelSin2 * a * e) {
    // Parameters of b0 and b1 projected onto the first segment's line.
    const double t0 = -c / a;
    const double t1 = (b - c) / a;
    const double lo = std::max(0.0, std::min(t0, t1));
    const double hi = std::min(1.0, std::max(t0, t1));
    if (lo <= hi) {
      s = 0.5 * (lo + hi);
      t = clamp01((b * s + f) / e);
    } else {
      s = std::max(t0, t1) < 0.0 ? 0.0 : 1.0;
      t = clamp01((b * s + f) / e);
      s = clamp01((b * t - c) / a);
    }
  } else {
    s = clamp01((b * f - c * e) / denom);
    t = (b * s + f) / e;
    if (t < 0.0) {
      t = 0.0;
      s = clamp01(-c / a);
    } else if (t > 1.0) {
      t = 1.0;
      s = clamp01((b - c) / a);
    }
  }
  const Vec3 p = a0 + s * d1;
  const Vec3 q = b0 + t * d2;
  return {s, t, (p - q).norm()};
}

}  // namespace ropewalk
