#pragma once

#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <ropewalk/ropewalk.hpp>

namespace testing_support {

using ropewalk::Component;
using ropewalk::PolyLink;
using ropewalk::Vec3;

inline PolyLink square(double side = 1.0) {
  return PolyLink({Component({Vec3(0, 0, 0), Vec3(side, 0, 0), Vec3(side, side, 0), Vec3(0, side, 0)})});
}

inline PolyLink triangle(double side = 1.0) {
  return PolyLink({Component({Vec3(0, 0, 0), Vec3(side, 0, 0), Vec3(0.5 * side, 0.5 * std::sqrt(3.0) * side, 0)})});
}

// Star-shaped loop with radial and vertical noise; never self-intersects for
// moderate noise.
inline Component random_loop(std::mt19937_64& rng, int n, const Vec3& centre = Vec3::Zero(), double noise = 0.3) {
  std::uniform_real_distribution<double> jitter(-noise, noise);
  std::vector<Vec3> pts;
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * (k + 0.4 * jitter(rng)) / n;
    const double r = 1.0 + jitter(rng);
    pts.push_back(centre + Vec3(r * std::cos(t), r * std::sin(t), jitter(rng)));
  }
  return Component(std::move(pts));
}

// Random knotted-ish polygon: a perturbed (2,3) torus knot.
inline PolyLink random_knot(std::mt19937_64& rng, int n, double noise = 0.15) {
  std::uniform_real_distribution<double> jitter(-noise, noise);
  PolyLink k = ropewalk::seeds::torus_knot(2, 3, n);
  k.apply([&](Vec3& v) { v += Vec3(jitter(rng), jitter(rng), jitter(rng)); });
  return k;
}

// Fresh random polygon (mix of loops, knots and two-component links) with
// between lo and hi edges.
inline PolyLink random_link(std::mt19937_64& rng, int lo, int hi) {
  const int n = std::uniform_int_distribution<int>(lo, hi)(rng);
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0:
      return PolyLink({random_loop(rng, n)});
    case 1:
      return random_knot(rng, n);
    default: {
      const int a = std::max(3, n / 2);
      return PolyLink({random_loop(rng, a), random_loop(rng, std::max(3, n - a), Vec3(0.8, 0.3, 0.2))});
    }
  }
}

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(ROPEWALK_FIXTURES) / name;
}

inline std::vector<std::filesystem::path> all_fixtures() {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::exists(ROPEWALK_FIXTURES)) return out;
  for (const auto& e : std::filesystem::directory_iterator(ROPEWALK_FIXTURES))
    if (e.path().extension() == ".polylink") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing_support
