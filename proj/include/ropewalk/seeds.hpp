#pragma once

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace ropewalk::seeds {

namespace detail {
template <typename F>
Component sample_loop(int n, F&& curve) {
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) pts.push_back(curve(2.0 * std::numbers::pi * k / n));
  return Component(std::move(pts));
}
inline void require_vertices(int n) {
  if (n < 3) throw GeometryError("component needs >= 3 vertices");
}
}  // namespace detail

/// Regular n-gon of circumradius R in the xy-plane.
inline PolyLink circle(int n, double radius = 1.0) {
  detail::require_vertices(n);
  return PolyLink({detail::sample_loop(n, [&](double t) { return Vec3(radius * std::cos(t), radius * std::sin(t), 0.0); })});
}

/// Ellipse with semi-axes a (x) and b (y) in the xy-plane.
inline PolyLink ellipse(int n, double a, double b) {
  detail::require_vertices(n);
  return PolyLink({detail::sample_loop(n, [&](double t) { return Vec3(a * std::cos(t), b * std::sin(t), 0.0); })});
}

/// (p, q) torus knot on the torus with core radius R and tube radius r.
inline PolyLink torus_knot(int p, int q, int n, double big_r = 2.0, double small_r = 1.0) {
  detail::require_vertices(n);
  if (p <= 0 || q <= 0 || std::gcd(p, q) != 1)
    throw GeometryError("torus knot needs coprime positive p, q");
  return PolyLink({detail::sample_loop(n, [&](double t) {
    const double rad = big_r + small_r * std::cos(q * t);
    return Vec3(rad * std::cos(p * t), rad * std::sin(p * t), small_r * std::sin(q * t));
  })});
}

/// Two unit circles in perpendicular planes, each through the other's centre.
inline PolyLink hopf(int n_per_comp) {
  detail::require_vertices(n_per_comp);
  return PolyLink({
      detail::sample_loop(n_per_comp, [](double t) { return Vec3(std::cos(t), std::sin(t), 0.0); }),
      detail::sample_loop(n_per_comp, [](double t) { return Vec3(1.0 + std::cos(t), 0.0, std::sin(t)); }),
  });
}

/// Three-component chain in alternating planes: unit circles at both ends and a
/// middle circle of radius 1.5 through both end centres. Adjacent components are
/// one unit apart; the two end circles are one unit apart at the middle.
inline PolyLink chain(int n_per_comp) {
  detail::require_vertices(n_per_comp);
  return PolyLink({
      detail::sample_loop(n_per_comp, [](double t) { return Vec3(-1.5 + std::cos(t), std::sin(t), 0.0); }),
      detail::sample_loop(n_per_comp, [](double t) { return Vec3(1.5 * std::cos(t), 0.0, 1.5 * std::sin(t)); }),
      detail::sample_loop(n_per_comp, [](double t) { return Vec3(1.5 + std::cos(t), std::sin(t), 0.0); }),
  });
}

/// Borromean rings: three (2, 1) ellipses in the three coordinate planes.
inline PolyLink borromean(int n_per_comp) {
  detail::require_vertices(n_per_comp);
  return PolyLink({
      detail::sample_loop(n_per_comp, [](double t) { return Vec3(2.0 * std::cos(t), std::sin(t), 0.0); }),
      detail::sample_loop(n_per_comp, [](double t) { return Vec3(0.0, 2.0 * std::cos(t), std::sin(t)); }),
      detail::sample_loop(n_per_comp, [](double t) { return Vec3(std::sin(t), 0.0, 2.0 * std::cos(t)); }),
  });
}

/// Parses "kind:arg,arg,..." seed descriptors:
///   circle:n[,R]  torus:p,q,n[,R,r]  hopf:n  chain:n  borromean:n
/// The per-component count n is given for links.
inline PolyLink from_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::string rest = spec.substr(colon + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const auto comma = rest.find(',', pos);
      const std::string tok = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      try {
        std::size_t used = 0;
        args.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw GeometryError("bad seed argument '" + tok + "' in '" + spec + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi)
      throw GeometryError("wrong number of arguments for seed '" + kind + "'");
  };
  auto as_int = [&](std::size_t i) { return static_cast<int>(std::lround(args[i])); };
  if (kind == "circle") {
    need(1, 2);
    return circle(as_int(0), args.size() > 1 ? args[1] : 1.0);
  }
  if (kind == "torus" || kind == "torus_knot") {
    need(3, 5);
    return torus_knot(as_int(0), as_int(1), as_int(2), args.size() > 3 ? args[3] : 2.0,
                      args.size() > 4 ? args[4] : 1.0);
  }
  if (kind == "hopf") {
    need(1, 1);
    return hopf(as_int(0));
  }
  if (kind == "chain") {
    need(1, 1);
    return chain(as_int(0));
  }
  if (kind == "borromean") {
    need(1, 1);
    return borromean(as_int(0));
  }
  throw GeometryError("unknown seed kind '" + kind + "'");
}

}  // namespace ropewalk::seeds
