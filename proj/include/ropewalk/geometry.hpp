#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace ropewalk {

using Vec3 = Eigen::Vector3d;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Turning angles at or above this are treated as the polygon doubling back on itself.
inline constexpr double kDoubleBackAngle = std::numbers::pi - 1e-9;

struct VertexRef {
  int comp = 0;
  int vert = 0;
  friend auto operator<=>(const VertexRef&, const VertexRef&) = default;
};

/// Edge `edge` of component `comp` joins vertex `edge` to vertex `edge + 1` (cyclically).
struct EdgeRef {
  int comp = 0;
  int edge = 0;
  friend auto operator<=>(const EdgeRef&, const EdgeRef&) = default;
};

/// A closed polygonal loop. Edge i joins v_i to v_{i+1 mod V}.
class Component {
 public:
  Component() = default;
  explicit Component(std::vector<Vec3> vertices) : vertices_(std::move(vertices)) {}

  int size() const noexcept { return static_cast<int>(vertices_.size()); }
  int wrap(int i) const noexcept {
    const int n = size();
    return ((i % n) + n) % n;
  }
  const Vec3& vertex(int i) const { return vertices_[static_cast<std::size_t>(wrap(i))]; }
  Vec3& vertex(int i) { return vertices_[static_cast<std::size_t>(wrap(i))]; }
  Vec3 edge(int i) const { return vertex(i + 1) - vertex(i); }
  double edge_length(int i) const { return edge(i).norm(); }
  double length() const {
    double sum = 0.0;
    for (int i = 0; i < size(); ++i) sum += edge_length(i);
    return sum;
  }
  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  std::vector<Vec3>& vertices() noexcept { return vertices_; }

 private:
  std::vector<Vec3> vertices_;
};

/// An ordered collection of closed polygonal components. Component order defines
/// arclength offsets and the flat vertex numbering used by gradient fields.
class PolyLink {
 public:
  PolyLink() = default;
  explicit PolyLink(std::vector<Component> components) : components_(std::move(components)) {
    validate();
  }

  /// Throws GeometryError unless every component has >= 3 finite vertices and
  /// every edge has positive length.
  void validate() const {
    if (components_.empty()) throw GeometryError("link has no components");
    for (std::size_t c = 0; c < components_.size(); ++c) {
      const Component& comp = components_[c];
      if (comp.size() < 3) throw GeometryError("component needs >= 3 vertices");
      for (int i = 0; i < comp.size(); ++i) {
        if (!comp.vertex(i).allFinite())
          throw GeometryError("non-finite coordinate in component " + std::to_string(c));
        if (!(comp.edge_length(i) > 0.0))
          throw GeometryError("zero-length edge " + std::to_string(i) + " in component " +
                              std::to_string(c));
      }
    }
  }

  int num_components() const noexcept { return static_cast<int>(components_.size()); }
  const Component& component(int c) const { return components_[static_cast<std::size_t>(c)]; }
  Component& component(int c) { return components_[static_cast<std::size_t>(c)]; }
  const std::vector<Component>& components() const noexcept { return components_; }

  int num_vertices() const noexcept {
    int n = 0;
    for (const auto& c : components_) n += c.size();
    return n;
  }
  int num_edges() const noexcept { return num_vertices(); }

  /// Offset of component c in the flat vertex order.
  int vertex_offset(int c) const noexcept {
    int off = 0;
    for (int k = 0; k < c; ++k) off += components_[static_cast<std::size_t>(k)].size();
    return off;
  }

  const Vec3& vertex(VertexRef v) const { return component(v.comp).vertex(v.vert); }
  Vec3 edge(EdgeRef e) const { return component(e.comp).edge(e.edge); }

  void apply(const auto& fn) {
    for (auto& c : components_)
      for (auto& v : c.vertices()) fn(v);
  }

 private:
  std::vector<Component> components_;
};

inline double total_length(const PolyLink& link) {
  double sum = 0.0;
  for (const auto& c : link.components()) sum += c.length();
  return sum;
}

inline double average_edge_length(const PolyLink& link) {
  return total_length(link) / link.num_edges();
}

/// Angle in [0, pi) between directions `a` and `b`; 0 for straight continuation.
inline double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

/// Turning angle at vertex `vert`: the angle between incoming and outgoing edges.
inline double turning_angle(const PolyLink& link, int comp, int vert) {
  const Component& c = link.component(comp);
  const Vec3 in = c.edge(vert - 1);
  const Vec3 out = c.edge(vert);
  if (!(in.norm() > 0.0) || !(out.norm() > 0.0))
    throw GeometryError("degenerate edge at vertex " + std::to_string(vert));
  const double theta = angle_between(in, out);
  if (theta >= kDoubleBackAngle)
    throw GeometryError("polygon doubles back at vertex " + std::to_string(vert) +
                        " of component " + std::to_string(comp));
  return theta;
}

/// Radius of the circle tangent to both edges at the vertex and passing through
/// the midpoint of the shorter one. +infinity at a straight vertex.
inline double minrad(const PolyLink& link, int comp, int vert) {
  const double theta = turning_angle(link, comp, vert);
  if (theta == 0.0) return kInfinity;
  const Component& c = link.component(comp);
  const double shorter = std::min(c.edge_length(vert - 1), c.edge_length(vert));
  return shorter / (2.0 * std::tan(0.5 * theta));
}

struct VertexGeometry {
  double turning_angle = 0.0;
  double prev_edge_len = 0.0;
  double next_edge_len = 0.0;
  double minrad = kInfinity;
};

inline VertexGeometry vertex_geometry(const PolyLink& link, int comp, int vert) {
  const Component& c = link.component(comp);
  return {turning_angle(link, comp, vert), c.edge_length(vert - 1), c.edge_length(vert),
          minrad(link, comp, vert)};
}

/// Smallest MinRad over all vertices, with the vertex attaining it (first on ties).
inline std::pair<double, VertexRef> min_minrad(const PolyLink& link) {
  double best = kInfinity;
  VertexRef where{};
  for (int c = 0; c < link.num_components(); ++c)
    for (int i = 0; i < link.component(c).size(); ++i) {
      const double r = minrad(link, c, i);
      if (r < best) {
        best = r;
        where = {c, i};
      }
    }
  return {best, where};
}

/// Global arclength coordinates. Component k starts at the summed lengths of
/// components 0..k-1.
class ArclengthIndex {
 public:
  explicit ArclengthIndex(const PolyLink& link) {
    double running = 0.0;
    edge_offsets_.resize(static_cast<std::size_t>(link.num_components()));
    for (int c = 0; c < link.num_components(); ++c) {
      component_offsets_.push_back(running);
      const Component& comp = link.component(c);
      auto& edges = edge_offsets_[static_cast<std::size_t>(c)];
      edges.reserve(static_cast<std::size_t>(comp.size()) + 1);
      for (int i = 0; i < comp.size(); ++i) {
        edges.push_back(running);
        running += comp.edge_length(i);
      }
      edges.push_back(running);
      component_lengths_.push_back(running - component_offsets_.back());
    }
    total_ = running;
  }

  const std::vector<double>& component_offsets() const noexcept { return component_offsets_; }
  const std::vector<double>& component_lengths() const noexcept { return component_lengths_; }
  double total_length() const noexcept { return total_; }

  /// Global offset at the start of edge (c, i).
  double edge_offset(int c, int i) const {
    return edge_offsets_[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
  }
  double edge_length(int c, int i) const {
    const auto& e = edge_offsets_[static_cast<std::size_t>(c)];
    return e[static_cast<std::size_t>(i) + 1] - e[static_cast<std::size_t>(i)];
  }
  /// Global coordinate of the point at parameter u on edge (c, i).
  double coordinate(int c, int i, double u) const { return edge_offset(c, i) + u * edge_length(c, i); }

 private:
  std::vector<double> component_offsets_;
  std::vector<double> component_lengths_;
  std::vector<std::vector<double>> edge_offsets_;
  double total_ = 0.0;
};

inline ArclengthIndex arclength_coordinates(const PolyLink& link) { return ArclengthIndex(link); }

}  // namespace ropewalk
