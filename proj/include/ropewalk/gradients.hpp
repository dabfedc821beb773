#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "geometry.hpp"
#include "thickness.hpp"

namespace ropewalk {

/// One Vec3 per vertex of a PolyLink, stored flat in link vertex order.
class GradientField {
 public:
  GradientField() = default;
  explicit GradientField(const PolyLink& link) {
    offsets_.reserve(static_cast<std::size_t>(link.num_components()));
    int off = 0;
    for (const auto& c : link.components()) {
      offsets_.push_back(off);
      off += c.size();
    }
    data_ = Eigen::VectorXd::Zero(3 * off);
  }

  int num_vertices() const noexcept { return static_cast<int>(data_.size() / 3); }
  int flat_index(int comp, int vert) const { return offsets_[static_cast<std::size_t>(comp)] + vert; }

  auto at(int comp, int vert) { return data_.segment<3>(3 * flat_index(comp, vert)); }
  auto at(int comp, int vert) const { return data_.segment<3>(3 * flat_index(comp, vert)); }
  auto at_flat(int idx) { return data_.segment<3>(3 * idx); }
  auto at_flat(int idx) const { return data_.segment<3>(3 * idx); }

  const Eigen::VectorXd& flat() const noexcept { return data_; }
  Eigen::VectorXd& flat() noexcept { return data_; }
  double norm() const { return data_.norm(); }
  double max_vertex_norm() const {
    double m = 0.0;
    for (int i = 0; i < num_vertices(); ++i) m = std::max(m, at_flat(i).norm());
    return m;
  }

 private:
  std::vector<int> offsets_;
  Eigen::VectorXd data_;
};

/// A gradient supported on a handful of vertices.
struct SparseGradient {
  struct Entry {
    VertexRef vertex;
    Vec3 value;
  };
  std::vector<Entry> entries;

  void add(VertexRef v, const Vec3& g) { entries.push_back({v, g}); }

  GradientField densify(const PolyLink& link) const {
    GradientField field(link);
    for (const auto& e : entries) field.at(e.vertex.comp, e.vertex.vert) += e.value;
    return field;
  }
  void scatter(const PolyLink& link, Eigen::Ref<Eigen::VectorXd> flat, double scale = 1.0) const {
    for (const auto& e : entries)
      flat.segment<3>(3 * (link.vertex_offset(e.vertex.comp) + e.vertex.vert)) += scale * e.value;
  }
};

/// Gradient of total length: at each vertex, the sum of the unit vectors pointing
/// away from its two neighbours.
inline GradientField length_gradient(const PolyLink& link) {
  GradientField g(link);
  for (int c = 0; c < link.num_components(); ++c) {
    const Component& comp = link.component(c);
    for (int i = 0; i < comp.size(); ++i) {
      const Vec3 back = comp.vertex(i) - comp.vertex(i - 1);
      const Vec3 fwd = comp.vertex(i) - comp.vertex(i + 1);
      const double lb = back.norm();
      const double lf = fwd.norm();
      if (!(lb > 0.0) || !(lf > 0.0)) throw GeometryError("degenerate edge at vertex " + std::to_string(i));
      g.at(c, i) = back / lb + fwd / lf;
    }
  }
  return g;
}

/// Gradient of the chord |p - q| with the strut's edge parameters held fixed.
inline SparseGradient strut_gradient_sparse(const PolyLink& link, const Strut& s) {
  const Vec3 d = s.a.point(link) - s.b.point(link);
  const double len = d.norm();
  if (!(len > 0.0)) throw GeometryError("strut has zero chord");
  const Vec3 n = d / len;
  const Component& ca = link.component(s.a.comp);
  const Component& cb = link.component(s.b.comp);
  SparseGradient g;
  auto put = [&](int comp, int vert, double w, double sign) {
    if (w != 0.0) g.add({comp, vert}, sign * w * n);
  };
  put(s.a.comp, s.a.edge, 1.0 - s.a.param, 1.0);
  put(s.a.comp, ca.wrap(s.a.edge + 1), s.a.param, 1.0);
  put(s.b.comp, s.b.edge, 1.0 - s.b.param, -1.0);
  put(s.b.comp, cb.wrap(s.b.edge + 1), s.b.param, -1.0);
  return g;
}

inline GradientField strut_gradient(const PolyLink& link, const Strut& s) {
  return strut_gradient_sparse(link, s).densify(link);
}

/// Edge-length difference below which MinRad's min() is treated as a tie.
inline constexpr double kMinradTieTol = 1e-12;

/// Gradient of MinRad at (comp, vert) with respect to the vertex and its two
/// neighbours. Returns nullopt at a straight vertex, where MinRad is infinite
/// and the constraint is inactive. Exact edge-length ties average both branches.
inline std::optional<SparseGradient> minrad_gradient_sparse(const PolyLink& link, int comp, int vert) {
  const Component& c = link.component(comp);
  const double theta = turning_angle(link, comp, vert);
  if (theta == 0.0) return std::nullopt;

  const Vec3 a = c.edge(vert - 1);
  const Vec3 b = c.edge(vert);
  const double la = a.norm();
  const double lb = b.norm();
  const Vec3 ua = a / la;
  const Vec3 ub = b / lb;
  const double sin_t = std::sin(theta);
  const double cos_t = std::cos(theta);
  const double half_tan = std::tan(0.5 * theta);
  const double half_sin = std::sin(0.5 * theta);

  const Vec3 dtheta_da = -(ub - cos_t * ua) / (la * sin_t);
  const Vec3 dtheta_db = -(ua - cos_t * ub) / (lb * sin_t);

  // MinRad = l / (2 tan(theta/2)) with l the shorter edge.
  auto branch = [&](bool use_a, Vec3& ga, Vec3& gb) {
    const double l = use_a ? la : lb;
    const double df_dl = 1.0 / (2.0 * half_tan);
    const double df_dtheta = -l / (4.0 * half_sin * half_sin);
    ga = df_dtheta * dtheta_da;
    gb = df_dtheta * dtheta_db;
    (use_a ? ga : gb) += df_dl * (use_a ? ua : ub);
  };

  Vec3 ga;
  Vec3 gb;
  if (std::abs(la - lb) <= kMinradTieTol) {
    Vec3 ga2;
    Vec3 gb2;
    branch(true, ga, gb);
    branch(false, ga2, gb2);
    ga = 0.5 * (ga + ga2);
    gb = 0.5 * (gb + gb2);
  } else {
    branch(la < lb, ga, gb);
  }

  SparseGradient g;
  g.add({comp, c.wrap(vert - 1)}, -ga);
  g.add({comp, vert}, ga - gb);
  g.add({comp, c.wrap(vert + 1)}, gb);
  return g;
}

inline std::optional<GradientField> minrad_gradient(const PolyLink& link, int comp, int vert) {
  auto g = minrad_gradient_sparse(link, comp, vert);
  if (!g) return std::nullopt;
  return g->densify(link);
}

}  // namespace ropewalk
