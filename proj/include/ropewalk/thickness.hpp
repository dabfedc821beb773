#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <variant>
#include <vector>

#include "geometry.hpp"
#include "segment.hpp"

namespace ropewalk {

/// One end of a strut: a point at parameter `param` along edge (comp, edge).
struct StrutEnd {
  int comp = 0;
  int edge = 0;
  double param = 0.0;

  EdgeRef edge_ref() const { return {comp, edge}; }
  Vec3 point(const PolyLink& link) const {
    const Component& c = link.component(comp);
    return (1.0 - param) * c.vertex(edge) + param * c.vertex(edge + 1);
  }
};

/// A doubly-critical self-distance pair. End `a` always precedes end `b` in
/// (comp, edge) order.
struct Strut {
  StrutEnd a;
  StrutEnd b;
  double chord = 0.0;
  std::optional<double> lambda;

  /// Sort key (compA, edgeA, compB, edgeB).
  auto key() const { return std::tuple(a.comp, a.edge, b.comp, b.edge); }
  bool intra_component() const { return a.comp == b.comp; }
};

inline bool strut_order(const Strut& x, const Strut& y) { return x.key() < y.key(); }

/// True when the two edges are the same or share a vertex. Such pairs never
/// carry a meaningful contact.
inline bool edges_adjacent(const PolyLink& link, EdgeRef x, EdgeRef y) {
  if (x.comp != y.comp) return false;
  const Component& c = link.component(x.comp);
  return x.edge == y.edge || c.wrap(x.edge + 1) == y.edge || c.wrap(y.edge + 1) == x.edge;
}

namespace detail {

// Slack on the first-order local-minimum test; equal-distance continua are kept.
inline constexpr double kCriticalSlack = 1e-12;

// Direction leaving the clamped endpoint of edge `e` at parameter u into the
// neighbouring edge, or nullopt when the closest point is interior.
inline std::optional<Vec3> exit_direction(const Component& c, int e, double u) {
  if (u == 0.0) return (c.vertex(e - 1) - c.vertex(e)).normalized();
  if (u == 1.0) return (c.vertex(e + 2) - c.vertex(e + 1)).normalized();
  return std::nullopt;
}

/// Evaluates an admissible edge pair. Returns the strut when its closest-point
/// pair is a local minimum of the self-distance over the whole polygon.
/// Interior minimisers are always local minima (the distance is convex on each
/// edge-pair square); a minimiser clamped at a vertex must additionally not
/// decrease when that end slides onto the neighbouring edge.
inline std::optional<Strut> dcsd_pair(const PolyLink& link, EdgeRef x, EdgeRef y) {
  const Component& cx = link.component(x.comp);
  const Component& cy = link.component(y.comp);
  const SegmentPair sp = segment_min_distance(cx.vertex(x.edge), cx.vertex(x.edge + 1),
                                              cy.vertex(y.edge), cy.vertex(y.edge + 1));
  Strut s{{x.comp, x.edge, sp.u}, {y.comp, y.edge, sp.v}, sp.dist, std::nullopt};
  if (sp.dist == 0.0) return s;
  const Vec3 n = (s.a.point(link) - s.b.point(link)) / sp.dist;
  if (auto dir = exit_direction(cx, x.edge, sp.u); dir && n.dot(*dir) < -kCriticalSlack)
    return std::nullopt;
  if (auto dir = exit_direction(cy, y.edge, sp.v); dir && n.dot(*dir) > kCriticalSlack)
    return std::nullopt;
  return s;
}

struct FlatEdges {
  std::vector<EdgeRef> refs;
  explicit FlatEdges(const PolyLink& link) {
    refs.reserve(static_cast<std::size_t>(link.num_edges()));
    for (int c = 0; c < link.num_components(); ++c)
      for (int i = 0; i < link.component(c).size(); ++i) refs.push_back({c, i});
  }
};

inline void collect_pair(const PolyLink& link, EdgeRef x, EdgeRef y, double cutoff,
                         std::vector<Strut>& out) {
  if (edges_adjacent(link, x, y)) return;
  if (auto s = dcsd_pair(link, x, y); s && s->chord <= cutoff) out.push_back(*s);
}

}  // namespace detail

/// All doubly-critical self-distance pairs with chord <= cutoff, by scanning
/// every admissible edge pair. O(E^2). Sorted by (compA, edgeA, compB, edgeB).
/// `skip(a, b)` returning true drops an edge pair before any distance work.
template <class Skip>
std::vector<Strut> enumerate_dcsd_bruteforce(const PolyLink& link, double cutoff, Skip&& skip) {
  const detail::FlatEdges edges(link);
  std::vector<Strut> out;
  const std::size_t n = edges.refs.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!skip(edges.refs[i], edges.refs[j])) detail::collect_pair(link, edges.refs[i], edges.refs[j], cutoff, out);
  return out;
}

inline std::vector<Strut> enumerate_dcsd_bruteforce(const PolyLink& link, double cutoff = kInfinity) {
  return enumerate_dcsd_bruteforce(link, cutoff, [](EdgeRef, EdgeRef) { return false; });
}

/// Same output as enumerate_dcsd_bruteforce, with far edge pairs pruned by a
/// uniform hash grid. Edges are binned by midpoint into cells as wide as the
/// largest possible midpoint separation of a pair within `cutoff`, so only the
/// 27 surrounding cells need to be searched. Pairs for which `skip` holds are
/// never examined.
template <class Skip>
std::vector<Strut> enumerate_dcsd(const PolyLink& link, double cutoff, Skip&& skip) {
  const detail::FlatEdges edges(link);
  const std::size_t n = edges.refs.size();

  Eigen::AlignedBox3d bounds;
  for (const auto& c : link.components())
    for (const auto& v : c.vertices()) bounds.extend(v);
  const double extent = bounds.diagonal().maxCoeff();
  if (!std::isfinite(cutoff) || cutoff >= extent) return enumerate_dcsd_bruteforce(link, cutoff, skip);

  std::vector<Vec3> mid(n);
  std::vector<double> half(n);
  double max_half = 0.0;
  for (std::size_t g = 0; g < n; ++g) {
    const Component& c = link.component(edges.refs[g].comp);
    const Vec3 p = c.vertex(edges.refs[g].edge);
    const Vec3 q = c.vertex(edges.refs[g].edge + 1);
    mid[g] = 0.5 * (p + q);
    half[g] = 0.5 * (q - p).norm();
    max_half = std::max(max_half, half[g]);
  }
  // Segments within `cutoff` have midpoints within cutoff + half_a + half_b.
  const double slack = 1e-12 * (extent + cutoff);
  const double cell = cutoff + 2.0 * max_half + slack;
  const Vec3 origin = bounds.min();
  auto coord = [&](const Vec3& p) {
    return Eigen::Array<std::int64_t, 3, 1>(static_cast<std::int64_t>(std::floor((p.x() - origin.x()) / cell)),
                                            static_cast<std::int64_t>(std::floor((p.y() - origin.y()) / cell)),
                                            static_cast<std::int64_t>(std::floor((p.z() - origin.z()) / cell)));
  };
  auto key_of = [](std::int64_t i, std::int64_t j, std::int64_t k) {
    return static_cast<std::uint64_t>(((i + 1) << 42) ^ ((j + 1) << 21) ^ (k + 1));
  };

  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid;
  grid.reserve(n);
  std::vector<Eigen::Array<std::int64_t, 3, 1>> cells(n);
  for (std::size_t g = 0; g < n; ++g) {
    cells[g] = coord(mid[g]);
    grid[key_of(cells[g](0), cells[g](1), cells[g](2))].push_back(static_cast<std::uint32_t>(g));
  }

  std::vector<Strut> out;
  for (std::size_t g = 0; g < n; ++g)
    for (std::int64_t di = -1; di <= 1; ++di)
      for (std::int64_t dj = -1; dj <= 1; ++dj)
        for (std::int64_t dk = -1; dk <= 1; ++dk) {
          const auto it = grid.find(key_of(cells[g](0) + di, cells[g](1) + dj, cells[g](2) + dk));
          if (it == grid.end()) continue;
          for (const std::uint32_t h : it->second) {
            if (h <= g || skip(edges.refs[g], edges.refs[h])) continue;
            const double reach = cutoff + half[g] + half[h] + slack;
            if ((mid[g] - mid[h]).squaredNorm() <= reach * reach)
              detail::collect_pair(link, edges.refs[g], edges.refs[h], cutoff, out);
          }
        }
  // Each admissible pair is visited once, so the key order is total.
  std::sort(out.begin(), out.end(), strut_order);
  return out;
}

inline std::vector<Strut> enumerate_dcsd(const PolyLink& link, double cutoff) {
  return enumerate_dcsd(link, cutoff, [](EdgeRef, EdgeRef) { return false; });
}

/// Which mechanism sets the polygonal thickness.
using Governing = std::variant<VertexRef, Strut>;

struct ThicknessReport {
  double pthi = 0.0;
  Governing governing;
  double total_length = 0.0;
  double prop = 0.0;
  double min_minrad = kInfinity;
  /// Half of the shortest dcsd chord, or +infinity when no dcsd chord is
  /// shorter than twice the smallest MinRad.
  double min_strut_halfdist = kInfinity;

  bool kink_governed() const { return std::holds_alternative<VertexRef>(governing); }
};

/// Chords at or below this count as a self-intersection.
inline constexpr double kIntersectionDistance = 1e-14;
/// Relative gap under which MinRad and the strut half-distance count as tied.
inline constexpr double kTieTol = 1e-12;

/// Polygonal thickness: the smaller of the least MinRad and half the shortest
/// doubly-critical chord. A tie reports the kink.
inline ThicknessReport thickness(const PolyLink& link) {
  ThicknessReport rep;
  const auto [mr, vertex] = min_minrad(link);
  rep.min_minrad = mr;
  rep.total_length = total_length(link);

  // Only chords below 2 * min MinRad can set the thickness.
  const double cutoff = std::isfinite(mr) ? 2.0 * mr * (1.0 + 1e-9) : kInfinity;
  const auto dcsd = enumerate_dcsd(link, cutoff);
  const Strut* shortest = nullptr;
  for (const auto& s : dcsd) {
    if (s.chord <= kIntersectionDistance)
      throw GeometryError("link self-intersects between edges (" + std::to_string(s.a.comp) + "," +
                          std::to_string(s.a.edge) + ") and (" + std::to_string(s.b.comp) + "," +
                          std::to_string(s.b.edge) + ")");
    if (!shortest || s.chord < shortest->chord) shortest = &s;
  }
  if (shortest) rep.min_strut_halfdist = 0.5 * shortest->chord;

  // tan() roundoff can split an exact tie, so ties are judged relatively
  if (rep.min_minrad <= rep.min_strut_halfdist * (1.0 + kTieTol)) {
    rep.pthi = std::min(rep.min_minrad, rep.min_strut_halfdist);
    rep.governing = vertex;
  } else {
    rep.pthi = rep.min_strut_halfdist;
    rep.governing = *shortest;
  }
  if (!std::isfinite(rep.pthi)) throw GeometryError("thickness is unbounded");
  rep.prop = rep.total_length / rep.pthi;
  return rep;
}

inline double ropelength(const PolyLink& link) { return thickness(link).prop; }

inline constexpr double kDefaultActiveTol = 1e-5;

/// Doubly-critical pairs whose chord is within `delta` of the thickness
/// diameter 2 * pthi, sorted lexicographically. Multipliers are left empty.
inline std::vector<Strut> strut_set(const PolyLink& link, const ThicknessReport& report,
                                    double delta = kDefaultActiveTol) {
  return enumerate_dcsd(link, 2.0 * report.pthi + delta);
}

}  // namespace ropewalk
