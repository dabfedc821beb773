#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Cholesky>

#include "geometry.hpp"
#include "thickness.hpp"

namespace ropewalk {

/// Circular arc replacing the corner at one vertex. A straight vertex has
/// angle 0 and start == end == vertex.
struct Arc {
  Vec3 vertex;
  Vec3 center;
  Vec3 start;  // tangency point on the incoming edge
  Vec3 end;    // tangency point on the outgoing edge
  double radius = 0.0;
  double angle = 0.0;

  bool present() const { return angle > 0.0; }
  double length() const { return radius * angle; }
};

/// Closed C1 curve alternating arcs (one per vertex) and straight segments:
/// segment i joins arcs[i].end to arcs[i + 1].start.
struct RoundedComponent {
  std::vector<Arc> arcs;

  int size() const { return static_cast<int>(arcs.size()); }
  const Arc& arc(int i) const { return arcs[static_cast<std::size_t>(((i % size()) + size()) % size())]; }
  Vec3 segment_start(int i) const { return arc(i).end; }
  Vec3 segment_end(int i) const { return arc(i + 1).start; }
  double segment_length(int i) const { return (segment_end(i) - segment_start(i)).norm(); }
};

struct RoundedCurve {
  double radius = 0.0;
  std::vector<RoundedComponent> components;
};

/// Rounds every corner with an arc of radius rho tangent to both incident
/// edges. Requires rho <= MinRad at every vertex, which keeps each tangency
/// point within the nearer half of its edge.
inline RoundedCurve round_corners(const PolyLink& link, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw GeometryError("corner radius must be positive and finite");
  constexpr double kSlack = 1e-12;
  RoundedCurve out;
  out.radius = rho;
  for (int c = 0; c < link.num_components(); ++c) {
    const Component& comp = link.component(c);
    RoundedComponent rc;
    for (int i = 0; i < comp.size(); ++i) {
      const double theta = turning_angle(link, c, i);
      Arc arc;
      arc.vertex = comp.vertex(i);
      arc.radius = rho;
      if (theta == 0.0) {
        arc.center = arc.start = arc.end = arc.vertex;
        rc.arcs.push_back(arc);
        continue;
      }
      const Vec3 a = comp.edge(i - 1);
      const Vec3 b = comp.edge(i);
      const double half_short = 0.5 * std::min(a.norm(), b.norm());
      double trim = rho * std::tan(0.5 * theta);
      if (trim > half_short * (1.0 + kSlack))
        throw GeometryError("corner radius " + std::to_string(rho) + " exceeds MinRad " +
                            std::to_string(minrad(link, c, i)) + " at vertex (" + std::to_string(c) + "," +
                            std::to_string(i) + ")");
      trim = std::min(trim, half_short);
      const Vec3 ua = a.normalized();
      const Vec3 ub = b.normalized();
      arc.angle = theta;
      arc.start = arc.vertex - trim * ua;
      arc.end = arc.vertex + trim * ub;
      arc.center = arc.vertex + (ub - ua).normalized() * (rho / std::cos(0.5 * theta));
      rc.arcs.push_back(arc);
    }
    out.components.push_back(std::move(rc));
  }
  return out;
}

inline double smooth_length(const RoundedCurve& curve) {
  double sum = 0.0;
  for (const auto& rc : curve.components)
    for (int i = 0; i < rc.size(); ++i) sum += rc.arc(i).length() + rc.segment_length(i);
  return sum;
}

namespace detail {

// Arclength parametrisation of one rounded component.
class PiecewiseCurve {
 public:
  struct Piece {
    bool is_arc = false;
    double offset = 0.0;
    double length = 0.0;
    Vec3 origin;  // segment start, or arc centre
    Vec3 dir;     // segment direction, or unit vector centre -> arc start
    Vec3 side;    // arc: unit vector of travel at the start
    double radius = 0.0;
  };

  explicit PiecewiseCurve(const RoundedComponent& rc) {
    for (int i = 0; i < rc.size(); ++i) {
      const Arc& a = rc.arc(i);
      if (a.present()) {
        Piece p;
        p.is_arc = true;
        p.offset = total_;
        p.length = a.length();
        p.origin = a.center;
        p.radius = a.radius;
        p.dir = (a.start - a.center).normalized();
        // Travel direction at the start is along the incoming edge.
        const Vec3 incoming = (a.vertex - a.start);
        p.side = (incoming - incoming.dot(p.dir) * p.dir).normalized();
        pieces_.push_back(p);
        total_ += p.length;
      }
      const double len = rc.segment_length(i);
      if (len > 0.0) {
        Piece p;
        p.offset = total_;
        p.length = len;
        p.origin = rc.segment_start(i);
        p.dir = (rc.segment_end(i) - rc.segment_start(i)) / len;
        pieces_.push_back(p);
        total_ += len;
      }
    }
  }

  double length() const { return total_; }
  const std::vector<Piece>& pieces() const { return pieces_; }

  // Point, unit tangent and curvature vector at arclength s (taken mod length).
  void eval(double s, Vec3& pos, Vec3& tangent, Vec3& curvature) const {
    s = std::fmod(s, total_);
    if (s < 0.0) s += total_;
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), s,
                               [](double x, const Piece& p) { return x < p.offset; });
    const Piece& p = *(it == pieces_.begin() ? it : it - 1);
    const double local = std::clamp(s - p.offset, 0.0, p.length);
    if (!p.is_arc) {
      pos = p.origin + local * p.dir;
      tangent = p.dir;
      curvature.setZero();
      return;
    }
    const double phi = local / p.radius;
    const Vec3 radial = std::cos(phi) * p.dir + std::sin(phi) * p.side;
    pos = p.origin + p.radius * radial;
    tangent = -std::sin(phi) * p.dir + std::cos(phi) * p.side;
    curvature = -radial / p.radius;
  }

  Vec3 point(double s) const {
    Vec3 x, t, k;
    eval(s, x, t, k);
    return x;
  }

 private:
  std::vector<Piece> pieces_;
  double total_ = 0.0;
};

struct SampledCurve {
  PolyLink polygon;
  std::vector<std::vector<double>> sigma;  // arclength of each sample, per component
};

inline SampledCurve sample_pieces(const std::vector<PiecewiseCurve>& curves, int density) {
  SampledCurve out;
  std::vector<Component> comps;
  for (const auto& pc : curves) {
    std::vector<Vec3> pts;
    std::vector<double> sig;
    const double tiny = 1e-12 * pc.length();
    for (const auto& p : pc.pieces()) {
      if (p.length <= tiny) continue;
      for (int k = 0; k < density; ++k) {
        const double s = p.offset + p.length * k / density;
        pts.push_back(pc.point(s));
        sig.push_back(s);
      }
    }
    comps.emplace_back(std::move(pts));
    out.sigma.push_back(std::move(sig));
  }
  out.polygon = PolyLink(std::move(comps));
  return out;
}

// Newton descent on |g(s) - g(t)|^2 / 2 from a sampled contact; returns the
// distance at the refined local minimum, or the starting distance if the
// iteration wanders more than `reach` in either parameter.
inline double refine_contact(const PiecewiseCurve& cs, const PiecewiseCurve& ct, double s0, double t0, double reach) {
  auto value = [&](double s, double t) { return 0.5 * (cs.point(s) - ct.point(t)).squaredNorm(); };
  double s = s0;
  double t = t0;
  double f = value(s, t);
  const double f0 = f;
  for (int it = 0; it < 50; ++it) {
    Vec3 ps, ts, ks, pt, tt, kt;
    cs.eval(s, ps, ts, ks);
    ct.eval(t, pt, tt, kt);
    const Vec3 d = ps - pt;
    const Eigen::Vector2d g(d.dot(ts), -d.dot(tt));
    Eigen::Matrix2d h;
    h << ts.squaredNorm() + d.dot(ks), -ts.dot(tt), -ts.dot(tt), tt.squaredNorm() - d.dot(kt);
    Eigen::Vector2d step;
    Eigen::LLT<Eigen::Matrix2d> llt(h);
    if (llt.info() == Eigen::Success && h(0, 0) > 0.0 && h.determinant() > 1e-14 * h.squaredNorm())
      step = -llt.solve(g);
    else
      step = -g;
    double alpha = 1.0;
    bool moved = false;
    while (alpha > 1e-12) {
      const double fs = value(s + alpha * step(0), t + alpha * step(1));
      if (fs < f) {
        s += alpha * step(0);
        t += alpha * step(1);
        moved = fs < f * (1.0 - 1e-15);
        f = fs;
        break;
      }
      alpha *= 0.5;
    }
    if (std::abs(s - s0) > reach || std::abs(t - t0) > reach) return std::sqrt(2.0 * f0);
    if (!moved || alpha * step.norm() <= 1e-15 * (cs.length() + ct.length())) break;
  }
  return std::sqrt(2.0 * f);
}

// Smooth-curve thickness estimate from one sampling density.
inline double sampled_thickness(const RoundedCurve& curve, const std::vector<PiecewiseCurve>& pcs, int density) {
  const SampledCurve sc = sample_pieces(pcs, density);
  double best = kInfinity;
  for (const auto& rc : curve.components)
    for (const auto& a : rc.arcs)
      if (a.present()) best = std::min(best, a.radius);
  const double rho = curve.radius;
  // Samples lie on the curve, and the sampled polygon strays from it by at
  // most the sagitta of one sample step on the widest arc. Collect chords up
  // to 2 rho plus twice that (and a little), then refine each on the exact curve.
  double widest = 0.0;
  for (const auto& rc : curve.components)
    for (const auto& a : rc.arcs) widest = std::max(widest, a.angle);
  const double sagitta = rho * (1.0 - std::cos(0.5 * widest / density));
  const double cutoff = 2.0 * rho * (1.0 + 1e-4) + 4.0 * sagitta;
  // Curvature is at most 1/rho, and an arc shorter than pi rho cannot carry a
  // chord normal to it at both ends. Sample pairs closer than that along the
  // curve (with room for the refinement below to move) are skipped; on a dense
  // sampling they are almost all of the work.
  std::vector<double> exclude(pcs.size());
  for (std::size_t c = 0; c < pcs.size(); ++c)
    exclude[c] = std::numbers::pi * rho * 0.9 - 10.0 * pcs[c].length() / static_cast<double>(sc.sigma[c].size());
  auto near_along = [&](EdgeRef x, EdgeRef y) {
    if (x.comp != y.comp) return false;
    const auto& sig = sc.sigma[static_cast<std::size_t>(x.comp)];
    const double total = pcs[static_cast<std::size_t>(x.comp)].length();
    const double d = std::abs(sig[static_cast<std::size_t>(x.edge)] - sig[static_cast<std::size_t>(y.edge)]);
    return std::min(d, total - d) < exclude[static_cast<std::size_t>(x.comp)];
  };
  const auto struts = enumerate_dcsd(sc.polygon, cutoff, near_along);
  for (const auto& st : struts) {
    const auto& sa = sc.sigma[static_cast<std::size_t>(st.a.comp)];
    const auto& sb = sc.sigma[static_cast<std::size_t>(st.b.comp)];
    const PiecewiseCurve& ca = pcs[static_cast<std::size_t>(st.a.comp)];
    const PiecewiseCurve& cb = pcs[static_cast<std::size_t>(st.b.comp)];
    auto sigma_at = [](const std::vector<double>& sig, double total, int e, double u) {
      const double s0 = sig[static_cast<std::size_t>(e)];
      double s1 = static_cast<std::size_t>(e) + 1 < sig.size() ? sig[static_cast<std::size_t>(e) + 1] : total;
      return s0 + u * (s1 - s0);
    };
    const double s = sigma_at(sa, ca.length(), st.a.edge, st.a.param);
    const double t = sigma_at(sb, cb.length(), st.b.edge, st.b.param);
    const double spacing = 4.0 * std::max(ca.length() / static_cast<double>(sa.size()),
                                          cb.length() / static_cast<double>(sb.size()));
    best = std::min(best, 0.5 * refine_contact(ca, cb, s, t, spacing));
  }
  return best;
}

}  // namespace detail

/// Thickness of the rounded curve: the smaller of the arc radius and half the
/// shortest doubly-critical chord. Chords are found on a resampling with
/// `density` points per arc and per segment and then refined on the exact
/// curve; the density is doubled (up to four times) until two successive
/// estimates agree to 1e-6 relative.
inline double smooth_thickness(const RoundedCurve& curve, int density = 8) {
  if (density < 8) throw GeometryError("sampling density must be at least 8");
  std::vector<detail::PiecewiseCurve> pcs;
  for (const auto& rc : curve.components) pcs.emplace_back(rc);
  double prev = detail::sampled_thickness(curve, pcs, density);
  for (int k = 0; k < 4; ++k) {
    density *= 2;
    const double cur = detail::sampled_thickness(curve, pcs, density);
    if (std::abs(cur - prev) <= 1e-6 * cur) return cur;
    prev = cur;
  }
  throw NumericalError("smooth thickness did not converge under refinement (last density " +
                       std::to_string(density) + ")");
}

/// Dense polyline approximation of the rounded curve, `density` points per
/// arc and per segment.
inline PolyLink sample_rounded(const RoundedCurve& curve, int density = 8) {
  std::vector<detail::PiecewiseCurve> pcs;
  for (const auto& rc : curve.components) pcs.emplace_back(rc);
  return detail::sample_pieces(pcs, density).polygon;
}

struct SmoothBound {
  double polygon_ropelength = 0.0;
  double radius = 0.0;  // arc radius, the polygon's thickness
  double smooth_length = 0.0;
  double smooth_thickness = 0.0;
  double bound = 0.0;
};

/// Rounds the corners at rho = PThi and reports the rounded curve's ropelength.
inline SmoothBound smooth_bound(const PolyLink& link) {
  const ThicknessReport rep = thickness(link);
  const RoundedCurve curve = round_corners(link, rep.pthi);
  SmoothBound out;
  out.polygon_ropelength = rep.prop;
  out.radius = rep.pthi;
  out.smooth_length = smooth_length(curve);
  out.smooth_thickness = smooth_thickness(curve);
  out.bound = out.smooth_length / out.smooth_thickness;
  return out;
}

inline double smooth_ropelength_bound(const PolyLink& link) { return smooth_bound(link).bound; }

}  // namespace ropewalk
