#pragma once

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>
#include <variant>
#include <vector>

#include "geometry.hpp"
#include <Eigen/Sparse>

#include "gradients.hpp"
#include "metric.hpp"
#include "nnls.hpp"
#include "thickness.hpp"

namespace ropewalk {

struct TightenConfig {
  /// Target thickness (tube radius). 0.5 gives a unit-diameter tube.
  double tau = 0.5;
  /// Constraints within this of their bound are active.
  double active_tol = kDefaultActiveTol;
  int max_steps = 20000;
  /// Largest vertex displacement tried by the line search; <= 0 means 0.1 x
  /// the average edge length.
  double step_init = 0.0;
  double step_shrink = 0.5;
  /// Allowed constraint violation; <= 0 means 1e-9 x tau.
  double feas_tol = 0.0;
  double grad_tol = 1e-4;
  /// Accepted steps between equilateralisations; 0 disables.
  int resample_every = 50;
  /// Stop once total length has dropped by less than stall_tol (relative) over
  /// the last stall_window accepted steps; 0 disables.
  int stall_window = 200;
  double stall_tol = 1e-6;
  /// Length scale of the Sobolev metric used for descent and correction steps;
  /// <= 0 means tau.
  double smoothing_length = 0.0;
  std::uint64_t rng_seed = 0x5eedULL;
  /// Called after every step with the step index and current link.
  std::function<void(int, const PolyLink&)> on_step;

  double feasibility_tol() const { return feas_tol > 0.0 ? feas_tol : 1e-9 * tau; }
  double metric_length() const { return smoothing_length > 0.0 ? smoothing_length : tau; }
  void validate() const {
    if (!(tau > 0.0)) throw GeometryError("tau must be positive");
    if (!(step_shrink > 0.0 && step_shrink < 1.0)) throw GeometryError("step_shrink must lie in (0, 1)");
    if (!(active_tol > 0.0) || !(grad_tol > 0.0)) throw GeometryError("tolerances must be positive");
    if (max_steps < 0) throw GeometryError("max_steps must be non-negative");
  }
};

/// A strut (chord >= 2 tau) or kink (MinRad >= tau) constraint, linearised.
struct Constraint {
  std::variant<Strut, VertexRef> what;
  /// chord - 2 tau, or MinRad - tau.
  double value = 0.0;
  /// Gradient of the constrained quantity (chord or MinRad).
  SparseGradient gradient;
  double multiplier = 0.0;

  bool is_strut() const { return std::holds_alternative<Strut>(what); }
  /// Identity stable across nearby configurations: the edge pair or vertex.
  std::tuple<int, int, int, int, int> identity() const {
    if (const auto* s = std::get_if<Strut>(&what)) return {0, s->a.comp, s->a.edge, s->b.comp, s->b.edge};
    const auto& v = std::get<VertexRef>(what);
    return {1, v.comp, v.vert, 0, 0};
  }
};

struct ActiveSet {
  std::vector<Constraint> constraints;

  int num_struts() const {
    return static_cast<int>(std::count_if(constraints.begin(), constraints.end(),
                                          [](const Constraint& c) { return c.is_strut(); }));
  }
  int num_kinks() const { return static_cast<int>(constraints.size()) - num_struts(); }
  /// Struts carrying their solved multipliers, in lexicographic order.
  std::vector<Strut> struts() const {
    std::vector<Strut> out;
    for (const auto& c : constraints)
      if (const auto* s = std::get_if<Strut>(&c.what)) {
        out.push_back(*s);
        out.back().lambda = c.multiplier;
      }
    return out;
  }
};

struct StepReport {
  int step_index = 0;
  double length_before = 0.0;
  double length_after = 0.0;
  double pthi_before = 0.0;
  double pthi_after = 0.0;
  int n_active_struts = 0;
  int n_active_kinks = 0;
  double projected_grad_norm = 0.0;
  double step_size = 0.0;
  bool accepted = false;
};

namespace detail {

struct ConstraintValues {
  std::vector<Strut> struts;
  std::vector<std::pair<VertexRef, double>> kinks;  // vertex and MinRad
  double worst = kInfinity;  // smallest constraint value
  std::string worst_name;
};

// Struts with chord <= 2 tau + margin and kinks with MinRad <= tau + margin.
inline ConstraintValues near_constraints(const PolyLink& link, double tau, double margin) {
  ConstraintValues out;
  out.struts = enumerate_dcsd(link, 2.0 * tau + margin);
  for (const auto& s : out.struts) {
    if (s.chord <= kIntersectionDistance) throw GeometryError("link self-intersects");
    const double v = s.chord - 2.0 * tau;
    if (v < out.worst) {
      out.worst = v;
      std::ostringstream os;
      os << "strut (" << s.a.comp << "," << s.a.edge << ")-(" << s.b.comp << "," << s.b.edge << ") chord "
         << s.chord;
      out.worst_name = os.str();
    }
  }
  for (int c = 0; c < link.num_components(); ++c)
    for (int i = 0; i < link.component(c).size(); ++i) {
      const double r = minrad(link, c, i);
      if (r <= tau + margin) {
        out.kinks.push_back({{c, i}, r});
        if (r - tau < out.worst) {
          out.worst = r - tau;
          std::ostringstream os;
          os << "kink (" << c << "," << i << ") MinRad " << r;
          out.worst_name = os.str();
        }
      }
    }
  return out;
}

// Gram matrix and right-hand side for columns given as sparse gradients.
inline Eigen::MatrixXd sparse_gram(const PolyLink& link, const std::vector<const SparseGradient*>& cols) {
  const auto m = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  std::vector<std::vector<std::pair<Eigen::Index, Vec3>>> by_vertex(static_cast<std::size_t>(link.num_vertices()));
  for (Eigen::Index k = 0; k < m; ++k)
    for (const auto& e : cols[static_cast<std::size_t>(k)]->entries)
      by_vertex[static_cast<std::size_t>(link.vertex_offset(e.vertex.comp) + e.vertex.vert)].push_back({k, e.value});
  for (const auto& list : by_vertex)
    for (const auto& [k, gk] : list)
      for (const auto& [l, gl] : list) gram(k, l) += gk.dot(gl);
  return gram;
}

inline double sparse_dot(const PolyLink& link, const SparseGradient& g, const Eigen::VectorXd& flat) {
  double s = 0.0;
  for (const auto& e : g.entries)
    s += e.value.dot(flat.segment<3>(3 * (link.vertex_offset(e.vertex.comp) + e.vertex.vert)));
  return s;
}

// Constraint gradients a_k together with z_k = M^-1 a_k for the Sobolev
// metric M, stored as rows: zr(k, 3v + d) is coordinate d of z_k at vertex v.
class MetricBasis {
 public:
  MetricBasis(const PolyLink& link, const SobolevMetric& metric, std::vector<const SparseGradient*> cols)
      : cols_(std::move(cols)), n_(link.num_vertices()) {
    const auto m = static_cast<Eigen::Index>(cols_.size());
    rows_.resize(cols_.size());
    Eigen::MatrixXd zc = Eigen::MatrixXd::Zero(3 * n_, m);
    for (Eigen::Index k = 0; k < m; ++k)
      for (const auto& e : cols_[static_cast<std::size_t>(k)]->entries) {
        const int off = metric.component_offset(e.vertex.comp);
        const Eigen::VectorXd& f = metric.kernel(e.vertex.comp);
        const auto n = static_cast<int>(f.size());
        rows_[static_cast<std::size_t>(k)].push_back({off + e.vertex.vert, e.value});
        double* col = zc.col(k).data() + 3 * off;
        for (int w = 0; w < n; ++w) {
          int lag = w - e.vertex.vert;
          if (lag < 0) lag += n;
          const double fl = f(lag);
          col[3 * w] += fl * e.value.x();
          col[3 * w + 1] += fl * e.value.y();
          col[3 * w + 2] += fl * e.value.z();
        }
      }
    zr_ = zc.transpose();
  }

  Eigen::Index size() const { return static_cast<Eigen::Index>(cols_.size()); }

  // A^T M^-1 A, symmetrised.
  Eigen::MatrixXd gram() const {
    const Eigen::Index m = size();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index l = 0; l < m; ++l)
      for (const auto& [v, a] : rows_[static_cast<std::size_t>(l)])
        g.col(l) += zr_.col(3 * v) * a.x() + zr_.col(3 * v + 1) * a.y() + zr_.col(3 * v + 2) * a.z();
    for (Eigen::Index l = 0; l < m; ++l)
      for (Eigen::Index k = l + 1; k < m; ++k) g(k, l) = g(l, k) = 0.5 * (g(k, l) + g(l, k));
    return g;
  }

  // Z^T v for a flat 3N field.
  Eigen::VectorXd z_dot(const Eigen::VectorXd& flat) const { return zr_ * flat; }

  // Z y as a flat 3N field.
  Eigen::VectorXd z_times(const Eigen::VectorXd& y) const { return zr_.transpose() * y; }

 private:
  std::vector<const SparseGradient*> cols_;
  std::vector<std::vector<std::pair<int, Vec3>>> rows_;
  Eigen::Index n_;
  Eigen::MatrixXd zr_;
};

inline void displace(PolyLink& link, const Eigen::VectorXd& flat, double scale) {
  int idx = 0;
  for (int c = 0; c < link.num_components(); ++c)
    for (auto& v : link.component(c).vertices()) {
      v += scale * flat.segment<3>(3 * idx);
      ++idx;
    }
}

}  // namespace detail

namespace detail {

// Linearised constraints within `margin` of their bounds, struts first.
inline std::vector<Constraint> constraints_within(const PolyLink& link, const TightenConfig& cfg, double margin) {
  const auto near = near_constraints(link, cfg.tau, margin);
  if (near.worst < -cfg.feasibility_tol())
    throw GeometryError("infeasible configuration: " + near.worst_name + " violates tau = " +
                        std::to_string(cfg.tau) + " by " + std::to_string(-near.worst));
  std::vector<Constraint> out;
  out.reserve(near.struts.size() + near.kinks.size());
  for (const auto& s : near.struts) out.push_back({s, s.chord - 2.0 * cfg.tau, strut_gradient_sparse(link, s), 0.0});
  for (const auto& [v, r] : near.kinks)
    if (auto g = minrad_gradient_sparse(link, v.comp, v.vert)) out.push_back({v, r - cfg.tau, std::move(*g), 0.0});
  return out;
}

inline ActiveSet active_subset(const std::vector<Constraint>& cons, double tol) {
  ActiveSet set;
  for (const auto& c : cons)
    if (c.value <= tol) set.constraints.push_back(c);
  return set;
}

}  // namespace detail

/// Active strut and kink constraints at target thickness cfg.tau, with
/// gradients. Throws GeometryError naming the worst violation when the link is
/// infeasible by more than the feasibility tolerance.
inline ActiveSet collect_active(const PolyLink& link, const TightenConfig& cfg) {
  return detail::active_subset(detail::constraints_within(link, cfg, cfg.active_tol), cfg.active_tol);
}

struct MultiplierSolution {
  Eigen::VectorXd lambda;
  GradientField projected;
};

/// Multipliers lambda >= 0 minimising | -grad L + sum lambda_k grad c_k |, i.e.
/// nonnegative least squares with columns -grad c_k against target -grad L.
/// Writes the multipliers into `active` and returns the projected descent
/// direction -grad L + sum lambda_k grad c_k. `warm` lists constraint indices
/// expected to carry positive multipliers.
inline MultiplierSolution solve_multipliers(const PolyLink& link, ActiveSet& active,
                                            const GradientField& neg_len_grad,
                                            std::vector<int> warm = {}) {
  MultiplierSolution out{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(active.constraints.size())),
                         neg_len_grad};
  if (active.constraints.empty()) return out;
  std::vector<const SparseGradient*> cols;
  cols.reserve(active.constraints.size());
  for (const auto& c : active.constraints) cols.push_back(&c.gradient);
  const Eigen::MatrixXd gram = detail::sparse_gram(link, cols);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k)
    rhs(static_cast<Eigen::Index>(k)) = -detail::sparse_dot(link, *cols[k], neg_len_grad.flat());
  const double col_scale = std::sqrt(std::max(gram.diagonal().maxCoeff(), 0.0));
  const double tol = 1e-12 * std::max(col_scale * neg_len_grad.norm(), 1e-300);
  const NnlsResult sol = nnls_gram(gram, rhs, tol, std::move(warm));
  out.lambda = sol.x;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const double lam = sol.x(static_cast<Eigen::Index>(k));
    active.constraints[k].multiplier = lam;
    if (lam != 0.0) cols[k]->scatter(link, out.projected.flat(), lam);
  }
  return out;
}

/// Struts within delta of the thickness diameter, carrying multipliers from a
/// single solve at tau = PThi (kinks at the same tolerance take part in the
/// solve but are not returned).
inline std::vector<Strut> struts_with_multipliers(const PolyLink& link, double delta = kDefaultActiveTol) {
  TightenConfig cfg;
  cfg.tau = thickness(link).pthi;
  cfg.active_tol = delta;
  ActiveSet active = collect_active(link, cfg);
  GradientField neg = length_gradient(link);
  neg.flat() *= -1.0;
  solve_multipliers(link, active, neg);
  return active.struts();
}

/// Gauss-Newton projection onto the constraint surface: repeatedly moves the
/// violated constraints back to their bounds with the linearised correction of
/// least norm in the Sobolev metric. Throws NumericalError if 50 iterations do not bring every
/// violation within the feasibility tolerance.
inline PolyLink restore_feasibility(PolyLink link, const TightenConfig& cfg) {
  const double tol = cfg.feasibility_tol();
  std::optional<SobolevMetric> metric;
  for (int iter = 0; iter < 50; ++iter) {
    const auto near = detail::near_constraints(link, cfg.tau, 0.0);
    if (near.worst >= -tol) return link;

    std::vector<SparseGradient> grads;
    std::vector<double> deficit;
    for (const auto& s : near.struts) {
      if (s.chord - 2.0 * cfg.tau >= 0.0) continue;
      grads.push_back(strut_gradient_sparse(link, s));
      deficit.push_back(2.0 * cfg.tau - s.chord);
    }
    for (const auto& [v, r] : near.kinks) {
      if (r - cfg.tau >= 0.0) continue;
      if (auto g = minrad_gradient_sparse(link, v.comp, v.vert)) {
        grads.push_back(std::move(*g));
        deficit.push_back(cfg.tau - r);
      }
    }
    std::vector<const SparseGradient*> cols;
    for (const auto& g : grads) cols.push_back(&g);
    if (!metric) metric.emplace(link, cfg.metric_length());
    const detail::MetricBasis basis(link, *metric, cols);
    Eigen::MatrixXd jjt = basis.gram();
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(deficit.data(), static_cast<Eigen::Index>(deficit.size()));
    jjt.diagonal().array() += 1e-10 * std::max(1.0, jjt.diagonal().maxCoeff());
    const Eigen::VectorXd y = jjt.ldlt().solve(rhs);
    const Eigen::VectorXd delta = basis.z_times(y);
    if (!delta.allFinite()) break;
    // A correction far larger than the violation it repairs means the
    // linearisation is degenerate; let the caller retry from elsewhere.
    double dmax = 0.0;
    for (Eigen::Index i = 0; i < delta.size() / 3; ++i) dmax = std::max(dmax, delta.segment<3>(3 * i).norm());
    if (dmax > 0.25 * cfg.tau) break;
    detail::displace(link, delta, 1.0);
    link.validate();
  }
  const auto near = detail::near_constraints(link, cfg.tau, 0.0);
  if (near.worst >= -tol) return link;
  throw NumericalError("feasibility restoration failed: " + near.worst_name);
}

/// Per component, redistributes the same number of vertices at equal arclength
/// spacing along the current polygon, starting from vertex 0.
inline PolyLink equilateralize(const PolyLink& link) {
  std::vector<Component> comps;
  for (const auto& c : link.components()) {
    const int n = c.size();
    std::vector<double> cum(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 0; i < n; ++i) cum[static_cast<std::size_t>(i) + 1] = cum[static_cast<std::size_t>(i)] + c.edge_length(i);
    const double len = cum.back();
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(n));
    pts.push_back(c.vertex(0));
    int e = 0;
    for (int k = 1; k < n; ++k) {
      const double s = len * k / n;
      while (e < n - 1 && cum[static_cast<std::size_t>(e) + 1] < s) ++e;
      const double el = cum[static_cast<std::size_t>(e) + 1] - cum[static_cast<std::size_t>(e)];
      const double u = std::clamp((s - cum[static_cast<std::size_t>(e)]) / el, 0.0, 1.0);
      pts.push_back((1.0 - u) * c.vertex(e) + u * c.vertex(e + 1));
    }
    comps.emplace_back(std::move(pts));
  }
  return PolyLink(std::move(comps));
}

/// Ratio of the longest to the shortest edge within any component.
inline double edge_length_ratio(const PolyLink& link) {
  double worst = 1.0;
  for (const auto& c : link.components()) {
    double lo = kInfinity;
    double hi = 0.0;
    for (int i = 0; i < c.size(); ++i) {
      lo = std::min(lo, c.edge_length(i));
      hi = std::max(hi, c.edge_length(i));
    }
    worst = std::max(worst, hi / lo);
  }
  return worst;
}

/// Uniformly scales the link about the origin so its thickness equals tau.
inline PolyLink rescale_to_thickness(PolyLink link, double tau) {
  const double factor = tau / thickness(link).pthi;
  link.apply([&](Vec3& v) { v *= factor; });
  return link;
}

struct StepResult {
  PolyLink link;
  StepReport report;
};

/// Backtracking line search along the projected direction. The trial moves
/// every vertex by t * projected / max|projected_i|, so t is the largest vertex
/// displacement. t starts at `t_start` and shrinks by cfg.step_shrink until the
/// feasibility-restored trial is shorter; below 1e-12 * t_start the step is
/// rejected and the input link returned.
inline StepResult step(const PolyLink& link, const TightenConfig& cfg, const ActiveSet& active,
                       const GradientField& projected, double t_start, double pthi_before = 0.0) {
  StepReport rep;
  rep.length_before = total_length(link);
  rep.pthi_before = pthi_before;
  rep.n_active_struts = active.num_struts();
  rep.n_active_kinks = active.num_kinks();
  rep.projected_grad_norm = projected.norm();
  const double dmax = projected.max_vertex_norm();
  if (!(dmax > 0.0) || !(t_start > 0.0)) return {link, rep};
  const Eigen::VectorXd dir = projected.flat() / dmax;
  for (double t = t_start; t >= 1e-12 * t_start; t *= cfg.step_shrink) {
    PolyLink trial = link;
    detail::displace(trial, dir, t);
    try {
      trial.validate();
      trial = restore_feasibility(std::move(trial), cfg);
    } catch (const Error&) {
      continue;
    }
    const double len = total_length(trial);
    if (len < rep.length_before) {
      rep.length_after = len;
      rep.step_size = t;
      rep.accepted = true;
      return {std::move(trial), rep};
    }
  }
  rep.length_after = rep.length_before;
  return {link, rep};
}

using ConstraintKey = std::tuple<int, int, int, int, int>;

/// Descent step of the tightener: the minimiser of
///   <grad L, d> + |d|_M^2 / (2 sigma)   subject to   c_k + <grad c_k, d> >= 0
/// over the given constraints (those near their bounds), where M is the Sobolev
/// metric. Its dual is a nonnegative least-squares problem in Gram form, solved
/// with the same Lawson-Hanson kernel as the multipliers. sigma is chosen so the
/// unconstrained step moves no vertex further than `displacement`.
struct DescentStep {
  GradientField delta;
  std::vector<ConstraintKey> positive;
};

inline DescentStep descent_step(const PolyLink& link, const SobolevMetric& metric, double displacement,
                                const std::vector<Constraint>& cons, const std::vector<ConstraintKey>& warm_keys) {
  const GradientField grad = length_gradient(link);
  const Eigen::VectorXd u = metric.solve(grad.flat());
  double umax = 0.0;
  for (Eigen::Index i = 0; i < u.size() / 3; ++i) umax = std::max(umax, u.segment<3>(3 * i).norm());
  DescentStep out{GradientField(link), {}};
  if (!(umax > 0.0)) return out;
  const double sigma = displacement / umax;

  Eigen::VectorXd dir = -u;
  if (!cons.empty()) {
    std::vector<const SparseGradient*> cols;
    for (const auto& c : cons) cols.push_back(&c.gradient);
    const detail::MetricBasis basis(link, metric, cols);
    const Eigen::MatrixXd gram = basis.gram();
    Eigen::VectorXd rhs = basis.z_dot(grad.flat());
    for (std::size_t k = 0; k < cons.size(); ++k) rhs(static_cast<Eigen::Index>(k)) -= cons[k].value / sigma;
    std::vector<int> warm;
    for (std::size_t k = 0; k < cons.size(); ++k)
      if (std::find(warm_keys.begin(), warm_keys.end(), cons[k].identity()) != warm_keys.end())
        warm.push_back(static_cast<int>(k));
    const double scale = std::sqrt(std::max(gram.diagonal().maxCoeff(), 0.0)) * std::sqrt(std::max(grad.flat().dot(u), 0.0));
    const NnlsResult sol = nnls_gram(gram, rhs, 1e-12 * std::max(scale, 1e-300), std::move(warm));
    dir += basis.z_times(sol.x);
    for (std::size_t k = 0; k < cons.size(); ++k)
      if (sol.x(static_cast<Eigen::Index>(k)) > 0.0) out.positive.push_back(cons[k].identity());
  }
  out.delta.flat() = sigma * dir;
  return out;
}

struct TightenResult {
  PolyLink link;
  ThicknessReport report;
  std::vector<StepReport> log;
  ActiveSet active;
  bool converged = false;
};

/// Minimises length at fixed thickness tau. The seed is first equilateralised
/// and rescaled so its thickness is exactly tau. Each iteration collects the
/// active constraints and solves for their multipliers (stopping once the
/// projected gradient is below grad_tol), then line-searches along the
/// metric-preconditioned descent step, with periodic equilateralisation.
inline TightenResult tighten(const PolyLink& seed, const TightenConfig& cfg) {
  cfg.validate();
  TightenResult res{rescale_to_thickness(equilateralize(seed), cfg.tau), {}, {}, {}, false};
  PolyLink& link = res.link;
  const double step_cap = cfg.step_init > 0.0 ? cfg.step_init : 0.1 * average_edge_length(link);
  double target = step_cap;
  int accepted = 0;
  double pthi = thickness(link).pthi;
  std::vector<double> lengths{total_length(link)};  // after each accepted step
  std::vector<ConstraintKey> positive;
  std::vector<ConstraintKey> step_positive;

  for (int k = 0; k < cfg.max_steps; ++k) {
    const double margin = std::max(cfg.active_tol, 2.0 * target);
    const std::vector<Constraint> cons = detail::constraints_within(link, cfg, margin);
    ActiveSet active = detail::active_subset(cons, cfg.active_tol);
    std::vector<int> warm;
    for (std::size_t i = 0; i < active.constraints.size(); ++i)
      if (std::find(positive.begin(), positive.end(), active.constraints[i].identity()) != positive.end())
        warm.push_back(static_cast<int>(i));
    GradientField neg = length_gradient(link);
    neg.flat() *= -1.0;
    const auto sol = solve_multipliers(link, active, neg, std::move(warm));
    positive.clear();
    for (const auto& c : active.constraints)
      if (c.multiplier > 0.0) positive.push_back(c.identity());

    const double gnorm = sol.projected.norm();
    if (gnorm <= cfg.grad_tol) {
      res.converged = true;
      break;
    }

    const SobolevMetric metric(link, cfg.metric_length());
    DescentStep dstep = descent_step(link, metric, target, cons, step_positive);
    step_positive = std::move(dstep.positive);
    const double full = dstep.delta.max_vertex_norm();
    auto [next, rep] = step(link, cfg, active, dstep.delta, full, pthi);
    rep.step_index = k;
    rep.projected_grad_norm = gnorm;
    if (rep.accepted) {
      link = std::move(next);
      pthi = thickness(link).pthi;
      rep.pthi_after = pthi;
      target = rep.step_size >= full ? std::min(step_cap, 1.5 * target) : target * rep.step_size / full;
      ++accepted;
    } else {
      rep.pthi_after = rep.pthi_before;
    }
    res.log.push_back(rep);
    if (!rep.accepted) break;

    if (cfg.resample_every > 0 && accepted % cfg.resample_every == 0 &&
        !(!active.constraints.empty() && gnorm < 10.0 * cfg.grad_tol)) {
      try {
        PolyLink resampled = restore_feasibility(equilateralize(link), cfg);
        if (total_length(resampled) <= total_length(link)) {
          link = std::move(resampled);
          pthi = thickness(link).pthi;
        }
      } catch (const Error&) {
        // keep the current polygon
      }
    }
    lengths.push_back(total_length(link));
    if (cfg.on_step) cfg.on_step(k, link);

    const auto w = static_cast<std::size_t>(cfg.stall_window);
    if (w > 0 && lengths.size() > w &&
        lengths[lengths.size() - 1 - w] - lengths.back() < cfg.stall_tol * lengths.back())
      break;
  }

  res.active = collect_active(link, cfg);
  GradientField neg = length_gradient(link);
  neg.flat() *= -1.0;
  solve_multipliers(link, res.active, neg);
  res.report = thickness(link);
  return res;
}

}  // namespace ropewalk
