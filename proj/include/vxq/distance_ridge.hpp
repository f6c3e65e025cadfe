#pragma once

// Distance to the analytic boundary, the ridge (points with two or more
// nearest boundary points) and the eikonal check |grad d| = 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "vxq/domain_grid.hpp"

namespace vxq {

namespace detail {

struct Segment {
  Vec2 a, b;
};

inline Vec2 closest_on_segment(const Segment& s, Vec2 p) {
  const Vec2 e = s.b - s.a;
  const double len2 = dot(e, e);
  double t = len2 > 0.0 ? dot(p - s.a, e) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return s.a + t * e;
}

inline std::vector<Segment> polygon_edges(const Shape& shape) {
  if (const auto* r = std::get_if<Rectangle>(&shape)) {
    const Vec2 p0{0, 0}, p1{r->w, 0}, p2{r->w, r->h}, p3{0, r->h};
    return {{p0, p1}, {p1, p2}, {p2, p3}, {p3, p0}};
  }
  if (const auto* l = std::get_if<LShape>(&shape)) {
    const double xn = l->w - l->notch_w, yn = l->h - l->notch_h;
    const Vec2 p0{0, 0}, p1{l->w, 0}, p2{l->w, yn}, p3{xn, yn}, p4{xn, l->h}, p5{0, l->h};
    return {{p0, p1}, {p1, p2}, {p2, p3}, {p3, p4}, {p4, p5}, {p5, p0}};
  }
  return {};
}

// Robust closest point on the ellipse (x/e0)^2 + (y/e1)^2 = 1 for a query in
// the closed first quadrant, e0 >= e1 > 0 (bisection on the Lagrange root).
inline double ellipse_root(double r0, double z0, double z1, double g) {
  const double n0 = r0 * z0;
  double s0 = z1 - 1.0;
  double s1 = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
  double s = 0.0;
  for (int i = 0; i < 1100; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double ratio0 = n0 / (s + r0), ratio1 = z1 / (s + 1.0);
    const double gv = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
    if (gv > 0.0) s0 = s;
    else if (gv < 0.0) s1 = s;
    else break;
  }
  return s;
}

inline Vec2 ellipse_closest_first_quadrant(double e0, double e1, double y0, double y1) {
  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / e0, z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return {y0, y1};
      const double r0 = (e0 / e1) * (e0 / e1);
      const double sbar = ellipse_root(r0, z0, z1, g);
      return {r0 * y0 / (sbar + r0), y1 / (sbar + 1.0)};
    }
    return {0.0, e1};
  }
  const double numer0 = e0 * y0, denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const double xde0 = numer0 / denom0;
    return {e0 * xde0, e1 * std::sqrt(std::max(0.0, 1.0 - xde0 * xde0))};
  }
  return {e0, 0.0};
}

inline Vec2 ellipse_closest(double a, double b, Vec2 p) {
  const bool swap = a < b;
  const double e0 = swap ? b : a, e1 = swap ? a : b;
  const double y0 = std::abs(swap ? p.y : p.x), y1 = std::abs(swap ? p.x : p.y);
  Vec2 q = ellipse_closest_first_quadrant(e0, e1, y0, y1);
  if (swap) std::swap(q.x, q.y);
  return {std::copysign(q.x, p.x), std::copysign(q.y, p.y)};
}

// Candidate nearest boundary points of p (one per edge/arc, plus symmetric
// copies where the closest point is not unique by symmetry).
inline std::vector<Vec2> boundary_features(const Shape& shape, Vec2 p) {
  std::vector<Vec2> out;
  if (std::holds_alternative<Rectangle>(shape) || std::holds_alternative<LShape>(shape)) {
    for (const auto& s : polygon_edges(shape)) out.push_back(closest_on_segment(s, p));
  } else if (const auto* d = std::get_if<Disk>(&shape)) {
    const double r = norm(p);
    if (r < 1e-12 * d->r) {
      out.push_back({d->r, 0.0});
      out.push_back({-d->r, 0.0});
    } else {
      out.push_back((d->r / r) * p);
    }
  } else if (const auto* e = std::get_if<Ellipse>(&shape)) {
    const Vec2 q = ellipse_closest(e->a, e->b, p);
    out.push_back(q);
    out.push_back({-q.x, q.y});
    out.push_back({q.x, -q.y});
    out.push_back({-q.x, -q.y});
  } else if (const auto* an = std::get_if<Annulus>(&shape)) {
    const double r = norm(p);
    const Vec2 dir = r > 0.0 ? (1.0 / r) * p : Vec2{1.0, 0.0};
    out.push_back(an->r_out * dir);
    out.push_back(an->r_in * dir);
  }
  return out;
}

}  // namespace detail

/// Distance from p (inside the shape) to the analytic boundary.
inline double boundary_distance(const Shape& shape, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (Vec2 q : detail::boundary_features(shape, p)) best = std::min(best, distance(p, q));
  return best;
}

struct RidgeResult {
  std::vector<int> nodes;
  bool singleton = false;
};

struct DistanceResult {
  ScalarField d;
  double d_max = 0.0;
  double lambda_inf = 0.0;
  std::vector<int> argmax;
  std::vector<int> ridge_nodes;
  bool ridge_is_singleton = false;
};

inline constexpr double kDefaultAngleTol = 30.0;
inline constexpr double kDefaultDistTol = 1e-6;

/// Zero-trace nodal distance field (Dirichlet nodes 0).
inline ScalarField distance_values(const GridPtr& grid) {
  const Shape& shape = grid->spec().shape;
  std::vector<double> v(grid->node_count(), 0.0);
  for (std::size_t k = 0; k < v.size(); ++k)
    if (grid->is_interior(k)) v[k] = boundary_distance(shape, grid->nodes()[k]);
  return ScalarField{grid, std::move(v), true};
}

/// Interior nodes with two nearest boundary points within (1+dist_tol) d that
/// are more than angle_tol degrees apart as seen from the node; argmax nodes of
/// d are always members.
inline RidgeResult detect_ridge(const GridPtr& grid, double angle_tol = kDefaultAngleTol,
                                double dist_tol = kDefaultDistTol) {
  if (!(angle_tol > 0.0) || !(dist_tol > 0.0)) throw InvalidArgument("ridge tolerances must be positive");
  const Shape& shape = grid->spec().shape;
  const double cos_tol = std::cos(angle_tol * std::numbers::pi / 180.0);
  const ScalarField d = distance_values(grid);
  const SupNorm top = sup_norm_and_argmax(d);

  RidgeResult out;
  std::vector<std::uint8_t> in(grid->node_count(), 0);
  for (int k : top.argmax)
    if (grid->is_interior(k)) in[k] = 1;
  for (std::size_t k = 0; k < grid->node_count(); ++k) {
    if (!grid->is_interior(k) || in[k]) continue;
    const Vec2 p = grid->nodes()[k];
    const double dk = d.values[k];
    std::vector<Vec2> dirs;
    for (Vec2 q : detail::boundary_features(shape, p)) {
      const double r = distance(p, q);
      if (r <= (1.0 + dist_tol) * dk && r > 0.0) dirs.push_back((1.0 / r) * (q - p));
    }
    bool two = false;
    for (std::size_t i = 0; i < dirs.size() && !two; ++i)
      for (std::size_t j = i + 1; j < dirs.size() && !two; ++j) two = dot(dirs[i], dirs[j]) < cos_tol;
    if (two) in[k] = 1;
  }
  // Curved ridges seldom pass through nodes: also mark where the nearest
  // boundary direction jumps between lattice neighbours (the node nearer the
  // ridge, i.e. with larger d, is kept).
  auto nearest_dir = [&](std::size_t k) {
    const Vec2 p = grid->nodes()[k];
    Vec2 best_q;
    double best = std::numeric_limits<double>::infinity();
    for (Vec2 q : detail::boundary_features(shape, p)) {
      const double r = distance(p, q);
      if (r < best) best = r, best_q = q;
    }
    return best > 0.0 ? (1.0 / best) * (best_q - p) : Vec2{};
  };
  std::vector<Vec2> dir(grid->node_count());
  for (std::size_t k = 0; k < dir.size(); ++k)
    if (grid->is_interior(k)) dir[k] = nearest_dir(k);
  for (int j = 0; j < grid->ny(); ++j)
    for (int i = 0; i < grid->nx(); ++i) {
      const int k = grid->lattice_index(i, j);
      if (!grid->is_interior(k)) continue;
      for (const auto& [di, dj] : {std::pair{1, 0}, std::pair{0, 1}}) {
        if (i + di >= grid->nx() || j + dj >= grid->ny()) continue;
        const int m = grid->lattice_index(i + di, j + dj);
        if (!grid->is_interior(m)) continue;
        if (dot(dir[k], dir[m]) < cos_tol) in[d.values[k] >= d.values[m] ? k : m] = 1;
      }
    }
  for (std::size_t k = 0; k < in.size(); ++k)
    if (in[k]) out.nodes.push_back(static_cast<int>(k));

  double diam = 0.0;
  for (std::size_t i = 0; i < out.nodes.size(); ++i)
    for (std::size_t j = i + 1; j < out.nodes.size(); ++j)
      diam = std::max(diam, distance(grid->nodes()[out.nodes[i]], grid->nodes()[out.nodes[j]]));
  out.singleton = !out.nodes.empty() && diam < 3.0 * grid->spacing();
  return out;
}

inline DistanceResult distance_field(const GridPtr& grid, double angle_tol = kDefaultAngleTol,
                                     double dist_tol = kDefaultDistTol) {
  DistanceResult out;
  out.d = distance_values(grid);
  const SupNorm top = sup_norm_and_argmax(out.d);
  out.d_max = top.value;
  out.lambda_inf = 1.0 / top.value;
  out.argmax = top.argmax;
  RidgeResult r = detect_ridge(grid, angle_tol, dist_tol);
  out.ridge_nodes = std::move(r.nodes);
  out.ridge_is_singleton = r.singleton;
  return out;
}

/// max ||grad d| - 1| over triangles whose nodes are all interior and at
/// least exclusion (default 3h) away from every ridge node.
inline double eikonal_check(const ScalarField& d, const std::vector<int>& ridge, double exclusion = -1.0) {
  const TriGrid& g = d.g();
  if (exclusion < 0.0) exclusion = 3.0 * g.spacing();
  std::vector<std::uint8_t> far(g.node_count(), 0);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    if (!g.is_interior(k)) continue;
    bool ok = true;
    for (int r : ridge)
      if (distance(g.nodes()[k], g.nodes()[r]) < exclusion) {
        ok = false;
        break;
      }
    far[k] = ok;
  }
  const auto grads = gradient(d);
  double worst = 0.0;
  for (std::size_t t = 0; t < g.triangle_count(); ++t) {
    const auto& tri = g.triangles()[t];
    if (!(far[tri[0]] && far[tri[1]] && far[tri[2]])) continue;
    worst = std::max(worst, std::abs(norm(grads[t]) - 1.0));
  }
  return worst;
}

}  // namespace vxq
