#pragma once

// Masked structured triangulations of planar domains and piecewise-linear
// field calculus on them.
//
// The lattice is a uniform grid of nodes; every cell is split along its
// lower-left/upper-right diagonal into two right triangles. A triangle is
// kept when its centroid lies inside the domain. A node carries a free value
// (interior) only when it lies strictly inside the domain and every lattice
// triangle around it was kept; all other nodes are Dirichlet nodes with
// value 0 for zero-trace fields.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vxq/core.hpp"

namespace vxq {

struct Rectangle {
  double w = 1.0;
  double h = 1.0;
};
struct Disk {
  double r = 1.0;
};
struct Ellipse {
  double a = 1.0;
  double b = 1.0;
};
/// [0,w]x[0,h] with the top-right notch [w-notch_w, w]x[h-notch_h, h] removed.
struct LShape {
  double w = 1.0;
  double h = 1.0;
  double notch_w = 0.5;
  double notch_h = 0.5;
};
struct Annulus {
  double r_in = 0.5;
  double r_out = 1.0;
};

using Shape = std::variant<Rectangle, Disk, Ellipse, LShape, Annulus>;

struct DomainSpec {
  Shape shape = Rectangle{};
  int resolution = 16;  // nodes per unit length
};

inline std::string shape_name(const Shape& s) {
  struct {
    std::string operator()(const Rectangle&) const { return "rectangle"; }
    std::string operator()(const Disk&) const { return "disk"; }
    std::string operator()(const Ellipse&) const { return "ellipse"; }
    std::string operator()(const LShape&) const { return "lshape"; }
    std::string operator()(const Annulus&) const { return "annulus"; }
  } visitor;
  return std::visit(visitor, s);
}

inline void validate(const DomainSpec& spec) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidArgument(std::string("domain length '") + what + "' must be positive");
  };
  if (spec.resolution < 8) throw InvalidArgument("resolution must be at least 8");
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rectangle>) {
          positive(s.w, "w");
          positive(s.h, "h");
        } else if constexpr (std::is_same_v<T, Disk>) {
          positive(s.r, "r");
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          positive(s.a, "a");
          positive(s.b, "b");
        } else if constexpr (std::is_same_v<T, LShape>) {
          positive(s.w, "w");
          positive(s.h, "h");
          positive(s.notch_w, "notch_w");
          positive(s.notch_h, "notch_h");
          if (s.notch_w >= s.w || s.notch_h >= s.h)
            throw InvalidArgument("lshape notch must be smaller than the bounding rectangle");
        } else {
          positive(s.r_in, "r_in");
          positive(s.r_out, "r_out");
          if (s.r_in >= s.r_out) throw InvalidArgument("annulus requires r_in < r_out");
        }
      },
      spec.shape);
}

/// Strict membership test against the analytic shape.
inline bool contains(const Shape& shape, Vec2 p, double eps = 1e-12) {
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rectangle>) {
          return p.x > eps && p.x < s.w - eps && p.y > eps && p.y < s.h - eps;
        } else if constexpr (std::is_same_v<T, Disk>) {
          return norm(p) < s.r - eps;
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          const double q = (p.x / s.a) * (p.x / s.a) + (p.y / s.b) * (p.y / s.b);
          return q < 1.0 - eps;
        } else if constexpr (std::is_same_v<T, LShape>) {
          const bool in_box = p.x > eps && p.x < s.w - eps && p.y > eps && p.y < s.h - eps;
          const bool in_notch = p.x >= s.w - s.notch_w - eps && p.y >= s.h - s.notch_h - eps;
          return in_box && !in_notch;
        } else {
          const double r = norm(p);
          return r > s.r_in + eps && r < s.r_out - eps;
        }
      },
      shape);
}

inline double analytic_area(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rectangle>) return s.w * s.h;
        else if constexpr (std::is_same_v<T, Disk>) return std::numbers::pi * s.r * s.r;
        else if constexpr (std::is_same_v<T, Ellipse>) return std::numbers::pi * s.a * s.b;
        else if constexpr (std::is_same_v<T, LShape>) return s.w * s.h - s.notch_w * s.notch_h;
        else return std::numbers::pi * (s.r_out * s.r_out - s.r_in * s.r_in);
      },
      shape);
}

class TriGrid {
 public:
  const DomainSpec& spec() const { return spec_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  std::size_t interior_count() const { return node_of_dof_.size(); }

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<std::uint8_t>& interior_mask() const { return interior_; }
  bool is_interior(std::size_t node) const { return interior_[node] != 0; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<double>& tri_area() const { return area_; }
  const std::vector<Vec2>& tri_centroid() const { return centroid_; }
  /// Gradients of the three hat functions of each triangle (constant per triangle).
  const std::vector<std::array<Vec2, 3>>& hat_gradients() const { return hat_grad_; }

  /// Interior nodes are numbered 0..interior_count()-1 ("dofs").
  int dof_of_node(std::size_t node) const { return dof_of_node_[node]; }
  int node_of_dof(std::size_t dof) const { return node_of_dof_[dof]; }

  double spacing() const { return std::max(hx_, hy_); }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  Vec2 origin() const { return origin_; }
  int lattice_index(int i, int j) const { return j * nx_ + i; }
  std::pair<int, int> lattice_coords(std::size_t node) const {
    return {static_cast<int>(node % nx_), static_cast<int>(node / nx_)};
  }
  double total_area() const { return total_area_; }
  /// Diameter of the node bounding box.
  double diameter() const {
    return std::hypot((nx_ - 1) * hx_, (ny_ - 1) * hy_);
  }

  friend std::shared_ptr<const TriGrid> build_grid(const DomainSpec& spec);

 private:
  DomainSpec spec_;
  int nx_ = 0, ny_ = 0;
  double hx_ = 0.0, hy_ = 0.0;
  Vec2 origin_;
  std::vector<Vec2> nodes_;
  std::vector<std::uint8_t> interior_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<double> area_;
  std::vector<Vec2> centroid_;
  std::vector<std::array<Vec2, 3>> hat_grad_;
  std::vector<int> dof_of_node_;
  std::vector<int> node_of_dof_;
  double total_area_ = 0.0;
};

using GridPtr = std::shared_ptr<const TriGrid>;

namespace detail {

struct LatticeFrame {
  Vec2 origin;
  int cells_x, cells_y;
  double hx, hy;
};

inline int cells_for(double length, int n) {
  return std::max(1, static_cast<int>(std::lround(length * n)));
}

// Curved shapes are centred at the origin with a node on the centre.
inline LatticeFrame centred_frame(double half_x, double half_y, int n) {
  const double h = 1.0 / n;
  const int kx = static_cast<int>(std::ceil(half_x * n - 1e-9));
  const int ky = static_cast<int>(std::ceil(half_y * n - 1e-9));
  return {{-kx * h, -ky * h}, 2 * kx, 2 * ky, h, h};
}

inline LatticeFrame frame_for(const DomainSpec& spec) {
  const int n = spec.resolution;
  return std::visit(
      [n](const auto& s) -> LatticeFrame {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rectangle> || std::is_same_v<T, LShape>) {
          const int cx = cells_for(s.w, n), cy = cells_for(s.h, n);
          return {{0.0, 0.0}, cx, cy, s.w / cx, s.h / cy};
        } else if constexpr (std::is_same_v<T, Disk>) {
          return centred_frame(s.r, s.r, n);
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          return centred_frame(s.a, s.b, n);
        } else {
          return centred_frame(s.r_out, s.r_out, n);
        }
      },
      spec.shape);
}

}  // namespace detail

inline GridPtr build_grid(const DomainSpec& spec) {
  validate(spec);
  const auto frame = detail::frame_for(spec);
  auto grid = std::make_shared<TriGrid>();
  TriGrid& g = *grid;
  g.spec_ = spec;
  g.nx_ = frame.cells_x + 1;
  g.ny_ = frame.cells_y + 1;
  g.hx_ = frame.hx;
  g.hy_ = frame.hy;
  g.origin_ = frame.origin;

  g.nodes_.reserve(static_cast<std::size_t>(g.nx_) * g.ny_);
  for (int j = 0; j < g.ny_; ++j)
    for (int i = 0; i < g.nx_; ++i)
      g.nodes_.push_back({frame.origin.x + i * frame.hx, frame.origin.y + j * frame.hy});

  // Per-node count of dropped lattice triangles; such nodes become Dirichlet.
  std::vector<int> dropped(g.nodes_.size(), 0);
  for (int j = 0; j + 1 < g.ny_; ++j) {
    for (int i = 0; i + 1 < g.nx_; ++i) {
      const int a = g.lattice_index(i, j), b = g.lattice_index(i + 1, j);
      const int c = g.lattice_index(i + 1, j + 1), d = g.lattice_index(i, j + 1);
      for (const std::array<int, 3> tri : {std::array<int, 3>{a, b, c}, std::array<int, 3>{a, c, d}}) {
        const Vec2 p0 = g.nodes_[tri[0]], p1 = g.nodes_[tri[1]], p2 = g.nodes_[tri[2]];
        const Vec2 cen = (1.0 / 3.0) * (p0 + p1 + p2);
        if (!contains(spec.shape, cen, 0.0)) {
          for (int v : tri) ++dropped[v];
          continue;
        }
        const Vec2 e1 = p1 - p0, e2 = p2 - p0;
        const double twice_area = e1.x * e2.y - e1.y * e2.x;
        // grad(phi_k) = rot90(opposite edge) / (2A), counter-clockwise ordering.
        auto perp = [&](Vec2 e) { return Vec2{-e.y / twice_area, e.x / twice_area}; };
        std::array<Vec2, 3> grads{perp(p2 - p1), perp(p0 - p2), perp(p1 - p0)};
        g.triangles_.push_back(tri);
        g.area_.push_back(0.5 * twice_area);
        g.centroid_.push_back(cen);
        g.hat_grad_.push_back(grads);
      }
    }
  }
  if (g.triangles_.empty()) throw InvalidArgument("domain has zero measure at this resolution");

  g.interior_.assign(g.nodes_.size(), 0);
  g.dof_of_node_.assign(g.nodes_.size(), -1);
  for (std::size_t k = 0; k < g.nodes_.size(); ++k) {
    if (dropped[k] == 0 && contains(spec.shape, g.nodes_[k])) {
      g.interior_[k] = 1;
      g.dof_of_node_[k] = static_cast<int>(g.node_of_dof_.size());
      g.node_of_dof_.push_back(static_cast<int>(k));
    }
  }
  if (g.node_of_dof_.empty()) throw InvalidArgument("domain has no interior nodes at this resolution");
  g.total_area_ = pairwise_sum(g.area_);
  return grid;
}

/// One value per grid node. `zero_trace` marks fields in the discrete
/// W_0^{1,p} space (exactly 0 on Dirichlet nodes).
struct ScalarField {
  GridPtr grid;
  std::vector<double> values;
  bool zero_trace = false;

  const TriGrid& g() const { return *grid; }
  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

inline ScalarField make_field(GridPtr grid, std::vector<double> values, bool zero_trace = false) {
  if (values.size() != grid->node_count()) throw InvalidArgument("field size does not match grid");
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidArgument("field values must be finite");
  if (zero_trace) {
    for (std::size_t k = 0; k < values.size(); ++k)
      if (!grid->is_interior(k)) values[k] = 0.0;
  }
  return ScalarField{std::move(grid), std::move(values), zero_trace};
}

/// Samples f at every node; with zero_trace the Dirichlet nodes are set to 0.
template <class F>
ScalarField sample_field(GridPtr grid, F&& f, bool zero_trace = false) {
  std::vector<double> v(grid->node_count());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(grid->nodes()[k]);
  return make_field(std::move(grid), std::move(v), zero_trace);
}

/// Field from interior (dof) values; Dirichlet nodes are 0.
inline ScalarField field_from_dofs(GridPtr grid, std::span<const double> dofs) {
  std::vector<double> v(grid->node_count(), 0.0);
  for (std::size_t d = 0; d < dofs.size(); ++d) v[grid->node_of_dof(d)] = dofs[d];
  return ScalarField{std::move(grid), std::move(v), true};
}

inline std::vector<double> dofs_of(const ScalarField& u) {
  const TriGrid& g = u.g();
  std::vector<double> out(g.interior_count());
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = u.values[g.node_of_dof(d)];
  return out;
}

/// Piecewise-constant gradient, one vector per triangle.
inline std::vector<Vec2> gradient(const TriGrid& g, std::span<const double> nodal) {
  std::vector<Vec2> out(g.triangle_count());
  const auto& tris = g.triangles();
  const auto& hg = g.hat_gradients();
  for (std::size_t t = 0; t < out.size(); ++t) {
    Vec2 s;
    for (int k = 0; k < 3; ++k) s = s + nodal[tris[t][k]] * hg[t][k];
    out[t] = s;
  }
  return out;
}
inline std::vector<Vec2> gradient(const ScalarField& u) { return gradient(u.g(), u.values); }

inline std::vector<double> gradient_magnitudes(const TriGrid& g, std::span<const double> nodal) {
  const auto grads = gradient(g, nodal);
  std::vector<double> out(grads.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = norm(grads[t]);
  return out;
}

/// Value of the piecewise-linear interpolant at each centroid.
inline std::vector<double> centroid_values(const TriGrid& g, std::span<const double> nodal) {
  std::vector<double> out(g.triangle_count());
  const auto& tris = g.triangles();
  for (std::size_t t = 0; t < out.size(); ++t)
    out[t] = (nodal[tris[t][0]] + nodal[tris[t][1]] + nodal[tris[t][2]]) / 3.0;
  return out;
}

struct SupNorm {
  double value = 0.0;
  std::vector<int> argmax;  // the discrete Gamma_u
};

inline constexpr double kDefaultTieTol = 1e-9;

/// ||u||_inf over nodes and every node within tie_tol*||u||_inf of it.
inline SupNorm sup_norm_and_argmax(std::span<const double> u, double tie_tol = kDefaultTieTol) {
  if (tie_tol < 0.0) throw InvalidArgument("tie_tol must be nonnegative");
  SupNorm out;
  for (double v : u) out.value = std::max(out.value, std::abs(v));
  const double cut = out.value * (1.0 - tie_tol);
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (out.value == 0.0 || std::abs(u[k]) >= cut) out.argmax.push_back(static_cast<int>(k));
  }
  return out;
}
inline SupNorm sup_norm_and_argmax(const ScalarField& u, double tie_tol = kDefaultTieTol) {
  return sup_norm_and_argmax(std::span<const double>(u.values), tie_tol);
}

}  // namespace vxq
