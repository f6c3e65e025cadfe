#pragma once

// Infinity Laplacian, its variable-exponent version, the expanded p(x)-Laplacian
// and the limit-equation residual of discrete fields.
//
//   Delta_inf v        = <grad v, Hess v grad v>
//   Delta_inf(x) (u/t) = t^-3 { Delta_inf u + |grad u|^2 ln(|grad u|/t) <grad u, grad ln p> }
//   Delta_p(x) (t phi) = t^{p-1} |grad phi|^{p-4} { |grad phi|^2 Lap phi + (p-2) Delta_inf phi
//                                                   + |grad phi|^2 ln|t grad phi| <grad phi, grad p> }

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "vxq/domain_grid.hpp"
#include "vxq/exponents.hpp"

namespace vxq {

struct ProbeSample {
  double value = 0.0;
  Vec2 grad;
  Sym2 hess;
};

/// A C^2 function given pointwise by value, gradient and Hessian.
struct SmoothProbe {
  std::function<ProbeSample(Vec2)> eval;

  ProbeSample operator()(Vec2 at) const {
    ProbeSample s = eval(at);
    if (!std::isfinite(s.value) || !std::isfinite(s.grad.x) || !std::isfinite(s.grad.y) ||
        !std::isfinite(s.hess.xx) || !std::isfinite(s.hess.xy) || !std::isfinite(s.hess.yy))
      throw DegenerateField("probe is not finite at (" + std::to_string(at.x) + ", " + std::to_string(at.y) + ")");
    return s;
  }
};

/// The probe v * factor.
inline SmoothProbe scaled_probe(SmoothProbe probe, double factor) {
  return {[probe = std::move(probe), factor](Vec2 at) {
    ProbeSample s = probe(at);
    s.value *= factor;
    s.grad = factor * s.grad;
    s.hess = {factor * s.hess.xx, factor * s.hess.xy, factor * s.hess.yy};
    return s;
  }};
}

inline double infinity_laplacian(const ProbeSample& s) { return dot(s.grad, s.hess.apply(s.grad)); }
inline double infinity_laplacian(const SmoothProbe& probe, Vec2 at) { return infinity_laplacian(probe(at)); }

/// Delta_inf(x) applied to u/t. The log term is taken as 0 where grad u = 0.
inline double infinity_px_operator(const ProbeSample& s, Vec2 grad_log_p, double t = 1.0) {
  if (!(t > 0.0)) throw InvalidArgument("t must be positive");
  const double m = norm(s.grad);
  double bracket = infinity_laplacian(s);
  if (m > 0.0) bracket += m * m * std::log(m / t) * dot(s.grad, grad_log_p);
  return bracket / (t * t * t);
}

inline double infinity_px_operator(const SmoothProbe& probe, const ExponentField& p, Vec2 at, double t = 1.0) {
  return infinity_px_operator(probe(at), p.log_gradient_at(at), t);
}

/// Delta_p(x)(t phi) in expanded form; requires grad phi != 0 when p < 4.
inline double p_laplacian_expanded(const ProbeSample& s, double p, Vec2 grad_p, double t = 1.0) {
  if (!(t > 0.0)) throw InvalidArgument("t must be positive");
  const double m = norm(s.grad);
  if (m == 0.0) {
    if (p > 4.0) return 0.0;
    throw DegenerateField("vanishing gradient in the expanded p(x)-Laplacian");
  }
  const double lap = s.hess.trace();
  const double inner = m * m * lap + (p - 2.0) * infinity_laplacian(s) + m * m * std::log(t * m) * dot(s.grad, grad_p);
  return std::pow(t, p - 1.0) * std::pow(m, p - 4.0) * inner;
}

inline double p_laplacian_expanded(const SmoothProbe& probe, const ExponentField& p, Vec2 at, double t = 1.0) {
  return p_laplacian_expanded(probe(at), p.value_at(at), p.gradient_at(at), t);
}

/// H(x, u, grad u, D^2 u) = |grad u|^{p-4} { |grad u|^2 Lap u + (p-2) Delta_inf u
///                                          + |grad u|^2 ln(|grad u|/K) <grad u, grad p> }.
inline double h_operator(const ProbeSample& s, double p, Vec2 grad_p, double K) {
  if (!(K > 0.0)) throw InvalidArgument("K must be positive");
  return p_laplacian_expanded(s, p, grad_p, 1.0 / K) * std::pow(K, p - 1.0);
}

inline double h_operator(const SmoothProbe& probe, const ExponentField& p, Vec2 at, double K) {
  return h_operator(probe(at), p.value_at(at), p.gradient_at(at), K);
}

// ---------------------------------------------------------------- discrete

/// Truncated (3 sigma) Gaussian smoothing of a nodal field over the lattice;
/// nodes outside the domain count as 0.
inline std::vector<double> gaussian_smooth(const ScalarField& w, double sigma) {
  const TriGrid& g = w.g();
  if (!(sigma > 0.0)) return w.values;
  const int rx = static_cast<int>(std::ceil(3.0 * sigma / g.hx()));
  const int ry = static_cast<int>(std::ceil(3.0 * sigma / g.hy()));
  std::vector<double> kx(2 * rx + 1), ky(2 * ry + 1);
  for (int i = -rx; i <= rx; ++i) kx[i + rx] = std::exp(-0.5 * (i * g.hx()) * (i * g.hx()) / (sigma * sigma));
  for (int j = -ry; j <= ry; ++j) ky[j + ry] = std::exp(-0.5 * (j * g.hy()) * (j * g.hy()) / (sigma * sigma));
  const double r2 = 9.0 * sigma * sigma;
  std::vector<double> out(w.values.size(), 0.0);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      double num = 0.0, den = 0.0;
      for (int b = -ry; b <= ry; ++b)
        for (int a = -rx; a <= rx; ++a) {
          const double dx = a * g.hx(), dy = b * g.hy();
          if (dx * dx + dy * dy > r2) continue;
          const double wt = kx[a + rx] * ky[b + ry];
          den += wt;
          const int ii = i + a, jj = j + b;
          if (ii < 0 || jj < 0 || ii >= g.nx() || jj >= g.ny()) continue;
          num += wt * w.values[g.lattice_index(ii, jj)];
        }
      out[g.lattice_index(i, j)] = num / den;
    }
  return out;
}

/// Central-difference probe sample at lattice node (i, j) of a lattice field.
inline ProbeSample lattice_sample(const TriGrid& g, const std::vector<double>& f, int i, int j) {
  auto at = [&](int a, int b) { return f[g.lattice_index(a, b)]; };
  const double hx = g.hx(), hy = g.hy();
  ProbeSample s;
  s.value = at(i, j);
  s.grad = {(at(i + 1, j) - at(i - 1, j)) / (2 * hx), (at(i, j + 1) - at(i, j - 1)) / (2 * hy)};
  s.hess.xx = (at(i + 1, j) - 2 * at(i, j) + at(i - 1, j)) / (hx * hx);
  s.hess.yy = (at(i, j + 1) - 2 * at(i, j) + at(i, j - 1)) / (hy * hy);
  s.hess.xy = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) / (4 * hx * hy);
  return s;
}

struct LimitResidual {
  double max = 0.0;
  double median = 0.0;
  std::size_t samples = 0;
  std::size_t degenerate = 0;
  double t = 0.0;  // discrete ||grad w||_inf
  double smoothing_width = 0.0;
  double exclusion_radius = 0.0;
};

/// Max of |grad w| over triangles with all three nodes interior and centroid
/// outside B(center, radius) (radius 0: no ball).
inline double interior_gradient_sup(const ScalarField& w, Vec2 center = {}, double radius = 0.0) {
  const TriGrid& g = w.g();
  const auto grads = gradient(w);
  double m = 0.0;
  for (std::size_t t = 0; t < grads.size(); ++t) {
    const auto& tri = g.triangles()[t];
    if (!(g.is_interior(tri[0]) && g.is_interior(tri[1]) && g.is_interior(tri[2]))) continue;
    if (radius > 0.0 && distance(g.tri_centroid()[t], center) < radius) continue;
    m = std::max(m, norm(grads[t]));
  }
  return m;
}

/// Residual of Delta_inf(x)(w/t) = 0 on the Gaussian-smoothed field, t the
/// discrete ||grad w||_inf away from x_star (the interpolated peak is a kink
/// whose cell gradient is not a gradient of the limit), normalized per node by |grad w_s / t|^3. Samples:
/// interior nodes outside the ball B(x_star, exclusion_radius) and more than
/// 3 smoothing widths (plus one stencil cell) from every Dirichlet node.
/// exclusion_radius < 0 selects the boundary margin, 3 smoothing widths plus h (at least 3h);
/// smoothing_width < 0 selects 2h.
inline LimitResidual limit_residual(const ScalarField& w, const ExponentField& p, int x_star,
                                    double exclusion_radius = -1.0, double smoothing_width = -1.0) {
  const TriGrid& g = w.g();
  const double h = g.spacing();
  if (smoothing_width < 0.0) smoothing_width = 2.0 * h;
  if (exclusion_radius < 0.0) exclusion_radius = std::max(3.0 * smoothing_width + h, 3.0 * h);
  if (exclusion_radius < 3.0 * h * (1.0 - 1e-12)) throw InvalidArgument("exclusion radius must be at least 3h");
  if (x_star < 0 || static_cast<std::size_t>(x_star) >= g.node_count()) throw InvalidArgument("x_star out of range");

  LimitResidual out;
  out.smoothing_width = smoothing_width;
  out.exclusion_radius = exclusion_radius;
  const Vec2 xs = g.nodes()[x_star];
  out.t = interior_gradient_sup(w, xs, exclusion_radius);
  if (!(out.t > 0.0)) out.t = interior_gradient_sup(w);
  if (!(out.t > 0.0)) throw ZeroField();

  const std::vector<double> ws = gaussian_smooth(w, smoothing_width);
  const double margin = 3.0 * smoothing_width + h;
  std::vector<Vec2> dirichlet;
  for (std::size_t k = 0; k < g.node_count(); ++k)
    if (!g.is_interior(k)) dirichlet.push_back(g.nodes()[k]);

  std::vector<double> res;
  for (int j = 1; j + 1 < g.ny(); ++j)
    for (int i = 1; i + 1 < g.nx(); ++i) {
      const int k = g.lattice_index(i, j);
      if (!g.is_interior(k)) continue;
      const Vec2 x = g.nodes()[k];
      if (distance(x, xs) < exclusion_radius) continue;
      bool near = false;
      for (Vec2 b : dirichlet)
        if (distance(x, b) <= margin) {
          near = true;
          break;
        }
      if (near) continue;
      ++out.samples;
      const ProbeSample s = lattice_sample(g, ws, i, j);
      const double m = norm(s.grad);
      if (m <= 1e-8 * out.t) {
        ++out.degenerate;
        continue;
      }
      const double op = infinity_px_operator(s, p.log_gradient_at(x), out.t);
      const double scale = (m / out.t) * (m / out.t) * (m / out.t);
      res.push_back(std::abs(op) / scale);
    }
  if (out.samples == 0) throw InvalidArgument("limit residual has no sample nodes");
  if (out.degenerate * 10 > out.samples)
    throw DegenerateField("smoothed gradient vanishes on " + std::to_string(out.degenerate) + " of " +
                          std::to_string(out.samples) + " sample nodes");
  std::sort(res.begin(), res.end());
  out.max = res.back();
  const std::size_t n = res.size();
  out.median = n % 2 ? res[n / 2] : 0.5 * (res[n / 2 - 1] + res[n / 2]);
  return out;
}

}  // namespace vxq
