#pragma once

// Rayleigh quotient K(u)/k(u) = ||grad u||_{p(x)} / ||u||_{q(x)} on zero-trace
// P1 fields: evaluation, Gateaux derivatives, Euler-Lagrange residual and the
// first-eigenvalue minimizer.
//
// The minimizer is a nonlinear inverse power iteration: with c = k'(u_n),
// u_{n+1} is the normalized minimizer of K over {c . v = 1}. Since k is convex
// and 1-homogeneous, k(v) >= c . v = 1, so the quotient never increases.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "vxq/distance_ridge.hpp"
#include "vxq/domain_grid.hpp"
#include "vxq/exponents.hpp"
#include "vxq/modular_norms.hpp"
#include "vxq/norm_minimizer.hpp"

namespace vxq {

namespace detail {

inline constexpr double kLogFloor = -690.7755;  // ln(1e-300)

// Per-triangle pieces of K'(u): with g = grad u / K,
//   weight_T = area |g|^{p-2},  log S_K = log sum area |g|^p.
struct GradTerms {
  std::vector<Vec2> g;
  std::vector<double> weight;
  double log_S = 0.0;
};

inline GradTerms grad_terms(const TriGrid& grid, std::span<const double> nodal, std::span<const double> exps,
                            double K) {
  GradTerms out;
  out.g = gradient(grid, nodal);
  out.weight.resize(out.g.size());
  std::vector<double> logs(out.g.size());
  for (std::size_t t = 0; t < out.g.size(); ++t) {
    out.g[t] = (1.0 / K) * out.g[t];
    const double m = norm(out.g[t]);
    const double lm = m > 0.0 ? std::max(std::log(m), kLogFloor) : kLogFloor;
    const double la = std::log(grid.tri_area()[t]);
    out.weight[t] = std::exp(la + (exps[t] - 2.0) * lm);
    logs[t] = m > 0.0 ? la + exps[t] * std::log(m) : kNegInf;
  }
  out.log_S = log_sum_exp(logs);
  return out;
}

// Same for k'(u) with centroid values v = u_T / k:
//   weight_T = area |v|^{q-2} v,  log S_k = log sum area |v|^q.
struct ValueTerms {
  std::vector<double> weight;
  double log_S = 0.0;
};

inline ValueTerms value_terms(const TriGrid& grid, std::span<const double> nodal, std::span<const double> exps,
                              double k) {
  ValueTerms out;
  const auto vals = centroid_values(grid, nodal);
  out.weight.resize(vals.size());
  std::vector<double> logs(vals.size());
  for (std::size_t t = 0; t < vals.size(); ++t) {
    const double v = vals[t] / k;
    const double m = std::abs(v);
    const double lm = m > 0.0 ? std::max(std::log(m), kLogFloor) : kLogFloor;
    const double la = std::log(grid.tri_area()[t]);
    out.weight[t] = m > 0.0 ? std::copysign(std::exp(la + (exps[t] - 2.0) * lm), v) * m : 0.0;
    logs[t] = m > 0.0 ? la + exps[t] * std::log(m) : kNegInf;
  }
  out.log_S = log_sum_exp(logs);
  return out;
}

// A(phi_i) = sum_T weight_T g_T . grad phi_i for every dof i.
inline std::vector<double> assemble_grad_form(const TriGrid& grid, const GradTerms& gt) {
  std::vector<double> out(grid.interior_count(), 0.0);
  const auto& tris = grid.triangles();
  const auto& hg = grid.hat_gradients();
  for (std::size_t t = 0; t < tris.size(); ++t)
    for (int r = 0; r < 3; ++r) {
      const int d = grid.dof_of_node(tris[t][r]);
      if (d >= 0) out[d] += gt.weight[t] * dot(gt.g[t], hg[t][r]);
    }
  return out;
}

// B(phi_i) = sum_T weight_T phi_i(c_T), phi_i(c_T) = 1/3 on the three vertices.
inline std::vector<double> assemble_value_form(const TriGrid& grid, const ValueTerms& vt) {
  std::vector<double> out(grid.interior_count(), 0.0);
  const auto& tris = grid.triangles();
  for (std::size_t t = 0; t < tris.size(); ++t)
    for (int r = 0; r < 3; ++r) {
      const int d = grid.dof_of_node(tris[t][r]);
      if (d >= 0) out[d] += vt.weight[t] / 3.0;
    }
  return out;
}

inline std::vector<double> zero_trace_values(const ScalarField& u) {
  std::vector<double> v = u.values;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (!u.g().is_interior(k)) v[k] = 0.0;
  return v;
}

}  // namespace detail

struct QuotientEval {
  double K = 0.0;
  double k = 0.0;
  double quotient = 0.0;
  double S = 0.0;
  std::vector<double> grad_dual;  // per interior dof
};

/// K, k, S and the dual gradient of K/k. Dirichlet values of u are ignored.
inline QuotientEval evaluate_quotient(const ScalarField& u, const ExponentField& p, const ExponentField& q) {
  const TriGrid& g = u.g();
  const auto vals = detail::zero_trace_values(u);
  QuotientEval out;
  out.K = luxemburg_of_magnitudes(gradient_magnitudes(g, vals), p.samples(), g.tri_area());
  out.k = luxemburg_of_magnitudes(centroid_values(g, vals), q.samples(), g.tri_area());
  if (out.K == 0.0 || out.k == 0.0) throw ZeroField();
  out.quotient = out.K / out.k;
  const auto gt = detail::grad_terms(g, vals, p.samples(), out.K);
  const auto vt = detail::value_terms(g, vals, q.samples(), out.k);
  out.S = std::exp(gt.log_S - vt.log_S);
  const auto A = detail::assemble_grad_form(g, gt);
  const auto B = detail::assemble_value_form(g, vt);
  const double sa = std::exp(-gt.log_S), sb = std::exp(-vt.log_S);
  out.grad_dual.resize(A.size());
  for (std::size_t i = 0; i < A.size(); ++i)
    out.grad_dual[i] = out.quotient * (A[i] * sa / out.K - B[i] * sb / out.k);
  return out;
}

/// dK(u; eta) = sum area |g|^{p-2} g . grad eta / sum area |g|^p, g = grad u / K.
inline double gateaux_dK(const ScalarField& u, const ScalarField& eta, const ExponentField& p) {
  const TriGrid& g = u.g();
  const auto vals = detail::zero_trace_values(u);
  const double K = luxemburg_of_magnitudes(gradient_magnitudes(g, vals), p.samples(), g.tri_area());
  if (K == 0.0) throw ZeroField();
  const auto gt = detail::grad_terms(g, vals, p.samples(), K);
  const auto ge = gradient(g, detail::zero_trace_values(eta));
  std::vector<double> terms(ge.size());
  for (std::size_t t = 0; t < ge.size(); ++t) terms[t] = gt.weight[t] * dot(gt.g[t], ge[t]);
  return pairwise_sum(terms) * std::exp(-gt.log_S);
}

/// dk(u; eta) = sum area |v|^{q-2} v eta_T / sum area |v|^q, v = u_T / k.
inline double gateaux_dk(const ScalarField& u, const ScalarField& eta, const ExponentField& q) {
  const TriGrid& g = u.g();
  const auto vals = detail::zero_trace_values(u);
  const double k = luxemburg_of_magnitudes(centroid_values(g, vals), q.samples(), g.tri_area());
  if (k == 0.0) throw ZeroField();
  const auto vt = detail::value_terms(g, vals, q.samples(), k);
  const auto ce = centroid_values(g, detail::zero_trace_values(eta));
  std::vector<double> terms(ce.size());
  for (std::size_t t = 0; t < ce.size(); ++t) terms[t] = vt.weight[t] * ce[t];
  return pairwise_sum(terms) * std::exp(-vt.log_S);
}

/// Probe set: the given anchor nodes (interior ones) followed by evenly
/// strided dofs, count entries in total, as dof indices.
inline std::vector<int> probe_dofs(const TriGrid& g, const std::vector<int>& anchors, std::size_t count = 32) {
  std::vector<int> out;
  std::vector<std::uint8_t> used(g.interior_count(), 0);
  for (int node : anchors) {
    const int d = g.dof_of_node(node);
    if (d >= 0 && !used[d] && out.size() < count) {
      used[d] = 1;
      out.push_back(d);
    }
  }
  const std::size_t n = g.interior_count();
  const std::size_t want = std::min(count, n);
  const std::size_t stride = std::max<std::size_t>(1, n / (want + 1));
  for (std::size_t d = stride / 2; out.size() < want && d < n; d += stride)
    if (!used[d]) {
      used[d] = 1;
      out.push_back(static_cast<int>(d));
    }
  for (std::size_t d = 0; out.size() < want && d < n; ++d)
    if (!used[d]) {
      used[d] = 1;
      out.push_back(static_cast<int>(d));
    }
  return out;
}

/// Euler-Lagrange residual: max over probe hats of |A(phi) - Lambda S B(phi)|
/// divided by the largest |A|, |Lambda S B| over all interior hats, where
/// A(phi) = sum area |g|^{p-2} g . grad phi and B(phi) = sum area |v|^{q-2} v phi.
inline double el_residual(const ScalarField& u, const ExponentField& p, const ExponentField& q,
                          std::size_t probes = 32) {
  const TriGrid& g = u.g();
  const QuotientEval ev = evaluate_quotient(u, p, q);
  const auto vals = detail::zero_trace_values(u);
  const auto A = detail::assemble_grad_form(g, detail::grad_terms(g, vals, p.samples(), ev.K));
  const auto B = detail::assemble_value_form(g, detail::value_terms(g, vals, q.samples(), ev.k));
  const double ls = ev.quotient * ev.S;
  double scale = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) scale = std::max({scale, std::abs(A[i]), std::abs(ls * B[i])});
  if (scale == 0.0) return 0.0;
  const SupNorm top = sup_norm_and_argmax(std::span<const double>(vals));
  double worst = 0.0;
  for (int d : probe_dofs(g, {top.argmax.front()}, probes))
    worst = std::max(worst, std::abs(A[d] - ls * B[d]));
  return worst / scale;
}

enum class InitKind { Distance, Random, Given };

struct MinimizeOptions {
  int max_iter = 500;
  double tol = 1e-6;
  double el_tol = 1e-3;
  InitKind init = InitKind::Distance;
  std::optional<ScalarField> given;
  int restarts = 1;
  std::uint64_t seed = 0;
};

struct MinimizeResult {
  ScalarField minimizer;  // k = 1, nonnegative
  double lambda = 0.0;
  double K = 0.0;
  double S = 0.0;
  int iterations = 0;
  double el_residual = 0.0;
  int argmax_node = -1;
  Vec2 argmax_point;
  std::vector<double> trace;
  bool converged = false;
  std::vector<double> restart_lambdas;  // one per restart, best first is not implied
};

namespace detail {

inline std::vector<double> initial_dofs(const GridPtr& grid, const MinimizeOptions& opts, int restart) {
  InitKind kind = restart == 0 ? opts.init : InitKind::Random;
  std::vector<double> out(grid->interior_count());
  if (kind == InitKind::Given) {
    if (!opts.given) throw InvalidArgument("init 'given' requires a field");
    if (opts.given->grid->node_count() != grid->node_count()) throw InvalidArgument("given field grid mismatch");
    for (std::size_t d = 0; d < out.size(); ++d) out[d] = std::abs(opts.given->values[grid->node_of_dof(d)]);
  } else if (kind == InitKind::Distance) {
    const ScalarField d = distance_values(grid);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = d.values[grid->node_of_dof(i)];
  } else {
    std::mt19937_64 rng(opts.seed + static_cast<std::uint64_t>(restart));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& v : out) v = 0.05 + unit(rng);
  }
  bool nonzero = std::any_of(out.begin(), out.end(), [](double v) { return v != 0.0; });
  if (!nonzero) throw ZeroField();
  return out;
}

// Normalizes nodal u so that k(u) = 1; returns the nodal vector.
inline std::vector<double> k_normalized(const TriGrid& g, std::vector<double> nodal, std::span<const double> qs) {
  const double k = luxemburg_of_magnitudes(centroid_values(g, nodal), qs, g.tri_area());
  if (k == 0.0) throw ZeroField();
  for (double& v : nodal) v /= k;
  return nodal;
}

inline MinimizeResult run_ipm(const GridPtr& grid, NormMinimizer& nm, const ExponentField& p,
                              const ExponentField& q, std::vector<double> dofs, const MinimizeOptions& opts) {
  const TriGrid& g = *grid;
  std::vector<double> u = k_normalized(g, nm.nodal(dofs), q.samples());
  MinimizeResult res;
  double K = luxemburg_of_magnitudes(gradient_magnitudes(g, u), p.samples(), g.tri_area());
  res.trace.push_back(K);
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    // c = k'(u), one entry per dof; k(u) = 1 here.
    const auto vt = value_terms(g, u, q.samples(), 1.0);
    auto c = assemble_value_form(g, vt);
    const double inv_s = std::exp(-vt.log_S);
    for (double& x : c) x *= inv_s;
    std::vector<double> warm(g.interior_count());
    for (std::size_t d = 0; d < warm.size(); ++d) warm[d] = u[g.node_of_dof(d)];
    const ConstrainedSolve sol = nm.solve(c, warm);
    std::vector<double> next = k_normalized(g, nm.nodal(sol.v), q.samples());
    const double Kn = luxemburg_of_magnitudes(gradient_magnitudes(g, next), p.samples(), g.tri_area());
    if (!(Kn <= res.trace.back())) {
      // No further decrease at working precision.
      break;
    }
    u.swap(next);
    res.trace.push_back(Kn);
    const std::size_t m = res.trace.size();
    if (m > 10) {
      const double change = (res.trace[m - 11] - res.trace[m - 1]) / res.trace[m - 1];
      if (change < opts.tol) {
        const double el = el_residual(ScalarField{grid, u, true}, p, q);
        if (el < opts.el_tol) {
          ++it;
          res.converged = true;
          break;
        }
      }
    }
  }
  for (double& v : u) v = std::abs(v);
  res.minimizer = ScalarField{grid, u, true};
  res.iterations = it;
  const QuotientEval ev = evaluate_quotient(res.minimizer, p, q);
  res.lambda = ev.quotient;
  res.K = ev.K;
  res.S = ev.S;
  res.el_residual = el_residual(res.minimizer, p, q);
  if (!res.converged) res.converged = res.el_residual < opts.el_tol && it < opts.max_iter;
  const SupNorm top = sup_norm_and_argmax(res.minimizer);
  res.argmax_node = top.argmax.front();
  res.argmax_point = g.nodes()[res.argmax_node];
  return res;
}

}  // namespace detail

/// First eigenvalue of K/k on the grid of p. Restart 0 uses opts.init, later
/// restarts random fields seeded by seed + restart; the best lambda wins and
/// every restart's lambda is reported.
inline MinimizeResult minimize_quotient(const GridPtr& grid, const ExponentField& p, const ExponentField& q,
                                        const MinimizeOptions& opts = {}) {
  if (opts.max_iter < 1) throw InvalidArgument("max_iter must be positive");
  if (!(opts.tol > 0.0)) throw InvalidArgument("tol must be positive");
  if (opts.restarts < 1) throw InvalidArgument("restarts must be at least 1");
  if (p.samples().size() != grid->triangle_count() || q.samples().size() != grid->triangle_count())
    throw InvalidArgument("exponent fields were sampled on a different grid");
  NormMinimizer nm(grid, p);
  std::optional<MinimizeResult> best;
  std::vector<double> lambdas;
  for (int r = 0; r < opts.restarts; ++r) {
    MinimizeResult res = detail::run_ipm(grid, nm, p, q, detail::initial_dofs(grid, opts, r), opts);
    lambdas.push_back(res.lambda);
    if (!best || res.lambda < best->lambda) best = std::move(res);
  }
  best->restart_lambdas = std::move(lambdas);
  return std::move(*best);
}

}  // namespace vxq
