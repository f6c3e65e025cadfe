#pragma once

// The two limits: Lambda_{l,j} -> mu_l as j grows, and mu_l -> 1/||d||_inf as
// l grows.
//
// mu_l = min ||grad u||_{lp} / ||u||_inf. For a node x0 let C(x0) be
// K(v)/||v||_inf with v the minimizer of K = ||grad v||_{lp} under v(x0) = 1
// (a convex problem). C >= mu_l everywhere with equality at the max point of
// the extremal, so mu_l = min_x0 C(x0), found by a lattice-neighbour descent
// started from the max of the warm start.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "vxq/distance_ridge.hpp"
#include "vxq/modular_norms.hpp"
#include "vxq/norm_minimizer.hpp"
#include "vxq/rayleigh_solver.hpp"

namespace vxq {

inline constexpr double kMaxScaledExponent = 256.0;

struct MuResult {
  ScalarField w;       // ||w||_inf = 1, nonnegative
  double mu = 0.0;
  int x0 = -1;         // max node
  Vec2 x0_point;
  double K = 0.0;      // ||grad w||_{lp}
  double S = 0.0;      // sum area |grad w / K|^{lp}
  double dirac_residual = 0.0;
  double identity_mu = 0.0;  // A(w) / (S w(x0)), should reproduce mu
  bool singleton = false;
  double min_interior = 0.0;
  int solves = 0;
  bool converged = false;
};

struct MuOptions {
  int max_moves = 200;  // node moves of the local search
  double tie_tol = kDefaultTieTol;
  std::size_t probes = 32;
};

namespace detail {

inline std::vector<int> lattice_neighbours(const TriGrid& g, int node) {
  std::vector<int> out;
  const auto [i, j] = g.lattice_coords(node);
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      if (di == 0 && dj == 0) continue;
      const int a = i + di, b = j + dj;
      if (a < 0 || b < 0 || a >= g.nx() || b >= g.ny()) continue;
      const int m = g.lattice_index(a, b);
      if (g.is_interior(m)) out.push_back(m);
    }
  return out;
}

inline void check_exponent_cap(const ExponentField& p) {
  if (p.p_plus() > kMaxScaledExponent)
    throw InvalidArgument("scaled exponent maximum " + std::to_string(p.p_plus()) + " exceeds " +
                          std::to_string(kMaxScaledExponent));
}

}  // namespace detail

/// Dirac residual of an extremal w of mu: max over probe hats of
/// |A(phi) - mu S phi(x0)| / (mu S), A(phi) = sum area |g|^{lp-2} g . grad phi,
/// g = grad w / K. Anchors are x0 and its lattice neighbours.
inline double dirac_residual(const ScalarField& w, const ExponentField& lp, double mu, int x0,
                             std::size_t probes = 32) {
  const TriGrid& g = w.g();
  const auto vals = detail::zero_trace_values(w);
  const double K = luxemburg_of_magnitudes(gradient_magnitudes(g, vals), lp.samples(), g.tri_area());
  if (K == 0.0) throw ZeroField();
  const auto gt = detail::grad_terms(g, vals, lp.samples(), K);
  const auto A = detail::assemble_grad_form(g, gt);
  const double S = std::exp(gt.log_S);
  std::vector<int> anchors{x0};
  for (int m : detail::lattice_neighbours(g, x0)) anchors.push_back(m);
  const int d0 = g.dof_of_node(x0);
  double worst = 0.0;
  for (int d : probe_dofs(g, anchors, probes)) {
    const double phi_x0 = d == d0 ? 1.0 : 0.0;
    worst = std::max(worst, std::abs(A[d] - mu * S * phi_x0));
  }
  return worst / (mu * S);
}

/// mu_l for the exponent lp (already scaled). warm: optional starting field;
/// default is the distance function.
inline MuResult direct_mu(const GridPtr& grid, const ExponentField& lp, const MuOptions& opts = {},
                          const std::optional<ScalarField>& warm = std::nullopt) {
  detail::check_exponent_cap(lp);
  if (lp.samples().size() != grid->triangle_count())
    throw InvalidArgument("exponent field was sampled on a different grid");
  const TriGrid& g = *grid;
  NormMinimizer nm(grid, lp);

  std::vector<double> start(g.interior_count());
  {
    const ScalarField init = warm ? *warm : distance_values(grid);
    for (std::size_t d = 0; d < start.size(); ++d) start[d] = std::abs(init.values[g.node_of_dof(d)]);
  }

  struct Eval {
    double C;
    std::vector<double> v;
    bool converged;
  };
  std::map<int, Eval> cache;
  int solves = 0;
  auto evaluate = [&](int node, const std::vector<double>& from) -> const Eval& {
    auto it = cache.find(node);
    if (it != cache.end()) return it->second;
    std::vector<double> c(g.interior_count(), 0.0);
    c[g.dof_of_node(node)] = 1.0;
    const ConstrainedSolve s = nm.solve(c, from);
    ++solves;
    double vmax = 0.0;
    for (double x : s.v) vmax = std::max(vmax, std::abs(x));
    return cache.emplace(node, Eval{s.K / vmax, s.v, s.converged}).first->second;
  };
  auto argmax_node = [&](const std::vector<double>& dofs) {
    std::size_t best = 0;
    for (std::size_t d = 1; d < dofs.size(); ++d)
      if (std::abs(dofs[d]) > std::abs(dofs[best])) best = d;
    return g.node_of_dof(best);
  };

  int x0 = argmax_node(start);
  const Eval* cur = &evaluate(x0, start);
  bool moved_out = false;
  for (int move = 0; move < opts.max_moves; ++move) {
    // The constrained minimizer may peak elsewhere; C can only drop there.
    const int peak = argmax_node(cur->v);
    if (peak != x0 && std::abs(cur->v[g.dof_of_node(peak)]) > 1.0 + 1e-12) {
      const std::vector<double> from = cur->v;
      const Eval& e = evaluate(peak, from);
      if (e.C < cur->C) {
        x0 = peak;
        cur = &e;
        continue;
      }
    }
    int best = -1;
    double bestC = cur->C;
    const std::vector<double> from = cur->v;
    for (int m : detail::lattice_neighbours(g, x0)) {
      const Eval& e = evaluate(m, from);
      if (e.C < bestC * (1.0 - 1e-13)) {
        bestC = e.C;
        best = m;
      }
    }
    if (best < 0) {
      moved_out = true;
      break;
    }
    x0 = best;
    cur = &cache.at(best);
  }

  MuResult out;
  out.solves = solves;
  std::vector<double> vals = nm.nodal(cur->v);
  double vmax = 0.0;
  for (double x : vals) vmax = std::max(vmax, std::abs(x));
  for (double& x : vals) x = std::abs(x) / vmax;
  out.w = ScalarField{grid, vals, true};
  out.mu = cur->C;
  out.x0 = x0;
  out.x0_point = g.nodes()[x0];
  out.K = luxemburg_of_magnitudes(gradient_magnitudes(g, vals), lp.samples(), g.tri_area());
  const auto gt = detail::grad_terms(g, vals, lp.samples(), out.K);
  out.S = std::exp(gt.log_S);
  out.dirac_residual = dirac_residual(out.w, lp, out.mu, x0, opts.probes);
  {
    std::vector<double> terms(gt.g.size());
    const auto gw = gradient(g, vals);
    for (std::size_t t = 0; t < terms.size(); ++t) terms[t] = gt.weight[t] * dot(gt.g[t], gw[t]);
    out.identity_mu = pairwise_sum(terms) / (out.S * vals[x0]);
  }
  const SupNorm top = sup_norm_and_argmax(out.w, opts.tie_tol);
  out.singleton = top.argmax.size() == 1;
  out.min_interior = 0.0;
  {
    // sign check on the signed minimizer before |.| was taken
    double mn = 0.0;
    for (double x : cur->v) mn = std::min(mn, x / vmax);
    out.min_interior = mn;
  }
  out.converged = moved_out && cur->converged;
  return out;
}

enum class LimitKind { MuL, LambdaInfinity };

inline const char* limit_kind_name(LimitKind k) { return k == LimitKind::MuL ? "mu_l" : "lambda_infinity"; }

struct SweepRow {
  int index = 0;
  double eigenvalue = 0.0;
  double sup_norm = 0.0;  // of the reported extremal
  Vec2 argmax;
  double gap = 0.0;
  double el_residual = 0.0;  // el residual (j sweep) or dirac residual (l sweep)
  bool converged = false;
  int iterations = 0;
  // j sweep
  double lower_bound = 0.0;  // mu_l |Omega|^{-alpha_j}
  double upper_bound = 0.0;  // ||grad d||_{lp} / ||d||_{jq}
  // l sweep
  double dist_to_d = 0.0;        // ||w_l - d/||d||_inf||_inf
  double bound_violation = 0.0;  // max(w_l - d/||d||_inf, 0)
  double d_bound = 0.0;          // ||grad d||_{lp} / ||d||_inf
  bool singleton = false;
  double min_value = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double limit_value = 0.0;
  LimitKind limit_kind = LimitKind::MuL;
  int l = 0;  // j sweep only
  std::optional<MuResult> mu;           // j sweep: the direct mu_l run
  std::optional<ScalarField> extremal;  // last row's extremal
};

/// alpha_j from the case split on |Omega|.
inline double alpha_j(double measure, const ExponentField& jq) {
  return measure <= 1.0 ? 1.0 / jq.p_plus() : 1.0 / jq.p_minus();
}

/// Lambda_{l,j} for each j (warm-started down the list) against mu_l.
inline SweepReport sweep_j(const GridPtr& grid, int l, const ExponentField& p, const ExponentField& q,
                           const std::vector<int>& j_list, const MinimizeOptions& opts = {},
                           const MuOptions& mu_opts = {}) {
  if (l < 2) throw InvalidArgument("l must be at least 2");
  if (j_list.empty()) throw InvalidArgument("j_list is empty");
  for (std::size_t i = 0; i < j_list.size(); ++i) {
    if (j_list[i] < 1) throw InvalidArgument("j values must be positive");
    if (i > 0 && j_list[i] <= j_list[i - 1]) throw InvalidArgument("j_list must be increasing");
  }
  const TriGrid& g = *grid;
  const ExponentField lp = p.rescaled(l);
  detail::check_exponent_cap(lp);
  const DistanceResult dist = distance_field(grid);
  const double measure = g.total_area();

  SweepReport rep;
  rep.l = l;
  rep.limit_kind = LimitKind::MuL;
  rep.mu = direct_mu(grid, lp, mu_opts);
  rep.limit_value = rep.mu->mu;

  const double grad_d = gradient_norm(dist.d, lp);
  MinimizeOptions o = opts;
  std::optional<ScalarField> prev;
  for (int j : j_list) {
    const ExponentField jq = q.rescaled(j);
    detail::check_exponent_cap(jq);
    if (prev) {
      o.init = InitKind::Given;
      o.given = prev;
    }
    const MinimizeResult r = minimize_quotient(grid, lp, jq, o);
    SweepRow row;
    row.index = j;
    row.eigenvalue = r.lambda;
    row.sup_norm = sup_norm_and_argmax(r.minimizer).value;
    row.argmax = r.argmax_point;
    row.gap = std::abs(r.lambda - rep.limit_value);
    row.el_residual = r.el_residual;
    row.converged = r.converged;
    row.iterations = r.iterations;
    row.lower_bound = rep.limit_value * std::pow(measure, -alpha_j(measure, jq));
    row.upper_bound = grad_d / luxemburg_norm(dist.d, jq);
    rep.rows.push_back(row);
    prev = r.minimizer;
  }
  rep.extremal = prev;
  return rep;
}

struct LSweep {
  SweepReport report;
  std::vector<MuResult> results;
};

/// mu_l for each l (warm-started down the list) against 1/||d||_inf.
inline LSweep sweep_l(const GridPtr& grid, const ExponentField& p, const std::vector<int>& l_list,
                      const MuOptions& opts = {}) {
  if (l_list.empty()) throw InvalidArgument("l_list is empty");
  for (std::size_t i = 0; i < l_list.size(); ++i) {
    if (l_list[i] < 2) throw InvalidArgument("l values must be at least 2");
    if (i > 0 && l_list[i] <= l_list[i - 1]) throw InvalidArgument("l_list must be increasing");
  }
  const TriGrid& g = *grid;
  const DistanceResult dist = distance_field(grid);
  LSweep out;
  out.report.limit_kind = LimitKind::LambdaInfinity;
  out.report.limit_value = dist.lambda_inf;
  std::optional<ScalarField> prev;
  for (int l : l_list) {
    const ExponentField lp = p.rescaled(l);
    MuResult mu = direct_mu(grid, lp, opts, prev);
    SweepRow row;
    row.index = l;
    row.eigenvalue = mu.mu;
    row.sup_norm = 1.0;
    row.argmax = mu.x0_point;
    row.gap = std::abs(mu.mu - dist.lambda_inf);
    row.el_residual = mu.dirac_residual;
    row.converged = mu.converged;
    row.iterations = mu.solves;
    double dd = 0.0, viol = 0.0;
    for (std::size_t k = 0; k < g.node_count(); ++k) {
      const double diff = mu.w.values[k] - dist.d.values[k] / dist.d_max;
      dd = std::max(dd, std::abs(diff));
      viol = std::max(viol, diff);
    }
    row.dist_to_d = dd;
    row.bound_violation = viol;
    row.d_bound = gradient_norm(dist.d, lp) / dist.d_max;
    row.singleton = mu.singleton;
    row.min_value = mu.min_interior;
    out.report.rows.push_back(row);
    prev = mu.w;
    out.results.push_back(std::move(mu));
  }
  out.report.extremal = prev;
  return out;
}

}  // namespace vxq
