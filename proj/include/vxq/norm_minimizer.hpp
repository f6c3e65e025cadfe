#pragma once

// Convex subproblem shared by the eigenvalue solvers:
//
//   minimize K(v) = ||grad v||_{P}  subject to  c . v = 1,  v zero-trace,
//
// for a fixed per-triangle exponent P and a linear functional c on the
// interior dofs. Solved through the modular: the minimizer of
// rho(grad w) = sum_T beta_T |grad w|^{P_T} on {c . w = t} has rho = 1
// exactly when t = 1 / min K, so an outer Newton iteration on log t drives
// the modular to 1 and an inner projected Newton iteration minimizes rho.
//
// All modular quantities are carried relative to exp(shift) (the largest
// per-triangle log term), so exponents in the hundreds stay representable.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <numeric>
#include <cmath>
#include <span>
#include <vector>

#include "vxq/domain_grid.hpp"
#include "vxq/exponents.hpp"
#include "vxq/modular_norms.hpp"

namespace vxq {

struct ConstrainedSolve {
  std::vector<double> v;  // dofs, c . v = 1
  double K = 0.0;         // ||grad v||_P (Luxemburg, same variant as the solver)
  int newton_steps = 0;
  int outer_steps = 0;
  bool converged = false;
};

class NormMinimizer {
 public:
  NormMinimizer(GridPtr grid, std::vector<double> exps, NormVariant variant = NormVariant::Weighted)
      : grid_(std::move(grid)), exps_(std::move(exps)), variant_(variant) {
    const TriGrid& g = *grid_;
    if (exps_.size() != g.triangle_count()) throw InvalidArgument("exponent samples do not match grid");
    log_beta_.resize(exps_.size());
    for (std::size_t t = 0; t < exps_.size(); ++t) {
      log_beta_[t] = std::log(g.tri_area()[t]);
      if (variant_ == NormVariant::Weighted) log_beta_[t] -= std::log(exps_[t]);
    }
    build_pattern();
  }

  NormMinimizer(GridPtr grid, const ExponentField& p, NormVariant variant = NormVariant::Weighted)
      : NormMinimizer(std::move(grid), p.samples(), variant) {}

  const TriGrid& grid() const { return *grid_; }
  std::span<const double> exponents() const { return exps_; }

  /// Luxemburg norm of the gradient of a dof vector.
  double norm_of_dofs(std::span<const double> dofs) const {
    const auto mags = gradient_magnitudes(*grid_, nodal(dofs));
    return luxemburg_of_magnitudes(mags, exps_, grid_->tri_area(), variant_);
  }

  /// warm: optional starting dofs with c . warm > 0.
  ConstrainedSolve solve(std::span<const double> c, std::span<const double> warm = {}) {
    const std::size_t n = grid_->interior_count();
    if (c.size() != n) throw InvalidArgument("functional size does not match dofs");
    Eigen::Map<const Eigen::VectorXd> cv(c.data(), static_cast<Eigen::Index>(n));

    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    if (!warm.empty() && std::inner_product(c.begin(), c.end(), warm.begin(), 0.0) > 0.0) {
      for (std::size_t i = 0; i < n; ++i) w[static_cast<Eigen::Index>(i)] = warm[i];
    } else {
      w = laplace_solve(cv);
    }
    // Put the start on the unit modular sphere.
    {
      const double nrm = norm_of_dofs(std::span<const double>(w.data(), n));
      if (!(nrm > 0.0)) throw ZeroField();
      w /= nrm;
    }

    ConstrainedSolve out;
    for (int outer = 0; outer < kMaxOuter; ++outer) {
      ++out.outer_steps;
      const double t = cv.dot(w);
      const Inner in = minimize_modular(w, cv);
      out.newton_steps += in.steps;
      // d log m / d log t = t * nu / m, always within [P-, P+].
      const double log_m = in.log_rho;
      const double slope = std::clamp(t * in.nu_scaled / in.rho_scaled, p_min(), p_max());
      if (std::abs(log_m) < kOuterTol && in.converged) {
        out.converged = true;
        break;
      }
      w *= std::exp(-log_m / slope);
    }

    const double t = cv.dot(w);
    out.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.v[i] = w[static_cast<Eigen::Index>(i)] / t;
    out.K = norm_of_dofs(out.v);
    return out;
  }

  /// Nodal vector (Dirichlet nodes 0) from dofs.
  std::vector<double> nodal(std::span<const double> dofs) const {
    std::vector<double> v(grid_->node_count(), 0.0);
    for (std::size_t d = 0; d < dofs.size(); ++d) v[grid_->node_of_dof(d)] = dofs[d];
    return v;
  }

 private:
  static constexpr int kMaxOuter = 60;
  static constexpr int kMaxInner = 400;
  static constexpr double kOuterTol = 1e-12;
  static constexpr double kInnerTol = 1e-13;
  static constexpr double kReg = 1e-9;

  struct Inner {
    double log_rho = 0.0;
    double rho_scaled = 1.0;
    double nu_scaled = 0.0;  // multiplier, in the same scaled units as rho_scaled
    int steps = 0;
    bool converged = false;
  };

  GridPtr grid_;
  std::vector<double> exps_;
  NormVariant variant_;
  std::vector<double> log_beta_;
  Eigen::SparseMatrix<double> hess_;
  std::vector<std::array<int, 9>> slot_;  // value index of local (r, s), -1 when not a dof pair
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool analyzed_ = false;

  double p_min() const { return *std::min_element(exps_.begin(), exps_.end()); }
  double p_max() const { return *std::max_element(exps_.begin(), exps_.end()); }

  void build_pattern() {
    const TriGrid& g = *grid_;
    const auto n = static_cast<Eigen::Index>(g.interior_count());
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& tri : g.triangles())
      for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s) {
          const int dr = g.dof_of_node(tri[r]), ds = g.dof_of_node(tri[s]);
          if (dr >= 0 && ds >= 0) trip.emplace_back(dr, ds, 1.0);
        }
    hess_.resize(n, n);
    hess_.setFromTriplets(trip.begin(), trip.end());
    hess_.makeCompressed();
    slot_.assign(g.triangle_count(), {});
    const int* outer = hess_.outerIndexPtr();
    const int* inner = hess_.innerIndexPtr();
    for (std::size_t t = 0; t < g.triangle_count(); ++t) {
      const auto& tri = g.triangles()[t];
      for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s) {
          const int dr = g.dof_of_node(tri[r]), ds = g.dof_of_node(tri[s]);
          int idx = -1;
          if (dr >= 0 && ds >= 0) {
            // column-major: column ds, row dr
            const int* lo = inner + outer[ds];
            const int* hi = inner + outer[ds + 1];
            idx = static_cast<int>(std::lower_bound(lo, hi, dr) - inner);
          }
          slot_[t][3 * r + s] = idx;
        }
    }
  }

  void factorize() {
    if (!analyzed_) {
      ldlt_.analyzePattern(hess_);
      analyzed_ = true;
    }
    ldlt_.factorize(hess_);
    if (ldlt_.info() != Eigen::Success) throw Error("sparse factorization failed");
  }

  // Unweighted stiffness solve, used for a cold start.
  Eigen::VectorXd laplace_solve(const Eigen::VectorXd& c) {
    const TriGrid& g = *grid_;
    std::fill(hess_.valuePtr(), hess_.valuePtr() + hess_.nonZeros(), 0.0);
    for (std::size_t t = 0; t < g.triangle_count(); ++t) {
      const auto& hg = g.hat_gradients()[t];
      for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s) {
          const int idx = slot_[t][3 * r + s];
          if (idx >= 0) hess_.valuePtr()[idx] += g.tri_area()[t] * dot(hg[r], hg[s]);
        }
    }
    factorize();
    return ldlt_.solve(c);
  }

  // Per-triangle gradients and the log modular terms.
  void terms(const Eigen::VectorXd& w, std::vector<Vec2>& grads, std::vector<double>& logt) const {
    const TriGrid& g = *grid_;
    const auto& tris = g.triangles();
    const auto& hg = g.hat_gradients();
    grads.resize(tris.size());
    logt.resize(tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t) {
      Vec2 s;
      for (int k = 0; k < 3; ++k) {
        const int d = g.dof_of_node(tris[t][k]);
        if (d >= 0) s = s + w[d] * hg[t][k];
      }
      grads[t] = s;
      const double m = norm(s);
      logt[t] = m > 0.0 ? log_beta_[t] + exps_[t] * std::log(m) : kNegInf;
    }
  }

  static double lse(const std::vector<double>& v, std::vector<double>& buf) {
    double top = kNegInf;
    for (double x : v) top = std::max(top, x);
    if (top == kNegInf) return kNegInf;
    buf.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) buf[i] = std::exp(v[i] - top);
    return top + std::log(pairwise_sum(buf));
  }

  // Projected Newton on rho over {c . w = const}; w is updated in place.
  Inner minimize_modular(Eigen::VectorXd& w, const Eigen::VectorXd& c) {
    const TriGrid& g = *grid_;
    const auto n = static_cast<Eigen::Index>(g.interior_count());
    const auto& tris = g.triangles();
    const auto& hg = g.hat_gradients();
    std::vector<Vec2> grads, trial_grads;
    std::vector<double> logt, trial_logt, buf, scaled(tris.size());
    Eigen::VectorXd grad(n), trial(n);

    Inner out;
    terms(w, grads, logt);
    double log_rho = lse(logt, buf);
    for (int it = 0; it < kMaxInner; ++it) {
      const double shift = log_rho;  // scaled rho is then ~1
      double gmax = 0.0;
      for (const Vec2& v : grads) gmax = std::max(gmax, norm(v));
      const double gfloor = 1e-8 * gmax;

      grad.setZero();
      std::fill(hess_.valuePtr(), hess_.valuePtr() + hess_.nonZeros(), 0.0);
      double cmax = 0.0;
      std::vector<double> alpha(tris.size()), beta(tris.size());
      for (std::size_t t = 0; t < tris.size(); ++t) {
        const double P = exps_[t];
        const double m = norm(grads[t]);
        scaled[t] = logt[t] == kNegInf ? 0.0 : std::exp(logt[t] - shift);
        // d rho / d g = P beta |g|^{P-2} g ; Hessian P beta |g|^{P-2} (I + (P-2) gh gh^T)
        const double mh = (P < 2.0) ? std::max(m, gfloor) : m;
        const double hc = mh > 0.0 ? std::exp(log_beta_[t] + std::log(P) + (P - 2.0) * std::log(mh) - shift) : 0.0;
        const double gc = m > 0.0 ? P * scaled[t] / (m * m) : 0.0;
        for (int k = 0; k < 3; ++k) {
          const int d = g.dof_of_node(tris[t][k]);
          if (d >= 0) grad[d] += gc * dot(grads[t], hg[t][k]);
        }
        alpha[t] = hc;
        beta[t] = hc * (P - 2.0);
        cmax = std::max(cmax, hc * std::max(1.0, P - 1.0) / g.tri_area()[t]);
      }
      const double eps = kReg * cmax;
      for (std::size_t t = 0; t < tris.size(); ++t) {
        const double m = norm(grads[t]);
        const Vec2 gh = m > 0.0 ? (1.0 / m) * grads[t] : Vec2{};
        const double a = alpha[t] + eps * g.tri_area()[t];
        for (int r = 0; r < 3; ++r) {
          const double pr = dot(gh, hg[t][r]);
          for (int s = 0; s < 3; ++s) {
            const int idx = slot_[t][3 * r + s];
            if (idx < 0) continue;
            hess_.valuePtr()[idx] += a * dot(hg[t][r], hg[t][s]) + beta[t] * pr * dot(gh, hg[t][s]);
          }
        }
      }
      factorize();
      const Eigen::VectorXd a = ldlt_.solve(grad);
      const Eigen::VectorXd b = ldlt_.solve(c);
      const double nu = c.dot(a) / c.dot(b);
      const Eigen::VectorXd dw = -a + nu * b;
      const double rho_s = pairwise_sum(scaled);
      const double slope = grad.dot(dw);  // < 0 unless optimal
      out.nu_scaled = nu;
      out.rho_scaled = rho_s;
      out.log_rho = log_rho;
      out.steps = it + 1;
      if (!(slope < 0.0) || -slope <= kInnerTol * rho_s) {
        out.converged = true;
        break;
      }
      // Armijo backtracking, factor 0.5, sufficient decrease 1e-4.
      double step = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        trial = w + step * dw;
        terms(trial, trial_grads, trial_logt);
        const double lt = lse(trial_logt, buf);
        const double target = rho_s + 1e-4 * step * slope;
        if (target > 0.0 && lt - shift <= std::log(target)) {
          w = trial;
          grads.swap(trial_grads);
          logt.swap(trial_logt);
          log_rho = lt;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        // Rounding floor: the decrement is as small as the arithmetic allows.
        out.converged = -slope <= 1e-8 * rho_s;
        break;
      }
    }
    // Multiplier and modular at the final point, in the same scaled units.
    out.log_rho = log_rho;
    out.rho_scaled = std::exp(log_rho - out.log_rho);
    if (out.steps > 0) {
      // nu was computed relative to exp(shift of the last assembled step);
      // recompute it relative to the final log rho so the ratio is consistent.
      out.nu_scaled = multiplier(w, c, grads, logt);
    }
    return out;
  }

  // nu with grad rho = nu c, least squares over dofs, relative to exp(log rho).
  double multiplier(const Eigen::VectorXd&, const Eigen::VectorXd& c, const std::vector<Vec2>& grads,
                    const std::vector<double>& logt) const {
    const TriGrid& g = *grid_;
    const auto& tris = g.triangles();
    const auto& hg = g.hat_gradients();
    std::vector<double> buf;
    const double shift = lse(logt, buf);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.interior_count()));
    for (std::size_t t = 0; t < tris.size(); ++t) {
      const double m = norm(grads[t]);
      if (!(m > 0.0)) continue;
      const double gc = exps_[t] * std::exp(logt[t] - shift) / (m * m);
      for (int k = 0; k < 3; ++k) {
        const int d = g.dof_of_node(tris[t][k]);
        if (d >= 0) grad[d] += gc * dot(grads[t], hg[t][k]);
      }
    }
    return grad.dot(c) / c.dot(c);
  }
};

}  // namespace vxq
