#pragma once

// Modular function and Luxemburg norms on L^{p(x)}, evaluated in the log
// domain so that exponents in the hundreds neither overflow nor underflow.
//
//   rho(u / gamma)   = sum_T area_T |u_T / gamma|^{p_T} / p_T      (weighted)
//   rho_c(u / gamma) = sum_T area_T |u_T / gamma|^{p_T}            (classical)
//   ||u|| = the gamma > 0 with rho(u / gamma) = 1.
//
// u_T is either the centroid value of a nodal field or the magnitude of its
// per-triangle gradient.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "vxq/domain_grid.hpp"
#include "vxq/exponents.hpp"

namespace vxq {

enum class NormVariant { Weighted, Classical };

struct ModularValue {
  double log_value = kNegInf;  // -inf encodes rho = 0
  double value() const { return std::exp(log_value); }
};

namespace detail {

// Precomputed per-triangle terms; log rho(gamma) = LSE_T(base_T - p_T * ln gamma).
class LogModular {
 public:
  LogModular(std::span<const double> mags, std::span<const double> exps, std::span<const double> areas,
             NormVariant variant) {
    for (std::size_t t = 0; t < mags.size(); ++t) {
      const double m = std::abs(mags[t]);
      if (m == 0.0 || areas[t] == 0.0) continue;
      double b = std::log(areas[t]) + exps[t] * std::log(m);
      if (variant == NormVariant::Weighted) b -= std::log(exps[t]);
      base_.push_back(b);
      exp_.push_back(exps[t]);
      p_minus_ = std::min(p_minus_, exps[t]);
      p_plus_ = std::max(p_plus_, exps[t]);
    }
    buffer_.resize(base_.size());
  }

  bool empty() const { return base_.empty(); }
  double p_minus() const { return p_minus_; }
  double p_plus() const { return p_plus_; }

  double operator()(double log_gamma) {
    double top = kNegInf;
    for (std::size_t t = 0; t < base_.size(); ++t) {
      buffer_[t] = base_[t] - exp_[t] * log_gamma;
      top = std::max(top, buffer_[t]);
    }
    if (top == kNegInf) return kNegInf;
    for (double& v : buffer_) v = std::exp(v - top);
    return top + std::log(pairwise_sum(buffer_));
  }

 private:
  std::vector<double> base_;
  std::vector<double> exp_;
  std::vector<double> buffer_;
  double p_minus_ = std::numeric_limits<double>::infinity();
  double p_plus_ = 0.0;
};

}  // namespace detail

inline ModularValue modular_of_magnitudes(std::span<const double> mags, std::span<const double> exps,
                                          std::span<const double> areas, double gamma,
                                          NormVariant variant = NormVariant::Weighted) {
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  detail::LogModular lm(mags, exps, areas, variant);
  return {lm.empty() ? kNegInf : lm(std::log(gamma))};
}

/// Luxemburg norm by bisection on ln(gamma). log rho is decreasing in
/// s = ln(gamma) with slope in [-p_plus, -p_minus], which brackets the root
/// between log rho(1)/p_plus and log rho(1)/p_minus.
inline double luxemburg_of_magnitudes(std::span<const double> mags, std::span<const double> exps,
                                      std::span<const double> areas,
                                      NormVariant variant = NormVariant::Weighted) {
  detail::LogModular lm(mags, exps, areas, variant);
  if (lm.empty()) return 0.0;
  const double l0 = lm(0.0);
  if (l0 == 0.0) return 1.0;
  double lo = std::min(l0 / lm.p_plus(), l0 / lm.p_minus());
  double hi = std::max(l0 / lm.p_plus(), l0 / lm.p_minus());
  // Widen by a few ulps so the bracket survives rounding in the LSE.
  const double pad = 1e-12 * (1.0 + std::abs(lo) + std::abs(hi));
  lo -= pad;
  hi += pad;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (lm(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

// Field-level API. Scalar modulars sample u at triangle centroids; gradient
// modulars use the per-triangle |grad u|.

inline ModularValue modular(const ScalarField& u, const ExponentField& p, double gamma,
                            NormVariant variant = NormVariant::Weighted) {
  const auto vals = centroid_values(u.g(), u.values);
  return modular_of_magnitudes(vals, p.samples(), u.g().tri_area(), gamma, variant);
}

inline ModularValue gradient_modular(const ScalarField& u, const ExponentField& p, double gamma,
                                     NormVariant variant = NormVariant::Weighted) {
  const auto mags = gradient_magnitudes(u.g(), u.values);
  return modular_of_magnitudes(mags, p.samples(), u.g().tri_area(), gamma, variant);
}

inline double luxemburg_norm(const ScalarField& u, const ExponentField& p,
                             NormVariant variant = NormVariant::Weighted) {
  const auto vals = centroid_values(u.g(), u.values);
  return luxemburg_of_magnitudes(vals, p.samples(), u.g().tri_area(), variant);
}

inline double gradient_norm(const ScalarField& u, const ExponentField& p,
                            NormVariant variant = NormVariant::Weighted) {
  const auto mags = gradient_magnitudes(u.g(), u.values);
  return luxemburg_of_magnitudes(mags, p.samples(), u.g().tri_area(), variant);
}

/// Bound constant alpha with ||u||_{p(x)} <= alpha ||u||_inf:
/// |Omega|^{1/p+} if |Omega| <= 1, else |Omega|^{1/p-}.
inline double sup_bound_constant(double measure, double p_minus, double p_plus) {
  return measure <= 1.0 ? std::pow(measure, 1.0 / p_plus) : std::pow(measure, 1.0 / p_minus);
}

/// One-sided derivative of the sup norm at u in direction eta:
/// max over the discrete Gamma_u of sgn(u) * eta.
inline double sup_directional_derivative(std::span<const double> u, std::span<const double> eta,
                                         double tie_tol = kDefaultTieTol) {
  const SupNorm s = sup_norm_and_argmax(u, tie_tol);
  if (s.value == 0.0) throw ZeroField();
  double best = -std::numeric_limits<double>::infinity();
  for (int k : s.argmax) best = std::max(best, (u[k] > 0 ? 1.0 : -1.0) * eta[k]);
  return best;
}

inline double sup_directional_derivative(const ScalarField& u, const ScalarField& eta,
                                         double tie_tol = kDefaultTieTol) {
  return sup_directional_derivative(std::span<const double>(u.values), std::span<const double>(eta.values),
                                    tie_tol);
}

}  // namespace vxq
