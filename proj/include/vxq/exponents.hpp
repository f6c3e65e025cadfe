#pragma once

// Exponent maps x -> p(x) sampled on a grid, scaled by an integer factor
// (the l*p(x), j*q(x) families).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vxq/domain_grid.hpp"
#include "vxq/expression.hpp"

namespace vxq {

class ExponentField {
 public:
  ExponentField() = default;

  const ExprPtr& ast() const { return ast_; }
  int scale() const { return scale_; }
  /// scale * p at each triangle centroid.
  const std::vector<double>& samples() const { return samples_; }
  /// scale * grad p at each triangle centroid.
  const std::vector<Vec2>& grad_samples() const { return grad_samples_; }
  double p_minus() const { return p_minus_; }
  double p_plus() const { return p_plus_; }
  /// Sum of area / sample over triangles (for the scaled field).
  double alpha() const { return alpha_; }
  /// Integral of dx / p(x) for the unscaled expression.
  double unscaled_alpha() const { return alpha_ * scale_; }
  /// Finite-difference step used for gradients.
  double fd_step() const { return fd_step_; }

  double value_at(Vec2 at) const { return scale_ * ast_->eval(at); }
  Vec2 gradient_at(Vec2 at) const {
    const double s = fd_step_;
    return {scale_ * (ast_->eval(at.x + s, at.y) - ast_->eval(at.x - s, at.y)) / (2 * s),
            scale_ * (ast_->eval(at.x, at.y + s) - ast_->eval(at.x, at.y - s)) / (2 * s)};
  }
  /// grad ln p; independent of the integer scale.
  Vec2 log_gradient_at(Vec2 at) const {
    const double v = value_at(at);
    const Vec2 g = gradient_at(at);
    return {g.x / v, g.y / v};
  }

  /// Same expression with a different scale; samples scale exactly.
  ExponentField rescaled(int new_scale) const;

  friend ExponentField sample_exponent(ExprPtr ast, const TriGrid& grid, int scale);

 private:
  ExprPtr ast_;
  int scale_ = 1;
  std::vector<double> base_;  // unscaled centroid values
  std::vector<double> samples_;
  std::vector<Vec2> grad_samples_;
  double p_minus_ = 0.0;
  double p_plus_ = 0.0;
  double alpha_ = 0.0;
  double fd_step_ = 1e-6;
};

/// Samples scale * ast at every centroid. Throws NonAdmissibleExponent when a
/// sample is non-finite or the minimum is not above 1.
inline ExponentField sample_exponent(ExprPtr ast, const TriGrid& grid, int scale) {
  if (scale < 1) throw InvalidArgument("exponent scale must be >= 1");
  ExponentField f;
  f.ast_ = std::move(ast);
  f.scale_ = scale;
  f.fd_step_ = 1e-6 * grid.diameter();
  const auto& cen = grid.tri_centroid();
  f.base_.resize(cen.size());
  f.samples_.resize(cen.size());
  f.grad_samples_.resize(cen.size());
  f.p_minus_ = std::numeric_limits<double>::infinity();
  f.p_plus_ = -std::numeric_limits<double>::infinity();
  std::vector<double> inv(cen.size());
  for (std::size_t t = 0; t < cen.size(); ++t) {
    const double base = f.ast_->eval(cen[t]);
    if (!std::isfinite(base))
      throw NonAdmissibleExponent("exponent is not finite at (" + std::to_string(cen[t].x) + ", " +
                                  std::to_string(cen[t].y) + ")");
    const double v = scale * base;
    f.base_[t] = base;
    f.samples_[t] = v;
    f.grad_samples_[t] = f.gradient_at(cen[t]);
    f.p_minus_ = std::min(f.p_minus_, v);
    f.p_plus_ = std::max(f.p_plus_, v);
    inv[t] = grid.tri_area()[t] / v;
  }
  if (!(f.p_minus_ > 1.0))
    throw NonAdmissibleExponent("exponent minimum " + std::to_string(f.p_minus_) + " is not above 1");
  f.alpha_ = pairwise_sum(inv);
  return f;
}

inline ExponentField sample_exponent(const std::string& text, const TriGrid& grid, int scale = 1) {
  return sample_exponent(parse_expression(text), grid, scale);
}

inline ExponentField ExponentField::rescaled(int new_scale) const {
  if (new_scale < 1) throw InvalidArgument("exponent scale must be >= 1");
  ExponentField f = *this;
  f.scale_ = new_scale;
  f.p_minus_ = std::numeric_limits<double>::infinity();
  f.p_plus_ = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < base_.size(); ++t) {
    f.samples_[t] = new_scale * base_[t];
    f.grad_samples_[t] = (static_cast<double>(new_scale) / scale_) * grad_samples_[t];
    f.p_minus_ = std::min(f.p_minus_, f.samples_[t]);
    f.p_plus_ = std::max(f.p_plus_, f.samples_[t]);
  }
  f.alpha_ = alpha_ * scale_ / new_scale;
  return f;
}

/// Subcritical check q << p* for N = 2: p*(x) = 2p/(2-p) when p < 2, else
/// infinite. Returns the centroids that violate it (empty when fine).
inline std::vector<std::size_t> subcritical_violations(const ExponentField& p, const ExponentField& q) {
  std::vector<std::size_t> bad;
  for (std::size_t t = 0; t < p.samples().size(); ++t) {
    const double pv = p.samples()[t];
    if (pv >= 2.0) continue;
    const double pstar = 2.0 * pv / (2.0 - pv);
    if (!(q.samples()[t] < pstar)) bad.push_back(t);
  }
  return bad;
}

}  // namespace vxq
