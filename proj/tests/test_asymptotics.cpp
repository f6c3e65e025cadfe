#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"
#include "vxq/asymptotics.hpp"

using namespace vxq;
using namespace vxq::testing;

TEST(SweepJ, BoundsHoldPerRow) {
  const auto g = unit_square(24);
  const auto p = sample_exponent("2", *g);
  const auto rep = sweep_j(g, 4, p, p, {1, 2, 4, 8});
  ASSERT_EQ(rep.rows.size(), 4u);
  ASSERT_TRUE(rep.mu);
  EXPECT_EQ(rep.limit_kind, LimitKind::MuL);
  EXPECT_EQ(rep.limit_value, rep.mu->mu);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.lower_bound, r.eigenvalue * (1 + 1e-9)) << r.index;
    EXPECT_LE(r.eigenvalue, r.upper_bound * (1 + 1e-9)) << r.index;
    EXPECT_EQ(r.gap, std::abs(r.eigenvalue - rep.limit_value));
    if (i > 0) {
      EXPECT_GT(r.index, rep.rows[i - 1].index);
      EXPECT_LT(r.gap, rep.rows[i - 1].gap);
    }
  }
}

TEST(SweepJ, SingleRow) {
  const auto g = unit_square(16);
  const auto p = sample_exponent("2", *g);
  const auto rep = sweep_j(g, 4, p, p, {1});
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_TRUE(std::isfinite(rep.rows[0].gap));
  ASSERT_TRUE(rep.extremal);
}

TEST(SweepJ, RejectsBadInput) {
  const auto g = unit_square(16);
  const auto p = sample_exponent("2", *g);
  EXPECT_THROW(sweep_j(g, 1, p, p, {1}), InvalidArgument);
  EXPECT_THROW(sweep_j(g, 4, p, p, {}), InvalidArgument);
  EXPECT_THROW(sweep_j(g, 4, p, p, {2, 1}), InvalidArgument);
  EXPECT_THROW(sweep_j(g, 4, p, p, {0}), InvalidArgument);
  EXPECT_THROW(sweep_j(g, 200, p, p, {1}), InvalidArgument);  // l p+ above the cap
}

TEST(AlphaJ, CaseSplit) {
  const auto g = unit_square(16);
  const auto q = sample_exponent("2 + x", *g, 3);
  EXPECT_EQ(alpha_j(1.0, q), 1.0 / q.p_plus());
  EXPECT_EQ(alpha_j(0.5, q), 1.0 / q.p_plus());
  EXPECT_EQ(alpha_j(std::numbers::pi, q), 1.0 / q.p_minus());
}

TEST(DirectMu, DiskNearLimit) {
  const auto g = unit_disk(32);
  const auto p = sample_exponent("2", *g, 16);
  const auto m = direct_mu(g, p);
  EXPECT_TRUE(m.converged);
  EXPECT_LT(std::abs(m.mu - 1.0), 0.10);
  EXPECT_LE(norm(m.x0_point), 2 * g->spacing());
  EXPECT_TRUE(m.singleton);
  EXPECT_GE(m.min_interior, -1e-8);
  EXPECT_NEAR(sup_norm_and_argmax(m.w).value, 1.0, 1e-15);
  EXPECT_LT(m.dirac_residual, 1e-2);
  EXPECT_LT(rel(m.identity_mu, m.mu), 1e-6);
  // mu = K / ||w||_inf with ||w||_inf = 1
  EXPECT_LT(rel(m.K, m.mu), 1e-9);
}

TEST(DirectMu, BelowDistanceQuotient) {
  const auto g = unit_disk(24);
  const auto p = sample_exponent("2 + (x^2 + y^2)/2", *g);
  const auto d = distance_field(g);
  for (int l : {2, 4, 8}) {
    const auto lp = p.rescaled(l);
    const auto m = direct_mu(g, lp);
    EXPECT_LE(m.mu, gradient_norm(d.d, lp) / d.d_max * (1 + 1e-9)) << l;
    // any trial field bounds mu from above
    const auto trial = sample_field(g, [](Vec2 x) { return 1 - x.x * x.x - x.y * x.y; }, true);
    EXPECT_LE(m.mu, gradient_norm(trial, lp) / sup_norm_and_argmax(trial).value) << l;
  }
}

TEST(DirectMu, AgreesWithHighJ) {
  const auto g = unit_square(16);
  const auto p = sample_exponent("2", *g);
  const auto rep = sweep_j(g, 4, p, p, {1, 4, 16, 64});
  // the gap closes, but the weighted norm keeps Lambda_{l,j} / mu_l above
  // (jq+)^{1/(jq+)}
  const double P = 128.0;
  EXPECT_GE(rep.rows.back().eigenvalue, rep.limit_value * std::pow(P, 1.0 / P) * (1 - 1e-6));
  EXPECT_LT(rep.rows.back().gap / rep.limit_value, 0.2);
}

TEST(SweepL, DiskTowardsDistance) {
  const auto g = unit_disk(24);
  const auto p = sample_exponent("2 + (x^2 + y^2)/2", *g);
  const auto s = sweep_l(g, p, {4, 8, 16});
  ASSERT_EQ(s.report.rows.size(), 3u);
  ASSERT_EQ(s.results.size(), 3u);
  EXPECT_EQ(s.report.limit_kind, LimitKind::LambdaInfinity);
  EXPECT_EQ(s.report.limit_value, 1.0);
  for (std::size_t i = 0; i < s.report.rows.size(); ++i) {
    const auto& r = s.report.rows[i];
    EXPECT_TRUE(r.converged);
    EXPECT_TRUE(r.singleton);
    EXPECT_GE(r.min_value, -1e-8);
    EXPECT_LE(r.eigenvalue, r.d_bound * (1 + 1e-9));
    if (i > 0) {
      EXPECT_LT(r.gap, s.report.rows[i - 1].gap);
      EXPECT_LT(r.dist_to_d, s.report.rows[i - 1].dist_to_d);
    }
  }
}

TEST(SweepL, GradientNormMonotoneInL) {
  std::mt19937_64 rng(31);
  const auto g = unit_disk(24);
  const auto p = sample_exponent("2 + (x^2 + y^2)/2", *g);
  const int first = static_cast<int>(std::ceil(p.unscaled_alpha() * std::numbers::e)) + 1;
  const auto w = random_smooth(g, rng);
  double prev = 0.0;
  for (int l = first; l <= first + 20; l += 5) {
    const double n = gradient_norm(w, p.rescaled(l));
    EXPECT_GE(n * (1 + 1e-12), prev);
    prev = n;
  }
}

TEST(SweepL, RejectsBadLists) {
  const auto g = unit_disk(16);
  const auto p = sample_exponent("2", *g);
  EXPECT_THROW(sweep_l(g, p, {}), InvalidArgument);
  EXPECT_THROW(sweep_l(g, p, {1, 4}), InvalidArgument);
  EXPECT_THROW(sweep_l(g, p, {8, 4}), InvalidArgument);
  EXPECT_THROW(sweep_l(g, p, {4, 200}), InvalidArgument);
}
