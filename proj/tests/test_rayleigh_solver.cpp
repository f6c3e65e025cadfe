#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"
#include "vxq/distance_ridge.hpp"
#include "vxq/rayleigh_solver.hpp"

using namespace vxq;
using namespace vxq::testing;

namespace {

const double kPiSqrt2 = std::numbers::pi * std::numbers::sqrt2;

ScalarField sinsin(const GridPtr& g) {
  return sample_field(
      g, [](Vec2 p) { return std::sin(std::numbers::pi * p.x) * std::sin(std::numbers::pi * p.y); }, true);
}

ScalarField axpy(const ScalarField& u, double a, const ScalarField& eta) {
  ScalarField out = u;
  for (std::size_t k = 0; k < out.size(); ++k) out.values[k] += a * eta.values[k];
  return out;
}

double K_of(const ScalarField& u, const ExponentField& p) { return evaluate_quotient(u, p, p).K; }
double k_of(const ScalarField& u, const ExponentField& q) { return luxemburg_norm(u, q); }

}  // namespace

TEST(Quotient, LaplaceEigenfunction) {
  const auto g = unit_square(64);
  const auto p = sample_exponent("2", *g);
  const auto ev = evaluate_quotient(sinsin(g), p, p);
  EXPECT_LT(rel(ev.quotient, kPiSqrt2), 0.02);
  // the 2^{-1/2} weights cancel: same as the plain L2 quotient
  double num = 0.0, den = 0.0;
  const auto u = sinsin(g);
  const auto gr = gradient(u);
  const auto c = centroid_values(*g, u.values);
  for (std::size_t t = 0; t < gr.size(); ++t) {
    num += g->tri_area()[t] * dot(gr[t], gr[t]);
    den += g->tri_area()[t] * c[t] * c[t];
  }
  EXPECT_LT(rel(ev.quotient, std::sqrt(num / den)), 1e-10);
  EXPECT_GT(ev.S, 0.0);
  EXPECT_TRUE(std::isfinite(ev.S));
}

TEST(Quotient, Homogeneity) {
  std::mt19937_64 rng(1);
  const auto g = unit_square(24);
  const auto p = sample_exponent("3 + x", *g);
  const auto q = sample_exponent("1.5 + 0.5*sin(3*x)*cos(2*y)", *g);
  for (int i = 0; i < 5; ++i) {
    const auto u = random_smooth(g, rng);
    auto u3 = u;
    for (double& x : u3.values) x *= 3.0;
    const auto a = evaluate_quotient(u, p, q);
    const auto b = evaluate_quotient(u3, p, q);
    EXPECT_LT(rel(b.quotient, a.quotient), 1e-12);
    EXPECT_LT(rel(b.S, a.S), 1e-10);
    // d(K/k) is homogeneous of degree -1
    for (std::size_t d = 0; d < a.grad_dual.size(); d += 17)
      EXPECT_NEAR(3.0 * b.grad_dual[d], a.grad_dual[d], 1e-10 * (1 + std::abs(a.grad_dual[d])));
  }
}

TEST(Quotient, GradDualMatchesDifferences) {
  std::mt19937_64 rng(8);
  const auto g = unit_square(16);
  const auto p = sample_exponent("2 + 0.5*x", *g);
  const auto q = sample_exponent("3 - y", *g);
  const auto u = random_smooth(g, rng);
  const auto ev = evaluate_quotient(u, p, q);
  const double eps = 1e-6;
  for (std::size_t d = 0; d < g->interior_count(); d += 11) {
    std::vector<double> e(g->node_count(), 0.0);
    e[g->node_of_dof(d)] = 1.0;
    const ScalarField phi{g, e, true};
    const double fd = (evaluate_quotient(axpy(u, eps, phi), p, q).quotient -
                       evaluate_quotient(axpy(u, -eps, phi), p, q).quotient) / (2 * eps);
    EXPECT_NEAR(ev.grad_dual[d], fd, 1e-5 * (1 + std::abs(fd)));
  }
}

TEST(Quotient, ZeroFieldThrows) {
  const auto g = unit_square(16);
  const auto p = sample_exponent("2", *g);
  const ScalarField z{g, std::vector<double>(g->node_count(), 0.0), true};
  EXPECT_THROW(evaluate_quotient(z, p, p), ZeroField);
  EXPECT_THROW(gateaux_dK(z, sinsin(g), p), ZeroField);
  EXPECT_THROW(gateaux_dk(z, sinsin(g), p), ZeroField);
}

TEST(Gateaux, EtaEqualsU) {
  std::mt19937_64 rng(4);
  const auto g = unit_square(24);
  for (const auto& fam : exponent_families()) {
    const auto p = sample_exponent(fam, *g);
    const auto u = random_smooth(g, rng);
    EXPECT_LT(rel(gateaux_dK(u, u, p), K_of(u, p)), 1e-10) << fam;
    EXPECT_LT(rel(gateaux_dk(u, u, p), k_of(u, p)), 1e-10) << fam;
  }
}

TEST(Gateaux, CentralDifferences) {
  std::mt19937_64 rng(12);
  const auto g = unit_square(24);
  const double eps = 1e-6;
  for (int i = 0; i < 50; ++i) {
    const auto& fam = exponent_families()[i % exponent_families().size()];
    const auto p = sample_exponent(fam, *g, 1 + i % 3);
    const auto u = random_smooth(g, rng);
    const auto eta = random_smooth(g, rng);
    const double dK = gateaux_dK(u, eta, p);
    const double fK = (K_of(axpy(u, eps, eta), p) - K_of(axpy(u, -eps, eta), p)) / (2 * eps);
    EXPECT_LT(std::abs(dK - fK), 1e-5 * (1 + std::abs(dK))) << fam;
    const double dk = gateaux_dk(u, eta, p);
    const double fk = (k_of(axpy(u, eps, eta), p) - k_of(axpy(u, -eps, eta), p)) / (2 * eps);
    EXPECT_LT(std::abs(dk - fk), 1e-5 * (1 + std::abs(dk))) << fam;
  }
}

TEST(Gateaux, DualBound) {
  std::mt19937_64 rng(21);
  const auto g = unit_square(24);
  for (int i = 0; i < 100; ++i) {
    const auto& fam = exponent_families()[i % exponent_families().size()];
    const auto p = sample_exponent(fam, *g);
    const auto u = random_smooth(g, rng);
    const auto v = i % 2 ? random_smooth(g, rng) : random_noise(g, rng, -1.0, 1.0);
    EXPECT_LE(std::abs(gateaux_dK(u, v, p)), K_of(v, p) * (1 + 1e-12)) << fam;
    EXPECT_LE(std::abs(gateaux_dk(u, v, p)), k_of(v, p) * (1 + 1e-12)) << fam;
  }
}

TEST(Minimize, LaplaceEigenvalue) {
  const auto g = unit_square(32);
  const auto p = sample_exponent("2", *g);
  const auto r = minimize_quotient(g, p, p);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(rel(r.lambda, kPiSqrt2), 0.02);
  EXPECT_LT(r.el_residual, 1e-3);
  EXPECT_NEAR(luxemburg_norm(r.minimizer, p), 1.0, 1e-10);
  EXPECT_NEAR(r.argmax_point.x, 0.5, 1.5 * g->spacing());
  EXPECT_NEAR(r.argmax_point.y, 0.5, 1.5 * g->spacing());
}

TEST(Minimize, ConstantExponentsUnweightedCrossCheck) {
  const auto g = unit_square(32);
  const auto p = sample_exponent("3", *g);
  const auto q = sample_exponent("2", *g);
  const auto r = minimize_quotient(g, p, q);
  EXPECT_TRUE(r.converged);
  // unweighted Lp norms of the returned minimizer, by direct quadrature
  const auto gr = gradient(r.minimizer);
  const auto c = centroid_values(*g, r.minimizer.values);
  double a = 0.0, b = 0.0;
  for (std::size_t t = 0; t < gr.size(); ++t) {
    a += g->tri_area()[t] * std::pow(norm(gr[t]), 3.0);
    b += g->tri_area()[t] * c[t] * c[t];
  }
  const double plain = std::cbrt(a) / std::sqrt(b);
  EXPECT_LT(rel(r.lambda, std::sqrt(2.0) / std::cbrt(3.0) * plain), 1e-6);
}

TEST(Minimize, VariableExponentProperties) {
  const auto g = unit_square(24);
  const auto p = sample_exponent("2 + 0.5*x", *g);
  const auto q = sample_exponent("3 - y", *g);
  MinimizeOptions o;
  o.restarts = 3;
  o.seed = 17;
  const auto r = minimize_quotient(g, p, q, o);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.el_residual, 1e-3);
  ASSERT_EQ(r.restart_lambdas.size(), 3u);
  for (double l : r.restart_lambdas) EXPECT_LT(rel(l, r.lambda), 1e-4);
  EXPECT_EQ(r.lambda, *std::min_element(r.restart_lambdas.begin(), r.restart_lambdas.end()));

  // sign and normalization
  const double sup = sup_norm_and_argmax(r.minimizer).value;
  for (std::size_t k = 0; k < g->node_count(); ++k) {
    EXPECT_GE(r.minimizer[k], -1e-8 * sup);
    if (!g->is_interior(k)) {
      EXPECT_EQ(r.minimizer[k], 0.0);
    }
  }
  EXPECT_NEAR(luxemburg_norm(r.minimizer, q), 1.0, 1e-10);

  // monotone trace
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1] * (1 + 1e-12));

  // eta = u recovers Lambda = K / k
  const auto ev = evaluate_quotient(r.minimizer, p, q);
  EXPECT_LT(rel(gateaux_dK(r.minimizer, r.minimizer, p) / gateaux_dk(r.minimizer, r.minimizer, q), ev.quotient), 1e-9);
  EXPECT_LT(rel(ev.quotient, r.lambda), 1e-9);

  // classical-norm quotient brackets lambda
  const double Kc = gradient_norm(r.minimizer, p, NormVariant::Classical);
  const double kc = luxemburg_norm(r.minimizer, q, NormVariant::Classical);
  const double alt = Kc / kc;
  EXPECT_LE(alt / p.p_plus(), r.lambda);
  EXPECT_LE(r.lambda, q.p_plus() * alt);
}

TEST(Minimize, QuotientBelowTrialFields) {
  std::mt19937_64 rng(6);
  const auto g = unit_square(24);
  const auto p = sample_exponent("4 - x*y", *g);
  const auto q = sample_exponent("2 + (x^2 + y^2)/2", *g);
  const auto r = minimize_quotient(g, p, q);
  EXPECT_LE(r.lambda, evaluate_quotient(distance_values(g), p, q).quotient);
  for (int i = 0; i < 10; ++i) EXPECT_LE(r.lambda, evaluate_quotient(random_smooth(g, rng), p, q).quotient);
}

TEST(Minimize, SeedReproducible) {
  const auto g = unit_square(16);
  const auto p = sample_exponent("3 + x", *g);
  MinimizeOptions o;
  o.init = InitKind::Random;
  o.seed = 42;
  o.restarts = 2;
  const auto a = minimize_quotient(g, p, p, o);
  const auto b = minimize_quotient(g, p, p, o);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.minimizer.values, b.minimizer.values);
}

TEST(Minimize, RejectsBadOptions) {
  const auto g = unit_square(16);
  const auto p = sample_exponent("2", *g);
  MinimizeOptions o;
  o.max_iter = 0;
  EXPECT_THROW(minimize_quotient(g, p, p, o), InvalidArgument);
  o = {};
  o.restarts = 0;
  EXPECT_THROW(minimize_quotient(g, p, p, o), InvalidArgument);
  const auto other = unit_square(8);
  EXPECT_THROW(minimize_quotient(g, sample_exponent("2", *other), p), InvalidArgument);
}
