#pragma once

// shared fixtures for the unit suites and the acceptance binary

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "vxq/domain_grid.hpp"
#include "vxq/exponents.hpp"

namespace vxq::testing {

inline GridPtr unit_square(int n) { return build_grid({Rectangle{1.0, 1.0}, n}); }
inline GridPtr unit_disk(int n) { return build_grid({Disk{1.0}, n}); }

// bounded, p- > 1 on [0,1]^2 and on the unit disk
inline const std::vector<std::string>& exponent_families() {
  static const std::vector<std::string> f{
      "2",
      "3 + x",
      "1.5 + 0.5*sin(3*x)*cos(2*y)",
      "4 - x*y",
      "2 + (x^2 + y^2)/2",
  };
  return f;
}

/// Random smooth field: a few low sine modes with random phases and
/// amplitudes, times a bubble so it vanishes on the boundary of the box
/// around the grid.
inline ScalarField random_smooth(const GridPtr& g, std::mt19937_64& rng, bool zero_trace = true) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int modes = 4;
  std::vector<double> a(modes), kx(modes), ky(modes), ph(modes);
  for (int m = 0; m < modes; ++m) {
    a[m] = U(rng);
    kx[m] = 1 + static_cast<int>(3 * (U(rng) + 1) / 2);
    ky[m] = 1 + static_cast<int>(3 * (U(rng) + 1) / 2);
    ph[m] = std::numbers::pi * U(rng);
  }
  const double c = 1.5 * U(rng);
  return sample_field(
      g,
      [&](Vec2 p) {
        double s = c;
        for (int m = 0; m < modes; ++m) s += a[m] * std::sin(kx[m] * p.x + ph[m]) * std::cos(ky[m] * p.y - ph[m]);
        return s;
      },
      zero_trace);
}

/// Random nodal noise, uniform in [lo, hi].
inline ScalarField random_noise(const GridPtr& g, std::mt19937_64& rng, double lo, double hi, bool zero_trace = true) {
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<double> v(g->node_count());
  for (double& x : v) x = U(rng);
  return make_field(g, std::move(v), zero_trace);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace vxq::testing
