#include <cmath>
#include <vector>

#include "doctest.h"
#include "expjump/distributions.hpp"
#include "expjump/errors.hpp"
#include "expjump/numerics.hpp"
#include "oracles.hpp"

using namespace expjump;
using namespace expjump::dist;

TEST_CASE("Laguerre-type quadrature on a half line") {
  const auto k = KernelQuadrature::make(-1.0, 40);
  double s0 = 0.0, s1 = 0.0;
  for (int i = 0; i < k.node_count; ++i) {
    CHECK(k.nodes[i] > -1.0);
    s0 += k.weights[i] * std::exp(-(k.nodes[i] + 1.0));
    s1 += k.weights[i] * (k.nodes[i] + 1.0) * std::exp(-(k.nodes[i] + 1.0));
  }
  // The map leaves a (1 - s)^{3/2} endpoint factor, which limits the rule to about 1e-7.
  CHECK(s0 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s1 == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("F2 values and node-doubling consistency") {
  CHECK(F2(-2.0) == doctest::Approx(oracle::kF2MinusTwo).epsilon(1e-12));
  for (double r : {-6.0, -4.0, -2.0, 0.0, 2.0, 4.0}) {
    CAPTURE(r);
    CHECK(std::abs(F2_airy(r, 40) - F2_airy(r, 80)) < 1e-8);
  }
  CHECK(F2(-12.0) < 1e-20);
  CHECK(F2(8.0) > 1.0 - 1e-12);

  double prev = 0.0;
  for (double r = -8.0; r <= 5.0; r += 0.25) {
    const double v = F2(r);
    CHECK(v >= prev - 1e-14);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("F2 mean by quadrature of the tails") {
  // E X = int_0^inf (1 - F2) - int_-inf^0 F2, Gauss-Legendre panels of width 0.5.
  double mean = 0.0;
  for (double a = -10.0; a < 0.0; a += 0.5) {
    const auto g = numerics::gauss_legendre(12, a, a + 0.5);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) mean -= g.weights[i] * F2(g.nodes[i]);
  }
  for (double a = 0.0; a < 8.0; a += 0.5) {
    const auto g = numerics::gauss_legendre(12, a, a + 0.5);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) mean += g.weights[i] * (1.0 - F2(g.nodes[i]));
  }
  CHECK(mean == doctest::Approx(oracle::kF2Mean).epsilon(1e-8));
  CHECK(std::abs(mean + 1.771) <= 0.005);
}

TEST_CASE("contour form of F2 and the BBP family") {
  for (double r : {-4.0, -2.0, 0.0, 1.5}) {
    CAPTURE(r);
    CHECK(std::abs(F2_contour(r) - F2(r)) < 1e-6);
    CHECK(std::abs(BBP(r, 0, {}) - F2(r)) < 1e-6);
  }
  // Adding a parameter at 0 shifts mass to the right: BBP(1) <= F2.
  double prev = 0.0;
  for (double r = -5.0; r <= 4.0; r += 0.5) {
    const double v = BBP(r, 1, {0.0});
    CAPTURE(r);
    CHECK(v >= prev - 1e-10);
    CHECK(v <= F2(r) + 1e-10);
    prev = v;
  }
  // Parameters far to the left recover F2 at rate 1/|b|.
  const double d32 = BBP(-1.0, 1, {-32.0}) - F2(-1.0), d128 = BBP(-1.0, 1, {-128.0}) - F2(-1.0);
  CHECK(std::abs(d128) < 3e-3);
  CHECK(d32 / d128 == doctest::Approx(4.0).epsilon(0.1));
  // Positive parameters, within the resolvable range, move mass further right.
  CHECK(BBP(2.0, 1, {1.0}) < BBP(2.0, 1, {0.0}));
  CHECK_THROWS_AS(BBP(-2.0, 1, {4.0}), ConvergenceError);
  // The contour separation is immaterial.
  ContourKernelOptions wide;
  wide.separation = 1.0;
  CHECK(std::abs(BBP(0.0, 1, {0.0}, wide) - BBP(0.0, 1, {0.0})) < 1e-8);
  CHECK_THROWS_AS(BBP(0.0, 2, {0.0}), DomainError);
}

TEST_CASE("largest GUE eigenvalue laws") {
  for (double r : {-3.0, -1.0, 0.0, 0.7, 2.5}) {
    CHECK(gue_largest_cdf_exact(r, 1) == doctest::Approx(normal_cdf(r)).epsilon(1e-14));
    CHECK(G_m(r, 1).value == normal_cdf(r));
    CHECK(G_m(r, 1).se == 0.0);
  }
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(G_m(-40.0, 2).value < 1e-12);
  CHECK(G_m(40.0, 3).value > 1.0 - 1e-12);
  CHECK_THROWS_AS(gue_largest_cdf_exact(0.0, 4), DomainError);

  // Brute-force sampling against the exact Hankel form.
  for (int m : {2, 3}) {
    const auto mc = gue_largest_cdf_mc(0.0, m, 1000000, 5);
    CAPTURE(m);
    CHECK(std::abs(mc.value - gue_largest_cdf_exact(0.0, m)) < 3.0 * mc.se);
  }
  const auto g4 = G_m(1.0, 4, 20000, 3);
  CHECK(g4.se > 0.0);
  CHECK(g4.value > 0.0);
  CHECK(g4.value < 1.0);
  CHECK(G_m(1.0, 4, 20000, 3).value == g4.value);
}
