#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace mt = meshgen::testing;
using namespace meshgen;

TEST(LagrangeWeights, HandValues) {
  const std::vector<double> k{0, 0.5, 1};
  const auto mid = lagrange_weights(k, 0.5);
  EXPECT_EQ(mid, (std::vector<double>{0, 1, 0}));
  const auto q = lagrange_weights(k, 0.25);
  EXPECT_NEAR(q[0], 0.375, 1e-15);
  EXPECT_NEAR(q[1], 0.75, 1e-15);
  EXPECT_NEAR(q[2], -0.125, 1e-15);
  for (int i = 0; i < 20; ++i) {
    const double t = mt::uniform();
    const auto lin = lagrange_weights(std::vector<double>{0, 1}, t);
    EXPECT_NEAR(lin[0], 1 - t, 1e-15);
    EXPECT_NEAR(lin[1], t, 1e-15);
  }
}

TEST(LagrangeWeights, CardinalityAndPartitionOfUnity) {
  for (std::size_t n = 2; n <= kMaxLagrangeOrder + 1; ++n) {
    const auto k = mt::random_knots(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto b = lagrange_weights(k, k[i]);
      for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(b[j], i == j ? 1.0 : 0.0);
    }
  }
  double worst = 0;
  for (int s = 0; s < 1000; ++s) {
    const auto k = mt::random_knots(2 + s % 8);
    const auto p = mt::random_lagrangian(k);
    const double t = mt::uniform();
    std::vector<double> shipped(k.size());
    p.basis(t, 0, shipped);
    const auto classic = lagrange_weights(k, t);
    double a = 0, b = 0;
    for (std::size_t j = 0; j < k.size(); ++j) {
      a += shipped[j];
      b += classic[j];
    }
    worst = std::max({worst, std::abs(a - 1), std::abs(b - 1)});
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(BarycentricWeights, ThreeKnotClosedForms) {
  for (int i = 0; i < 50; ++i) {
    const double e = mt::uniform(0.05, 0.95);
    const auto w = barycentric_weights(std::vector<double>{0, e, 1});
    EXPECT_NEAR(w[0], 1 / e, 1e-12 * std::abs(w[0]));
    EXPECT_NEAR(w[1], 1 / ((-e) * (1 - e)), 1e-12 * std::abs(w[1]));
    EXPECT_NEAR(w[2], 1 / ((-1) * (e - 1)), 1e-12 * std::abs(w[2]));
  }
}

TEST(BarycentricWeights, HandValues) {
  const auto w3 = barycentric_weights(std::vector<double>{0, 0.5, 1});
  EXPECT_NEAR(w3[0], 2, 1e-14);
  EXPECT_NEAR(w3[1], -4, 1e-14);
  EXPECT_NEAR(w3[2], 2, 1e-14);
  EXPECT_EQ(barycentric_weights(std::vector<double>{0, 1}), (std::vector<double>{-1, 1}));
  const auto w4 = barycentric_weights(std::vector<double>{0, 1.0 / 3, 2.0 / 3, 1});
  const std::vector<double> expected{-4.5, 13.5, -13.5, 4.5};
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(w4[j], expected[j], 1e-12);
}

TEST(BarycentricWeights, AnnihilateLowDegreeMonomials) {
  // sum_j w_j x_j^m = 0 for m < n: the leading divided difference of a low-degree polynomial.
  for (std::size_t n = 3; n <= 7; ++n) {
    const auto k = mt::random_knots(n);
    const auto w = barycentric_weights(k);
    double scale = 0;
    for (double v : w) scale = std::max(scale, std::abs(v));
    for (std::size_t m = 0; m + 1 < n; ++m) {
      double s = 0;
      for (std::size_t j = 0; j < n; ++j) s += w[j] * std::pow(k[j], static_cast<double>(m));
      EXPECT_NEAR(s / scale, 0.0, 1e-11) << "n=" << n << " m=" << m;
    }
  }
}

TEST(Projector, LinearBlend) {
  const auto p = ProjectorSpec::linear(Axis::xi, ParametricSurface::plane({0, 0, 0}, {1, 0, 0}, {0, 1, 0}),
                                       ParametricSurface::plane({0, 0, 1}, {1, 0, 0}, {0, 1, 0}));
  EXPECT_DOUBLE_EQ(eval_projector(p, {0.25, 0.4, 0.6}).z, 0.25);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(eval_projector_axis_derivative(p, mt::random_point()).z, 1.0);
}

TEST(Projector, LagrangianReproducesInternalSurface) {
  const auto p = mt::random_lagrangian({0, 0.5, 1});
  const auto& mid = std::get<LagrangianFamily>(p.family()).surfaces[1];
  for (int i = 0; i < 100; ++i) {
    const double xi = mt::uniform(), ka = mt::uniform();
    EXPECT_EQ(eval_projector(p, {xi, 0.5, ka}), mid.eval(xi, ka));
    EXPECT_EQ(eval_projector(p, {xi, 0.5 + 5e-15, ka}), mid.eval(xi, ka));
  }
}

TEST(Projector, IdempotentOnDefiningSurfaces) {
  const auto knots = mt::random_knots(6);
  const auto p = mt::random_lagrangian(knots);
  const auto& f = std::get<LagrangianFamily>(p.family());
  for (std::size_t j = 0; j < knots.size(); ++j) {
    const double xi = mt::uniform(), ka = mt::uniform();
    EXPECT_EQ(eval_projector(p, {xi, knots[j], ka}), f.surfaces[j].eval(xi, ka));
  }
}

TEST(Projector, TwoKnotLagrangianEqualsLinear) {
  const auto a = mt::random_bilinear(0), b = mt::random_bilinear(1);
  const auto lag = ProjectorSpec::lagrangian(Axis::eta, {0, 1}, {a, b});
  const auto lin = ProjectorSpec::linear(Axis::eta, a, b);
  for (int i = 0; i < 200; ++i) {
    const auto pt = mt::random_point();
    EXPECT_LE(distance(eval_projector(lag, pt), eval_projector(lin, pt)), 1e-12);
  }
}

TEST(Projector, ClassicalAndBarycentricAgree) {
  for (int s = 0; s < 1000; ++s) {
    const auto p = mt::random_lagrangian(mt::random_knots(2 + s % 8));
    const auto pt = mt::random_point();
    const Vec3 a = eval_projector(p, pt);
    const Vec3 b = mt::classical_lagrange(p, pt);
    EXPECT_LE(distance(a, b), 1e-10 * std::max(1.0, norm(b)));
  }
}

TEST(Projector, LagrangianDerivativeMatchesDifferences) {
  // Three knots: quadratic in eta, so central differences are exact up to rounding.
  const auto p3 = mt::random_lagrangian({0, 0.5, 1});
  const double h = 1e-4;
  for (int i = 0; i < 50; ++i) {
    RefPoint at{mt::uniform(), mt::uniform(0.1, 0.9), mt::uniform()};
    RefPoint lo = at, hi = at;
    lo[Axis::eta] -= h;
    hi[Axis::eta] += h;
    const Vec3 fd = (eval_projector(p3, hi) - eval_projector(p3, lo)) / (2 * h);
    EXPECT_LE(distance(fd, eval_projector_axis_derivative(p3, at)), 1e-9);
  }
  // Uneven higher-order knots: the central-difference error falls 4x per halving.
  const auto p = mt::random_lagrangian({0, 0.3, 0.45, 0.8, 1});
  for (int i = 0; i < 30; ++i) {
    RefPoint at{mt::uniform(), mt::uniform(0.1, 0.9), mt::uniform()};
    const Vec3 exact = eval_projector_axis_derivative(p, at);
    const auto err = [&](double step) {
      RefPoint lo = at, hi = at;
      lo[Axis::eta] -= step;
      hi[Axis::eta] += step;
      return distance((eval_projector(p, hi) - eval_projector(p, lo)) / (2 * step), exact);
    };
    const double e1 = err(2e-2), e2 = err(1e-2);
    if (e1 < 1e-10) continue;
    EXPECT_GE(e1 / e2, 3.0);
    EXPECT_LE(e1 / e2, 5.0);
  }
}

TEST(Projector, HermiteBasisReproducesCubics) {
  const auto p = mt::curved_hermite();
  for (int i = 0; i < 50; ++i) {
    const double a = mt::uniform(-2, 2), b = mt::uniform(-2, 2), c = mt::uniform(-2, 2), d = mt::uniform(-2, 2);
    const auto f = [&](double t) { return ((a * t + b) * t + c) * t + d; };
    const auto df = [&](double t) { return (3 * a * t + 2 * b) * t + c; };
    const double t = mt::uniform();
    std::array<double, 4> h{}, dh{};
    p.basis(t, 0, h);
    p.basis(t, 1, dh);
    EXPECT_NEAR(h[0] * f(0) + h[1] * f(1) + h[2] * df(0) + h[3] * df(1), f(t), 1e-13);
    EXPECT_NEAR(dh[0] * f(0) + dh[1] * f(1) + dh[2] * df(0) + dh[3] * df(1), df(t), 1e-12);
  }
}

TEST(Projector, HermiteEndpointValues) {
  const auto p = mt::curved_hermite();
  const auto& f = std::get<HermiteFamily>(p.family());
  for (int i = 0; i < 100; ++i) {
    const double eta = mt::uniform(), ka = mt::uniform();
    EXPECT_EQ(eval_projector(p, {0, eta, ka}), f.s0.eval(eta, ka));
    EXPECT_EQ(eval_projector(p, {1, eta, ka}), f.s1.eval(eta, ka));
    EXPECT_EQ(eval_projector_axis_derivative(p, {0, eta, ka}), f.d0.eval(eta, ka));
    EXPECT_EQ(eval_projector_axis_derivative(p, {1, eta, ka}), f.d1.eval(eta, ka));
  }
}

TEST(Projector, HermiteEndpointDerivativesByDifferences) {
  const auto p = mt::curved_hermite();
  const auto& f = std::get<HermiteFamily>(p.family());
  for (int i = 0; i < 50; ++i) {
    const double eta = mt::uniform(), ka = mt::uniform();
    for (int side = 0; side < 2; ++side) {
      const double sgn = side == 0 ? 1.0 : -1.0;
      const double x0 = side;
      const Vec3 target = side == 0 ? f.d0.eval(eta, ka) : f.d1.eval(eta, ka);
      // One-sided second-order difference into the block.
      const auto err = [&](double h) {
        const Vec3 a = eval_projector(p, {x0, eta, ka});
        const Vec3 b = eval_projector(p, {x0 + sgn * h, eta, ka});
        const Vec3 c = eval_projector(p, {x0 + sgn * 2 * h, eta, ka});
        return distance(sgn * (-3.0 * a + 4.0 * b - c) / (2 * h), target);
      };
      const double e1 = err(1e-2), e2 = err(5e-3);
      if (e1 < 1e-11) continue;
      EXPECT_GE(e1 / e2, 3.0);
      EXPECT_LE(e1 / e2, 5.0);
    }
  }
}

TEST(Projector, KnotValidation) {
  const auto s = [] { return mt::random_bilinear(0); };
  try {
    ProjectorSpec::lagrangian(Axis::eta, {0, 0.7, 0.3, 1}, {s(), s(), s(), s()});
    FAIL() << "expected a ConstructionError";
  } catch (const ConstructionError& e) {
    EXPECT_NE(std::string(e.what()).find("knots not ascending"), std::string::npos);
  }
  EXPECT_THROW(ProjectorSpec::lagrangian(Axis::eta, {0, 0.5, 0.5, 1}, {s(), s(), s(), s()}), ConstructionError);
  EXPECT_THROW(ProjectorSpec::lagrangian(Axis::eta, {0.1, 0.5, 1}, {s(), s(), s()}), ConstructionError);
  EXPECT_THROW(ProjectorSpec::lagrangian(Axis::eta, {0, 0.5, 0.9}, {s(), s(), s()}), ConstructionError);
  EXPECT_THROW(ProjectorSpec::lagrangian(Axis::eta, {0, 0.5, 1}, {s(), s()}), ConstructionError);
  std::vector<double> many;
  std::vector<ParametricSurface> surfaces;
  for (int i = 0; i <= 9; ++i) {
    many.push_back(i / 9.0);
    surfaces.push_back(s());
  }
  EXPECT_THROW(ProjectorSpec::lagrangian(Axis::eta, many, surfaces), ConstructionError);
  many.pop_back();
  surfaces.pop_back();
  many.back() = 1.0;
  EXPECT_NO_THROW(ProjectorSpec::lagrangian(Axis::eta, many, surfaces));
}

TEST(Projector, OutsideCubeThrows) {
  const auto p = mt::random_lagrangian({0, 0.5, 1});
  EXPECT_THROW(eval_projector(p, {0.5, 1.2, 0.5}), DomainError);
  EXPECT_THROW(eval_projector(p, {-0.1, 0.5, 0.5}), DomainError);
}
