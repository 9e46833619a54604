#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "hetnet/numerics.hpp"

using namespace hetnet;
using namespace hetnet::numerics;

TEST(SpecialFunctions, GammaHalfIsRootPi) {
  EXPECT_NEAR(gamma_fn(0.5), std::sqrt(M_PI), 1e-14);
}

TEST(SpecialFunctions, GammaRecurrence) {
  for (double x : {0.1, 0.5, 0.75, 1.3, 2.5, 7.25})
    EXPECT_NEAR(gamma_fn(x + 1.0), x * gamma_fn(x), 1e-12 * gamma_fn(x + 1.0));
}

TEST(SpecialFunctions, GammaRejectsNonPositive) {
  EXPECT_THROW(gamma_fn(0.0), DomainError);
  EXPECT_THROW(gamma_fn(-1.5), DomainError);
}

TEST(SpecialFunctions, ExponentialIntegralReference) {
  // Tabulated E1(1) and E1(0.5).
  EXPECT_NEAR(expint_e1(1.0), 0.21938393439552027, 1e-14);
  EXPECT_NEAR(expint_e1(0.5), 0.55977359477616081, 1e-14);
}

TEST(SpecialFunctions, OneMinusExpOverIsContinuous) {
  EXPECT_DOUBLE_EQ(one_minus_exp_over(0.0), 1.0);
  EXPECT_NEAR(one_minus_exp_over(1e-9), 1.0, 1e-9);
  EXPECT_NEAR(one_minus_exp_over(2.0), (1 - std::exp(-2.0)) / 2.0, 1e-15);
}

TEST(Quadrature, LogTwo) {
  auto r = integrate([](double x) { return 1.0 / (1.0 + x); }, 0.0, 1.0);
  EXPECT_NEAR(r.value, std::log(2.0), 1e-12);
}

TEST(Quadrature, LogThreeOnHalfLine) {
  auto r = integrate_0_inf(
      [](double x) { return 1.0 / (1.0 + x) - 1.0 / (3.0 + x); });
  EXPECT_NEAR(r.value, std::log(3.0), 1e-9);
}

TEST(Quadrature, IntegrableEndpointSingularity) {
  // int_0^1 x^{-1/2} dx = 2
  auto r = integrate([](double x) { return x > 0 ? 1.0 / std::sqrt(x) : 0.0; },
                     0.0, 1.0, {1e-10, 1e-14, 2000});
  EXPECT_NEAR(r.value, 2.0, 1e-7);
}

TEST(Quadrature, StandardNormalSecondMoment) {
  EXPECT_NEAR(expect_standard_normal([](double z) { return z * z; }), 1.0,
              1e-12);
}

TEST(Quadrature, RejectsBadSpec) {
  EXPECT_THROW(integrate([](double) { return 1.0; }, 0, 1, {0.0, 1e-12, 400}),
               DomainError);
}

TEST(FixedPoint, CosineAgainstBisection) {
  // Oracle: bisection on cos(x) - x.
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::cos(mid) - mid > 0 ? lo : hi) = mid;
  }
  auto r = fixed_point([](double x) { return std::cos(x); }, 0.5, 1.0, 1e-13,
                       1000);
  EXPECT_NEAR(r.x, 0.5 * (lo + hi), 1e-12);
}

TEST(FixedPoint, IdentityStopsImmediately) {
  auto r = fixed_point([](double x) { return x; }, 3.0, 0.5, 1e-12, 10);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_DOUBLE_EQ(r.x, 3.0);
}

TEST(FixedPoint, DivergentMapThrows) {
  EXPECT_THROW(
      fixed_point([](double x) { return 2.0 * x + 1.0; }, 1.0, 1.0, 1e-10, 50),
      NoConvergence);
}

TEST(Maximize, DominatesFeasibleGrid) {
  auto f = [](const std::vector<double> &x) {
    return std::sin(3 * x[0]) * std::cos(2 * x[1]) - 0.1 * x[0] * x[0];
  };
  auto feasible = [](const std::vector<double> &x) { return x[0] + x[1] <= 1.0; };
  MaximizeOptions opt;
  opt.seed = 7;
  auto r = maximize_box(f, {-2, -2}, {2, 2}, feasible, opt);
  ASSERT_TRUE(feasible(r.x));
  double grid_best = -1e300;
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; j <= 400; ++j) {
      std::vector<double> x = {-2 + 4.0 * i / 400, -2 + 4.0 * j / 400};
      if (feasible(x))
        grid_best = std::max(grid_best, f(x));
    }
  EXPECT_GE(r.value, grid_best - 1e-6);
  EXPECT_DOUBLE_EQ(r.value, f(r.x));
}

TEST(Maximize, DeterministicForSeed) {
  auto f = [](const std::vector<double> &x) { return -std::abs(x[0] - 0.3); };
  auto any = [](const std::vector<double> &) { return true; };
  MaximizeOptions opt;
  opt.seed = 11;
  auto a = maximize_box(f, {-1}, {1}, any, opt);
  auto b = maximize_box(f, {-1}, {1}, any, opt);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(Seeding, StreamsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i)
    seen.insert(stream_seed(42, i));
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_NE(stream_seed(1, 0), stream_seed(2, 0));
}

TEST(SpecialFunctions, GammaIntegers) {
  EXPECT_NEAR(gamma_fn(4.0), 6.0, 1e-13);
  EXPECT_NEAR(gamma_fn(1.0), 1.0, 1e-15);
}

TEST(Quadrature, ExponentialOnHalfLine) {
  EXPECT_NEAR(integrate_0_inf([](double s) { return std::exp(-s); }).value,
              1.0, 1e-10);
}

TEST(Quadrature, ShannonIdentityForUnitGain) {
  // int (1 - e^{-eta s}) / s e^{-s} ds = ln(1 + eta).
  for (double eta : {1.0, 2.0}) {
    auto r = integrate_0_inf([eta](double s) {
      return s > 0 ? -std::expm1(-eta * s) / s * std::exp(-s) : eta;
    });
    EXPECT_NEAR(r.value, std::log1p(eta), 1e-9);
  }
}

TEST(FixedPoint, DoublingDiverges) {
  EXPECT_THROW(fixed_point([](double x) { return 2.0 * x; }, 1.0, 1.0, 1e-10,
                           200),
               NoConvergence);
}

TEST(Maximize, QuadraticBowl) {
  auto f = [](const std::vector<double> &x) {
    double s = 0;
    for (double v : x)
      s -= (v - 1) * (v - 1);
    return s;
  };
  auto r = maximize_box(f, {0, 0, 0}, {2, 2, 2},
                        [](const std::vector<double> &) { return true; });
  for (double v : r.x)
    EXPECT_NEAR(v, 1.0, 1e-4);
  EXPECT_NEAR(r.value, 0.0, 1e-8);
}

TEST(Maximize, UnimodalAgainstDenseGrid) {
  auto f = [](const std::vector<double> &x) {
    return x[0] * std::exp(-x[0] / 4.0); // maximum at 4
  };
  double best_x = 0, best = -1;
  for (int i = 0; i <= 100000; ++i) {
    const double x = 10.0 * i / 100000;
    if (f({x}) > best) {
      best = f({x});
      best_x = x;
    }
  }
  auto r = maximize_box(f, {0}, {10},
                        [](const std::vector<double> &) { return true; });
  EXPECT_NEAR(r.x[0], best_x, 1e-3);
  EXPECT_GE(r.value, best - 1e-12);
}

TEST(Maximize, NoFeasiblePointThrows) {
  EXPECT_THROW(maximize_box([](const std::vector<double> &) { return 0.0; },
                            {0}, {1},
                            [](const std::vector<double> &) { return false; }),
               InfeasibleRegion);
}
