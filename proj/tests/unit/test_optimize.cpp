#include <gtest/gtest.h>

#include <cmath>

#include "compsum/optimize.hpp"

using namespace compsum;

TEST(MinimizeOnBox, QuadraticInteriorMinimum) {
  const Objective f = [](std::span<const double> x, std::span<double> g) {
    g[0] = 2 * (x[0] - 0.3);
    g[1] = 8 * (x[1] + 0.1);
    return (x[0] - 0.3) * (x[0] - 0.3) + 4 * (x[1] + 0.1) * (x[1] + 0.1);
  };
  const std::vector<double> lo{-1, -1}, hi{1, 1};
  const BoxMinimum m = minimize_on_box(f, lo, hi, {}, {});
  EXPECT_TRUE(m.converged);
  EXPECT_NEAR(m.argmin[0], 0.3, 1e-8);
  EXPECT_NEAR(m.argmin[1], -0.1, 1e-8);
  EXPECT_NEAR(m.value, 0.0, 1e-15);
}

TEST(MinimizeOnBox, ActiveConstraint) {
  const Objective f = [](std::span<const double> x, std::span<double> g) {
    g[0] = 1.0;
    return x[0];
  };
  const std::vector<double> lo{-2}, hi{3};
  const BoxMinimum m = minimize_on_box(f, lo, hi, {}, {});
  EXPECT_DOUBLE_EQ(m.argmin[0], -2.0);
  EXPECT_TRUE(m.converged);
}

TEST(MinimizeOnBox, ExtraStartsWinTies) {
  const Objective flat = [](std::span<const double>, std::span<double> g) {
    g[0] = 0.0;
    return 1.0;
  };
  const std::vector<double> lo{-1}, hi{1};
  const BoxMinimum m = minimize_on_box(flat, lo, hi, {{0.25}}, {});
  EXPECT_DOUBLE_EQ(m.argmin[0], 0.25);
}

TEST(MinimizeOnBox, DeterministicForFixedSeed) {
  const Objective f = [](std::span<const double> x, std::span<double> g) {
    g[0] = std::cos(3 * x[0]) * 3 + 0.2 * x[0];
    return std::sin(3 * x[0]) + 0.1 * x[0] * x[0];
  };
  const std::vector<double> lo{-4}, hi{4};
  const BoxMinimum a = minimize_on_box(f, lo, hi, {}, {});
  const BoxMinimum b = minimize_on_box(f, lo, hi, {}, {});
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.argmin, b.argmin);
}

TEST(GoldenSection, FindsMaximum) {
  double arg = 0.0;
  const double v = golden_section_max([](double x) { return -(x - 0.7) * (x - 0.7) + 2.0; }, 0.0,
                                      1.0, 1e-10, &arg);
  EXPECT_NEAR(arg, 0.7, 1e-7);
  EXPECT_NEAR(v, 2.0, 1e-15);
}
