#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "riskforge/detail/format.hpp"
#include "riskforge/interval.hpp"

using riskforge::Interval;

TEST(Interval, PointsAndComplement) {
  const Interval p = Interval::point(0.7);
  EXPECT_TRUE(p.is_point());
  EXPECT_DOUBLE_EQ(p.complement().lo, 0.3);
  const Interval x{0.2, 0.5};
  EXPECT_EQ(x.complement(), (Interval{0.5, 0.8}));
  EXPECT_TRUE(x.contains(0.2));
  EXPECT_TRUE(x.contains(Interval{0.3, 0.4}));
  EXPECT_FALSE(x.contains(Interval{0.1, 0.4}));
  EXPECT_TRUE(x.within_unit());
  EXPECT_FALSE((Interval{-0.1, 0.5}).within_unit());
  EXPECT_FALSE((Interval{0.6, 0.5}).well_formed());
}

TEST(Interval, ArithmeticOnNonnegatives) {
  EXPECT_EQ((Interval{1, 2} + Interval{3, 4}), (Interval{4, 6}));
  EXPECT_EQ((Interval{1, 2} * Interval{3, 4}), (Interval{3, 8}));
  EXPECT_EQ((Interval{-1, 2} * Interval{3, 4}), (Interval{-4, 8}));
}

TEST(Interval, EmptyFolds) {
  EXPECT_EQ(riskforge::sum_nonneg({}), Interval::zero());
  EXPECT_EQ(riskforge::product_nonneg({}), Interval::one());
}

TEST(Interval, FoldsIgnoreInputOrderBitForBit) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Interval> xs;
    for (int i = 0; i < 7; ++i) {
      double a = u(rng), b = u(rng);
      if (a > b) std::swap(a, b);
      xs.push_back({a, b});
    }
    const Interval s = riskforge::sum_nonneg(xs);
    const Interval p = riskforge::product_nonneg(xs);
    for (int k = 0; k < 10; ++k) {
      std::shuffle(xs.begin(), xs.end(), rng);
      EXPECT_EQ(riskforge::sum_nonneg(xs), s);
      EXPECT_EQ(riskforge::product_nonneg(xs), p);
    }
  }
}

TEST(Interval, NearlyEqual) {
  EXPECT_TRUE(riskforge::nearly_equal(1.0, 1.0 + 1e-12, 1e-9));
  EXPECT_FALSE(riskforge::nearly_equal(1.0, 1.001, 1e-9));
  EXPECT_TRUE(riskforge::nearly_equal(0.0, 0.0, 1e-9));
}

TEST(Format, ShortestRoundTrips) {
  using riskforge::detail::shortest;
  EXPECT_EQ(shortest(30.0), "30");
  EXPECT_EQ(shortest(0.1), "0.1");
  EXPECT_EQ(shortest(-0.0), "0");
  EXPECT_EQ(shortest(Interval{20, 40}), "[20,40]");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(shortest(x)), x);
}

TEST(Format, DisplayAndQuote) {
  using riskforge::detail::display;
  EXPECT_EQ(display(5.0976), "5.0976");
  EXPECT_EQ(display(0.1 + 0.2), "0.3");
  EXPECT_EQ(riskforge::detail::quote("a\"b\\c\n"), "\"a\\\"b\\\\c\\n\"");
  EXPECT_EQ(riskforge::detail::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(riskforge::detail::csv_field("plain"), "plain");
}
