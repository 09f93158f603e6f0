#include <gtest/gtest.h>

#include <cmath>

#include "cwhopf/generator.hpp"

using namespace cwhopf;

TEST(Generator, ConstantIsAnnihilated) {
  EXPECT_EQ(generator_consistency(DissipativeParams{1.0, 1.5}, 100, test_functions::constant()), 0.0);
  EXPECT_EQ(generator_consistency(TwoPopParams::with_trace_condition(0.5, 2.0, 2.0, -2.0), 100,
                                  test_functions::constant()),
            0.0);
}

// For f = m the jump sum telescopes to 2 (tanh lambda - m) at every N.
TEST(Generator, LinearFunctionsExact) {
  for (std::int64_t n : {1, 7, 100, 1000, 10000, 1000000}) {
    EXPECT_LE(generator_consistency(DissipativeParams{1.0, 1.5}, n, test_functions::first()), 1e-14) << n;
    EXPECT_LE(generator_consistency(DissipativeParams{0.7, 2.0}, n, test_functions::second()), 1e-13) << n;
  }
  const auto p = TwoPopParams::with_trace_condition(0.5, 2.0, 2.0, -2.0);
  for (std::int64_t n : {10, 100, 10000}) {
    EXPECT_LE(generator_consistency(p, n, test_functions::first()), 1e-13) << n;
    EXPECT_LE(generator_consistency(p, n, test_functions::second()), 1e-13) << n;
  }
}

TEST(Generator, HandComputedValue) {
  const DissipativeParams p{1.0, 1.5};
  const MicroStateDissipative s{60, 0.5, 0.0};
  EXPECT_NEAR(generator_dissipative(p, 100, s, test_functions::first()), 2.0 * (std::tanh(0.5) - 0.2), 1e-15);
}

// Quadratic test functions leave a remainder of order 1/N: ten times smaller
// per decade.
TEST(Generator, QuadraticRemainderScalesAsOneOverN) {
  const DissipativeParams p{1.0, 1.5};
  const auto tp = TwoPopParams::with_trace_condition(0.5, 2.0, 2.0, -2.0);
  for (const auto& f : {test_functions::first_squared(), test_functions::second_squared(), test_functions::product()}) {
    const double e2 = generator_consistency(p, 100, f);
    const double e3 = generator_consistency(p, 1000, f);
    const double e4 = generator_consistency(p, 10000, f);
    EXPECT_GT(e2, e3) << f.name;
    EXPECT_GT(e3, e4) << f.name;
    EXPECT_NEAR(e2 / e3, 10.0, 1.0) << f.name;
    EXPECT_NEAR(e3 / e4, 10.0, 1.0) << f.name;
    if (f.name == "xy") continue;
    const double t2 = generator_consistency(tp, 100, f);
    const double t4 = generator_consistency(tp, 10000, f);
    EXPECT_NEAR(t2 / t4, 100.0, 10.0) << f.name;
  }
  // Two-population jumps move one coordinate at a time, so f = m1 m2 has no
  // second-order remainder.
  EXPECT_LE(generator_consistency(tp, 100, test_functions::product()), 1e-13);
}

TEST(TestFunctions, Lookup) {
  EXPECT_EQ(test_functions::by_name("x^2").name, "x^2");
  EXPECT_EQ(test_functions::standard().size(), 6u);
  EXPECT_THROW(test_functions::by_name("x^3"), ConfigError);
  for (const auto& f : test_functions::standard()) {
    const Vec2 x{0.3, -0.4};
    const Vec2 d{1e-3, 2e-3};
    EXPECT_NEAR(f.delta(x, d), f.value({x[0] + d[0], x[1] + d[1]}) - f.value(x), 1e-15) << f.name;
  }
}
