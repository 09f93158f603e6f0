#include <gtest/gtest.h>

#include <cmath>

#include "cwhopf/critical_compare.hpp"

using namespace cwhopf;

namespace {

CriticalCompareConfig small_config() {
  CriticalCompareConfig c;
  c.n_list = {100, 1600};
  c.replicas = 60;
  c.horizon = 0.2;
  c.checkpoints = {0.0, 0.1, 0.2};
  c.limit_dt = 1e-3;
  c.eta_lags = {1e-2, 2e-2, 5e-2};
  c.seed = 11;
  return c;
}

}  // namespace

TEST(CriticalCompare, SmallRunStructure) {
  auto cfg = small_config();
  cfg.workers = 1;
  const auto r = critical_compare(DissipativeParams{1.0, 1.5}, cfg);
  EXPECT_NEAR(r.kappa0, 0.75, 1e-15);
  ASSERT_EQ(r.sizes.size(), 2u);
  ASSERT_EQ(r.ks_non_increasing.size(), 3u);
  for (const auto& s : r.sizes) {
    ASSERT_EQ(s.checkpoints.size(), 3u);
    for (const auto& c : s.checkpoints) {
      EXPECT_GE(c.ks, 0.0);
      EXPECT_LE(c.ks, 1.0);
      EXPECT_EQ(c.n_micro, 60u);
      EXPECT_EQ(c.n_limit, 600u);
    }
    EXPECT_EQ(s.phase.replicas_used + s.phase.undefined, 60u);
    EXPECT_GT(s.events, 0u);
  }
  // The reference ensemble starts exactly at kappa0.
  EXPECT_NEAR(r.sizes[0].checkpoints[0].moments_limit[0], 0.75, 1e-12);

  // kappa_N(0) concentrates near kappa0 as N grows.
  auto sd0 = [](const SizeComparison& s) {
    const auto& m = s.checkpoints[0].moments_micro;
    return std::sqrt(m[1] - m[0] * m[0]);
  };
  EXPECT_LT(sd0(r.sizes[1]), sd0(r.sizes[0]));

  const auto j = to_json(r);
  EXPECT_EQ(j.at("model"), "dissipative");
  EXPECT_EQ(j.at("sizes").size(), 2u);
  EXPECT_EQ(j.at("sizes")[0].at("checkpoints")[1].at("moments_micro").size(), 4u);
  EXPECT_EQ(j.at("limit_paths"), 600);

  cfg.workers = 3;
  EXPECT_EQ(to_json(critical_compare(DissipativeParams{1.0, 1.5}, cfg)).dump(), j.dump());
}

TEST(CriticalCompare, TwoPopKappa0) {
  auto cfg = small_config();
  cfg.n_list = {100};
  cfg.replicas = 20;
  const auto p = TwoPopParams::with_trace_condition(0.5, 2.0, 2.0, -2.0);
  const auto r = critical_compare(p, cfg);
  EXPECT_NEAR(r.kappa0, p.gamma * p.gamma / std::abs(p.gamma_big()), 1e-15);
  EXPECT_EQ(to_json(r).at("model"), "two-pop");
}

TEST(CriticalCompare, Validation) {
  auto cfg = small_config();
  cfg.initial_offset = 0.0;
  EXPECT_THROW(critical_compare(DissipativeParams{1.0, 1.5}, cfg), ConfigError);
  cfg = small_config();
  cfg.limit_factor = 5;
  EXPECT_THROW(critical_compare(DissipativeParams{1.0, 1.5}, cfg), ConfigError);
  cfg = small_config();
  cfg.checkpoints = {0.105};
  EXPECT_THROW(critical_compare(DissipativeParams{1.0, 1.5}, cfg), ConfigError);
  EXPECT_THROW(critical_compare(DissipativeParams{1.0, 1.4}, small_config()), NotCriticalError);
  // Known counterexample: Z2 > 0 has no well-posed limit.
  EXPECT_THROW(critical_compare(TwoPopParams::with_trace_condition(0.6, -10.0, 20.0, -15.0), small_config()),
               ConfigError);
}
