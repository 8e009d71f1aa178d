#include <gtest/gtest.h>

#include <cmath>

#include "homctl/simulator.hpp"
#include "support.hpp"

using namespace homctl;
using namespace homctl::test;

namespace {

SimConfig base_config() {
  SimConfig cfg;
  cfg.h = 0.05;
  cfg.t_final = 10.0;
  cfg.x0 = x0_finite_time();
  return cfg;
}

}  // namespace

TEST(SchemeNames, RoundTrip) {
  for (SchemeKind k : {SchemeKind::consistent, SchemeKind::full_sequence,
                       SchemeKind::explicit_zoh, SchemeKind::open_loop})
    EXPECT_EQ(parse_scheme(to_string(k)), k);
  EXPECT_EQ(to_string(SchemeKind::explicit_zoh), "explicit");
  EXPECT_THROW(parse_scheme("implicit"), std::invalid_argument);
}

TEST(Simulate, FiniteTimeConsistentRun) {
  const Trajectory tr = simulate(finite_time3(), base_config());
  ASSERT_FALSE(tr.diverged);
  EXPECT_EQ(tr.times.size(), 201u);
  const auto st = settling_time(tr);
  ASSERT_TRUE(st.has_value());
  EXPECT_LE(*st, 4.9);
  EXPECT_GE(*st, 4.4);
  // Dead-beat: controls vanish once the state does.
  for (std::size_t k = 0; k < tr.times.size(); ++k)
    if (tr.times[k] >= *st) EXPECT_LE(tr.controls[k].norm(), 1e-9);
  EXPECT_EQ(chattering_index(tr), 0.0);
}

TEST(Simulate, ExplicitSchemeChatters) {
  SimConfig cfg = base_config();
  cfg.scheme = SchemeKind::explicit_zoh;
  const Trajectory tr = simulate(finite_time3(), cfg);
  ASSERT_FALSE(tr.diverged);
  EXPECT_FALSE(settling_time(tr, 1e-6).has_value());
  EXPECT_GT(chattering_index(tr), 0.0);
}

TEST(Simulate, FullSequenceSettles) {
  SimConfig cfg = base_config();
  cfg.scheme = SchemeKind::full_sequence;
  const Trajectory tr = simulate(finite_time3(), cfg);
  EXPECT_TRUE(settling_time(tr).has_value());
}

TEST(Simulate, OpenLoopDrifts) {
  SimConfig cfg = base_config();
  cfg.scheme = SchemeKind::open_loop;
  const Trajectory tr = simulate(finite_time3(), cfg);
  for (const Vec& u : tr.controls) EXPECT_EQ(u.norm(), 0.0);
  // x1 follows x1(0) + x2(0) t exactly.
  EXPECT_NEAR(tr.states.back()(0), 1.0 - 10.0, 1e-12);
}

TEST(Simulate, ExactPropagationMatchesDiscretePair) {
  SimConfig cfg = base_config();
  cfg.t_final = 0.5;
  const Trajectory tr = simulate(finite_time3(), cfg);
  const DiscretePair dp = discretize_pair(finite_time3().plant.A, finite_time3().plant.B, cfg.h);
  for (std::size_t k = 0; k + 1 < tr.states.size(); ++k) {
    const Vec want = dp.Ah * tr.states[k] + dp.Bh * tr.controls[k];
    EXPECT_LT((tr.states[k + 1] - want).norm(), 1e-13);
  }
}

TEST(Simulate, DivergenceGuard) {
  SimConfig cfg;
  cfg.scheme = SchemeKind::explicit_zoh;
  cfg.h = 0.2;
  cfg.t_final = 20.0;
  cfg.x0 = 1e5 * x0_finite_time().normalized();
  const Trajectory tr = simulate(fixed_time3(), cfg);
  EXPECT_TRUE(tr.diverged);
  EXPECT_FALSE(tr.note.empty());
  EXPECT_FALSE(settling_time(tr).has_value());
}

TEST(Simulate, RejectsBadConfig) {
  SimConfig cfg = base_config();
  cfg.x0 = Vec::Zero(2);
  EXPECT_THROW(simulate(finite_time3(), cfg), std::invalid_argument);
  cfg = base_config();
  cfg.h = -1.0;
  EXPECT_THROW(simulate(finite_time3(), cfg), std::invalid_argument);
}

TEST(Simulate, DeterministicWithSeed) {
  SimConfig cfg = base_config();
  cfg.perturbation.noise = 1e-3;
  cfg.perturbation.disturbance = 1e-2;
  cfg.perturbation.seed = 42;
  const Trajectory a = simulate(finite_time3(), cfg);
  const Trajectory b = simulate(finite_time3(), cfg);
  ASSERT_EQ(a.states.size(), b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) EXPECT_EQ(a.states[k], b.states[k]);
  EXPECT_EQ(a.fingerprint, b.fingerprint);
  cfg.perturbation.seed = 43;
  const Trajectory c = simulate(finite_time3(), cfg);
  EXPECT_NE(a.states.back(), c.states.back());
}

TEST(Perturbation, BoundedByMagnitude) {
  PerturbationSpec spec;
  spec.noise = 0.5;
  spec.disturbance = 2.0;
  spec.seed = 7;
  Perturbation p(spec, 4);
  for (int i = 0; i < 200; ++i) {
    EXPECT_LE(p.next_noise().norm(), 0.5 + 1e-12);
    EXPECT_LE(p.disturbance(0.1 * i).norm(), 2.0 + 1e-12);
  }
  Perturbation quiet(PerturbationSpec{}, 3);
  EXPECT_EQ(quiet.next_noise().norm(), 0.0);
  EXPECT_EQ(quiet.disturbance(1.0).norm(), 0.0);
}

TEST(Metrics, SettlingAndChattering) {
  Trajectory tr;
  for (int k = 0; k <= 10; ++k) {
    tr.times.push_back(k * 1.0);
    tr.states.push_back(Vec::Constant(1, k < 6 ? 1.0 : 0.0));
    tr.controls.push_back(Vec::Constant(1, k % 2 == 0 ? 1.0 : -1.0));
  }
  EXPECT_EQ(*settling_time(tr), 6.0);
  // Tail covers t in [8, 10]: two jumps of size 2 over 2 time units.
  EXPECT_DOUBLE_EQ(chattering_index(tr, 0.2), 2.0);
  EXPECT_THROW(chattering_index(tr, 0.0), std::invalid_argument);
  tr.states.back()(0) = 1.0;
  EXPECT_FALSE(settling_time(tr).has_value());
}

TEST(IssSweep, ZeroPerturbationIsExact) {
  SimConfig cfg = base_config();
  const auto rows = iss_sweep(finite_time3(), cfg, {0.0, 1e-3}, {0.0, 1e-2}, 3);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].max_bound, 0.0);
  for (const auto& r : rows) {
    EXPECT_EQ(r.bounds.size(), 3u);
    EXPECT_EQ(r.diverged, 0);
    for (double b : r.bounds) EXPECT_TRUE(std::isfinite(b));
  }
  EXPECT_GT(rows[3].max_bound, 0.0);
  // Same seeds, same rows.
  const auto again = iss_sweep(finite_time3(), cfg, {0.0, 1e-3}, {0.0, 1e-2}, 3);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].bounds, again[i].bounds);
}

TEST(Fingerprint, DistinguishesDesigns) {
  EXPECT_NE(design_fingerprint(finite_time3()), design_fingerprint(fixed_time3()));
  EXPECT_EQ(design_fingerprint(finite_time3()), design_fingerprint(finite_time3()));
  EXPECT_FALSE(design_fingerprint(cascade5()).empty());
}
