#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "benthic/experiments.hpp"
#include "benthic/steadystate.hpp"
#include "benthic/timestepper.hpp"

using namespace benthic;

namespace {

ModelSpec spec_with(double mu, double q, double b_d, double b_u = 0.0) {
  ModelParams p;
  p.mu = mu;
  p.q = q;
  p.b_d = b_d;
  p.b_u = b_u;
  return reference_model(p);
}

IntegratorConfig quick(double t_max = 5000.0) {
  IntegratorConfig c;
  c.t_max = t_max;
  return c;
}

}  // namespace

TEST(Step, ZeroStaysZero) {
  const DiscreteModel m(spec_with(0.04, 0.2, 1.0), 100);
  for (double dt : {0.01, 0.5, 1.5}) {
    const FieldPair s = step(FieldPair(100), m, dt);
    EXPECT_EQ(s.sup_norm(), 0.0);
  }
}

TEST(Step, ConstantStateIsFixed) {
  const ModelSpec spec = spec_with(0.04, 0.0, 0.0);
  const DiscreteModel m(spec, 100);
  const double b = 1.4, c = 0.4 + 0.02 + 0.02 * 0.04 / 0.22;
  const double v4 = 0.5 * (b + std::sqrt(b * b - 4.0 * c));
  const double th = 0.04 / 0.22;
  // both right-hand sides vanish for (th v4, v4)
  EXPECT_NEAR(0.04 * v4 - 0.22 * th * v4, 0.0, 1e-15);
  EXPECT_NEAR((1.0 - v4) * (v4 - 0.4) - 0.06 + 0.2 * th, 0.0, 1e-15);
  const FieldPair s0(100, th * v4, v4);
  ImexStepper stepper(m, 0.05);
  FieldPair s = s0;
  for (int k = 0; k < 50; ++k) {
    const FieldPair next = stepper.step(s);
    EXPECT_LE(sup_distance(next, s), 1e-10);
    s = next;
  }
}

TEST(Step, PureDecayFactors) {
  ModelParams p;
  p.mu = 1e-300;
  p.sigma = 1e-300;
  p.m1 = 0.02;
  p.m2 = 0.05;
  const DiscreteModel m(reference_model(p).with_growth(zero_growth()), 50);
  const FieldPair s0(50, 0.3, 0.7);
  const FieldPair s1 = step(s0, m, 0.1);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_NEAR(s1.u[i], 0.3 / (1.0 + 0.02 * 0.1), 1e-15);
    EXPECT_NEAR(s1.v[i], 0.7 / (1.0 + 0.05 * 0.1), 1e-15);
  }
}

TEST(Step, ConservesMassInClosedSystem) {
  ModelParams p;
  p.q = 0.3;
  p.m1 = 0.0;
  p.m2 = 0.0;
  const DiscreteModel m(reference_model(p).with_growth(zero_growth()), 200);
  FieldPair s = random_initial(200, 1.0, 1.0, 42);
  auto mass = [&](const FieldPair& f) { return m.grid.integrate(f.u) + m.grid.integrate(f.v); };
  const double m0 = mass(s);
  ImexStepper stepper(m, 0.05);
  for (int k = 0; k < 2000; ++k) s = stepper.step(s);
  EXPECT_LT(std::abs(mass(s) - m0) / (m0 * 100.0), 1e-12);
}

TEST(Step, NonnegativeAndOrderPreserving) {
  const DiscreteModel m(spec_with(0.04, 0.11, 1.0), 100);
  ImexStepper stepper(m, 0.05);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    FieldPair lo = random_initial(100, 0.5, 1.0, seed);
    FieldPair hi = lo;
    const FieldPair bump = random_initial(100, 0.2, 0.2, seed + 100);
    for (std::size_t i = 0; i < 100; ++i) {
      hi.u[i] += bump.u[i];
      hi.v[i] += bump.v[i];
    }
    for (int k = 0; k < 400; ++k) {
      lo = stepper.step(lo);
      hi = stepper.step(hi);
      for (std::size_t i = 0; i < 100; ++i) {
        ASSERT_GE(lo.u[i], 0.0);
        ASSERT_GE(lo.v[i], 0.0);
        ASSERT_GE(hi.u[i] - lo.u[i], -1e-10);
        ASSERT_GE(hi.v[i] - lo.v[i], -1e-10);
      }
    }
  }
}

TEST(Simulate, RejectsOversizedStep) {
  const DiscreteModel m(spec_with(0.04, 0.2, 1.0), 64);
  IntegratorConfig c;
  c.dt = 10.0;
  EXPECT_THROW(simulate(FieldPair(64, 0.1, 0.1), m, c), Error);
  c.dt = 0.05;
  FieldPair bad(64, 0.1, 0.1);
  bad.v[3] = -0.1;
  EXPECT_THROW(simulate(bad, m, c), Error);
}

TEST(Simulate, StableBoundMatchesSlope) {
  EXPECT_NEAR(stable_dt_bound(spec_with(0.04, 0.2, 1.0)), 0.5 / 0.2533333333333333, 1e-12);
  EXPECT_NEAR(stable_dt_bound(spec_with(0.8, 0.2, 1.0)), 0.5 / 0.82, 1e-12);
}

TEST(Simulate, ExtinctionForLargeRelease) {
  for (double b_d : {0.0, 1.0, kHostileBoundary}) {
    const DiscreteModel m(spec_with(0.8, 0.2, b_d), 400);
    const TrajectoryRecord rec = simulate(FieldPair(400, 0.2, 0.2), m, quick(2000.0));
    EXPECT_EQ(rec.outcome, Outcome::Extinct) << "b_d " << b_d;
    EXPECT_LT(rec.final_state.sup_norm(), 1e-6);
  }
}

TEST(Simulate, SubThresholdDataGoExtinct) {
  const DiscreteModel m(spec_with(0.04, 0.11, 1.0), 400);
  const FieldPair s0 = split_initial(m.grid, 0.0, 0.0, 0.0, 0.04);
  EXPECT_EQ(simulate(s0, m, quick()).outcome, Outcome::Extinct);
}

TEST(Simulate, EnvelopeBoundsHold) {
  // data inside (theta1_bar M e^{ax}, M e^{ax}) stay inside; weak drift keeps e^{aL} moderate
  const ModelSpec spec = spec_with(0.04, 0.004, 1.0);
  const DiscreteModel m(spec, 200);
  const AprioriBounds b = apriori_bounds(spec);
  FieldPair s(200);
  for (std::size_t i = 0; i < 200; ++i) {
    s.u[i] = b.u_bound(m.x(i));
    s.v[i] = b.M;
  }
  bool inside = true;
  simulate(s, m, quick(500.0), [&](const FieldPair& f) {
    for (std::size_t i = 0; i < 200; ++i) {
      if (f.u[i] > b.u_bound(m.x(i)) * (1.0 + 1e-12) || f.v[i] > b.v_bound(m.x(i)) * (1.0 + 1e-12)) inside = false;
    }
  });
  EXPECT_TRUE(inside);
}

TEST(Simulate, DecreasesFromUpperData) {
  const DiscreteModel m(spec_with(0.04, 0.2, 0.0), 200);
  FieldPair prev = max_state_upper_data(m);
  bool monotone = true;
  simulate(prev, m, quick(300.0), [&](const FieldPair& f) {
    for (std::size_t i = 0; i < 200; ++i) {
      if (f.u[i] > prev.u[i] + 1e-12 || f.v[i] > prev.v[i] + 1e-12) monotone = false;
    }
    prev = f;
  });
  EXPECT_TRUE(monotone);
}

TEST(Simulate, TrajectorySamplingAndOutcomeFields) {
  const DiscreteModel m(spec_with(0.04, 0.2, 1.0), 64);
  IntegratorConfig c = quick(10.0);
  c.sample_stride = 10;
  c.record_energy = true;
  const TrajectoryRecord rec = simulate(FieldPair(64, 0.5, 0.9), m, c);
  EXPECT_EQ(rec.outcome, Outcome::HitHorizon);
  EXPECT_EQ(rec.steps, 200u);
  EXPECT_EQ(rec.times.size(), 21u);
  EXPECT_EQ(rec.energy.size(), rec.times.size());
  EXPECT_NEAR(rec.times.back(), 10.0, 1e-12);
}

TEST(BasinProbe, ThresholdCones) {
  IntegratorConfig c = quick();
  const BasinProbe closed = basin_probe(DiscreteModel(spec_with(0.04, 0.2, 0.0), 400), c);
  EXPECT_EQ(closed.below_weighted, Outcome::Extinct);
  EXPECT_FALSE(closed.below_flat.has_value());
  EXPECT_EQ(closed.above, Outcome::ConvergedPositive);

  const BasinProbe ff = basin_probe(DiscreteModel(spec_with(0.04, 0.11, 1.0), 400), c);
  ASSERT_TRUE(ff.below_flat.has_value());
  EXPECT_EQ(*ff.below_flat, Outcome::Extinct);
  EXPECT_EQ(ff.below_weighted, Outcome::Extinct);
  EXPECT_NEAR(ff.flat_level, 0.4, 1e-15);
}

TEST(BasinProbe, FlatConeWithoutDrift) {
  const BasinProbe p = basin_probe(DiscreteModel(spec_with(0.04, 0.0, 1.0), 100), quick());
  EXPECT_NEAR(p.weighted_level, 0.4, 1e-15);
  EXPECT_NEAR(p.flat_level, 0.4, 1e-15);
}

TEST(Theta1, NeedsHomogeneousGeometry) {
  const ModelSpec hetero(RiverGeometry::sinusoidal(10.0), allee_cubic(0.4), ModelParams{});
  EXPECT_THROW(theta1(hetero), Error);
  EXPECT_NEAR(theta1(spec_with(0.1, 0.0, 0.0)), 0.1 / 0.22, 1e-15);
}
