#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "benthic/spectral.hpp"
#include "benthic/steadystate.hpp"

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

// roots of (1 - v)(v - 0.4) = c
std::pair<double, double> roots(double c) {
  const double disc = std::sqrt(1.4 * 1.4 - 4.0 * (0.4 + c));
  return {0.5 * (1.4 - disc), 0.5 * (1.4 + disc)};
}

}  // namespace

TEST(LinearBvp, ConstantSource) {
  const DiscreteModel m(spec_with(0.04, 0.0, 0.0), 100);
  const auto w = solve_linear_bvp(std::vector<double>(100, 0.3), m);
  for (double wi : w) EXPECT_NEAR(wi, 0.3 / 0.22, 1e-13);
  const auto z = solve_linear_bvp(std::vector<double>(100, 0.0), m);
  for (double zi : z) EXPECT_EQ(zi, 0.0);
}

TEST(LinearBvp, SecondOrderAndExtrapolatedReference) {
  const ModelSpec spec = spec_with(0.04, 0.11, 0.0);
  const double v1 = roots(0.06).first;
  auto integral = [&](std::size_t n) {
    const DiscreteModel m(spec, n);
    std::vector<double> src(n);
    for (std::size_t i = 0; i < n; ++i) src[i] = spec.mu() * std::exp(-spec.alpha() * m.x(i)) * v1;
    const auto w = solve_linear_bvp(src, m);
    for (double wi : w) EXPECT_GT(wi, 0.0);
    return m.grid.integrate(w);
  };
  const double i400 = integral(400), i800 = integral(800), i1600 = integral(1600), i3200 = integral(3200);
  const double ratio = (i400 - i800) / (i800 - i1600);
  EXPECT_NEAR(ratio, 4.0, 0.3);
  const double coarse = (4.0 * i800 - i400) / 3.0;
  const double fine = (4.0 * i3200 - i1600) / 3.0;
  EXPECT_LT(std::abs(coarse - fine) / fine, 1e-6);
}

TEST(MaxState, ConstantStateWithoutDrift) {
  const DiscreteModel m(spec_with(0.04, 0.0, 0.0), 400);
  const SteadyState st = max_steady_state(m);
  const double v4 = roots(0.02 + 0.02 * 0.04 / 0.22).second;
  const double u4 = 0.04 / 0.22 * v4;
  for (std::size_t i = 0; i < m.n(); ++i) {
    EXPECT_NEAR(st.profile.u[i], u4, 1e-8);
    EXPECT_NEAR(st.profile.v[i], v4, 1e-8);
  }
  EXPECT_NEAR(u4, 0.1741112, 5e-8);
  EXPECT_NEAR(v4, 0.9576114, 5e-8);
  EXPECT_EQ(st.provenance, Provenance::MaxFromUpper);
  EXPECT_TRUE(st.march_monotone);
  EXPECT_EQ(profile_monotonicity(st.profile), Monotonicity::MonotoneFlat);
  EXPECT_EQ(analyze(st.profile, m).verdict, Verdict::LinearlyStable);
}

TEST(MaxState, ZeroForLargeRelease) {
  for (double b_d : {0.0, 1.0, kHostileBoundary}) {
    const SteadyState st = max_steady_state(DiscreteModel(spec_with(0.8, 0.2, b_d), 200));
    EXPECT_EQ(st.provenance, Provenance::Zero);
    EXPECT_FALSE(st.positive());
  }
}

TEST(MaxState, RandomRegimeH1SpecsAreZero) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int k = 0; k < 40; ++k) {
    ModelParams p;
    p.sigma = 0.05 + 0.5 * U(rng);
    p.m1 = 0.01 + 0.05 * U(rng);
    p.m2 = 0.05 * U(rng);
    const double mu1 = (0.09 - p.m2) * (p.sigma + p.m1) / p.m1;
    p.mu = mu1 * (1.05 + U(rng));
    p.q = 0.3 * U(rng);
    p.d = 0.01 + 0.1 * U(rng);
    p.b_d = std::vector<double>{0.0, 1.0, kHostileBoundary}[k % 3];
    const ModelSpec spec = reference_model(p);
    ASSERT_EQ(classify_regime(spec).regime, Regime::H1);
    SteadyConfig sc;
    sc.march.dt = std::min(0.05, stable_dt_bound(spec));
    const SteadyState st = max_steady_state(DiscreteModel(spec, 100), sc);
    EXPECT_EQ(st.provenance, Provenance::Zero) << "case " << k;
  }
}

TEST(MaxState, IncreasingProfilesUnderDrift) {
  for (double b_d : {0.0, 1.0}) {
    const DiscreteModel m(spec_with(0.04, 0.2, b_d), 400);
    const SteadyState st = max_steady_state(m);
    ASSERT_TRUE(st.positive());
    EXPECT_EQ(profile_monotonicity(st.profile), Monotonicity::StrictlyIncreasing) << "b_d " << b_d;
    EXPECT_TRUE(check_profile_monotone(st));
    EXPECT_LT(st.residual_norm, 1e-11);
  }
}

TEST(MaxState, HostileOutletDiagnosticOnly) {
  const DiscreteModel m(spec_with(0.04, 0.2, kHostileBoundary), 400);
  const SteadyState st = max_steady_state(m);
  ASSERT_TRUE(st.positive());
  EXPECT_NO_THROW(check_profile_monotone(st));
  const FieldPair lower = h3_lower_data(m);
  for (std::size_t i = 0; i < m.n(); ++i) EXPECT_GE(st.profile.v[i], lower.v[i]);
}

TEST(MaxState, SteadyIdentities) {
  const DiscreteModel m(spec_with(0.04, 0.2, 0.0), 400);
  const SteadyState st = max_steady_state(m);
  EXPECT_LT(slaving_defect(st.profile, m), 1e-9);
  const MassBalance b = mass_balance(st.profile, m);
  EXPECT_LT(std::abs(b.dmass_dt), 1e-8 * b.mass);
  for (double v : st.profile.v) EXPECT_GT(v, 0.4);
}

TEST(MaxState, NeedsHomogeneousGeometry) {
  const ModelSpec hetero(RiverGeometry::sinusoidal(10.0), allee_cubic(0.4), ModelParams{});
  EXPECT_THROW(max_steady_state(DiscreteModel(hetero, 100)), Error);
}

TEST(LowerStateH3, MatchesMaximalState) {
  const DiscreteModel m(spec_with(0.04, 0.2, 0.0), 400);
  const SteadyState lo = lower_state_H3(m);
  const SteadyState hi = max_steady_state(m);
  EXPECT_EQ(lo.provenance, Provenance::FromLowerH3);
  EXPECT_TRUE(lo.march_monotone);
  EXPECT_LT(sup_distance(lo.profile, hi.profile), 1e-8);
}

TEST(LowerStateH3, LowerDataWithoutDrift) {
  const DiscreteModel m(spec_with(0.04, 0.0, 0.0), 100);
  const FieldPair data = h3_lower_data(m);
  const double v1 = roots(0.06).first;
  for (double v : data.v) EXPECT_NEAR(v, v1, 1e-12);
  EXPECT_NEAR(v1, 0.5267949, 5e-8);
}

TEST(LowerStateH3, RejectsOtherRegimes) {
  try {
    lower_state_H3(DiscreteModel(spec_with(0.3, 0.2, 0.0), 100));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RegimeMismatch);
  }
}

TEST(MultiplicityH2, TwoStatesForWeakDrift) {
  const DiscreteModel m(spec_with(0.1, 0.001, 0.0), 400);
  const auto states = multiplicity_H2(m);
  ASSERT_EQ(states.size(), 2u);
  for (const auto& s : states) {
    EXPECT_TRUE(s.positive());
    EXPECT_LT(s.residual_norm, 1e-11);
    EXPECT_GT(numerics::sup_norm(s.profile.v), 0.4);
  }
  EXPECT_GT(sup_distance(states[0].profile, states[1].profile), 1e-4);
}

TEST(MultiplicityH2, ConstantBranchesWithoutDrift) {
  const DiscreteModel m(spec_with(0.1, 0.0, 0.0), 200);
  const auto states = multiplicity_H2(m);
  const auto [v3, v4] = roots(0.02 + 0.02 * 0.1 / 0.22);
  const double th = 0.1 / 0.22;
  for (std::size_t i = 0; i < m.n(); ++i) {
    EXPECT_NEAR(states[1].profile.v[i], v4, 1e-9);
    EXPECT_NEAR(states[1].profile.u[i], th * v4, 1e-9);
    EXPECT_NEAR(states[0].profile.v[i], v3, 1e-9);
    EXPECT_NEAR(states[0].profile.u[i], th * v3, 1e-9);
  }
}

TEST(MultiplicityH2, Preconditions) {
  auto code = [](const DiscreteModel& m) {
    try {
      multiplicity_H2(m);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  EXPECT_EQ(code(DiscreteModel(spec_with(0.8, 0.001, 0.0), 64)), ErrorCode::RegimeMismatch);
  EXPECT_EQ(code(DiscreteModel(spec_with(0.1, 0.001, 1.0), 64)), ErrorCode::PreconditionViolated);
  EXPECT_EQ(code(DiscreteModel(spec_with(0.1, 0.025, 0.0), 64)), ErrorCode::GapConditionFailed);
}

TEST(Newton, ConvergesFromPerturbedState) {
  const DiscreteModel m(spec_with(0.04, 0.2, 1.0), 200);
  const SteadyState st = max_steady_state(m);
  FieldPair guess = st.profile;
  for (std::size_t i = 0; i < m.n(); ++i) {
    guess.u[i] *= 1.0 + 0.01 * std::sin(static_cast<double>(i));
    guess.v[i] *= 1.0 - 0.01 * std::cos(static_cast<double>(i));
  }
  const FieldPair x = newton(guess, m);
  EXPECT_LT(residual(x, m), 1e-11);
  EXPECT_LT(sup_distance(x, st.profile), 1e-9);
}

TEST(Monotonicity, Classification) {
  FieldPair flat(10, 1.0, 2.0);
  EXPECT_EQ(profile_monotonicity(flat), Monotonicity::MonotoneFlat);
  FieldPair up(10);
  for (std::size_t i = 0; i < 10; ++i) up.u[i] = up.v[i] = static_cast<double>(i);
  EXPECT_EQ(profile_monotonicity(up), Monotonicity::StrictlyIncreasing);
  up.v[5] = 0.0;
  EXPECT_EQ(profile_monotonicity(up), Monotonicity::NotMonotone);
}
