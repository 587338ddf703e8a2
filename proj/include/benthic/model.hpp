#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

#include "benthic/error.hpp"
#include "benthic/growth.hpp"
#include "benthic/numerics.hpp"

namespace benthic {

inline constexpr std::size_t kDefaultScan = 1024;

/// Benthic and drift cross-sectional areas along a river of length L.
class RiverGeometry {
 public:
  RiverGeometry(double length, ProfileFn benthic_area, ProfileFn drift_area, bool homogeneous)
      : L_(length), A_b_(std::move(benthic_area)), A_d_(std::move(drift_area)), homogeneous_(homogeneous) {
    if (!(L_ > 0.0) || !std::isfinite(L_)) throw Error(ErrorCode::InvalidParameter, "river length must be positive");
    for (std::size_t k = 0; k <= kDefaultScan; ++k) {
      const double x = L_ * static_cast<double>(k) / static_cast<double>(kDefaultScan);
      if (!(A_b_(x) > 0.0) || !(A_d_(x) > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "cross-sectional areas must be positive on [0, L]");
      }
    }
  }

  static RiverGeometry uniform(double length, double benthic_area = 1.0, double drift_area = 1.0) {
    return RiverGeometry(length, [=](double) { return benthic_area; }, [=](double) { return drift_area; }, true);
  }

  /// A_d(x) = sin 2x + 2, A_b(x) = sin(2x - 10) + 2.
  static RiverGeometry sinusoidal(double length) {
    return RiverGeometry(
        length, [](double x) { return std::sin(2.0 * x - 10.0) + 2.0; },
        [](double x) { return std::sin(2.0 * x) + 2.0; }, false);
  }

  double L() const { return L_; }
  double A_b(double x) const { return A_b_(x); }
  double A_d(double x) const { return A_d_(x); }
  /// A_b / A_d, the benthic-to-drift area ratio.
  double ratio(double x) const { return A_b_(x) / A_d_(x); }
  bool homogeneous() const { return homogeneous_; }

 private:
  double L_;
  ProfileFn A_b_;
  ProfileFn A_d_;
  bool homogeneous_;
};

struct ModelParams {
  double d = 0.02;
  double q = 0.0;
  double mu = 0.04;
  double sigma = 0.2;
  double m1 = 0.02;
  double m2 = 0.02;
  double b_u = 0.0;
  double b_d = 0.0;
};

inline constexpr double kHostileBoundary = 1e6;

/// Full parameterization of the benthic-drift system.
class ModelSpec {
 public:
  ModelSpec(RiverGeometry geometry, GrowthModel growth, ModelParams params)
      : geometry_(std::move(geometry)), growth_(std::move(growth)), p_(params) {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw Error(ErrorCode::InvalidParameter, what);
    };
    require(std::isfinite(p_.d) && p_.d > 0.0, "d must be positive");
    require(std::isfinite(p_.q) && p_.q >= 0.0, "q must be nonnegative");
    require(std::isfinite(p_.mu) && p_.mu > 0.0, "mu must be positive");
    require(std::isfinite(p_.sigma) && p_.sigma > 0.0, "sigma must be positive");
    require(std::isfinite(p_.m1) && p_.m1 >= 0.0, "m1 must be nonnegative");
    require(std::isfinite(p_.m2) && p_.m2 >= 0.0, "m2 must be nonnegative");
    require(std::isfinite(p_.b_u) && p_.b_u >= 0.0, "b_u must be nonnegative");
    require(std::isfinite(p_.b_d) && p_.b_d >= 0.0, "b_d must be nonnegative");
  }

  ModelSpec with(ModelParams params) const { return ModelSpec(geometry_, growth_, params); }
  ModelSpec with_growth(GrowthModel growth) const { return ModelSpec(geometry_, std::move(growth), p_); }

  const RiverGeometry& geometry() const { return geometry_; }
  const GrowthModel& growth() const { return growth_; }
  const ModelParams& params() const { return p_; }

  double d() const { return p_.d; }
  double q() const { return p_.q; }
  double mu() const { return p_.mu; }
  double sigma() const { return p_.sigma; }
  double m1() const { return p_.m1; }
  double m2() const { return p_.m2; }
  double b_u() const { return p_.b_u; }
  double b_d() const { return p_.b_d; }
  double L() const { return geometry_.L(); }
  double alpha() const { return p_.q / p_.d; }

  /// Both cross sections and the growth law are x-independent.
  bool fully_homogeneous() const { return geometry_.homogeneous() && growth_.homogeneous(); }

 private:
  RiverGeometry geometry_;
  GrowthModel growth_;
  ModelParams p_;
};

/// Parameter set used throughout the numerical experiments.
inline ModelSpec reference_model(ModelParams overrides = {}) {
  return ModelSpec(RiverGeometry::uniform(10.0), allee_cubic(0.4), overrides);
}

struct Landmarks {
  double g_max;
  double g_min;
  double fbar_v;
};

/// Samples (g2)/(g3) and, for strong Allee growth, (g4c) on a grid.
inline void check_conformance(const GrowthModel& growth, double L, std::size_t n_x = 64,
                              std::size_t n_v = 256) {
  constexpr double tol = 1e-9;
  auto fail = [](const char* what, double x) {
    throw Error(ErrorCode::NonconformingGrowth, std::string(what) + " at x = " + std::to_string(x));
  };
  const double vmax = 2.0 * growth.M();
  for (std::size_t i = 0; i < n_x; ++i) {
    const double x = L * static_cast<double>(i) / static_cast<double>(n_x - 1);
    const double r = growth.r(x);
    const double s = growth.s(x);
    if (r > growth.M() + tol) fail("r(x) exceeds M", x);
    if (std::abs(growth.g(x, r)) > tol) fail("g(x, r(x)) != 0", x);
    if (s < -tol || s > r + tol) fail("s(x) outside [0, r(x)]", x);
    double prev = growth.g(x, 0.0);
    for (std::size_t k = 1; k <= n_v; ++k) {
      const double v = vmax * static_cast<double>(k) / static_cast<double>(n_v);
      const double gv = growth.g(x, v);
      if (v > r + tol && gv > tol) fail("g > 0 above carrying capacity", x);
      const double prev_v = vmax * static_cast<double>(k - 1) / static_cast<double>(n_v);
      if (v <= s && gv < prev - tol) fail("g decreasing below s(x)", x);
      if (prev_v >= s && gv > prev + tol) fail("g increasing above s(x)", x);
      prev = gv;
    }
    if (growth.kind() == GrowthKind::StrongAllee) {
      const double h = growth.h(x);
      if (!(growth.g(x, 0.0) < 0.0)) fail("strong Allee needs g(x, 0) < 0", x);
      if (!(growth.peak(x) > 0.0)) fail("strong Allee needs g(x, s(x)) > 0", x);
      if (!(h > 0.0 && h < s)) fail("threshold outside (0, s(x))", x);
      if (std::abs(growth.g(x, h)) > tol) fail("g(x, h(x)) != 0", x);
    }
  }
}

/// g_max, g_min over the river and the bound fbar_v on f_v.
inline Landmarks derive_landmarks(const GrowthModel& growth, double L, std::size_t n_scan = kDefaultScan) {
  if (n_scan < 64) throw Error(ErrorCode::InvalidParameter, "n_scan must be at least 64");
  check_conformance(growth, L);
  if (growth.homogeneous()) {
    const double peak = growth.peak(0.0);
    return {peak, peak, growth.fv_max(0.0)};
  }
  auto peak = [&](double x) { return growth.peak(x); };
  const double g_max = numerics::scan_max(peak, 0.0, L, n_scan).value;
  const double g_min = numerics::scan_min(peak, 0.0, L, n_scan).value;
  const double fbar = numerics::scan_max([&](double x) { return growth.fv_max(x); }, 0.0, L, n_scan).value;
  return {g_max, g_min, fbar};
}

enum class Regime { H1, H2, H3, Gap };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::H1: return "H1";
    case Regime::H2: return "H2";
    case Regime::H3: return "H3";
    case Regime::Gap: return "Gap";
  }
  return "Gap";
}

struct RegimeReport {
  double g_max;
  double g_min;
  double fbar_v;
  double mu1;
  double mu2;
  double mu3;
  Regime regime;
  bool compactness_ok;        // fbar_v < m2 + mu
  bool degenerate_mortality;  // m1 == 0: mu1, mu2 reported as +inf
};

inline RegimeReport classify_regime(const ModelSpec& spec) {
  const Landmarks lm = derive_landmarks(spec.growth(), spec.L());
  RegimeReport rep{};
  rep.g_max = lm.g_max;
  rep.g_min = lm.g_min;
  rep.fbar_v = lm.fbar_v;
  rep.mu3 = lm.g_min - spec.m2();
  rep.degenerate_mortality = spec.m1() == 0.0;
  const double mu = spec.mu();
  if (rep.degenerate_mortality) {
    rep.mu1 = std::numeric_limits<double>::infinity();
    rep.mu2 = std::numeric_limits<double>::infinity();
    rep.regime = mu < rep.mu3 ? Regime::H3 : Regime::Gap;
  } else {
    const double factor = (spec.sigma() + spec.m1()) / spec.m1();
    rep.mu1 = (lm.g_max - spec.m2()) * factor;
    rep.mu2 = (lm.g_min - spec.m2()) * factor;
    if (mu > rep.mu1) {
      rep.regime = Regime::H1;
    } else if (mu < rep.mu3) {
      rep.regime = Regime::H3;
    } else if (mu > rep.mu3 && mu < rep.mu2) {
      rep.regime = Regime::H2;
    } else {
      rep.regime = Regime::Gap;
    }
  }
  rep.compactness_ok = lm.fbar_v < spec.m2() + mu;
  return rep;
}

struct LevelRoots {
  double lower;
  double upper;
  bool double_root;
};

/// The two solutions of g(x, v) = level on either side of the peak s(x).
inline LevelRoots level_roots(const GrowthModel& growth, double level, double x) {
  const double s = growth.s(x);
  const double peak = growth.g(x, s);
  if (std::abs(level - peak) <= 1e-15 * std::max(1.0, std::abs(peak))) return {s, s, true};
  if (level > peak) {
    throw Error(ErrorCode::NoRoots, "level " + std::to_string(level) + " above the peak of g at x = " + std::to_string(x));
  }
  auto shifted = [&](double v) { return growth.g(x, v) - level; };
  if (!(shifted(0.0) < 0.0)) {
    throw Error(ErrorCode::NoRoots, "g(x, 0) is not below the level; no lower root");
  }
  const double lower = numerics::bisect(shifted, 0.0, s, 1e-13);
  double hi = std::max(growth.r(x), s);
  for (int k = 0; k < 60 && shifted(hi) >= 0.0; ++k) hi *= 2.0;
  const double upper = numerics::bisect(shifted, s, hi, 1e-13);
  return {lower, upper, false};
}

/// Levels whose roots bracket the persistence sets: m2 + mu gives (v1, v2),
/// m2 + m1 mu / (sigma + m1) gives (v3, v4).
inline double level_v12(const ModelSpec& spec) { return spec.m2() + spec.mu(); }
inline double level_v34(const ModelSpec& spec) {
  return spec.m2() + spec.m1() * spec.mu() / (spec.sigma() + spec.m1());
}

struct AprioriBounds {
  double theta1_bar;
  double theta2_bar;
  double theta1;  // NaN unless the cross sections are homogeneous
  double M;
  double alpha;

  double u_bound(double x) const { return std::exp(alpha * x) * M * theta1_bar; }
  double v_bound(double x) const {
    return std::exp(alpha * x) * M * std::max(1.0, theta1_bar * theta2_bar);
  }
};

inline AprioriBounds apriori_bounds(const ModelSpec& spec) {
  const auto& geo = spec.geometry();
  AprioriBounds b{};
  const double base1 = spec.mu() / (spec.sigma() + spec.m1());
  const double base2 = spec.sigma() / (spec.mu() + spec.m2());
  if (geo.homogeneous()) {
    b.theta1_bar = geo.ratio(0.0) * base1;
    b.theta2_bar = base2 / geo.ratio(0.0);
    b.theta1 = b.theta1_bar;
  } else {
    b.theta1_bar = numerics::scan_max([&](double x) { return geo.ratio(x); }, 0.0, geo.L()).value * base1;
    b.theta2_bar = numerics::scan_max([&](double x) { return 1.0 / geo.ratio(x); }, 0.0, geo.L()).value * base2;
    b.theta1 = std::numeric_limits<double>::quiet_NaN();
  }
  b.M = spec.growth().M();
  b.alpha = spec.alpha();
  return b;
}

struct GapCondition {
  bool satisfied;           // max e^{-ay} v3(y) < min e^{-ay} v4(y)
  double max_weighted_v3;
  double min_weighted_v4;
  double bound_on_q_over_d;  // (1/L) ln(min v4 / max v3)
  bool sufficient_holds;     // 0 < q/d < bound (or q == 0 with a positive bound)
};

inline GapCondition bistability_gap_condition(const ModelSpec& spec, std::size_t n_scan = kDefaultScan) {
  const auto& growth = spec.growth();
  if (growth.kind() != GrowthKind::StrongAllee) {
    throw Error(ErrorCode::RegimeMismatch, "gap condition needs strong Allee growth");
  }
  if (!spec.geometry().homogeneous()) {
    throw Error(ErrorCode::PreconditionViolated, "gap condition needs homogeneous cross sections");
  }
  const double level = level_v34(spec);
  const double L = spec.L();
  const double alpha = spec.alpha();
  GapCondition c{};
  c.max_weighted_v3 = -std::numeric_limits<double>::infinity();
  c.min_weighted_v4 = std::numeric_limits<double>::infinity();
  double max_v3 = -std::numeric_limits<double>::infinity();
  double min_v4 = std::numeric_limits<double>::infinity();
  const std::size_t n = growth.homogeneous() ? 2 : n_scan;
  for (std::size_t k = 0; k < n; ++k) {
    const double y = L * static_cast<double>(k) / static_cast<double>(n - 1);
    LevelRoots roots{};
    try {
      roots = level_roots(growth, level, growth.homogeneous() ? 0.0 : y);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NoRoots) {
        throw Error(ErrorCode::RegimeMismatch, "v3/v4 do not exist (regime H1 or gap)");
      }
      throw;
    }
    const double w = std::exp(-alpha * y);
    c.max_weighted_v3 = std::max(c.max_weighted_v3, w * roots.lower);
    c.min_weighted_v4 = std::min(c.min_weighted_v4, w * roots.upper);
    max_v3 = std::max(max_v3, roots.lower);
    min_v4 = std::min(min_v4, roots.upper);
  }
  c.satisfied = c.max_weighted_v3 < c.min_weighted_v4;
  c.bound_on_q_over_d = std::log(min_v4 / max_v3) / L;
  c.sufficient_holds = alpha < c.bound_on_q_over_d;
  return c;
}

}  // namespace benthic
