#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "benthic/discretization.hpp"
#include "benthic/error.hpp"
#include "benthic/model.hpp"
#include "benthic/timestepper.hpp"

namespace benthic {

enum class Verdict { LinearlyStable, Unstable, Indeterminate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::LinearlyStable: return "LinearlyStable";
    case Verdict::Unstable: return "Unstable";
    case Verdict::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

enum class Provenance { Zero, MaxFromUpper, FromLowerH3, FromLowerH2, NewtonRefined };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Zero: return "Zero";
    case Provenance::MaxFromUpper: return "MaxFromUpper";
    case Provenance::FromLowerH3: return "FromLowerH3";
    case Provenance::FromLowerH2: return "FromLowerH2";
    case Provenance::NewtonRefined: return "NewtonRefined";
  }
  return "Zero";
}

struct SteadyState {
  FieldPair profile;
  double residual_norm = 0.0;
  Provenance provenance = Provenance::Zero;
  std::optional<Verdict> linear_stability;
  FieldPair start;              // bracketing data the march started from
  bool march_monotone = true;   // march stayed monotone and on the correct side of `start`
  bool newton_refined = false;
  double march_time = 0.0;

  bool positive(double tol = 1e-6) const { return numerics::sup_norm(profile.v) >= tol; }
};

inline double residual(const FieldPair& s, const DiscreteModel& m) { return rhs(m, s).sup_norm(); }

struct SteadyConfig {
  IntegratorConfig march{};
  bool newton = true;
  double newton_tol = 1e-11;
  int newton_max_iter = 40;
  double monotone_tol = 1e-12;
};

/// Newton on the full nonlinear residual with an interleaved sparse LU
/// solve of the block Jacobian. Backtracks when the residual grows.
inline FieldPair newton(const FieldPair& start, const DiscreteModel& m, double tol = 1e-11, int max_iter = 40) {
  const auto& p = m.spec.params();
  const auto& growth = m.spec.growth();
  const auto& T = m.transport.matrix;
  const std::size_t n = m.n();
  using SpMat = Eigen::SparseMatrix<double>;
  FieldPair x = start;
  FieldPair r = rhs(m, x);
  double res = r.sup_norm();
  for (int it = 0; it < max_iter && res >= tol; ++it) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(8 * n);
    auto U = [](std::size_t i) { return static_cast<int>(2 * i); };
    auto V = [](std::size_t i) { return static_cast<int>(2 * i + 1); };
    for (std::size_t i = 0; i < n; ++i) {
      trip.emplace_back(U(i), U(i), T.diag[i] - (p.sigma + p.m1));
      if (i > 0) trip.emplace_back(U(i), U(i - 1), T.lower[i]);
      if (i + 1 < n) trip.emplace_back(U(i), U(i + 1), T.upper[i]);
      trip.emplace_back(U(i), V(i), m.rho[i] * p.mu);
      trip.emplace_back(V(i), U(i), p.sigma / m.rho[i]);
      trip.emplace_back(V(i), V(i), growth.f_v(m.x(i), x.v[i]) - p.m2 - p.mu);
    }
    SpMat J(static_cast<int>(2 * n), static_cast<int>(2 * n));
    J.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<SpMat> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "Newton Jacobian is singular");
    Eigen::VectorXd b(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      b[U(i)] = -r.u[i];
      b[V(i)] = -r.v[i];
    }
    const Eigen::VectorXd delta = lu.solve(b);
    if (lu.info() != Eigen::Success || !delta.allFinite()) {
      throw Error(ErrorCode::SingularSystem, "Newton solve failed");
    }
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
      FieldPair trial = x;
      for (std::size_t i = 0; i < n; ++i) {
        trial.u[i] += lambda * delta[U(i)];
        trial.v[i] += lambda * delta[V(i)];
      }
      FieldPair rt = rhs(m, trial);
      const double rn = rt.sup_norm();
      if (rn < res) {
        x = std::move(trial);
        r = std::move(rt);
        res = rn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return x;
}

/// Solves d w'' + q w' + p - (sigma + m1) w = 0 with d w'(0) = b_u q w(0),
/// d w'(L) = -b_d q w(L) on the cell grid.
inline std::vector<double> solve_linear_bvp(std::span<const double> p, const DiscreteModel& m) {
  const double k = m.spec.sigma() + m.spec.m1();
  if (!(k > 0.0)) throw Error(ErrorCode::SingularSystem, "sigma + m1 must be positive");
  numerics::Tridiagonal A = conjugate_transport(m.transport);
  for (std::size_t i = 0; i < A.size(); ++i) {
    A.diag[i] = k - A.diag[i];
    A.lower[i] = -A.lower[i];
    A.upper[i] = -A.upper[i];
  }
  try {
    return numerics::solve_tridiagonal(A, p);
  } catch (const Error&) {
    throw Error(ErrorCode::SingularSystem, "linear boundary value problem is singular");
  }
}

/// u solving T u - (sigma + m1) u + src = 0 directly in drift variables.
inline std::vector<double> solve_drift_balance(std::span<const double> src, const DiscreteModel& m) {
  const double k = m.spec.sigma() + m.spec.m1();
  numerics::Tridiagonal A = m.transport.matrix;
  for (std::size_t i = 0; i < A.size(); ++i) {
    A.diag[i] = k - A.diag[i];
    A.lower[i] = -A.lower[i];
    A.upper[i] = -A.upper[i];
  }
  return numerics::solve_tridiagonal(A, src);
}

namespace detail {

/// March from `start` and track monotonicity in the given direction
/// (+1 nondecreasing, -1 nonincreasing) and the bracket side.
inline SteadyState march(const FieldPair& start, const DiscreteModel& m, const SteadyConfig& cfg, int direction,
                         Provenance prov) {
  SteadyState st;
  st.start = start;
  FieldPair prev = start;
  bool mono = true;
  const double tol = cfg.monotone_tol;
  auto observer = [&](const FieldPair& s) {
    if (!mono) return;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double du = direction * (s.u[i] - prev.u[i]);
      const double dv = direction * (s.v[i] - prev.v[i]);
      const double side_u = direction * (s.u[i] - start.u[i]);
      const double side_v = direction * (s.v[i] - start.v[i]);
      const double scale = tol * std::max(1.0, std::max(std::abs(s.u[i]), std::abs(s.v[i])));
      if (du < -scale || dv < -scale || side_u < -scale || side_v < -scale) {
        mono = false;
        return;
      }
    }
    prev = s;
  };
  TrajectoryRecord rec = simulate(start, m, cfg.march, observer);
  st.march_monotone = mono;
  st.march_time = rec.final_state.t;
  if (rec.outcome == Outcome::HitHorizon) {
    throw Error(ErrorCode::HitHorizon, "steady-state march did not converge by t_max");
  }
  if (rec.outcome == Outcome::Extinct) {
    st.profile = FieldPair(m.n());
    st.residual_norm = 0.0;
    st.provenance = Provenance::Zero;
    return st;
  }
  st.profile = rec.final_state;
  st.profile.t = 0.0;
  st.provenance = prov;
  if (cfg.newton) {
    FieldPair refined = newton(st.profile, m, cfg.newton_tol, cfg.newton_max_iter);
    const double r_new = residual(refined, m);
    if (r_new < residual(st.profile, m)) {
      st.profile = std::move(refined);
      st.newton_refined = true;
    }
  }
  st.residual_norm = residual(st.profile, m);
  return st;
}

}  // namespace detail

/// Upper data for the maximal state: the pointwise minimum of
/// (theta1 R e^{ax}, R e^{ax}), R = max e^{-ay} r(y), and (V u1, V) where u1
/// balances a unit benthic source and V is the upper root of
/// g = m2 + mu - sigma max(u1 / rho). Both are upper solutions.
inline FieldPair max_state_upper_data(const DiscreteModel& m) {
  const auto& spec = m.spec;
  const auto& growth = spec.growth();
  const std::size_t n = m.n();
  const double alpha = spec.alpha();
  const double L = spec.L();
  const double R = growth.homogeneous()
                       ? growth.r(0.0)
                       : numerics::scan_max([&](double y) { return std::exp(-alpha * y) * growth.r(y); }, 0.0, L).value;
  std::vector<double> src(n);
  for (std::size_t i = 0; i < n; ++i) src[i] = m.rho[i] * spec.mu();
  const std::vector<double> u1 = solve_drift_balance(src, m);
  double load = 0.0;
  for (std::size_t i = 0; i < n; ++i) load = std::max(load, spec.sigma() * u1[i] / m.rho[i]);
  const double level = spec.m2() + spec.mu() - load;
  double V = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = m.x(i);
    if (i > 0 && growth.homogeneous()) break;
    double root;
    if (level >= growth.peak(x)) {
      root = growth.s(x);
    } else {
      auto shifted = [&](double v) { return growth.g(x, v) - level; };
      double hi = std::max(growth.r(x), growth.s(x));
      for (int k = 0; k < 60 && shifted(hi) >= 0.0; ++k) hi = 2.0 * hi + 1.0;
      root = numerics::bisect(shifted, growth.s(x), hi, 1e-14);
    }
    V = std::max(V, root * (1.0 + 1e-12));
  }
  const double th = spec.geometry().homogeneous() ? theta1(spec) : 0.0;
  FieldPair data(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.u[i] = V * u1[i];
    data.v[i] = V;
    if (spec.geometry().homogeneous() && alpha * m.x(i) < 700.0) {
      const double e = R * std::exp(alpha * m.x(i));
      data.u[i] = std::min(data.u[i], th * e);
      data.v[i] = std::min(data.v[i], e);
    }
  }
  return data;
}

inline SteadyState max_steady_state(const DiscreteModel& m, const SteadyConfig& cfg = {}) {
  if (!m.spec.geometry().homogeneous()) {
    throw Error(ErrorCode::PreconditionViolated, "maximal state construction needs homogeneous cross sections");
  }
  return detail::march(max_state_upper_data(m), m, cfg, -1, Provenance::MaxFromUpper);
}

/// Per-cell lower root of g(x, .) = level.
inline std::vector<double> level_profile(const DiscreteModel& m, double level, bool upper) {
  const auto& growth = m.spec.growth();
  std::vector<double> out(m.n());
  if (growth.homogeneous()) {
    const LevelRoots r = level_roots(growth, level, 0.0);
    std::fill(out.begin(), out.end(), upper ? r.upper : r.lower);
    return out;
  }
  for (std::size_t i = 0; i < m.n(); ++i) {
    const LevelRoots r = level_roots(growth, level, m.x(i));
    out[i] = upper ? r.upper : r.lower;
  }
  return out;
}

/// Lower solution (u_low, v1) with v1 the lower root of g = m2 + mu and
/// u_low the drift response to the benthic source rho mu v1.
inline FieldPair h3_lower_data(const DiscreteModel& m) {
  const auto& spec = m.spec;
  const std::vector<double> v1 = level_profile(m, level_v12(spec), false);
  std::vector<double> src(m.n());
  for (std::size_t i = 0; i < m.n(); ++i) src[i] = m.rho[i] * spec.mu() * v1[i];
  return FieldPair(solve_drift_balance(src, m), v1);
}

inline SteadyState lower_state_H3(const DiscreteModel& m, const SteadyConfig& cfg = {}) {
  if (classify_regime(m.spec).regime != Regime::H3) {
    throw Error(ErrorCode::RegimeMismatch, "lower-solution construction needs regime H3");
  }
  return detail::march(h3_lower_data(m), m, cfg, +1, Provenance::FromLowerH3);
}

/// Lower data (theta1 c e^{ax}, c e^{ax}) with c = max e^{-ay} v3(y).
inline FieldPair h2_lower_data(const DiscreteModel& m) {
  const auto& spec = m.spec;
  const double alpha = spec.alpha();
  const auto& growth = spec.growth();
  const double level = level_v34(spec);
  double c;
  if (growth.homogeneous()) {
    c = level_roots(growth, level, 0.0).lower;
  } else {
    c = numerics::scan_max([&](double y) { return std::exp(-alpha * y) * level_roots(growth, level, y).lower; }, 0.0,
                           spec.L())
            .value;
  }
  const double th = theta1(spec);
  FieldPair data(m.n());
  for (std::size_t i = 0; i < m.n(); ++i) {
    const double e = c * std::exp(alpha * m.x(i));
    data.u[i] = th * e;
    data.v[i] = e;
  }
  return data;
}

inline constexpr double kDistinctStates = 1e-4;

/// Newton continuation in q from the q = 0 constant state on the v3
/// (upper = false) or v4 branch of g = m2 + m1 mu / (sigma + m1).
inline SteadyState continue_constant_state(const DiscreteModel& m, bool upper, const SteadyConfig& cfg = {},
                                           int steps = 20) {
  const auto& spec = m.spec;
  const std::vector<double> v = level_profile(m, level_v34(spec), upper);
  const double th = theta1(spec);
  FieldPair x(m.n());
  for (std::size_t i = 0; i < m.n(); ++i) {
    x.v[i] = v[i];
    x.u[i] = th * v[i];
  }
  SteadyState st;
  st.start = x;
  const double q_target = spec.q();
  for (int k = 1; k <= steps; ++k) {
    ModelParams p = spec.params();
    p.q = q_target * static_cast<double>(k) / static_cast<double>(steps);
    const DiscreteModel mk(spec.with(p), m.n());
    x = newton(x, mk, cfg.newton_tol, cfg.newton_max_iter);
  }
  st.profile = x;
  st.residual_norm = residual(x, m);
  st.provenance = Provenance::NewtonRefined;
  st.newton_refined = true;
  st.march_monotone = false;
  return st;
}

inline std::vector<SteadyState> multiplicity_H2(const DiscreteModel& m, const SteadyConfig& cfg = {}) {
  const auto& spec = m.spec;
  if (classify_regime(spec).regime != Regime::H2) {
    throw Error(ErrorCode::RegimeMismatch, "multiplicity construction needs regime H2");
  }
  if (spec.b_u() != 0.0 || spec.b_d() != 0.0) {
    throw Error(ErrorCode::PreconditionViolated, "multiplicity construction needs no-flux boundaries");
  }
  if (!spec.geometry().homogeneous()) {
    throw Error(ErrorCode::PreconditionViolated, "multiplicity construction needs homogeneous cross sections");
  }
  if (!bistability_gap_condition(spec).satisfied) {
    throw Error(ErrorCode::GapConditionFailed, "weighted v3/v4 gap condition fails");
  }
  std::vector<SteadyState> out;
  out.push_back(detail::march(h2_lower_data(m), m, cfg, +1, Provenance::FromLowerH2));
  SteadyState upper = max_steady_state(m, cfg);
  if (sup_distance(out.front().profile, upper.profile) <= kDistinctStates) {
    // Both brackets reached the maximal state. Fall back to the unstable
    // branch continued in q from the constant state (theta1 v3, v3).
    out.front() = continue_constant_state(m, false, cfg);
  }
  out.push_back(std::move(upper));
  return out;
}

enum class Monotonicity { StrictlyIncreasing, MonotoneFlat, NotMonotone };

inline const char* to_string(Monotonicity m) {
  switch (m) {
    case Monotonicity::StrictlyIncreasing: return "StrictlyIncreasing";
    case Monotonicity::MonotoneFlat: return "MonotoneFlat";
    case Monotonicity::NotMonotone: return "NotMonotone";
  }
  return "NotMonotone";
}

/// Successive differences > -1e-12 in both components; a profile whose
/// differences all vanish to that tolerance is reported as flat.
inline Monotonicity profile_monotonicity(const FieldPair& s, double tol = 1e-12) {
  bool flat = true;
  bool strict = true;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double du = s.u[i + 1] - s.u[i];
    const double dv = s.v[i + 1] - s.v[i];
    if (du < -tol || dv < -tol) return Monotonicity::NotMonotone;
    if (std::abs(du) > tol || std::abs(dv) > tol) flat = false;
    if (du <= 0.0 || dv <= 0.0) strict = false;
  }
  if (flat) return Monotonicity::MonotoneFlat;
  return strict ? Monotonicity::StrictlyIncreasing : Monotonicity::MonotoneFlat;
}

inline bool check_profile_monotone(const SteadyState& st, double tol = 1e-12) {
  return profile_monotonicity(st.profile, tol) != Monotonicity::NotMonotone;
}

/// Max deviation from u = rho (v / sigma)(mu + m2 - g(x, v)) over cells with
/// v above the extinction tolerance.
inline double slaving_defect(const FieldPair& s, const DiscreteModel& m, double extinct_tol = 1e-6) {
  const auto& p = m.spec.params();
  double worst = 0.0;
  for (std::size_t i = 0; i < m.n(); ++i) {
    if (s.v[i] <= extinct_tol) continue;
    const double pred = m.rho[i] * s.v[i] / p.sigma * (p.mu + p.m2 - m.spec.growth().g(m.x(i), s.v[i]));
    worst = std::max(worst, std::abs(s.u[i] - pred));
  }
  return worst;
}

}  // namespace benthic
