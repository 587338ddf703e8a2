#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "benthic/discretization.hpp"
#include "benthic/error.hpp"
#include "benthic/model.hpp"
#include "benthic/numerics.hpp"
#include "benthic/steadystate.hpp"

namespace benthic {

/// Linearization at a steady state in symmetric form. With weights
/// s_u = e^{-ax/2}, s_v = rho sqrt(mu/sigma) e^{-ax/2} the block Jacobian
///   [ T - (sigma+m1)   rho mu ]
///   [ sigma / rho      f_v(v*) - m2 - mu ]
/// becomes symmetric: a tridiagonal drift block, the constant coupling
/// sqrt(mu sigma) and the diagonal benthic block D.
struct Linearization {
  std::vector<double> a;  // drift diagonal
  std::vector<double> c;  // drift off-diagonal, size n - 1
  double coupling = 0.0;
  std::vector<double> D;
  std::vector<double> log_su;  // log s_u per cell
  std::vector<double> log_sv;
  // quadratic-form data for the Rayleigh check
  double dx = 0.0;
  double d = 0.0;
  double z = 0.0;
  double beta_u = 0.0;
  double beta_d = 0.0;
  double decay = 0.0;  // sigma + m1
  double max_fv = 0.0;
  double min_fv = 0.0;

  std::size_t n() const { return a.size(); }

  Eigen::MatrixXd symmetric_dense() const {
    const auto N = static_cast<Eigen::Index>(n());
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    for (Eigen::Index i = 0; i < N; ++i) {
      S(i, i) = a[i];
      if (i + 1 < N) S(i, i + 1) = S(i + 1, i) = c[i];
      S(i, N + i) = S(N + i, i) = coupling;
      S(N + i, N + i) = D[i];
    }
    return S;
  }

  /// Number of eigenvalues strictly above s (Haynsworth inertia plus a
  /// Sturm count of the tridiagonal Schur complement).
  std::size_t count_above(double s) const {
    const std::size_t N = n();
    std::size_t count = 0;
    const double mu_sigma = coupling * coupling;
    double prev = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      double gap = D[i] - s;
      if (gap == 0.0) gap = -std::numeric_limits<double>::min();
      if (gap > 0.0) ++count;
      double piv = a[i] - s - mu_sigma / gap;
      if (i > 0) piv -= c[i - 1] * c[i - 1] / prev;
      if (piv == 0.0) piv = -std::numeric_limits<double>::min();
      if (piv > 0.0) ++count;
      prev = piv;
    }
    return count;
  }

  double gershgorin_upper() const {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n(); ++i) {
      double r = a[i] + coupling;
      if (i > 0) r += std::abs(c[i - 1]);
      if (i + 1 < n()) r += std::abs(c[i]);
      hi = std::max({hi, r, D[i] + coupling});
    }
    return hi;
  }

  double gershgorin_lower() const {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n(); ++i) {
      double r = a[i] - coupling;
      if (i > 0) r -= std::abs(c[i - 1]);
      if (i + 1 < n()) r -= std::abs(c[i]);
      lo = std::min({lo, r, D[i] - coupling});
    }
    return lo;
  }
};

inline Linearization assemble_linearization(const FieldPair& state, const DiscreteModel& m) {
  const auto& p = m.spec.params();
  const auto& op = m.transport;
  const std::size_t n = m.n();
  const double alpha = m.spec.alpha();
  Linearization lin;
  lin.a.resize(n);
  lin.c.resize(n - 1);
  lin.D.resize(n);
  lin.log_su.resize(n);
  lin.log_sv.resize(n);
  lin.coupling = std::sqrt(p.mu * p.sigma);
  lin.dx = op.dx;
  lin.d = op.d;
  lin.z = op.z;
  lin.beta_u = op.beta_u;
  lin.beta_d = op.beta_d;
  lin.decay = p.sigma + p.m1;
  const double half = 0.5 * op.z;
  const double sym = half == 0.0 ? 1.0 : half / std::sinh(half);
  const double k = op.d / (op.dx * op.dx);
  lin.max_fv = -std::numeric_limits<double>::infinity();
  lin.min_fv = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    lin.a[i] = op.matrix.diag[i] - lin.decay;
    if (i + 1 < n) lin.c[i] = k * sym;
    const double fv = m.spec.growth().f_v(m.x(i), state.v[i]);
    lin.max_fv = std::max(lin.max_fv, fv);
    lin.min_fv = std::min(lin.min_fv, fv);
    lin.D[i] = fv - p.m2 - p.mu;
    lin.log_su[i] = -0.5 * alpha * m.x(i);
    lin.log_sv[i] = lin.log_su[i] + std::log(m.rho[i] * std::sqrt(p.mu / p.sigma));
  }
  return lin;
}

/// Raw (nonsymmetric) block Jacobian, mainly for cross-checks.
inline Eigen::MatrixXd jacobian_dense(const FieldPair& state, const DiscreteModel& m) {
  const auto& p = m.spec.params();
  const auto& T = m.transport.matrix;
  const auto N = static_cast<Eigen::Index>(m.n());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    J(i, i) = T.diag[ui] - (p.sigma + p.m1);
    if (i > 0) J(i, i - 1) = T.lower[ui];
    if (i + 1 < N) J(i, i + 1) = T.upper[ui];
    J(i, N + i) = m.rho[ui] * p.mu;
    J(N + i, i) = p.sigma / m.rho[ui];
    J(N + i, N + i) = m.spec.growth().f_v(m.x(ui), state.v[ui]) - p.m2 - p.mu;
  }
  return J;
}

struct SpectrumReport {
  double lambda1 = 0.0;
  std::optional<double> lambda2;
  std::vector<double> phi_u;  // principal eigenfunction, joint max = 1
  std::vector<double> phi_v;
  std::vector<double> log_phi_u;
  std::vector<double> log_phi_v;
  double rayleigh_check = 0.0;  // |lambda1 + E1/kappa| / (|lambda1| + 1)
  double band_lo = 0.0;
  double band_hi = 0.0;
  std::size_t band_count = 0;  // eigenvalues in the band widened by 10 dx
  Verdict verdict = Verdict::Indeterminate;
};

namespace detail {

inline double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// Largest s with count_above(s) >= k, bracketed in [lo, hi].
inline std::pair<double, double> bisect_count(const Linearization& lin, std::size_t k, double lo, double hi) {
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) break;
    if (lin.count_above(mid) >= k) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

}  // namespace detail

/// Principal eigenpair by bisection on eigenvalue counts followed by
/// inverse iteration at a shift just above lambda1. For a shift above the
/// spectrum, shift - S is an M-matrix, so the iteration is carried out in
/// log space and every iterate stays positive even when the eigenfunction
/// spans hundreds of orders of magnitude.
inline SpectrumReport principal_eigenvalue(const Linearization& lin, double widen = -1.0) {
  const std::size_t n = lin.n();
  SpectrumReport rep;
  const double maxD = *std::max_element(lin.D.begin(), lin.D.end());
  const double minD = *std::min_element(lin.D.begin(), lin.D.end());
  rep.band_lo = minD;
  rep.band_hi = maxD;
  double lo = maxD;
  double hi = lin.gershgorin_upper() + 1.0;
  if (lin.count_above(lo) < 1) {
    lo = lin.gershgorin_lower() - 1.0;
  }
  auto [l1_lo, l1_hi] = detail::bisect_count(lin, 1, lo, hi);
  rep.lambda1 = 0.5 * (l1_lo + l1_hi);
  // a relative offset keeps the last pivot clear of rounding
  const double shift = l1_hi + 1e-12 * std::max(1.0, std::abs(l1_hi));

  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> pivots(n), log_mult(n, ninf), log_c(n, ninf), log_gap(n);
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double gap = shift - lin.D[i];
    if (!(gap > 0.0)) throw Error(ErrorCode::NonPositiveEigenfunction, "shift below the benthic band");
    log_gap[i] = std::log(gap);
    double piv = shift - lin.a[i] - lin.coupling * lin.coupling / gap;
    if (i > 0) {
      piv -= lin.c[i - 1] * lin.c[i - 1] / prev;
      log_mult[i] = std::log(lin.c[i - 1]) - std::log(prev);
    }
    if (!(piv > 0.0)) throw Error(ErrorCode::NonPositiveEigenfunction, "inverse iteration lost positivity");
    pivots[i] = piv;
    if (i + 1 < n) log_c[i] = std::log(lin.c[i]);
    prev = piv;
  }
  const double log_coupling = std::log(lin.coupling);
  std::vector<double> ly_u(n, 0.0), ly_v(n, 0.0), t(n);
  for (int it = 0; it < 6; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = detail::logaddexp(ly_u[i], log_coupling - log_gap[i] + ly_v[i]);
      t[i] = i == 0 ? r : detail::logaddexp(r, log_mult[i] + t[i - 1]);
    }
    std::vector<double> nu(n);
    for (std::size_t i = n; i-- > 0;) {
      const double acc = i + 1 < n ? detail::logaddexp(t[i], log_c[i] + nu[i + 1]) : t[i];
      nu[i] = acc - std::log(pivots[i]);
    }
    double top = ninf;
    for (std::size_t i = 0; i < n; ++i) {
      ly_v[i] = detail::logaddexp(ly_v[i], log_coupling + nu[i]) - log_gap[i];
      top = std::max({top, nu[i], ly_v[i]});
    }
    for (std::size_t i = 0; i < n; ++i) {
      ly_u[i] = nu[i] - top;
      ly_v[i] -= top;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(ly_u[i]) || !std::isfinite(ly_v[i])) {
      throw Error(ErrorCode::NonPositiveEigenfunction, "principal eigenvector is not positive");
    }
  }

  // Rayleigh quotient -E1/kappa on the symmetric vector
  std::vector<double> yu(n), yv(n);
  for (std::size_t i = 0; i < n; ++i) {
    yu[i] = std::exp(ly_u[i]);
    yv[i] = std::exp(ly_v[i]);
  }
  const double h = lin.dx;
  const double bp = numerics::bernoulli(lin.z);
  const double bm = numerics::bernoulli(-lin.z);
  const double half = 0.5 * lin.z;
  const double cross = half == 0.0 ? 1.0 : half / std::sinh(half);
  double E1 = lin.beta_u * yu[0] * yu[0] + lin.beta_d * yu[n - 1] * yu[n - 1];
  double faces = 0.0;
  double kappa = 0.0;
  double cells = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n) faces += bm * yu[i] * yu[i] - 2.0 * cross * yu[i] * yu[i + 1] + bp * yu[i + 1] * yu[i + 1];
    kappa += yu[i] * yu[i] + yv[i] * yv[i];
    cells += lin.decay * yu[i] * yu[i] - 2.0 * lin.coupling * yu[i] * yv[i] - lin.D[i] * yv[i] * yv[i];
  }
  E1 += lin.d / h * faces + h * cells;
  kappa *= h;
  rep.rayleigh_check = std::abs(rep.lambda1 + E1 / kappa) / (std::abs(rep.lambda1) + 1.0);

  rep.log_phi_u.resize(n);
  rep.log_phi_v.resize(n);
  double top = ninf;
  for (std::size_t i = 0; i < n; ++i) {
    rep.log_phi_u[i] = ly_u[i] - lin.log_su[i];
    rep.log_phi_v[i] = ly_v[i] - lin.log_sv[i];
    top = std::max({top, rep.log_phi_u[i], rep.log_phi_v[i]});
  }
  rep.phi_u.resize(n);
  rep.phi_v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rep.log_phi_u[i] -= top;
    rep.log_phi_v[i] -= top;
    rep.phi_u[i] = std::exp(rep.log_phi_u[i]);
    rep.phi_v[i] = std::exp(rep.log_phi_v[i]);
  }

  if (2 * n >= 2) {
    const double lo2 = lin.gershgorin_lower() - 1.0;
    auto [a2, b2] = detail::bisect_count(lin, 2, lo2, l1_hi);
    rep.lambda2 = 0.5 * (a2 + b2);
  }
  const double w = widen < 0.0 ? 10.0 * h : widen;
  rep.band_count = lin.count_above(minD - w) - lin.count_above(maxD + w);
  return rep;
}

inline SpectrumReport principal_eigenvalue(const FieldPair& state, const DiscreteModel& m) {
  return principal_eigenvalue(assemble_linearization(state, m));
}

inline Verdict classify_stability(const SpectrumReport& rep, const FieldPair& state, const DiscreteModel& m) {
  const auto& p = m.spec.params();
  double max_fv = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.n(); ++i) max_fv = std::max(max_fv, m.spec.growth().f_v(m.x(i), state.v[i]));
  if (max_fv > p.m2 + p.mu || rep.lambda1 > 0.0) return Verdict::Unstable;
  if (max_fv < p.m2 + p.m1 * p.mu / (p.m1 + p.sigma) && rep.lambda1 < 0.0 && rep.band_hi < 0.0) {
    return Verdict::LinearlyStable;
  }
  return Verdict::Indeterminate;
}

inline SpectrumReport analyze(const FieldPair& state, const DiscreteModel& m) {
  SpectrumReport rep = principal_eigenvalue(state, m);
  rep.verdict = classify_stability(rep, state, m);
  return rep;
}

/// lambda1 of the linearization at (0, 0).
inline double zero_state_lambda1(const ModelSpec& spec, std::size_t n = kDefaultCells) {
  DiscreteModel m(spec, n);
  return principal_eigenvalue(FieldPair(n), m).lambda1;
}

enum class SensitivityParameter { Q, M2 };

struct Sensitivity {
  int sign;
  double derivative;
};

/// Central difference of lambda1 at the zero state in q or m2.
inline Sensitivity eigen_sensitivity(const ModelSpec& spec, SensitivityParameter which, double delta = 1e-4,
                                     std::size_t n = kDefaultCells) {
  ModelParams p = spec.params();
  double& target = which == SensitivityParameter::Q ? p.q : p.m2;
  const double base = target;
  const double step = base != 0.0 ? delta * std::abs(base) : delta;
  ModelParams plus = p;
  ModelParams minus = p;
  (which == SensitivityParameter::Q ? plus.q : plus.m2) = base + step;
  (which == SensitivityParameter::Q ? minus.q : minus.m2) = std::max(0.0, base - step);
  const double lo_val = which == SensitivityParameter::Q ? minus.q : minus.m2;
  const double l_plus = zero_state_lambda1(spec.with(plus), n);
  const double l_minus = zero_state_lambda1(spec.with(minus), n);
  const double der = (l_plus - l_minus) / (base + step - lo_val);
  return {der > 0.0 ? 1 : (der < 0.0 ? -1 : 0), der};
}

struct CriticalMortality {
  double m2_star;
  double bracket_lo;
  double bracket_hi;
  double lambda1_at_root;
};

/// Root of lambda1(q, m2) = 0 inside (p* - mu, p* - m1 mu / (m1 + sigma)),
/// p* = max f_v(x, 0). The sign of lambda1 is read off the eigenvalue count
/// above zero, so each bisection step costs one linear sweep.
inline CriticalMortality critical_m2(const ModelSpec& spec, double q, std::size_t n = kDefaultCells,
                                     double tol = 1e-10) {
  const auto kind = spec.growth().kind();
  if (kind != GrowthKind::Logistic && kind != GrowthKind::WeakAllee) {
    throw Error(ErrorCode::PreconditionViolated, "critical mortality needs logistic or weak Allee growth");
  }
  if (!(spec.b_d() > 0.0)) throw Error(ErrorCode::PreconditionViolated, "critical mortality needs b_d > 0");
  const auto& growth = spec.growth();
  const double p_star = growth.homogeneous()
                            ? growth.f_v(0.0, 0.0)
                            : numerics::scan_max([&](double x) { return growth.f_v(x, 0.0); }, 0.0, spec.L()).value;
  const double mu = spec.mu();
  CriticalMortality out{};
  out.bracket_lo = p_star - mu;
  out.bracket_hi = p_star - spec.m1() * mu / (spec.m1() + spec.sigma());
  ModelParams p = spec.params();
  p.q = q;
  const FieldPair zero(n);
  const ModelSpec base = spec.with(p);
  const DiscreteModel dm(base, n);
  auto positive = [&](double m2) {
    Linearization lin = assemble_linearization(zero, dm);
    const double shift = m2 - base.m2();
    for (double& Di : lin.D) Di -= shift;
    return lin.count_above(0.0) >= 1;
  };
  double lo = std::max(0.0, out.bracket_lo);
  double hi = out.bracket_hi;
  if (positive(lo) == positive(hi)) {
    throw Error(ErrorCode::BracketFailure, "lambda1 has the same sign at both bracket ends");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (positive(mid) ? lo : hi) = mid;
  }
  out.m2_star = 0.5 * (lo + hi);
  if (!(out.m2_star > out.bracket_lo && out.m2_star < out.bracket_hi)) {
    throw Error(ErrorCode::BracketFailure, "root landed on the bracket boundary");
  }
  ModelParams at = p;
  at.m2 = out.m2_star;
  out.lambda1_at_root = zero_state_lambda1(spec.with(at), n);
  return out;
}

}  // namespace benthic
