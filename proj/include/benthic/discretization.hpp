#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "benthic/error.hpp"
#include "benthic/model.hpp"
#include "benthic/numerics.hpp"

namespace benthic {

inline constexpr std::size_t kDefaultCells = 400;
inline constexpr double kMaxCellPeclet = 1e3;

/// Uniform cell-centred grid on [0, L].
class Grid {
 public:
  Grid(std::size_t n, double L) : n_(n), L_(L), dx_(L / static_cast<double>(n)), x_(n) {
    if (n < 8) throw Error(ErrorCode::InvalidParameter, "grid needs at least 8 cells");
    if (!(L > 0.0)) throw Error(ErrorCode::InvalidParameter, "grid length must be positive");
    for (std::size_t i = 0; i < n; ++i) x_[i] = (static_cast<double>(i) + 0.5) * dx_;
  }

  std::size_t n() const { return n_; }
  double L() const { return L_; }
  double dx() const { return dx_; }
  double x(std::size_t i) const { return x_[i]; }
  const std::vector<double>& centers() const { return x_; }

  /// Midpoint-rule integral of a cell field.
  double integrate(std::span<const double> f) const {
    double s = 0.0;
    for (double fi : f) s += fi;
    return s * dx_;
  }

 private:
  std::size_t n_;
  double L_;
  double dx_;
  std::vector<double> x_;
};

/// Drift density u and benthic density v at the cell centres.
struct FieldPair {
  std::vector<double> u;
  std::vector<double> v;
  double t = 0.0;

  FieldPair() = default;
  explicit FieldPair(std::size_t n, double u0 = 0.0, double v0 = 0.0) : u(n, u0), v(n, v0) {}
  FieldPair(std::vector<double> uu, std::vector<double> vv, double time = 0.0)
      : u(std::move(uu)), v(std::move(vv)), t(time) {}

  std::size_t size() const { return u.size(); }
  double sup_norm() const { return std::max(numerics::sup_norm(u), numerics::sup_norm(v)); }

  bool finite() const {
    for (double x : u) if (!std::isfinite(x)) return false;
    for (double x : v) if (!std::isfinite(x)) return false;
    return true;
  }
};

inline double sup_distance(const FieldPair& a, const FieldPair& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.u.size(); ++i) {
    m = std::max(m, std::abs(a.u[i] - b.u[i]));
    m = std::max(m, std::abs(a.v[i] - b.v[i]));
  }
  return m;
}

enum class TransformDirection { ToWZ, ToUV };

/// u = e^{ax} w, v = e^{ax} z at the cell centres.
inline FieldPair exp_transform(const FieldPair& f, double alpha, const Grid& grid, TransformDirection dir) {
  if (!std::isfinite(alpha)) throw Error(ErrorCode::InvalidParameter, "alpha must be finite");
  FieldPair out = f;
  const double sign = dir == TransformDirection::ToWZ ? -1.0 : 1.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double e = std::exp(sign * alpha * grid.x(i));
    out.u[i] *= e;
    out.v[i] *= e;
  }
  return out;
}

/// Tridiagonal discretization of d u_xx - q u_x with the Robin flux
/// conditions d u_x - q u = b_u q u at x = 0 and d u_x - q u = -b_d q u at
/// x = L. Face fluxes F = q u - d u_x use Scharfetter-Gummel weights, the
/// boundary faces the exact constant-flux profile over the half cell.
struct TransportOperator {
  numerics::Tridiagonal matrix;
  double d = 0.0;
  double q = 0.0;
  double b_u = 0.0;
  double b_d = 0.0;
  double dx = 0.0;
  double z = 0.0;       // cell Peclet number q dx / d
  double beta_u = 0.0;  // F(0) = -beta_u u_0
  double beta_d = 0.0;  // F(L) = beta_d u_{n-1}
  bool conservative = false;

  std::size_t size() const { return matrix.size(); }
  std::vector<double> apply(std::span<const double> u) const { return matrix.apply(u); }

  /// Face flux between cells i and i+1.
  double face_flux(std::span<const double> u, std::size_t i) const {
    return d / dx * (numerics::bernoulli(-z) * u[i] - numerics::bernoulli(z) * u[i + 1]);
  }
  double inflow_flux(std::span<const double> u) const { return -beta_u * u.front(); }
  double outflow_flux(std::span<const double> u) const { return beta_d * u.back(); }

  /// Boundary point values reconstructed from the half-cell profile.
  double boundary_value_left(std::span<const double> u) const {
    const double e = std::exp(-0.5 * z);
    return u.front() * e / (1.0 + b_u * -std::expm1(-0.5 * z));
  }
  double boundary_value_right(std::span<const double> u) const {
    const double half = 0.5 * z;
    return u.back() / (std::exp(-half) + b_d * -std::expm1(-half));
  }
};

inline TransportOperator assemble_transport(const Grid& grid, const ModelSpec& spec) {
  using numerics::bernoulli;
  const std::size_t n = grid.n();
  const double h = grid.dx();
  TransportOperator op;
  op.d = spec.d();
  op.q = spec.q();
  op.b_u = spec.b_u();
  op.b_d = spec.b_d();
  op.dx = h;
  op.z = spec.q() * h / spec.d();
  op.conservative = spec.b_u() == 0.0 && spec.b_d() == 0.0;
  if (op.z > kMaxCellPeclet) {
    throw Error(ErrorCode::BadResolution, "cell Peclet number " + std::to_string(op.z) + " exceeds 1e3");
  }
  const double z = op.z;
  const double q = op.q;
  const double half = 0.5 * z;
  op.beta_u = op.b_u * q * std::exp(-half) / (1.0 + op.b_u * -std::expm1(-half));
  op.beta_d = op.b_d * q / (std::exp(-half) + op.b_d * -std::expm1(-half));

  const double k = op.d / (h * h);
  const double bp = bernoulli(z);
  const double bm = bernoulli(-z);
  numerics::Tridiagonal& T = op.matrix;
  T = numerics::Tridiagonal(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n) {
      T.upper[i] = k * bp;
      T.diag[i] -= k * bm;
    }
    if (i > 0) {
      T.lower[i] = k * bm;
      T.diag[i] -= k * bp;
    }
  }
  T.diag[0] -= op.beta_u / h;
  T.diag[n - 1] -= op.beta_d / h;
  return op;
}

/// Conjugate e^{-ax} T e^{ax}: the discrete d w'' + q w' with the transformed
/// flux conditions d w'(0) = b_u q w(0), d w'(L) = -b_d q w(L).
inline numerics::Tridiagonal conjugate_transport(const TransportOperator& op) {
  numerics::Tridiagonal W = op.matrix;
  const double k = op.d / (op.dx * op.dx);
  const double bp = numerics::bernoulli(op.z);
  const double bm = numerics::bernoulli(-op.z);
  for (std::size_t i = 0; i < W.size(); ++i) {
    if (i + 1 < W.size()) W.upper[i] = k * bm;
    if (i > 0) W.lower[i] = k * bp;
  }
  return W;
}

/// Cell-wise coefficients shared by the integrator, Newton and spectral code.
struct DiscreteModel {
  ModelSpec spec;
  Grid grid;
  TransportOperator transport;
  std::vector<double> rho;  // A_b / A_d at the centres

  DiscreteModel(ModelSpec s, std::size_t n = kDefaultCells)
      : spec(std::move(s)), grid(n, spec.L()), transport(assemble_transport(grid, spec)), rho(n) {
    for (std::size_t i = 0; i < n; ++i) rho[i] = spec.geometry().ratio(grid.x(i));
  }

  std::size_t n() const { return grid.n(); }
  double x(std::size_t i) const { return grid.x(i); }
};

/// Right-hand side of the semi-discrete system.
inline FieldPair rhs(const DiscreteModel& m, const FieldPair& s) {
  const auto& p = m.spec.params();
  FieldPair out(m.n());
  out.u = m.transport.apply(s.u);
  for (std::size_t i = 0; i < m.n(); ++i) {
    const double v = s.v[i];
    out.u[i] += m.rho[i] * p.mu * v - (p.sigma + p.m1) * s.u[i];
    out.v[i] = m.spec.growth().f(m.x(i), v) - (p.m2 + p.mu) * v + p.sigma / m.rho[i] * s.u[i];
  }
  out.t = s.t;
  return out;
}

struct MassBalance {
  double mass;            // sum dx (u + rho v)
  double dmass_dt;        // from the semi-discrete right-hand side
  double boundary_loss;   // -b_u q u(0) - b_d q u(L)
  double reaction_gain;   // sum dx (rho v g - rho m2 v - m1 u)
  double residual;        // dmass_dt - boundary_loss - reaction_gain
};

inline MassBalance mass_balance(const FieldPair& s, const DiscreteModel& m) {
  const auto& p = m.spec.params();
  const double h = m.grid.dx();
  const FieldPair r = rhs(m, s);
  MassBalance b{};
  double reaction = 0.0;
  for (std::size_t i = 0; i < m.n(); ++i) {
    b.mass += h * (s.u[i] + m.rho[i] * s.v[i]);
    b.dmass_dt += h * (r.u[i] + m.rho[i] * r.v[i]);
    reaction += m.rho[i] * (m.spec.growth().f(m.x(i), s.v[i]) - p.m2 * s.v[i]) - p.m1 * s.u[i];
  }
  b.reaction_gain = h * reaction;
  b.boundary_loss = m.transport.inflow_flux(s.u) - m.transport.outflow_flux(s.u);
  b.residual = b.dmass_dt - b.boundary_loss - b.reaction_gain;
  return b;
}

}  // namespace benthic
