#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "benthic/discretization.hpp"
#include "benthic/model.hpp"
#include "benthic/numerics.hpp"

namespace benthic {

struct EnergySample {
  double t;
  double E;
  double dE_dt_estimate;  // centred difference over adjacent samples, NaN at the ends
};

/// Discrete energy of the semi-discrete system. The quadratic transport part
/// is -1/2 u^T W T u with W = dx e^{-ax}, written face by face, so the energy
/// is an exact Lyapunov function of the semi-discrete flow. As dx -> 0 it
/// tends to the continuum functional
///   int e^{-ax}[d/2 u_x^2 - rho mu u v + (sigma+m1)/2 u^2]
///   - mu/sigma int e^{-ax} rho^2 [F(v) - (mu+m2)/2 v^2]
///   + q/2 (1+b_u) u(0)^2 - q/2 (1-b_d) e^{-aL} u(L)^2.
inline double energy(const FieldPair& s, const DiscreteModel& m) {
  const auto& p = m.spec.params();
  const auto& op = m.transport;
  const double h = m.grid.dx();
  const double alpha = m.spec.alpha();
  const double z = op.z;
  const double bm = numerics::bernoulli(-z);
  const double ez = std::exp(-z);
  const std::size_t n = m.n();
  double faces = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double jump = ez * s.u[i + 1] - s.u[i];
    faces += std::exp(-alpha * m.x(i)) * jump * jump;
  }
  double E = 0.5 * op.d / h * bm * faces;
  E += 0.5 * op.beta_u * std::exp(-alpha * m.x(0)) * s.u[0] * s.u[0];
  E += 0.5 * op.beta_d * std::exp(-alpha * m.x(n - 1)) * s.u[n - 1] * s.u[n - 1];
  const double cv = p.mu / p.sigma;
  double cells = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = s.u[i];
    const double v = s.v[i];
    const double r = m.rho[i];
    const double benthic = m.spec.growth().F(m.x(i), v) - 0.5 * (p.mu + p.m2) * v * v;
    cells += std::exp(-alpha * m.x(i)) *
             (-r * p.mu * u * v + 0.5 * (p.sigma + p.m1) * u * u - cv * r * r * benthic);
  }
  return E + h * cells;
}

/// The continuum functional evaluated literally: centred differences for
/// u_x, midpoint quadrature, boundary values from the transport reconstruction.
inline double energy_continuum_form(const FieldPair& s, const DiscreteModel& m) {
  const auto& p = m.spec.params();
  const auto& op = m.transport;
  const double h = m.grid.dx();
  const double alpha = m.spec.alpha();
  const std::size_t n = m.n();
  const double u_left = op.boundary_value_left(s.u);
  const double u_right = op.boundary_value_right(s.u);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double du;
    if (i == 0) {
      du = (-4.0 * u_left + 3.0 * s.u[0] + s.u[1]) / (3.0 * h);
    } else if (i + 1 == n) {
      du = (4.0 * u_right - 3.0 * s.u[n - 1] - s.u[n - 2]) / (3.0 * h);
    } else {
      du = (s.u[i + 1] - s.u[i - 1]) / (2.0 * h);
    }
    const double u = s.u[i];
    const double v = s.v[i];
    const double r = m.rho[i];
    const double w = std::exp(-alpha * m.x(i));
    total += w * (0.5 * p.d * du * du - r * p.mu * u * v + 0.5 * (p.sigma + p.m1) * u * u);
    total -= p.mu / p.sigma * w * r * r * (m.spec.growth().F(m.x(i), v) - 0.5 * (p.mu + p.m2) * v * v);
  }
  total *= h;
  total += 0.5 * p.q * (1.0 + p.b_u) * u_left * u_left;
  total -= 0.5 * p.q * (1.0 - p.b_d) * std::exp(-alpha * m.spec.L()) * u_right * u_right;
  return total;
}

/// Explicit lower bound for the energy of trajectories inside the
/// dissipativity envelope.
inline double energy_lower_bound(const ModelSpec& spec) {
  const AprioriBounds b = apriori_bounds(spec);
  const auto& geo = spec.geometry();
  const double L = spec.L();
  const double alpha = spec.alpha();
  auto rho = [&](double x) { return geo.ratio(x); };
  auto growth_max = [&](double y) { return spec.growth().F(y, spec.growth().r(y)); };
  double max_rho = rho(0.0);
  double max_rho2 = max_rho * max_rho;
  double M2 = growth_max(0.0);
  if (!geo.homogeneous()) {
    max_rho = numerics::scan_max(rho, 0.0, L).value;
    max_rho2 = numerics::scan_max([&](double x) { return rho(x) * rho(x); }, 0.0, L).value;
  }
  if (!spec.growth().homogeneous()) M2 = numerics::scan_max(growth_max, 0.0, L).value;
  const double M = b.M;
  const double t1 = spec.mu() * max_rho * std::exp(2.0 * alpha * L) * M * M * L * b.theta1_bar *
                    std::max(1.0, b.theta1_bar * b.theta2_bar);
  const double t2 = spec.mu() * max_rho2 / spec.sigma() * std::max(M2, 0.0) * L;
  const double t3 = 0.5 * spec.q() * M * M * b.theta1_bar * b.theta1_bar * std::exp(alpha * L);
  return -t1 - t2 - t3;
}

inline std::vector<EnergySample> with_rate_estimates(std::span<const double> t, std::span<const double> E) {
  std::vector<EnergySample> out(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    out[k].t = t[k];
    out[k].E = E[k];
    out[k].dE_dt_estimate = std::numeric_limits<double>::quiet_NaN();
    if (k > 0 && k + 1 < t.size()) out[k].dE_dt_estimate = (E[k + 1] - E[k - 1]) / (t[k + 1] - t[k - 1]);
  }
  return out;
}

struct DecayAudit {
  bool monotone;
  double max_violation;  // largest E_{k+1} - E_k (<= 0 when strictly decaying)
  bool advisory;         // compactness condition fails; decay is evidence only
  bool bounded_below;
  double lower_bound;
};

inline DecayAudit audit_decay(std::span<const EnergySample> samples, const ModelSpec& spec) {
  DecayAudit a{};
  a.monotone = true;
  a.max_violation = 0.0;
  a.advisory = !classify_regime(spec).compactness_ok;
  a.lower_bound = energy_lower_bound(spec);
  a.bounded_below = true;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (samples[k].E < a.lower_bound) a.bounded_below = false;
    if (k == 0) continue;
    const double jump = samples[k].E - samples[k - 1].E;
    if (k == 1 || jump > a.max_violation) a.max_violation = jump;
    if (jump > 1e-9 * (1.0 + std::abs(samples[k - 1].E))) a.monotone = false;
  }
  if (samples.size() < 2) a.max_violation = 0.0;
  return a;
}

}  // namespace benthic
