#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "benthic/discretization.hpp"
#include "benthic/error.hpp"
#include "benthic/lyapunov.hpp"
#include "benthic/model.hpp"

namespace benthic {

struct IntegratorConfig {
  double dt = 0.05;
  double t_max = 5000.0;
  double conv_tol = 1e-9;
  double extinct_tol = 1e-6;
  std::size_t sample_stride = 20;
  bool record_energy = false;
  bool enforce_dt_bound = true;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidParameter, "dt must be positive");
    if (!(t_max > 0.0)) throw Error(ErrorCode::InvalidParameter, "t_max must be positive");
    if (!(conv_tol > 0.0 && conv_tol < 1.0)) throw Error(ErrorCode::InvalidParameter, "conv_tol must lie in (0, 1)");
    if (!(extinct_tol > 0.0 && extinct_tol < 1.0)) {
      throw Error(ErrorCode::InvalidParameter, "extinct_tol must lie in (0, 1)");
    }
    if (sample_stride == 0) throw Error(ErrorCode::InvalidParameter, "sample_stride must be positive");
  }
};

enum class Outcome { Extinct, ConvergedPositive, HitHorizon };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Extinct: return "Extinct";
    case Outcome::ConvergedPositive: return "ConvergedPositive";
    case Outcome::HitHorizon: return "HitHorizon";
  }
  return "HitHorizon";
}

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> mass_u;
  std::vector<double> mass_v;
  std::vector<double> energy;  // empty unless requested
  FieldPair final_state;
  Outcome outcome = Outcome::HitHorizon;
  std::size_t steps = 0;
  double max_clip = 0.0;
  double final_sup_u = 0.0;
  double final_sup_v = 0.0;

  std::vector<EnergySample> energy_samples() const { return with_rate_estimates(times, energy); }
};

/// Largest dt satisfying dt * Lip(f) <= 1/2 with Lip estimated from fbar_v
/// and m2 + mu.
inline double stable_dt_bound(const ModelSpec& spec) {
  const Landmarks lm = derive_landmarks(spec.growth(), spec.L());
  const double lip = std::max({std::abs(lm.fbar_v), spec.m2() + spec.mu(), 1e-12});
  return 0.5 / lip;
}

/// IMEX backward Euler: every linear term implicit, f(x, v) explicit. The
/// benthic unknown is eliminated cell by cell, leaving one tridiagonal
/// solve for u whose factorization is reused across steps.
class ImexStepper {
 public:
  ImexStepper(const DiscreteModel& model, double dt) : m_(&model), dt_(dt) {
    const auto& p = model.spec.params();
    const std::size_t n = model.n();
    const auto& T = model.transport.matrix;
    inv_v_ = 1.0 / (1.0 + dt * (p.m2 + p.mu));
    // rho mu b_i with b_i = dt (sigma / rho_i) inv_v_ is cell-independent
    const double coupling = dt * p.mu * p.sigma * inv_v_;
    lower_.resize(n);
    c_.resize(n);
    denom_.resize(n);
    b_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      b_[i] = dt * p.sigma / model.rho[i] * inv_v_;
      const double diag = 1.0 - dt * T.diag[i] + dt * (p.sigma + p.m1) - dt * coupling;
      lower_[i] = -dt * T.lower[i];
      const double upper = i + 1 < n ? -dt * T.upper[i] : 0.0;
      denom_[i] = i == 0 ? diag : diag - lower_[i] * c_[i - 1];
      if (denom_[i] == 0.0 || !std::isfinite(denom_[i])) {
        throw Error(ErrorCode::LinearSolveFailure, "zero pivot in implicit step");
      }
      c_[i] = upper / denom_[i];
    }
  }

  double dt() const { return dt_; }
  double last_clip() const { return last_clip_; }

  FieldPair step(const FieldPair& s) {
    const auto& p = m_->spec.params();
    const auto& growth = m_->spec.growth();
    const std::size_t n = m_->n();
    FieldPair out(n);
    std::vector<double>& a = out.v;
    std::vector<double>& y = out.u;
    for (std::size_t i = 0; i < n; ++i) {
      const double v0 = s.v[i];
      a[i] = (v0 + dt_ * growth.f(m_->x(i), v0)) * inv_v_;
      const double r = s.u[i] + dt_ * m_->rho[i] * p.mu * a[i];
      y[i] = (i == 0 ? r : r - lower_[i] * y[i - 1]) / denom_[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) y[i] -= c_[i] * y[i + 1];
    double clip = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] += b_[i] * y[i];
      if (y[i] < 0.0) {
        clip = std::max(clip, -y[i]);
        y[i] = 0.0;
      }
      if (a[i] < 0.0) {
        clip = std::max(clip, -a[i]);
        a[i] = 0.0;
      }
    }
    last_clip_ = clip;
    if (clip > 1e-8 * s.sup_norm()) {
      throw Error(ErrorCode::StepRejected, "negative excursion " + std::to_string(clip) + " exceeds clip tolerance");
    }
    out.t = s.t + dt_;
    return out;
  }

 private:
  const DiscreteModel* m_;
  double dt_;
  double inv_v_ = 1.0;
  double last_clip_ = 0.0;
  std::vector<double> lower_, c_, denom_, b_;
};

/// One IMEX step from scratch (rebuilds the factorization).
inline FieldPair step(const FieldPair& s, const DiscreteModel& model, double dt) {
  ImexStepper stepper(model, dt);
  return stepper.step(s);
}

using StepObserver = std::function<void(const FieldPair&)>;

inline TrajectoryRecord simulate(const FieldPair& initial, const DiscreteModel& model, const IntegratorConfig& cfg,
                                 const StepObserver& observer = {}) {
  cfg.validate();
  if (initial.size() != model.n()) throw Error(ErrorCode::PreconditionViolated, "initial data size mismatch");
  for (std::size_t i = 0; i < initial.size(); ++i) {
    if (!(initial.u[i] >= 0.0) || !(initial.v[i] >= 0.0)) {
      throw Error(ErrorCode::PreconditionViolated, "initial data must be nonnegative");
    }
  }
  if (cfg.enforce_dt_bound && cfg.dt > stable_dt_bound(model.spec) * (1.0 + 1e-12)) {
    throw Error(ErrorCode::PreconditionViolated, "dt exceeds the explicit reaction bound");
  }
  ImexStepper stepper(model, cfg.dt);
  TrajectoryRecord rec;
  const double t0 = initial.t;
  auto sample = [&](const FieldPair& s) {
    rec.times.push_back(s.t);
    rec.mass_u.push_back(model.grid.integrate(s.u));
    rec.mass_v.push_back(model.grid.integrate(s.v));
    if (cfg.record_energy) rec.energy.push_back(energy(s, model));
  };
  FieldPair cur = initial;
  const auto max_steps = static_cast<std::size_t>(std::ceil(cfg.t_max / cfg.dt - 1e-9));
  bool converged = false;
  std::size_t k = 0;
  for (; k < max_steps; ++k) {
    if (k % cfg.sample_stride == 0) sample(cur);
    FieldPair next = stepper.step(cur);
    next.t = t0 + static_cast<double>(k + 1) * cfg.dt;
    rec.max_clip = std::max(rec.max_clip, stepper.last_clip());
    const double change = sup_distance(next, cur) / cfg.dt;
    cur = std::move(next);
    if (observer) observer(cur);
    if (change < cfg.conv_tol * std::max(1.0, cur.sup_norm())) {
      converged = true;
      ++k;
      break;
    }
  }
  if (rec.times.empty() || rec.times.back() < cur.t) sample(cur);
  rec.steps = k;
  rec.final_sup_u = numerics::sup_norm(cur.u);
  rec.final_sup_v = numerics::sup_norm(cur.v);
  if (rec.final_sup_v < cfg.extinct_tol) {
    rec.outcome = Outcome::Extinct;
  } else {
    rec.outcome = converged ? Outcome::ConvergedPositive : Outcome::HitHorizon;
  }
  rec.final_state = std::move(cur);
  return rec;
}

/// Constant-ratio scale theta1 = rho mu / (sigma + m1) for homogeneous cross
/// sections: (theta1 c, c) annihilates the linear drift equation.
inline double theta1(const ModelSpec& spec) {
  if (!spec.geometry().homogeneous()) {
    throw Error(ErrorCode::PreconditionViolated, "theta1 needs homogeneous cross sections");
  }
  return spec.geometry().ratio(0.0) * spec.mu() / (spec.sigma() + spec.m1());
}

struct BasinProbe {
  Outcome below_weighted;              // inside the e^{ax}-weighted threshold cone
  std::optional<Outcome> below_flat;   // inside the unweighted cone, only when b_d >= 1
  Outcome above;                       // from the constant data (theta1 M, M)
  double weighted_level;               // min_y e^{-ay} h(y)
  double flat_level;                   // min_y h(y)
};

inline BasinProbe basin_probe(const DiscreteModel& model, const IntegratorConfig& cfg, double margin = 0.99) {
  const auto& spec = model.spec;
  const auto& growth = spec.growth();
  if (growth.kind() != GrowthKind::StrongAllee) {
    throw Error(ErrorCode::RegimeMismatch, "basin probe needs strong Allee growth");
  }
  const double th = theta1(spec);
  const double alpha = spec.alpha();
  const double L = spec.L();
  BasinProbe out{};
  if (growth.homogeneous()) {
    out.flat_level = growth.h(0.0);
    out.weighted_level = growth.h(0.0) * std::exp(-alpha * L);
  } else {
    out.flat_level = numerics::scan_min([&](double y) { return growth.h(y); }, 0.0, L).value;
    out.weighted_level =
        numerics::scan_min([&](double y) { return std::exp(-alpha * y) * growth.h(y); }, 0.0, L).value;
  }
  const std::size_t n = model.n();
  FieldPair w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(alpha * model.x(i)) * margin * out.weighted_level;
    w.u[i] = th * e;
    w.v[i] = e;
  }
  out.below_weighted = simulate(w, model, cfg).outcome;
  if (spec.b_d() >= 1.0) {
    FieldPair f(n, margin * th * out.flat_level, margin * out.flat_level);
    out.below_flat = simulate(f, model, cfg).outcome;
  }
  const double M = growth.M();
  out.above = simulate(FieldPair(n, th * M, M), model, cfg).outcome;
  return out;
}

}  // namespace benthic
