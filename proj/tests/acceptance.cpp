#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "benthic/benthic.hpp"

using namespace benthic;

namespace {

struct Verdict_ {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, const std::function<Verdict_()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict_ v{false, ""};
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!v.pass) ++failures;
  std::printf("%s  %s  (%.1f s)  %s\n", v.pass ? "PASS" : "FAIL", name, secs, v.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[240];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

ModelSpec spec_with(double mu, double q, double b_d) {
  ModelParams p;
  p.mu = mu;
  p.q = q;
  p.b_d = b_d;
  return reference_model(p);
}

ModelSpec logistic_spec(double q, double m2) {
  ModelParams p;
  p.mu = 0.04;
  p.q = q;
  p.b_d = 1.0;
  p.m2 = m2;
  return reference_model(p).with_growth(logistic(0.09));
}

// final states of the bistable rows; row indices are 0-based
Verdict_ two_attractors(const std::string& preset, std::size_t low_row, std::size_t high_row) {
  const RunConfig c = resolve_config("", {{"preset", preset}});
  const auto runs = run_bistable_rows(c, preset, 1);
  const TrajectoryRecord& lo = runs[low_row].record;
  const TrajectoryRecord& hi = runs[high_row].record;
  double vmin = hi.final_state.v.empty() ? 0.0 : hi.final_state.v[0];
  for (double x : hi.final_state.v) vmin = std::min(vmin, x);
  const double gap = sup_distance(lo.final_state, hi.final_state);
  const bool ok = lo.outcome == Outcome::Extinct && hi.outcome == Outcome::ConvergedPositive && vmin > 0.0 &&
                  gap > 0.1;
  return {ok, preset + ": row" + std::to_string(low_row + 1) + " " + to_string(lo.outcome) + ", row" +
                  std::to_string(high_row + 1) + " " + to_string(hi.outcome) +
                  fmt(", min v %.3g, gap %.3g", vmin, gap)};
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();

  criterion("regime thresholds", [] {
    const RegimeReport r = classify_regime(reference_model());
    const double tol = 1e-12;
    const bool ok = std::abs(r.mu1 - 0.77) <= tol && std::abs(r.mu2 - 0.77) <= tol && std::abs(r.mu3 - 0.07) <= tol;
    return Verdict_{ok, fmt("mu1 %.15g mu2 %.15g mu3 %.15g", r.mu1, r.mu2, r.mu3)};
  });

  criterion("zero-state eigenvalue oracle", [] {
    const double printed = -0.1903337;
    const ModelSpec spec = spec_with(0.04, 0.0, 0.0);
    std::vector<double> err;
    for (std::size_t n : {100u, 200u, 400u}) err.push_back(std::abs(zero_state_lambda1(spec, n) - printed));
    bool refining = true;
    for (std::size_t k = 1; k < err.size(); ++k) refining = refining && err[k] <= err[k - 1] + 1e-12;
    return Verdict_{err.back() < 1e-6 && refining, fmt("|err| n=100 %.3g, n=200 %.3g, n=400 %.3g", err[0], err[1], err[2])};
  });

  criterion("constant steady state", [] {
    const DiscreteModel m(spec_with(0.04, 0.0, 0.0), 400);
    const SteadyState st = max_steady_state(m);
    // exact constant state: v solves f(v) = (m2 + mu - sigma theta1) v, u = theta1 v
    const double th = 0.04 / 0.22;
    const double c = 0.02 + 0.04 - 0.2 * th;
    const double vv = 0.5 * (1.4 + std::sqrt(1.96 - 4.0 * (0.4 + c / 0.09)));
    const double uu = th * vv;
    double d_exact = 0.0, d_printed = 0.0;
    for (std::size_t i = 0; i < m.n(); ++i) {
      d_exact = std::max({d_exact, std::abs(st.profile.u[i] - uu), std::abs(st.profile.v[i] - vv)});
      d_printed = std::max({d_printed, std::abs(st.profile.u[i] - 0.1741112), std::abs(st.profile.v[i] - 0.9576114)});
    }
    const Verdict vd = analyze(st.profile, m).verdict;
    const bool ok = d_exact < 1e-8 && d_printed < 5e-8 && vd == Verdict::LinearlyStable;
    return Verdict_{ok, fmt("sup vs exact %.3g, vs printed %.3g, ", d_exact, d_printed) + to_string(vd)};
  });

  criterion("H1 extinction", [] {
    bool ok = true;
    std::string detail;
    for (double b_d : {0.0, 1.0, kHostileBoundary}) {
      const ModelSpec spec = spec_with(0.8, 0.2, b_d);
      const DiscreteModel m(spec, 400);
      IntegratorConfig c;
      c.dt = std::min(0.05, stable_dt_bound(spec));
      c.t_max = 2000.0;
      const TrajectoryRecord rec = simulate(FieldPair(400, 0.2, 0.2), m, c);
      const double sup = rec.final_state.sup_norm();
      ok = ok && rec.outcome == Outcome::Extinct && sup < 1e-6 && rec.final_state.t <= 2000.0;
      detail += fmt("b_d=%g: ", b_d) + to_string(rec.outcome) + fmt(" at t=%.0f sup %.2g; ", rec.final_state.t, sup);
    }
    return Verdict_{ok, detail};
  });

  criterion("bistability NF/FF", [] { return two_attractors("fig_bistable_ff", 0, 3); });

  criterion("bistability NF/NF and heterogeneous", [] {
    const Verdict_ a = two_attractors("fig_bistable_nfnf", 0, 2);
    const Verdict_ b = two_attractors("fig_bistable_hetero", 0, 2);
    return Verdict_{a.pass && b.pass, a.detail + "; " + b.detail};
  });

  criterion("H2 multiplicity", [] {
    ModelParams p;
    p.mu = 0.1;
    p.q = 0.001;
    const DiscreteModel m(reference_model(p), 400);
    const std::vector<SteadyState> states = multiplicity_H2(m);
    if (states.size() != 2) return Verdict_{false, "found " + std::to_string(states.size()) + " states"};
    const double gap = sup_distance(states[0].profile, states[1].profile);
    const double r0 = residual(states[0].profile, m), r1 = residual(states[1].profile, m);
    const bool ok = states[0].positive() && states[1].positive() && gap > 1e-4 && r0 < 1e-11 && r1 < 1e-11;
    return Verdict_{ok, fmt("gap %.3g, residuals %.2g %.2g", gap, r0, r1)};
  });

  criterion("profile monotonicity", [] {
    bool ok = true;
    std::string detail;
    for (double b_d : {0.0, 1.0}) {
      const DiscreteModel m(spec_with(0.04, 0.2, b_d), 400);
      const SteadyState st = max_steady_state(m);
      const Monotonicity mono = profile_monotonicity(st.profile);
      ok = ok && st.positive() && mono == Monotonicity::StrictlyIncreasing;
      detail += fmt("b_d=%g: ", b_d) + to_string(mono) + "; ";
    }
    return Verdict_{ok, detail};
  });

  criterion("Lyapunov decay", [] {
    const double tol = 1e-9;
    const ModelSpec spec = spec_with(0.3, 0.2, 1.0);
    const DiscreteModel m(spec, 400);
    IntegratorConfig c;
    c.t_max = 500.0;
    c.sample_stride = 10;
    c.record_energy = true;
    double worst = -INFINITY;
    std::size_t samples = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const TrajectoryRecord rec = simulate(random_initial(400, 1.0, 2.0, seed), m, c);
      for (std::size_t k = 1; k < rec.energy.size(); ++k) worst = std::max(worst, rec.energy[k] - rec.energy[k - 1]);
      samples += rec.energy.size();
    }
    const bool compact = classify_regime(spec).compactness_ok;
    return Verdict_{compact && worst <= tol, fmt("largest increase %.3g over %.0f samples", worst, static_cast<double>(samples))};
  });

  criterion("eigenvalue monotonicity", [] {
    std::vector<double> by_q, by_m2;
    for (double q : {0.05, 0.1, 0.2, 0.4}) by_q.push_back(zero_state_lambda1(logistic_spec(q, 0.02)));
    for (double m2 : {0.02, 0.04, 0.08}) by_m2.push_back(zero_state_lambda1(logistic_spec(0.2, m2)));
    bool dec = true;
    for (std::size_t k = 1; k < by_q.size(); ++k) dec = dec && by_q[k] < by_q[k - 1];
    for (std::size_t k = 1; k < by_m2.size(); ++k) dec = dec && by_m2[k] < by_m2[k - 1];
    const double at8 = zero_state_lambda1(logistic_spec(8.0, 0.02));
    return Verdict_{dec && at8 < -1.0,
                    fmt("q sweep %.6g -> %.6g, ", by_q.front(), by_q.back()) +
                        fmt("m2 sweep %.6g -> %.6g, ", by_m2.front(), by_m2.back()) + fmt("lambda1(q=8) %.6g", at8) +
                        (dec ? ", decreasing" : ", not decreasing")};
  });

  criterion("critical mortality", [] {
    const ModelSpec spec = logistic_spec(0.2, 0.02);
    const CriticalMortality c = critical_m2(spec, 0.2);
    const double a = critical_m2(spec, 0.1).m2_star;
    const double b = critical_m2(spec, 0.3).m2_star;
    const bool ok = c.m2_star > 0.05 && c.m2_star < 0.0864 && std::abs(c.lambda1_at_root) < 1e-8 && a > b;
    return Verdict_{ok, fmt("m2*(0.2) %.9g, |lambda1| %.2g, ", c.m2_star, std::abs(c.lambda1_at_root)) +
                            fmt("m2*(0.1) %.9g, m2*(0.3) %.9g", a, b)};
  });

  criterion("comparison property", [] {
    const DiscreteModel m(spec_with(0.04, 0.11, 1.0), 200);
    ImexStepper stepper(m, 0.05);
    double worst = 0.0;
    for (std::uint64_t pair = 0; pair < 20; ++pair) {
      FieldPair lo = random_initial(200, 0.5, 1.0, 1000 + pair);
      FieldPair hi = lo;
      const FieldPair bump = random_initial(200, 0.3, 0.5, 2000 + pair);
      for (std::size_t i = 0; i < 200; ++i) {
        hi.u[i] += bump.u[i];
        hi.v[i] += bump.v[i];
      }
      for (int k = 0; k < 4000; ++k) {
        lo = stepper.step(lo);
        hi = stepper.step(hi);
        for (std::size_t i = 0; i < 200; ++i) worst = std::max({worst, lo.u[i] - hi.u[i], lo.v[i] - hi.v[i]});
      }
    }
    return Verdict_{worst <= 1e-10, fmt("largest violation %.3g over 20 pairs to t=200", worst)};
  });

  criterion("mass balance", [] {
    ModelParams p;
    p.q = 0.3;
    p.m1 = 0.0;
    p.m2 = 0.0;
    const DiscreteModel m(reference_model(p).with_growth(zero_growth()), 400);
    FieldPair s = random_initial(400, 1.0, 1.0, 7);
    auto mass = [&](const FieldPair& f) { return m.grid.integrate(f.u) + m.grid.integrate(f.v); };
    const double m0 = mass(s);
    const double T = 100.0;
    ImexStepper stepper(m, 0.05);
    for (int k = 0; k < 2000; ++k) s = stepper.step(s);
    const double drift = std::abs(mass(s) - m0) / (m0 * T);
    return Verdict_{drift < 1e-12, fmt("relative drift per unit time %.3g", drift)};
  });

  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d criteria failed, %.1f s total\n", failures, total);
  return failures == 0 ? 0 : 1;
}
