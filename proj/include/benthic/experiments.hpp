#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "benthic/config.hpp"
#include "benthic/csv.hpp"
#include "benthic/discretization.hpp"
#include "benthic/model.hpp"
#include "benthic/spectral.hpp"
#include "benthic/steadystate.hpp"
#include "benthic/timestepper.hpp"

namespace benthic {

struct BoundaryType {
  const char* label;
  double b_d;
};

inline const std::vector<BoundaryType>& boundary_types() {
  static const std::vector<BoundaryType> types = {{"NF/H", kHostileBoundary}, {"NF/FF", 1.0}, {"NF/NF", 0.0}};
  return types;
}

inline const BoundaryType& boundary_type(const std::string& label) {
  for (const auto& b : boundary_types()) if (label == b.label) return b;
  throw Error(ErrorCode::SchemaError, "unknown boundary type '" + label + "'");
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(detail::trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!detail::trim(cur).empty()) out.push_back(detail::trim(cur));
  return out;
}

inline GrowthModel growth_from_config(const RunConfig& c) {
  const std::string& kind = c.text("model.growth");
  if (kind == "strong_allee") return allee_cubic(c.number("model.threshold"));
  if (kind == "logistic") return logistic(c.number("model.rate"));
  if (kind == "weak_allee") return weak_allee(c.number("model.weak_b"));
  throw Error(ErrorCode::SchemaError, "model.growth must be strong_allee, logistic or weak_allee, got '" + kind + "'");
}

inline ModelSpec spec_from_config(const RunConfig& c) {
  const double L = c.number("model.L");
  const std::string& geom = c.text("model.geometry");
  RiverGeometry geometry = [&] {
    if (geom == "uniform") return RiverGeometry::uniform(L, c.number("model.A_b"), c.number("model.A_d"));
    if (geom == "sinusoidal") return RiverGeometry::sinusoidal(L);
    throw Error(ErrorCode::SchemaError, "model.geometry must be uniform or sinusoidal, got '" + geom + "'");
  }();
  ModelParams p;
  p.d = c.number("model.d");
  p.q = c.number("model.q");
  p.mu = c.number("model.mu");
  p.sigma = c.number("model.sigma");
  p.m1 = c.number("model.m1");
  p.m2 = c.number("model.m2");
  p.b_u = c.number("model.b_u");
  p.b_d = c.number("model.b_d");
  return ModelSpec(std::move(geometry), growth_from_config(c), p);
}

inline std::size_t cells_from_config(const RunConfig& c) {
  const long n = c.integer("grid.n");
  if (n < 8) throw Error(ErrorCode::SchemaError, "grid.n must be at least 8");
  return static_cast<std::size_t>(n);
}

inline IntegratorConfig integrator_from_config(const RunConfig& c) {
  IntegratorConfig ic;
  ic.dt = c.number("run.dt");
  ic.t_max = c.number("run.t_max");
  ic.conv_tol = c.number("run.conv_tol");
  ic.extinct_tol = c.number("run.extinct_tol");
  const long stride = c.integer("run.sample_stride");
  if (stride <= 0) throw Error(ErrorCode::SchemaError, "run.sample_stride must be positive");
  ic.sample_stride = static_cast<std::size_t>(stride);
  ic.record_energy = c.flag("run.record_energy");
  return ic;
}

inline SteadyConfig steady_from_config(const RunConfig& c) {
  SteadyConfig sc;
  sc.march = integrator_from_config(c);
  sc.newton = c.flag("run.newton");
  return sc;
}

/// Uniform double in [0, 1) from the top 53 bits, independent of the
/// standard library's distribution implementations.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline FieldPair random_initial(std::size_t n, double u_max, double v_max, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FieldPair s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.u[i] = u_max * unit_uniform(rng);
    s.v[i] = v_max * unit_uniform(rng);
  }
  return s;
}

/// (u_left, v_left) on x < split L, (u_right, v_right) elsewhere.
inline FieldPair split_initial(const Grid& g, double u_left, double v_left, double u_right, double v_right,
                               double split = 0.5) {
  FieldPair s(g.n());
  for (std::size_t i = 0; i < g.n(); ++i) {
    const bool left = g.x(i) < split * g.L();
    s.u[i] = left ? u_left : u_right;
    s.v[i] = left ? v_left : v_right;
  }
  return s;
}

inline FieldPair initial_from_config(const RunConfig& c, const Grid& g) {
  const std::string& kind = c.text("run.initial");
  const double u0 = c.number("run.u0");
  const double v0 = c.number("run.v0");
  if (kind == "constant") return FieldPair(g.n(), u0, v0);
  if (kind == "split") {
    return split_initial(g, u0, v0, c.number("run.u0_right"), c.number("run.v0_right"), c.number("run.split"));
  }
  if (kind == "random") {
    const long seed = c.integer("run.seed");
    return random_initial(g.n(), u0, v0, static_cast<std::uint64_t>(seed));
  }
  throw Error(ErrorCode::SchemaError, "run.initial must be constant, split or random, got '" + kind + "'");
}

inline std::vector<double> sweep_values(const RunConfig& c) {
  const double a = c.number("sweep.from");
  const double b = c.number("sweep.to");
  const long count = c.integer("sweep.count");
  if (count < 1) throw Error(ErrorCode::SchemaError, "sweep.count must be positive");
  std::vector<double> v(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) v[k] = count == 1 ? a : a + (b - a) * static_cast<double>(k) / (count - 1);
  return v;
}

/// Runs fn(0..count-1) on up to `jobs` threads; results keep index order and
/// the first exception is rethrown after all workers finish.
template <class R, class Fn>
std::vector<R> parallel_map(std::size_t count, unsigned jobs, Fn fn) {
  std::vector<R> out(count);
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t workers = std::min<std::size_t>(jobs, count);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

struct Artifact {
  std::string name;  // file name, no directory
  Table table;
};

inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// Round-trip text for config echoes.
inline std::string exact_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string file_label(std::string s) {
  for (char& ch : s) if (ch == '/') ch = '-';
  return s;
}

inline Table echo_table(const RunConfig& c, std::vector<std::string> columns) {
  Table t;
  t.columns = std::move(columns);
  t.comments = c.echo();
  return t;
}

inline Table profile_table(const RunConfig& c, const FieldPair& s, const Grid& g) {
  Table t = echo_table(c, {"x", "u", "v"});
  for (std::size_t i = 0; i < g.n(); ++i) t.add({g.x(i), s.u[i], s.v[i]});
  return t;
}

inline Table trajectory_table(const RunConfig& c, const TrajectoryRecord& rec) {
  const bool with_energy = !rec.energy.empty();
  Table t = echo_table(c, with_energy ? std::vector<std::string>{"t", "mass_u", "mass_v", "energy"}
                                      : std::vector<std::string>{"t", "mass_u", "mass_v"});
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    if (with_energy) {
      t.add({rec.times[k], rec.mass_u[k], rec.mass_v[k], rec.energy[k]});
    } else {
      t.add({rec.times[k], rec.mass_u[k], rec.mass_v[k]});
    }
  }
  return t;
}

// ---- subcommands ---------------------------------------------------------

inline std::vector<Artifact> run_simulate(const RunConfig& c) {
  const DiscreteModel m(spec_from_config(c), cells_from_config(c));
  const TrajectoryRecord rec = simulate(initial_from_config(c, m.grid), m, integrator_from_config(c));
  Table summary = echo_table(c, {"outcome", "t_final", "steps", "final_sup_u", "final_sup_v", "max_clip"});
  summary.add({std::string(to_string(rec.outcome)), rec.final_state.t, static_cast<long>(rec.steps),
               rec.final_sup_u, rec.final_sup_v, rec.max_clip});
  return {{"trajectory.csv", trajectory_table(c, rec)},
          {"final.csv", profile_table(c, rec.final_state, m.grid)},
          {"summary.csv", summary}};
}

inline std::vector<Artifact> run_steady(const RunConfig& c) {
  const DiscreteModel m(spec_from_config(c), cells_from_config(c));
  SteadyState st = max_steady_state(m, steady_from_config(c));
  const SpectrumReport rep = analyze(st.profile, m);
  Table summary = echo_table(c, {"provenance", "residual", "biomass_u", "biomass_v", "lambda1", "verdict",
                                 "monotonicity", "march_time"});
  summary.add({std::string(to_string(st.provenance)), st.residual_norm, m.grid.integrate(st.profile.u),
               m.grid.integrate(st.profile.v), rep.lambda1, std::string(to_string(rep.verdict)),
               std::string(to_string(profile_monotonicity(st.profile))), st.march_time});
  return {{"steady.csv", profile_table(c, st.profile, m.grid)}, {"steady_summary.csv", summary}};
}

inline std::vector<Artifact> run_eigen(const RunConfig& c) {
  const DiscreteModel m(spec_from_config(c), cells_from_config(c));
  const std::string& which = c.text("run.state");
  FieldPair state(m.n());
  if (which == "max") {
    state = max_steady_state(m, steady_from_config(c)).profile;
  } else if (which != "zero") {
    throw Error(ErrorCode::SchemaError, "run.state must be zero or max, got '" + which + "'");
  }
  const SpectrumReport rep = analyze(state, m);
  Table fn = echo_table(c, {"x", "phi_u", "phi_v"});
  for (std::size_t i = 0; i < m.n(); ++i) fn.add({m.x(i), rep.phi_u[i], rep.phi_v[i]});
  Table summary = echo_table(c, {"state", "lambda1", "lambda2", "rayleigh_check", "band_lo", "band_hi",
                                 "band_count", "verdict"});
  summary.add({which, rep.lambda1, rep.lambda2 ? *rep.lambda2 : std::nan(""), rep.rayleigh_check, rep.band_lo,
               rep.band_hi, static_cast<long>(rep.band_count), std::string(to_string(rep.verdict))});
  return {{"eigenfunction.csv", fn}, {"eigen_summary.csv", summary}};
}

inline std::vector<Artifact> run_regime(const RunConfig& c) {
  const ModelSpec spec = spec_from_config(c);
  const RegimeReport r = classify_regime(spec);
  Table t = echo_table(c, {"g_max", "g_min", "fbar_v", "mu1", "mu2", "mu3", "regime", "compactness_ok"});
  t.add({r.g_max, r.g_min, r.fbar_v, r.mu1, r.mu2, r.mu3, std::string(to_string(r.regime)),
         static_cast<long>(r.compactness_ok)});
  return {{"regime.csv", t}};
}

/// m2*(q) for q = model.q, or for every sweep value when sweep.variable = q.
inline std::vector<Artifact> run_critical_m2(const RunConfig& c, unsigned jobs = 1) {
  const ModelSpec spec = spec_from_config(c);
  const std::size_t n = cells_from_config(c);
  const std::vector<double> qs = c.text("sweep.variable") == "q" ? sweep_values(c) : std::vector<double>{spec.q()};
  const auto res = parallel_map<CriticalMortality>(qs.size(), jobs, [&](std::size_t k) {
    return critical_m2(spec, qs[k], n);
  });
  Table t = echo_table(c, {"q", "m2_star", "bracket_lo", "bracket_hi", "lambda1_at_root"});
  for (std::size_t k = 0; k < qs.size(); ++k) {
    t.add({qs[k], res[k].m2_star, res[k].bracket_lo, res[k].bracket_hi, res[k].lambda1_at_root});
  }
  return {{"critical_m2.csv", t}};
}

struct SweepPoint {
  double value = 0.0;
  std::string bc;
  double biomass_u = std::nan("");
  double biomass_v = std::nan("");
  std::string outcome;
  FieldPair profile;
};

/// Maximal steady state for every (value, boundary type) pair.
inline std::vector<SweepPoint> sweep_max_states(const RunConfig& c, unsigned jobs) {
  const std::string key = "model." + c.text("sweep.variable");
  if (!RunConfig::known(key)) throw Error(ErrorCode::SchemaError, "sweep.variable '" + key + "' is not a model key");
  const std::vector<double> values = sweep_values(c);
  const std::vector<std::string> bcs = split_list(c.text("sweep.bc"));
  for (const auto& b : bcs) boundary_type(b);
  const std::size_t n = cells_from_config(c);
  const SteadyConfig sc = steady_from_config(c);
  return parallel_map<SweepPoint>(bcs.size() * values.size(), jobs, [&](std::size_t k) {
    const std::string& bc = bcs[k / values.size()];
    const double value = values[k % values.size()];
    RunConfig local = c;
    local.set(key, exact_number(value));
    local.set("model.b_d", short_number(boundary_type(bc).b_d));
    SweepPoint pt;
    pt.value = value;
    pt.bc = bc;
    const DiscreteModel m(spec_from_config(local), n);
    try {
      const SteadyState st = max_steady_state(m, sc);
      pt.biomass_u = m.grid.integrate(st.profile.u);
      pt.biomass_v = m.grid.integrate(st.profile.v);
      pt.outcome = st.positive(sc.march.extinct_tol) ? to_string(Outcome::ConvergedPositive)
                                                     : to_string(Outcome::Extinct);
      pt.profile = st.profile;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::HitHorizon) throw;
      pt.outcome = to_string(Outcome::HitHorizon);
    }
    return pt;
  });
}

inline std::vector<Artifact> run_sweep(const RunConfig& c, unsigned jobs = 1) {
  const std::vector<SweepPoint> pts = sweep_max_states(c, jobs);
  Table t = echo_table(c, {c.text("sweep.variable"), "bc_type", "biomass_u", "biomass_v", "outcome"});
  for (const auto& p : pts) t.add({p.value, p.bc, p.biomass_u, p.biomass_v, p.outcome});
  return {{"sweep.csv", t}};
}

// ---- presets -------------------------------------------------------------

struct InitialRow {
  double u_left, v_left, u_right, v_right;
};

inline const std::vector<InitialRow>& bistable_rows(const std::string& preset) {
  static const std::vector<InitialRow> ff = {
      {0.0, 0.0, 0.0, 0.04}, {0.0, 0.0, 0.0, 0.1}, {0.1, 0.0, 0.1, 0.1}, {0.1, 0.4, 0.1, 0.4}};
  static const std::vector<InitialRow> nfnf = {{0.0, 0.0, 0.0, 0.08}, {0.1, 0.0, 0.1, 0.4}, {0.1, 0.4, 0.1, 0.4}};
  static const std::vector<InitialRow> hetero = {{0.0, 0.0, 0.0, 0.1}, {0.08, 0.0, 0.08, 0.4}, {0.1, 0.4, 0.1, 0.4}};
  if (preset == "fig_bistable_ff") return ff;
  if (preset == "fig_bistable_nfnf") return nfnf;
  if (preset == "fig_bistable_hetero") return hetero;
  throw Error(ErrorCode::UnknownPreset, "no initial rows for '" + preset + "'");
}

struct BistableRun {
  RunConfig config;
  TrajectoryRecord record;
};

inline std::vector<BistableRun> run_bistable_rows(const RunConfig& c, const std::string& preset, unsigned jobs) {
  const auto& rows = bistable_rows(preset);
  const std::size_t n = cells_from_config(c);
  const DiscreteModel m(spec_from_config(c), n);
  return parallel_map<BistableRun>(rows.size(), jobs, [&](std::size_t k) {
    RunConfig local = c;
    local.set("run.initial", "split");
    local.set("run.u0", short_number(rows[k].u_left));
    local.set("run.v0", short_number(rows[k].v_left));
    local.set("run.u0_right", short_number(rows[k].u_right));
    local.set("run.v0_right", short_number(rows[k].v_right));
    BistableRun r{local, simulate(initial_from_config(local, m.grid), m, integrator_from_config(local))};
    return r;
  });
}

inline std::vector<Artifact> run_preset(const std::string& name, const RunConfig& c, unsigned jobs = 1) {
  std::vector<Artifact> out;
  if (name == "fig_biomass_vs_mu") {
    for (auto& a : run_sweep(c, jobs)) out.push_back({name + ".csv", std::move(a.table)});
    return out;
  }
  if (name == "fig_profiles_vs_mu" || name == "fig_profiles_vs_q") {
    const std::string var = c.text("sweep.variable");
    const Grid g(cells_from_config(c), c.number("model.L"));
    for (const auto& p : sweep_max_states(c, jobs)) {
      RunConfig local = c;
      local.set("model." + var, exact_number(p.value));
      local.set("model.b_d", short_number(boundary_type(p.bc).b_d));
      Table t = p.profile.size() == g.n() ? profile_table(local, p.profile, g) : echo_table(local, {"x", "u", "v"});
      t.comments.push_back("outcome = " + p.outcome);
      out.push_back({name + "_" + file_label(p.bc) + "_" + var + "_" + short_number(p.value) + ".csv", std::move(t)});
    }
    return out;
  }
  if (name == "fig_bistable_ff" || name == "fig_bistable_nfnf" || name == "fig_bistable_hetero") {
    const auto runs = run_bistable_rows(c, name, jobs);
    const Grid g(cells_from_config(c), c.number("model.L"));
    Table summary = echo_table(c, {"row", "u0_left", "v0_left", "u0_right", "v0_right", "outcome", "t_final",
                                   "final_sup_u", "final_sup_v", "biomass_u", "biomass_v"});
    const auto& rows = bistable_rows(name);
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const auto& rec = runs[k].record;
      const std::string row = "row" + std::to_string(k + 1);
      out.push_back({name + "_" + row + "_trajectory.csv", trajectory_table(runs[k].config, rec)});
      out.push_back({name + "_" + row + "_final.csv", profile_table(runs[k].config, rec.final_state, g)});
      summary.add({static_cast<long>(k + 1), rows[k].u_left, rows[k].v_left, rows[k].u_right, rows[k].v_right,
                   std::string(to_string(rec.outcome)), rec.final_state.t, rec.final_sup_u, rec.final_sup_v,
                   g.integrate(rec.final_state.u), g.integrate(rec.final_state.v)});
    }
    out.push_back({name + "_summary.csv", std::move(summary)});
    return out;
  }
  throw Error(ErrorCode::UnknownPreset, "unknown preset '" + name + "'");
}

}  // namespace benthic
