#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "benthic/error.hpp"
#include "benthic/numerics.hpp"

namespace benthic {

enum class GrowthKind { Logistic, WeakAllee, StrongAllee, Custom };

inline const char* to_string(GrowthKind k) {
  switch (k) {
    case GrowthKind::Logistic: return "logistic";
    case GrowthKind::WeakAllee: return "weak_allee";
    case GrowthKind::StrongAllee: return "strong_allee";
    case GrowthKind::Custom: return "custom";
  }
  return "custom";
}

using ProfileFn = std::function<double(double)>;
using RateFn = std::function<double(double, double)>;

/// Per-capita benthic growth law g(x, v) together with its landmarks:
/// carrying capacity r(x), peak location s(x) and, for a strong Allee
/// effect, the threshold h(x). f = v g is the population growth rate.
class GrowthModel {
 public:
  struct Definition {
    GrowthKind kind = GrowthKind::Custom;
    RateFn g;
    RateFn g_v;
    ProfileFn r;
    ProfileFn s;
    ProfileFn h;               // empty unless kind == StrongAllee
    double M = 1.0;            // upper bound of r over the river
    bool homogeneous = false;  // g does not depend on x
    RateFn antiderivative;     // F(x, v) = int_0^v f(x, s) ds, optional
    ProfileFn fv_max;          // max over v >= 0 of f_v(x, v), optional
  };

  explicit GrowthModel(Definition def) : def_(std::make_shared<const Definition>(std::move(def))) {
    if (!def_->g || !def_->g_v || !def_->r || !def_->s) {
      throw Error(ErrorCode::NonconformingGrowth, "growth model needs g, g_v, r and s");
    }
    if (def_->kind == GrowthKind::StrongAllee && !def_->h) {
      throw Error(ErrorCode::NonconformingGrowth, "strong Allee growth needs a threshold h(x)");
    }
    if (!(def_->M > 0.0)) throw Error(ErrorCode::NonconformingGrowth, "M must be positive");
  }

  GrowthKind kind() const { return def_->kind; }
  bool homogeneous() const { return def_->homogeneous; }
  bool has_threshold() const { return static_cast<bool>(def_->h); }
  double M() const { return def_->M; }

  double g(double x, double v) const { return def_->g(x, v); }
  double g_v(double x, double v) const { return def_->g_v(x, v); }
  double f(double x, double v) const { return v * def_->g(x, v); }
  double f_v(double x, double v) const { return def_->g(x, v) + v * def_->g_v(x, v); }
  double r(double x) const { return def_->r(x); }
  double s(double x) const { return def_->s(x); }
  double peak(double x) const { return g(x, s(x)); }

  double h(double x) const {
    if (!def_->h) throw Error(ErrorCode::PreconditionViolated, "threshold h(x) needs strong Allee growth");
    return def_->h(x);
  }

  /// F(x, v): analytic when the model supplies it, adaptive quadrature otherwise.
  double F(double x, double v) const {
    if (def_->antiderivative) return def_->antiderivative(x, v);
    return numerics::integrate([&](double w) { return f(x, w); }, 0.0, v, 1e-13);
  }

  /// max over v >= 0 of f_v(x, v); the search range [0, 2M] covers the
  /// region where (g2) forces f_v to be decreasing past r.
  double fv_max(double x) const {
    if (def_->fv_max) return def_->fv_max(x);
    return numerics::scan_max([&](double w) { return f_v(x, w); }, 0.0, 2.0 * M(), 256).value;
  }

 private:
  std::shared_ptr<const Definition> def_;
};

/// g(x, v) = (1 - v)(v - a(x)) with 0 < a(x) < 1: strong Allee effect with
/// threshold a(x) and unit carrying capacity.
inline GrowthModel allee_cubic(ProfileFn threshold, bool homogeneous = false) {
  GrowthModel::Definition def;
  def.kind = GrowthKind::StrongAllee;
  def.homogeneous = homogeneous;
  def.g = [a = threshold](double x, double v) { return (1.0 - v) * (v - a(x)); };
  def.g_v = [a = threshold](double x, double v) { return 1.0 + a(x) - 2.0 * v; };
  def.r = [](double) { return 1.0; };
  def.s = [a = threshold](double x) { return 0.5 * (1.0 + a(x)); };
  def.h = threshold;
  def.M = 1.0;
  def.antiderivative = [a = threshold](double x, double v) {
    const double ax = a(x);
    return -v * v * v * v / 4.0 + (1.0 + ax) * v * v * v / 3.0 - ax * v * v / 2.0;
  };
  def.fv_max = [a = threshold](double x) {
    const double ax = a(x);
    return (1.0 + ax) * (1.0 + ax) / 3.0 - ax;
  };
  return GrowthModel(std::move(def));
}

inline GrowthModel allee_cubic(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::NonconformingGrowth, "Allee threshold must lie in (0, 1)");
  }
  return allee_cubic([threshold](double) { return threshold; }, true);
}

/// g(v) = rate (1 - v / K).
inline GrowthModel logistic(double rate, double capacity = 1.0) {
  if (!(rate > 0.0 && capacity > 0.0)) {
    throw Error(ErrorCode::NonconformingGrowth, "logistic rate and capacity must be positive");
  }
  GrowthModel::Definition def;
  def.kind = GrowthKind::Logistic;
  def.homogeneous = true;
  def.g = [=](double, double v) { return rate * (1.0 - v / capacity); };
  def.g_v = [=](double, double) { return -rate / capacity; };
  def.r = [=](double) { return capacity; };
  def.s = [](double) { return 0.0; };
  def.M = capacity;
  def.antiderivative = [=](double, double v) {
    return rate * (v * v / 2.0 - v * v * v / (3.0 * capacity));
  };
  def.fv_max = [=](double) { return rate; };
  return GrowthModel(std::move(def));
}

/// g(v) = (1 - v)(v + b) with 0 < b < 1: weak Allee effect.
inline GrowthModel weak_allee(double b) {
  if (!(b > 0.0 && b < 1.0)) throw Error(ErrorCode::NonconformingGrowth, "weak Allee b must lie in (0, 1)");
  GrowthModel::Definition def;
  def.kind = GrowthKind::WeakAllee;
  def.homogeneous = true;
  def.g = [=](double, double v) { return (1.0 - v) * (v + b); };
  def.g_v = [=](double, double v) { return 1.0 - b - 2.0 * v; };
  def.r = [](double) { return 1.0; };
  def.s = [=](double) { return 0.5 * (1.0 - b); };
  def.M = 1.0;
  def.antiderivative = [=](double, double v) {
    return -v * v * v * v / 4.0 + (1.0 - b) * v * v * v / 3.0 + b * v * v / 2.0;
  };
  def.fv_max = [=](double) { return (1.0 - b) * (1.0 - b) / 3.0 + b; };
  return GrowthModel(std::move(def));
}

/// g == 0; used for closed conservative configurations.
inline GrowthModel zero_growth(double capacity = 1.0) {
  GrowthModel::Definition def;
  def.kind = GrowthKind::Custom;
  def.homogeneous = true;
  def.g = [](double, double) { return 0.0; };
  def.g_v = [](double, double) { return 0.0; };
  def.r = [=](double) { return capacity; };
  def.s = [](double) { return 0.0; };
  def.M = capacity;
  def.antiderivative = [](double, double) { return 0.0; };
  def.fv_max = [](double) { return 0.0; };
  return GrowthModel(std::move(def));
}

}  // namespace benthic
