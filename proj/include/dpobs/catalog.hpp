#pragma once

// Built-in catalog of multivalued reaction terms f(x, s, xi) and boundary
// potentials j(x, s). Each entry carries the growth constants that the
// hypothesis validator needs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dpobs/errors.hpp"
#include "dpobs/mesh.hpp"

namespace dpobs {

using ParamMap = std::map<std::string, double>;

namespace detail {

inline double param_or(const ParamMap& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

inline void require_known_params(const std::string& entry, const ParamMap& params,
                                 const std::vector<std::string>& known) {
  for (const auto& [key, value] : params) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigurationError("catalog entry '" + entry + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) throw ConfigurationError("parameter '" + key + "' of '" + entry + "' is not finite");
  }
}

inline double sign(double s) { return s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Reaction f(x, s, xi)

/// Constants of the growth bounds |eta| <= a_f|xi|^(p/q1') + b_f|s|^(q1-1) + c_f and
/// |eta s| <= e_f|xi|^theta2 + g_f|s|^theta3 + d_f.
struct ReactionGrowth {
  double a_f = 0.0, b_f = 0.0, c_f = 0.0, d_f = 0.0, e_f = 0.0, g_f = 0.0;
  double theta2 = 1.0, theta3 = 1.0;
};

enum class SelectionKind { lower, upper, midpoint, parameterized };

struct SelectionRule {
  SelectionKind kind = SelectionKind::midpoint;
  double lambda = 0.5;  // only read for `parameterized`

  /// Convex weight on the upper bound.
  double weight() const {
    switch (kind) {
      case SelectionKind::lower: return 0.0;
      case SelectionKind::upper: return 1.0;
      case SelectionKind::midpoint: return 0.5;
      case SelectionKind::parameterized: return lambda;
    }
    return 0.5;
  }

  std::string name() const {
    switch (kind) {
      case SelectionKind::lower: return "lower";
      case SelectionKind::upper: return "upper";
      case SelectionKind::midpoint: return "midpoint";
      case SelectionKind::parameterized: {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "lambda:%.17g", lambda);
        return buf;
      }
    }
    return "midpoint";
  }

  /// Accepts "lower", "upper", "midpoint" or "lambda:<value in [0,1]>".
  static SelectionRule parse(const std::string& text) {
    if (text == "lower") return {SelectionKind::lower, 0.0};
    if (text == "upper") return {SelectionKind::upper, 1.0};
    if (text == "midpoint") return {SelectionKind::midpoint, 0.5};
    if (text.rfind("lambda:", 0) == 0) {
      char* end = nullptr;
      const std::string num = text.substr(7);
      const double v = std::strtod(num.c_str(), &end);
      if (end == num.c_str() || *end != '\0' || !(v >= 0.0 && v <= 1.0)) {
        throw ConfigurationError("selection weight must be a number in [0,1]: '" + text + "'");
      }
      return {SelectionKind::parameterized, v};
    }
    throw ConfigurationError("unknown selection rule '" + text + "'");
  }

  bool operator==(const SelectionRule& o) const { return kind == o.kind && weight() == o.weight(); }
};

/// One bound of the reaction interval with its partial derivatives in (s, xi).
struct ReactionBound {
  double value = 0.0;
  double d_s = 0.0;
  Eigen::Vector2d d_xi = Eigen::Vector2d::Zero();
};

struct ReactionSpec {
  enum class Kind { constant, interval, symmetric_growth, affine };

  Kind kind = Kind::constant;
  ParamMap params;
  SelectionRule selection;
  ReactionGrowth growth;

  static std::vector<std::string> catalog_names() { return {"constant", "interval", "symmetric_growth", "affine"}; }

  /// constant:         f = [c, c]
  /// interval:         f = [lo, hi]
  /// symmetric_growth: f = [-(a|s| + b), a|s| + b]
  /// affine:           f = {c0 + c1 s + c2 xi_x}
  static ReactionSpec from_catalog(const std::string& name, const ParamMap& params, SelectionRule selection = {}) {
    ReactionSpec r;
    r.params = params;
    r.selection = selection;
    if (name == "constant") {
      detail::require_known_params(name, params, {"c"});
      r.kind = Kind::constant;
      const double c = std::abs(detail::param_or(params, "c", 0.0));
      r.growth.c_f = c;
      r.growth.g_f = c;
    } else if (name == "interval") {
      detail::require_known_params(name, params, {"lo", "hi"});
      r.kind = Kind::interval;
      const double lo = detail::param_or(params, "lo", 0.0), hi = detail::param_or(params, "hi", 0.0);
      if (lo > hi) throw ConfigurationError("interval reaction requires lo <= hi");
      const double m = std::max(std::abs(lo), std::abs(hi));
      r.growth.c_f = m;
      r.growth.g_f = m;
    } else if (name == "symmetric_growth") {
      detail::require_known_params(name, params, {"a", "b"});
      r.kind = Kind::symmetric_growth;
      const double a = detail::param_or(params, "a", 1.0), b = detail::param_or(params, "b", 1.0);
      if (a < 0.0 || b < 0.0) throw ConfigurationError("symmetric_growth requires a, b >= 0");
      r.growth.b_f = a;
      r.growth.c_f = b;
      // |eta s| <= a s^2 + b|s| <= (a + b) s^2 + b
      r.growth.g_f = a + b;
      r.growth.theta3 = 2.0;
      r.growth.d_f = b;
    } else if (name == "affine") {
      detail::require_known_params(name, params, {"c0", "c1", "c2"});
      r.kind = Kind::affine;
      const double c0 = std::abs(detail::param_or(params, "c0", 0.0));
      const double c1 = std::abs(detail::param_or(params, "c1", 0.0));
      const double c2 = std::abs(detail::param_or(params, "c2", 0.0));
      r.growth.a_f = c2;
      r.growth.b_f = c1;
      r.growth.c_f = c0;
      // Young on |xi||s| and |s| <= s^2 + 1
      r.growth.e_f = 0.5 * c2;
      r.growth.theta2 = 2.0;
      r.growth.g_f = c0 + c1 + 0.5 * c2;
      r.growth.theta3 = 2.0;
      r.growth.d_f = c0;
    } else {
      throw ConfigurationError("unknown reaction catalog entry '" + name + "'");
    }
    return r;
  }

  static ReactionSpec constant(double c) { return from_catalog("constant", {{"c", c}}); }

  std::string name() const {
    switch (kind) {
      case Kind::constant: return "constant";
      case Kind::interval: return "interval";
      case Kind::symmetric_growth: return "symmetric_growth";
      case Kind::affine: return "affine";
    }
    return "constant";
  }

  ReactionBound lower(const Point& x, double s, const Eigen::Vector2d& xi) const { return bound(x, s, xi, false); }
  ReactionBound upper(const Point& x, double s, const Eigen::Vector2d& xi) const { return bound(x, s, xi, true); }

  /// The selected value (1-w) f_lo + w f_hi with its partials.
  ReactionBound select(const Point& x, double s, const Eigen::Vector2d& xi, const SelectionRule& rule) const {
    const ReactionBound lo = lower(x, s, xi), hi = upper(x, s, xi);
    const double w = rule.weight();
    ReactionBound out;
    out.value = (1.0 - w) * lo.value + w * hi.value;
    out.d_s = (1.0 - w) * lo.d_s + w * hi.d_s;
    out.d_xi = (1.0 - w) * lo.d_xi + w * hi.d_xi;
    if (!std::isfinite(out.value)) throw EvaluationError("reaction selection produced a non-finite value");
    return out;
  }

  ReactionBound select(const Point& x, double s, const Eigen::Vector2d& xi) const { return select(x, s, xi, selection); }

  /// True when the selected value cannot depend on (s, xi), which makes the problem a QP for p = q = 2.
  bool state_independent(const SelectionRule& rule) const {
    switch (kind) {
      case Kind::constant:
      case Kind::interval: return true;
      case Kind::symmetric_growth: return rule.weight() == 0.5;
      case Kind::affine:
        return detail::param_or(params, "c1", 0.0) == 0.0 && detail::param_or(params, "c2", 0.0) == 0.0;
    }
    return false;
  }

 private:
  ReactionBound bound(const Point&, double s, const Eigen::Vector2d& xi, bool upper_bound) const {
    ReactionBound b;
    switch (kind) {
      case Kind::constant: b.value = detail::param_or(params, "c", 0.0); break;
      case Kind::interval: b.value = detail::param_or(params, upper_bound ? "hi" : "lo", 0.0); break;
      case Kind::symmetric_growth: {
        const double a = detail::param_or(params, "a", 1.0), c = detail::param_or(params, "b", 1.0);
        const double sgn = upper_bound ? 1.0 : -1.0;
        b.value = sgn * (a * std::abs(s) + c);
        b.d_s = sgn * a * detail::sign(s);
        break;
      }
      case Kind::affine: {
        const double c0 = detail::param_or(params, "c0", 0.0), c1 = detail::param_or(params, "c1", 0.0);
        const double c2 = detail::param_or(params, "c2", 0.0);
        b.value = c0 + c1 * s + c2 * xi[0];
        b.d_s = c1;
        b.d_xi[0] = c2;
        break;
      }
    }
    return b;
  }
};

// ---------------------------------------------------------------------------
// Boundary potential j(x, s) on Gamma2

/// Constants of |xi| <= a_j|s|^(q2-1) + b_j and |xi s| <= c_j|s|^theta1 + d_j on the Clarke gradient.
struct BoundaryGrowth {
  double a_j = 0.0, b_j = 0.0, c_j = 0.0, d_j = 0.0;
  double theta1 = 1.0;
};

struct ClarkeInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
};

struct BoundaryPotentialSpec {
  enum class Kind { zero, abs, smooth_quadratic, nonconvex_well };

  Kind kind = Kind::zero;
  double alpha = 0.0;
  double beta = 0.0;   // well offset, nonconvex_well only
  double delta = 0.0;  // smoothing width of the single-valued gradient
  BoundaryGrowth growth;

  static std::vector<std::string> catalog_names() { return {"zero", "abs", "smooth_quadratic", "nonconvex_well"}; }

  /// zero:             j = 0
  /// abs:              j = alpha |s|
  /// smooth_quadratic: j = alpha s^2 / 2
  /// nonconvex_well:   j = alpha (|s| - beta)^2 / 2, concave kink at s = 0
  static BoundaryPotentialSpec from_catalog(const std::string& name, const ParamMap& params, double delta = 0.0) {
    BoundaryPotentialSpec j;
    j.delta = delta;
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigurationError("boundary smoothing delta must be >= 0");
    if (name == "zero") {
      detail::require_known_params(name, params, {});
      j.kind = Kind::zero;
    } else if (name == "abs") {
      detail::require_known_params(name, params, {"alpha"});
      j.kind = Kind::abs;
      j.alpha = detail::param_or(params, "alpha", 1.0);
      j.growth = {0.0, j.alpha, j.alpha, 0.0, 1.0};
    } else if (name == "smooth_quadratic") {
      detail::require_known_params(name, params, {"alpha"});
      j.kind = Kind::smooth_quadratic;
      j.alpha = detail::param_or(params, "alpha", 1.0);
      j.growth = {j.alpha, 0.0, j.alpha, 0.0, 2.0};
    } else if (name == "nonconvex_well") {
      detail::require_known_params(name, params, {"alpha", "beta"});
      j.kind = Kind::nonconvex_well;
      j.alpha = detail::param_or(params, "alpha", 1.0);
      j.beta = detail::param_or(params, "beta", 0.5);
      if (j.beta <= 0.0) throw ConfigurationError("nonconvex_well requires beta > 0");
      // |xi| <= alpha|s| + alpha beta, |xi s| <= alpha(1 + beta) s^2 + alpha beta
      j.growth = {j.alpha, j.alpha * j.beta, j.alpha * (1.0 + j.beta), j.alpha * j.beta, 2.0};
    } else {
      throw ConfigurationError("unknown boundary potential '" + name + "'");
    }
    if (j.kind != Kind::zero && !(j.alpha >= 0.0)) throw ConfigurationError("boundary potential requires alpha >= 0");
    return j;
  }

  static BoundaryPotentialSpec zero() { return {}; }

  std::string name() const {
    switch (kind) {
      case Kind::zero: return "zero";
      case Kind::abs: return "abs";
      case Kind::smooth_quadratic: return "smooth_quadratic";
      case Kind::nonconvex_well: return "nonconvex_well";
    }
    return "zero";
  }

  ParamMap params() const {
    switch (kind) {
      case Kind::zero: return {};
      case Kind::abs:
      case Kind::smooth_quadratic: return {{"alpha", alpha}};
      case Kind::nonconvex_well: return {{"alpha", alpha}, {"beta", beta}};
    }
    return {};
  }

  bool nonsmooth() const { return kind == Kind::abs || kind == Kind::nonconvex_well; }
  bool convex() const { return kind != Kind::nonconvex_well; }

  double value(double s) const {
    switch (kind) {
      case Kind::zero: return 0.0;
      case Kind::abs: return alpha * std::abs(s);
      case Kind::smooth_quadratic: return 0.5 * alpha * s * s;
      case Kind::nonconvex_well: {
        const double d = std::abs(s) - beta;
        return 0.5 * alpha * d * d;
      }
    }
    return 0.0;
  }

  /// Clarke generalized gradient, an interval since j is scalar.
  ClarkeInterval clarke(double s) const {
    switch (kind) {
      case Kind::zero: return {0.0, 0.0};
      case Kind::abs:
        if (s == 0.0) return {-alpha, alpha};
        return {alpha * detail::sign(s), alpha * detail::sign(s)};
      case Kind::smooth_quadratic: return {alpha * s, alpha * s};
      case Kind::nonconvex_well: {
        if (s == 0.0) return {-alpha * beta, alpha * beta};
        const double g = alpha * (std::abs(s) - beta) * detail::sign(s);
        return {g, g};
      }
    }
    return {0.0, 0.0};
  }

  /// Generalized directional derivative j°(s; t) = max over the Clarke gradient of xi t.
  double directional(double s, double t) const {
    const ClarkeInterval c = clarke(s);
    return t >= 0.0 ? c.hi * t : c.lo * t;
  }

  /// Single-valued gradient used by Newton. abs: alpha clamp(s/delta, -1, 1) (Moreau envelope);
  /// nonconvex_well: exact gradient outside (-delta, delta), linear interpolation inside.
  double smoothed_gradient(double s, double width) const {
    switch (kind) {
      case Kind::zero: return 0.0;
      case Kind::abs:
        if (width <= 0.0) return alpha * detail::sign(s);
        return alpha * std::clamp(s / width, -1.0, 1.0);
      case Kind::smooth_quadratic: return alpha * s;
      case Kind::nonconvex_well:
        if (width <= 0.0 || std::abs(s) >= width) return alpha * (std::abs(s) - beta) * detail::sign(s);
        return alpha * (width - beta) * s / width;
    }
    return 0.0;
  }

  double smoothed_slope(double s, double width) const {
    switch (kind) {
      case Kind::zero: return 0.0;
      case Kind::abs: return (width > 0.0 && std::abs(s) < width) ? alpha / width : 0.0;
      case Kind::smooth_quadratic: return alpha;
      case Kind::nonconvex_well:
        if (width <= 0.0 || std::abs(s) >= width) return alpha;
        return alpha * (width - beta) / width;
    }
    return 0.0;
  }

  double smoothed_gradient(double s) const { return smoothed_gradient(s, delta); }
  double smoothed_slope(double s) const { return smoothed_slope(s, delta); }
};

}  // namespace dpobs
