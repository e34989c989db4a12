#pragma once

// Double-phase modular rho_H(u) = int |u|^p + mu(x)|u|^q dx, the induced
// Luxemburg norm, and the weighted seminorm (int mu |u|^q)^(1/q), evaluated on
// P1 functions.
//
// Zero-order integrands use vertex lumping; gradient integrands use the exact
// one-point rule (grad u is constant per element). mu is piecewise constant.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dpobs/errors.hpp"
#include "dpobs/expression.hpp"
#include "dpobs/mesh.hpp"

namespace dpobs {

using MeshPtr = std::shared_ptr<const Mesh>;

/// Nodal coefficient vector of a P1 function on a fixed mesh.
class DiscreteFunction {
 public:
  DiscreteFunction() = default;

  DiscreteFunction(MeshPtr mesh, Eigen::VectorXd values) : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (!mesh_) throw ConfigurationError("discrete function without mesh");
    if (values_.size() != mesh_->num_nodes()) {
      throw ConfigurationError("nodal value count " + std::to_string(values_.size()) + " does not match node count " +
                               std::to_string(mesh_->num_nodes()));
    }
    if (!values_.allFinite()) throw ConfigurationError("discrete function has non-finite nodal values");
  }

  static DiscreteFunction zero(MeshPtr mesh) {
    const Index n = mesh->num_nodes();
    return DiscreteFunction(std::move(mesh), Eigen::VectorXd::Zero(n));
  }

  /// Nodal interpolant of a closed-form field.
  template <class Field>
  static DiscreteFunction interpolate(MeshPtr mesh, const Field& field) {
    Eigen::VectorXd v(mesh->num_nodes());
    for (Index i = 0; i < mesh->num_nodes(); ++i) {
      const Point& x = mesh->nodes[static_cast<std::size_t>(i)];
      v[i] = field(x[0], x[1]);
    }
    return DiscreteFunction(std::move(mesh), std::move(v));
  }

  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  const Eigen::VectorXd& values() const { return values_; }
  Index size() const { return values_.size(); }
  double operator[](Index i) const { return values_[i]; }

 private:
  MeshPtr mesh_;
  Eigen::VectorXd values_;
};

inline DiscreteFunction operator-(const DiscreteFunction& a, const DiscreteFunction& b) {
  if (a.mesh_ptr() != b.mesh_ptr()) throw ConfigurationError("discrete functions live on different meshes");
  return DiscreteFunction(a.mesh_ptr(), a.values() - b.values());
}

inline DiscreteFunction operator*(double c, const DiscreteFunction& a) {
  return DiscreteFunction(a.mesh_ptr(), c * a.values());
}

/// Exponents and weight of H(x,t) = t^p + mu(x) t^q.
struct PhaseConfig {
  double p = 2.0;
  double q = 3.0;
  std::vector<double> mu;  // one value per element

  /// mu sampled at element barycenters.
  template <class Field>
  static PhaseConfig sampled(const Mesh& mesh, double p, double q, const Field& mu_field) {
    PhaseConfig cfg{p, q, {}};
    cfg.mu.resize(static_cast<std::size_t>(mesh.num_elements()));
    for (Index e = 0; e < mesh.num_elements(); ++e) {
      const Point c = mesh.barycenter(e);
      cfg.mu[static_cast<std::size_t>(e)] = mu_field(c[0], c[1]);
    }
    cfg.validate();
    return cfg;
  }

  static PhaseConfig uniform(const Mesh& mesh, double p, double q, double mu_value) {
    return sampled(mesh, p, q, [mu_value](double, double) { return mu_value; });
  }

  void validate() const {
    // p == q is admitted so that the linear case p = q = 2 can be posed; the hypothesis
    // validator reports it as outside the strict double-phase regime.
    if (!(p > 1.0) || !(q >= p) || !std::isfinite(q)) {
      throw ConfigurationError("phase exponents must satisfy 1 < p <= q (got p=" + std::to_string(p) +
                               ", q=" + std::to_string(q) + ")");
    }
    for (double m : mu) {
      if (!(m >= 0.0) || !std::isfinite(m)) throw ConfigurationError("phase weight mu must be finite and >= 0");
    }
  }

  void check_mesh(const Mesh& mesh) const {
    if (static_cast<Index>(mu.size()) != mesh.num_elements()) {
      throw ConfigurationError("phase weight has " + std::to_string(mu.size()) + " values but mesh has " +
                               std::to_string(mesh.num_elements()) + " elements");
    }
  }
};

struct ModularValue {
  double value = 0.0;
  double p_part = 0.0;
  double q_part = 0.0;
};

namespace detail {

/// Splits rho_H into its p- and q-contributions.
inline ModularValue modular_parts(const DiscreteFunction& f, const PhaseConfig& cfg, bool of_gradient) {
  const Mesh& mesh = f.mesh();
  cfg.check_mesh(mesh);
  ModularValue out;
  const int m = mesh.nodes_per_element();
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const double vol = mesh.element_volumes[e];
    const double mu = cfg.mu[static_cast<std::size_t>(e)];
    if (of_gradient) {
      const double g = mesh.element_gradient(e, f.values()).norm();
      out.p_part += vol * std::pow(g, cfg.p);
      out.q_part += vol * mu * std::pow(g, cfg.q);
    } else {
      double sp = 0.0, sq = 0.0;
      for (int k = 0; k < m; ++k) {
        const double a = std::abs(f[mesh.elements[e][k]]);
        sp += std::pow(a, cfg.p);
        sq += std::pow(a, cfg.q);
      }
      out.p_part += vol / m * sp;
      out.q_part += vol / m * mu * sq;
    }
  }
  out.value = out.p_part + out.q_part;
  return out;
}

}  // namespace detail

/// rho_H(f), or rho_H(|grad f|) when `of_gradient` is set.
inline ModularValue modular(const DiscreteFunction& f, const PhaseConfig& cfg, bool of_gradient = false) {
  return detail::modular_parts(f, cfg, of_gradient);
}

/// inf { tau > 0 : rho_H(f / tau) <= 1 }.
///
/// rho_H(f/tau) = P/tau^p + Q/tau^q with P, Q the two parts of rho_H(f), so the
/// map is evaluated in closed form. Bracketing starts at tau = 1 and doubles or
/// halves until the sign of rho_H(f/tau) - 1 flips; bisection then runs until the
/// bracket width is below 1e-12 * min(1, tau) or the floating-point resolution of tau.
inline double luxemburg_norm(const DiscreteFunction& f, const PhaseConfig& cfg, bool of_gradient = false) {
  const ModularValue parts = detail::modular_parts(f, cfg, of_gradient);
  if (parts.value == 0.0) return 0.0;
  const auto excess = [&](double tau) {
    return parts.p_part / std::pow(tau, cfg.p) + parts.q_part / std::pow(tau, cfg.q) - 1.0;
  };
  double lo = 1.0, hi = 1.0;
  int expansions = 0;
  if (excess(1.0) > 0.0) {
    while (excess(hi) > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (++expansions > 200) throw ConfigurationError("Luxemburg bracket expansion failed");
    }
  } else {
    while (excess(lo) <= 0.0) {
      hi = lo;
      lo *= 0.5;
      if (++expansions > 200) throw ConfigurationError("Luxemburg bracket expansion failed");
    }
  }
  // invariant: excess(lo) > 0 >= excess(hi)
  for (int it = 0; it < 400; ++it) {
    const double width = hi - lo;
    if (width <= 1e-12 * std::min(1.0, hi) || width <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// (int mu |f|^q dx)^(1/q) with lumped quadrature.
inline double weighted_seminorm(const DiscreteFunction& f, const PhaseConfig& cfg) {
  return std::pow(detail::modular_parts(f, cfg, false).q_part, 1.0 / cfg.q);
}

/// Lumped L^r(Omega) norm, used by the hypothesis checks.
inline double lumped_lr_norm(const DiscreteFunction& f, double r) {
  const Eigen::VectorXd w = f.mesh().lumped_weights();
  double s = 0.0;
  for (Index i = 0; i < f.size(); ++i) s += w[i] * std::pow(std::abs(f[i]), r);
  return std::pow(s, 1.0 / r);
}

/// Discrete V-norm ||grad u||_H + ||u||_H.
inline double v_norm(const DiscreteFunction& f, const PhaseConfig& cfg) {
  return luxemburg_norm(f, cfg, true) + luxemburg_norm(f, cfg, false);
}

}  // namespace dpobs
