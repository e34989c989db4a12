#pragma once

// The discrete constraint set K = { u : u_i <= Phi_i, u = 0 on Gamma1 }, its
// lumped-L2 projection, and the Moreau-Yosida envelope of the indicator I_K in
// the lumped-weighted norm ||v||_w^2 = sum_i w_i v_i^2.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "dpobs/assembly.hpp"
#include "dpobs/errors.hpp"
#include "dpobs/musielak_orlicz.hpp"

namespace dpobs {

struct ConstraintSetK {
  Eigen::VectorXd obstacle;  // +inf entries impose nothing
  std::vector<bool> dirichlet_mask;

  static ConstraintSetK from_problem(const ProblemSpec& spec) { return {spec.obstacle, spec.dirichlet}; }

  bool contains(const Eigen::VectorXd& u) const {
    for (Index i = 0; i < u.size(); ++i) {
      if (dirichlet_mask[static_cast<std::size_t>(i)] && u[i] != 0.0) return false;
      if (u[i] > obstacle[i]) return false;
    }
    return true;
  }
};

/// Nodewise min(u_i, Phi_i), then 0 on Gamma1: the nearest point of K in the lumped norm.
inline Eigen::VectorXd project_K(const Eigen::VectorXd& u, const ConstraintSetK& K) {
  Eigen::VectorXd out(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    out[i] = K.dirichlet_mask[static_cast<std::size_t>(i)] ? 0.0 : std::min(u[i], K.obstacle[i]);
  }
  return out;
}

inline DiscreteFunction project_K(const DiscreteFunction& u, const ConstraintSetK& K) {
  return DiscreteFunction(u.mesh_ptr(), project_K(u.values(), K));
}

inline double lumped_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& weights) {
  return std::sqrt((weights.array() * v.array().square()).sum());
}

/// ||u - P_K u||_w^2 / (2 eps)
inline double moreau_yosida_value(const Eigen::VectorXd& u, const ConstraintSetK& K, const Eigen::VectorXd& weights,
                                  double eps) {
  if (!(eps > 0.0)) throw ConfigurationError("Moreau-Yosida parameter eps must be > 0");
  const double d = lumped_norm(u - project_K(u, K), weights);
  return d * d / (2.0 * eps);
}

/// Gradient of moreau_yosida_value as a dual vector: (w_i / eps)(u_i - (P_K u)_i).
inline Eigen::VectorXd moreau_yosida_grad(const Eigen::VectorXd& u, const ConstraintSetK& K,
                                          const Eigen::VectorXd& weights, double eps) {
  if (!(eps > 0.0)) throw ConfigurationError("Moreau-Yosida parameter eps must be > 0");
  return (weights.array() * (u - project_K(u, K)).array() / eps).matrix();
}

/// Generalized derivative of moreau_yosida_grad (diagonal); 0 at the kink.
inline Eigen::VectorXd moreau_yosida_slope(const Eigen::VectorXd& u, const ConstraintSetK& K,
                                           const Eigen::VectorXd& weights, double eps) {
  if (!(eps > 0.0)) throw ConfigurationError("Moreau-Yosida parameter eps must be > 0");
  Eigen::VectorXd d = Eigen::VectorXd::Zero(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    if (K.dirichlet_mask[static_cast<std::size_t>(i)] || u[i] > K.obstacle[i]) d[i] = weights[i] / eps;
  }
  return d;
}

/// Nodewise max(u_i - Phi_i, 0).
inline Eigen::VectorXd plus_part(const Eigen::VectorXd& u, const Eigen::VectorXd& phi) {
  if (u.size() != phi.size()) throw ConfigurationError("plus_part: size mismatch");
  Eigen::VectorXd out(u.size());
  for (Index i = 0; i < u.size(); ++i) out[i] = std::isfinite(phi[i]) ? std::max(u[i] - phi[i], 0.0) : 0.0;
  return out;
}

inline DiscreteFunction plus_part(const DiscreteFunction& u, const DiscreteFunction& phi) {
  if (u.mesh_ptr() != phi.mesh_ptr()) throw ConfigurationError("plus_part: functions live on different meshes");
  return DiscreteFunction(u.mesh_ptr(), plus_part(u.values(), phi.values()));
}

}  // namespace dpobs
