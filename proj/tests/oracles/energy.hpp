#pragma once

// Independent double-phase energy: element gradients are recomputed from the
// node coordinates instead of the stored gradient maps.
//   E(u) = sum_e |e| (g^p / p + mu_e g^q / q),  g = sqrt(|grad u|^2 + eps^2)

#include <cmath>

#include <Eigen/Core>
#include <Eigen/LU>

#include "dpobs/mesh.hpp"

namespace oracle {

inline Eigen::Vector2d p1_gradient(const dpobs::Mesh& mesh, dpobs::Index e, const Eigen::VectorXd& u, double& area) {
  const auto& el = mesh.elements[static_cast<std::size_t>(e)];
  if (mesh.dim == 1) {
    const double x0 = mesh.nodes[static_cast<std::size_t>(el[0])][0], x1 = mesh.nodes[static_cast<std::size_t>(el[1])][0];
    area = std::abs(x1 - x0);
    return {(u[el[1]] - u[el[0]]) / (x1 - x0), 0.0};
  }
  const auto& a = mesh.nodes[static_cast<std::size_t>(el[0])];
  const auto& b = mesh.nodes[static_cast<std::size_t>(el[1])];
  const auto& c = mesh.nodes[static_cast<std::size_t>(el[2])];
  // Solve [b-a; c-a] g = [u_b - u_a; u_c - u_a]
  Eigen::Matrix2d M;
  M << b[0] - a[0], b[1] - a[1], c[0] - a[0], c[1] - a[1];
  area = 0.5 * std::abs(M.determinant());
  return M.inverse() * Eigen::Vector2d(u[el[1]] - u[el[0]], u[el[2]] - u[el[0]]);
}

inline double energy(const dpobs::Mesh& mesh, const std::vector<double>& mu, double p, double q, double eps,
                     const Eigen::VectorXd& u) {
  double total = 0.0;
  for (dpobs::Index e = 0; e < mesh.num_elements(); ++e) {
    double area = 0.0;
    const Eigen::Vector2d g = p1_gradient(mesh, e, u, area);
    const double s = std::sqrt(g.squaredNorm() + eps * eps);
    total += area * (std::pow(s, p) / p + mu[static_cast<std::size_t>(e)] * std::pow(s, q) / q);
  }
  return total;
}

/// Central difference of the energy along v.
inline double energy_directional(const dpobs::Mesh& mesh, const std::vector<double>& mu, double p, double q, double eps,
                                 const Eigen::VectorXd& u, const Eigen::VectorXd& v, double t) {
  return (energy(mesh, mu, p, q, eps, u + t * v) - energy(mesh, mu, p, q, eps, u - t * v)) / (2.0 * t);
}

/// The 1D uniform-grid Laplacian stiffness (1/h)[-1, 2, -1] with half diagonal at the ends.
inline Eigen::MatrixXd stiffness_1d(int n_elements, double length) {
  const double h = length / n_elements;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n_elements + 1, n_elements + 1);
  for (int e = 0; e < n_elements; ++e) {
    K(e, e) += 1.0 / h;
    K(e + 1, e + 1) += 1.0 / h;
    K(e, e + 1) -= 1.0 / h;
    K(e + 1, e) -= 1.0 / h;
  }
  return K;
}

}  // namespace oracle
