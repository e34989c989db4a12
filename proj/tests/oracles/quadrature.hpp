#pragma once

// Composite midpoint quadrature of int |u'|^p + mu |u'|^q over a 1D P1 function,
// evaluating the interpolant pointwise and differentiating it numerically on each
// subinterval.

#include <cmath>

#include <Eigen/Core>

#include "dpobs/mesh.hpp"

namespace oracle {

inline double interpolant_1d(const dpobs::Mesh& mesh, const Eigen::VectorXd& u, dpobs::Index e, double x) {
  const auto& el = mesh.elements[static_cast<std::size_t>(e)];
  const double x0 = mesh.nodes[static_cast<std::size_t>(el[0])][0], x1 = mesh.nodes[static_cast<std::size_t>(el[1])][0];
  const double t = (x - x0) / (x1 - x0);
  return (1.0 - t) * u[el[0]] + t * u[el[1]];
}

inline double gradient_modular_midpoint(const dpobs::Mesh& mesh, const std::vector<double>& mu, double p, double q,
                                        const Eigen::VectorXd& u, int points_per_element = 1000) {
  double total = 0.0;
  for (dpobs::Index e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[static_cast<std::size_t>(e)];
    const double x0 = mesh.nodes[static_cast<std::size_t>(el[0])][0], x1 = mesh.nodes[static_cast<std::size_t>(el[1])][0];
    const double h = (x1 - x0) / points_per_element;
    for (int k = 0; k < points_per_element; ++k) {
      const double a = x0 + k * h, b = a + h;
      const double d = std::abs((interpolant_1d(mesh, u, e, b) - interpolant_1d(mesh, u, e, a)) / h);
      total += h * (std::pow(d, p) + mu[static_cast<std::size_t>(e)] * std::pow(d, q));
    }
  }
  return total;
}

/// Lumped (trapezoidal) value modular on a uniform 1D grid, written out by hand.
inline double value_modular_trapezoid(int n_elements, const std::vector<double>& mu_nodes, double p, double q,
                                      const Eigen::VectorXd& u) {
  const double h = 1.0 / n_elements;
  double total = 0.0;
  for (int i = 0; i <= n_elements; ++i) {
    const double w = (i == 0 || i == n_elements) ? h / 2 : h;
    total += w * (std::pow(std::abs(u[i]), p) + mu_nodes[static_cast<std::size_t>(i)] * std::pow(std::abs(u[i]), q));
  }
  return total;
}

}  // namespace oracle
