#pragma once

// Residuals and Jacobians of the penalized double-phase obstacle problem
//
//   A(u) + (1/rho)(u - Phi)^+ - eta + boundary(u) = 0,   eta in f(x, u, grad u),
//
// discretized with P1 elements. Every residual is an integrated (dual) vector:
// entry i is the pairing with the i-th hat function.

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "dpobs/catalog.hpp"
#include "dpobs/errors.hpp"
#include "dpobs/mesh.hpp"
#include "dpobs/musielak_orlicz.hpp"

namespace dpobs {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// One solvable instance: mesh, phase, obstacle, reaction, boundary potential.
///
/// Obstacle values are nodal; +infinity switches the constraint off at that node.
struct ProblemSpec {
  MeshPtr mesh;
  PhaseConfig phase;
  Eigen::VectorXd obstacle;
  ReactionSpec reaction;
  BoundaryPotentialSpec boundary;
  double eps_grad = 0.0;

  // Derived from the mesh by prepare().
  Eigen::VectorXd weights;           // lumped volume weights
  Eigen::VectorXd boundary_weights;  // lumped Gamma2 surface weights
  std::vector<bool> dirichlet;       // Gamma1 nodes
  std::vector<std::vector<Index>> node_elements;

  static ProblemSpec create(MeshPtr mesh, PhaseConfig phase, Eigen::VectorXd obstacle, ReactionSpec reaction,
                            BoundaryPotentialSpec boundary = {}, double eps_grad = 0.0) {
    ProblemSpec spec;
    spec.mesh = std::move(mesh);
    spec.phase = std::move(phase);
    spec.obstacle = std::move(obstacle);
    spec.reaction = std::move(reaction);
    spec.boundary = boundary;
    spec.eps_grad = eps_grad;
    spec.prepare();
    return spec;
  }

  void prepare() {
    if (!mesh) throw ConfigurationError("problem without mesh");
    validate(*mesh);
    phase.validate();
    phase.check_mesh(*mesh);
    if (obstacle.size() != mesh->num_nodes()) throw ConfigurationError("obstacle must have one value per node");
    for (Index i = 0; i < obstacle.size(); ++i) {
      if (std::isnan(obstacle[i]) || obstacle[i] < 0.0) {
        throw ConfigurationError("obstacle must be >= 0 (or +inf) at every node; node " + std::to_string(i));
      }
    }
    if (!(eps_grad >= 0.0) || !std::isfinite(eps_grad)) throw ConfigurationError("eps_grad must be >= 0");
    weights = mesh->lumped_weights();
    boundary_weights = boundary_lumped_weights(*mesh, BoundaryTag::gamma2);
    dirichlet = mesh->dirichlet_mask();
    node_elements.assign(mesh->nodes.size(), {});
    for (Index e = 0; e < mesh->num_elements(); ++e) {
      for (int k = 0; k < mesh->nodes_per_element(); ++k) {
        node_elements[static_cast<std::size_t>(mesh->elements[e][k])].push_back(e);
      }
    }
  }

  Index num_nodes() const { return mesh->num_nodes(); }

  /// True where (p < 2 or q < 2) makes eps_grad = 0 unusable.
  bool needs_gradient_regularization() const { return phase.p < 2.0 || phase.q < 2.0; }

  bool constrained() const {
    for (Index i = 0; i < obstacle.size(); ++i) {
      if (std::isfinite(obstacle[i])) return true;
    }
    return false;
  }
};

/// Residual and Jacobian after Dirichlet rows have been replaced by identity rows.
struct AssembledSystem {
  Eigen::VectorXd residual;
  SparseMatrix jacobian;
  std::vector<bool> dirichlet_mask;
};

namespace detail {

inline void check_state(const ProblemSpec& spec, const Eigen::VectorXd& u) {
  if (u.size() != spec.num_nodes()) throw ConfigurationError("state vector does not match the problem mesh");
}

inline void check_state(const ProblemSpec& spec, const DiscreteFunction& u) {
  if (u.mesh_ptr() != spec.mesh) throw ConfigurationError("discrete function lives on a different mesh");
}

/// Flux coefficient a(g) = g^(p-2) + mu g^(q-2) and b(g) = a'(g)/g on one element.
struct FluxCoefficients {
  double a = 0.0;
  double b = 0.0;
};

inline FluxCoefficients flux_coefficients(const ProblemSpec& spec, double mu, double grad_sq, Index e) {
  const double p = spec.phase.p, q = spec.phase.q, eps = spec.eps_grad;
  const double g2 = grad_sq + eps * eps;
  FluxCoefficients c;
  if (g2 == 0.0) {
    if (p < 2.0 || (q < 2.0 && mu > 0.0)) {
      throw SingularityError("zero gradient on element " + std::to_string(e) +
                             " with exponent below 2 and eps_grad = 0");
    }
    // g^0 = 1 for an exponent of exactly 2, 0 above.
    c.a = (p == 2.0 ? 1.0 : 0.0) + mu * (q == 2.0 ? 1.0 : 0.0);
    return c;
  }
  const double g = std::sqrt(g2);
  c.a = std::pow(g, p - 2.0) + mu * std::pow(g, q - 2.0);
  c.b = (p - 2.0) * std::pow(g, p - 4.0) + mu * (q - 2.0) * std::pow(g, q - 4.0);
  return c;
}

}  // namespace detail

/// <A(u), v> = sum_e |e| (g^(p-2) + mu_e g^(q-2)) grad u . grad v, g = (|grad u|^2 + eps^2)^(1/2).
inline double apply_A(const ProblemSpec& spec, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  detail::check_state(spec, u);
  detail::check_state(spec, v);
  const Mesh& mesh = *spec.mesh;
  double total = 0.0;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Eigen::Vector2d gu = mesh.element_gradient(e, u);
    const Eigen::Vector2d gv = mesh.element_gradient(e, v);
    const auto c = detail::flux_coefficients(spec, spec.phase.mu[static_cast<std::size_t>(e)], gu.squaredNorm(), e);
    total += mesh.element_volumes[e] * c.a * gu.dot(gv);
  }
  return total;
}

inline double apply_A(const ProblemSpec& spec, const DiscreteFunction& u, const DiscreteFunction& v) {
  detail::check_state(spec, u);
  detail::check_state(spec, v);
  return apply_A(spec, u.values(), v.values());
}

/// r with r . v = <A(u), v> for every v.
inline Eigen::VectorXd assemble_A_residual(const ProblemSpec& spec, const Eigen::VectorXd& u) {
  detail::check_state(spec, u);
  const Mesh& mesh = *spec.mesh;
  const int m = mesh.nodes_per_element();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Eigen::Vector2d gu = mesh.element_gradient(e, u);
    const auto c = detail::flux_coefficients(spec, spec.phase.mu[static_cast<std::size_t>(e)], gu.squaredNorm(), e);
    const double scale = mesh.element_volumes[e] * c.a;
    const auto& G = mesh.gradient_maps[static_cast<std::size_t>(e)];
    for (int k = 0; k < m; ++k) {
      double dot = 0.0;
      for (int d = 0; d < mesh.dim; ++d) dot += G[d][k] * gu[d];
      r[mesh.elements[e][k]] += scale * dot;
    }
  }
  return r;
}

/// Exact derivative of assemble_A_residual. Element blocks are |e| G^T (a I + b grad u grad u^T) G;
/// only the upper triangle is computed and mirrored, so the result is exactly symmetric.
///
/// With `frozen_coefficients` the b-term is dropped, leaving the Picard (Kacanov) matrix
/// |e| a(g) G^T G whose product with u reproduces the residual.
inline SparseMatrix assemble_A_jacobian(const ProblemSpec& spec, const Eigen::VectorXd& u,
                                        bool frozen_coefficients = false) {
  detail::check_state(spec, u);
  const Mesh& mesh = *spec.mesh;
  const int m = mesh.nodes_per_element();
  Triplets trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_elements() * m * m));
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Eigen::Vector2d gu = mesh.element_gradient(e, u);
    const auto c = detail::flux_coefficients(spec, spec.phase.mu[static_cast<std::size_t>(e)], gu.squaredNorm(), e);
    Eigen::Matrix2d D = c.a * Eigen::Matrix2d::Identity();
    if (!frozen_coefficients && c.b != 0.0 && gu.squaredNorm() > 0.0) D += c.b * gu * gu.transpose();
    const auto& G = mesh.gradient_maps[static_cast<std::size_t>(e)];
    const double vol = mesh.element_volumes[e];
    for (int a = 0; a < m; ++a) {
      for (int b = a; b < m; ++b) {
        double val = 0.0;
        for (int i = 0; i < mesh.dim; ++i) {
          for (int j = 0; j < mesh.dim; ++j) val += G[i][a] * D(i, j) * G[j][b];
        }
        val *= vol;
        trip.emplace_back(mesh.elements[e][a], mesh.elements[e][b], val);
        if (a != b) trip.emplace_back(mesh.elements[e][b], mesh.elements[e][a], val);
      }
    }
  }
  SparseMatrix J(mesh.num_nodes(), mesh.num_nodes());
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

/// Residual and diagonal derivative of a lumped, diagonal term.
struct DiagonalTerm {
  Eigen::VectorXd residual;
  Eigen::VectorXd diagonal;
};

/// (w_i / rho) max(u_i - Phi_i, 0), derivative (w_i / rho)[u_i > Phi_i]; nodes with Phi_i = +inf contribute 0.
inline DiagonalTerm assemble_penalty(const ProblemSpec& spec, const Eigen::VectorXd& u, double rho) {
  detail::check_state(spec, u);
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigurationError("penalty parameter rho must be > 0");
  const Index n = spec.num_nodes();
  DiagonalTerm out{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  for (Index i = 0; i < n; ++i) {
    const double phi = spec.obstacle[i];
    if (!std::isfinite(phi)) continue;
    if (u[i] > phi) {
      out.residual[i] = spec.weights[i] / rho * (u[i] - phi);
      out.diagonal[i] = spec.weights[i] / rho;
    }
  }
  return out;
}

/// Volume-weighted average of the element gradients around each node.
inline std::vector<Eigen::Vector2d> nodal_gradients(const ProblemSpec& spec, const Eigen::VectorXd& u) {
  const Mesh& mesh = *spec.mesh;
  std::vector<Eigen::Vector2d> elem(static_cast<std::size_t>(mesh.num_elements()));
  for (Index e = 0; e < mesh.num_elements(); ++e) elem[static_cast<std::size_t>(e)] = mesh.element_gradient(e, u);
  std::vector<Eigen::Vector2d> out(mesh.nodes.size(), Eigen::Vector2d::Zero());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    double vol = 0.0;
    for (Index e : spec.node_elements[i]) {
      out[i] += mesh.element_volumes[e] * elem[static_cast<std::size_t>(e)];
      vol += mesh.element_volumes[e];
    }
    if (vol > 0.0) out[i] /= vol;
  }
  return out;
}

struct ReactionTerm {
  Eigen::VectorXd residual;  // -w_i eta_i
  SparseMatrix jacobian;
  Eigen::VectorXd eta;  // selection record
};

/// eta_i = selection of [f_lo, f_hi] at (x_i, u_i, nodal gradient); residual -w_i eta_i.
inline ReactionTerm assemble_reaction(const ProblemSpec& spec, const Eigen::VectorXd& u, const SelectionRule& rule) {
  detail::check_state(spec, u);
  const Mesh& mesh = *spec.mesh;
  const Index n = mesh.num_nodes();
  const auto grads = nodal_gradients(spec, u);
  ReactionTerm out{Eigen::VectorXd::Zero(n), SparseMatrix(n, n), Eigen::VectorXd::Zero(n)};
  Triplets trip;
  for (Index i = 0; i < n; ++i) {
    const auto sel = spec.reaction.select(mesh.nodes[static_cast<std::size_t>(i)], u[i],
                                          grads[static_cast<std::size_t>(i)], rule);
    out.eta[i] = sel.value;
    out.residual[i] = -spec.weights[i] * sel.value;
    if (sel.d_s != 0.0) trip.emplace_back(i, i, -spec.weights[i] * sel.d_s);
    if (sel.d_xi.squaredNorm() == 0.0) continue;
    // d xi_i / d u_j through the averaged element gradients
    double vol = 0.0;
    for (Index e : spec.node_elements[static_cast<std::size_t>(i)]) vol += mesh.element_volumes[e];
    for (Index e : spec.node_elements[static_cast<std::size_t>(i)]) {
      const auto& G = mesh.gradient_maps[static_cast<std::size_t>(e)];
      const double share = mesh.element_volumes[e] / vol;
      for (int k = 0; k < mesh.nodes_per_element(); ++k) {
        double dxi = 0.0;
        for (int d = 0; d < mesh.dim; ++d) dxi += sel.d_xi[d] * G[d][k];
        trip.emplace_back(i, mesh.elements[e][k], -spec.weights[i] * share * dxi);
      }
    }
  }
  out.jacobian.setFromTriplets(trip.begin(), trip.end());
  return out;
}

inline ReactionTerm assemble_reaction(const ProblemSpec& spec, const Eigen::VectorXd& u) {
  return assemble_reaction(spec, u, spec.reaction.selection);
}

/// bw_i g_delta(u_i) on Gamma2 nodes, derivative bw_i g_delta'(u_i). `delta` overrides the spec's smoothing width.
inline DiagonalTerm assemble_boundary_term(const ProblemSpec& spec, const Eigen::VectorXd& u, double delta) {
  detail::check_state(spec, u);
  const Index n = spec.num_nodes();
  DiagonalTerm out{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  if (spec.boundary.kind == BoundaryPotentialSpec::Kind::zero) return out;
  if (spec.boundary.nonsmooth() && !(delta > 0.0)) {
    throw ConfigurationError("boundary potential '" + spec.boundary.name() + "' is nonsmooth and needs delta > 0");
  }
  for (Index i = 0; i < n; ++i) {
    const double bw = spec.boundary_weights[i];
    if (bw == 0.0) continue;
    out.residual[i] = bw * spec.boundary.smoothed_gradient(u[i], delta);
    out.diagonal[i] = bw * spec.boundary.smoothed_slope(u[i], delta);
  }
  return out;
}

inline DiagonalTerm assemble_boundary_term(const ProblemSpec& spec, const Eigen::VectorXd& u) {
  return assemble_boundary_term(spec, u, spec.boundary.delta);
}

/// sum over Gamma2 nodes of bw_i j°(u_i; v_i), with the exact (unsmoothed) j°.
inline double clarke_directional(const ProblemSpec& spec, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  detail::check_state(spec, u);
  detail::check_state(spec, v);
  double total = 0.0;
  for (Index i = 0; i < spec.num_nodes(); ++i) {
    const double bw = spec.boundary_weights[i];
    if (bw != 0.0) total += bw * spec.boundary.directional(u[i], v[i]);
  }
  return total;
}

/// Sum over Gamma2 nodes of bw_i j(u_i).
inline double boundary_energy(const ProblemSpec& spec, const Eigen::VectorXd& u) {
  double total = 0.0;
  for (Index i = 0; i < spec.num_nodes(); ++i) {
    const double bw = spec.boundary_weights[i];
    if (bw != 0.0) total += bw * spec.boundary.value(u[i]);
  }
  return total;
}

/// Replaces Gamma1 rows by identity rows (residual u_i) and eliminates the matching columns.
/// The column elimination is exact for Newton corrections, where the Dirichlet update is -u_i.
inline AssembledSystem apply_dirichlet(const ProblemSpec& spec, const Eigen::VectorXd& u, Eigen::VectorXd residual,
                                       const SparseMatrix& jacobian) {
  const Index n = spec.num_nodes();
  const auto& mask = spec.dirichlet;
  AssembledSystem sys;
  sys.dirichlet_mask = mask;
  // Moving the known Dirichlet corrections d_j = -u_j to the right-hand side: r_i -= J_ij u_j.
  for (Index col = 0; col < jacobian.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(jacobian, col); it; ++it) {
      const Index row = it.row(), c = it.col();
      if (!mask[static_cast<std::size_t>(row)] && mask[static_cast<std::size_t>(c)]) residual[row] -= it.value() * u[c];
    }
  }
  Triplets trip;
  trip.reserve(static_cast<std::size_t>(jacobian.nonZeros()));
  for (Index col = 0; col < jacobian.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(jacobian, col); it; ++it) {
      if (mask[static_cast<std::size_t>(it.row())] || mask[static_cast<std::size_t>(it.col())]) continue;
      trip.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (mask[static_cast<std::size_t>(i)]) {
      trip.emplace_back(i, i, 1.0);
      residual[i] = u[i];
    }
  }
  sys.jacobian.resize(n, n);
  sys.jacobian.setFromTriplets(trip.begin(), trip.end());
  sys.residual = std::move(residual);
  return sys;
}

}  // namespace dpobs
