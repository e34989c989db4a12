#pragma once

// Checks the structural hypotheses of an instance: discrete Poincare and trace
// constants lambda1, lambda2 and the smallness condition
//
//   e_f delta(theta2) + g_f lambda1 delta(theta3) + c_j lambda2 delta(theta1) < 1,
//
// where delta(theta) = 1 if theta = p and 0 for theta in [1, p).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "dpobs/assembly.hpp"

namespace dpobs {

struct HypothesisReport {
  double lambda1_est = 0.0;
  double lambda2_est = 0.0;
  bool certified = true;  // false when the constants come from a nonconvex ascent (p != 2)
  double delta_theta1 = 0.0, delta_theta2 = 0.0, delta_theta3 = 0.0;
  double smallness_lhs = 0.0;
  bool passes = false;
  ReactionGrowth reaction;
  BoundaryGrowth boundary;
  std::vector<std::string> notes;
};

/// delta(theta) of the smallness condition.
inline double growth_indicator(double theta, double p) { return std::abs(theta - p) <= 1e-12 ? 1.0 : 0.0; }

namespace detail {

struct FreeSpace {
  std::vector<Index> free;
  Eigen::MatrixXd stiffness;  // unweighted Laplacian on free nodes
  Eigen::VectorXd mass;       // lumped volume weights on free nodes
  Eigen::VectorXd trace;      // lumped Gamma2 weights on free nodes
};

inline FreeSpace free_space(const ProblemSpec& spec) {
  ProblemSpec laplace = spec;
  laplace.phase = PhaseConfig{2.0, 2.0, std::vector<double>(spec.phase.mu.size(), 0.0)};
  laplace.eps_grad = 0.0;
  const Index n = spec.num_nodes();
  const SparseMatrix K = assemble_A_jacobian(laplace, Eigen::VectorXd::Zero(n));
  FreeSpace fs;
  std::vector<Index> pos(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < n; ++i) {
    if (!spec.dirichlet[static_cast<std::size_t>(i)]) {
      pos[static_cast<std::size_t>(i)] = static_cast<Index>(fs.free.size());
      fs.free.push_back(i);
    }
  }
  const Index m = static_cast<Index>(fs.free.size());
  fs.stiffness = Eigen::MatrixXd::Zero(m, m);
  for (Index col = 0; col < K.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
      const Index r = pos[static_cast<std::size_t>(it.row())], c = pos[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) fs.stiffness(r, c) += it.value();
    }
  }
  fs.mass.resize(m);
  fs.trace.resize(m);
  for (Index k = 0; k < m; ++k) {
    fs.mass[k] = spec.weights[fs.free[static_cast<std::size_t>(k)]];
    fs.trace[k] = spec.boundary_weights[fs.free[static_cast<std::size_t>(k)]];
  }
  return fs;
}

/// sup over u of (sum_i weight_i |u_i|^p / sum_e |e| |grad u|^p)^(1/p) by normalized gradient ascent
/// on the log-quotient from several random positive starts.
inline double ascent_constant(const ProblemSpec& spec, const FreeSpace& fs, const Eigen::VectorXd& weight, double p,
                              std::uint64_t seed, int starts = 10, int max_iter = 3000) {
  const Mesh& mesh = *spec.mesh;
  const Index n = spec.num_nodes();
  const Index m = static_cast<Index>(fs.free.size());
  const auto expand = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    for (Index k = 0; k < m; ++k) u[fs.free[static_cast<std::size_t>(k)]] = x[k];
    return u;
  };
  // returns log N - log D and its gradient in the free coordinates
  const auto evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    const Eigen::VectorXd u = expand(x);
    double N = 0.0, D = 0.0;
    Eigen::VectorXd gN = Eigen::VectorXd::Zero(m), gD = Eigen::VectorXd::Zero(n);
    for (Index k = 0; k < m; ++k) {
      const double a = std::abs(x[k]);
      N += weight[k] * std::pow(a, p);
      if (a > 0.0) gN[k] = p * weight[k] * std::pow(a, p - 2.0) * x[k];
    }
    for (Index e = 0; e < mesh.num_elements(); ++e) {
      const Eigen::Vector2d g = mesh.element_gradient(e, u);
      const double gn = g.norm();
      if (gn == 0.0) continue;
      D += mesh.element_volumes[e] * std::pow(gn, p);
      const double c = p * mesh.element_volumes[e] * std::pow(gn, p - 2.0);
      const auto& G = mesh.gradient_maps[static_cast<std::size_t>(e)];
      for (int k = 0; k < mesh.nodes_per_element(); ++k) {
        double dot = 0.0;
        for (int d = 0; d < mesh.dim; ++d) dot += G[d][k] * g[d];
        gD[mesh.elements[e][k]] += c * dot;
      }
    }
    if (!(N > 0.0) || !(D > 0.0)) return -std::numeric_limits<double>::infinity();
    if (grad) {
      grad->resize(m);
      for (Index k = 0; k < m; ++k) (*grad)[k] = gN[k] / N - gD[fs.free[static_cast<std::size_t>(k)]] / D;
    }
    return std::log(N) - std::log(D);
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  double best = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd x(m);
    for (Index k = 0; k < m; ++k) x[k] = unif(rng);
    Eigen::VectorXd g;
    double f = evaluate(x, &g);
    double step = 1e-2;
    for (int it = 0; it < max_iter; ++it) {
      const double gmax = g.cwiseAbs().maxCoeff();
      if (!(gmax > 1e-13)) break;
      bool improved = false;
      for (int tries = 0; tries < 30; ++tries) {
        Eigen::VectorXd xt = x + step * g / gmax;
        xt /= xt.cwiseAbs().maxCoeff();
        Eigen::VectorXd gt;
        const double ft = evaluate(xt, &gt);
        if (ft > f) {
          x = xt;
          f = ft;
          g = gt;
          step *= 1.5;
          improved = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
    }
    best = std::max(best, f);
  }
  return std::exp(best / p);
}

}  // namespace detail

inline HypothesisReport validate_hypotheses(const ProblemSpec& spec, std::uint64_t seed = 7) {
  HypothesisReport rep;
  rep.reaction = spec.reaction.growth;
  rep.boundary = spec.boundary.growth;
  const double p = spec.phase.p, q = spec.phase.q;
  const int N = spec.mesh->dim;
  const detail::FreeSpace fs = detail::free_space(spec);
  const bool has_gamma2 = fs.trace.size() > 0 && fs.trace.maxCoeff() > 0.0;

  if (fs.free.empty()) {
    rep.notes.push_back("no free nodes; constants are vacuous");
  } else if (p == 2.0) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> poincare(fs.stiffness, fs.mass.asDiagonal().toDenseMatrix());
    rep.lambda1_est = 1.0 / std::sqrt(poincare.eigenvalues().minCoeff());
    if (has_gamma2) {
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> tr(fs.trace.asDiagonal().toDenseMatrix(), fs.stiffness,
                                                                   Eigen::EigenvaluesOnly);
      rep.lambda2_est = std::sqrt(std::max(0.0, tr.eigenvalues().maxCoeff()));
    }
  } else {
    rep.certified = false;
    rep.lambda1_est = detail::ascent_constant(spec, fs, fs.mass, p, seed);
    if (has_gamma2) rep.lambda2_est = detail::ascent_constant(spec, fs, fs.trace, p, seed + 1);
    rep.notes.push_back("p != 2: lambda estimates come from gradient ascent and are not certified");
  }
  if (!has_gamma2) rep.notes.push_back("Gamma2 is empty: the trace constant lambda2 is reported as 0");

  rep.delta_theta1 = growth_indicator(rep.boundary.theta1, p);
  rep.delta_theta2 = growth_indicator(rep.reaction.theta2, p);
  rep.delta_theta3 = growth_indicator(rep.reaction.theta3, p);
  rep.smallness_lhs = rep.reaction.e_f * rep.delta_theta2 + rep.reaction.g_f * rep.lambda1_est * rep.delta_theta3 +
                      rep.boundary.c_j * rep.lambda2_est * rep.delta_theta1;
  rep.passes = rep.smallness_lhs < 1.0;
  if (!rep.passes) rep.notes.push_back("smallness condition fails; solves may still be attempted");

  const auto check_theta = [&](const char* name, double theta) {
    if (theta < 1.0 || theta > p + 1e-12) {
      rep.notes.push_back(std::string(name) + " = " + std::to_string(theta) + " lies outside [1, p]");
    }
  };
  check_theta("theta1", rep.boundary.theta1);
  check_theta("theta2", rep.reaction.theta2);
  check_theta("theta3", rep.reaction.theta3);
  if (!(q > p)) rep.notes.push_back("q = p: outside the strict double-phase regime 1 < p < q");
  if (p < N) {
    const double p_star = N * p / (N - p);
    if (!(q < p_star)) rep.notes.push_back("q >= p* = " + std::to_string(p_star) + " (critical Sobolev exponent)");
  }
  if (!(q < N)) rep.notes.push_back("q >= N: the continuum theory assumes q < N; treated as a discrete experiment");
  return rep;
}

}  // namespace dpobs
