#pragma once

// Independent ground truth for the linear case p = 2 (q = 2 or mu = 0):
//
//   minimize 1/2 u^T S u - b^T u + sum_Gamma2 bw_i j(u_i)   subject to u <= Phi, u = 0 on Gamma1,
//
// with S the stiffness matrix (plus the smooth_quadratic boundary diagonal),
// b = w eta for a state-independent selection eta, and j either absent,
// smooth_quadratic or abs. Two unrelated solution routes are provided:
// exhaustive enumeration of active sets (small instances) and proximal
// projected gradient.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "dpobs/assembly.hpp"
#include "dpobs/errors.hpp"

namespace dpobs {

enum class OracleMode { automatic, enumeration, projected_gradient };

inline const char* to_string(OracleMode mode) {
  switch (mode) {
    case OracleMode::automatic: return "automatic";
    case OracleMode::enumeration: return "enumeration";
    case OracleMode::projected_gradient: return "projected_gradient";
  }
  return "automatic";
}

inline OracleMode parse_oracle_mode(const std::string& text) {
  if (text == "automatic" || text == "auto") return OracleMode::automatic;
  if (text == "enumeration") return OracleMode::enumeration;
  if (text == "projected_gradient" || text == "projected-gradient") return OracleMode::projected_gradient;
  throw ConfigurationError("unknown oracle mode '" + text + "'");
}

inline constexpr Index kMaxEnumeratedNodes = 14;

struct OracleResult {
  DiscreteFunction solution;
  Eigen::VectorXd eta;
  OracleMode mode = OracleMode::enumeration;
  std::int64_t iterations = 0;  // linear solves (enumeration) or gradient steps
};

namespace detail {

struct QuadraticProgram {
  std::vector<Index> free;  // node ids of the unknowns
  Eigen::MatrixXd S;        // restricted to free nodes
  Eigen::VectorXd b;
  Eigen::VectorXd phi;       // +inf where unconstrained
  Eigen::VectorXd abs_coef;  // alpha * bw on abs-potential nodes, 0 elsewhere
  Eigen::VectorXd eta;       // full nodal selection
};

inline QuadraticProgram build_qp(const ProblemSpec& spec) {
  const bool linear = spec.phase.p == 2.0 &&
                      (spec.phase.q == 2.0 ||
                       std::all_of(spec.phase.mu.begin(), spec.phase.mu.end(), [](double m) { return m == 0.0; }));
  if (!linear) throw ConfigurationError("qp_oracle requires p = 2 and (q = 2 or mu = 0)");
  const auto kind = spec.boundary.kind;
  if (spec.mesh->has_gamma2() && kind == BoundaryPotentialSpec::Kind::nonconvex_well) {
    throw ConfigurationError("qp_oracle requires a convex boundary potential");
  }
  if (!spec.reaction.state_independent(spec.reaction.selection)) {
    throw ConfigurationError("qp_oracle requires a state-independent reaction selection");
  }
  ProblemSpec linear_spec = spec;
  linear_spec.eps_grad = 0.0;
  const Index n = spec.num_nodes();
  const SparseMatrix K = assemble_A_jacobian(linear_spec, Eigen::VectorXd::Zero(n));
  const Eigen::VectorXd eta = assemble_reaction(linear_spec, Eigen::VectorXd::Zero(n)).eta;

  QuadraticProgram qp;
  for (Index i = 0; i < n; ++i) {
    if (!spec.dirichlet[static_cast<std::size_t>(i)]) qp.free.push_back(i);
  }
  const Index m = static_cast<Index>(qp.free.size());
  std::vector<Index> pos(static_cast<std::size_t>(n), -1);
  for (Index k = 0; k < m; ++k) pos[static_cast<std::size_t>(qp.free[static_cast<std::size_t>(k)])] = k;
  qp.S = Eigen::MatrixXd::Zero(m, m);
  for (Index col = 0; col < K.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
      const Index r = pos[static_cast<std::size_t>(it.row())], c = pos[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) qp.S(r, c) += it.value();
    }
  }
  qp.b.resize(m);
  qp.phi.resize(m);
  qp.abs_coef = Eigen::VectorXd::Zero(m);
  for (Index k = 0; k < m; ++k) {
    const Index i = qp.free[static_cast<std::size_t>(k)];
    qp.b[k] = spec.weights[i] * eta[i];
    qp.phi[k] = spec.obstacle[i];
    const double bw = spec.boundary_weights[i];
    if (bw > 0.0 && kind == BoundaryPotentialSpec::Kind::smooth_quadratic) qp.S(k, k) += spec.boundary.alpha * bw;
    if (bw > 0.0 && kind == BoundaryPotentialSpec::Kind::abs) qp.abs_coef[k] = spec.boundary.alpha * bw;
  }
  qp.eta = eta;
  return qp;
}

inline Eigen::VectorXd scatter(const ProblemSpec& spec, const QuadraticProgram& qp, const Eigen::VectorXd& x) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(spec.num_nodes());
  for (std::size_t k = 0; k < qp.free.size(); ++k) u[qp.free[k]] = x[static_cast<Index>(k)];
  return u;
}

// Node piece for the enumeration: obstacle inactive/active times abs sign state.
enum class AbsState : int { negative = 0, zero = 1, positive = 2 };

inline Eigen::VectorXd enumerate_active_sets(const QuadraticProgram& qp, std::int64_t& solves) {
  const Index m = qp.S.rows();
  std::vector<Index> constrained, abs_nodes;
  for (Index k = 0; k < m; ++k) {
    if (std::isfinite(qp.phi[k])) constrained.push_back(k);
    if (qp.abs_coef[k] > 0.0) abs_nodes.push_back(k);
  }
  if (static_cast<Index>(constrained.size()) > kMaxEnumeratedNodes) {
    throw ConfigurationError("enumeration mode supports at most " + std::to_string(kMaxEnumeratedNodes) +
                             " constrained nodes (got " + std::to_string(constrained.size()) + ")");
  }
  if (abs_nodes.size() > 8) throw ConfigurationError("enumeration mode supports at most 8 abs-potential nodes");
  const double scale = std::max({1.0, qp.b.cwiseAbs().maxCoeff(), qp.S.cwiseAbs().maxCoeff()});
  const double tol = 1e-10 * scale;
  std::int64_t abs_combos = 1;
  for (std::size_t a = 0; a < abs_nodes.size(); ++a) abs_combos *= 3;
  const std::int64_t active_combos = std::int64_t{1} << constrained.size();

  std::vector<bool> fixed(static_cast<std::size_t>(m));
  std::vector<double> fixed_value(static_cast<std::size_t>(m));
  std::vector<AbsState> state(static_cast<std::size_t>(m), AbsState::zero);
  std::vector<bool> active(static_cast<std::size_t>(m));
  for (std::int64_t mask = 0; mask < active_combos; ++mask) {
    for (std::int64_t combo = 0; combo < abs_combos; ++combo) {
      std::fill(fixed.begin(), fixed.end(), false);
      std::fill(active.begin(), active.end(), false);
      bool consistent = true;
      Eigen::VectorXd rhs = qp.b;
      for (std::size_t c = 0; c < constrained.size(); ++c) {
        if (mask & (std::int64_t{1} << c)) {
          const auto k = static_cast<std::size_t>(constrained[c]);
          active[k] = fixed[k] = true;
          fixed_value[k] = qp.phi[constrained[c]];
        }
      }
      std::int64_t code = combo;
      for (Index a : abs_nodes) {
        const auto k = static_cast<std::size_t>(a);
        state[k] = static_cast<AbsState>(code % 3);
        code /= 3;
        if (state[k] == AbsState::zero) {
          if (active[k] && qp.phi[a] != 0.0) consistent = false;
          fixed[k] = true;
          fixed_value[k] = 0.0;
        } else {
          rhs[a] -= (state[k] == AbsState::positive ? 1.0 : -1.0) * qp.abs_coef[a];
        }
      }
      if (!consistent) continue;

      std::vector<Index> inner;
      for (Index k = 0; k < m; ++k) {
        if (!fixed[static_cast<std::size_t>(k)]) inner.push_back(k);
      }
      Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
      for (Index k = 0; k < m; ++k) {
        if (fixed[static_cast<std::size_t>(k)]) x[k] = fixed_value[static_cast<std::size_t>(k)];
      }
      if (!inner.empty()) {
        const Index ni = static_cast<Index>(inner.size());
        Eigen::MatrixXd A(ni, ni);
        Eigen::VectorXd r(ni);
        for (Index a = 0; a < ni; ++a) {
          r[a] = rhs[inner[a]];
          for (Index k = 0; k < m; ++k) {
            if (fixed[static_cast<std::size_t>(k)]) r[a] -= qp.S(inner[a], k) * x[k];
          }
          for (Index c = 0; c < ni; ++c) A(a, c) = qp.S(inner[a], inner[c]);
        }
        ++solves;
        const Eigen::VectorXd xi = A.llt().solve(r);
        for (Index a = 0; a < ni; ++a) x[inner[a]] = xi[a];
      }
      // primal feasibility
      bool ok = true;
      for (Index k = 0; k < m && ok; ++k) {
        const auto sk = static_cast<std::size_t>(k);
        if (!active[sk] && x[k] > qp.phi[k] + tol) ok = false;
        if (qp.abs_coef[k] > 0.0) {
          if (state[sk] == AbsState::positive && x[k] < -tol) ok = false;
          if (state[sk] == AbsState::negative && x[k] > tol) ok = false;
        }
      }
      if (!ok) continue;
      // dual feasibility on fixed nodes: xi = rhs - S x
      const Eigen::VectorXd xi = rhs - qp.S * x;
      for (Index k = 0; k < m && ok; ++k) {
        const auto sk = static_cast<std::size_t>(k);
        if (!fixed[sk]) continue;
        const bool zero_state = qp.abs_coef[k] > 0.0 && state[sk] == AbsState::zero;
        if (active[sk] && zero_state) {
          ok = xi[k] >= -qp.abs_coef[k] - tol;
        } else if (zero_state) {
          ok = std::abs(xi[k]) <= qp.abs_coef[k] + tol;
        } else {
          ok = xi[k] >= -tol;
        }
      }
      if (ok) return x;
    }
  }
  throw OracleFailure("active-set enumeration found no KKT point");
}

inline Eigen::VectorXd projected_gradient(const QuadraticProgram& qp, std::int64_t& iterations) {
  const Index m = qp.S.rows();
  double L = 0.0;
  for (Index r = 0; r < m; ++r) L = std::max(L, qp.S.row(r).cwiseAbs().sum());
  if (!(L > 0.0)) throw OracleFailure("projected gradient: zero stiffness");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  for (Index k = 0; k < m; ++k) x[k] = std::min(0.0, qp.phi[k]);
  constexpr std::int64_t kMaxIterations = 50'000'000;
  for (iterations = 0; iterations < kMaxIterations; ++iterations) {
    const Eigen::VectorXd z = x - (qp.S * x - qp.b) / L;
    double change = 0.0;
    for (Index k = 0; k < m; ++k) {
      double v = z[k];
      const double c = qp.abs_coef[k] / L;
      if (c > 0.0) v = v > c ? v - c : (v < -c ? v + c : 0.0);
      v = std::min(v, qp.phi[k]);
      change = std::max(change, std::abs(v - x[k]));
      x[k] = v;
    }
    if (change <= 1e-12) return x;
  }
  throw OracleFailure("projected gradient did not reach tolerance");
}

}  // namespace detail

/// Reference solution of the constrained linear problem (not the penalized one).
inline OracleResult qp_oracle(const ProblemSpec& spec, OracleMode mode = OracleMode::automatic) {
  const detail::QuadraticProgram qp = detail::build_qp(spec);
  Index constrained = 0;
  for (Index k = 0; k < qp.phi.size(); ++k) constrained += std::isfinite(qp.phi[k]) ? 1 : 0;
  if (mode == OracleMode::automatic) {
    mode = constrained <= kMaxEnumeratedNodes ? OracleMode::enumeration : OracleMode::projected_gradient;
  }
  OracleResult out;
  out.mode = mode;
  out.eta = qp.eta;
  if (qp.S.rows() == 0) {
    out.solution = DiscreteFunction::zero(spec.mesh);
    return out;
  }
  const Eigen::VectorXd x = mode == OracleMode::enumeration ? detail::enumerate_active_sets(qp, out.iterations)
                                                            : detail::projected_gradient(qp, out.iterations);
  out.solution = DiscreteFunction(spec.mesh, detail::scatter(spec, qp, x));
  return out;
}

}  // namespace dpobs
