#pragma once

// Damped semismooth Newton for one penalized (or Moreau-Yosida regularized)
// instance, rho-continuation with warm starts, and the discrete variational
// inequality residual used to certify limits.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "dpobs/assembly.hpp"
#include "dpobs/errors.hpp"
#include "dpobs/musielak_orlicz.hpp"
#include "dpobs/nonsmooth.hpp"

namespace dpobs {

enum class SolveMode { penalty, moreau_yosida, unconstrained };

inline const char* to_string(SolveMode mode) {
  switch (mode) {
    case SolveMode::penalty: return "penalty";
    case SolveMode::moreau_yosida: return "moreau_yosida";
    case SolveMode::unconstrained: return "unconstrained";
  }
  return "penalty";
}

inline SolveMode parse_solve_mode(const std::string& text) {
  if (text == "penalty") return SolveMode::penalty;
  if (text == "moreau_yosida") return SolveMode::moreau_yosida;
  if (text == "unconstrained") return SolveMode::unconstrained;
  throw ConfigurationError("unknown solver mode '" + text + "'");
}

struct Backtracking {
  double factor = 0.5;
  int max_halvings = 40;
  double armijo = 1e-4;  // on ||r||^2
};

struct SolverConfig {
  double rho = 1.0;
  SolveMode mode = SolveMode::penalty;
  double newton_tol = 1e-10;
  int max_newton = 100;
  Backtracking damping;
  bool picard_fallback = true;
  std::optional<double> delta_boundary;  // unset: use the problem's boundary delta
  std::optional<double> eps_grad;        // unset: use the problem's eps_grad

  void validate() const {
    if (mode != SolveMode::unconstrained && (!(rho > 0.0) || !std::isfinite(rho))) {
      throw ConfigurationError("rho must be > 0 (got " + std::to_string(rho) + ")");
    }
    if (!(newton_tol > 0.0)) throw ConfigurationError("newton_tol must be > 0");
    if (max_newton < 0) throw ConfigurationError("max_newton must be >= 0");
    if (!(damping.factor > 0.0 && damping.factor < 1.0)) throw ConfigurationError("damping factor must lie in (0,1)");
    if (damping.max_halvings < 0 || !(damping.armijo > 0.0 && damping.armijo < 0.5)) {
      throw ConfigurationError("invalid backtracking parameters");
    }
    if (delta_boundary && !(*delta_boundary >= 0.0)) throw ConfigurationError("delta_boundary must be >= 0");
    if (eps_grad && !(*eps_grad >= 0.0)) throw ConfigurationError("eps_grad must be >= 0");
  }
};

enum class StepKind { newton, picard };

struct TraceEntry {
  double residual_norm = 0.0;
  double step_length = 0.0;
  StepKind kind = StepKind::newton;
  bool regularized = false;  // the linear system needed the diagonal shift
};

struct SolveReport {
  DiscreteFunction solution;
  Eigen::VectorXd eta;
  double rho = 0.0;
  double residual_norm = 0.0;
  double tolerance = 0.0;  // newton_tol, raised to the round-off floor of the residual if that is larger
  int iterations = 0;
  bool converged = false;
  double violation_sup = 0.0;  // ||(u - Phi)^+||_inf
  double violation_l1 = 0.0;   // lumped L1 norm of (u - Phi)^+
  double eps_grad = 0.0;
  double delta_boundary = 0.0;
  std::vector<TraceEntry> trace;
};

namespace detail {

struct NonlinearSystem {
  Eigen::VectorXd residual;  // unmasked
  SparseMatrix jacobian;     // unmasked
  Eigen::VectorXd magnitude;  // sum of |terms| entering each residual entry, for the round-off floor
  Eigen::VectorXd eta;
};

class PenalizedSystem {
 public:
  PenalizedSystem(const ProblemSpec& spec, const SolverConfig& cfg) : spec_(spec), cfg_(cfg) {
    if (cfg.eps_grad) spec_.eps_grad = *cfg.eps_grad;
    delta_ = cfg.delta_boundary ? *cfg.delta_boundary : spec.boundary.delta;
    spec_.boundary.delta = delta_;
    if (spec_.needs_gradient_regularization() && !(spec_.eps_grad > 0.0)) {
      throw ConfigurationError("eps_grad must be > 0 when p < 2 or q < 2");
    }
    K_ = ConstraintSetK::from_problem(spec_);
  }

  const ProblemSpec& spec() const { return spec_; }
  double delta() const { return delta_; }

  NonlinearSystem evaluate(const Eigen::VectorXd& u, bool with_jacobian, bool frozen = false) const {
    NonlinearSystem sys;
    const Index n = spec_.num_nodes();
    sys.residual = assemble_A_residual(spec_, u);
    const auto reaction = assemble_reaction(spec_, u);
    const auto boundary = assemble_boundary_term(spec_, u, delta_);
    Eigen::VectorXd constraint_res = Eigen::VectorXd::Zero(n), constraint_diag = Eigen::VectorXd::Zero(n);
    switch (cfg_.mode) {
      case SolveMode::penalty: {
        auto pen = assemble_penalty(spec_, u, cfg_.rho);
        constraint_res = std::move(pen.residual);
        constraint_diag = std::move(pen.diagonal);
        break;
      }
      case SolveMode::moreau_yosida: {
        constraint_res = moreau_yosida_grad(u, K_, spec_.weights, cfg_.rho);
        constraint_diag = moreau_yosida_slope(u, K_, spec_.weights, cfg_.rho);
        break;
      }
      case SolveMode::unconstrained: break;
    }
    sys.residual += reaction.residual + boundary.residual + constraint_res;
    sys.eta = reaction.eta;
    if (!with_jacobian) return sys;
    SparseMatrix J = assemble_A_jacobian(spec_, u, frozen) + reaction.jacobian;
    Eigen::VectorXd diag = boundary.diagonal + constraint_diag;
    sys.magnitude = reaction.residual.cwiseAbs() + boundary.residual.cwiseAbs();
    sys.magnitude += (J.cwiseAbs() * u.cwiseAbs()) + (diag.array() * u.array().abs()).matrix();
    for (Index i = 0; i < n; ++i) {
      if (std::isfinite(spec_.obstacle[i])) sys.magnitude[i] += constraint_diag[i] * std::abs(spec_.obstacle[i]);
    }
    Triplets trip;
    for (Index i = 0; i < n; ++i) {
      if (diag[i] != 0.0) trip.emplace_back(i, i, diag[i]);
    }
    SparseMatrix D(n, n);
    D.setFromTriplets(trip.begin(), trip.end());
    sys.jacobian = J + D;
    return sys;
  }

  /// Lumped-weight-scaled Euclidean norm of the masked residual: sqrt(sum_free r_i^2 / w_i + sum_D u_i^2).
  double dual_norm(const Eigen::VectorXd& residual, const Eigen::VectorXd& u) const {
    double s = 0.0;
    for (Index i = 0; i < residual.size(); ++i) {
      if (spec_.dirichlet[static_cast<std::size_t>(i)]) {
        s += u[i] * u[i];
      } else {
        s += residual[i] * residual[i] / spec_.weights[i];
      }
    }
    return std::sqrt(s);
  }

 private:
  ProblemSpec spec_;
  SolverConfig cfg_;
  double delta_ = 0.0;
  ConstraintSetK K_;
};

/// Solves J d = -r with Dirichlet rows masked; shifts the diagonal by 1e-12 (1 + |J_ii|) on failure.
inline Eigen::VectorXd masked_newton_direction(const ProblemSpec& spec, const Eigen::VectorXd& u,
                                               const Eigen::VectorXd& residual, const SparseMatrix& jacobian,
                                               bool& regularized) {
  AssembledSystem sys = apply_dirichlet(spec, u, residual, jacobian);
  sys.jacobian.makeCompressed();
  regularized = false;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(sys.jacobian);
  Eigen::VectorXd d;
  if (lu.info() == Eigen::Success) {
    d = lu.solve(-sys.residual);
    if (lu.info() == Eigen::Success && d.allFinite()) return d;
  }
  regularized = true;
  SparseMatrix shifted = sys.jacobian;
  for (Index i = 0; i < shifted.rows(); ++i) {
    const double jii = sys.jacobian.coeff(i, i);
    shifted.coeffRef(i, i) += 1e-12 * (1.0 + std::abs(jii));
  }
  shifted.makeCompressed();
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) return Eigen::VectorXd::Zero(u.size());
  d = lu.solve(-sys.residual);
  if (!d.allFinite()) return Eigen::VectorXd::Zero(u.size());
  return d;
}

inline constexpr int kNewtonFailuresBeforePicard = 5;

}  // namespace detail

/// Violation sup-norm and lumped L1 norm of (u - Phi)^+.
inline std::pair<double, double> obstacle_violation(const ProblemSpec& spec, const Eigen::VectorXd& u) {
  const Eigen::VectorXd plus = plus_part(u, spec.obstacle);
  return {plus.size() ? plus.maxCoeff() : 0.0, spec.weights.dot(plus)};
}

inline SolveReport solve_penalized(const ProblemSpec& spec, const SolverConfig& cfg, const DiscreteFunction& initial) {
  cfg.validate();
  detail::check_state(spec, initial);
  for (Index i = 0; i < spec.num_nodes(); ++i) {
    if (spec.dirichlet[static_cast<std::size_t>(i)] && initial[i] != 0.0) {
      throw ConfigurationError("initial guess must vanish on Gamma1 (node " + std::to_string(i) + ")");
    }
  }
  const detail::PenalizedSystem system(spec, cfg);
  const double eps_mach = std::numeric_limits<double>::epsilon();

  SolveReport report;
  report.rho = cfg.rho;
  report.eps_grad = system.spec().eps_grad;
  report.delta_boundary = system.delta();

  Eigen::VectorXd u = initial.values();
  detail::NonlinearSystem sys = system.evaluate(u, true);
  double norm = system.dual_norm(sys.residual, u);
  report.trace.push_back({norm, 0.0, StepKind::newton, false});

  int failures = 0;
  bool picard_mode = false;
  for (;;) {
    // residual cannot be resolved below the rounding of its own terms
    const double floor = 16.0 * eps_mach * system.dual_norm(sys.magnitude, Eigen::VectorXd::Zero(u.size()));
    report.tolerance = std::max(cfg.newton_tol, floor);
    if (norm <= report.tolerance) {
      report.converged = true;
      break;
    }
    if (report.iterations >= cfg.max_newton) break;

    bool regularized = false;
    const bool use_picard = picard_mode && cfg.picard_fallback;
    const SparseMatrix& J = use_picard ? system.evaluate(u, true, true).jacobian : sys.jacobian;
    Eigen::VectorXd d = detail::masked_newton_direction(system.spec(), u, sys.residual, J, regularized);

    double t = 1.0;
    bool accepted = false;
    detail::NonlinearSystem trial;
    for (int h = 0; h <= cfg.damping.max_halvings; ++h) {
      const Eigen::VectorXd ut = u + t * d;
      trial = system.evaluate(ut, false);
      const double nt = system.dual_norm(trial.residual, ut);
      if (std::isfinite(nt) && nt * nt <= (1.0 - 2.0 * cfg.damping.armijo * t) * norm * norm) {
        accepted = true;
        break;
      }
      t *= cfg.damping.factor;
    }
    StepKind kind = use_picard ? StepKind::picard : StepKind::newton;
    if (!accepted) {
      ++failures;
      if (!cfg.picard_fallback) {
        ++report.iterations;
        report.trace.push_back({norm, 0.0, kind, regularized});
        break;
      }
      // Unconditional full Picard step.
      const SparseMatrix Jp = system.evaluate(u, true, true).jacobian;
      d = detail::masked_newton_direction(system.spec(), u, sys.residual, Jp, regularized);
      t = 1.0;
      kind = StepKind::picard;
      if (failures >= detail::kNewtonFailuresBeforePicard) picard_mode = true;
    }
    u += t * d;
    sys = system.evaluate(u, true);
    norm = system.dual_norm(sys.residual, u);
    ++report.iterations;
    report.trace.push_back({norm, t, kind, regularized});
    if (!std::isfinite(norm)) break;
  }

  report.residual_norm = norm;
  report.eta = sys.eta;
  if (u.allFinite()) {
    report.solution = DiscreteFunction(spec.mesh, u);
    std::tie(report.violation_sup, report.violation_l1) = obstacle_violation(spec, u);
  } else {
    report.converged = false;
    report.solution = initial;
    std::tie(report.violation_sup, report.violation_l1) = obstacle_violation(spec, initial.values());
  }
  return report;
}

/// Solves along a strictly decreasing rho schedule, warm-starting each stage.
/// Active eps_grad / delta_boundary values shrink by the same factor as rho.
/// Stops after the first non-converged stage (which is still returned).
inline std::vector<SolveReport> continuation(const ProblemSpec& spec, const std::vector<double>& schedule,
                                             const SolverConfig& cfg, const DiscreteFunction& initial) {
  if (schedule.empty()) throw ConfigurationError("rho schedule is empty");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0)) throw ConfigurationError("rho schedule entries must be > 0");
    if (k > 0 && !(schedule[k] < schedule[k - 1])) throw ConfigurationError("rho schedule must be strictly decreasing");
  }
  const double eps0 = cfg.eps_grad ? *cfg.eps_grad : spec.eps_grad;
  const double delta0 = cfg.delta_boundary ? *cfg.delta_boundary : spec.boundary.delta;
  std::vector<SolveReport> reports;
  DiscreteFunction current = initial;
  for (double rho : schedule) {
    SolverConfig stage = cfg;
    stage.rho = rho;
    const double scale = rho / schedule.front();
    stage.eps_grad = eps0 * scale;
    stage.delta_boundary = delta0 * scale;
    reports.push_back(solve_penalized(spec, stage, current));
    if (!reports.back().converged) break;
    current = reports.back().solution;
  }
  return reports;
}

inline std::vector<double> default_schedule() {
  std::vector<double> s;
  for (int n = 0; n <= 8; ++n) s.push_back(std::pow(10.0, -n));
  return s;
}

/// min over probes v of <A(u), v-u> + sum_Gamma2 bw j°(u; v-u) - sum w eta (v-u).
/// u passes as a discrete VI solution when the result is >= -tol. Every probe must lie in K.
inline double vi_residual(const ProblemSpec& spec, const Eigen::VectorXd& u, const Eigen::VectorXd& eta,
                          const std::vector<Eigen::VectorXd>& probes) {
  detail::check_state(spec, u);
  if (eta.size() != u.size()) throw ConfigurationError("selection record does not match the mesh");
  if (probes.empty()) throw ConfigurationError("vi_residual needs at least one probe");
  const ConstraintSetK K = ConstraintSetK::from_problem(spec);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const Eigen::VectorXd& v = probes[k];
    detail::check_state(spec, v);
    if (!K.contains(v)) throw ConfigurationError("probe " + std::to_string(k) + " is not in K");
    const Eigen::VectorXd d = v - u;
    const double val = apply_A(spec, u, d) + clarke_directional(spec, u, d) - spec.weights.dot(eta.cwiseProduct(d));
    worst = std::min(worst, val);
  }
  return worst;
}

inline double vi_residual(const ProblemSpec& spec, const DiscreteFunction& u, const Eigen::VectorXd& eta,
                          const std::vector<DiscreteFunction>& probes) {
  std::vector<Eigen::VectorXd> raw;
  raw.reserve(probes.size());
  for (const auto& p : probes) {
    detail::check_state(spec, p);
    raw.push_back(p.values());
  }
  return vi_residual(spec, u.values(), eta, raw);
}

}  // namespace dpobs
