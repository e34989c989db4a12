#pragma once

// Multi-start sampling of the penalized solution sets S_n along a rho schedule,
// set-limit diagnostics on warm-started chains, and verification of the limit
// candidates against the variational inequality on a finite probe set.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include "dpobs/assembly.hpp"
#include "dpobs/errors.hpp"
#include "dpobs/musielak_orlicz.hpp"
#include "dpobs/nonsmooth.hpp"
#include "dpobs/solver.hpp"

namespace dpobs {

struct StudyConfig {
  int n_starts = 4;
  std::vector<SelectionRule> selection_rules;  // empty: the rule carried by the reaction
  std::uint64_t seed = 20240601;
  double dedup_tol = 1e-6;
  double cauchy_ratio = 0.5;
  int cauchy_window = 3;
  double cauchy_floor = 1e-12;
  double bump_fraction = 0.01;
  int random_probes = 32;
  double vi_tol = 1e-8;
  double obstacle_tol = 1e-6;
  int threads = 1;

  void validate() const {
    if (n_starts < 1) throw ConfigurationError("n_starts must be >= 1");
    if (!(dedup_tol > 0.0)) throw ConfigurationError("dedup_tol must be > 0");
    if (!(cauchy_ratio > 0.0 && cauchy_ratio < 1.0)) throw ConfigurationError("cauchy_ratio must lie in (0, 1)");
    if (cauchy_window < 1) throw ConfigurationError("cauchy_window must be >= 1");
    if (!(cauchy_floor >= 0.0)) throw ConfigurationError("cauchy_floor must be >= 0");
    if (!(bump_fraction > 0.0)) throw ConfigurationError("bump_fraction must be > 0");
    if (random_probes < 0) throw ConfigurationError("random_probes must be >= 0");
    if (!(vi_tol >= 0.0) || !(obstacle_tol >= 0.0)) throw ConfigurationError("tolerances must be >= 0");
    if (threads < 1) throw ConfigurationError("threads must be >= 1");
  }

  std::vector<SelectionRule> rules_for(const ProblemSpec& spec) const {
    return selection_rules.empty() ? std::vector<SelectionRule>{spec.reaction.selection} : selection_rules;
  }
};

struct SampleMember {
  DiscreteFunction u;
  Eigen::VectorXd eta;
  SelectionRule rule;
  int chain = 0;
};

struct SolutionSample {
  double rho = 0.0;
  double dedup_tol = 1e-6;
  std::vector<SampleMember> members;
  int attempted = 0;
  int failed = 0;
};

namespace detail {

template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int k = next++; k < count; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

inline double finite_sup(const Eigen::VectorXd& v) {
  double m = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) m = std::max(m, std::abs(v[i]));
  }
  return m;
}

/// Start k is the same vector for every selection rule and every thread count.
inline DiscreteFunction random_start(const ProblemSpec& spec, std::uint64_t seed, int k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k)};
  std::mt19937_64 rng(seq);
  const double bound = finite_sup(spec.obstacle) + 1.0;
  std::uniform_real_distribution<double> unif(-bound, bound);
  Eigen::VectorXd u(spec.num_nodes());
  for (Index i = 0; i < u.size(); ++i) {
    const double value = unif(rng);
    u[i] = spec.dirichlet[static_cast<std::size_t>(i)] ? 0.0 : value;
  }
  return DiscreteFunction(spec.mesh, u);
}

inline ProblemSpec with_rule(const ProblemSpec& spec, const SelectionRule& rule) {
  ProblemSpec out = spec;
  out.reaction.selection = rule;
  return out;
}

/// Appends members that are farther than dedup_tol (lumped norm) from every kept member.
inline void dedup_insert(SolutionSample& sample, const ProblemSpec& spec, SampleMember member) {
  for (const auto& kept : sample.members) {
    if (lumped_norm(kept.u.values() - member.u.values(), spec.weights) <= sample.dedup_tol) return;
  }
  sample.members.push_back(std::move(member));
}

}  // namespace detail

/// Independent multi-start solves at a single rho for every (start, selection rule) pair.
inline SolutionSample sample_solution_set(const ProblemSpec& spec, const SolverConfig& cfg, const StudyConfig& study) {
  study.validate();
  cfg.validate();
  const auto rules = study.rules_for(spec);
  const int total = study.n_starts * static_cast<int>(rules.size());
  std::vector<std::optional<SolveReport>> reports(static_cast<std::size_t>(total));
  detail::parallel_for(total, study.threads, [&](int job) {
    const int start = job % study.n_starts;
    const SelectionRule& rule = rules[static_cast<std::size_t>(job / study.n_starts)];
    const ProblemSpec local = detail::with_rule(spec, rule);
    reports[static_cast<std::size_t>(job)] =
        solve_penalized(local, cfg, detail::random_start(spec, study.seed, start));
  });
  SolutionSample sample;
  sample.rho = cfg.rho;
  sample.dedup_tol = study.dedup_tol;
  sample.attempted = total;
  for (int job = 0; job < total; ++job) {
    const SolveReport& rep = *reports[static_cast<std::size_t>(job)];
    if (!rep.converged) {
      ++sample.failed;
      continue;
    }
    detail::dedup_insert(sample, spec,
                         {rep.solution, rep.eta, rules[static_cast<std::size_t>(job / study.n_starts)], job});
  }
  if (sample.members.empty()) {
    throw EmptySampleError("no start converged at rho = " + std::to_string(cfg.rho));
  }
  return sample;
}

struct StageRecord {
  double rho = 0.0;
  int chain = 0;
  SelectionRule rule;
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
  double violation_sup = 0.0;
  double violation_l1 = 0.0;
  double chain_distance = std::numeric_limits<double>::quiet_NaN();  // NaN at the first stage
  double vi_residual = std::numeric_limits<double>::quiet_NaN();      // NaN when the stage did not converge
  double boundary_energy = std::numeric_limits<double>::quiet_NaN();
};

struct NearestPoint {
  double rho = 0.0;
  int member_chain = 0;
  double distance = 0.0;
};

struct LimitCandidate {
  int chain = 0;
  SelectionRule rule;
  DiscreteFunction u;
  Eigen::VectorXd eta;
  bool cauchy = false;
  double vi_residual = 0.0;
  std::size_t probe_count = 0;
  double max_excess = 0.0;  // max_i (u_i - Phi_i)
  bool passes_vi = false;
  bool feasible = false;
  std::vector<NearestPoint> trace;

  bool in_solution_set() const { return cauchy && passes_vi && feasible; }
};

struct KuratowskiDiagnostics {
  std::vector<double> schedule;
  StudyConfig config;
  std::vector<SolutionSample> samples;  // one per completed stage
  std::vector<StageRecord> records;     // stage-major, chains in index order
  std::vector<LimitCandidate> candidates;
  double radius = 0.0;                  // max V-norm over every sampled member
  bool complete = true;                 // false when a stage produced no converged chain
};

/// Probe set around u: P_K(u), P_K(u +- b e_i) for every node, and random K-members near u,
/// with b = bump_fraction * ||u||_inf (or bump_fraction when u = 0).
inline std::vector<Eigen::VectorXd> vi_probe_set(const ProblemSpec& spec, const Eigen::VectorXd& u,
                                                 const StudyConfig& study, std::uint64_t seed) {
  const ConstraintSetK K = ConstraintSetK::from_problem(spec);
  const double sup = u.cwiseAbs().maxCoeff();
  const double bump = study.bump_fraction * (sup > 0.0 ? sup : 1.0);
  std::vector<Eigen::VectorXd> probes;
  probes.reserve(static_cast<std::size_t>(2 * u.size() + study.random_probes + 1));
  probes.push_back(project_K(u, K));
  for (Index i = 0; i < u.size(); ++i) {
    for (double s : {1.0, -1.0}) {
      Eigen::VectorXd v = u;
      v[i] += s * bump;
      probes.push_back(project_K(v, K));
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int k = 0; k < study.random_probes; ++k) {
    Eigen::VectorXd v = u;
    for (Index i = 0; i < v.size(); ++i) v[i] += bump * unif(rng);
    probes.push_back(project_K(v, K));
  }
  return probes;
}

/// The operator used for verification: eps_grad is dropped when the exponents allow it.
inline ProblemSpec verification_spec(const ProblemSpec& spec, double eps_grad) {
  ProblemSpec out = spec;
  out.eps_grad = spec.needs_gradient_regularization() ? eps_grad : 0.0;
  return out;
}

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x.size() && k < y.size(); ++k) {
    if (x[k] > 0.0 && y[k] > 0.0) {
      lx.push_back(std::log(x[k]));
      ly.push_back(std::log(y[k]));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sx += lx[k];
    sy += ly[k];
    sxx += lx[k] * lx[k];
    sxy += lx[k] * ly[k];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

/// Per stage, the sample member closest to u in the V-norm.
inline std::vector<NearestPoint> nearest_point_trace(const KuratowskiDiagnostics& study, const ProblemSpec& spec,
                                                     const DiscreteFunction& u) {
  std::vector<NearestPoint> trace;
  for (const auto& sample : study.samples) {
    if (sample.members.empty()) throw EmptySampleError("empty sample at rho = " + std::to_string(sample.rho));
    NearestPoint best{sample.rho, -1, std::numeric_limits<double>::infinity()};
    for (const auto& m : sample.members) {
      const double d = v_norm(u - m.u, spec.phase);
      if (d < best.distance) best = {sample.rho, m.chain, d};
    }
    trace.push_back(best);
  }
  return trace;
}

inline KuratowskiDiagnostics kuratowski_study(const ProblemSpec& spec, const std::vector<double>& schedule,
                                              const SolverConfig& cfg, const StudyConfig& study) {
  study.validate();
  cfg.validate();
  if (schedule.empty()) throw ConfigurationError("rho schedule is empty");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0)) throw ConfigurationError("rho schedule entries must be > 0");
    if (k > 0 && !(schedule[k] < schedule[k - 1])) throw ConfigurationError("rho schedule must be strictly decreasing");
  }
  const auto rules = study.rules_for(spec);
  const int n_chains = study.n_starts * static_cast<int>(rules.size());
  const double eps0 = cfg.eps_grad ? *cfg.eps_grad : spec.eps_grad;
  const double delta0 = cfg.delta_boundary ? *cfg.delta_boundary : spec.boundary.delta;

  KuratowskiDiagnostics diag;
  diag.schedule = schedule;
  diag.config = study;

  std::vector<ProblemSpec> specs;
  std::vector<DiscreteFunction> state;
  std::vector<bool> alive(static_cast<std::size_t>(n_chains), true);
  for (int c = 0; c < n_chains; ++c) {
    specs.push_back(detail::with_rule(spec, rules[static_cast<std::size_t>(c / study.n_starts)]));
    state.push_back(detail::random_start(spec, study.seed, c % study.n_starts));
  }
  // per chain: distance history and the last converged report
  std::vector<std::vector<double>> distances(static_cast<std::size_t>(n_chains));
  std::vector<std::optional<SolveReport>> last(static_cast<std::size_t>(n_chains));
  double last_eps = eps0;

  for (std::size_t n = 0; n < schedule.size(); ++n) {
    SolverConfig stage = cfg;
    stage.rho = schedule[n];
    const double scale = schedule[n] / schedule.front();
    stage.eps_grad = eps0 * scale;
    stage.delta_boundary = delta0 * scale;
    last_eps = *stage.eps_grad;

    std::vector<std::optional<SolveReport>> reports(static_cast<std::size_t>(n_chains));
    detail::parallel_for(n_chains, study.threads, [&](int c) {
      if (!alive[static_cast<std::size_t>(c)]) return;
      reports[static_cast<std::size_t>(c)] = solve_penalized(specs[static_cast<std::size_t>(c)], stage,
                                                             state[static_cast<std::size_t>(c)]);
    });

    SolutionSample sample;
    sample.rho = schedule[n];
    sample.dedup_tol = study.dedup_tol;
    for (int c = 0; c < n_chains; ++c) {
      const auto& rep = reports[static_cast<std::size_t>(c)];
      if (!rep) continue;
      ++sample.attempted;
      if (!rep->converged) {
        ++sample.failed;
        alive[static_cast<std::size_t>(c)] = false;
        last[static_cast<std::size_t>(c)].reset();
        continue;
      }
      detail::dedup_insert(sample, spec, {rep->solution, rep->eta, rules[static_cast<std::size_t>(c / study.n_starts)], c});
    }
    if (sample.members.empty()) {
      diag.complete = false;
      break;
    }

    const ProblemSpec check = verification_spec(spec, last_eps);
    std::vector<StageRecord> stage_records(static_cast<std::size_t>(n_chains));
    std::vector<bool> has_record(static_cast<std::size_t>(n_chains), false);
    detail::parallel_for(n_chains, study.threads, [&](int c) {
      const auto& rep = reports[static_cast<std::size_t>(c)];
      if (!rep) return;
      StageRecord r;
      r.rho = schedule[n];
      r.chain = c;
      r.rule = rules[static_cast<std::size_t>(c / study.n_starts)];
      r.converged = rep->converged;
      r.iterations = rep->iterations;
      r.residual_norm = rep->residual_norm;
      r.violation_sup = rep->violation_sup;
      r.violation_l1 = rep->violation_l1;
      if (rep->converged) {
        if (n > 0) {
          const auto& prev = diag.samples.back();
          double best = std::numeric_limits<double>::infinity();
          for (const auto& m : prev.members) best = std::min(best, v_norm(rep->solution - m.u, spec.phase));
          r.chain_distance = best;
        }
        const auto probes = vi_probe_set(spec, rep->solution.values(), study,
                                         study.seed ^ (0x9e3779b97f4a7c15ULL * (n + 1) + static_cast<std::uint64_t>(c)));
        r.vi_residual = vi_residual(check, rep->solution.values(), rep->eta, probes);
        r.boundary_energy = boundary_energy(spec, rep->solution.values());
      }
      stage_records[static_cast<std::size_t>(c)] = r;
      has_record[static_cast<std::size_t>(c)] = true;
    });
    for (int c = 0; c < n_chains; ++c) {
      if (!has_record[static_cast<std::size_t>(c)]) continue;
      const StageRecord& r = stage_records[static_cast<std::size_t>(c)];
      diag.records.push_back(r);
      if (r.converged) {
        if (!std::isnan(r.chain_distance)) distances[static_cast<std::size_t>(c)].push_back(r.chain_distance);
        state[static_cast<std::size_t>(c)] = reports[static_cast<std::size_t>(c)]->solution;
        last[static_cast<std::size_t>(c)] = reports[static_cast<std::size_t>(c)];
      }
    }
    for (const auto& m : sample.members) diag.radius = std::max(diag.radius, v_norm(m.u, spec.phase));
    diag.samples.push_back(std::move(sample));
  }

  if (diag.samples.empty()) throw EmptySampleError("no chain converged at rho = " + std::to_string(schedule.front()));

  const ProblemSpec check = verification_spec(spec, last_eps);
  for (int c = 0; c < n_chains; ++c) {
    const auto& rep = last[static_cast<std::size_t>(c)];
    if (!rep || !alive[static_cast<std::size_t>(c)]) continue;
    LimitCandidate cand;
    cand.chain = c;
    cand.rule = rules[static_cast<std::size_t>(c / study.n_starts)];
    cand.u = rep->solution;
    cand.eta = rep->eta;
    const auto& d = distances[static_cast<std::size_t>(c)];
    const std::size_t w = static_cast<std::size_t>(study.cauchy_window);
    cand.cauchy = d.size() >= w + 1;
    for (std::size_t k = d.size() >= w + 1 ? d.size() - w : d.size(); k < d.size(); ++k) {
      if (!(d[k] <= study.cauchy_ratio * d[k - 1] || d[k] <= study.cauchy_floor)) cand.cauchy = false;
    }
    const auto probes = vi_probe_set(spec, cand.u.values(), study, study.seed + 1000003ULL * static_cast<std::uint64_t>(c + 1));
    cand.probe_count = probes.size();
    cand.vi_residual = vi_residual(check, cand.u.values(), cand.eta, probes);
    cand.passes_vi = cand.vi_residual >= -study.vi_tol;
    cand.max_excess = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < cand.u.size(); ++i) cand.max_excess = std::max(cand.max_excess, cand.u[i] - spec.obstacle[i]);
    cand.feasible = cand.max_excess <= study.obstacle_tol;
    cand.trace = nearest_point_trace(diag, spec, cand.u);
    diag.candidates.push_back(std::move(cand));
  }
  return diag;
}

}  // namespace dpobs
