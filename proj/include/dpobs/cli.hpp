#pragma once

// Command-line front end. run_cli returns the process exit status:
// 0 ok, 2 configuration error, 3 non-convergence or oracle failure, 4 hypothesis failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpobs/config.hpp"
#include "dpobs/convergence_lab.hpp"
#include "dpobs/hypotheses.hpp"
#include "dpobs/musielak_orlicz.hpp"
#include "dpobs/qp_oracle.hpp"
#include "dpobs/report_io.hpp"
#include "dpobs/solver.hpp"

namespace dpobs {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNonConvergence = 3, kExitHypothesis = 4 };

struct CliOptions {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string expr;
};

namespace detail {

struct Loaded {
  ExperimentConfig cfg;
  Provenance prov;
  std::string out_dir;
};

inline Loaded load(const CliOptions& opt) {
  Loaded l;
  l.cfg = load_config(opt.config);
  if (opt.seed) l.cfg.study.seed = *opt.seed;
  if (opt.threads) {
    if (*opt.threads < 1) throw ConfigurationError("--threads must be >= 1");
    l.cfg.study.threads = *opt.threads;
  }
  l.out_dir = opt.out ? *opt.out : l.cfg.output.directory;
  l.prov = {config_hash(l.cfg), l.cfg.study.seed};
  return l;
}

inline std::string prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigurationError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

inline int cmd_solve(const CliOptions& opt, std::ostream& out) {
  const Loaded l = load(opt);
  const ProblemSpec spec = l.cfg.build_problem();
  const SolveReport rep = solve_penalized(spec, l.cfg.solver_config(), DiscreteFunction::zero(spec.mesh));
  const std::string dir = prepare_dir(l.out_dir);
  if (l.cfg.writes("json")) write_json(dir + "/solve_report.json", to_json(rep), l.prov);
  if (l.cfg.writes("csv")) write_text(dir + "/solution.csv", solution_csv(spec, rep.solution, rep.eta, l.prov));
  out << "rho = " << fmt17(rep.rho) << "\nconverged = " << (rep.converged ? "true" : "false")
      << "\niterations = " << rep.iterations << "\nresidual_norm = " << fmt17(rep.residual_norm)
      << "\nviolation_sup = " << fmt17(rep.violation_sup) << "\n";
  return rep.converged ? kExitOk : kExitNonConvergence;
}

inline int cmd_study(const CliOptions& opt, std::ostream& out) {
  const Loaded l = load(opt);
  const ProblemSpec spec = l.cfg.build_problem();
  const KuratowskiDiagnostics d =
      kuratowski_study(spec, l.cfg.solver.schedule, l.cfg.solver_config(), l.cfg.study_config());
  const std::string dir = prepare_dir(l.out_dir);
  if (l.cfg.writes("json")) write_json(dir + "/study.json", to_json(d), l.prov);
  if (l.cfg.writes("csv")) write_text(dir + "/study.csv", study_csv(d, spec.mesh->has_gamma2(), l.prov));
  std::size_t in_s = 0;
  for (const auto& c : d.candidates) in_s += c.in_solution_set() ? 1 : 0;
  out << "stages = " << d.samples.size() << "/" << d.schedule.size() << "\nlimit_candidates = " << d.candidates.size()
      << "\nverified = " << in_s << "\nradius = " << fmt17(d.radius) << "\n";
  return d.complete ? kExitOk : kExitNonConvergence;
}

inline int cmd_norm_tool(const CliOptions& opt, std::ostream& out) {
  const ExperimentConfig cfg = load_config(opt.config);
  Expression f;
  try {
    f = Expression(opt.expr);
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(std::string("--expr: ") + e.what());
  }
  const auto mesh = cfg.build_mesh();
  const PhaseConfig phase = cfg.build_phase(*mesh);
  const DiscreteFunction u = DiscreteFunction::interpolate(mesh, f);
  out << "modular = " << fmt17(modular(u, phase).value) << "\nluxemburg_norm = " << fmt17(luxemburg_norm(u, phase))
      << "\nweighted_seminorm = " << fmt17(weighted_seminorm(u, phase)) << "\n";
  return kExitOk;
}

inline int cmd_check(const CliOptions& opt, std::ostream& out) {
  const Loaded l = load(opt);
  const ProblemSpec spec = l.cfg.build_problem();
  const HypothesisReport h = validate_hypotheses(spec, l.cfg.study.seed);
  out << "lambda1_est = " << fmt17(h.lambda1_est) << "\nlambda2_est = " << fmt17(h.lambda2_est)
      << "\ncertified = " << (h.certified ? "true" : "false") << "\ndelta(theta1,theta2,theta3) = " << h.delta_theta1
      << "," << h.delta_theta2 << "," << h.delta_theta3 << "\nsmallness_lhs = " << fmt17(h.smallness_lhs)
      << "\npasses = " << (h.passes ? "true" : "false") << "\n";
  for (const auto& n : h.notes) out << "note: " << n << "\n";
  return h.passes ? kExitOk : kExitHypothesis;
}

inline int cmd_oracle(const CliOptions& opt, std::ostream& out) {
  const Loaded l = load(opt);
  const ProblemSpec spec = l.cfg.build_problem();
  const OracleResult r = qp_oracle(spec, l.cfg.oracle_mode);
  const std::string dir = prepare_dir(l.out_dir);
  if (l.cfg.writes("json")) {
    Json j;
    j["mode"] = to_string(r.mode);
    j["iterations"] = r.iterations;
    j["u"] = json_vector(r.solution.values());
    j["eta"] = json_vector(r.eta);
    write_json(dir + "/oracle.json", j, l.prov);
  }
  if (l.cfg.writes("csv")) write_text(dir + "/oracle.csv", solution_csv(spec, r.solution, r.eta, l.prov));
  out << "mode = " << to_string(r.mode) << "\niterations = " << r.iterations << "\n";
  return kExitOk;
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Double-phase obstacle problem laboratory"};
  app.require_subcommand(1);
  CliOptions opt;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "experiment config (YAML)")->required();
    sub->add_option("--out", opt.out, "output directory (overrides output.directory)");
    sub->add_option("--seed", opt.seed, "random seed (overrides study.seed)");
    sub->add_option("--threads", opt.threads, "worker threads (overrides study.threads)");
  };
  CLI::App* solve = app.add_subcommand("solve", "single penalized solve at the first schedule entry");
  CLI::App* study = app.add_subcommand("study", "multi-start study along the rho schedule");
  CLI::App* norm = app.add_subcommand("norm-tool", "modular, Luxemburg norm and seminorm of an expression");
  CLI::App* check = app.add_subcommand("check", "structural hypotheses and smallness condition");
  CLI::App* oracle = app.add_subcommand("oracle", "quadratic-program oracle (p = q = 2)");
  for (CLI::App* sub : {solve, study, norm, check, oracle}) common(sub);
  norm->add_option("--expr", opt.expr, "function of x (and y)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (solve->parsed()) return detail::cmd_solve(opt, out);
    if (study->parsed()) return detail::cmd_study(opt, out);
    if (norm->parsed()) return detail::cmd_norm_tool(opt, out);
    if (check->parsed()) return detail::cmd_check(opt, out);
    if (oracle->parsed()) return detail::cmd_oracle(opt, out);
  } catch (const ConfigurationError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const OracleFailure& e) {
    err << "oracle failure: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const EmptySampleError& e) {
    err << "no converged sample: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const SingularityError& e) {
    err << "singular system: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const EvaluationError& e) {
    err << "evaluation error: " << e.what() << "\n";
    return kExitNonConvergence;
  }
  return kExitConfig;
}

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace dpobs
