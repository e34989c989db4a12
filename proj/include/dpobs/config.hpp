#pragma once

// YAML experiment configs. Layout:
//
//   mesh:     {dim: 1, extents: [0, 1], counts: [64], gamma2: [right]}
//   phase:    {p: 2.5, q: 3, mu: "x"}
//   obstacle: "0.05"                  # expression, or "inf"
//   reaction: {name: interval, params: {lo: 1, hi: 1}, selection: midpoint}
//   boundary: {name: abs, params: {alpha: 0.1}, delta: 1e-3}
//   solver:   {mode: penalty, newton_tol: 1e-10, max_newton: 100, picard_fallback: true,
//              eps_grad: 0, schedule: [1, 0.1, 0.01]}
//   study:    {n_starts: 2, seed: 7, selection_rules: [], dedup_tol: 1e-6, ...}
//   output:   {directory: out, formats: [json, csv]}
//   oracle:   {mode: automatic}
//
// In 1D, extents are the interval ends [a, b]; in 2D they are the box sides [lx, ly].
// Every block except mesh is optional. Unknown keys are errors.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "dpobs/assembly.hpp"
#include "dpobs/catalog.hpp"
#include "dpobs/convergence_lab.hpp"
#include "dpobs/errors.hpp"
#include "dpobs/expression.hpp"
#include "dpobs/mesh.hpp"
#include "dpobs/qp_oracle.hpp"
#include "dpobs/solver.hpp"

namespace dpobs {

struct MeshBlock {
  int dim = 1;
  std::vector<double> extents{0.0, 1.0};
  std::vector<Index> counts{32};
  std::vector<Side> gamma2;
  bool operator==(const MeshBlock&) const = default;
};

struct PhaseBlock {
  double p = 2.0;
  double q = 2.0;
  Expression mu = Expression::constant(0.0);
  bool operator==(const PhaseBlock&) const = default;
};

struct ObstacleBlock {
  bool unconstrained = false;
  Expression phi = Expression::constant(0.0);
  bool operator==(const ObstacleBlock&) const = default;
};

struct ReactionBlock {
  std::string name = "constant";
  ParamMap params{{"c", 0.0}};
  SelectionRule selection;
  bool operator==(const ReactionBlock&) const = default;
};

struct BoundaryBlock {
  std::string name = "zero";
  ParamMap params;
  double delta = 0.0;
  bool operator==(const BoundaryBlock&) const = default;
};

struct SolverBlock {
  SolveMode mode = SolveMode::penalty;
  double newton_tol = 1e-10;
  int max_newton = 100;
  bool picard_fallback = true;
  double eps_grad = 0.0;
  std::vector<double> schedule = default_schedule();
  bool operator==(const SolverBlock&) const = default;
};

struct StudyBlock {
  int n_starts = 1;
  std::uint64_t seed = 20240601;
  std::vector<SelectionRule> selection_rules;
  double dedup_tol = 1e-6;
  double cauchy_ratio = 0.5;
  int cauchy_window = 3;
  double cauchy_floor = 1e-12;
  double bump_fraction = 0.01;
  int random_probes = 32;
  double vi_tol = 1e-8;
  double obstacle_tol = 1e-6;
  int threads = 1;
  bool operator==(const StudyBlock&) const = default;
};

struct OutputBlock {
  std::string directory = "out";
  std::vector<std::string> formats{"json", "csv"};
  bool operator==(const OutputBlock&) const = default;
};

struct ExperimentConfig {
  MeshBlock mesh;
  PhaseBlock phase;
  ObstacleBlock obstacle;
  ReactionBlock reaction;
  BoundaryBlock boundary;
  SolverBlock solver;
  StudyBlock study;
  OutputBlock output;
  OracleMode oracle_mode = OracleMode::automatic;
  bool operator==(const ExperimentConfig&) const = default;

  bool writes(const std::string& format) const {
    for (const auto& f : output.formats) {
      if (f == format) return true;
    }
    return false;
  }

  std::shared_ptr<const Mesh> build_mesh() const {
    const BoundaryPartitionSpec partition = BoundaryPartitionSpec::gamma2_on(mesh.gamma2);
    if (mesh.dim == 1) {
      return std::make_shared<const Mesh>(build_interval_mesh(mesh.extents[0], mesh.extents[1], mesh.counts[0], partition));
    }
    return std::make_shared<const Mesh>(
        build_rect_mesh(mesh.extents[0], mesh.extents[1], mesh.counts[0], mesh.counts[1], partition));
  }

  PhaseConfig build_phase(const Mesh& m) const { return PhaseConfig::sampled(m, phase.p, phase.q, phase.mu); }

  ProblemSpec build_problem() const {
    auto m = build_mesh();
    Eigen::VectorXd phi(m->num_nodes());
    for (Index i = 0; i < phi.size(); ++i) {
      const Point& x = m->nodes[static_cast<std::size_t>(i)];
      phi[i] = obstacle.unconstrained ? kInfinity : obstacle.phi(x[0], x[1]);
    }
    ReactionSpec r = ReactionSpec::from_catalog(reaction.name, reaction.params, reaction.selection);
    BoundaryPotentialSpec j = BoundaryPotentialSpec::from_catalog(boundary.name, boundary.params, boundary.delta);
    PhaseConfig ph = build_phase(*m);
    return ProblemSpec::create(std::move(m), std::move(ph), std::move(phi), std::move(r), j, solver.eps_grad);
  }

  SolverConfig solver_config() const {
    SolverConfig cfg;
    cfg.rho = solver.schedule.front();
    cfg.mode = solver.mode;
    cfg.newton_tol = solver.newton_tol;
    cfg.max_newton = solver.max_newton;
    cfg.picard_fallback = solver.picard_fallback;
    return cfg;
  }

  StudyConfig study_config() const {
    StudyConfig s;
    s.n_starts = study.n_starts;
    s.seed = study.seed;
    s.selection_rules = study.selection_rules;
    s.dedup_tol = study.dedup_tol;
    s.cauchy_ratio = study.cauchy_ratio;
    s.cauchy_window = study.cauchy_window;
    s.cauchy_floor = study.cauchy_floor;
    s.bump_fraction = study.bump_fraction;
    s.random_probes = study.random_probes;
    s.vi_tol = study.vi_tol;
    s.obstacle_tol = study.obstacle_tol;
    s.threads = study.threads;
    return s;
  }
};

inline const char* to_string(Side s) {
  switch (s) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::bottom: return "bottom";
    case Side::top: return "top";
  }
  return "left";
}

namespace detail {

inline std::string where(const YAML::Node& node, const std::string& key) {
  const auto mark = node.Mark();
  std::string out = "line " + std::to_string(mark.line >= 0 ? mark.line + 1 : 0);
  return out + ": '" + key + "'";
}

[[noreturn]] inline void config_fail(const YAML::Node& node, const std::string& key, const std::string& msg) {
  throw ConfigurationError(where(node, key) + ": " + msg);
}

inline void require_map(const YAML::Node& node, const std::string& key) {
  if (!node.IsMap()) config_fail(node, key, "expected a mapping");
}

inline void check_keys(const YAML::Node& node, const std::string& block, const std::set<std::string>& allowed) {
  require_map(node, block);
  for (const auto& kv : node) {
    const std::string k = kv.first.as<std::string>();
    if (!allowed.count(k)) config_fail(kv.first, block + "." + k, "unknown key");
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) config_fail(node, key, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    config_fail(node, key, "cannot convert '" + node.Scalar() + "'");
  }
}

inline double number(const YAML::Node& node, const std::string& key) {
  const double v = scalar<double>(node, key);
  if (!std::isfinite(v)) config_fail(node, key, "must be finite");
  return v;
}

inline double positive(const YAML::Node& node, const std::string& key) {
  const double v = number(node, key);
  if (!(v > 0.0)) config_fail(node, key, "must be > 0");
  return v;
}

inline double nonnegative(const YAML::Node& node, const std::string& key) {
  const double v = number(node, key);
  if (!(v >= 0.0)) config_fail(node, key, "must be >= 0");
  return v;
}

inline int integer_at_least(const YAML::Node& node, const std::string& key, int lo) {
  const int v = scalar<int>(node, key);
  if (v < lo) config_fail(node, key, "must be >= " + std::to_string(lo));
  return v;
}

inline Expression expression(const YAML::Node& node, const std::string& key) {
  const std::string text = scalar<std::string>(node, key);
  try {
    return Expression(text);
  } catch (const ConfigurationError& e) {
    config_fail(node, key, e.what());
  }
}

inline ParamMap params(const YAML::Node& node, const std::string& key) {
  ParamMap out;
  if (!node || node.IsNull()) return out;
  require_map(node, key);
  for (const auto& kv : node) {
    const std::string k = kv.first.as<std::string>();
    out[k] = number(kv.second, key + "." + k);
  }
  return out;
}

template <class Fn>
void rethrow_at(const YAML::Node& node, const std::string& key, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigurationError& e) {
    config_fail(node, key, e.what());
  }
}

inline Side parse_side(const YAML::Node& node, const std::string& key) {
  const std::string s = scalar<std::string>(node, key);
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  if (s == "bottom") return Side::bottom;
  if (s == "top") return Side::top;
  config_fail(node, key, "unknown side '" + s + "' (left, right, bottom, top)");
}

inline void parse_mesh(const YAML::Node& n, MeshBlock& m) {
  check_keys(n, "mesh", {"dim", "extents", "counts", "gamma2"});
  if (n["dim"]) {
    m.dim = scalar<int>(n["dim"], "mesh.dim");
    if (m.dim != 1 && m.dim != 2) config_fail(n["dim"], "mesh.dim", "must be 1 or 2");
  }
  const std::size_t want = static_cast<std::size_t>(m.dim == 1 ? 1 : 2);
  if (n["extents"]) {
    const auto e = n["extents"];
    if (!e.IsSequence() || e.size() != 2) config_fail(e, "mesh.extents", "expected a list of 2 numbers");
    m.extents = {number(e[0], "mesh.extents"), number(e[1], "mesh.extents")};
    if (m.dim == 1 && !(m.extents[1] > m.extents[0])) config_fail(e, "mesh.extents", "need a < b");
    if (m.dim == 2 && !(m.extents[0] > 0.0 && m.extents[1] > 0.0)) config_fail(e, "mesh.extents", "sides must be > 0");
  } else if (m.dim == 2) {
    m.extents = {1.0, 1.0};
  }
  if (n["counts"]) {
    const auto c = n["counts"];
    if (!c.IsSequence() || c.size() != want) {
      config_fail(c, "mesh.counts", "expected a list of " + std::to_string(want) + " integers");
    }
    m.counts.clear();
    for (const auto& v : c) m.counts.push_back(integer_at_least(v, "mesh.counts", 1));
  } else {
    m.counts.assign(want, 16);
  }
  m.gamma2.clear();
  if (n["gamma2"]) {
    const auto g = n["gamma2"];
    if (!g.IsSequence()) config_fail(g, "mesh.gamma2", "expected a list of sides");
    for (const auto& s : g) {
      const Side side = parse_side(s, "mesh.gamma2");
      if (m.dim == 1 && (side == Side::bottom || side == Side::top)) {
        config_fail(s, "mesh.gamma2", "1D meshes only have left and right ends");
      }
      m.gamma2.push_back(side);
    }
  }
}

inline void parse_phase(const YAML::Node& n, PhaseBlock& ph) {
  check_keys(n, "phase", {"p", "q", "mu"});
  if (n["p"]) ph.p = number(n["p"], "phase.p");
  if (n["q"]) ph.q = number(n["q"], "phase.q");
  if (n["mu"]) ph.mu = expression(n["mu"], "phase.mu");
  if (!(ph.p > 1.0)) config_fail(n["p"] ? n["p"] : n, "phase.p", "must be > 1");
  if (!(ph.q >= ph.p)) config_fail(n["q"] ? n["q"] : n, "phase.q", "must be >= p");
}

inline void parse_obstacle(const YAML::Node& n, ObstacleBlock& ob) {
  const std::string text = scalar<std::string>(n, "obstacle");
  if (text == "inf" || text == "+inf") {
    ob.unconstrained = true;
    ob.phi = Expression::constant(0.0);
  } else {
    ob.unconstrained = false;
    ob.phi = expression(n, "obstacle");
  }
}

inline void parse_reaction(const YAML::Node& n, ReactionBlock& r) {
  check_keys(n, "reaction", {"name", "params", "selection"});
  if (n["name"]) r.name = scalar<std::string>(n["name"], "reaction.name");
  r.params = params(n["params"], "reaction.params");
  if (n["selection"]) {
    rethrow_at(n["selection"], "reaction.selection",
               [&] { r.selection = SelectionRule::parse(scalar<std::string>(n["selection"], "reaction.selection")); });
  }
  rethrow_at(n["name"] ? n["name"] : n, "reaction", [&] { ReactionSpec::from_catalog(r.name, r.params, r.selection); });
}

inline void parse_boundary(const YAML::Node& n, BoundaryBlock& b) {
  check_keys(n, "boundary", {"name", "params", "delta"});
  if (n["name"]) b.name = scalar<std::string>(n["name"], "boundary.name");
  b.params = params(n["params"], "boundary.params");
  if (n["delta"]) b.delta = nonnegative(n["delta"], "boundary.delta");
  rethrow_at(n["name"] ? n["name"] : n, "boundary",
             [&] { BoundaryPotentialSpec::from_catalog(b.name, b.params, b.delta); });
}

inline void parse_solver(const YAML::Node& n, SolverBlock& s) {
  check_keys(n, "solver", {"mode", "newton_tol", "max_newton", "picard_fallback", "eps_grad", "schedule"});
  if (n["mode"]) {
    rethrow_at(n["mode"], "solver.mode",
               [&] { s.mode = parse_solve_mode(scalar<std::string>(n["mode"], "solver.mode")); });
  }
  if (n["newton_tol"]) s.newton_tol = positive(n["newton_tol"], "solver.newton_tol");
  if (n["max_newton"]) s.max_newton = integer_at_least(n["max_newton"], "solver.max_newton", 1);
  if (n["picard_fallback"]) s.picard_fallback = scalar<bool>(n["picard_fallback"], "solver.picard_fallback");
  if (n["eps_grad"]) s.eps_grad = nonnegative(n["eps_grad"], "solver.eps_grad");
  if (n["schedule"]) {
    const auto sch = n["schedule"];
    if (!sch.IsSequence() || sch.size() == 0) config_fail(sch, "solver.schedule", "expected a non-empty list of rho values");
    s.schedule.clear();
    for (const auto& v : sch) {
      const double rho = number(v, "solver.schedule (rho)");
      if (!(rho > 0.0)) config_fail(v, "solver.schedule (rho)", "rho must be > 0");
      if (!s.schedule.empty() && !(rho < s.schedule.back())) {
        config_fail(v, "solver.schedule (rho)", "schedule must be strictly decreasing");
      }
      s.schedule.push_back(rho);
    }
  }
}

inline void parse_study(const YAML::Node& n, StudyBlock& s) {
  check_keys(n, "study", {"n_starts", "seed", "selection_rules", "dedup_tol", "cauchy_ratio", "cauchy_window",
                          "cauchy_floor", "bump_fraction", "random_probes", "vi_tol", "obstacle_tol", "threads"});
  if (n["n_starts"]) s.n_starts = integer_at_least(n["n_starts"], "study.n_starts", 1);
  if (n["seed"]) s.seed = scalar<std::uint64_t>(n["seed"], "study.seed");
  if (n["selection_rules"]) {
    const auto r = n["selection_rules"];
    if (!r.IsSequence()) config_fail(r, "study.selection_rules", "expected a list");
    s.selection_rules.clear();
    for (const auto& v : r) {
      rethrow_at(v, "study.selection_rules", [&] {
        s.selection_rules.push_back(SelectionRule::parse(scalar<std::string>(v, "study.selection_rules")));
      });
    }
  }
  if (n["dedup_tol"]) s.dedup_tol = positive(n["dedup_tol"], "study.dedup_tol");
  if (n["cauchy_ratio"]) {
    s.cauchy_ratio = positive(n["cauchy_ratio"], "study.cauchy_ratio");
    if (!(s.cauchy_ratio < 1.0)) config_fail(n["cauchy_ratio"], "study.cauchy_ratio", "must be < 1");
  }
  if (n["cauchy_window"]) s.cauchy_window = integer_at_least(n["cauchy_window"], "study.cauchy_window", 1);
  if (n["cauchy_floor"]) s.cauchy_floor = nonnegative(n["cauchy_floor"], "study.cauchy_floor");
  if (n["bump_fraction"]) s.bump_fraction = positive(n["bump_fraction"], "study.bump_fraction");
  if (n["random_probes"]) s.random_probes = integer_at_least(n["random_probes"], "study.random_probes", 0);
  if (n["vi_tol"]) s.vi_tol = nonnegative(n["vi_tol"], "study.vi_tol");
  if (n["obstacle_tol"]) s.obstacle_tol = nonnegative(n["obstacle_tol"], "study.obstacle_tol");
  if (n["threads"]) s.threads = integer_at_least(n["threads"], "study.threads", 1);
}

inline void parse_output(const YAML::Node& n, OutputBlock& o) {
  check_keys(n, "output", {"directory", "formats"});
  if (n["directory"]) o.directory = scalar<std::string>(n["directory"], "output.directory");
  if (n["formats"]) {
    const auto f = n["formats"];
    if (!f.IsSequence()) config_fail(f, "output.formats", "expected a list");
    o.formats.clear();
    for (const auto& v : f) {
      const std::string fmt = scalar<std::string>(v, "output.formats");
      if (fmt != "json" && fmt != "csv") config_fail(v, "output.formats", "unknown format '" + fmt + "'");
      o.formats.push_back(fmt);
    }
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigurationError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  ExperimentConfig cfg;
  detail::check_keys(root, "config",
                     {"mesh", "phase", "obstacle", "reaction", "boundary", "solver", "study", "output", "oracle"});
  if (!root["mesh"]) throw ConfigurationError("missing required block 'mesh'");
  detail::parse_mesh(root["mesh"], cfg.mesh);
  if (root["phase"]) detail::parse_phase(root["phase"], cfg.phase);
  if (root["obstacle"]) detail::parse_obstacle(root["obstacle"], cfg.obstacle);
  if (root["reaction"]) detail::parse_reaction(root["reaction"], cfg.reaction);
  if (root["boundary"]) detail::parse_boundary(root["boundary"], cfg.boundary);
  if (root["solver"]) detail::parse_solver(root["solver"], cfg.solver);
  if (root["study"]) detail::parse_study(root["study"], cfg.study);
  if (root["output"]) detail::parse_output(root["output"], cfg.output);
  if (root["oracle"]) {
    const auto o = root["oracle"];
    detail::check_keys(o, "oracle", {"mode"});
    if (o["mode"]) {
      detail::rethrow_at(o["mode"], "oracle.mode",
                         [&] { cfg.oracle_mode = parse_oracle_mode(detail::scalar<std::string>(o["mode"], "oracle.mode")); });
    }
  }
  // Mesh-dependent invariants: obstacle sign, mu sign, Gamma1 nonempty.
  try {
    cfg.build_problem();
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(std::string("invalid problem: ") + e.what());
  } catch (const EvaluationError& e) {
    throw ConfigurationError(std::string("invalid problem: ") + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

/// Canonical serialization: fixed key order, every field written, doubles with 17 significant digits.
inline std::string to_yaml(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  out << YAML::Key << "mesh" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dim" << YAML::Value << c.mesh.dim;
  out << YAML::Key << "extents" << YAML::Value << YAML::Flow << c.mesh.extents;
  out << YAML::Key << "counts" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (Index n : c.mesh.counts) out << static_cast<long long>(n);
  out << YAML::EndSeq;
  out << YAML::Key << "gamma2" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (Side s : c.mesh.gamma2) out << to_string(s);
  out << YAML::EndSeq << YAML::EndMap;

  out << YAML::Key << "phase" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "p" << YAML::Value << c.phase.p;
  out << YAML::Key << "q" << YAML::Value << c.phase.q;
  out << YAML::Key << "mu" << YAML::Value << YAML::DoubleQuoted << c.phase.mu.source();
  out << YAML::EndMap;

  out << YAML::Key << "obstacle" << YAML::Value << YAML::DoubleQuoted
      << (c.obstacle.unconstrained ? std::string("inf") : c.obstacle.phi.source());

  out << YAML::Key << "reaction" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << c.reaction.name;
  out << YAML::Key << "params" << YAML::Value << YAML::Flow << YAML::BeginMap;
  for (const auto& [k, v] : c.reaction.params) out << YAML::Key << k << YAML::Value << v;
  out << YAML::EndMap;
  out << YAML::Key << "selection" << YAML::Value << c.reaction.selection.name();
  out << YAML::EndMap;

  out << YAML::Key << "boundary" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << c.boundary.name;
  out << YAML::Key << "params" << YAML::Value << YAML::Flow << YAML::BeginMap;
  for (const auto& [k, v] : c.boundary.params) out << YAML::Key << k << YAML::Value << v;
  out << YAML::EndMap;
  out << YAML::Key << "delta" << YAML::Value << c.boundary.delta;
  out << YAML::EndMap;

  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << to_string(c.solver.mode);
  out << YAML::Key << "newton_tol" << YAML::Value << c.solver.newton_tol;
  out << YAML::Key << "max_newton" << YAML::Value << c.solver.max_newton;
  out << YAML::Key << "picard_fallback" << YAML::Value << c.solver.picard_fallback;
  out << YAML::Key << "eps_grad" << YAML::Value << c.solver.eps_grad;
  out << YAML::Key << "schedule" << YAML::Value << YAML::Flow << c.solver.schedule;
  out << YAML::EndMap;

  out << YAML::Key << "study" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_starts" << YAML::Value << c.study.n_starts;
  out << YAML::Key << "seed" << YAML::Value << static_cast<unsigned long long>(c.study.seed);
  out << YAML::Key << "selection_rules" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& r : c.study.selection_rules) out << r.name();
  out << YAML::EndSeq;
  out << YAML::Key << "dedup_tol" << YAML::Value << c.study.dedup_tol;
  out << YAML::Key << "cauchy_ratio" << YAML::Value << c.study.cauchy_ratio;
  out << YAML::Key << "cauchy_window" << YAML::Value << c.study.cauchy_window;
  out << YAML::Key << "cauchy_floor" << YAML::Value << c.study.cauchy_floor;
  out << YAML::Key << "bump_fraction" << YAML::Value << c.study.bump_fraction;
  out << YAML::Key << "random_probes" << YAML::Value << c.study.random_probes;
  out << YAML::Key << "vi_tol" << YAML::Value << c.study.vi_tol;
  out << YAML::Key << "obstacle_tol" << YAML::Value << c.study.obstacle_tol;
  out << YAML::Key << "threads" << YAML::Value << c.study.threads;
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "directory" << YAML::Value << c.output.directory;
  out << YAML::Key << "formats" << YAML::Value << YAML::Flow << c.output.formats;
  out << YAML::EndMap;

  out << YAML::Key << "oracle" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << to_string(c.oracle_mode);
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

/// FNV-1a (64 bit) of the canonical serialization with output location and thread count removed,
/// so the hash identifies the experiment rather than where or how fast it ran.
inline std::string config_hash(const ExperimentConfig& c) {
  ExperimentConfig canon = c;
  canon.output.directory = "";
  canon.study.threads = 1;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_yaml(canon)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dpobs
