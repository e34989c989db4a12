#pragma once

// JSON and CSV writers for solve reports, oracle results and studies.
// Every file carries the config hash and seed.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "dpobs/convergence_lab.hpp"
#include "dpobs/errors.hpp"
#include "dpobs/hypotheses.hpp"
#include "dpobs/qp_oracle.hpp"
#include "dpobs/solver.hpp"

namespace dpobs {

using Json = nlohmann::ordered_json;

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
};

inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(fmt17(v)); }

inline Json json_vector(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(json_number(v[i]));
  return a;
}

inline Json to_json(const SolveReport& r) {
  Json j;
  j["rho"] = r.rho;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["residual_norm"] = json_number(r.residual_norm);
  j["tolerance"] = json_number(r.tolerance);
  j["violation_sup"] = json_number(r.violation_sup);
  j["violation_l1"] = json_number(r.violation_l1);
  j["eps_grad"] = r.eps_grad;
  j["delta_boundary"] = r.delta_boundary;
  Json trace = Json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"residual_norm", json_number(t.residual_norm)},
                     {"step_length", t.step_length},
                     {"kind", t.kind == StepKind::newton ? "newton" : "picard"},
                     {"regularized", t.regularized}});
  }
  j["trace"] = trace;
  j["u"] = json_vector(r.solution.values());
  j["eta"] = json_vector(r.eta);
  return j;
}

inline Json to_json(const HypothesisReport& h) {
  Json j;
  j["lambda1_est"] = h.lambda1_est;
  j["lambda2_est"] = h.lambda2_est;
  j["certified"] = h.certified;
  j["delta_theta1"] = h.delta_theta1;
  j["delta_theta2"] = h.delta_theta2;
  j["delta_theta3"] = h.delta_theta3;
  j["smallness_lhs"] = h.smallness_lhs;
  j["passes"] = h.passes;
  j["notes"] = h.notes;
  return j;
}

inline Json to_json(const KuratowskiDiagnostics& d) {
  Json j;
  j["schedule"] = d.schedule;
  j["complete"] = d.complete;
  j["radius"] = d.radius;
  const StudyConfig& s = d.config;
  j["thresholds"] = {{"n_starts", s.n_starts},         {"dedup_tol", s.dedup_tol},
                     {"cauchy_ratio", s.cauchy_ratio}, {"cauchy_window", s.cauchy_window},
                     {"cauchy_floor", s.cauchy_floor}, {"bump_fraction", s.bump_fraction},
                     {"random_probes", s.random_probes}, {"vi_tol", s.vi_tol},
                     {"obstacle_tol", s.obstacle_tol}};
  Json samples = Json::array();
  for (const auto& sm : d.samples) {
    Json chains = Json::array();
    for (const auto& m : sm.members) chains.push_back(m.chain);
    samples.push_back({{"rho", sm.rho},
                       {"members", sm.members.size()},
                       {"member_chains", chains},
                       {"attempted", sm.attempted},
                       {"failed", sm.failed}});
  }
  j["samples"] = samples;
  Json records = Json::array();
  for (const auto& r : d.records) {
    records.push_back({{"rho", r.rho},
                       {"chain", r.chain},
                       {"selection", r.rule.name()},
                       {"converged", r.converged},
                       {"iterations", r.iterations},
                       {"residual_norm", json_number(r.residual_norm)},
                       {"violation_sup", json_number(r.violation_sup)},
                       {"violation_l1", json_number(r.violation_l1)},
                       {"chain_distance", json_number(r.chain_distance)},
                       {"vi_residual", json_number(r.vi_residual)},
                       {"boundary_energy", json_number(r.boundary_energy)}});
  }
  j["records"] = records;
  Json cands = Json::array();
  for (const auto& c : d.candidates) {
    Json trace = Json::array();
    for (const auto& t : c.trace) trace.push_back({{"rho", t.rho}, {"member_chain", t.member_chain}, {"distance", t.distance}});
    cands.push_back({{"chain", c.chain},
                     {"selection", c.rule.name()},
                     {"cauchy", c.cauchy},
                     {"vi_residual", json_number(c.vi_residual)},
                     {"probe_count", c.probe_count},
                     {"max_excess", json_number(c.max_excess)},
                     {"passes_vi", c.passes_vi},
                     {"feasible", c.feasible},
                     {"in_solution_set", c.in_solution_set()},
                     {"nearest_point_trace", trace},
                     {"u", json_vector(c.u.values())}});
  }
  j["limit_candidates"] = cands;
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write '" + path + "'");
  out << text;
}

inline void write_json(const std::string& path, Json body, const Provenance& prov) {
  Json doc;
  doc["config_hash"] = prov.config_hash;
  doc["seed"] = prov.seed;
  for (auto& [k, v] : body.items()) doc[k] = v;
  write_text(path, doc.dump(2) + "\n");
}

inline std::string csv_header(const Provenance& prov) {
  return "# config_hash=" + prov.config_hash + " seed=" + std::to_string(prov.seed) + "\n";
}

/// x,y,u,phi,eta,violation per node.
inline std::string solution_csv(const ProblemSpec& spec, const DiscreteFunction& u, const Eigen::VectorXd& eta,
                                const Provenance& prov) {
  std::string out = csv_header(prov) + "x,y,u,phi,eta,violation\n";
  const Eigen::VectorXd viol = plus_part(u.values(), spec.obstacle);
  for (Index i = 0; i < u.size(); ++i) {
    const Point& x = spec.mesh->nodes[static_cast<std::size_t>(i)];
    out += fmt17(x[0]) + "," + fmt17(x[1]) + "," + fmt17(u[i]) + "," + fmt17(spec.obstacle[i]) + "," + fmt17(eta[i]) +
           "," + fmt17(viol[i]) + "\n";
  }
  return out;
}

/// One row per (rho, chain). nearest_distance is the chain's own limit-candidate trace (nan if none).
inline std::string study_csv(const KuratowskiDiagnostics& d, bool with_boundary, const Provenance& prov) {
  std::string out = csv_header(prov) + "rho,chain,violation_sup,violation_l1,chain_distance,vi_residual,nearest_distance";
  out += with_boundary ? ",boundary_energy\n" : "\n";
  for (const auto& r : d.records) {
    double nearest = std::numeric_limits<double>::quiet_NaN();
    for (const auto& c : d.candidates) {
      if (c.chain != r.chain) continue;
      for (const auto& t : c.trace) {
        if (t.rho == r.rho) nearest = t.distance;
      }
    }
    out += fmt17(r.rho) + "," + std::to_string(r.chain) + "," + fmt17(r.violation_sup) + "," + fmt17(r.violation_l1) +
           "," + fmt17(r.chain_distance) + "," + fmt17(r.vi_residual) + "," + fmt17(nearest);
    out += with_boundary ? "," + fmt17(r.boundary_energy) + "\n" : "\n";
  }
  return out;
}

}  // namespace dpobs
