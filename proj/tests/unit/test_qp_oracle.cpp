#include <cmath>

#include <gtest/gtest.h>

#include "dpobs/errors.hpp"
#include "dpobs/qp_oracle.hpp"
#include "dpobs/solver.hpp"
#include "oracles/box_qp.hpp"
#include "oracles/energy.hpp"
#include "support/gen.hpp"

using namespace dpobs;

namespace {

ProblemSpec contact(Index n, const Eigen::VectorXd& phi, double c, std::vector<Side> g2 = {},
                    BoundaryPotentialSpec j = {}) {
  const auto m = gen::interval(n, std::move(g2));
  return ProblemSpec::create(m, PhaseConfig::uniform(*m, 2, 2, 0), phi, ReactionSpec::constant(c), std::move(j));
}

}  // namespace

TEST(QpOracle, UnconstrainedIsTheLinearSolve) {
  const Index n = 16;
  const auto m = gen::interval(n);
  const ProblemSpec spec = contact(n, gen::constant(*m, kInfinity), 1.0);
  const OracleResult r = qp_oracle(spec);
  const Eigen::MatrixXd S = oracle::stiffness_1d(static_cast<int>(n), 1.0).block(1, 1, n - 1, n - 1);
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(n - 1, 1.0 / n);
  const Eigen::VectorXd x = S.ldlt().solve(b);
  for (Index i = 1; i < n; ++i) EXPECT_NEAR(r.solution[i], x[i - 1], 1e-13);
  EXPECT_EQ(r.solution[0], 0.0);
  EXPECT_EQ(r.solution[n], 0.0);
}

TEST(QpOracle, ContactPlateau) {
  const Index n = 12;
  const auto m = gen::interval(n);
  const ProblemSpec spec = contact(n, gen::constant(*m, 0.5), 8.0);
  const OracleResult r = qp_oracle(spec, OracleMode::enumeration);
  EXPECT_EQ(r.mode, OracleMode::enumeration);
  EXPECT_LE(r.solution.values().maxCoeff(), 0.5);
  // the unconstrained peak is 1, so the middle nodes sit on the obstacle
  EXPECT_EQ(r.solution[n / 2], 0.5);
  EXPECT_LT(r.solution[1], 0.5);
}

TEST(QpOracle, AutomaticModeSwitchesOnSize) {
  const auto small = gen::interval(8), large = gen::interval(32);
  EXPECT_EQ(qp_oracle(contact(8, gen::constant(*small, 0.05), 8.0)).mode, OracleMode::enumeration);
  EXPECT_EQ(qp_oracle(contact(32, gen::constant(*large, 0.05), 8.0)).mode, OracleMode::projected_gradient);
}

TEST(QpOracleProperty, ModesAgreeOnRandomInstances) {
  gen::Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = rng.integer(3, 12);
    const auto m = gen::interval(n);
    Eigen::VectorXd phi = rng.vector(m->num_nodes(), 0.0, 0.2);
    for (Index i = 0; i < phi.size(); ++i) {
      if (rng.integer(0, 3) == 0) phi[i] = kInfinity;
    }
    const ProblemSpec spec = contact(n, phi, rng.uniform(-10, 10));
    const OracleResult a = qp_oracle(spec, OracleMode::enumeration);
    const OracleResult b = qp_oracle(spec, OracleMode::projected_gradient);
    EXPECT_LE((a.solution.values() - b.solution.values()).cwiseAbs().maxCoeff(), 1e-9) << trial;
  }
}

TEST(QpOracleProperty, MatchesCoordinateDescentWithAbsBoundary) {
  gen::Rng rng(62);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = rng.integer(3, 10);
    const auto m = gen::interval(n, {Side::right});
    const double alpha = rng.uniform(0.0, 2.0), c = rng.uniform(-10, 10);
    const Eigen::VectorXd phi = rng.vector(m->num_nodes(), 0.0, 0.3);
    const ProblemSpec spec =
        ProblemSpec::create(m, PhaseConfig::uniform(*m, 2, 2, 0), phi, ReactionSpec::constant(c),
                            BoundaryPotentialSpec::from_catalog("abs", {{"alpha", alpha}}));
    // unknowns are nodes 1..n; node n carries the boundary term
    const Eigen::MatrixXd S = oracle::stiffness_1d(static_cast<int>(n), 1.0).block(1, 1, n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Constant(n, c / n), a = Eigen::VectorXd::Zero(n);
    b[n - 1] = c / (2.0 * n);
    a[n - 1] = alpha;
    const Eigen::VectorXd x = oracle::box_qp_coordinate_descent(S, b, phi.tail(n), a);
    const OracleResult r = qp_oracle(spec);
    for (Index i = 1; i <= n; ++i) EXPECT_NEAR(r.solution[i], x[i - 1], 1e-8) << trial;
  }
}

TEST(QpOracleProperty, SolutionIsNotBeatenByFeasibleNeighbours) {
  gen::Rng rng(63);
  const Index n = 10;
  const auto m = gen::interval(n);
  const Eigen::VectorXd phi = rng.vector(m->num_nodes(), 0.0, 0.1);
  const ProblemSpec spec = contact(n, phi, 5.0);
  const OracleResult r = qp_oracle(spec);
  const auto energy = [&](const Eigen::VectorXd& u) {
    return oracle::energy(*m, spec.phase.mu, 2, 2, 0, u) - 5.0 * spec.weights.dot(u);
  };
  const double e0 = energy(r.solution.values());
  for (int k = 0; k < 500; ++k) {
    Eigen::VectorXd v = r.solution.values() + rng.vector(m->num_nodes(), -0.01, 0.01);
    v[0] = v[n] = 0.0;
    v = v.cwiseMin(phi);
    EXPECT_GE(energy(v), e0 - 1e-14);
  }
}

TEST(QpOracle, AgreesWithPenaltySolverAtSmallRho) {
  const Index n = 32;
  const auto m = gen::interval(n);
  const ProblemSpec spec = contact(n, gen::constant(*m, 0.05), 8.0);
  const OracleResult o = qp_oracle(spec);
  SolverConfig cfg;
  cfg.rho = 1e-8;
  const SolveReport r = solve_penalized(spec, cfg, DiscreteFunction::zero(spec.mesh));
  ASSERT_TRUE(r.converged);
  EXPECT_LE((r.solution.values() - o.solution.values()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(QpOracle, RejectsNonQuadraticInstances) {
  const auto m = gen::interval(8, {Side::right});
  const Eigen::VectorXd phi = gen::constant(*m, 1.0);
  EXPECT_THROW(qp_oracle(ProblemSpec::create(m, PhaseConfig::uniform(*m, 2, 3, 1.0), phi, ReactionSpec::constant(1))),
               ConfigurationError);
  EXPECT_THROW(qp_oracle(ProblemSpec::create(m, PhaseConfig::uniform(*m, 2, 2, 0), phi,
                                             ReactionSpec::constant(1),
                                             BoundaryPotentialSpec::from_catalog("nonconvex_well", {}))),
               ConfigurationError);
  EXPECT_THROW(qp_oracle(ProblemSpec::create(m, PhaseConfig::uniform(*m, 2, 2, 0), phi,
                                             ReactionSpec::from_catalog("symmetric_growth", {}, SelectionRule::parse("lower")))),
               ConfigurationError);
  // q > 2 with mu = 0 is still linear
  EXPECT_NO_THROW(qp_oracle(ProblemSpec::create(m, PhaseConfig::uniform(*m, 2, 3, 0), phi, ReactionSpec::constant(1))));
  EXPECT_EQ(parse_oracle_mode("projected_gradient"), OracleMode::projected_gradient);
  EXPECT_THROW(parse_oracle_mode("simplex"), ConfigurationError);
}
