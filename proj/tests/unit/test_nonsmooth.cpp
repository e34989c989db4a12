#include <cmath>

#include <gtest/gtest.h>

#include "dpobs/errors.hpp"
#include "dpobs/nonsmooth.hpp"
#include "support/gen.hpp"

using namespace dpobs;

namespace {

ConstraintSetK free_set(const Eigen::VectorXd& phi) { return {phi, std::vector<bool>(static_cast<std::size_t>(phi.size()), false)}; }

ConstraintSetK random_set(gen::Rng& rng, Index n) {
  ConstraintSetK K{rng.vector(n, 0.0, 1.0), std::vector<bool>(static_cast<std::size_t>(n), false)};
  for (Index i = 0; i < n; ++i) {
    if (rng.integer(0, 5) == 0) K.obstacle[i] = kInfinity;
    if (rng.integer(0, 6) == 0) K.dirichlet_mask[static_cast<std::size_t>(i)] = true;
  }
  return K;
}

Eigen::VectorXd random_member(gen::Rng& rng, const ConstraintSetK& K) {
  Eigen::VectorXd v = rng.vector(K.obstacle.size(), -3, 3);
  for (Index i = 0; i < v.size(); ++i) {
    if (K.dirichlet_mask[static_cast<std::size_t>(i)]) v[i] = 0.0;
    else if (std::isfinite(K.obstacle[i])) v[i] = std::min(v[i], K.obstacle[i] - rng.uniform(0, 1));
  }
  return v;
}

}  // namespace

TEST(ProjectK, Clipping) {
  const ConstraintSetK K = free_set(Eigen::Vector2d(1, 1));
  const Eigen::VectorXd p = project_K(Eigen::VectorXd(Eigen::Vector2d(2, 0.5)), K);
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[1], 0.5);
}

TEST(ProjectK, DirichletNodesAreZeroed) {
  ConstraintSetK K = free_set(Eigen::Vector3d(1, 1, kInfinity));
  K.dirichlet_mask[0] = true;
  const Eigen::VectorXd p = project_K(Eigen::VectorXd(Eigen::Vector3d(-4, 3, 7)), K);
  EXPECT_EQ(p[0], 0.0);
  EXPECT_EQ(p[1], 1.0);
  EXPECT_EQ(p[2], 7.0);
  EXPECT_TRUE(K.contains(p));
  EXPECT_TRUE(K.contains(Eigen::VectorXd::Zero(3)));
}

TEST(ProjectKProperty, IdempotentNearestAndNonExpansive) {
  gen::Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = rng.integer(1, 20);
    const ConstraintSetK K = random_set(rng, n);
    const Eigen::VectorXd w = rng.vector(n, 0.1, 2.0);
    const Eigen::VectorXd u = rng.vector(n, -3, 3), v = rng.vector(n, -3, 3);
    const Eigen::VectorXd pu = project_K(u, K);
    ASSERT_TRUE(K.contains(pu));
    EXPECT_EQ(project_K(pu, K), pu);
    const double d = lumped_norm(u - pu, w);
    for (int k = 0; k < 1000 / 50; ++k) EXPECT_LE(d, lumped_norm(u - random_member(rng, K), w));
    EXPECT_LE(lumped_norm(pu - project_K(v, K), w), lumped_norm(u - v, w) * (1 + 1e-15));
  }
}

TEST(ProjectKProperty, NearestPointAgainstThousandMembers) {
  gen::Rng rng(42);
  const ConstraintSetK K = random_set(rng, 12);
  const Eigen::VectorXd w = rng.vector(12, 0.1, 2.0);
  const Eigen::VectorXd u = rng.vector(12, -3, 3);
  const double d = lumped_norm(u - project_K(u, K), w);
  for (int k = 0; k < 1000; ++k) EXPECT_LE(d, lumped_norm(u - random_member(rng, K), w));
}

TEST(MoreauYosida, ScalarExample) {
  const ConstraintSetK K = free_set(Eigen::VectorXd::Constant(1, 1.0));
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(1), u = Eigen::VectorXd::Constant(1, 3.0);
  EXPECT_DOUBLE_EQ(moreau_yosida_value(u, K, w, 0.5), 4.0);
  EXPECT_DOUBLE_EQ(moreau_yosida_grad(u, K, w, 0.5)[0], 4.0);
  EXPECT_THROW(moreau_yosida_value(u, K, w, 0.0), ConfigurationError);
  EXPECT_THROW(moreau_yosida_grad(u, K, w, -1.0), ConfigurationError);
}

TEST(MoreauYosidaProperty, ZeroOnKAndMonotoneGradient) {
  gen::Rng rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = rng.integer(1, 15);
    const ConstraintSetK K = random_set(rng, n);
    const Eigen::VectorXd w = rng.vector(n, 0.1, 2.0);
    const double eps = std::pow(10.0, rng.uniform(-6, 0));
    const Eigen::VectorXd inK = random_member(rng, K);
    EXPECT_EQ(moreau_yosida_value(inK, K, w, eps), 0.0);
    EXPECT_EQ(moreau_yosida_grad(inK, K, w, eps).cwiseAbs().maxCoeff(), 0.0);
    const Eigen::VectorXd u = rng.vector(n, -3, 3), v = rng.vector(n, -3, 3);
    EXPECT_GE((moreau_yosida_grad(u, K, w, eps) - moreau_yosida_grad(v, K, w, eps)).dot(u - v), 0.0);
  }
}

TEST(MoreauYosidaProperty, GradientMatchesFiniteDifferences) {
  gen::Rng rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = rng.integer(2, 10);
    const ConstraintSetK K = random_set(rng, n);
    const Eigen::VectorXd w = rng.vector(n, 0.1, 2.0);
    const double eps = rng.uniform(0.1, 1.0);
    Eigen::VectorXd u = rng.vector(n, -3, 3);
    for (Index i = 0; i < n; ++i) {
      if (std::isfinite(K.obstacle[i]) && std::abs(u[i] - K.obstacle[i]) < 1e-3) u[i] += 0.01;
    }
    const Eigen::VectorXd g = moreau_yosida_grad(u, K, w, eps);
    for (Index i = 0; i < n; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e[i] = 1e-6;
      const double fd = (moreau_yosida_value(u + e, K, w, eps) - moreau_yosida_value(u - e, K, w, eps)) / 2e-6;
      EXPECT_NEAR(g[i], fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(MoreauYosidaProperty, BoundedAlongVanishingPerturbations) {
  gen::Rng rng(45);
  const ConstraintSetK K = random_set(rng, 8);
  const Eigen::VectorXd w = rng.vector(8, 0.1, 2.0);
  const Eigen::VectorXd ustar = random_member(rng, K), d = rng.vector(8, -1, 1);
  for (double eps = 1.0; eps > 1e-8; eps /= 10) {
    const double v = moreau_yosida_value(ustar + eps * d, K, w, eps);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, eps * lumped_norm(d, w) * lumped_norm(d, w));
  }
}

TEST(PlusPart, Examples) {
  const auto m = gen::interval(4);
  const Eigen::VectorXd phi = gen::constant(*m, 0.5);
  EXPECT_EQ(plus_part(DiscreteFunction(m, gen::constant(*m, 0.2)), DiscreteFunction(m, phi)).values().cwiseAbs().maxCoeff(), 0.0);
  const Eigen::VectorXd one = plus_part(Eigen::VectorXd(phi.array() + 1.0), phi);
  EXPECT_EQ(one, gen::constant(*m, 1.0));
  Eigen::VectorXd inf_phi = phi;
  inf_phi[2] = kInfinity;
  EXPECT_EQ(plus_part(gen::constant(*m, 9.0), inf_phi)[2], 0.0);
}

TEST(PlusPartProperty, Monotone) {
  gen::Rng rng(46);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd phi = rng.vector(10, 0, 1), u = rng.vector(10, -2, 2);
    const Eigen::VectorXd v = u + rng.vector(10, 0, 1);
    EXPECT_TRUE(((plus_part(v, phi) - plus_part(u, phi)).array() >= 0).all());
  }
}
