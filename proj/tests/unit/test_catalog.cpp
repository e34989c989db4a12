#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "dpobs/catalog.hpp"
#include "dpobs/errors.hpp"
#include "support/gen.hpp"

using namespace dpobs;

TEST(SelectionRule, ParseAndName) {
  for (const char* s : {"lower", "upper", "midpoint", "lambda:0.25"}) EXPECT_EQ(SelectionRule::parse(s).name(), s);
  EXPECT_EQ(SelectionRule::parse("lambda:0.25").weight(), 0.25);
  EXPECT_THROW(SelectionRule::parse("lambda:2"), ConfigurationError);
  EXPECT_THROW(SelectionRule::parse("lambda:x"), ConfigurationError);
  EXPECT_THROW(SelectionRule::parse("middle"), ConfigurationError);
}

TEST(Reaction, UnknownNamesAndParamsAreRejected) {
  EXPECT_THROW(ReactionSpec::from_catalog("quadratic", {}), ConfigurationError);
  EXPECT_THROW(ReactionSpec::from_catalog("constant", {{"k", 1}}), ConfigurationError);
  EXPECT_THROW(ReactionSpec::from_catalog("interval", {{"lo", 2}, {"hi", 1}}), ConfigurationError);
}

TEST(Reaction, SymmetricIntervalMidpointIsZero) {
  const ReactionSpec r = ReactionSpec::from_catalog("symmetric_growth", {{"a", 1}, {"b", 1}});
  gen::Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double s = rng.uniform(-5, 5);
    EXPECT_EQ(r.select({0, 0}, s, Eigen::Vector2d::Zero(), SelectionRule::parse("midpoint")).value, 0.0);
  }
}

TEST(ReactionProperty, LowerNeverExceedsUpper) {
  gen::Rng rng(2);
  const std::vector<ReactionSpec> catalog = {
      ReactionSpec::from_catalog("constant", {{"c", 2}}),
      ReactionSpec::from_catalog("interval", {{"lo", -1}, {"hi", 3}}),
      ReactionSpec::from_catalog("symmetric_growth", {{"a", 0.5}, {"b", 0.1}}),
      ReactionSpec::from_catalog("affine", {{"c0", 1}, {"c1", -0.3}, {"c2", 0.2}}),
  };
  for (const auto& r : catalog) {
    for (int i = 0; i < 500; ++i) {
      const Point x{rng.uniform(0, 1), rng.uniform(0, 1)};
      const double s = rng.uniform(-10, 10);
      const Eigen::Vector2d xi(rng.uniform(-10, 10), rng.uniform(-10, 10));
      const double lo = r.lower(x, s, xi).value, hi = r.upper(x, s, xi).value;
      EXPECT_LE(lo, hi) << r.name();
      const double lam = rng.uniform(0, 1);
      const double mid = r.select(x, s, xi, SelectionRule{SelectionKind::parameterized, lam}).value;
      EXPECT_GE(mid, lo - 1e-12 * (1 + std::abs(lo)));
      EXPECT_LE(mid, hi + 1e-12 * (1 + std::abs(hi)));
    }
  }
}

TEST(ReactionProperty, DeclaredGrowthBoundsHold) {
  // |eta| <= a_f |s|^(p-1) + b_f |xi|^(p-1)... checked in the p = 2 form: |eta| <= a_f|xi| + b_f|s| + c_f
  gen::Rng rng(3);
  const std::vector<ReactionSpec> catalog = {
      ReactionSpec::from_catalog("constant", {{"c", -2}}),
      ReactionSpec::from_catalog("symmetric_growth", {{"a", 0.5}, {"b", 0.1}}),
      ReactionSpec::from_catalog("affine", {{"c0", 1}, {"c1", -0.3}, {"c2", 0.2}}),
  };
  for (const auto& r : catalog) {
    const ReactionGrowth g = r.growth;
    for (int i = 0; i < 500; ++i) {
      const double s = rng.uniform(-10, 10);
      const Eigen::Vector2d xi(rng.uniform(-10, 10), 0.0);
      for (const auto& b : {r.lower({0, 0}, s, xi), r.upper({0, 0}, s, xi)}) {
        EXPECT_LE(std::abs(b.value), g.a_f * xi.norm() + g.b_f * std::abs(s) + g.c_f + 1e-12) << r.name();
      }
    }
  }
}

TEST(ReactionProperty, ClosedFormPartialsMatchFiniteDifferences) {
  gen::Rng rng(4);
  const std::vector<ReactionSpec> catalog = {
      ReactionSpec::from_catalog("symmetric_growth", {{"a", 0.5}, {"b", 0.1}}),
      ReactionSpec::from_catalog("affine", {{"c0", 1}, {"c1", -0.3}, {"c2", 0.2}}),
  };
  for (const auto& r : catalog) {
    for (int i = 0; i < 100; ++i) {
      double s = rng.uniform(-3, 3);
      if (std::abs(s) < 1e-3) s = 0.5;
      const Eigen::Vector2d xi(rng.uniform(-3, 3), rng.uniform(-3, 3));
      const SelectionRule rule{SelectionKind::parameterized, rng.uniform(0, 1)};
      const double t = 1e-6;
      const auto b = r.select({0, 0}, s, xi, rule);
      const double ds = (r.select({0, 0}, s + t, xi, rule).value - r.select({0, 0}, s - t, xi, rule).value) / (2 * t);
      EXPECT_NEAR(b.d_s, ds, 1e-7);
      const Eigen::Vector2d e0(t, 0);
      const double dx = (r.select({0, 0}, s, xi + e0, rule).value - r.select({0, 0}, s, xi - e0, rule).value) / (2 * t);
      EXPECT_NEAR(b.d_xi[0], dx, 1e-7);
    }
  }
}

TEST(BoundaryPotential, AbsExamples) {
  const auto j = BoundaryPotentialSpec::from_catalog("abs", {{"alpha", 0.3}}, 1e-2);
  EXPECT_DOUBLE_EQ(j.directional(0.0, 1.0), 0.3);
  EXPECT_DOUBLE_EQ(j.directional(0.0, -2.0), 0.6);
  EXPECT_EQ(j.smoothed_gradient(0.5), 0.3);
  EXPECT_EQ(j.smoothed_gradient(-0.5), -0.3);
  EXPECT_DOUBLE_EQ(j.smoothed_gradient(0.005), 0.15);
}

TEST(BoundaryPotential, SmoothQuadraticDirectional) {
  const auto j = BoundaryPotentialSpec::from_catalog("smooth_quadratic", {{"alpha", 2}});
  gen::Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const double s = rng.uniform(-3, 3), t = rng.uniform(-3, 3);
    EXPECT_EQ(j.directional(s, t), 2 * s * t);
  }
}

TEST(BoundaryPotential, Validation) {
  EXPECT_THROW(BoundaryPotentialSpec::from_catalog("cubic", {}), ConfigurationError);
  EXPECT_THROW(BoundaryPotentialSpec::from_catalog("abs", {{"beta", 1}}), ConfigurationError);
  EXPECT_THROW(BoundaryPotentialSpec::from_catalog("nonconvex_well", {{"beta", 0}}), ConfigurationError);
  EXPECT_THROW(BoundaryPotentialSpec::from_catalog("abs", {}, -1), ConfigurationError);
}

TEST(BoundaryPotentialProperty, DirectionalDerivativeIsSubadditiveAndHomogeneous) {
  gen::Rng rng(6);
  for (const auto& j : {BoundaryPotentialSpec::from_catalog("abs", {{"alpha", 0.7}}),
                        BoundaryPotentialSpec::from_catalog("smooth_quadratic", {{"alpha", 1.3}}),
                        BoundaryPotentialSpec::from_catalog("nonconvex_well", {{"alpha", 0.9}, {"beta", 0.4}})}) {
    for (int i = 0; i < 1000; ++i) {
      const double s = rng.coin() ? 0.0 : rng.uniform(-2, 2);
      const double t1 = rng.uniform(-2, 2), t2 = rng.uniform(-2, 2);
      const double d1 = j.directional(s, t1), d2 = j.directional(s, t2);
      const double lhs = j.directional(s, t1 + t2);
      const double ulp = 8 * std::numeric_limits<double>::epsilon() * (std::abs(lhs) + std::abs(d1) + std::abs(d2));
      EXPECT_LE(lhs, d1 + d2 + ulp) << j.name();
      const double c = rng.uniform(0, 5);
      EXPECT_NEAR(j.directional(s, c * t1), c * j.directional(s, t1), 1e-14 * (1 + c)) << j.name();
    }
  }
}

TEST(BoundaryPotentialProperty, SmoothedGradientStaysNearClarkeGradient) {
  gen::Rng rng(7);
  for (const auto& j : {BoundaryPotentialSpec::from_catalog("abs", {{"alpha", 0.7}}, 0.05),
                        BoundaryPotentialSpec::from_catalog("nonconvex_well", {{"alpha", 0.9}, {"beta", 0.4}}, 0.05)}) {
    for (int i = 0; i < 1000; ++i) {
      const double s = rng.uniform(-0.3, 0.3);
      const double g = j.smoothed_gradient(s);
      // outside the smoothing band g is the exact gradient; inside it is a Clarke gradient at the kink s' = 0
      const bool found = std::abs(s) >= j.delta ? j.clarke(s).contains(g, 1e-15) : j.clarke(0.0).contains(g, 1e-15);
      EXPECT_TRUE(found) << j.name() << " s=" << s << " g=" << g;
    }
  }
}

TEST(BoundaryPotential, NonconvexWellKink) {
  const auto j = BoundaryPotentialSpec::from_catalog("nonconvex_well", {{"alpha", 2}, {"beta", 0.5}});
  const ClarkeInterval c = j.clarke(0.0);
  EXPECT_EQ(c.lo, -1.0);
  EXPECT_EQ(c.hi, 1.0);
  EXPECT_EQ(j.directional(0.0, 1.0), 1.0);
  EXPECT_EQ(j.directional(0.0, -1.0), 1.0);
  EXPECT_FALSE(j.convex());
}
