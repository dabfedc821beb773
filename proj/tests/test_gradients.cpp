#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"

using namespace ropewalk;
using namespace testing_support;

namespace {

using oracles::central_fd;

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST(LengthGradient, CollinearVertexIsZero) {
  PolyLink p({Component({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(1, 1, 0)})});
  EXPECT_NEAR(length_gradient(p).at(0, 1).norm(), 0.0, 1e-15);
}

TEST(LengthGradient, SquareCorner) {
  PolyLink p({Component({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)})});
  const Vec3 g = length_gradient(p).at(0, 2);
  EXPECT_NEAR((g - Vec3(1, 1, 0)).norm(), 0.0, 1e-15);
}

TEST(LengthGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const PolyLink p = random_link(rng, 6, 20);
    const auto fd = central_fd(p, [](const PolyLink& l) { return total_length(l); });
    EXPECT_LE(rel(length_gradient(p).flat(), fd), 1e-6) << trial;
  }
}

TEST(StrutGradient, ParallelSymmetric) {
  PolyLink p({Component({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)})});
  const Strut s{{0, 0, 0.5}, {0, 2, 0.5}, 1.0, std::nullopt};
  const GradientField g = strut_gradient(p, s);
  const Vec3 n(0, -1, 0);  // from the second end towards the first
  EXPECT_NEAR((g.at(0, 0) - 0.5 * n).norm(), 0.0, 1e-15);
  EXPECT_NEAR((g.at(0, 1) - 0.5 * n).norm(), 0.0, 1e-15);
  EXPECT_NEAR((g.at(0, 2) + 0.5 * n).norm(), 0.0, 1e-15);
  EXPECT_NEAR((g.at(0, 3) + 0.5 * n).norm(), 0.0, 1e-15);
}

TEST(StrutGradient, EndpointWeightConcentrates) {
  PolyLink p({Component({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 1, 0), Vec3(3, 1, 0), Vec3(1, 3, 0)})});
  const Strut s{{0, 0, 1.0}, {0, 2, 0.0}, std::sqrt(2.0), std::nullopt};
  const SparseGradient g = strut_gradient_sparse(p, s);
  ASSERT_EQ(g.entries.size(), 2u);
  EXPECT_NEAR(g.entries[0].value.norm(), 1.0, 1e-15);
  EXPECT_NEAR((g.entries[0].value + g.entries[1].value).norm(), 0.0, 1e-15);
}

TEST(StrutGradient, ZeroChordThrows) {
  PolyLink p({Component({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)})});
  EXPECT_THROW(strut_gradient(p, Strut{{0, 0, 0.0}, {0, 3, 1.0}, 0.0, std::nullopt}), GeometryError);
}

TEST(StrutGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const PolyLink p = random_link(rng, 8, 20);
    const int n = p.component(0).size();
    const int ea = std::uniform_int_distribution<int>(0, n - 1)(rng);
    const int eb = (ea + 2 + std::uniform_int_distribution<int>(0, n - 4)(rng)) % n;
    const Strut s{{0, ea, u01(rng)}, {0, eb, u01(rng)}, 0.0, std::nullopt};
    const auto fd = central_fd(p, [&](const PolyLink& l) { return (s.a.point(l) - s.b.point(l)).norm(); });
    EXPECT_LE(rel(strut_gradient(p, s).flat(), fd), 1e-6) << trial;
  }
}

TEST(MinRadGradient, StraightVertexInactive) {
  PolyLink p({Component({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(1, 1, 0)})});
  EXPECT_FALSE(minrad_gradient(p, 0, 1).has_value());
}

TEST(MinRadGradient, OpeningTheAngleIncreasesMinRad) {
  // near-isoceles corner at the origin; sliding the vertex up the bisector
  // towards its neighbours opens the angle
  PolyLink p({Component({Vec3(-1, 1, 0), Vec3(0, 0, 0), Vec3(1, 1.2, 0), Vec3(0, 3, 0)})});
  const Vec3 g = minrad_gradient(p, 0, 1)->at(0, 1);
  EXPECT_GT(g.dot(Vec3(0, 1, 0)), 0.0);
}

TEST(MinRadGradient, ScaleneTriangle) {
  // the equilateral one is an exact tie, covered below
  PolyLink skew({Component({Vec3(0, 0, 0), Vec3(1.1, 0, 0), Vec3(0.5, 0.8, 0.1)})});
  for (int v = 0; v < 3; ++v) {
    const auto fd = central_fd(skew, [&](const PolyLink& l) { return minrad(l, 0, v); });
    EXPECT_LE(rel(minrad_gradient(skew, 0, v)->flat(), fd), 1e-6);
  }
}

TEST(MinRadGradient, TieAveragesBranches) {
  // |e_{i-1}| = |e_i| exactly: the returned gradient is the mean of the two
  // one-sided derivatives, measured by finite differences on each branch
  const PolyLink t = triangle();
  const auto branch = [&](int which) {
    return central_fd(t, [&](const PolyLink& l) {
      const auto& c = l.component(0);
      const double len = which == 0 ? c.edge_length(-1) : c.edge_length(0);
      return len / (2.0 * std::tan(0.5 * turning_angle(l, 0, 0)));
    });
  };
  const Eigen::VectorXd mean = 0.5 * (branch(0) + branch(1));
  EXPECT_LE(rel(minrad_gradient(t, 0, 0)->flat(), mean), 1e-6);
}

TEST(MinRadGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(303);
  int checked = 0;
  for (int trial = 0; checked < 100; ++trial) {
    const PolyLink p = random_link(rng, 6, 20);
    const int v = std::uniform_int_distribution<int>(0, p.component(0).size() - 1)(rng);
    const auto& c = p.component(0);
    // stay off the min() kink where central differences straddle two branches
    if (std::abs(c.edge_length(v - 1) - c.edge_length(v)) < 1e-4) continue;
    const auto fd = central_fd(p, [&](const PolyLink& l) { return minrad(l, 0, v); });
    EXPECT_LE(rel(minrad_gradient(p, 0, v)->flat(), fd), 1e-6) << trial;
    ++checked;
  }
}
