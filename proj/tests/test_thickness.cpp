#include <gtest/gtest.h>

#include "support.hpp"

using namespace ropewalk;
using namespace testing_support;

namespace {

void expect_same_struts(const std::vector<Strut>& a, const std::vector<Strut>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].key(), b[i].key());
    EXPECT_NEAR(a[i].a.param, b[i].a.param, 1e-12);
    EXPECT_NEAR(a[i].b.param, b[i].b.param, 1e-12);
    EXPECT_NEAR(a[i].chord, b[i].chord, 1e-12);
  }
}

// point at arclength offset ds from parameter u on edge e, walking along the polygon
Vec3 walk(const Component& c, int e, double u, double ds) {
  double pos = u * c.edge_length(e) + ds;
  while (pos < 0.0) pos += c.edge_length(--e);
  while (pos > c.edge_length(e)) pos -= c.edge_length(e++);
  return c.vertex(e) + pos / c.edge_length(e) * c.edge(e);
}

}  // namespace

TEST(Thickness, RegularPolygonsClosedForm) {
  for (int n : {4, 6, 8, 16, 64}) {
    const ThicknessReport r = thickness(seeds::circle(n, 1.7));
    EXPECT_LE(rel_err(r.prop, 2.0 * n * std::tan(std::numbers::pi / n)), 1e-12) << n;
    EXPECT_LE(rel_err(r.pthi, 1.7 * std::cos(std::numbers::pi / n)), 1e-12) << n;
  }
}

TEST(Thickness, UnitSquareTieReportsKink) {
  const ThicknessReport r = thickness(square());
  EXPECT_DOUBLE_EQ(r.pthi, 0.5);
  EXPECT_DOUBLE_EQ(r.prop, 8.0);
  EXPECT_TRUE(r.kink_governed());
}

TEST(Thickness, StrutGoverned) {
  // two stacked squares of side 2, 0.6 apart: MinRad 1, chord 0.6
  PolyLink stack({square(2.0).component(0), square(2.0).component(0)});
  for (auto& v : stack.component(1).vertices()) v.z() = 0.6;
  const ThicknessReport r = thickness(stack);
  EXPECT_FALSE(r.kink_governed());
  EXPECT_NEAR(r.pthi, 0.3, 1e-15);
  EXPECT_NEAR(r.min_minrad, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.prop, 16.0 / r.pthi);
}

TEST(Thickness, SelfIntersectionThrows) {
  PolyLink bow({Component({Vec3(0, 0, 0), Vec3(1, 1, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)})});
  EXPECT_THROW(thickness(bow), GeometryError);
}

TEST(Dcsd, UnitSquareTwoPairs) {
  const auto s = enumerate_dcsd_bruteforce(square());
  ASSERT_EQ(s.size(), 2u);
  for (const auto& x : s) EXPECT_DOUBLE_EQ(x.chord, 1.0);
  EXPECT_EQ(s[0].key(), std::tuple(0, 0, 0, 2));
  EXPECT_EQ(s[1].key(), std::tuple(0, 1, 0, 3));
}

TEST(Dcsd, HexagonThreePairs) {
  const auto s = enumerate_dcsd_bruteforce(seeds::circle(6));
  ASSERT_EQ(s.size(), 3u);
  for (const auto& x : s) {
    EXPECT_NEAR(x.chord, std::sqrt(3.0), 1e-14);
    EXPECT_EQ(x.b.edge - x.a.edge, 3);
  }
}

TEST(Dcsd, CoaxialCircles) {
  PolyLink two({seeds::circle(32).component(0), seeds::circle(32).component(0)});
  for (auto& v : two.component(1).vertices()) v.z() += 1.0;
  const auto s = enumerate_dcsd_bruteforce(two, 1.5);
  ASSERT_FALSE(s.empty());
  for (const auto& x : s) {
    EXPECT_NE(x.a.comp, x.b.comp);
    EXPECT_NEAR(x.chord, 1.0, 1e-12);
  }
}

TEST(Dcsd, ReportedPairsAreLocalMinima) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const PolyLink link = random_link(rng, 16, 48);
    for (const auto& s : enumerate_dcsd_bruteforce(link)) {
      const auto& ca = link.component(s.a.comp);
      const auto& cb = link.component(s.b.comp);
      const double h = 1e-4 * average_edge_length(link);
      for (double da : {-h, 0.0, h})
        for (double db : {-h, 0.0, h})
          EXPECT_GE((walk(ca, s.a.edge, s.a.param, da) - walk(cb, s.b.edge, s.b.param, db)).norm(),
                    s.chord - 1e-12);
    }
  }
}

TEST(Dcsd, GridMatchesBruteForceRandom) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const PolyLink link = random_link(rng, 16, 64);
    for (double cutoff : {0.3, 1.0, kInfinity}) {
      SCOPED_TRACE(trial);
      expect_same_struts(enumerate_dcsd(link, cutoff), enumerate_dcsd_bruteforce(link, cutoff));
    }
  }
}

TEST(Dcsd, SkippedPairsAreOnlyThoseDropped) {
  std::mt19937_64 rng(77);
  // drop pairs whose edge indices share parity
  auto skip = [](EdgeRef x, EdgeRef y) { return (x.edge + y.edge) % 2 == 0; };
  for (int trial = 0; trial < 50; ++trial) {
    const PolyLink link = random_link(rng, 16, 64);
    std::vector<Strut> want;
    for (const auto& s : enumerate_dcsd_bruteforce(link, 1.0))
      if (!skip(s.a.edge_ref(), s.b.edge_ref())) want.push_back(s);
    SCOPED_TRACE(trial);
    expect_same_struts(enumerate_dcsd(link, 1.0, skip), want);
    expect_same_struts(enumerate_dcsd_bruteforce(link, 1.0, skip), want);
  }
}

TEST(Dcsd, GridMatchesBruteForceFixtures) {
  for (const auto& path : all_fixtures()) {
    SCOPED_TRACE(path.string());
    const PolyLink link = read_link(path);
    const double d = 2.0 * thickness(link).pthi;
    expect_same_struts(enumerate_dcsd(link, d + 1e-5), enumerate_dcsd_bruteforce(link, d + 1e-5));
    expect_same_struts(enumerate_dcsd(link, 2.0 * d), enumerate_dcsd_bruteforce(link, 2.0 * d));
  }
}

TEST(StrutSet, UnitSquareBoth) {
  const PolyLink sq = square();
  EXPECT_EQ(strut_set(sq, thickness(sq), 1e-5).size(), 2u);
}

TEST(StrutSet, RegularPolygonTie) {
  const PolyLink c = seeds::circle(64);
  const auto s = strut_set(c, thickness(c), 1e-5);
  EXPECT_EQ(s.size(), 32u);
}

TEST(StrutSet, LooseEllipseEmpty) {
  // kink-governed and no chord comes near the tube diameter
  const PolyLink e = seeds::ellipse(64, 1.0, 0.8);
  const ThicknessReport r = thickness(e);
  EXPECT_TRUE(r.kink_governed());
  EXPECT_TRUE(strut_set(e, r, 1e-5).empty());
}

TEST(StrutSet, SortedLexicographically) {
  std::mt19937_64 rng(5);
  const PolyLink k = random_knot(rng, 60);
  const auto s = enumerate_dcsd(k, 10.0);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end(), strut_order));
}
