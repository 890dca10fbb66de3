#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "diracwalk/lattice.hpp"

using namespace dqw;

namespace {

Lattice square(int n) { return build_lattice(GridSpec{GridKind::Square, n, n, 1.0}); }
Lattice tri(int nx, int ny) { return build_lattice(GridSpec{GridKind::Triangular, nx, ny, 1.0}); }

double brute_distance(const Torus& t, Vec2 a, Vec2 b) {
  double best = 1e300;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) {
      const double dx = b.x - a.x + i * t.width;
      const double dy = b.y - a.y + j * t.height;
      best = std::min(best, std::hypot(dx, dy));
    }
  return best;
}

void check_invariants(const Lattice& lat) {
  const int per_tile = lat.kind() == GridKind::Square ? 4 : 3;
  for (std::size_t t = 0; t < lat.tiles().size(); ++t) {
    const Tile& tile = lat.tiles()[t];
    ASSERT_EQ(tile.facet_count, per_tile);
    for (int s = 0; s < tile.facet_count; ++s) {
      const auto f = static_cast<std::size_t>(tile.facets[static_cast<std::size_t>(s)]);
      ASSERT_LT(f, lat.facets().size());
      const Facet& fc = lat.facets()[f];
      // incidence is symmetric and the colour slot matches
      EXPECT_EQ(tile.colour == Colour::White ? fc.white : fc.grey, static_cast<std::int32_t>(t));
      // anti-clockwise: consecutive midpoints turn left around the centre
      const auto g = static_cast<std::size_t>(tile.facets[static_cast<std::size_t>((s + 1) % per_tile)]);
      const Vec2 a = lat.torus().delta(tile.centre, fc.midpoint);
      const Vec2 b = lat.torus().delta(tile.centre, lat.facets()[g].midpoint);
      EXPECT_GT(cross(a, b), 0.0);
    }
  }
  for (std::size_t f = 0; f < lat.facets().size(); ++f) {
    const Facet& fc = lat.facets()[f];
    for (std::int32_t t : {fc.white, fc.grey}) {
      if (t < 0) continue;
      const Tile& tile = lat.tiles()[static_cast<std::size_t>(t)];
      int hits = 0;
      for (int s = 0; s < tile.facet_count; ++s) hits += tile.facets[static_cast<std::size_t>(s)] == static_cast<std::int32_t>(f);
      EXPECT_EQ(hits, 1);
    }
    if (fc.white >= 0) {
      EXPECT_EQ(lat.tiles()[static_cast<std::size_t>(fc.white)].colour, Colour::White);
    }
    if (fc.grey >= 0) {
      EXPECT_EQ(lat.tiles()[static_cast<std::size_t>(fc.grey)].colour, Colour::Grey);
    }
  }
}

}  // namespace

TEST(Lattice, SquareCounts) {
  const Lattice lat = square(4);
  EXPECT_EQ(lat.tiles().size(), 16u);
  EXPECT_EQ(lat.facets().size(), 32u);
  for (const auto& f : lat.facets()) EXPECT_TRUE(f.complete());
  EXPECT_TRUE(lat.boundary_facets().empty());
}

TEST(Lattice, TriangularCounts) {
  const Lattice lat = tri(4, 4);
  EXPECT_EQ(lat.tiles().size(), 16u);
  EXPECT_EQ(lat.facets().size(), 24u);
  for (const auto& f : lat.facets()) EXPECT_TRUE(f.complete());
}

TEST(Lattice, Square50HasN2500) {
  const Lattice lat = square(50);
  EXPECT_EQ(lat.total_tiles(), 2500u);
  EXPECT_EQ(lat.facets().size(), 5000u);
}

TEST(Lattice, FacetCountFormula) {
  for (int n : {4, 6, 10, 16}) {
    EXPECT_EQ(square(n).facets().size(), 2u * n * n);
    EXPECT_EQ(tri(n, n + 2).facets().size(), 3u * n * (n + 2) / 2);
  }
}

TEST(Lattice, InvariantsHold) {
  for (int n : {4, 6, 8, 12}) {
    check_invariants(square(n));
    check_invariants(tri(n, n));
    check_invariants(tri(n, n + 2));
  }
}

TEST(Lattice, ValidationNamesBound) {
  auto msg = [](GridSpec g) {
    try {
      build_lattice(g);
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(msg({GridKind::Square, 3, 4, 1.0}).find("tiles_x must be >= 4"), std::string::npos);
  EXPECT_NE(msg({GridKind::Square, 4, 2, 1.0}).find("tiles_y must be >= 4"), std::string::npos);
  EXPECT_NE(msg({GridKind::Triangular, 5, 4, 1.0}).find("tiles_x must be even"), std::string::npos);
  EXPECT_NE(msg({GridKind::Square, 4, 4, 0.0}).find("spacing"), std::string::npos);
}

TEST(Lattice, TorusDistanceMatchesNineImages) {
  std::mt19937_64 rng(7);
  for (const Lattice& lat : {square(6), tri(8, 6)}) {
    std::uniform_real_distribution<double> ux(0.0, lat.torus().width), uy(0.0, lat.torus().height);
    for (int i = 0; i < 500; ++i) {
      const Vec2 a{ux(rng), uy(rng)}, b{ux(rng), uy(rng)};
      EXPECT_NEAR(lat.torus().distance(a, b), brute_distance(lat.torus(), a, b), 1e-12);
    }
  }
}

TEST(Defects, ZeroRadiusLeavesLatticeUnchanged) {
  const Lattice lat = square(10);
  const Lattice out = apply_defects(lat, DefectSpec{{{3.3, 4.1}}, 0.0});
  EXPECT_EQ(out.tiles().size(), lat.tiles().size());
  EXPECT_EQ(out.facets().size(), lat.facets().size());
  EXPECT_TRUE(out.boundary_facets().empty());
}

TEST(Defects, UnitBallOnSquareMatchesBruteForce) {
  const Lattice lat = square(50);
  const Vec2 c{25.5, 25.5};
  std::size_t expected = 0;
  for (int j = 0; j < 50; ++j)
    for (int i = 0; i < 50; ++i) expected += brute_distance(lat.torus(), {i + 0.5, j + 0.5}, c) <= 1.0 + 1e-9;
  const Lattice out = apply_defects(lat, DefectSpec{{c}, 1.0});
  EXPECT_EQ(expected, 5u);
  EXPECT_EQ(out.removed_tiles(), expected);
  // the plus-shaped hole has 12 rim facets
  EXPECT_EQ(out.boundary_facets().size(), 12u);
  check_invariants(out);
}

TEST(Defects, CentresSnapToTiles) {
  const Lattice out = apply_defects(square(20), DefectSpec{{{10.2, 9.9}}, 1.0});
  ASSERT_EQ(out.defect_centres().size(), 1u);
  EXPECT_EQ(out.defect_centres()[0], (Vec2{10.5, 9.5}));
}

TEST(Defects, CentresTooCloseRejected) {
  EXPECT_THROW(apply_defects(square(20), DefectSpec{{{5.5, 5.5}, {8.5, 5.5}}, 1.0}), ValidationError);
  // across the wrap-around seam as well
  EXPECT_THROW(apply_defects(square(20), DefectSpec{{{0.5, 5.5}, {18.5, 5.5}}, 1.0}), ValidationError);
  EXPECT_NO_THROW(apply_defects(square(20), DefectSpec{{{5.5, 5.5}, {9.5, 5.5}}, 1.0}));
}

TEST(Defects, WholeLatticeBallRejected) {
  EXPECT_THROW(apply_defects(square(4), DefectSpec{{{2.0, 2.0}}, 10.0}), ValidationError);
}

TEST(Defects, TranslationInvariantRemoval) {
  for (const Lattice& lat : {square(24), tri(24, 24)}) {
    const Vec2 a{3.0, 3.0}, b{lat.torus().width * 0.6, lat.torus().height * 0.55};
    const auto one = apply_defects(lat, DefectSpec{{a}, 1.0}).removed_tiles();
    const auto other = apply_defects(lat, DefectSpec{{b}, 1.0}).removed_tiles();
    const auto both = apply_defects(lat, DefectSpec{{a, b}, 1.0}).removed_tiles();
    EXPECT_EQ(one, other);
    EXPECT_EQ(both, 2 * one);
  }
}

TEST(Defects, BoundaryFacetsHaveOneTile) {
  const Lattice out = apply_defects(tri(20, 20), DefectSpec{{{5.0, 8.0}}, 1.0});
  EXPECT_GT(out.removed_tiles(), 0u);
  for (auto f : out.boundary_facets()) {
    const Facet& fc = out.facets()[static_cast<std::size_t>(f)];
    EXPECT_NE(fc.white >= 0, fc.grey >= 0);
  }
  check_invariants(out);
}
