#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "stcut/mesh.hpp"
#include "test_support.hpp"

using namespace stcut;
using stcut::testing::unit_square;

TEST(Mesh, UnitSquareCellCounts) {
  EXPECT_EQ(build_structured_mesh(unit_square(), 1.0).num_elements(), 2);
  EXPECT_EQ(build_structured_mesh(unit_square(), 0.5).num_elements(), 8);
  EXPECT_EQ(build_structured_mesh(unit_square(), 0.5, SplitKind::criss_cross).num_elements(), 16);
}

TEST(Mesh, EulerCharacteristicAndFacetCounts) {
  for (auto split : {SplitKind::diagonal, SplitKind::criss_cross}) {
    const Mesh m = build_structured_mesh(Box{Vec2(-1, -2), Vec2(2, 1)}, 0.3, split);
    // V - E + F = 1 for a triangulated disk
    EXPECT_EQ(m.num_vertices() - m.num_facets() + m.num_elements(), 1);
    // every element has three facets; interior ones are shared
    const int boundary = m.num_facets() - static_cast<int>(m.interior_facets().size());
    EXPECT_EQ(3 * m.num_elements(), 2 * static_cast<int>(m.interior_facets().size()) + boundary);
  }
}

TEST(Mesh, AreasSumToBoxAndOrientationIsPositive) {
  const Mesh m = build_structured_mesh(Box{Vec2(-3.5, -3.5), Vec2(3.5, 3.5)}, 0.9,
                                       SplitKind::criss_cross);
  double area = 0.0;
  for (int e = 0; e < m.num_elements(); ++e) {
    EXPECT_GT(m.element_area(e), 0.0);
    EXPECT_GT(m.element_map(e).determinant(), 0.0);
    area += m.element_area(e);
  }
  EXPECT_NEAR(area, 49.0, 1e-12);
}

TEST(Mesh, CrissCrossHmaxBoundedByTarget) {
  for (double h : {0.9, 0.45, 0.225}) {
    const Mesh m = build_structured_mesh(Box{Vec2(-3.5, -3.5), Vec2(3.5, 3.5)}, h,
                                         SplitKind::criss_cross);
    EXPECT_LE(m.h_max(), h);
  }
  // 8 cells of width 0.875; hypotenuse of the quarter triangles is the cell side
  const Mesh m = build_structured_mesh(Box{Vec2(-3.5, -3.5), Vec2(3.5, 3.5)}, 0.9,
                                       SplitKind::criss_cross);
  EXPECT_DOUBLE_EQ(m.h_max(), 0.875);
}

TEST(Mesh, ElementFacetIsOppositeLocalVertex) {
  const Mesh m = build_structured_mesh(unit_square(), 0.25, SplitKind::criss_cross);
  for (int e = 0; e < m.num_elements(); ++e) {
    const auto& el = m.elements()[e];
    for (int i = 0; i < 3; ++i) {
      const Facet& f = m.facets()[m.element_facets(e)[i]];
      const std::set<int> edge{f.vertices[0], f.vertices[1]};
      EXPECT_EQ(edge, (std::set<int>{el[(i + 1) % 3], el[(i + 2) % 3]}));
      EXPECT_TRUE(f.elements[0] == e || f.elements[1] == e);
    }
  }
}

TEST(Mesh, FacetPatchOrderingAndErrors) {
  const Mesh m = build_structured_mesh(unit_square(), 0.5);
  for (int f : m.interior_facets()) {
    const auto [a, b] = m.facet_patch(f);
    EXPECT_LT(a, b);
  }
  int boundary = -1;
  for (int f = 0; f < m.num_facets(); ++f)
    if (!m.facets()[f].is_interior()) boundary = f;
  ASSERT_GE(boundary, 0);
  EXPECT_THROW(m.facet_patch(boundary), MeshError);
  EXPECT_THROW(m.facet_patch(m.num_facets()), MeshError);
}

TEST(Mesh, RejectsEmptyDomain) {
  EXPECT_THROW(build_structured_mesh(Box{Vec2(0, 0), Vec2(0, 1)}, 0.1), MeshError);
  EXPECT_THROW(build_structured_mesh(unit_square(), 0.0), MeshError);
}

TEST(Mesh, AffineMapRoundTrip) {
  const AffineMap map(Vec2(0.3, -0.2), Vec2(1.1, 0.1), Vec2(0.4, 0.9));
  const Vec2 x(0.7, 0.35);
  EXPECT_LT((map.to_physical(map.to_reference(x)) - x).norm(), 1e-14);
  // gradient of the affine function xi_1 in physical coordinates
  const Vec2 g = map.push_gradient(Vec2(1.0, 0.0));
  const double eps = 1e-6;
  const double fd = (map.to_reference(x + Vec2(eps, 0)).x() - map.to_reference(x).x()) / eps;
  EXPECT_NEAR(g.x(), fd, 1e-8);
}

TEST(Mesh, LocateFindsContainingElement) {
  const Mesh m = build_structured_mesh(Box{Vec2(-1, -1), Vec2(1, 1)}, 0.2, SplitKind::criss_cross);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const Vec2 x(u(rng), u(rng));
    const auto e = m.locate(x);
    ASSERT_TRUE(e.has_value());
    const Vec2 xi = m.element_map(*e).to_reference(x);
    EXPECT_GE(std::min({xi.x(), xi.y(), 1 - xi.x() - xi.y()}), -1e-12);
  }
  EXPECT_FALSE(m.locate(Vec2(1.5, 0.0)).has_value());
}

TEST(Mesh, DeterministicAndOffDump) {
  const Mesh a = build_structured_mesh(unit_square(), 0.5);
  const Mesh b = build_structured_mesh(unit_square(), 0.5);
  EXPECT_EQ(a.elements(), b.elements());
  std::ostringstream out;
  a.write_off(out);
  std::istringstream in(out.str());
  std::string magic;
  int nv = 0, ne = 0, zero = -1;
  in >> magic >> nv >> ne >> zero;
  EXPECT_EQ(magic, "OFF");
  EXPECT_EQ(nv, 9);
  EXPECT_EQ(ne, 8);
  EXPECT_EQ(zero, 0);
}
