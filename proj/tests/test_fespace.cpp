#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "stcut/fespace.hpp"
#include "test_support.hpp"

using namespace stcut;
using stcut::testing::SlabFixture;
using stcut::testing::unit_square;

namespace {

SpaceTimeScalar disk(double r) {
  return [r](const Vec2& x, double) { return (x - Vec2(0.5, 0.5)).norm() - r; };
}

// degree 2 in space, 2 in time
double poly(const Vec2& x, double t) {
  return 0.3 + x.x() - x.y() * x.y() + 2 * x.x() * x.y() + t * (1 - x.x()) + t * t * x.y();
}

}  // namespace

TEST(SpatialDofTable, CountsAndSharedEdgeDofs) {
  const Mesh mesh = build_structured_mesh(unit_square(), 0.5);
  const SpatialDofTable p2(mesh, 2);
  // 9 vertices + 16 edges
  EXPECT_EQ(p2.num_dofs(), 25);
  const SpatialDofTable p3(mesh, 3);
  // 9 + 2*16 + 8 interior
  EXPECT_EQ(p3.num_dofs(), 49);
  // dofs of a shared facet agree, and every dof sits at its node
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto d = p3.element_dofs(e);
    const AffineMap map = mesh.element_map(e);
    for (int i = 0; i < p3.local_size(); ++i)
      EXPECT_LT((p3.dof_point(d[i]) - map.to_physical(p3.element().node(i))).norm(), 1e-14);
  }
}

TEST(SlabSpace, ActiveDofsAndUnknownLayout) {
  const SlabFixture f(unit_square(), 0.125, SplitKind::criss_cross, disk(0.3), 2, 1, 0, 1, 1, 1);
  const SlabSpace& s = *f.space;
  EXPECT_EQ(s.num_unknowns(), s.num_active_dofs() * 2);
  EXPECT_LT(s.num_active_dofs(), f.dofs->num_dofs());
  std::set<int> seen;
  for (int e : s.active_elements()) {
    for (int g : f.dofs->element_dofs(e)) {
      const int a = s.active_index(g);
      ASSERT_GE(a, 0);
      EXPECT_EQ(s.global_dof(a), g);
      seen.insert(a);
    }
  }
  EXPECT_EQ(static_cast<int>(seen.size()), s.num_active_dofs());
  EXPECT_EQ(s.time_node(0), s.t_begin());
  EXPECT_EQ(s.time_node(1), s.t_end());
}

TEST(SlabSpace, InterpolationReproducesSpaceTimePolynomials) {
  const SlabFixture f(unit_square(), 0.25, SplitKind::criss_cross, disk(0.3), 2, 2, 0.0, 1.0, 4, 3);
  const SlabField field{f.space, interpolate(*f.space, poly)};
  for (int e : f.space->active_elements()) {
    const Vec2 xi(0.2, 0.3);
    const Vec2 x = f.mesh->element_map(e).to_physical(xi);
    for (double t : {0.5, 0.6, 0.73}) {
      const PointValue v = field.evaluate(e, xi, t);
      EXPECT_NEAR(v.value, poly(x, t), 1e-13);
      const double eps = 1e-6;
      EXPECT_NEAR(v.dt, (poly(x, t + eps) - poly(x, t - eps)) / (2 * eps), 1e-7);
      EXPECT_NEAR(v.grad.x(), (poly(x + Vec2(eps, 0), t) - poly(x - Vec2(eps, 0), t)) / (2 * eps), 1e-7);
      EXPECT_NEAR(v.grad.y(), (poly(x + Vec2(0, eps), t) - poly(x - Vec2(0, eps), t)) / (2 * eps), 1e-7);
    }
  }
}

TEST(SlabSpace, BasisDerivativesMatchFiniteDifferences) {
  const SlabFixture f(unit_square(), 0.25, SplitKind::criss_cross, disk(0.3), 2, 2, 0.0, 1.0, 2, 1);
  const int e = f.space->active_elements().front();
  const AffineMap map = f.mesh->element_map(e);
  const Vec2 xi(0.25, 0.4);
  const double t = 0.21, eps = 1e-6;
  const LocalBasis v = eval_basis(*f.space, e, xi, t, BasisDerivative::value);
  const LocalBasis dt = eval_basis(*f.space, e, xi, t, BasisDerivative::dt);
  const LocalBasis gx = eval_basis(*f.space, e, xi, t, BasisDerivative::grad_x);
  const LocalBasis tp = eval_basis(*f.space, e, xi, t + eps, BasisDerivative::value);
  const LocalBasis tm = eval_basis(*f.space, e, xi, t - eps, BasisDerivative::value);
  const Vec2 dxi = map.to_reference(map.to_physical(xi) + Vec2(eps, 0)) - xi;
  const LocalBasis xp = eval_basis(*f.space, e, xi + dxi, t, BasisDerivative::value);
  const LocalBasis xm = eval_basis(*f.space, e, xi - dxi, t, BasisDerivative::value);
  ASSERT_EQ(v.unknowns, dt.unknowns);
  ASSERT_EQ(gx.gradients.size(), v.values.size());
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    EXPECT_NEAR(dt.values[i], (tp.values[i] - tm.values[i]) / (2 * eps), 1e-6);
    EXPECT_NEAR(gx.gradients[i].x(), (xp.values[i] - xm.values[i]) / (2 * eps), 1e-6);
  }
}

TEST(SolutionField, TracesAtSlabNodes) {
  ProblemConfig c;
  c.box = unit_square();
  c.h = 0.25;
  c.num_slabs = 2;
  c.k_s = 1;
  c.k_t = 1;
  c.levelset = disk(0.3);
  c.data.velocity = stcut::testing::constant_velocity(Vec2::Zero());
  c.data.divergence = stcut::testing::constant_field(0.0);
  c.data.source = stcut::testing::constant_field(1.0);
  c.data.initial = [](const Vec2&) { return 0.0; };
  const Discretization d = march(c);
  // du/dt = 1 on a static domain is reproduced exactly by linears in time
  EXPECT_NEAR(discrete_mass(d, 1.0, SolutionField::Side::left),
              discrete_mass(d, 0.0, SolutionField::Side::right) + source_integral(d, c.data.source),
              1e-12);
  EXPECT_NEAR(discrete_mass(d, 0.5, SolutionField::Side::left),
              discrete_mass(d, 0.5, SolutionField::Side::right), 1e-12);
}
