#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "stcut/analysis.hpp"
#include "stcut/quadrature.hpp"
#include "test_support.hpp"

using namespace stcut;
using stcut::testing::constant_field;
using stcut::testing::constant_velocity;
using stcut::testing::random_vector;
using stcut::testing::SlabFixture;
using stcut::testing::unit_square;

namespace {

constexpr double pi = std::numbers::pi;

// u_h = 0 on a static unit disk
Discretization zero_solution(double h) {
  ProblemConfig c;
  c.box = Box{Vec2(-1.5, -1.5), Vec2(1.5, 1.5)};
  c.h = h;
  c.num_slabs = 1;
  c.k_s = 1;
  c.k_t = 1;
  c.levelset = [](const Vec2& x, double) { return x.norm() - 1.0; };
  c.data.velocity = constant_velocity(Vec2::Zero());
  c.data.divergence = constant_field(0.0);
  c.data.source = constant_field(0.0);
  c.data.initial = [](const Vec2&) { return 0.0; };
  return march(c);
}

SlabFixture cut_fixture(int k_s = 2, int k_t = 2) {
  return SlabFixture(unit_square(), 0.125, SplitKind::criss_cross,
                     [](const Vec2& x, double t) { return (x - Vec2(0.5, 0.5)).norm() - 0.3 - 0.1 * t; },
                     k_s, k_t, 0.0, 1.0, 2, 1);
}

}  // namespace

TEST(ErrorNorms, UnitFunctionOnDiskHasNormRootPi) {
  std::vector<double> err;
  for (double h : {0.1, 0.05}) {
    const Discretization d = zero_solution(h);
    err.push_back(std::abs(l2_final_error(d, constant_field(1.0)) - std::sqrt(pi)));
  }
  EXPECT_LT(err.back(), 2e-3);
  EXPECT_GT(err.front() / err.back(), 3.0);
}

TEST(ErrorNorms, SpaceTimeNormsOfKnownFunctions) {
  const Discretization d = zero_solution(0.05);
  // e = -u with u = x: |grad|^2 = 1 over the disk and one unit of time
  ExactSolution ex{[](const Vec2& x, double) { return x.x(); },
                   [](const Vec2&, double) { return Vec2(1.0, 0.0); },
                   [](const Vec2&, double) { return 0.0; }};
  const double area = std::pow(l2_final_error(d, constant_field(1.0)), 2);
  EXPECT_NEAR(h1_spacetime_error(d, ex), std::sqrt(area), 1e-12);
  // (dt + w.grad) x = w_x
  EXPECT_NEAR(matderiv_error(d, ex, constant_velocity(Vec2(2.0, 5.0))), 2.0 * std::sqrt(area), 1e-12);
}

TEST(ErrorNorms, EocOfGeometricSequence) {
  const auto r = eoc({1.0, 0.25, 0.0625});
  ASSERT_EQ(r.size(), 3u);
  EXPECT_TRUE(std::isnan(r[0]));
  EXPECT_DOUBLE_EQ(r[1], 2.0);
  EXPECT_DOUBLE_EQ(r[2], 2.0);
}

TEST(TimeProjection, PolynomialsOfDegreeKtAreInvariant) {
  const SlabFixture f = cut_fixture();
  const SlabSpace& s = *f.space;
  const auto coeff = [&](int a, double t) {
    const Vec2 x = f.dofs->dof_point(s.global_dof(a));
    return x.x() + t * x.y() - 3 * t * t;
  };
  const Eigen::VectorXd p = time_project(s, coeff);
  const Eigen::VectorXd q = interpolate(s, [](const Vec2& x, double t) { return x.x() + t * x.y() - 3 * t * t; });
  EXPECT_LT((p - q).lpNorm<Eigen::Infinity>(), 1e-13);
}

TEST(TimeProjection, IdempotentAndL2Optimal) {
  const SlabFixture f = cut_fixture(2, 1);
  const SlabSpace& s = *f.space;
  const auto coeff = [](int a, double t) { return std::sin(3.0 * t + a); };
  const Eigen::VectorXd p = time_project(s, coeff);
  // reproject the projection as a function of t
  const auto from_p = [&](int a, double t) {
    std::vector<double> psi(s.time_size()), d(s.time_size());
    s.eval_time(t, psi, d);
    double v = 0.0;
    for (int m = 0; m < s.time_size(); ++m) v += p[s.unknown(a, m)] * psi[m];
    return v;
  };
  EXPECT_LT((time_project(s, from_p) - p).lpNorm<Eigen::Infinity>(), 1e-13);
  // residual orthogonal to constants in time
  const Rule1D& g = gauss_legendre(12);
  for (int a = 0; a < 5; ++a) {
    double r = 0.0;
    for (std::size_t q = 0; q < g.points.size(); ++q) {
      const double t = s.t_begin() + g.points[q] * s.dt();
      r += g.weights[q] * (coeff(a, t) - from_p(a, t));
    }
    EXPECT_NEAR(r, 0.0, 1e-13);
  }
}

TEST(TimeProjection, CommutesWithSpatialGradient) {
  // projecting nodal values in time and then differentiating in space equals
  // differentiating and then projecting, since both act on separate factors
  const SlabFixture f = cut_fixture(2, 1);
  const SlabSpace& s = *f.space;
  const auto fn = [](const Vec2& x, double t) { return std::exp(t) * (x.x() * x.x() + x.y()); };
  const Eigen::VectorXd p = time_project(s, [&](int a, double t) {
    return fn(f.dofs->dof_point(s.global_dof(a)), t);
  });
  const SlabField field{f.space, p};
  const double c = (std::exp(s.t_end()) - std::exp(s.t_begin())) / s.dt();  // mean of e^t
  for (int e : s.active_elements()) {
    const Vec2 xi(0.3, 0.3);
    const Vec2 x = f.mesh->element_map(e).to_physical(xi);
    const Vec2 g = field.evaluate(e, xi, 0.5 * (s.t_begin() + s.t_end())).grad;
    // P1-in-time mean matches the mean of the exact gradient
    const PointValue a = field.evaluate(e, xi, s.t_begin());
    const PointValue b = field.evaluate(e, xi, s.t_end());
    EXPECT_NEAR(0.5 * (a.grad.x() + b.grad.x()), c * 2 * x.x(), 1e-12);
    EXPECT_NEAR(g.y(), 0.5 * (a.grad.y() + b.grad.y()), 1e-12);
  }
}

TEST(Oswald, ContinuousInputUnchangedAndIdempotent) {
  const SlabFixture f = cut_fixture();
  const SlabSpace& s = *f.space;
  const Eigen::VectorXd u = random_vector(s.num_unknowns(), 21);
  EXPECT_LT((oswald_project(s, to_broken(s, u)) - u).lpNorm<Eigen::Infinity>(), 1e-15);
  // a broken field: perturb one element, average, average again
  BrokenField b = to_broken(s, u);
  b.local[s.active_elements()[3]].array() += 1.0;
  const Eigen::VectorXd once = oswald_project(s, b);
  const Eigen::VectorXd twice = oswald_project(s, to_broken(s, once));
  EXPECT_LT((once - twice).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(Oswald, AveragesSharedNodesWithEqualWeights) {
  const SlabFixture f = cut_fixture(1, 1);
  const SlabSpace& s = *f.space;
  BrokenField b;
  b.local.resize(f.mesh->num_elements());
  for (int e : s.active_elements()) b.local[e] = Eigen::VectorXd::Constant(6, static_cast<double>(e));
  const Eigen::VectorXd avg = oswald_project(s, b);
  std::vector<double> sum(s.num_active_dofs(), 0.0), count(s.num_active_dofs(), 0.0);
  for (int e : s.active_elements())
    for (int g : f.dofs->element_dofs(e)) {
      sum[s.active_index(g)] += e;
      count[s.active_index(g)] += 1;
    }
  for (int a = 0; a < s.num_active_dofs(); ++a)
    for (int m = 0; m < 2; ++m) EXPECT_NEAR(avg[s.unknown(a, m)], sum[a] / count[a], 1e-13);
}

TEST(MaterialDerivative, ReducesToTimeDerivativeWithoutFlow) {
  const SlabFixture f = cut_fixture();
  const SlabSpace& s = *f.space;
  const auto fn = [](const Vec2& x, double t) { return t * t * x.x() + t * x.y() * x.y(); };
  const Eigen::VectorXd u = interpolate(s, fn);
  const Eigen::VectorXd d = discrete_material_derivative(s, u, constant_velocity(Vec2::Zero()));
  const Eigen::VectorXd ref = interpolate(s, [](const Vec2& x, double t) { return 2 * t * x.x() + x.y() * x.y(); });
  EXPECT_LT((d - ref).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(MaterialDerivative, ExactForLinearFieldsAndConstantFlow) {
  const SlabFixture f = cut_fixture();
  const SlabSpace& s = *f.space;
  const Vec2 w(0.7, -0.4);
  const Eigen::VectorXd u = interpolate(s, [](const Vec2& x, double t) { return 2 * x.x() - x.y() + t; });
  const Eigen::VectorXd d = discrete_material_derivative(s, u, constant_velocity(w));
  EXPECT_LT((d.array() - (1.0 + 2 * w.x() - w.y())).abs().maxCoeff(), 1e-12);
  // nodal velocity is the vertex interpolant at t_{n-1}
  const auto nv = nodal_velocity(s, [](const Vec2& x, double t) { return Vec2(x.y(), t); });
  const int e = s.active_elements().front();
  for (int i = 0; i < 3; ++i) {
    const Vec2 x = f.mesh->vertices()[f.mesh->elements()[e][i]];
    EXPECT_EQ(nv[e][i], Vec2(x.y(), s.t_begin()));
  }
}

TEST(MassBalance, IdentityHoldsForTheMassConservingForm) {
  ProblemConfig c;
  c.box = Box{Vec2(-3.5, -3.5), Vec2(3.5, 3.5)};
  c.h = 0.9;
  c.num_slabs = 2;
  c.k_s = 2;
  c.k_t = 2;
  c.levelset = [](const Vec2& x, double t) { return std::exp(-t) * x.norm() - 1.0; };
  c.data.velocity = [](const Vec2& x, double) { return x; };
  c.data.divergence = constant_field(2.0);
  c.data.source = [](const Vec2& x, double t) { return std::cos(x.x()) + t; };
  c.data.initial = [](const Vec2& x) { return 1.0 + x.y(); };
  c.forms.variant = FormVariant::mass_conserving;
  const Discretization d = march(c);
  const double fin = discrete_mass(d, 1.0, SolutionField::Side::left);
  const double ini = initial_mass(d, c.data.initial);
  const double src = source_integral(d, c.data.source);
  EXPECT_LT(std::abs(fin - ini - src), 1e-10 * (std::abs(fin) + std::abs(ini) + std::abs(src)));
}
