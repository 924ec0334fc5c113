#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Dense>

#include "stcut/analysis.hpp"
#include "stcut/cut_quadrature.hpp"
#include "stcut/forms.hpp"
#include "test_support.hpp"

using namespace stcut;
using stcut::testing::constant_field;
using stcut::testing::constant_velocity;
using stcut::testing::random_vector;
using stcut::testing::SlabFixture;

namespace {

SpaceTimeScalar expanding_disk() {
  return [](const Vec2& x, double t) { return std::exp(-t) * x.norm() - 1.0; };
}

// slab 2 of 4 on the expanding disk, k_s = k_t = 2
SlabFixture expanding_fixture(int k_s = 2, int k_t = 2) {
  return SlabFixture(Box{Vec2(-3.5, -3.5), Vec2(3.5, 3.5)}, 0.45, SplitKind::criss_cross,
                     expanding_disk(), k_s, k_t, 0.0, 1.0, 4, 2);
}

TransportData expansion_data() {
  TransportData d;
  d.velocity = [](const Vec2& x, double) { return x; };
  d.divergence = constant_field(2.0);
  d.source = constant_field(0.0);
  d.initial = [](const Vec2&) { return 0.0; };
  return d;
}

Eigen::MatrixXd dense(const SparseMatrix& a) { return Eigen::MatrixXd(a); }

}  // namespace

TEST(GhostPenalty, VanishesOnGlobalPolynomials) {
  for (int k : {1, 2, 3}) {
    const SlabFixture f = expanding_fixture(k, k);
    const SparseMatrix j = assemble_J(*f.space, f.geometry(), 0.05);
    const auto p = [k](const Vec2& x, double t) {
      return std::pow(x.x(), k) - 2 * std::pow(x.y(), k - 1) * x.x() + std::pow(t, k) * x.y() + 1;
    };
    const Eigen::VectorXd v = interpolate(*f.space, p);
    EXPECT_LE(std::abs(quadratic_form(j, v)), 1e-12 * v.squaredNorm()) << "k=" << k;
  }
}

TEST(GhostPenalty, SymmetricPositiveSemidefinite) {
  const SlabFixture f(stcut::testing::unit_square(), 0.25, SplitKind::criss_cross,
                      [](const Vec2& x, double t) { return x.x() - 0.4 - 0.2 * t; }, 2, 1, 0, 1, 1,
                      1);
  const Eigen::MatrixXd j = dense(assemble_J(*f.space, f.geometry(), 0.05));
  EXPECT_LT((j - j.transpose()).norm(), 1e-14 * j.norm());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(j);
  EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-12 * eig.eigenvalues().maxCoeff());
  EXPECT_GT(eig.eigenvalues().maxCoeff(), 0.0);
}

TEST(GhostPenalty, MatrixMatchesBrokenEvaluation) {
  const SlabFixture f = expanding_fixture();
  const SparseMatrix j = assemble_J(*f.space, f.geometry(), 0.05);
  const Eigen::VectorXd v = random_vector(f.space->num_unknowns(), 7);
  const double direct = ghost_penalty_value(*f.space, f.geometry(), to_broken(*f.space, v), 0.05);
  EXPECT_NEAR(quadratic_form(j, v), direct, 1e-10 * std::abs(direct));
}

TEST(GhostPenalty, ScalesWithGammaAndMeshSize) {
  const SlabFixture f = expanding_fixture();
  const Eigen::VectorXd v = random_vector(f.space->num_unknowns(), 8);
  const double a = quadratic_form(assemble_J(*f.space, f.geometry(), 0.05, -1), v);
  const double b = quadratic_form(assemble_J(*f.space, f.geometry(), 0.5, 0), v);
  EXPECT_NEAR(b, 10.0 * a * f.mesh->h_max(), 1e-10 * std::abs(b));
}

TEST(MassMatrix, TotalIsSpaceTimeVolume) {
  const SlabFixture f = expanding_fixture();
  const SparseMatrix m = assemble_mass(*f.space, f.levelset(), VolumeRegion::cut, {});
  const Eigen::VectorXd one = interpolate(*f.space, constant_field(1.0));
  double volume = 0.0;
  for (int e : f.space->active_elements())
    volume += spacetime_rule(*f.mesh, e, f.levelset(), 6, 4).total_weight();
  EXPECT_NEAR(quadratic_form(m, one), volume, 1e-12 * volume);
  // full prisms: active area times dt
  const SparseMatrix mf = assemble_mass(*f.space, f.levelset(), VolumeRegion::full, {});
  double area = 0.0;
  for (int e : f.space->active_elements()) area += f.mesh->element_area(e);
  EXPECT_NEAR(quadratic_form(mf, one), area * f.space->dt(), 1e-12 * area);
}

TEST(TransportForm, ConstantTrialGivesDivergenceAndInflowTerms) {
  // B_h(1, v) = (div w, v)_Q + (1, v_+)
  const SlabFixture f = expanding_fixture();
  const auto data = expansion_data();
  const SparseMatrix b = assemble_Bh(*f.space, f.geometry(), f.levelset(), data, {});
  const SparseMatrix m = assemble_mass(*f.space, f.levelset(), VolumeRegion::cut, {});
  const SparseMatrix mb = assemble_endpoint_mass(*f.space, f.levelset(), SlabEnd::begin, {});
  const Eigen::VectorXd one = interpolate(*f.space, constant_field(1.0));
  const Eigen::VectorXd lhs = b * one;
  const Eigen::VectorXd rhs = 2.0 * (m * one) + mb * one;
  EXPECT_LT((lhs - rhs).norm(), 1e-12 * rhs.norm());
}

TEST(TransportForm, MassConservingRowSumIsFinalTrace) {
  // B_mc(u, 1) = (u_-, 1)_{t_n} for every u
  const SlabFixture f = expanding_fixture();
  const auto data = expansion_data();
  const SparseMatrix b = assemble_Bmc(*f.space, f.geometry(), f.levelset(), data, {});
  const SparseMatrix me = assemble_endpoint_mass(*f.space, f.levelset(), SlabEnd::end, {});
  const Eigen::VectorXd one = interpolate(*f.space, constant_field(1.0));
  const Eigen::VectorXd lhs = b.transpose() * one;
  const Eigen::VectorXd rhs = me.transpose() * one;
  EXPECT_LT((lhs - rhs).norm(), 1e-12 * rhs.norm());
}

TEST(TransportForm, StandardAndMassConservingDifferOnlyOnTheBoundary) {
  // exact geometry moving with w: B_h - B_mc is an integration by parts identity
  const SlabFixture f(Box{Vec2(-1, -1), Vec2(1, 1)}, 0.25, SplitKind::criss_cross,
                      [](const Vec2& x, double t) { return std::abs(x.x() + 0.3 - 0.5 * t) - 0.5; },
                      2, 2, 0.0, 1.0, 2, 1);
  TransportData d;
  d.velocity = constant_velocity(Vec2(0.5, 0.0));
  d.divergence = constant_field(0.0);
  d.source = constant_field(0.0);
  d.initial = [](const Vec2&) { return 0.0; };
  // a line moving through a triangle makes the cut integrals polynomial in t of
  // degree deg_t + deg_x + 1 = 9 here, so 5 points per time piece are needed
  QuadratureConfig quad;
  quad.time_points = 6;
  const SparseMatrix bh = assemble_Bh(*f.space, f.geometry(), f.levelset(), d, quad);
  const SparseMatrix bmc = assemble_Bmc(*f.space, f.geometry(), f.levelset(), d, quad);
  const Eigen::VectorXd u = random_vector(f.space->num_unknowns(), 3);
  const Eigen::VectorXd v = random_vector(f.space->num_unknowns(), 4);
  const double a = v.dot(bh * u), b = v.dot(bmc * u);
  EXPECT_NEAR(a, b, 1e-11 * (std::abs(a) + std::abs(b)));
}

TEST(TransportForm, RejectsInconsistentInputs) {
  const SlabFixture f = expanding_fixture();
  auto data = expansion_data();
  EXPECT_THROW(assemble_rhs(*f.space, f.geometry(), f.levelset(), data, nullptr, {}), AssemblyError);
  EXPECT_THROW(assemble_J(*f.space, f.geometry(), -1.0), AssemblyError);
  QuadratureConfig bad;
  bad.spatial_order = 1;
  EXPECT_THROW(bad.resolved(2, 2), AssemblyError);
}

TEST(TransportForm, EndpointMassIsSymmetricAndPositive) {
  const SlabFixture f = expanding_fixture();
  const Eigen::MatrixXd m = dense(assemble_endpoint_mass(*f.space, f.levelset(), SlabEnd::end, {}));
  EXPECT_LT((m - m.transpose()).norm(), 1e-14 * m.norm());
  const Eigen::VectorXd v = random_vector(f.space->num_unknowns(), 9);
  EXPECT_GT(v.dot(m * v), 0.0);
}
