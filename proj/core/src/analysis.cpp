#include "stcut/analysis.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "stcut/cut_quadrature.hpp"
#include "stcut/quadrature.hpp"

namespace stcut {

namespace {

struct ResolvedQuad {
  int spatial_order;
  int time_points;
};

ResolvedQuad resolve(const Discretization& disc, const ErrorQuadrature& q) {
  const int k_s = disc.dofs->order();
  const int k_t = disc.field.slab(1).space->k_t();
  return {q.spatial_order > 0 ? q.spatial_order : 2 * k_s + 4,
          q.time_points > 0 ? q.time_points : k_t + 3};
}

// Calls visit(e, xi, x, t, weight) for every point of the space-time rule on Q^{h,n}.
template <class Visit>
void for_each_slab_point(const Discretization& disc, int n, const ResolvedQuad& q, Visit&& visit) {
  const SlabField& field = disc.field.slab(n);
  const SlabLevelSet& ls = disc.field.levelsets[n - 1];
  const SlabSpace& space = *field.space;
  for (int e : space.active_elements()) {
    const TimeRule tr = element_time_rule(ls, e, q.time_points);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      const double t = tr.times[k];
      const CutRule rule = spatial_cut_rule(*disc.mesh, e, ls, t, q.spatial_order);
      const double wt = tr.weights[k];
      for (std::size_t p = 0; p < rule.size(); ++p)
        visit(e, rule.ref_points[p], rule.points[p], t, wt * rule.weights[p]);
    }
  }
}

// Calls visit(e, xi, x, weight) on Omega^h(t) for t an endpoint of slab n.
template <class Visit>
void for_each_endpoint_point(const Discretization& disc, int n, double t, int order,
                             Visit&& visit) {
  const SlabField& field = disc.field.slab(n);
  const SlabLevelSet& ls = disc.field.levelsets[n - 1];
  for (int e : field.space->active_elements()) {
    const CutRule rule = fixed_time_interface_rule(*disc.mesh, e, ls, t, order);
    for (std::size_t p = 0; p < rule.size(); ++p)
      visit(e, rule.ref_points[p], rule.points[p], rule.weights[p]);
  }
}

Eigen::MatrixXd temporal_mass(const SlabSpace& space) {
  const int nt = space.time_size();
  const Rule1D& g = gauss_legendre(nt);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nt, nt);
  std::vector<double> psi(nt), dpsi(nt);
  for (std::size_t q = 0; q < g.points.size(); ++q) {
    space.eval_time(space.t_begin() + g.points[q] * space.dt(), psi, dpsi);
    for (int a = 0; a < nt; ++a)
      for (int b = 0; b < nt; ++b) m(a, b) += g.weights[q] * space.dt() * psi[a] * psi[b];
  }
  return m;
}

}  // namespace

double l2_final_error(const Discretization& disc, const SpaceTimeScalar& u,
                      const ErrorQuadrature& quad) {
  const ResolvedQuad q = resolve(disc, quad);
  const int n = disc.field.num_slabs();
  const SlabField& field = disc.field.slab(n);
  const double t = field.space->t_end();
  double sum = 0.0;
  for_each_endpoint_point(disc, n, t, q.spatial_order,
                          [&](int e, const Vec2& xi, const Vec2& x, double w) {
                            const double d = u(x, t) - field.value(e, xi, t);
                            sum += w * d * d;
                          });
  return std::sqrt(sum);
}

double h1_spacetime_error(const Discretization& disc, const ExactSolution& exact,
                          const ErrorQuadrature& quad) {
  const ResolvedQuad q = resolve(disc, quad);
  double sum = 0.0;
  for (int n = 1; n <= disc.field.num_slabs(); ++n) {
    const SlabField& field = disc.field.slab(n);
    for_each_slab_point(disc, n, q, [&](int e, const Vec2& xi, const Vec2& x, double t, double w) {
      const PointValue v = field.evaluate(e, xi, t);
      const Vec2 dg = exact.grad(x, t) - v.grad;
      const double dt = exact.dt(x, t) - v.dt;
      sum += w * (dg.squaredNorm() + dt * dt);
    });
  }
  return std::sqrt(sum);
}

double matderiv_error(const Discretization& disc, const ExactSolution& exact,
                      const VectorField& velocity, const ErrorQuadrature& quad) {
  const ResolvedQuad q = resolve(disc, quad);
  double sum = 0.0;
  for (int n = 1; n <= disc.field.num_slabs(); ++n) {
    const SlabField& field = disc.field.slab(n);
    for_each_slab_point(disc, n, q, [&](int e, const Vec2& xi, const Vec2& x, double t, double w) {
      const PointValue v = field.evaluate(e, xi, t);
      const Vec2 wv = velocity(x, t);
      const double d = exact.dt(x, t) - v.dt + wv.dot(exact.grad(x, t) - v.grad);
      sum += w * d * d;
    });
  }
  return std::sqrt(sum);
}

ErrorReport error_report(const Discretization& disc, const ExactSolution& exact,
                         const VectorField& velocity, double gamma_J, int j_scaling,
                         const ErrorQuadrature& quad) {
  const ResolvedQuad q = resolve(disc, quad);
  ErrorReport r;
  double h1 = 0.0, md = 0.0, l2 = 0.0;
  for (int n = 1; n <= disc.field.num_slabs(); ++n) {
    const SlabField& field = disc.field.slab(n);
    for_each_slab_point(disc, n, q, [&](int e, const Vec2& xi, const Vec2& x, double t, double w) {
      const PointValue v = field.evaluate(e, xi, t);
      const Vec2 dg = exact.grad(x, t) - v.grad;
      const double dt = exact.dt(x, t) - v.dt;
      const double d = exact.u(x, t) - v.value;
      const double m = dt + velocity(x, t).dot(dg);
      h1 += w * (dg.squaredNorm() + dt * dt);
      md += w * m * m;
      l2 += w * d * d;
    });

    // jump at t_{n-1}
    const double t = field.space->t_begin();
    const SlabField* prev = n > 1 ? &disc.field.slab(n - 1) : nullptr;
    for_each_endpoint_point(disc, n, t, q.spatial_order,
                            [&](int e, const Vec2& xi, const Vec2& x, double w) {
                              double jump;
                              if (prev) {
                                if (!prev->space->element_active(e))
                                  throw SpaceError("jump evaluation on inactive element");
                                jump = prev->value(e, xi, t) - field.value(e, xi, t);
                              } else {
                                jump = exact.u(x, t) - field.value(e, xi, t);
                              }
                              r.jumps_sq += w * jump * jump;
                            });
    r.ghost_penalty += ghost_penalty_value(*field.space, disc.field.geometries[n - 1],
                                           to_broken(*field.space, field.coeffs), gamma_J,
                                           j_scaling);
  }
  r.l2_final = l2_final_error(disc, exact.u, quad);
  r.final_trace_sq = r.l2_final * r.l2_final;
  r.h1_st = std::sqrt(h1);
  r.matderiv = std::sqrt(md);
  r.h_matderiv_sq = disc.mesh->h_max() * md;
  r.l2_st_sq = l2;
  return r;
}

std::vector<double> eoc(const std::vector<double>& errors) {
  std::vector<double> out(errors.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i < errors.size(); ++i)
    out[i] = std::log2(errors[i - 1] / errors[i]);
  return out;
}

double discrete_mass(const Discretization& disc, double t, SolutionField::Side side) {
  const int n = disc.field.slab_index(t, side);
  const SlabField& field = disc.field.slab(n);
  const int order = 2 * disc.dofs->order() + 2;
  double sum = 0.0;
  for_each_endpoint_point(disc, n, t, order, [&](int e, const Vec2& xi, const Vec2&, double w) {
    sum += w * field.value(e, xi, t);
  });
  return sum;
}

double initial_mass(const Discretization& disc, const std::function<double(const Vec2&)>& u0) {
  const double t = disc.field.slab(1).space->t_begin();
  const int order = 2 * disc.dofs->order() + 2;
  double sum = 0.0;
  for_each_endpoint_point(disc, 1, t, order,
                          [&](int, const Vec2&, const Vec2& x, double w) { sum += w * u0(x); });
  return sum;
}

double source_integral(const Discretization& disc, const SpaceTimeScalar& f) {
  // the rule of the assembled right-hand side, so the balance is exact in floating point
  const ResolvedQuad q{disc.quadrature.spatial_order, disc.quadrature.time_points};
  double sum = 0.0;
  for (int n = 1; n <= disc.field.num_slabs(); ++n)
    for_each_slab_point(disc, n, q, [&](int, const Vec2&, const Vec2& x, double t, double w) {
      sum += w * f(x, t);
    });
  return sum;
}

Eigen::VectorXd time_project(const SlabSpace& space,
                             const std::function<double(int, double)>& coeff, int gauss_points) {
  const int nt = space.time_size();
  const Rule1D& g = gauss_legendre(gauss_points > 0 ? gauss_points : nt + 10);
  const Eigen::LLT<Eigen::MatrixXd> mass(temporal_mass(space));
  std::vector<double> psi(nt), dpsi(nt);
  std::vector<double> times(g.points.size());
  Eigen::MatrixXd basis(g.points.size(), nt);
  for (std::size_t q = 0; q < g.points.size(); ++q) {
    times[q] = space.t_begin() + g.points[q] * space.dt();
    space.eval_time(times[q], psi, dpsi);
    for (int a = 0; a < nt; ++a) basis(q, a) = g.weights[q] * space.dt() * psi[a];
  }
  Eigen::VectorXd out(space.num_unknowns());
  Eigen::VectorXd b(nt);
  for (int d = 0; d < space.num_active_dofs(); ++d) {
    b.setZero();
    for (std::size_t q = 0; q < times.size(); ++q) b += coeff(d, times[q]) * basis.row(q).transpose();
    out.segment(space.unknown(d, 0), nt) = mass.solve(b);
  }
  return out;
}

BrokenField to_broken(const SlabSpace& space, const Eigen::VectorXd& coeffs) {
  const int nt = space.time_size();
  const int ns = space.spatial_element().size();
  BrokenField out;
  out.local.resize(space.mesh().num_elements());
  for (int e : space.active_elements()) {
    const auto dofs = space.dof_table().element_dofs(e);
    Eigen::VectorXd& loc = out.local[e];
    loc.resize(ns * nt);
    for (int i = 0; i < ns; ++i)
      for (int m = 0; m < nt; ++m)
        loc[i * nt + m] = coeffs[space.unknown(space.active_index(dofs[i]), m)];
  }
  return out;
}

Eigen::VectorXd oswald_project(const SlabSpace& space, const BrokenField& field) {
  const int nt = space.time_size();
  const int ns = space.spatial_element().size();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(space.num_unknowns());
  std::vector<int> count(space.num_active_dofs(), 0);
  for (int e : space.active_elements()) {
    const auto dofs = space.dof_table().element_dofs(e);
    const Eigen::VectorXd& loc = field.local.at(e);
    if (loc.size() != ns * nt) throw SpaceError("broken field missing on an active element");
    for (int i = 0; i < ns; ++i) {
      const int a = space.active_index(dofs[i]);
      ++count[a];
      for (int m = 0; m < nt; ++m) sum[space.unknown(a, m)] += loc[i * nt + m];
    }
  }
  for (int a = 0; a < space.num_active_dofs(); ++a)
    for (int m = 0; m < nt; ++m) sum[space.unknown(a, m)] /= count[a];
  return sum;
}

std::vector<std::array<Vec2, 3>> nodal_velocity(const SlabSpace& space,
                                                const VectorField& velocity) {
  const Mesh& mesh = space.mesh();
  std::vector<std::array<Vec2, 3>> out(mesh.num_elements(),
                                       {Vec2::Zero(), Vec2::Zero(), Vec2::Zero()});
  for (int e : space.active_elements()) {
    const auto& el = mesh.elements()[e];
    for (int v = 0; v < 3; ++v) out[e][v] = velocity(mesh.vertices()[el[v]], space.t_begin());
  }
  return out;
}

Eigen::VectorXd discrete_material_derivative(const SlabSpace& space, const Eigen::VectorXd& coeffs,
                                             const VectorField& velocity) {
  const int nt = space.time_size();
  const LagrangeTriangle& fe = space.spatial_element();
  const int ns = fe.size();
  const auto w1 = nodal_velocity(space, velocity);

  // w1 . grad u at the Lagrange nodes of each element, mode by mode
  BrokenField conv;
  conv.local.resize(space.mesh().num_elements());
  std::vector<double> phi(ns);
  std::vector<Vec2> ref_grad(ns);
  std::vector<Vec2> node_grad(static_cast<std::size_t>(ns) * ns);
  for (int i = 0; i < ns; ++i) {
    fe.eval(fe.node(i), phi, ref_grad);
    for (int j = 0; j < ns; ++j) node_grad[i * ns + j] = ref_grad[j];
  }
  for (int e : space.active_elements()) {
    const AffineMap map = space.mesh().element_map(e);
    const auto dofs = space.dof_table().element_dofs(e);
    Eigen::VectorXd& loc = conv.local[e];
    loc.setZero(ns * nt);
    for (int i = 0; i < ns; ++i) {
      const Vec2 xi = fe.node(i);
      const Vec2 w = (1.0 - xi.x() - xi.y()) * w1[e][0] + xi.x() * w1[e][1] + xi.y() * w1[e][2];
      for (int j = 0; j < ns; ++j) {
        const double s = w.dot(map.push_gradient(node_grad[i * ns + j]));
        const int a = space.active_index(dofs[j]);
        for (int m = 0; m < nt; ++m) loc[i * nt + m] += s * coeffs[space.unknown(a, m)];
      }
    }
  }
  Eigen::VectorXd out = oswald_project(space, conv);

  // dt u has degree k_t - 1; its values at the temporal nodes are its coefficients
  std::vector<double> psi(nt), dpsi(nt);
  Eigen::MatrixXd d(nt, nt);
  for (int l = 0; l < nt; ++l) {
    space.eval_time(space.time_node(l), psi, dpsi);
    for (int m = 0; m < nt; ++m) d(l, m) = dpsi[m];
  }
  for (int a = 0; a < space.num_active_dofs(); ++a)
    out.segment(space.unknown(a, 0), nt) += d * coeffs.segment(space.unknown(a, 0), nt);
  return out;
}

double ghost_penalty_value(const SlabSpace& space, const SlabGeometry& geometry,
                           const BrokenField& field, double gamma_J, int j_scaling) {
  const Mesh& mesh = space.mesh();
  const LagrangeTriangle& fe = space.spatial_element();
  const int ns = fe.size();
  const int nt = space.time_size();
  const Rule1D& gt = gauss_legendre(nt);
  std::vector<double> phi1(ns), phi2(ns);
  std::vector<std::vector<double>> psi(gt.points.size(), std::vector<double>(nt));
  std::vector<double> dpsi(nt);
  for (std::size_t q = 0; q < gt.points.size(); ++q)
    space.eval_time(space.t_begin() + gt.points[q] * space.dt(), psi[q], dpsi);

  double sum = 0.0;
  for (int f : geometry.ghost_facets) {
    const auto [e1, e2] = mesh.facet_patch(f);
    const Eigen::VectorXd& u1 = field.local.at(e1);
    const Eigen::VectorXd& u2 = field.local.at(e2);
    const AffineMap m1 = mesh.element_map(e1);
    const AffineMap m2 = mesh.element_map(e2);
    for (const int host : {e1, e2}) {
      const CutRule rule = full_element_rule(mesh, host, 2 * space.k_s());
      for (std::size_t p = 0; p < rule.size(); ++p) {
        fe.eval(m1.to_reference(rule.points[p]), phi1);
        fe.eval(m2.to_reference(rule.points[p]), phi2);
        for (std::size_t q = 0; q < gt.points.size(); ++q) {
          double jump = 0.0;
          for (int i = 0; i < ns; ++i)
            for (int m = 0; m < nt; ++m)
              jump += (phi1[i] * u1[i * nt + m] - phi2[i] * u2[i * nt + m]) * psi[q][m];
          sum += rule.weights[p] * gt.weights[q] * space.dt() * jump * jump;
        }
      }
    }
  }
  return gamma_J * std::pow(mesh.h_max(), j_scaling) * sum;
}

}  // namespace stcut
