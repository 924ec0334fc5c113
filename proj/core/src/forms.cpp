#include "stcut/forms.hpp"

#include <algorithm>
#include <cmath>

#include "assembly_detail.hpp"
#include "stcut/cut_quadrature.hpp"
#include "stcut/quadrature.hpp"

namespace stcut {

namespace detail {

SlabMatrixBuilder::SlabMatrixBuilder(const SlabSpace& space, std::span<const int> ghost_facets)
    : nt_(space.time_size()), n_rows_(space.num_active_dofs()) {
  std::vector<std::vector<int>> rows(n_rows_);
  std::vector<int> dofs;
  auto couple = [&rows](const std::vector<int>& ids) {
    for (int r : ids)
      for (int c : ids) rows[r].push_back(c);
  };
  for (int e : space.active_elements()) {
    active_dofs(space, e, dofs);
    couple(dofs);
  }
  const Mesh& mesh = space.mesh();
  std::vector<int> other;
  for (int f : ghost_facets) {
    const auto [e1, e2] = mesh.facet_patch(f);
    active_dofs(space, e1, dofs);
    active_dofs(space, e2, other);
    dofs.insert(dofs.end(), other.begin(), other.end());
    couple(dofs);
  }
  row_ptr_.assign(n_rows_ + 1, 0);
  for (int r = 0; r < n_rows_; ++r) {
    auto& row = rows[r];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    row_ptr_[r + 1] = row_ptr_[r] + static_cast<int>(row.size());
  }
  cols_.reserve(row_ptr_.back());
  for (const auto& row : rows) cols_.insert(cols_.end(), row.begin(), row.end());
  values_.assign(static_cast<std::size_t>(row_ptr_.back()) * nt_ * nt_, 0.0);
}

int SlabMatrixBuilder::position(int r, int c) const {
  const auto first = cols_.begin() + row_ptr_[r];
  const auto last = cols_.begin() + row_ptr_[r + 1];
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) throw AssemblyError("matrix entry outside the assembly pattern");
  return static_cast<int>(it - cols_.begin());
}

void SlabMatrixBuilder::add_local(std::span<const int> dofs, const Eigen::MatrixXd& local,
                                  double scale) {
  const int n = static_cast<int>(dofs.size());
  for (int i = 0; i < n; ++i) {
    const int r = dofs[i];
    const std::size_t len = static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r]) * nt_;
    const std::size_t row_base = static_cast<std::size_t>(row_ptr_[r]) * nt_ * nt_;
    for (int j = 0; j < n; ++j) {
      const int k = position(r, dofs[j]) - row_ptr_[r];
      for (int a = 0; a < nt_; ++a) {
        double* dst = values_.data() + row_base + a * len + static_cast<std::size_t>(k) * nt_;
        for (int b = 0; b < nt_; ++b) dst[b] += scale * local(i * nt_ + a, j * nt_ + b);
      }
    }
  }
}

void SlabMatrixBuilder::add_kron(std::span<const int> dofs, const Eigen::MatrixXd& spatial,
                                 const Eigen::MatrixXd& temporal, double scale) {
  const int n = static_cast<int>(dofs.size());
  for (int i = 0; i < n; ++i) {
    const int r = dofs[i];
    const std::size_t len = static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r]) * nt_;
    const std::size_t row_base = static_cast<std::size_t>(row_ptr_[r]) * nt_ * nt_;
    for (int j = 0; j < n; ++j) {
      const double s = scale * spatial(i, j);
      if (s == 0.0) continue;
      const int k = position(r, dofs[j]) - row_ptr_[r];
      for (int a = 0; a < nt_; ++a) {
        double* dst = values_.data() + row_base + a * len + static_cast<std::size_t>(k) * nt_;
        for (int b = 0; b < nt_; ++b) dst[b] += s * temporal(a, b);
      }
    }
  }
}

SparseMatrix SlabMatrixBuilder::finish() const {
  const int n = n_rows_ * nt_;
  std::vector<int> outer(n + 1);
  std::vector<int> inner(values_.size());
  for (int r = 0; r < n_rows_; ++r) {
    const int len = row_ptr_[r + 1] - row_ptr_[r];
    for (int a = 0; a < nt_; ++a) {
      const int start = row_ptr_[r] * nt_ * nt_ + a * len * nt_;
      outer[r * nt_ + a] = start;
      for (int k = 0; k < len; ++k)
        for (int b = 0; b < nt_; ++b) inner[start + k * nt_ + b] = cols_[row_ptr_[r] + k] * nt_ + b;
    }
  }
  outer[n] = static_cast<int>(values_.size());
  const Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor>> view(
      n, n, static_cast<Eigen::Index>(values_.size()), outer.data(), inner.data(), values_.data());
  return SparseMatrix(view);
}

}  // namespace detail

using detail::PointBasis;
using detail::SlabMatrixBuilder;
using detail::TimeBlocks;

QuadratureConfig QuadratureConfig::resolved(int k_s, int k_t) const {
  QuadratureConfig out = *this;
  if (out.spatial_order <= 0) out.spatial_order = 2 * k_s + 2;
  if (out.time_points <= 0) out.time_points = k_t + 2;
  if (out.spatial_order < 2 * k_s)
    throw AssemblyError("spatial quadrature order below 2*k_s is inconsistent with the space");
  if (2 * out.time_points - 1 < 2 * k_t)
    throw AssemblyError("too few temporal quadrature points for k_t");
  return out;
}

namespace {

void check_same_slab(const SlabSpace& space, const SlabLevelSet& ls) {
  if (space.t_begin() != ls.t_begin() || space.t_end() != ls.t_end())
    throw AssemblyError("space and level set belong to different slabs");
}

// Adds (u, v)_{Omega^h(t)} on the temporal trace at a slab endpoint.
void add_endpoint_mass(const SlabSpace& space, const SlabLevelSet& ls, double t, int order,
                       SlabMatrixBuilder& out) {
  const Mesh& mesh = space.mesh();
  const int ns = space.spatial_element().size();
  const int nt = space.time_size();
  detail::SpatialTabulator tab(space.spatial_element());
  std::vector<double> psi(nt), dpsi(nt);
  space.eval_time(t, psi, dpsi);
  Eigen::MatrixXd temporal(nt, nt);
  for (int a = 0; a < nt; ++a)
    for (int b = 0; b < nt; ++b) temporal(a, b) = psi[a] * psi[b];
  Eigen::MatrixXd spatial(ns, ns);
  std::vector<int> dofs;
  for (int e : space.active_elements()) {
    const CutRule rule = fixed_time_interface_rule(mesh, e, ls, t, order);
    if (rule.empty()) continue;
    tab.tabulate(mesh.element_map(e), rule);
    spatial.setZero();
    for (std::size_t p = 0; p < rule.size(); ++p) {
      const auto phi = tab.phi(p);
      for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j) spatial(i, j) += rule.weights[p] * phi[i] * phi[j];
    }
    detail::active_dofs(space, e, dofs);
    out.add_kron(dofs, spatial, temporal, 1.0);
  }
}

}  // namespace

SparseMatrix assemble_Bh(const SlabSpace& space, const SlabGeometry& geometry,
                         const SlabLevelSet& ls, const TransportData& data,
                         const QuadratureConfig& quad_in) {
  check_same_slab(space, ls);
  const QuadratureConfig quad = quad_in.resolved(space.k_s(), space.k_t());
  SlabMatrixBuilder out(space, geometry.ghost_facets);
  TimeBlocks blocks;
  blocks.use_vv = blocks.use_vd = true;
  const int ns = space.spatial_element().size();
  detail::assemble_volume(space, ls, VolumeRegion::cut, quad, blocks, out,
                          [&](const PointBasis& p, TimeBlocks& b) {
                            const Vec2 w = data.velocity(p.x, p.t);
                            const double div = data.divergence(p.x, p.t);
                            for (int j = 0; j < ns; ++j) {
                              const double conv = w.dot(p.grad[j]) + div * p.phi[j];
                              for (int i = 0; i < ns; ++i) {
                                b.vd(i, j) += p.weight * p.phi[i] * p.phi[j];
                                b.vv(i, j) += p.weight * p.phi[i] * conv;
                              }
                            }
                          });
  add_endpoint_mass(space, ls, space.t_begin(), quad.spatial_order, out);
  return out.finish();
}

SparseMatrix assemble_Bmc(const SlabSpace& space, const SlabGeometry& geometry,
                          const SlabLevelSet& ls, const TransportData& data,
                          const QuadratureConfig& quad_in) {
  check_same_slab(space, ls);
  const QuadratureConfig quad = quad_in.resolved(space.k_s(), space.k_t());
  SlabMatrixBuilder out(space, geometry.ghost_facets);
  TimeBlocks blocks;
  blocks.use_vv = blocks.use_dv = true;
  const int ns = space.spatial_element().size();
  detail::assemble_volume(space, ls, VolumeRegion::cut, quad, blocks, out,
                          [&](const PointBasis& p, TimeBlocks& b) {
                            const Vec2 w = data.velocity(p.x, p.t);
                            for (int i = 0; i < ns; ++i) {
                              const double conv = w.dot(p.grad[i]);
                              for (int j = 0; j < ns; ++j) {
                                b.dv(i, j) -= p.weight * p.phi[i] * p.phi[j];
                                b.vv(i, j) -= p.weight * conv * p.phi[j];
                              }
                            }
                          });
  add_endpoint_mass(space, ls, space.t_end(), quad.spatial_order, out);
  return out.finish();
}

SparseMatrix assemble_J(const SlabSpace& space, const SlabGeometry& geometry, double gamma_J,
                        int j_scaling) {
  if (!(gamma_J >= 0.0)) throw AssemblyError("gamma_J must be non-negative");
  const Mesh& mesh = space.mesh();
  const int ns = space.spatial_element().size();
  const int nt = space.time_size();
  SlabMatrixBuilder out(space, geometry.ghost_facets);
  if (gamma_J == 0.0 || geometry.ghost_facets.empty()) return out.finish();

  // temporal mass on I_n
  const Rule1D& gt = gauss_legendre(nt);
  Eigen::MatrixXd temporal = Eigen::MatrixXd::Zero(nt, nt);
  std::vector<double> psi(nt), dpsi(nt);
  for (std::size_t q = 0; q < gt.points.size(); ++q) {
    space.eval_time(space.t_begin() + gt.points[q] * space.dt(), psi, dpsi);
    for (int a = 0; a < nt; ++a)
      for (int b = 0; b < nt; ++b) temporal(a, b) += gt.weights[q] * space.dt() * psi[a] * psi[b];
  }

  const double scale = gamma_J * std::pow(mesh.h_max(), j_scaling);
  const int order = 2 * space.k_s();
  std::vector<int> d1, d2, patch;
  std::vector<int> local1(ns), local2(ns);
  std::vector<double> phi1(ns), phi2(ns);
  Eigen::VectorXd jump;
  Eigen::MatrixXd spatial;

  for (int f : geometry.ghost_facets) {
    const auto [e1, e2] = mesh.facet_patch(f);
    if (!space.element_active(e1) || !space.element_active(e2))
      throw AssemblyError("ghost facet touches an inactive element");
    detail::active_dofs(space, e1, d1);
    detail::active_dofs(space, e2, d2);
    patch = d1;
    for (int i = 0; i < ns; ++i) local1[i] = i;
    for (int j = 0; j < ns; ++j) {
      const auto it = std::find(d1.begin(), d1.end(), d2[j]);
      if (it != d1.end()) {
        local2[j] = static_cast<int>(it - d1.begin());
      } else {
        local2[j] = static_cast<int>(patch.size());
        patch.push_back(d2[j]);
      }
    }
    const int np = static_cast<int>(patch.size());
    spatial.setZero(np, np);
    jump.resize(np);
    const AffineMap map1 = mesh.element_map(e1);
    const AffineMap map2 = mesh.element_map(e2);
    for (const int host : {e1, e2}) {
      const CutRule rule = full_element_rule(mesh, host, order);
      for (std::size_t p = 0; p < rule.size(); ++p) {
        const Vec2& x = rule.points[p];
        space.spatial_element().eval(map1.to_reference(x), phi1);
        space.spatial_element().eval(map2.to_reference(x), phi2);
        jump.setZero();
        for (int i = 0; i < ns; ++i) jump[local1[i]] += phi1[i];
        for (int j = 0; j < ns; ++j) jump[local2[j]] -= phi2[j];
        spatial.noalias() += rule.weights[p] * jump * jump.transpose();
      }
    }
    out.add_kron(patch, spatial, temporal, scale);
  }
  return out.finish();
}

Eigen::VectorXd assemble_rhs(const SlabSpace& space, const SlabGeometry& geometry,
                             const SlabLevelSet& ls, const TransportData& data,
                             const SlabField* previous, const QuadratureConfig& quad_in) {
  (void)geometry;
  check_same_slab(space, ls);
  if (space.slab() == 1 && previous)
    throw AssemblyError("first slab takes the initial datum, not a previous field");
  if (space.slab() > 1 && !previous)
    throw AssemblyError("slab n >= 2 needs the previous slab's field");
  const QuadratureConfig quad = quad_in.resolved(space.k_s(), space.k_t());
  const Mesh& mesh = space.mesh();
  const int ns = space.spatial_element().size();
  const int nt = space.time_size();
  detail::SpatialTabulator tab(space.spatial_element());
  std::vector<double> psi(nt), dpsi(nt);
  std::vector<int> dofs;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.num_unknowns());
  Eigen::VectorXd fs(ns);

  for (int e : space.active_elements()) {
    const AffineMap map = mesh.element_map(e);
    detail::active_dofs(space, e, dofs);
    const TimeRule tr = element_time_rule(ls, e, quad.time_points);
    for (std::size_t q = 0; q < tr.times.size(); ++q) {
      const double t = tr.times[q];
      const CutRule rule = spatial_cut_rule(mesh, e, ls, t, quad.spatial_order);
      if (rule.empty()) continue;
      tab.tabulate(map, rule);
      fs.setZero();
      for (std::size_t p = 0; p < rule.size(); ++p) {
        const double f = data.source(rule.points[p], t) * rule.weights[p];
        const auto phi = tab.phi(p);
        for (int i = 0; i < ns; ++i) fs[i] += f * phi[i];
      }
      space.eval_time(t, psi, dpsi);
      const double wt = tr.weights[q];
      for (int i = 0; i < ns; ++i)
        for (int a = 0; a < nt; ++a) rhs[space.unknown(dofs[i], a)] += wt * psi[a] * fs[i];
    }

    // upwind datum at t_{n-1}
    const double t0 = space.t_begin();
    const CutRule rule = fixed_time_interface_rule(mesh, e, ls, t0, quad.spatial_order);
    if (rule.empty()) continue;
    if (previous && !previous->space->element_active(e))
      throw AssemblyError("extension gap: previous slab inactive on element " + std::to_string(e));
    tab.tabulate(map, rule);
    space.eval_time(t0, psi, dpsi);
    for (std::size_t p = 0; p < rule.size(); ++p) {
      const double g = previous ? previous->value(e, rule.ref_points[p], t0)
                                : data.initial(rule.points[p]);
      const auto phi = tab.phi(p);
      for (int i = 0; i < ns; ++i)
        for (int a = 0; a < nt; ++a)
          rhs[space.unknown(dofs[i], a)] += rule.weights[p] * g * phi[i] * psi[a];
    }
  }
  return rhs;
}

SlabSystem assemble_slab_system(const SlabSpace& space, const SlabGeometry& geometry,
                                const SlabLevelSet& ls, const TransportData& data,
                                const SlabField* previous, const FormOptions& options) {
  SlabSystem sys;
  sys.slab = space.slab();
  sys.gamma_J = options.gamma_J;
  sys.variant = options.variant;
  sys.matrix = options.variant == FormVariant::standard
                   ? assemble_Bh(space, geometry, ls, data, options.quadrature)
                   : assemble_Bmc(space, geometry, ls, data, options.quadrature);
  if (options.gamma_J > 0.0)
    sys.matrix += assemble_J(space, geometry, options.gamma_J, options.j_scaling);
  sys.rhs = assemble_rhs(space, geometry, ls, data, previous, options.quadrature);
  return sys;
}

SparseMatrix assemble_mass(const SlabSpace& space, const SlabLevelSet& ls, VolumeRegion region,
                           const QuadratureConfig& quad_in) {
  const QuadratureConfig quad = quad_in.resolved(space.k_s(), space.k_t());
  SlabMatrixBuilder out(space, {});
  TimeBlocks blocks;
  blocks.use_vv = true;
  const int ns = space.spatial_element().size();
  detail::assemble_volume(space, ls, region, quad, blocks, out,
                          [&](const PointBasis& p, TimeBlocks& b) {
                            for (int i = 0; i < ns; ++i)
                              for (int j = 0; j < ns; ++j)
                                b.vv(i, j) += p.weight * p.phi[i] * p.phi[j];
                          });
  return out.finish();
}

SparseMatrix assemble_dt_mass(const SlabSpace& space, const SlabLevelSet& ls,
                              const QuadratureConfig& quad_in) {
  const QuadratureConfig quad = quad_in.resolved(space.k_s(), space.k_t());
  SlabMatrixBuilder out(space, {});
  TimeBlocks blocks;
  blocks.use_dd = true;
  const int ns = space.spatial_element().size();
  detail::assemble_volume(space, ls, VolumeRegion::cut, quad, blocks, out,
                          [&](const PointBasis& p, TimeBlocks& b) {
                            for (int i = 0; i < ns; ++i)
                              for (int j = 0; j < ns; ++j)
                                b.dd(i, j) += p.weight * p.phi[i] * p.phi[j];
                          });
  return out.finish();
}

SparseMatrix assemble_grad_mass(const SlabSpace& space, const SlabLevelSet& ls,
                                const QuadratureConfig& quad_in) {
  const QuadratureConfig quad = quad_in.resolved(space.k_s(), space.k_t());
  SlabMatrixBuilder out(space, {});
  TimeBlocks blocks;
  blocks.use_vv = true;
  const int ns = space.spatial_element().size();
  detail::assemble_volume(space, ls, VolumeRegion::cut, quad, blocks, out,
                          [&](const PointBasis& p, TimeBlocks& b) {
                            for (int i = 0; i < ns; ++i)
                              for (int j = 0; j < ns; ++j)
                                b.vv(i, j) += p.weight * p.grad[i].dot(p.grad[j]);
                          });
  return out.finish();
}

SparseMatrix assemble_matderiv_mass(const SlabSpace& space, const SlabLevelSet& ls,
                                    const VectorField& velocity, const QuadratureConfig& quad_in) {
  const QuadratureConfig quad = quad_in.resolved(space.k_s(), space.k_t());
  SlabMatrixBuilder out(space, {});
  TimeBlocks blocks;
  blocks.use_vv = blocks.use_vd = blocks.use_dv = blocks.use_dd = true;
  const int ns = space.spatial_element().size();
  std::vector<double> conv(ns);
  detail::assemble_volume(space, ls, VolumeRegion::cut, quad, blocks, out,
                          [&](const PointBasis& p, TimeBlocks& b) {
                            const Vec2 w = velocity(p.x, p.t);
                            for (int i = 0; i < ns; ++i) conv[i] = w.dot(p.grad[i]);
                            for (int i = 0; i < ns; ++i) {
                              for (int j = 0; j < ns; ++j) {
                                b.dd(i, j) += p.weight * p.phi[i] * p.phi[j];
                                b.dv(i, j) += p.weight * p.phi[i] * conv[j];
                                b.vd(i, j) += p.weight * conv[i] * p.phi[j];
                                b.vv(i, j) += p.weight * conv[i] * conv[j];
                              }
                            }
                          });
  return out.finish();
}

SparseMatrix assemble_endpoint_mass(const SlabSpace& space, const SlabLevelSet& ls, SlabEnd end,
                                    const QuadratureConfig& quad_in) {
  const QuadratureConfig quad = quad_in.resolved(space.k_s(), space.k_t());
  SlabMatrixBuilder out(space, {});
  add_endpoint_mass(space, ls, end == SlabEnd::begin ? space.t_begin() : space.t_end(),
                    quad.spatial_order, out);
  return out.finish();
}

SparseMatrix assemble_boundary_mass(const SlabSpace& space, const SlabLevelSet& ls,
                                    const QuadratureConfig& quad_in) {
  const QuadratureConfig quad = quad_in.resolved(space.k_s(), space.k_t());
  const Mesh& mesh = space.mesh();
  const int ns = space.spatial_element().size();
  const int nt = space.time_size();
  SlabMatrixBuilder out(space, {});
  std::vector<double> psi(nt), dpsi(nt), phi(ns);
  std::vector<int> dofs;
  Eigen::MatrixXd local(ns * nt, ns * nt);
  for (int e : space.active_elements()) {
    local.setZero();
    bool any = false;
    const TimeRule tr = element_time_rule(ls, e, quad.time_points);
    for (std::size_t q = 0; q < tr.times.size(); ++q) {
      const double t = tr.times[q];
      const InterfaceMidpoints mids = interface_midpoints(mesh, e, ls, t);
      if (mids.lengths.empty()) continue;
      any = true;
      space.eval_time(t, psi, dpsi);
      const double wt = tr.weights[q];
      for (std::size_t s = 0; s < mids.lengths.size(); ++s) {
        space.spatial_element().eval(mids.ref_points[s], phi);
        for (int i = 0; i < ns; ++i)
          for (int j = 0; j < ns; ++j)
            for (int a = 0; a < nt; ++a)
              for (int b = 0; b < nt; ++b)
                local(i * nt + a, j * nt + b) +=
                    wt * mids.lengths[s] * phi[i] * psi[a] * phi[j] * psi[b];
      }
    }
    if (!any) continue;
    detail::active_dofs(space, e, dofs);
    out.add_local(dofs, local);
  }
  return out.finish();
}

double quadratic_form(const SparseMatrix& a, const Eigen::VectorXd& x) { return x.dot(a * x); }

}  // namespace stcut
