#pragma once

// Internal assembly machinery shared by forms, analysis and probes.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "stcut/cut_quadrature.hpp"
#include "stcut/fespace.hpp"
#include "stcut/forms.hpp"
#include "stcut/quadrature.hpp"

namespace stcut::detail {

/// Active spatial dof indices of element e (all active when e is active).
inline void active_dofs(const SlabSpace& space, int e, std::vector<int>& out) {
  const auto dofs = space.dof_table().element_dofs(e);
  out.resize(dofs.size());
  for (std::size_t i = 0; i < dofs.size(); ++i) out[i] = space.active_index(dofs[i]);
}

/// Sparse matrix over slab unknowns with a fixed pattern: spatial couplings
/// through active elements (and optionally ghost-facet patches), tensored
/// with the dense temporal block.
class SlabMatrixBuilder {
 public:
  SlabMatrixBuilder(const SlabSpace& space, std::span<const int> ghost_facets);

  /// Adds a dense element matrix ordered (spatial i major, mode a minor).
  void add_local(std::span<const int> dofs, const Eigen::MatrixXd& local, double scale = 1.0);
  /// Adds scale * (temporal(a,b) * spatial(i,j)).
  void add_kron(std::span<const int> dofs, const Eigen::MatrixXd& spatial,
                const Eigen::MatrixXd& temporal, double scale);

  SparseMatrix finish() const;

 private:
  int position(int r, int c) const;

  int nt_;
  int n_rows_;
  std::vector<int> row_ptr_;
  std::vector<int> cols_;
  std::vector<double> values_;
};

/// Spatial-block accumulators for one time point; rows are test functions.
/// vv: psi_a psi_b, vd: psi_a psi'_b, dv: psi'_a psi_b, dd: psi'_a psi'_b.
struct TimeBlocks {
  Eigen::MatrixXd vv, vd, dv, dd;
  bool use_vv = false, use_vd = false, use_dv = false, use_dd = false;

  void reset(int n) {
    vv.setZero(n, n);
    vd.setZero(n, n);
    dv.setZero(n, n);
    dd.setZero(n, n);
  }
};

/// Basis data at one spatial quadrature point.
struct PointBasis {
  Vec2 x;
  Vec2 xi;
  double t;
  double weight;
  std::span<const double> phi;
  std::span<const Vec2> grad;  ///< physical gradients
};

/// Evaluates spatial basis values and physical gradients at rule points.
class SpatialTabulator {
 public:
  explicit SpatialTabulator(const LagrangeTriangle& element) : element_(element) {}

  void tabulate(const AffineMap& map, const CutRule& rule) {
    const int ns = element_.size();
    const std::size_t n = rule.size();
    values_.resize(n * ns);
    grads_.resize(n * ns);
    ref_grads_.resize(ns);
    for (std::size_t q = 0; q < n; ++q) {
      element_.eval(rule.ref_points[q], std::span(values_.data() + q * ns, ns), ref_grads_);
      for (int i = 0; i < ns; ++i) grads_[q * ns + i] = map.push_gradient(ref_grads_[i]);
    }
  }
  std::span<const double> phi(std::size_t q) const {
    const int ns = element_.size();
    return {values_.data() + q * ns, static_cast<std::size_t>(ns)};
  }
  std::span<const Vec2> grad(std::size_t q) const {
    const int ns = element_.size();
    return {grads_.data() + q * ns, static_cast<std::size_t>(ns)};
  }

 private:
  const LagrangeTriangle& element_;
  std::vector<double> values_;
  std::vector<Vec2> grads_;
  std::vector<Vec2> ref_grads_;
};

/// Adds sum over time points of w_t * (psi (x) psi)^T-weighted blocks into `local`.
inline void combine_blocks(const TimeBlocks& b, std::span<const double> psi,
                           std::span<const double> dpsi, double wt, Eigen::MatrixXd& local) {
  const int ns = static_cast<int>(b.vv.rows());
  const int nt = static_cast<int>(psi.size());
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < ns; ++j) {
      const double vv = b.use_vv ? b.vv(i, j) : 0.0;
      const double vd = b.use_vd ? b.vd(i, j) : 0.0;
      const double dv = b.use_dv ? b.dv(i, j) : 0.0;
      const double dd = b.use_dd ? b.dd(i, j) : 0.0;
      for (int a = 0; a < nt; ++a) {
        for (int c = 0; c < nt; ++c) {
          local(i * nt + a, j * nt + c) +=
              wt * (psi[a] * psi[c] * vv + psi[a] * dpsi[c] * vd + dpsi[a] * psi[c] * dv +
                    dpsi[a] * dpsi[c] * dd);
        }
      }
    }
  }
}

/// Volume integration over Q^{h,n} (cut) or E(Q^{h,n}) (full) for every
/// active element. `kernel(const PointBasis&, TimeBlocks&)` accumulates the
/// spatial blocks at one time point; the flags in `blocks_template` select
/// which temporal combinations are used.
template <class Kernel>
void assemble_volume(const SlabSpace& space, const SlabLevelSet& ls, VolumeRegion region,
                     const QuadratureConfig& quad, TimeBlocks blocks, SlabMatrixBuilder& out,
                     Kernel&& kernel) {
  const Mesh& mesh = space.mesh();
  const int ns = space.spatial_element().size();
  const int nt = space.time_size();
  const Rule1D& gt = gauss_legendre(quad.time_points);
  const double len = space.dt();
  SpatialTabulator tab(space.spatial_element());
  std::vector<double> psi(nt), dpsi(nt);
  std::vector<int> dofs;
  Eigen::MatrixXd local(ns * nt, ns * nt);

  for (int e : space.active_elements()) {
    const AffineMap map = mesh.element_map(e);
    local.setZero();
    bool any = false;
    TimeRule tr;
    if (region == VolumeRegion::cut) {
      tr = element_time_rule(ls, e, quad.time_points);
    } else {
      for (std::size_t q = 0; q < gt.points.size(); ++q) {
        tr.times.push_back(space.t_begin() + gt.points[q] * len);
        tr.weights.push_back(gt.weights[q] * len);
      }
    }
    for (std::size_t q = 0; q < tr.times.size(); ++q) {
      const double t = tr.times[q];
      const CutRule rule = region == VolumeRegion::cut
                               ? spatial_cut_rule(mesh, e, ls, t, quad.spatial_order)
                               : full_element_rule(mesh, e, quad.spatial_order);
      if (rule.empty()) continue;
      any = true;
      tab.tabulate(map, rule);
      blocks.reset(ns);
      for (std::size_t p = 0; p < rule.size(); ++p)
        kernel(PointBasis{rule.points[p], rule.ref_points[p], t, rule.weights[p], tab.phi(p),
                          tab.grad(p)},
               blocks);
      space.eval_time(t, psi, dpsi);
      combine_blocks(blocks, psi, dpsi, tr.weights[q], local);
    }
    if (!any) continue;
    active_dofs(space, e, dofs);
    out.add_local(dofs, local);
  }
}

}  // namespace stcut::detail
