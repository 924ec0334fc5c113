#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "stcut/basis.hpp"
#include "stcut/levelset.hpp"
#include "stcut/mesh.hpp"

namespace stcut {

class SpaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Global continuous P^k Lagrange numbering on the whole background mesh.
class SpatialDofTable {
 public:
  SpatialDofTable(const Mesh& mesh, int order);

  const Mesh& mesh() const { return *mesh_; }
  int order() const { return element_.order(); }
  const LagrangeTriangle& element() const { return element_; }
  int local_size() const { return element_.size(); }
  int num_dofs() const { return static_cast<int>(points_.size()); }

  std::span<const int> element_dofs(int e) const {
    return {dofs_.data() + static_cast<std::size_t>(e) * local_size(),
            static_cast<std::size_t>(local_size())};
  }
  const Vec2& dof_point(int g) const { return points_[g]; }

 private:
  const Mesh* mesh_;
  LagrangeTriangle element_;
  std::vector<int> dofs_;
  std::vector<Vec2> points_;
};

/// CG(k_s) x DG-in-time P^{k_t} space of one slab, restricted to the active
/// elements. Unknown index = active_spatial_dof * (k_t+1) + temporal_mode.
class SlabSpace {
 public:
  SlabSpace(std::shared_ptr<const SpatialDofTable> dofs, const SlabGeometry& geometry, int k_t,
            double t_begin, double t_end);

  const Mesh& mesh() const { return dofs_->mesh(); }
  const SpatialDofTable& dof_table() const { return *dofs_; }
  std::shared_ptr<const SpatialDofTable> dof_table_ptr() const { return dofs_; }
  const LagrangeTriangle& spatial_element() const { return dofs_->element(); }
  const LagrangeInterval& temporal_element() const { return time_; }

  int slab() const { return slab_; }
  int k_s() const { return dofs_->order(); }
  int k_t() const { return time_.order(); }
  int time_size() const { return time_.size(); }
  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  double dt() const { return t_end_ - t_begin_; }
  /// Temporal Lagrange node a as a physical time; endpoints are exact.
  double time_node(int a) const;

  int num_active_dofs() const { return static_cast<int>(active_to_global_.size()); }
  int num_unknowns() const { return num_active_dofs() * time_size(); }
  int active_index(int global_dof) const { return global_to_active_[global_dof]; }
  int global_dof(int active) const { return active_to_global_[active]; }
  int unknown(int active_dof, int mode) const { return active_dof * time_size() + mode; }

  bool element_active(int e) const { return element_active_[e] != 0; }
  const std::vector<int>& active_elements() const { return active_elements_; }

  /// Unknown ids of element e, ordered (local spatial node major, mode minor).
  void element_unknowns(int e, std::vector<int>& out) const;

  /// Temporal basis values and physical time derivatives at t in the slab.
  void eval_time(double t, std::span<double> values, std::span<double> derivatives) const;

 private:
  std::shared_ptr<const SpatialDofTable> dofs_;
  LagrangeInterval time_;
  int slab_;
  double t_begin_;
  double t_end_;
  std::vector<std::uint8_t> element_active_;
  std::vector<int> active_elements_;
  std::vector<int> global_to_active_;
  std::vector<int> active_to_global_;
};

std::shared_ptr<const SlabSpace> build_slab_space(std::shared_ptr<const SpatialDofTable> dofs,
                                                  const SlabGeometry& geometry, int k_t,
                                                  const TimePartition& partition, int n);

enum class BasisDerivative { value, grad_x, dt, grad_x_dt };

/// Space-time basis functions supported on element e at (xi, t).
struct LocalBasis {
  std::vector<int> unknowns;
  std::vector<double> values;    ///< value or dt
  std::vector<Vec2> gradients;   ///< grad_x or grad_x of dt
};
LocalBasis eval_basis(const SlabSpace& space, int e, const Vec2& xi, double t,
                      BasisDerivative derivative);

struct PointValue {
  double value = 0.0;
  Vec2 grad = Vec2::Zero();
  double dt = 0.0;
};

/// Coefficients over the unknowns of one slab space.
struct SlabField {
  std::shared_ptr<const SlabSpace> space;
  Eigen::VectorXd coeffs;

  PointValue evaluate(int e, const Vec2& xi, double t) const;
  double value(int e, const Vec2& xi, double t) const { return evaluate(e, xi, t).value; }
};

/// Nodal interpolation at (spatial Lagrange node, temporal node) pairs.
Eigen::VectorXd interpolate(const SlabSpace& space, const SpaceTimeScalar& f);

/// Discrete solution over all slabs, with the per-slab geometry it lives on.
struct SolutionField {
  enum class Side { left, right };

  TimePartition partition{0.0, 1.0, 1};
  std::vector<SlabLevelSet> levelsets;   ///< index n-1 for slab n
  std::vector<SlabGeometry> geometries;
  std::vector<SlabField> slabs;

  int num_slabs() const { return static_cast<int>(slabs.size()); }
  const SlabField& slab(int n) const { return slabs.at(n - 1); }
  /// Slab containing t; at an interior node t_n `left` picks slab n, `right` slab n+1.
  int slab_index(double t, Side side) const;
  /// Evaluates at a physical point; nullopt when the element is inactive.
  std::optional<PointValue> evaluate(const Vec2& x, double t, Side side = Side::left) const;
};

}  // namespace stcut
