#pragma once

#include <array>
#include <vector>

#include "stcut/levelset.hpp"
#include "stcut/mesh.hpp"

namespace stcut {

using Bary = std::array<double, 3>;
using BaryTriangle = std::array<Bary, 3>;

/// Straight-cut decomposition of one triangle, in barycentric coordinates of
/// that triangle.
struct CutDecomposition {
  std::vector<BaryTriangle> neg;
  std::vector<BaryTriangle> pos;
  std::vector<std::array<Bary, 2>> interface;  ///< zero-level segments
};

/// Splits a triangle by the zero level of the P1 interpolant of `values`.
/// A vertex value of exactly zero counts as negative; sub-triangles with
/// area below 1e-14 of the element are dropped.
CutDecomposition decompose_cut_triangle(const std::array<double, 3>& values);

enum class RegionTag { neg, full };

/// Quadrature on (part of) one element. `times` is empty for fixed-time rules.
struct CutRule {
  RegionTag region = RegionTag::neg;
  std::vector<Vec2> ref_points;
  std::vector<Vec2> points;
  std::vector<double> times;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  bool empty() const { return weights.empty(); }
  double total_weight() const;
};

/// Standard rule on the whole element, exact for degree `order`.
CutRule full_element_rule(const Mesh& mesh, int e, int order);

/// Rule on {phi^lin(., t) < 0} within element e, exact for degree `order`.
CutRule spatial_cut_rule(const Mesh& mesh, int e, const SlabLevelSet& ls, double t, int order);

/// Composite Gauss-Legendre rule in time for element e: `n_points` on every
/// piece of the slab between the sign-change times of its vertex values.
/// The cut region varies smoothly in time on each piece.
struct TimeRule {
  std::vector<double> times;
  std::vector<double> weights;
};
TimeRule element_time_rule(const SlabLevelSet& ls, int e, int n_points);

/// Tensor rule on the space-time cut region of element e over the slab of
/// `ls`: element_time_rule in time, spatial_cut_rule at each time point.
CutRule spacetime_rule(const Mesh& mesh, int e, const SlabLevelSet& ls, int spatial_order,
                       int n_time_points);

/// Spatial cut rule at a slab endpoint, used for jump and initial terms.
CutRule fixed_time_interface_rule(const Mesh& mesh, int e, const SlabLevelSet& ls, double t_n,
                                  int order);

/// Zero-level segments of element e at time t, one midpoint per segment.
/// Diagnostic-quality boundary measure (midpoint rule).
struct InterfaceMidpoints {
  std::vector<Vec2> ref_points;
  std::vector<Vec2> points;
  std::vector<double> lengths;
};
InterfaceMidpoints interface_midpoints(const Mesh& mesh, int e, const SlabLevelSet& ls, double t);

}  // namespace stcut
