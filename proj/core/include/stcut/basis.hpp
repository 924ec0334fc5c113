#pragma once

#include <array>
#include <span>
#include <vector>

#include "stcut/mesh.hpp"

namespace stcut {

/// Lagrange polynomials of degree `order` on [0,1] with uniform nodes
/// j/order, j = 0..order. Both endpoints are nodes.
class LagrangeInterval {
 public:
  explicit LagrangeInterval(int order);

  int order() const { return order_; }
  int size() const { return order_ + 1; }
  double node(int j) const { return nodes_[j]; }

  /// Values (and optionally derivatives d/ds) of all basis polynomials at s.
  void eval(double s, std::span<double> values) const;
  void eval(double s, std::span<double> values, std::span<double> derivatives) const;

 private:
  int order_;
  std::vector<double> nodes_;
};

/// Lagrange P^k on the reference triangle with uniform nodes, written in
/// product form over barycentric coordinates. Local node order: the three
/// vertices, then edge nodes (edge i is opposite vertex i), then interior.
class LagrangeTriangle {
 public:
  explicit LagrangeTriangle(int order);

  int order() const { return order_; }
  int size() const { return static_cast<int>(indices_.size()); }
  /// Barycentric multi-index (a0,a1,a2), a0+a1+a2 = order, of node i.
  const std::array<int, 3>& multi_index(int i) const { return indices_[i]; }
  Vec2 node(int i) const;

  void eval(const Vec2& xi, std::span<double> values) const;
  /// Reference gradients d/dxi.
  void eval(const Vec2& xi, std::span<double> values, std::span<Vec2> gradients) const;

 private:
  int order_;
  std::vector<std::array<int, 3>> indices_;
};

}  // namespace stcut
