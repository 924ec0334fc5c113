#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace stcut {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Error raised for invalid geometric input (degenerate boxes, bad facet ids).
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Box {
  Vec2 lower;
  Vec2 upper;
};

/// How each grid cell of a structured mesh is split into triangles.
enum class SplitKind { diagonal, criss_cross };

/// Affine map from the reference triangle (0,0),(1,0),(0,1) onto a physical
/// triangle. The inverse is affine on all of R^2, so points outside the
/// element map to reference coordinates outside the reference simplex; this
/// is what polynomial extension onto neighbouring elements relies on.
class AffineMap {
 public:
  AffineMap(const Vec2& v0, const Vec2& v1, const Vec2& v2);

  Vec2 to_physical(const Vec2& xi) const { return origin_ + jacobian_ * xi; }
  Vec2 to_reference(const Vec2& x) const { return inverse_ * (x - origin_); }

  const Mat2& jacobian() const { return jacobian_; }
  const Mat2& inverse_jacobian() const { return inverse_; }
  double determinant() const { return det_; }
  /// Physical gradient from a reference gradient: J^{-T} g.
  Vec2 push_gradient(const Vec2& ref_grad) const { return inverse_.transpose() * ref_grad; }

 private:
  Vec2 origin_;
  Mat2 jacobian_;
  Mat2 inverse_;
  double det_;
};

/// Mesh edge. `elements[1] == -1` marks a boundary facet.
struct Facet {
  std::array<int, 2> vertices;
  std::array<int, 2> elements;
  bool is_interior() const { return elements[1] >= 0; }
};

/// Fixed simplicial background triangulation of a box.
///
/// Elements are counter-clockwise vertex triples. Element, vertex and facet
/// ids are dense and assigned in generation order, so two meshes built from
/// identical inputs are identical down to the connectivity arrays.
class Mesh {
 public:
  Mesh() = default;

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& elements() const { return elements_; }
  const std::vector<Facet>& facets() const { return facets_; }
  /// Ids (into facets()) of facets shared by two elements.
  const std::vector<int>& interior_facets() const { return interior_facets_; }
  /// Facet ids per element; entry i is the edge opposite local vertex i.
  const std::array<int, 3>& element_facets(int e) const { return element_facets_[e]; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int num_facets() const { return static_cast<int>(facets_.size()); }

  double h_max() const { return h_max_; }
  const Box& box() const { return box_; }

  AffineMap element_map(int e) const;
  double element_area(int e) const;
  double element_diameter(int e) const;

  /// The two elements sharing interior facet `f`, lower id first.
  std::pair<int, int> facet_patch(int f) const;

  /// Element containing `x` (closed), or nullopt when outside the box.
  std::optional<int> locate(const Vec2& x) const;

  /// Plain-text dump: "OFF", counts line, vertex lines, "3 a b c" element lines.
  void write_off(std::ostream& out) const;

  friend Mesh build_structured_mesh(const Box& box, double target_h, SplitKind split);

 private:
  void finalize();

  Box box_{Vec2::Zero(), Vec2::Zero()};
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<Facet> facets_;
  std::vector<int> interior_facets_;
  std::vector<std::array<int, 3>> element_facets_;
  double h_max_ = 0.0;

  // structured-grid bookkeeping for point location
  int nx_ = 0;
  int ny_ = 0;
  SplitKind split_ = SplitKind::diagonal;
};

/// Structured triangulation of `box` with h_max <= target_h.
///
/// Cells are squares-ish rectangles; `diagonal` splits each cell into two
/// triangles, `criss_cross` into four around the cell centroid.
Mesh build_structured_mesh(const Box& box, double target_h,
                           SplitKind split = SplitKind::diagonal);

}  // namespace stcut
