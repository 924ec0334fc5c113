#include "stcut/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <Eigen/LU>

namespace stcut {

AffineMap::AffineMap(const Vec2& v0, const Vec2& v1, const Vec2& v2) : origin_(v0) {
  jacobian_.col(0) = v1 - v0;
  jacobian_.col(1) = v2 - v0;
  det_ = jacobian_.determinant();
  if (det_ == 0.0) throw MeshError("degenerate element: zero Jacobian determinant");
  inverse_ = jacobian_.inverse();
}

AffineMap Mesh::element_map(int e) const {
  const auto& el = elements_.at(e);
  return AffineMap(vertices_[el[0]], vertices_[el[1]], vertices_[el[2]]);
}

double Mesh::element_area(int e) const {
  const auto& el = elements_[e];
  const Vec2 a = vertices_[el[1]] - vertices_[el[0]];
  const Vec2 b = vertices_[el[2]] - vertices_[el[0]];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

double Mesh::element_diameter(int e) const {
  const auto& el = elements_[e];
  double d = 0.0;
  for (int i = 0; i < 3; ++i)
    d = std::max(d, (vertices_[el[i]] - vertices_[el[(i + 1) % 3]]).norm());
  return d;
}

std::pair<int, int> Mesh::facet_patch(int f) const {
  if (f < 0 || f >= num_facets()) throw MeshError("facet id out of range");
  const auto& facet = facets_[f];
  if (!facet.is_interior()) throw MeshError("facet_patch: boundary facet has no patch");
  return {std::min(facet.elements[0], facet.elements[1]),
          std::max(facet.elements[0], facet.elements[1])};
}

void Mesh::finalize() {
  std::map<std::pair<int, int>, int> edge_ids;
  element_facets_.assign(elements_.size(), {-1, -1, -1});
  facets_.clear();
  for (int e = 0; e < num_elements(); ++e) {
    const auto& el = elements_[e];
    for (int i = 0; i < 3; ++i) {
      const int a = el[(i + 1) % 3];
      const int b = el[(i + 2) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = edge_ids.try_emplace({key.first, key.second}, num_facets());
      if (inserted) {
        facets_.push_back(Facet{{key.first, key.second}, {e, -1}});
      } else {
        auto& facet = facets_[it->second];
        if (facet.elements[1] >= 0) throw MeshError("non-manifold edge");
        facet.elements[1] = e;
      }
      element_facets_[e][i] = it->second;
    }
  }
  interior_facets_.clear();
  for (int f = 0; f < num_facets(); ++f)
    if (facets_[f].is_interior()) interior_facets_.push_back(f);

  h_max_ = 0.0;
  for (int e = 0; e < num_elements(); ++e) h_max_ = std::max(h_max_, element_diameter(e));
}

Mesh build_structured_mesh(const Box& box, double target_h, SplitKind split) {
  const Vec2 extent = box.upper - box.lower;
  if (!(extent.x() > 0.0) || !(extent.y() > 0.0)) throw MeshError("empty domain");
  if (!(target_h > 0.0)) throw MeshError("target_h must be positive");

  Mesh mesh;
  mesh.box_ = box;
  mesh.split_ = split;
  // guard against ceil(1.0000000001) style round-up from inexact division
  auto cells = [&](double len) {
    return std::max(1, static_cast<int>(std::ceil(len / target_h - 1e-10)));
  };
  mesh.nx_ = cells(extent.x());
  mesh.ny_ = cells(extent.y());
  const int nx = mesh.nx_;
  const int ny = mesh.ny_;

  auto grid_vertex = [nx](int i, int j) { return j * (nx + 1) + i; };
  mesh.vertices_.reserve((nx + 1) * (ny + 1) + (split == SplitKind::criss_cross ? nx * ny : 0));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const double x = (i == nx) ? box.upper.x() : box.lower.x() + extent.x() * i / nx;
      const double y = (j == ny) ? box.upper.y() : box.lower.y() + extent.y() * j / ny;
      mesh.vertices_.emplace_back(x, y);
    }
  }

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = grid_vertex(i, j);
      const int v10 = grid_vertex(i + 1, j);
      const int v01 = grid_vertex(i, j + 1);
      const int v11 = grid_vertex(i + 1, j + 1);
      if (split == SplitKind::diagonal) {
        mesh.elements_.push_back({v00, v10, v11});
        mesh.elements_.push_back({v00, v11, v01});
      } else {
        const int c = mesh.num_vertices();
        mesh.vertices_.push_back(0.25 * (mesh.vertices_[v00] + mesh.vertices_[v10] +
                                         mesh.vertices_[v01] + mesh.vertices_[v11]));
        mesh.elements_.push_back({v00, v10, c});
        mesh.elements_.push_back({v10, v11, c});
        mesh.elements_.push_back({v11, v01, c});
        mesh.elements_.push_back({v01, v00, c});
      }
    }
  }
  mesh.finalize();
  return mesh;
}

std::optional<int> Mesh::locate(const Vec2& x) const {
  constexpr double tol = 1e-12;
  const Vec2 extent = box_.upper - box_.lower;
  const Vec2 rel = x - box_.lower;
  if (rel.x() < -tol * extent.x() || rel.y() < -tol * extent.y() ||
      rel.x() > (1 + tol) * extent.x() || rel.y() > (1 + tol) * extent.y())
    return std::nullopt;

  const int i = std::clamp(static_cast<int>(std::floor(rel.x() / extent.x() * nx_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(rel.y() / extent.y() * ny_)), 0, ny_ - 1);
  const int per_cell = (split_ == SplitKind::diagonal) ? 2 : 4;
  const int first = (j * nx_ + i) * per_cell;

  int best = first;
  double best_min_bary = -1e300;
  for (int e = first; e < first + per_cell; ++e) {
    const Vec2 xi = element_map(e).to_reference(x);
    const double m = std::min({1.0 - xi.x() - xi.y(), xi.x(), xi.y()});
    if (m > best_min_bary) {
      best_min_bary = m;
      best = e;
    }
  }
  return best;
}

void Mesh::write_off(std::ostream& out) const {
  out << "OFF\n" << num_vertices() << ' ' << num_elements() << " 0\n";
  out.precision(17);
  for (const auto& v : vertices_) out << v.x() << ' ' << v.y() << " 0\n";
  for (const auto& el : elements_) out << "3 " << el[0] << ' ' << el[1] << ' ' << el[2] << '\n';
}

}  // namespace stcut
