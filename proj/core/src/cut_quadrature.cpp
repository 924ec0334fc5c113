#include "stcut/cut_quadrature.hpp"

#include <cmath>
#include <numeric>

#include "stcut/quadrature.hpp"

namespace stcut {

namespace {

constexpr double kDropTolerance = 1e-14;

Bary vertex(int i) {
  Bary b{0.0, 0.0, 0.0};
  b[i] = 1.0;
  return b;
}

Bary edge_point(int a, int b, double theta) {
  Bary p{0.0, 0.0, 0.0};
  p[a] = 1.0 - theta;
  p[b] = theta;
  return p;
}

// Twice the reference-triangle area of a barycentric sub-triangle, i.e. its
// area relative to the parent element.
double relative_area(const BaryTriangle& t) {
  const double x1 = t[1][1] - t[0][1];
  const double y1 = t[1][2] - t[0][2];
  const double x2 = t[2][1] - t[0][1];
  const double y2 = t[2][2] - t[0][2];
  return std::abs(x1 * y2 - x2 * y1);
}

void push_if_nondegenerate(std::vector<BaryTriangle>& out, const BaryTriangle& t) {
  if (relative_area(t) >= kDropTolerance) out.push_back(t);
}

void append_subtriangle(CutRule& rule, const AffineMap& map, const BaryTriangle& sub,
                        const TriangleRule& ref, double time, bool with_time) {
  const double scale = relative_area(sub) * std::abs(map.determinant());
  for (std::size_t q = 0; q < ref.weights.size(); ++q) {
    const Vec2& r = ref.points[q];
    const double mu[3] = {1.0 - r.x() - r.y(), r.x(), r.y()};
    Vec2 xi(0.0, 0.0);
    for (int k = 0; k < 3; ++k) xi += mu[k] * Vec2(sub[k][1], sub[k][2]);
    rule.ref_points.push_back(xi);
    rule.points.push_back(map.to_physical(xi));
    if (with_time) rule.times.push_back(time);
    rule.weights.push_back(ref.weights[q] * scale);
  }
}

void append_spatial(CutRule& rule, const Mesh& mesh, int e, const std::array<double, 3>& values,
                    int order, double time, bool with_time) {
  const AffineMap map = mesh.element_map(e);
  const TriangleRule& ref = triangle_rule(order);
  const Mark mark = mark_from_values(values);
  if (mark == Mark::pos) return;
  if (mark == Mark::neg) {
    const double det = std::abs(map.determinant());
    for (std::size_t q = 0; q < ref.weights.size(); ++q) {
      rule.ref_points.push_back(ref.points[q]);
      rule.points.push_back(map.to_physical(ref.points[q]));
      if (with_time) rule.times.push_back(time);
      rule.weights.push_back(ref.weights[q] * det);
    }
    return;
  }
  const CutDecomposition dec = decompose_cut_triangle(values);
  for (const auto& sub : dec.neg) append_subtriangle(rule, map, sub, ref, time, with_time);
}

}  // namespace

double CutRule::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

CutDecomposition decompose_cut_triangle(const std::array<double, 3>& values) {
  CutDecomposition dec;
  bool neg[3];
  int count = 0;
  for (int i = 0; i < 3; ++i) {
    neg[i] = values[i] <= 0.0;
    count += neg[i] ? 1 : 0;
  }
  const BaryTriangle whole{vertex(0), vertex(1), vertex(2)};
  if (count == 3) {
    dec.neg.push_back(whole);
    return dec;
  }
  if (count == 0) {
    dec.pos.push_back(whole);
    return dec;
  }
  // the vertex alone on its side
  int a = 0;
  for (int i = 0; i < 3; ++i)
    if ((count == 1) == neg[i]) a = i;
  const int b = (a + 1) % 3;
  const int c = (a + 2) % 3;
  const Bary pab = edge_point(a, b, values[a] / (values[a] - values[b]));
  const Bary pac = edge_point(a, c, values[a] / (values[a] - values[c]));

  auto& lone = neg[a] ? dec.neg : dec.pos;
  auto& rest = neg[a] ? dec.pos : dec.neg;
  push_if_nondegenerate(lone, {vertex(a), pab, pac});
  push_if_nondegenerate(rest, {pab, vertex(b), vertex(c)});
  push_if_nondegenerate(rest, {pab, vertex(c), pac});
  dec.interface.push_back({pab, pac});
  return dec;
}

CutRule full_element_rule(const Mesh& mesh, int e, int order) {
  CutRule rule;
  rule.region = RegionTag::full;
  append_spatial(rule, mesh, e, {-1.0, -1.0, -1.0}, order, 0.0, false);
  return rule;
}

CutRule spatial_cut_rule(const Mesh& mesh, int e, const SlabLevelSet& ls, double t, int order) {
  const auto values = ls.element_values(e, t);
  CutRule rule;
  rule.region = mark_from_values(values) == Mark::neg ? RegionTag::full : RegionTag::neg;
  append_spatial(rule, mesh, e, values, order, t, false);
  return rule;
}

TimeRule element_time_rule(const SlabLevelSet& ls, int e, int n_points) {
  if (n_points < 1) throw GeometryError("time rule needs at least one point");
  const Rule1D& gt = gauss_legendre(n_points);
  const double len = ls.t_end() - ls.t_begin();
  std::vector<double> breaks = ls.sign_change_times(e);
  breaks.insert(breaks.begin(), ls.t_begin());
  breaks.push_back(ls.t_end());
  TimeRule rule;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double piece = breaks[k + 1] - a;
    if (piece <= 1e-14 * len) continue;
    for (std::size_t q = 0; q < gt.points.size(); ++q) {
      rule.times.push_back(a + gt.points[q] * piece);
      rule.weights.push_back(gt.weights[q] * piece);
    }
  }
  return rule;
}

CutRule spacetime_rule(const Mesh& mesh, int e, const SlabLevelSet& ls, int spatial_order,
                       int n_time_points) {
  const TimeRule tr = element_time_rule(ls, e, n_time_points);
  CutRule rule;
  rule.region = RegionTag::full;
  for (std::size_t q = 0; q < tr.times.size(); ++q) {
    const double t = tr.times[q];
    const auto values = ls.element_values(e, t);
    if (mark_from_values(values) != Mark::neg) rule.region = RegionTag::neg;
    const std::size_t start = rule.weights.size();
    append_spatial(rule, mesh, e, values, spatial_order, t, true);
    for (std::size_t k = start; k < rule.weights.size(); ++k) rule.weights[k] *= tr.weights[q];
  }
  return rule;
}

CutRule fixed_time_interface_rule(const Mesh& mesh, int e, const SlabLevelSet& ls, double t_n,
                                  int order) {
  if (t_n != ls.t_begin() && t_n != ls.t_end())
    throw GeometryError("fixed_time_interface_rule: time is not a slab endpoint");
  return spatial_cut_rule(mesh, e, ls, t_n, order);
}

InterfaceMidpoints interface_midpoints(const Mesh& mesh, int e, const SlabLevelSet& ls, double t) {
  InterfaceMidpoints out;
  const auto values = ls.element_values(e, t);
  if (mark_from_values(values) != Mark::cut) return out;
  const AffineMap map = mesh.element_map(e);
  for (const auto& seg : decompose_cut_triangle(values).interface) {
    const Vec2 a(seg[0][1], seg[0][2]);
    const Vec2 b(seg[1][1], seg[1][2]);
    const double len = (map.to_physical(a) - map.to_physical(b)).norm();
    if (len <= 0.0) continue;
    const Vec2 mid = 0.5 * (a + b);
    out.ref_points.push_back(mid);
    out.points.push_back(map.to_physical(mid));
    out.lengths.push_back(len);
  }
  return out;
}

}  // namespace stcut
