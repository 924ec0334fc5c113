#include "stcut/levelset.hpp"

#include <algorithm>
#include <cmath>

#include "stcut/quadrature.hpp"

namespace stcut {

TimePartition::TimePartition(double t0, double t_end, int num_slabs)
    : t0_(t0), t_end_(t_end), n_(num_slabs) {
  if (num_slabs < 1) throw GeometryError("time partition needs at least one slab");
  if (!(t_end > t0)) throw GeometryError("time partition needs t_end > t0");
}

double TimePartition::node(int n) const {
  if (n <= 0) return t0_;
  if (n >= n_) return t_end_;
  return t0_ + (t_end_ - t0_) * n / n_;
}

SlabLevelSet::SlabLevelSet(const Mesh& mesh, int slab, double t_begin, double t_end, int q_t,
                           std::vector<std::vector<double>> nodal_values)
    : mesh_(&mesh),
      slab_(slab),
      t_begin_(t_begin),
      t_end_(t_end),
      q_t_(q_t),
      time_basis_(q_t < 1 ? 1 : q_t),
      values_(std::move(nodal_values)) {
  if (q_t < 1 || q_t > 7) throw GeometryError("unsupported temporal order");
  if (static_cast<int>(values_.size()) != q_t + 1)
    throw GeometryError("level set needs q_t+1 temporal node vectors");
  for (const auto& v : values_)
    if (static_cast<int>(v.size()) != mesh.num_vertices())
      throw GeometryError("level set node vector has wrong length");
}

void SlabLevelSet::temporal_weights(double t, std::span<double> w, std::span<double> dw) const {
  if (t < t_begin_ || t > t_end_) throw GeometryError("time outside slab");
  const double len = t_end_ - t_begin_;
  const double s = (t == t_end_) ? 1.0 : (t - t_begin_) / len;
  time_basis_.eval(s, w, dw);
  for (auto& d : dw) d /= len;
}

SlabLevelSet::Value SlabLevelSet::eval(int e, const Vec2& xi, double t) const {
  std::array<double, 8> w{};
  std::array<double, 8> dw{};
  temporal_weights(t, std::span(w).first(q_t_ + 1), std::span(dw).first(q_t_ + 1));
  const auto& el = mesh_->elements()[e];
  const double lam[3] = {1.0 - xi.x() - xi.y(), xi.x(), xi.y()};
  Value out{0.0, 0.0};
  for (int j = 0; j <= q_t_; ++j) {
    double p1 = 0.0;
    for (int i = 0; i < 3; ++i) p1 += lam[i] * values_[j][el[i]];
    out.value += w[j] * p1;
    out.dt += dw[j] * p1;
  }
  return out;
}

std::array<double, 3> SlabLevelSet::element_values(int e, double t) const {
  const auto& el = mesh_->elements()[e];
  std::array<double, 3> v{};
  if (t == t_begin_ || t == t_end_) {
    const auto& node_values = (t == t_begin_) ? values_.front() : values_.back();
    for (int i = 0; i < 3; ++i) v[i] = node_values[el[i]];
  } else {
    std::array<double, 8> w{};
    std::array<double, 8> dw{};
    temporal_weights(t, std::span(w).first(q_t_ + 1), std::span(dw).first(q_t_ + 1));
    for (int i = 0; i < 3; ++i) {
      double s = 0.0;
      for (int j = 0; j <= q_t_; ++j) s += w[j] * values_[j][el[i]];
      v[i] = s;
    }
  }
  const double scale = std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
  for (auto& x : v)
    if (std::abs(x) < 1e-14 * scale) x = 0.0;
  return v;
}

double SlabLevelSet::vertex_value(int v, double t) const {
  std::array<double, 8> w{};
  std::array<double, 8> dw{};
  temporal_weights(t, std::span(w).first(q_t_ + 1), std::span(dw).first(q_t_ + 1));
  double s = 0.0;
  for (int j = 0; j <= q_t_; ++j) s += w[j] * values_[j][v];
  return s;
}

std::vector<double> SlabLevelSet::sign_change_times(int e) const {
  const double len = t_end_ - t_begin_;
  std::vector<double> out;
  for (int v : mesh_->elements()[e]) {
    if (q_t_ == 1) {
      const double a = values_[0][v];
      const double b = values_[1][v];
      if ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)) out.push_back(t_begin_ + a / (a - b) * len);
      continue;
    }
    // sample the temporal polynomial and bisect every bracketed root
    const int pieces = 16 * q_t_;
    double ta = t_begin_;
    double fa = values_.front()[v];
    for (int k = 1; k <= pieces; ++k) {
      const double tb = (k == pieces) ? t_end_ : t_begin_ + len * k / pieces;
      const double fb = (k == pieces) ? values_.back()[v] : vertex_value(v, tb);
      if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
        double lo = ta, hi = tb, flo = fa;
        for (int it = 0; it < 100 && hi - lo > 1e-15 * len; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = vertex_value(v, mid);
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        out.push_back(0.5 * (lo + hi));
      }
      ta = tb;
      fa = fb;
    }
  }
  std::erase_if(out, [&](double t) { return !(t > t_begin_ && t < t_end_); });
  std::sort(out.begin(), out.end());
  return out;
}

SlabLevelSet sample_levelset(const SpaceTimeScalar& phi, const Mesh& mesh,
                             const TimePartition& partition, int n, int q_t) {
  if (q_t < 1) throw GeometryError("unsupported temporal order");
  if (n < 1 || n > partition.num_slabs()) throw GeometryError("slab index out of range");
  const auto [tb, te] = partition.slab(n);
  std::vector<std::vector<double>> values(q_t + 1, std::vector<double>(mesh.num_vertices()));
  for (int j = 0; j <= q_t; ++j) {
    const double t = (j == 0) ? tb : (j == q_t) ? te : tb + (te - tb) * j / q_t;
    for (int v = 0; v < mesh.num_vertices(); ++v) values[j][v] = phi(mesh.vertices()[v], t);
  }
  return SlabLevelSet(mesh, n, tb, te, q_t, std::move(values));
}

Mark mark_from_values(const std::array<double, 3>& values) {
  int negative = 0;
  for (double v : values)
    if (v <= 0.0) ++negative;
  if (negative == 3) return Mark::neg;
  if (negative == 0) return Mark::pos;
  return Mark::cut;
}

int SlabGeometry::num_cut() const {
  return static_cast<int>(std::count(marks.begin(), marks.end(), Mark::cut));
}

SlabGeometry classify_slab(const SlabLevelSet& ls, std::span<const double> sample_times) {
  if (sample_times.empty()) throw GeometryError("classify_slab needs sample times");
  const Mesh& mesh = ls.mesh();
  SlabGeometry geo;
  geo.slab = ls.slab();
  geo.sample_times.assign(sample_times.begin(), sample_times.end());
  geo.marks.resize(mesh.num_elements());
  geo.active.assign(mesh.num_elements(), 0);

  for (int e = 0; e < mesh.num_elements(); ++e) {
    Mark agg = mark_from_values(ls.element_values(e, sample_times[0]));
    auto merge = [&](double t) {
      const Mark m = mark_from_values(ls.element_values(e, t));
      if (m != agg) agg = Mark::cut;
    };
    for (std::size_t k = 1; k < sample_times.size() && agg != Mark::cut; ++k) merge(sample_times[k]);
    if (agg != Mark::cut) {
      auto breaks = ls.sign_change_times(e);
      if (!breaks.empty()) {
        breaks.insert(breaks.begin(), ls.t_begin());
        breaks.push_back(ls.t_end());
        for (std::size_t k = 0; k + 1 < breaks.size() && agg != Mark::cut; ++k)
          merge(0.5 * (breaks[k] + breaks[k + 1]));
      }
    }
    geo.marks[e] = agg;
    if (agg != Mark::pos) {
      geo.active[e] = 1;
      geo.active_elements.push_back(e);
    }
  }
  for (int f : mesh.interior_facets()) {
    const auto& el = mesh.facets()[f].elements;
    if (geo.active[el[0]] && geo.active[el[1]]) geo.ghost_facets.push_back(f);
  }
  return geo;
}

std::vector<double> classification_times(double t_begin, double t_end,
                                         std::span<const int> gauss_point_counts) {
  std::vector<double> times{t_begin, t_end};
  for (int n : gauss_point_counts) {
    const Rule1D& rule = gauss_legendre(n);
    for (double s : rule.points) times.push_back(t_begin + s * (t_end - t_begin));
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

}  // namespace stcut
