#include "stcut/fespace.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace stcut {

SpatialDofTable::SpatialDofTable(const Mesh& mesh, int order) : mesh_(&mesh), element_(order) {
  if (order > 8) throw SpaceError("spatial order above 8 is not supported");
  const int nloc = element_.size();
  dofs_.resize(static_cast<std::size_t>(mesh.num_elements()) * nloc);
  points_ = mesh.vertices();
  std::map<std::tuple<int, int, int>, int> edge_nodes;

  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements()[e];
    const AffineMap map = mesh.element_map(e);
    for (int i = 0; i < nloc; ++i) {
      const auto& a = element_.multi_index(i);
      const int nonzero = (a[0] > 0) + (a[1] > 0) + (a[2] > 0);
      int id = -1;
      if (nonzero == 1) {
        for (int r = 0; r < 3; ++r)
          if (a[r] > 0) id = el[r];
      } else if (nonzero == 2) {
        int p = -1;
        int q = -1;
        for (int r = 0; r < 3; ++r) {
          if (a[r] == 0) continue;
          (p < 0 ? p : q) = r;
        }
        const int gp = el[p];
        const int gq = el[q];
        const auto key = gp < gq ? std::make_tuple(gp, gq, a[p]) : std::make_tuple(gq, gp, a[q]);
        auto [it, inserted] = edge_nodes.try_emplace(key, static_cast<int>(points_.size()));
        if (inserted) points_.push_back(map.to_physical(element_.node(i)));
        id = it->second;
      } else {
        id = static_cast<int>(points_.size());
        points_.push_back(map.to_physical(element_.node(i)));
      }
      dofs_[static_cast<std::size_t>(e) * nloc + i] = id;
    }
  }
}

SlabSpace::SlabSpace(std::shared_ptr<const SpatialDofTable> dofs, const SlabGeometry& geometry,
                     int k_t, double t_begin, double t_end)
    : dofs_(std::move(dofs)), time_(k_t), slab_(geometry.slab), t_begin_(t_begin), t_end_(t_end) {
  const Mesh& m = dofs_->mesh();
  if (static_cast<int>(geometry.active.size()) != m.num_elements())
    throw SpaceError("slab geometry does not match the mesh");
  element_active_ = geometry.active;
  active_elements_ = geometry.active_elements;
  if (active_elements_.empty()) throw SpaceError("empty slab space");

  global_to_active_.assign(dofs_->num_dofs(), -1);
  std::vector<std::uint8_t> used(dofs_->num_dofs(), 0);
  for (int e : active_elements_)
    for (int g : dofs_->element_dofs(e)) used[g] = 1;
  for (int g = 0; g < dofs_->num_dofs(); ++g) {
    if (!used[g]) continue;
    global_to_active_[g] = static_cast<int>(active_to_global_.size());
    active_to_global_.push_back(g);
  }
}

double SlabSpace::time_node(int a) const {
  if (a == 0) return t_begin_;
  if (a == k_t()) return t_end_;
  return t_begin_ + time_.node(a) * (t_end_ - t_begin_);
}

void SlabSpace::element_unknowns(int e, std::vector<int>& out) const {
  const auto dofs = dofs_->element_dofs(e);
  const int nt = time_size();
  out.resize(dofs.size() * nt);
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    const int a = global_to_active_[dofs[i]];
    for (int m = 0; m < nt; ++m) out[i * nt + m] = (a < 0) ? -1 : a * nt + m;
  }
}

void SlabSpace::eval_time(double t, std::span<double> values, std::span<double> derivatives) const {
  if (t < t_begin_ || t > t_end_) throw SpaceError("time outside slab");
  const double len = t_end_ - t_begin_;
  const double s = (t == t_end_) ? 1.0 : (t - t_begin_) / len;
  time_.eval(s, values, derivatives);
  for (auto& d : derivatives) d /= len;
}

std::shared_ptr<const SlabSpace> build_slab_space(std::shared_ptr<const SpatialDofTable> dofs,
                                                  const SlabGeometry& geometry, int k_t,
                                                  const TimePartition& partition, int n) {
  if (k_t < 1 || k_t > 15) throw SpaceError("unsupported temporal order");
  const auto [tb, te] = partition.slab(n);
  return std::make_shared<const SlabSpace>(std::move(dofs), geometry, k_t, tb, te);
}

LocalBasis eval_basis(const SlabSpace& space, int e, const Vec2& xi, double t,
                      BasisDerivative derivative) {
  if (!space.element_active(e)) throw SpaceError("eval_basis on inactive element");
  const int ns = space.spatial_element().size();
  const int nt = space.time_size();
  std::vector<double> sv(ns);
  std::vector<Vec2> sg(ns);
  std::vector<double> tv(nt);
  std::vector<double> td(nt);
  space.spatial_element().eval(xi, sv, sg);
  space.eval_time(t, tv, td);
  const AffineMap map = space.mesh().element_map(e);

  LocalBasis out;
  space.element_unknowns(e, out.unknowns);
  const bool time_derivative =
      derivative == BasisDerivative::dt || derivative == BasisDerivative::grad_x_dt;
  const bool gradient =
      derivative == BasisDerivative::grad_x || derivative == BasisDerivative::grad_x_dt;
  for (int i = 0; i < ns; ++i) {
    const Vec2 g = map.push_gradient(sg[i]);
    for (int a = 0; a < nt; ++a) {
      const double tt = time_derivative ? td[a] : tv[a];
      if (gradient)
        out.gradients.push_back(g * tt);
      else
        out.values.push_back(sv[i] * tt);
    }
  }
  return out;
}

PointValue SlabField::evaluate(int e, const Vec2& xi, double t) const {
  const SlabSpace& sp = *space;
  if (!sp.element_active(e)) throw SpaceError("evaluation on inactive element");
  const int ns = sp.spatial_element().size();
  const int nt = sp.time_size();
  double sv[64];
  Vec2 sg[64];
  double tv[16];
  double td[16];
  sp.spatial_element().eval(xi, std::span(sv, ns), std::span(sg, ns));
  sp.eval_time(t, std::span(tv, nt), std::span(td, nt));
  const AffineMap map = sp.mesh().element_map(e);
  const auto dofs = sp.dof_table().element_dofs(e);
  PointValue out;
  Vec2 ref_grad = Vec2::Zero();
  for (int i = 0; i < ns; ++i) {
    const int a = sp.active_index(dofs[i]);
    double c = 0.0;
    double cd = 0.0;
    for (int m = 0; m < nt; ++m) {
      const double u = coeffs[a * nt + m];
      c += u * tv[m];
      cd += u * td[m];
    }
    out.value += c * sv[i];
    out.dt += cd * sv[i];
    ref_grad += c * sg[i];
  }
  out.grad = map.push_gradient(ref_grad);
  return out;
}

Eigen::VectorXd interpolate(const SlabSpace& space, const SpaceTimeScalar& f) {
  Eigen::VectorXd c(space.num_unknowns());
  const int nt = space.time_size();
  for (int a = 0; a < space.num_active_dofs(); ++a) {
    const Vec2& x = space.dof_table().dof_point(space.global_dof(a));
    for (int m = 0; m < nt; ++m) c[space.unknown(a, m)] = f(x, space.time_node(m));
  }
  return c;
}

int SolutionField::slab_index(double t, Side side) const {
  const int n = partition.num_slabs();
  for (int k = 1; k <= n; ++k) {
    const auto [tb, te] = partition.slab(k);
    if (t < te || k == n) return k;
    if (t == te) return side == Side::left ? k : std::min(k + 1, n);
  }
  return n;
}

std::optional<PointValue> SolutionField::evaluate(const Vec2& x, double t, Side side) const {
  const int n = slab_index(t, side);
  const SlabField& f = slab(n);
  const auto e = f.space->mesh().locate(x);
  if (!e || !f.space->element_active(*e)) return std::nullopt;
  const Vec2 xi = f.space->mesh().element_map(*e).to_reference(x);
  return f.evaluate(*e, xi, t);
}

}  // namespace stcut
