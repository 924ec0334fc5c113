#include "stcut/probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>

#include "assembly_detail.hpp"
#include "stcut/analysis.hpp"
#include "stcut/cut_quadrature.hpp"
#include "stcut/quadrature.hpp"
#include "stcut/solver.hpp"

namespace stcut {

namespace {

struct NamedProbe {
  ProbeKind kind;
  const char* name;
};
constexpr NamedProbe kProbeNames[] = {
    {ProbeKind::gp_extension, "gp_extension"},
    {ProbeKind::temporal_inverse, "temporal_inverse"},
    {ProbeKind::spatial_inverse, "spatial_inverse"},
    {ProbeKind::time_trace, "time_trace"},
    {ProbeKind::special_trace, "special_trace"},
    {ProbeKind::oswald, "oswald"},
    {ProbeKind::matderiv, "matderiv"},
    {ProbeKind::time_commutator, "time_commutator"},
};

// Random coefficient vector, either global or supported on one element's unknowns.
struct Sample {
  std::vector<int> support;  // empty: dense
  Eigen::VectorXd values;
};

double form(const SparseMatrix& a, const Sample& s) {
  if (s.support.empty()) return s.values.dot(a * s.values);
  std::unordered_map<int, int> where;
  for (std::size_t i = 0; i < s.support.size(); ++i) where.emplace(s.support[i], static_cast<int>(i));
  double sum = 0.0;
  for (std::size_t j = 0; j < s.support.size(); ++j) {
    for (SparseMatrix::InnerIterator it(a, s.support[j]); it; ++it) {
      const auto found = where.find(static_cast<int>(it.row()));
      if (found != where.end()) sum += s.values[found->second] * it.value() * s.values[j];
    }
  }
  return sum;
}

std::vector<Sample> draw_samples(const SlabSpace& space, const SlabGeometry& geometry,
                                 int count, bool localized, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<Sample> out;
  for (int s = 0; s < count; ++s) {
    Sample smp;
    smp.values.resize(space.num_unknowns());
    for (auto& v : smp.values) v = uni(rng);
    out.push_back(std::move(smp));
  }
  if (!localized) return out;
  // unknowns touched by an uncut active element; the worst extension cases sit
  // on the remaining ones, whose support lies in cut elements only
  std::vector<char> interior(space.num_unknowns(), 0);
  std::vector<int> local;
  for (int e : space.active_elements()) {
    if (geometry.marks[e] == Mark::cut) continue;
    space.element_unknowns(e, local);
    for (int u : local) interior[u] = 1;
  }
  for (int e : space.active_elements()) {
    if (geometry.marks[e] != Mark::cut) continue;
    space.element_unknowns(e, local);
    Sample whole{local, Eigen::VectorXd(local.size())};
    for (auto& v : whole.values) v = uni(rng);
    Sample outer;
    for (int u : local)
      if (!interior[u]) outer.support.push_back(u);
    out.push_back(std::move(whole));
    if (outer.support.empty() || outer.support.size() == local.size()) continue;
    outer.values.resize(outer.support.size());
    for (auto& v : outer.values) v = uni(rng);
    out.push_back(std::move(outer));
  }
  return out;
}

double safe_ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

// Spatial basis at the full-element rule of every active element.
struct FullTabulation {
  std::vector<CutRule> rules;
  std::vector<Eigen::MatrixXd> phi;  // points x ns
};

FullTabulation tabulate_full(const SlabSpace& space, int order) {
  FullTabulation tab;
  const int ns = space.spatial_element().size();
  tab.rules.resize(space.mesh().num_elements());
  tab.phi.resize(space.mesh().num_elements());
  std::vector<double> phi(ns);
  for (int e : space.active_elements()) {
    tab.rules[e] = full_element_rule(space.mesh(), e, order);
    Eigen::MatrixXd& m = tab.phi[e];
    m.resize(tab.rules[e].size(), ns);
    for (std::size_t p = 0; p < tab.rules[e].size(); ++p) {
      space.spatial_element().eval(tab.rules[e].ref_points[p], phi);
      for (int i = 0; i < ns; ++i) m(p, i) = phi[i];
    }
  }
  return tab;
}

// (D_t phi_j, phi_i)_{Q^{h,n}} with the exact velocity.
SparseMatrix assemble_convective_mass(const SlabSpace& space, const SlabLevelSet& ls,
                                      const VectorField& velocity, const QuadratureConfig& quad) {
  detail::SlabMatrixBuilder out(space, {});
  detail::TimeBlocks blocks;
  blocks.use_vv = blocks.use_vd = true;
  const int ns = space.spatial_element().size();
  detail::assemble_volume(space, ls, VolumeRegion::cut, quad, blocks, out,
                          [&](const detail::PointBasis& p, detail::TimeBlocks& b) {
                            const Vec2 w = velocity(p.x, p.t);
                            for (int i = 0; i < ns; ++i)
                              for (int j = 0; j < ns; ++j) {
                                b.vd(i, j) += p.weight * p.phi[i] * p.phi[j];
                                b.vv(i, j) += p.weight * p.phi[i] * w.dot(p.grad[j]);
                              }
                          });
  return out.finish();
}

}  // namespace

const char* probe_name(ProbeKind kind) {
  for (const auto& p : kProbeNames)
    if (p.kind == kind) return p.name;
  return "unknown";
}

std::optional<ProbeKind> parse_probe(const std::string& name) {
  for (const auto& p : kProbeNames)
    if (name == p.name) return p.kind;
  return std::nullopt;
}

SlabProbeResult probe_slab(ProbeKind kind, const Mesh& mesh, const SpaceTimeScalar& levelset,
                           const VectorField& velocity, const TimePartition& partition, int n,
                           const ProbeOptions& options) {
  const QuadratureConfig quad = options.quadrature.resolved(options.k_s, options.k_t);
  auto dofs = std::make_shared<const SpatialDofTable>(mesh, options.k_s);
  const SlabSetup setup = setup_slab(levelset, mesh, partition, n, options.q_t, quad);
  const SlabGeometry& geo = setup.geometry;
  const SlabLevelSet& ls = setup.levelset;
  if (geo.active_elements.empty()) return {};
  const auto space = build_slab_space(dofs, geo, options.k_t, partition, n);
  const double h = mesh.h_max();
  const double dt = space->dt();
  const double gamma = options.include_J ? options.gamma_J : 0.0;

  SlabProbeResult result;
  result.cut_elements = geo.num_cut();
  const std::uint64_t seed = options.seed + 7919ull * static_cast<std::uint64_t>(n) +
                             static_cast<std::uint64_t>(mesh.num_elements());

  const bool quadratic = kind == ProbeKind::gp_extension || kind == ProbeKind::temporal_inverse ||
                         kind == ProbeKind::spatial_inverse || kind == ProbeKind::time_trace ||
                         kind == ProbeKind::special_trace;
  if (quadratic) {
    const SparseMatrix mq = assemble_mass(*space, ls, VolumeRegion::cut, quad);
    const SparseMatrix j = assemble_J(*space, geo, gamma, -1);
    SparseMatrix num;
    double num_scale = 1.0;
    double den_scale = 1.0;
    switch (kind) {
      case ProbeKind::gp_extension:
        num = assemble_mass(*space, ls, VolumeRegion::full, quad);
        break;
      case ProbeKind::temporal_inverse:
        num = assemble_dt_mass(*space, ls, quad);
        num_scale = dt * dt;
        break;
      case ProbeKind::spatial_inverse:
        num = assemble_grad_mass(*space, ls, quad);
        num_scale = h * h;
        break;
      case ProbeKind::time_trace:
        num = assemble_endpoint_mass(*space, ls, SlabEnd::begin, quad) +
              assemble_endpoint_mass(*space, ls, SlabEnd::end, quad);
        den_scale = 1.0 / dt;
        break;
      default:
        num = assemble_boundary_mass(*space, ls, quad);
        den_scale = 1.0 / h;
        break;
    }
    for (const Sample& s : draw_samples(*space, geo, options.samples, options.localized_samples, seed)) {
      const double d = form(mq, s) + h * form(j, s);
      result.max_ratio = std::max(result.max_ratio, safe_ratio(num_scale * form(num, s), den_scale * d));
      ++result.samples;
    }
    return result;
  }

  const int nt = space->time_size();
  const int ns = space->spatial_element().size();
  const Rule1D& gt = gauss_legendre(quad.time_points);
  std::vector<std::vector<double>> psi(gt.points.size(), std::vector<double>(nt));
  std::vector<double> dpsi(nt);
  for (std::size_t q = 0; q < gt.points.size(); ++q)
    space->eval_time(space->t_begin() + gt.points[q] * dt, psi[q], dpsi);

  if (kind == ProbeKind::oswald) {
    // broken random fields; ||u - Oswald u||^2 over the active prisms
    const FullTabulation tab = tabulate_full(*space, 2 * options.k_s);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int s = 0; s < options.samples; ++s) {
      BrokenField u;
      u.local.resize(mesh.num_elements());
      for (int e : space->active_elements()) {
        u.local[e].resize(ns * nt);
        for (auto& v : u.local[e]) v = uni(rng);
      }
      const BrokenField avg = to_broken(*space, oswald_project(*space, u));
      double num = 0.0;
      for (int e : space->active_elements()) {
        const Eigen::Map<const Eigen::MatrixXd> du0(u.local[e].data(), nt, ns);
        const Eigen::Map<const Eigen::MatrixXd> du1(avg.local[e].data(), nt, ns);
        const Eigen::MatrixXd vals = tab.phi[e] * (du0 - du1).transpose();  // points x modes
        for (std::size_t q = 0; q < gt.points.size(); ++q) {
          const Eigen::Map<const Eigen::VectorXd> ps(psi[q].data(), nt);
          const Eigen::VectorXd at = vals * ps;
          for (std::size_t p = 0; p < tab.rules[e].size(); ++p)
            num += gt.weights[q] * dt * tab.rules[e].weights[p] * at[p] * at[p];
        }
      }
      const double jval = ghost_penalty_value(*space, geo, u, options.gamma_J, -1);
      result.max_ratio = std::max(result.max_ratio, safe_ratio(num, h * jval));
      ++result.samples;
    }
    return result;
  }

  if (kind == ProbeKind::matderiv) {
    const SparseMatrix mq = assemble_mass(*space, ls, VolumeRegion::cut, quad);
    const SparseMatrix j = assemble_J(*space, geo, gamma, -1);
    const SparseMatrix a = assemble_matderiv_mass(*space, ls, velocity, quad);
    const SparseMatrix c = assemble_convective_mass(*space, ls, velocity, quad);
    for (const Sample& s : draw_samples(*space, geo, options.samples, false, seed)) {
      const Eigen::VectorXd& x = s.values;
      const Eigen::VectorXd y = discrete_material_derivative(*space, x, velocity);
      const double num = x.dot(a * x) - 2.0 * y.dot(c * x) + y.dot(mq * y);
      const double den = x.dot(mq * x) + x.dot(j * x);
      result.max_ratio = std::max(result.max_ratio, safe_ratio(h * std::max(num, 0.0), den));
      ++result.samples;
    }
    return result;
  }

  // time_commutator: u * exp(-t) against its projection, over the active prisms
  const FullTabulation tab = tabulate_full(*space, 2 * options.k_s);
  const Rule1D& gfine = gauss_legendre(nt + 8);
  std::vector<std::vector<double>> psif(gfine.points.size(), std::vector<double>(nt));
  for (std::size_t q = 0; q < gfine.points.size(); ++q)
    space->eval_time(space->t_begin() + gfine.points[q] * dt, psif[q], dpsi);
  for (const Sample& s : draw_samples(*space, geo, options.samples, false, seed)) {
    const Eigen::VectorXd& x = s.values;
    const auto coeff = [&](int d, double t) {
      std::vector<double> p(nt), dp(nt);
      space->eval_time(t, p, dp);
      double v = 0.0;
      for (int m = 0; m < nt; ++m) v += x[space->unknown(d, m)] * p[m];
      return v * std::exp(-t);
    };
    const Eigen::VectorXd proj = time_project(*space, coeff);
    const BrokenField ub = to_broken(*space, x);
    const BrokenField pb = to_broken(*space, proj);
    double num = 0.0, norm = 0.0;
    for (int e : space->active_elements()) {
      const Eigen::Map<const Eigen::MatrixXd> cu(ub.local[e].data(), nt, ns);
      const Eigen::Map<const Eigen::MatrixXd> cp(pb.local[e].data(), nt, ns);
      const Eigen::MatrixXd vu = tab.phi[e] * cu.transpose();
      const Eigen::MatrixXd vp = tab.phi[e] * cp.transpose();
      for (std::size_t q = 0; q < gfine.points.size(); ++q) {
        const double t = space->t_begin() + gfine.points[q] * dt;
        const Eigen::Map<const Eigen::VectorXd> ps(psif[q].data(), nt);
        const Eigen::VectorXd u = vu * ps;
        const Eigen::VectorXd d = u * std::exp(-t) - vp * ps;
        for (std::size_t p = 0; p < tab.rules[e].size(); ++p) {
          const double w = gfine.weights[q] * dt * tab.rules[e].weights[p];
          num += w * d[p] * d[p];
          norm += w * u[p] * u[p];
        }
      }
    }
    result.max_ratio = std::max(result.max_ratio, safe_ratio(std::sqrt(num), dt * std::sqrt(norm)));
    ++result.samples;
  }
  return result;
}

ProbeReport run_probe(ProbeKind kind, const ProbeProblem& problem, int level_min, int level_max,
                      const ProbeOptions& options) {
  ProbeReport report;
  report.kind = kind;
  report.growth_limit = options.growth_limit;
  for (int i = level_min; i <= level_max; ++i) {
    const auto [h, slabs] = problem.schedule(i);
    const Mesh mesh = build_structured_mesh(problem.box, h, problem.split);
    const TimePartition partition(problem.t0, problem.t_end, slabs);
    ProbeLevel level;
    level.level = i;
    level.h = mesh.h_max();
    level.dt = partition.dt();
    level.slabs = slabs;
    for (int n = 1; n <= slabs; ++n) {
      const SlabProbeResult r =
          probe_slab(kind, mesh, problem.levelset, problem.velocity, partition, n, options);
      level.samples += r.samples;
      level.cut_elements = std::max(level.cut_elements, r.cut_elements);
      if (r.max_ratio > level.max_ratio) {
        level.max_ratio = r.max_ratio;
        level.worst_slab = n;
      }
    }
    report.levels.push_back(level);
  }
  for (std::size_t i = 1; i < report.levels.size(); ++i)
    report.max_growth = std::max(report.max_growth,
                                 safe_ratio(report.levels[i].max_ratio, report.levels[i - 1].max_ratio));
  report.pass = report.max_growth <= options.growth_limit;
  return report;
}

SliverCase sliver_case(double depth, double h) {
  // grid line at x = 0.5 on the unit square; phi < 0 to its left plus the sliver
  return {Box{Vec2(0.0, 0.0), Vec2(1.0, 1.0)}, h, 0.5 + depth * h};
}

SliverControl sliver_control(const std::vector<double>& depths, const ProbeOptions& options) {
  SliverControl out;
  out.depths = depths;
  const VectorField zero = [](const Vec2&, double) { return Vec2(0.0, 0.0); };
  for (double depth : depths) {
    const SliverCase sc = sliver_case(depth);
    const Mesh mesh = build_structured_mesh(sc.box, sc.h, SplitKind::criss_cross);
    const TimePartition partition(0.0, sc.h, 1);
    const double xc = sc.x_cut;
    const SpaceTimeScalar phi = [xc](const Vec2& x, double) { return x.x() - xc; };

    ProbeOptions with = options;
    with.include_J = true;
    ProbeOptions without = options;
    without.include_J = false;
    out.ratio_with_J.push_back(
        probe_slab(ProbeKind::gp_extension, mesh, phi, zero, partition, 1, with).max_ratio);
    out.ratio_without_J.push_back(
        probe_slab(ProbeKind::gp_extension, mesh, phi, zero, partition, 1, without).max_ratio);

    // slab matrices of the transport problem with w = 0
    const QuadratureConfig quad = options.quadrature.resolved(options.k_s, options.k_t);
    auto dofs = std::make_shared<const SpatialDofTable>(mesh, options.k_s);
    const SlabSetup setup = setup_slab(phi, mesh, partition, 1, options.q_t, quad);
    const auto space = build_slab_space(dofs, setup.geometry, options.k_t, partition, 1);
    TransportData data;
    data.velocity = zero;
    data.divergence = [](const Vec2&, double) { return 0.0; };
    const SparseMatrix b = assemble_Bh(*space, setup.geometry, setup.levelset, data, quad);
    const SparseMatrix j = assemble_J(*space, setup.geometry, options.gamma_J, -1);
    out.condition_with_J.push_back(dense_condition_number(b + j));
    out.condition_without_J.push_back(dense_condition_number(b));
  }
  if (!depths.empty()) {
    out.growth_with_J = safe_ratio(out.ratio_with_J.back(), out.ratio_with_J.front());
    out.growth_without_J = safe_ratio(out.ratio_without_J.back(), out.ratio_without_J.front());
  }
  return out;
}

}  // namespace stcut
