#include "stcut/solver.hpp"

#include <algorithm>
#include <chrono>

#include <Eigen/SVD>
#include <Eigen/SparseLU>
#ifdef STCUT_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

namespace stcut {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

#ifdef STCUT_HAVE_UMFPACK
using Factorization = Eigen::UmfPackLU<SparseMatrix>;
#else
using Factorization = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;
#endif

}  // namespace

int SolveReport::max_unknowns() const {
  int m = 0;
  for (const auto& s : slabs) m = std::max(m, s.unknowns);
  return m;
}

double SolveReport::max_residual() const {
  double m = 0.0;
  for (const auto& s : slabs) m = std::max(m, s.residual);
  return m;
}

const char* solver_backend() {
#ifdef STCUT_HAVE_UMFPACK
  return "umfpack";
#else
  return "sparselu";
#endif
}

Eigen::VectorXd solve_slab(const SlabSystem& system, const SolveOptions& options,
                           SlabStats* stats) {
  const SparseMatrix& a = system.matrix;
  const Eigen::VectorXd& b = system.rhs;
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw SolveError("slab system has inconsistent dimensions", system.slab);
  if (stats) {
    stats->slab = system.slab;
    stats->unknowns = static_cast<int>(a.rows());
    stats->nonzeros = static_cast<int>(a.nonZeros());
  }

  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    if (stats) stats->residual = 0.0;
    return Eigen::VectorXd::Zero(b.size());
  }

  Factorization lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw SolveError("slab system singular", system.slab);

  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite())
    throw SolveError("slab system singular", system.slab);
  Eigen::VectorXd r = b - a * x;
  double rel = r.norm() / bnorm;
  int steps = 0;
  while (rel > options.tolerance && steps < options.max_refinement_steps) {
    x += lu.solve(r);
    r = b - a * x;
    rel = r.norm() / bnorm;
    ++steps;
  }
  if (!(rel <= options.tolerance)) throw SolveError("slab system singular", system.slab);
  if (stats) {
    stats->residual = rel;
    stats->refinement_steps = steps;
  }
  return x;
}

double dense_condition_number(const SparseMatrix& a) {
  const Eigen::MatrixXd dense(a);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0.0;
  const double smin = s[s.size() - 1];
  return smin == 0.0 ? std::numeric_limits<double>::infinity() : s[0] / smin;
}

SlabSetup setup_slab(const SpaceTimeScalar& phi, const Mesh& mesh, const TimePartition& partition,
                     int n, int q_t, const QuadratureConfig& quad) {
  SlabLevelSet ls = sample_levelset(phi, mesh, partition, n, q_t);
  const int counts[] = {quad.time_points};
  const auto times = classification_times(ls.t_begin(), ls.t_end(), counts);
  SlabGeometry geometry = classify_slab(ls, times);
  return {std::move(ls), std::move(geometry)};
}

Discretization march(const ProblemConfig& config, SolveReport* report) {
  const auto start = Clock::now();
  if (!config.levelset) throw AssemblyError("problem has no level set");
  if (!config.data.velocity || !config.data.divergence || !config.data.source ||
      !config.data.initial)
    throw AssemblyError("transport data incomplete");

  Discretization out;
  out.mesh = std::make_shared<const Mesh>(build_structured_mesh(config.box, config.h, config.split));
  out.dofs = std::make_shared<const SpatialDofTable>(*out.mesh, config.k_s);
  out.quadrature = config.forms.quadrature.resolved(config.k_s, config.k_t);
  const TimePartition partition(config.t0, config.t_end, config.num_slabs);
  out.field.partition = partition;

  FormOptions forms = config.forms;
  forms.quadrature = out.quadrature;
  if (report) {
    report->backend = solver_backend();
    report->slabs.clear();
  }

  for (int n = 1; n <= partition.num_slabs(); ++n) {
    SlabStats stats;
    stats.slab = n;
    const auto t_assembly = Clock::now();
    SlabSetup setup = setup_slab(config.levelset, *out.mesh, partition, n, config.q_t, out.quadrature);
    if (setup.geometry.active_elements.empty())
      throw SolveError("empty slab space: no active elements", n);
    auto space = build_slab_space(out.dofs, setup.geometry, config.k_t, partition, n);
    const SlabField* previous = n > 1 ? &out.field.slabs.back() : nullptr;
    SlabSystem system;
    try {
      system = assemble_slab_system(*space, setup.geometry, setup.levelset, config.data, previous,
                                    forms);
    } catch (const AssemblyError& e) {
      throw SolveError(e.what(), n);
    }
    stats.assembly_seconds = seconds_since(t_assembly);
    stats.active_elements = static_cast<int>(setup.geometry.active_elements.size());
    stats.cut_elements = setup.geometry.num_cut();
    stats.ghost_facets = static_cast<int>(setup.geometry.ghost_facets.size());

    const auto t_solve = Clock::now();
    Eigen::VectorXd coeffs = solve_slab(system, config.solve, &stats);
    stats.solve_seconds = seconds_since(t_solve);

    out.field.levelsets.push_back(std::move(setup.levelset));
    out.field.geometries.push_back(std::move(setup.geometry));
    out.field.slabs.push_back(SlabField{space, std::move(coeffs)});
    if (report) report->slabs.push_back(stats);
  }
  if (report) report->wall_seconds = seconds_since(start);
  return out;
}

}  // namespace stcut
