#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stcut/fespace.hpp"
#include "stcut/forms.hpp"
#include "stcut/levelset.hpp"
#include "stcut/mesh.hpp"

namespace stcut {

class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, int slab)
      : std::runtime_error(what + " (slab " + std::to_string(slab) + ")"), slab_(slab) {}
  int slab() const { return slab_; }

 private:
  int slab_;
};

struct SolveOptions {
  double tolerance = 1e-10;   ///< relative residual ||Ax - b|| / ||b||
  int max_refinement_steps = 3;
};

struct SlabStats {
  int slab = 0;
  int unknowns = 0;
  int nonzeros = 0;
  int active_elements = 0;
  int cut_elements = 0;
  int ghost_facets = 0;
  double residual = 0.0;
  int refinement_steps = 0;
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
};

struct SolveReport {
  std::string backend;
  std::vector<SlabStats> slabs;
  double wall_seconds = 0.0;

  int max_unknowns() const;
  double max_residual() const;
};

/// Name of the sparse direct factorization in use ("umfpack" or "sparselu").
const char* solver_backend();

/// Solves one slab system by sparse LU with iterative refinement. Throws
/// SolveError("slab system singular") when the factorization fails or the
/// relative residual stays above the tolerance.
Eigen::VectorXd solve_slab(const SlabSystem& system, const SolveOptions& options = {},
                           SlabStats* stats = nullptr);

/// 2-norm condition number from a dense SVD. Small matrices only.
double dense_condition_number(const SparseMatrix& a);

struct ProblemConfig {
  Box box{Vec2(-1.0, -1.0), Vec2(1.0, 1.0)};
  double h = 0.5;
  SplitKind split = SplitKind::criss_cross;
  double t0 = 0.0;
  double t_end = 1.0;
  int num_slabs = 1;
  int k_s = 1;
  int k_t = 1;
  int q_t = 1;
  SpaceTimeScalar levelset;
  TransportData data;
  FormOptions forms;
  SolveOptions solve;
};

/// Discrete solution together with the mesh and dof table it refers to.
struct Discretization {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const SpatialDofTable> dofs;
  SolutionField field;
  QuadratureConfig quadrature;   ///< resolved
};

/// Geometry of slab n: phi^lin, classification at the quadrature times.
struct SlabSetup {
  SlabLevelSet levelset;
  SlabGeometry geometry;
};
SlabSetup setup_slab(const SpaceTimeScalar& phi, const Mesh& mesh, const TimePartition& partition,
                     int n, int q_t, const QuadratureConfig& quad);

/// Solves slab after slab; the left trace of slab n is the upwind datum of slab n+1.
Discretization march(const ProblemConfig& config, SolveReport* report = nullptr);

}  // namespace stcut
