#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "stcut/fespace.hpp"
#include "stcut/forms.hpp"
#include "stcut/solver.hpp"

namespace stcut {

struct ExactSolution {
  SpaceTimeScalar u;
  std::function<Vec2(const Vec2&, double)> grad;
  SpaceTimeScalar dt;
};

/// Quadrature used for error integrals; non-positive entries take the
/// defaults 2*k_s+4 (spatial exactness) and k_t+3 (Gauss points per slab).
struct ErrorQuadrature {
  int spatial_order = 0;
  int time_points = 0;
};

struct ErrorReport {
  double l2_final = 0.0;       ///< ||u - u_h||_{L2(Omega^h(T))}, left limit at T
  double h1_st = 0.0;          ///< (|grad e|^2 + |dt e|^2 over Q^h)^{1/2}
  double matderiv = 0.0;       ///< ||(dt + w.grad) e||_{Q^h}
  // squared components of the discretisation norms of e = u - u_h
  double h_matderiv_sq = 0.0;  ///< h ||(dt + w.grad) e||^2_{Q^h}
  double l2_st_sq = 0.0;       ///< ||e||^2_{Q^h}
  double jumps_sq = 0.0;       ///< sum over t_0..t_{N-1} of ||[e]||^2, e_-(t_0) = 0
  double final_trace_sq = 0.0; ///< ||e_-(T)||^2_{Omega^h(T)}
  double ghost_penalty = 0.0;  ///< J(u_h, u_h) summed over slabs
};

/// ||u - u_h||_{L2(Omega^h(T))} from the fixed-time cut rule at T.
double l2_final_error(const Discretization& disc, const SpaceTimeScalar& u,
                      const ErrorQuadrature& quad = {});

/// Space-time H1 seminorm of the error over Q^h, slab by slab.
double h1_spacetime_error(const Discretization& disc, const ExactSolution& exact,
                          const ErrorQuadrature& quad = {});

/// ||(dt + w.grad)(u - u_h)||_{Q^h}
double matderiv_error(const Discretization& disc, const ExactSolution& exact,
                      const VectorField& velocity, const ErrorQuadrature& quad = {});

/// All error quantities; `gamma_J`/`j_scaling` select the J(u_h,u_h) diagnostic.
ErrorReport error_report(const Discretization& disc, const ExactSolution& exact,
                         const VectorField& velocity, double gamma_J, int j_scaling = -1,
                         const ErrorQuadrature& quad = {});

/// log2(e_i / e_{i+1}); the first entry is NaN.
std::vector<double> eoc(const std::vector<double>& errors);

/// int_{Omega^h(t)} u_h at a slab endpoint; `side` picks the slab at interior nodes.
double discrete_mass(const Discretization& disc, double t, SolutionField::Side side);
/// int_{Omega^h(t0)} u0
double initial_mass(const Discretization& disc, const std::function<double(const Vec2&)>& u0);
/// int_{Q^h} f
double source_integral(const Discretization& disc, const SpaceTimeScalar& f);

/// L2(I_n) projection onto P^{k_t} of each active spatial dof's temporal
/// coefficient function coeff(active_dof, t). Returns slab coefficients.
Eigen::VectorXd time_project(const SlabSpace& space,
                             const std::function<double(int, double)>& coeff,
                             int gauss_points = 0);

/// Elementwise (broken) coefficients on active elements: local[e] holds
/// (ns*nt) values ordered (local node major, temporal mode minor); inactive
/// elements have empty vectors.
struct BrokenField {
  std::vector<Eigen::VectorXd> local;
};

BrokenField to_broken(const SlabSpace& space, const Eigen::VectorXd& coeffs);

/// Equal-weight averaging of every Lagrange node over the active elements sharing it.
Eigen::VectorXd oswald_project(const SlabSpace& space, const BrokenField& field);

/// Nodal P1 interpolation of w at t_{n-1}, per active element: w1 at the three vertices.
std::vector<std::array<Vec2, 3>> nodal_velocity(const SlabSpace& space,
                                                const VectorField& velocity);

/// D_t^h u = dt u + Oswald(w1 . grad u) with w1 from nodal_velocity. The product
/// w1 . grad u has spatial degree k_s on affine elements, so it is reproduced
/// exactly by its nodal values before averaging.
Eigen::VectorXd discrete_material_derivative(const SlabSpace& space, const Eigen::VectorXd& coeffs,
                                             const VectorField& velocity);

/// gamma * h^j * sum_F int_{omega_F x I_n} (p_T1 - E p_T2)^2 for a broken field.
double ghost_penalty_value(const SlabSpace& space, const SlabGeometry& geometry,
                           const BrokenField& field, double gamma_J, int j_scaling = -1);

}  // namespace stcut
