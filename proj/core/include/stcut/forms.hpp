#pragma once

#include <functional>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "stcut/fespace.hpp"
#include "stcut/levelset.hpp"

namespace stcut {

using SparseMatrix = Eigen::SparseMatrix<double>;
using VectorField = std::function<Vec2(const Vec2&, double)>;

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Transport velocity, its divergence, source and initial datum. All must be
/// evaluable on the active elements of every slab (extension of the data).
struct TransportData {
  VectorField velocity;
  SpaceTimeScalar divergence;
  SpaceTimeScalar source;
  std::function<double(const Vec2&)> initial;
};

enum class FormVariant { standard, mass_conserving };

/// Quadrature density. Non-positive entries select the defaults
/// 2*k_s+2 (spatial exactness) and k_t+2 (Gauss points per slab).
struct QuadratureConfig {
  int spatial_order = 0;
  int time_points = 0;

  QuadratureConfig resolved(int k_s, int k_t) const;
};

struct SlabSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  int slab = 0;
  double gamma_J = 0.0;
  FormVariant variant = FormVariant::standard;
};

struct FormOptions {
  FormVariant variant = FormVariant::standard;
  double gamma_J = 0.05;
  int j_scaling = -1;
  QuadratureConfig quadrature;
};

/// Upwind DG-in-time transport form on one slab:
/// (dt u + w.grad u + div(w) u, v)_{Q^n} + (u_+, v_+)_{Omega^h(t_{n-1})}.
SparseMatrix assemble_Bh(const SlabSpace& space, const SlabGeometry& geometry,
                         const SlabLevelSet& ls, const TransportData& data,
                         const QuadratureConfig& quad);

/// Mass-conserving variant, slab-wise:
/// (u, -dt v - w.grad v)_{Q^n} + (u_-, v_-)_{Omega^h(t_n)}.
SparseMatrix assemble_Bmc(const SlabSpace& space, const SlabGeometry& geometry,
                          const SlabLevelSet& ls, const TransportData& data,
                          const QuadratureConfig& quad);

/// Direct space-time ghost penalty over full patches omega_F x I_n,
/// scaled by gamma_J * h^j with h = mesh h_max.
SparseMatrix assemble_J(const SlabSpace& space, const SlabGeometry& geometry, double gamma_J,
                        int j_scaling = -1);

/// (f, v)_{Q^n} + (g, v_+)_{Omega^h(t_{n-1})} with g = u0 on slab 1, else the
/// left limit of `previous` at t_{n-1}.
Eigen::VectorXd assemble_rhs(const SlabSpace& space, const SlabGeometry& geometry,
                             const SlabLevelSet& ls, const TransportData& data,
                             const SlabField* previous, const QuadratureConfig& quad);

SlabSystem assemble_slab_system(const SlabSpace& space, const SlabGeometry& geometry,
                                const SlabLevelSet& ls, const TransportData& data,
                                const SlabField* previous, const FormOptions& options);

// Quadratic forms used by the error analysis and probes.

enum class VolumeRegion { cut, full };

/// (u, v) over Q^{h,n} (cut) or over the active prisms E(Q^{h,n}) (full).
SparseMatrix assemble_mass(const SlabSpace& space, const SlabLevelSet& ls, VolumeRegion region,
                           const QuadratureConfig& quad);
/// (dt u, dt v)_{Q^{h,n}}
SparseMatrix assemble_dt_mass(const SlabSpace& space, const SlabLevelSet& ls,
                              const QuadratureConfig& quad);
/// (grad u, grad v)_{Q^{h,n}}
SparseMatrix assemble_grad_mass(const SlabSpace& space, const SlabLevelSet& ls,
                                const QuadratureConfig& quad);
/// ((dt + w.grad) u, (dt + w.grad) v)_{Q^{h,n}}
SparseMatrix assemble_matderiv_mass(const SlabSpace& space, const SlabLevelSet& ls,
                                    const VectorField& velocity, const QuadratureConfig& quad);

enum class SlabEnd { begin, end };
/// (u, v)_{Omega^h(t)} at the slab start (right limit) or end (left limit).
SparseMatrix assemble_endpoint_mass(const SlabSpace& space, const SlabLevelSet& ls, SlabEnd end,
                                    const QuadratureConfig& quad);
/// int_{I_n} int_{boundary of Omega^h(t)} u v, midpoint rule per interface segment.
SparseMatrix assemble_boundary_mass(const SlabSpace& space, const SlabLevelSet& ls,
                                    const QuadratureConfig& quad);

/// x^T A x
double quadratic_form(const SparseMatrix& a, const Eigen::VectorXd& x);

}  // namespace stcut
