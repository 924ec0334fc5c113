#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stcut/forms.hpp"
#include "stcut/levelset.hpp"
#include "stcut/mesh.hpp"

namespace stcut {

/// Ratios of discrete inequalities sampled on random discrete functions.
enum class ProbeKind {
  gp_extension,      ///< ||u||^2_{E(Q)} / D
  temporal_inverse,  ///< dt^2 ||dt u||^2_Q / D
  spatial_inverse,   ///< h^2 ||grad u||^2_Q / D
  time_trace,        ///< (||u_+(t_{n-1})||^2 + ||u_-(t_n)||^2) / (D / dt)
  special_trace,     ///< ||u||^2_{boundary x I_n} / (D / h)
  oswald,            ///< ||u - Oswald(u)||^2_{E(Q)} / (h J(u,u)), u broken
  matderiv,          ///< h ||D_t u - D_t^h u||^2_Q / (||u||^2_Q + J(u,u))
  time_commutator,   ///< ||u g - Pi(u g)||_{E(Q)} / (dt ||u||_{E(Q)}), g = exp(-t)
};
// D = ||u||^2_Q + h * J(u,u), J the assembled ghost penalty (h^{-1} scaling).

const char* probe_name(ProbeKind kind);
std::optional<ProbeKind> parse_probe(const std::string& name);

/// Geometry and mesh schedule on which a probe is evaluated.
struct ProbeProblem {
  Box box{Vec2(-3.5, -3.5), Vec2(3.5, 3.5)};
  SplitKind split = SplitKind::criss_cross;
  double t0 = 0.0;
  double t_end = 1.0;
  SpaceTimeScalar levelset;
  VectorField velocity;
  /// level i -> (h, number of slabs)
  std::function<std::pair<double, int>(int)> schedule;
};

struct ProbeOptions {
  int k_s = 2;
  int k_t = 2;
  int q_t = 1;
  double gamma_J = 0.05;
  bool include_J = true;
  int samples = 50;              ///< global random vectors per slab
  bool localized_samples = true; ///< plus one random vector per cut element
  std::uint64_t seed = 20240531;
  double growth_limit = 3.0;
  QuadratureConfig quadrature;
};

struct ProbeLevel {
  int level = 0;
  double h = 0.0;
  double dt = 0.0;
  int slabs = 0;
  int samples = 0;
  int cut_elements = 0;   ///< max over slabs
  double max_ratio = 0.0;
  int worst_slab = 0;
};

struct ProbeReport {
  ProbeKind kind = ProbeKind::gp_extension;
  std::vector<ProbeLevel> levels;
  double max_growth = 0.0;   ///< max of ratio_{i+1} / ratio_i
  double growth_limit = 3.0;
  bool pass = false;
};

ProbeReport run_probe(ProbeKind kind, const ProbeProblem& problem, int level_min, int level_max,
                      const ProbeOptions& options);

/// Max ratio of one probe on a single slab (exposed for tests).
struct SlabProbeResult {
  double max_ratio = 0.0;
  int samples = 0;
  int cut_elements = 0;
};
SlabProbeResult probe_slab(ProbeKind kind, const Mesh& mesh, const SpaceTimeScalar& levelset,
                           const VectorField& velocity, const TimePartition& partition, int n,
                           const ProbeOptions& options);

/// Planar cut phi = x - x_c with x_c placed `depth` cell widths right of a grid
/// line, so that the elements on that line keep only a sliver inside.
struct SliverCase {
  Box box;
  double h;
  double x_cut;
};
SliverCase sliver_case(double depth, double h = 0.25);

struct SliverControl {
  std::vector<double> depths;
  std::vector<double> ratio_with_J;
  std::vector<double> ratio_without_J;
  std::vector<double> condition_with_J;
  std::vector<double> condition_without_J;
  double growth_with_J = 0.0;     ///< ratio at smallest depth / ratio at largest depth
  double growth_without_J = 0.0;
};

/// gp_extension ratios and slab-matrix condition numbers on sliver cuts, with
/// gamma_J as given and with J removed.
SliverControl sliver_control(const std::vector<double>& depths, const ProbeOptions& options);

}  // namespace stcut
