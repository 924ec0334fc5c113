#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stcut/analysis.hpp"
#include "stcut/cases.hpp"
#include "stcut/forms.hpp"
#include "stcut/probes.hpp"
#include "stcut/solver.hpp"

namespace stcut {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Convergence-study settings. Read from flat `key = value` text; see
/// format_run_config for the full key list.
struct RunConfig {
  std::string case_name = "expanding_circle";
  int k_s = 2;
  int k_t = 2;
  int q_t = 1;
  int level_min = 0;
  int level_max = 3;
  double gamma_J = 0.05;
  FormVariant variant = FormVariant::standard;
  QuadratureConfig quadrature;
  SplitKind split = SplitKind::criss_cross;
  std::string outdir = "out";
  std::uint64_t seed = 1;
  bool record_timing = true;   ///< false writes 0 to wall_seconds (byte-stable CSV)
  std::vector<ProbeKind> probes;
  int probe_level_min = 0;
  int probe_level_max = 2;
  int probe_samples = 50;
  double probe_growth_limit = 3.0;
};

RunConfig parse_run_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_run_config(const std::string& path);
/// Canonical key = value listing that parses back to the same config.
std::string format_run_config(const RunConfig& config);
/// "a..b" or "a".
std::pair<int, int> parse_level_range(const std::string& text);

struct MassBalance {
  double final_mass = 0.0;    ///< int_{Omega^h(T)} u_h
  double initial_mass = 0.0;  ///< int_{Omega^h(t0)} u0
  double source = 0.0;        ///< int_{Q^h} f
  double defect = 0.0;        ///< final - initial - source
  double scale = 0.0;         ///< |final| + |initial| + |source|
};

struct LevelResult {
  int level = 0;
  double h = 0.0;
  double dt = 0.0;
  int slabs = 0;
  int ndof_max_slab = 0;
  ErrorReport errors;
  double eoc_l2 = 0.0;
  double eoc_h1 = 0.0;
  double eoc_matderiv = 0.0;
  MassBalance mass;
  double geometry_error = 0.0;  ///< sampled max |phi - phi^lin|
  int max_active = 0;
  int max_cut = 0;
  int max_ghost_facets = 0;
  double max_residual = 0.0;
  double wall_seconds = 0.0;
  std::vector<SlabStats> slab_stats;
};

struct ConvergenceTable {
  RunConfig config;
  std::string backend;
  std::vector<LevelResult> rows;
};

ProblemConfig problem_config(const RunConfig& config, const CaseDefinition& c, int level);

/// Sampled max |phi - phi^lin| on a grid x grid lattice of cell centres and
/// `times` interior times, restricted to |phi| <= band.
double levelset_interpolation_error(const CaseDefinition& c, const Mesh& mesh,
                                    const TimePartition& partition, int q_t, int grid = 50,
                                    int times = 5, double band = 0.5);

LevelResult run_level(const RunConfig& config, const CaseDefinition& c, int level);

/// Runs every level of the study and fills the EOC columns.
ConvergenceTable run_convergence(const RunConfig& config,
                                 const std::function<void(const LevelResult&)>& progress = {});

/// Columns: i, h, dt, ndof_max_slab, err_l2_final, eoc_l2, err_h1_st, eoc_h1,
/// err_matderiv, eoc_matderiv, wall_seconds.
void write_convergence_csv(const ConvergenceTable& table, std::ostream& out);

ProbeProblem probe_problem(const CaseDefinition& c, SplitKind split);
ProbeOptions probe_options(const RunConfig& config);
/// Columns: level, h, dt, slabs, samples, cut_elements, max_ratio, worst_slab.
void write_probe_csv(const ProbeReport& report, std::ostream& out);

/// Structured run report (JSON text).
std::string report_json(const ConvergenceTable& table, const std::vector<ProbeReport>& probes);
std::string probe_json(const std::vector<ProbeReport>& probes);

struct FieldDumpOptions {
  int level = 0;
  std::vector<double> times;
  int grid = 200;
  std::string outdir = "out";
};

/// Solves the configured case at one level and writes one CSV per requested
/// time with columns x, y, inside_flag, u_h. Returns the written paths.
std::vector<std::string> dump_field(const RunConfig& config, const FieldDumpOptions& options);

/// Mesh and per-slab geometry summary (JSON text).
std::string mesh_info_json(const RunConfig& config, int level);

}  // namespace stcut
