#include "stcut/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace stcut {

namespace {

using json = nlohmann::json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("invalid value for '" + key + "': '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid value for '" + key + "': '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const char* variant_name(FormVariant v) {
  return v == FormVariant::standard ? "standard" : "mass_conserving";
}
const char* split_name(SplitKind s) { return s == SplitKind::diagonal ? "diagonal" : "criss_cross"; }

std::string format_double(double v, const char* fmt = "%.10e") {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

void validate(const RunConfig& c) {
  if (c.k_s < 1 || c.k_s > 8) throw ConfigError("k_s must be in 1..8");
  if (c.k_t < 1 || c.k_t > 15) throw ConfigError("k_t must be in 1..15");
  if (c.q_t < 1 || c.q_t > 7) throw ConfigError("q_t must be in 1..7");
  if (c.level_min < 0 || c.level_max < c.level_min) throw ConfigError("invalid level range");
  if (c.level_max > 8) throw ConfigError("levels above 8 are not supported");
  if (!(c.gamma_J >= 0.0)) throw ConfigError("gamma_J must be non-negative");
  if (c.probe_level_min < 0 || c.probe_level_max < c.probe_level_min)
    throw ConfigError("invalid probe level range");
  if (c.probe_samples < 1) throw ConfigError("probe_samples must be positive");
  const auto names = case_names();
  if (std::find(names.begin(), names.end(), c.case_name) == names.end())
    throw ConfigError("unknown case '" + c.case_name + "'");
}

}  // namespace

std::pair<int, int> parse_level_range(const std::string& text) {
  const std::string t = trim(text);
  const auto dots = t.find("..");
  if (dots == std::string::npos) {
    const int v = parse_number<int>("levels", t);
    return {v, v};
  }
  return {parse_number<int>("levels", trim(t.substr(0, dots))),
          parse_number<int>("levels", trim(t.substr(dots + 2)))};
}

RunConfig parse_run_config(std::istream& in, const std::string& source) {
  RunConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "case") {
        c.case_name = value;
      } else if (key == "k") {
        c.k_s = c.k_t = parse_number<int>(key, value);
      } else if (key == "k_s") {
        c.k_s = parse_number<int>(key, value);
      } else if (key == "k_t") {
        c.k_t = parse_number<int>(key, value);
      } else if (key == "q_t") {
        c.q_t = parse_number<int>(key, value);
      } else if (key == "levels") {
        std::tie(c.level_min, c.level_max) = parse_level_range(value);
      } else if (key == "gamma_J") {
        c.gamma_J = parse_number<double>(key, value);
      } else if (key == "variant") {
        if (value == "standard")
          c.variant = FormVariant::standard;
        else if (value == "mass_conserving")
          c.variant = FormVariant::mass_conserving;
        else
          throw ConfigError("variant must be standard or mass_conserving");
      } else if (key == "quad_spatial_order") {
        c.quadrature.spatial_order = parse_number<int>(key, value);
      } else if (key == "quad_time_points") {
        c.quadrature.time_points = parse_number<int>(key, value);
      } else if (key == "split") {
        if (value == "criss_cross")
          c.split = SplitKind::criss_cross;
        else if (value == "diagonal")
          c.split = SplitKind::diagonal;
        else
          throw ConfigError("split must be criss_cross or diagonal");
      } else if (key == "outdir") {
        c.outdir = value;
      } else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(key, value);
      } else if (key == "record_timing") {
        c.record_timing = parse_bool(key, value);
      } else if (key == "probes") {
        c.probes.clear();
        for (const auto& name : split_list(value)) {
          if (name == "none") continue;
          const auto kind = parse_probe(name);
          if (!kind) throw ConfigError("unknown probe '" + name + "'");
          c.probes.push_back(*kind);
        }
      } else if (key == "probe_levels") {
        std::tie(c.probe_level_min, c.probe_level_max) = parse_level_range(value);
      } else if (key == "probe_samples") {
        c.probe_samples = parse_number<int>(key, value);
      } else if (key == "probe_growth_limit") {
        c.probe_growth_limit = parse_number<double>(key, value);
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  validate(c);
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return parse_run_config(in, path);
}

std::string format_run_config(const RunConfig& c) {
  std::ostringstream out;
  out << "case = " << c.case_name << '\n'
      << "k_s = " << c.k_s << '\n'
      << "k_t = " << c.k_t << '\n'
      << "q_t = " << c.q_t << '\n'
      << "levels = " << c.level_min << ".." << c.level_max << '\n'
      << "gamma_J = " << format_double(c.gamma_J, "%.17g") << '\n'
      << "variant = " << variant_name(c.variant) << '\n'
      << "quad_spatial_order = " << c.quadrature.spatial_order << '\n'
      << "quad_time_points = " << c.quadrature.time_points << '\n'
      << "split = " << split_name(c.split) << '\n'
      << "outdir = " << c.outdir << '\n'
      << "seed = " << c.seed << '\n'
      << "record_timing = " << (c.record_timing ? "true" : "false") << '\n'
      << "probes = ";
  if (c.probes.empty()) out << "none";
  for (std::size_t i = 0; i < c.probes.size(); ++i)
    out << (i ? "," : "") << probe_name(c.probes[i]);
  out << '\n'
      << "probe_levels = " << c.probe_level_min << ".." << c.probe_level_max << '\n'
      << "probe_samples = " << c.probe_samples << '\n'
      << "probe_growth_limit = " << format_double(c.probe_growth_limit, "%.17g") << '\n';
  return out.str();
}

ProblemConfig problem_config(const RunConfig& config, const CaseDefinition& c, int level) {
  ProblemConfig p;
  p.box = c.box;
  const auto [h, slabs] = c.schedule(level);
  p.h = h;
  p.num_slabs = slabs;
  p.split = config.split;
  p.t0 = c.t0;
  p.t_end = c.t_end;
  p.k_s = config.k_s;
  p.k_t = config.k_t;
  p.q_t = config.q_t;
  p.levelset = c.levelset;
  p.data = c.transport_data();
  p.forms.variant = config.variant;
  p.forms.gamma_J = config.gamma_J;
  p.forms.quadrature = config.quadrature;
  return p;
}

double levelset_interpolation_error(const CaseDefinition& c, const Mesh& mesh,
                                    const TimePartition& partition, int q_t, int grid, int times,
                                    double band) {
  std::vector<SlabLevelSet> slabs;
  for (int n = 1; n <= partition.num_slabs(); ++n)
    slabs.push_back(sample_levelset(c.levelset, mesh, partition, n, q_t));
  const Vec2 extent = c.box.upper - c.box.lower;
  double err = 0.0;
  for (int k = 0; k < times; ++k) {
    const double t = c.t0 + (c.t_end - c.t0) * (k + 0.5) / times;
    int n = 1;
    while (n < partition.num_slabs() && t > partition.node(n)) ++n;
    const SlabLevelSet& ls = slabs[n - 1];
    for (int a = 0; a < grid; ++a) {
      for (int b = 0; b < grid; ++b) {
        const Vec2 x = c.box.lower + Vec2(extent.x() * (a + 0.5) / grid, extent.y() * (b + 0.5) / grid);
        const double phi = c.levelset(x, t);
        if (std::abs(phi) > band) continue;
        const auto e = mesh.locate(x);
        if (!e) continue;
        const Vec2 xi = mesh.element_map(*e).to_reference(x);
        err = std::max(err, std::abs(phi - ls.eval(*e, xi, t).value));
      }
    }
  }
  return err;
}

LevelResult run_level(const RunConfig& config, const CaseDefinition& c, int level) {
  const auto start = std::chrono::steady_clock::now();
  const ProblemConfig problem = problem_config(config, c, level);
  SolveReport report;
  Discretization disc;
  try {
    disc = march(problem, &report);
  } catch (const SolveError& e) {
    throw SolveError("level " + std::to_string(level) + ": " + e.what(), e.slab());
  }

  LevelResult r;
  r.level = level;
  r.h = disc.mesh->h_max();
  r.dt = disc.field.partition.dt();
  r.slabs = disc.field.num_slabs();
  r.ndof_max_slab = report.max_unknowns();
  r.max_residual = report.max_residual();
  r.slab_stats = report.slabs;
  for (const auto& s : report.slabs) {
    r.max_active = std::max(r.max_active, s.active_elements);
    r.max_cut = std::max(r.max_cut, s.cut_elements);
    r.max_ghost_facets = std::max(r.max_ghost_facets, s.ghost_facets);
  }
  r.errors = error_report(disc, c.exact, c.velocity, config.gamma_J);
  r.mass.final_mass = discrete_mass(disc, c.t_end, SolutionField::Side::left);
  r.mass.initial_mass = initial_mass(disc, c.initial);
  r.mass.source = source_integral(disc, c.source);
  r.mass.defect = r.mass.final_mass - r.mass.initial_mass - r.mass.source;
  r.mass.scale = std::abs(r.mass.final_mass) + std::abs(r.mass.initial_mass) + std::abs(r.mass.source);
  r.geometry_error =
      levelset_interpolation_error(c, *disc.mesh, disc.field.partition, config.q_t);
  if (config.record_timing)
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ConvergenceTable run_convergence(const RunConfig& config,
                                 const std::function<void(const LevelResult&)>& progress) {
  validate(config);
  const CaseDefinition c = make_case(config.case_name);
  ConvergenceTable table;
  table.config = config;
  table.backend = solver_backend();
  for (int i = config.level_min; i <= config.level_max; ++i) {
    LevelResult r = run_level(config, c, i);
    if (!table.rows.empty()) {
      const LevelResult& p = table.rows.back();
      r.eoc_l2 = std::log2(p.errors.l2_final / r.errors.l2_final);
      r.eoc_h1 = std::log2(p.errors.h1_st / r.errors.h1_st);
      r.eoc_matderiv = std::log2(p.errors.matderiv / r.errors.matderiv);
    } else {
      r.eoc_l2 = r.eoc_h1 = r.eoc_matderiv = std::nan("");
    }
    if (progress) progress(r);
    table.rows.push_back(std::move(r));
  }
  return table;
}

void write_convergence_csv(const ConvergenceTable& table, std::ostream& out) {
  out << "i,h,dt,ndof_max_slab,err_l2_final,eoc_l2,err_h1_st,eoc_h1,err_matderiv,eoc_matderiv,"
         "wall_seconds\n";
  for (const auto& r : table.rows) {
    out << r.level << ',' << format_double(r.h) << ',' << format_double(r.dt) << ','
        << r.ndof_max_slab << ',' << format_double(r.errors.l2_final) << ','
        << format_double(r.eoc_l2, "%.4f") << ',' << format_double(r.errors.h1_st) << ','
        << format_double(r.eoc_h1, "%.4f") << ',' << format_double(r.errors.matderiv) << ','
        << format_double(r.eoc_matderiv, "%.4f") << ',' << format_double(r.wall_seconds, "%.3f")
        << '\n';
  }
}

ProbeProblem probe_problem(const CaseDefinition& c, SplitKind split) {
  ProbeProblem p;
  p.box = c.box;
  p.split = split;
  p.t0 = c.t0;
  p.t_end = c.t_end;
  p.levelset = c.levelset;
  p.velocity = c.velocity;
  p.schedule = c.schedule;
  return p;
}

ProbeOptions probe_options(const RunConfig& config) {
  ProbeOptions o;
  o.k_s = config.k_s;
  o.k_t = config.k_t;
  o.q_t = config.q_t;
  o.gamma_J = config.gamma_J;
  o.samples = config.probe_samples;
  o.seed = config.seed;
  o.growth_limit = config.probe_growth_limit;
  o.quadrature = config.quadrature;
  return o;
}

void write_probe_csv(const ProbeReport& report, std::ostream& out) {
  out << "level,h,dt,slabs,samples,cut_elements,max_ratio,worst_slab\n";
  for (const auto& l : report.levels)
    out << l.level << ',' << format_double(l.h) << ',' << format_double(l.dt) << ',' << l.slabs
        << ',' << l.samples << ',' << l.cut_elements << ',' << format_double(l.max_ratio) << ','
        << l.worst_slab << '\n';
}

namespace {

json probes_to_json(const std::vector<ProbeReport>& probes) {
  json arr = json::array();
  for (const auto& p : probes) {
    json levels = json::array();
    for (const auto& l : p.levels)
      levels.push_back({{"level", l.level},
                        {"h", l.h},
                        {"dt", l.dt},
                        {"slabs", l.slabs},
                        {"samples", l.samples},
                        {"cut_elements", l.cut_elements},
                        {"max_ratio", l.max_ratio},
                        {"worst_slab", l.worst_slab}});
    arr.push_back({{"name", probe_name(p.kind)},
                   {"levels", levels},
                   {"max_growth", p.max_growth},
                   {"growth_limit", p.growth_limit},
                   {"status", p.pass ? "PASS" : "FAIL"}});
  }
  return arr;
}

json config_to_json(const RunConfig& c) {
  json j;
  std::istringstream in(format_run_config(c));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    j[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return j;
}

}  // namespace

std::string probe_json(const std::vector<ProbeReport>& probes) {
  return probes_to_json(probes).dump(2);
}

std::string report_json(const ConvergenceTable& table, const std::vector<ProbeReport>& probes) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    json slabs = json::array();
    for (const auto& s : r.slab_stats)
      slabs.push_back({{"slab", s.slab},
                       {"unknowns", s.unknowns},
                       {"nonzeros", s.nonzeros},
                       {"active_elements", s.active_elements},
                       {"cut_elements", s.cut_elements},
                       {"ghost_facets", s.ghost_facets},
                       {"relative_residual", s.residual},
                       {"refinement_steps", s.refinement_steps}});
    rows.push_back({
        {"i", r.level},
        {"h", r.h},
        {"dt", r.dt},
        {"slabs", r.slabs},
        {"ndof_max_slab", r.ndof_max_slab},
        {"errors",
         {{"l2_final", r.errors.l2_final},
          {"h1_st", r.errors.h1_st},
          {"matderiv", r.errors.matderiv},
          {"h_matderiv_sq", r.errors.h_matderiv_sq},
          {"l2_st_sq", r.errors.l2_st_sq},
          {"jumps_sq", r.errors.jumps_sq},
          {"final_trace_sq", r.errors.final_trace_sq},
          {"ghost_penalty_uh", r.errors.ghost_penalty}}},
        {"eoc", {{"l2", r.eoc_l2}, {"h1", r.eoc_h1}, {"matderiv", r.eoc_matderiv}}},
        {"mass_balance",
         {{"final", r.mass.final_mass},
          {"initial", r.mass.initial_mass},
          {"source", r.mass.source},
          {"defect", r.mass.defect},
          {"scale", r.mass.scale}}},
        {"geometry",
         {{"levelset_interpolation_error", r.geometry_error},
          {"max_active_elements", r.max_active},
          {"max_cut_elements", r.max_cut},
          {"max_ghost_facets", r.max_ghost_facets}}},
        {"solver", {{"max_relative_residual", r.max_residual}, {"slabs", slabs}}},
        {"wall_seconds", r.wall_seconds},
    });
  }
  json report = {
      {"config", config_to_json(table.config)},
      {"solver_backend", table.backend},
      {"levels", rows},
      {"probes", probes_to_json(probes)},
      {"notes",
       {"geometry: piecewise linear level set interpolant, no curved-mesh correction",
        "discrete material derivative: w1 . grad u_h is reproduced exactly by nodal values "
        "(degree k_s on affine elements), no spatial projection applied",
        "high-order study capped at k = 3; orders k = 4..6 and the 3D case are not run"}},
  };
  return report.dump(2);
}

std::vector<std::string> dump_field(const RunConfig& config, const FieldDumpOptions& options) {
  validate(config);
  if (options.grid < 2) throw ConfigError("grid must be at least 2");
  if (options.times.empty()) throw ConfigError("no times requested");
  const CaseDefinition c = make_case(config.case_name);
  for (double t : options.times)
    if (!(t >= c.t0 && t <= c.t_end)) throw ConfigError("time outside [t0, T]");
  const Discretization disc = march(problem_config(config, c, options.level));
  std::filesystem::create_directories(options.outdir);

  std::vector<std::string> paths;
  const Vec2 extent = c.box.upper - c.box.lower;
  for (double t : options.times) {
    char name[64];
    std::snprintf(name, sizeof name, "field_t%g.csv", t);
    const std::string path = (std::filesystem::path(options.outdir) / name).string();
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << "x,y,inside_flag,u_h\n";
    const int n = disc.field.slab_index(t, SolutionField::Side::left);
    const SlabLevelSet& ls = disc.field.levelsets[n - 1];
    const SlabField& field = disc.field.slab(n);
    for (int b = 0; b < options.grid; ++b) {
      for (int a = 0; a < options.grid; ++a) {
        const Vec2 x = c.box.lower + Vec2(extent.x() * a / (options.grid - 1),
                                          extent.y() * b / (options.grid - 1));
        const auto e = disc.mesh->locate(x);
        int inside = 0;
        double u = std::nan("");
        if (e) {
          const Vec2 xi = disc.mesh->element_map(*e).to_reference(x);
          inside = ls.eval(*e, xi, t).value <= 0.0 ? 1 : 0;
          if (field.space->element_active(*e)) u = field.value(*e, xi, t);
        }
        out << format_double(x.x(), "%.8g") << ',' << format_double(x.y(), "%.8g") << ','
            << inside << ',' << format_double(u, "%.10e") << '\n';
      }
    }
    paths.push_back(path);
  }
  return paths;
}

std::string mesh_info_json(const RunConfig& config, int level) {
  validate(config);
  const CaseDefinition c = make_case(config.case_name);
  const ProblemConfig p = problem_config(config, c, level);
  const Mesh mesh = build_structured_mesh(p.box, p.h, p.split);
  auto dofs = std::make_shared<const SpatialDofTable>(mesh, config.k_s);
  const TimePartition partition(p.t0, p.t_end, p.num_slabs);
  const QuadratureConfig quad = config.quadrature.resolved(config.k_s, config.k_t);
  json slabs = json::array();
  for (int n = 1; n <= partition.num_slabs(); ++n) {
    const SlabSetup s = setup_slab(p.levelset, mesh, partition, n, p.q_t, quad);
    const auto space = build_slab_space(dofs, s.geometry, config.k_t, partition, n);
    slabs.push_back({{"slab", n},
                     {"t_begin", space->t_begin()},
                     {"t_end", space->t_end()},
                     {"active_elements", s.geometry.active_elements.size()},
                     {"cut_elements", s.geometry.num_cut()},
                     {"ghost_facets", s.geometry.ghost_facets.size()},
                     {"unknowns", space->num_unknowns()}});
  }
  const json info = {
      {"case", c.name},
      {"level", level},
      {"target_h", p.h},
      {"split", split_name(p.split)},
      {"vertices", mesh.num_vertices()},
      {"elements", mesh.num_elements()},
      {"facets", mesh.num_facets()},
      {"interior_facets", mesh.interior_facets().size()},
      {"h_max", mesh.h_max()},
      {"spatial_dofs", dofs->num_dofs()},
      {"dt", partition.dt()},
      {"slabs", slabs},
  };
  return info.dump(2);
}

}  // namespace stcut
