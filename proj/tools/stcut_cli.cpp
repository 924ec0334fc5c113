// Command line front end: convergence runs, inequality probes, field dumps, mesh summaries.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stcut/harness.hpp"

namespace {

using stcut::RunConfig;

int fail(const std::string& kind, const std::string& message, int code) {
  const nlohmann::json err = {{"status", "error"}, {"error", kind}, {"message", message}};
  std::cerr << err.dump() << '\n';
  return code;
}

RunConfig config_or_default(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return stcut::load_run_config(path);
}

std::vector<double> parse_times(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw stcut::ConfigError("invalid time '" + item + "'");
    }
    if (used != item.size()) throw stcut::ConfigError("invalid time '" + item + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_run(const std::string& config_path, const std::string& outdir_override) {
  RunConfig config = stcut::load_run_config(config_path);
  if (!outdir_override.empty()) config.outdir = outdir_override;

  const auto table = stcut::run_convergence(config, [](const stcut::LevelResult& r) {
    std::fprintf(stderr, "level %d: h=%.4g dt=%.4g ndof=%d L2=%.4e H1=%.4e\n", r.level, r.h, r.dt,
                 r.ndof_max_slab, r.errors.l2_final, r.errors.h1_st);
  });

  std::vector<stcut::ProbeReport> probes;
  if (!config.probes.empty()) {
    const auto c = stcut::make_case(config.case_name);
    const auto problem = stcut::probe_problem(c, config.split);
    const auto options = stcut::probe_options(config);
    for (auto kind : config.probes)
      probes.push_back(stcut::run_probe(kind, problem, config.probe_level_min,
                                        config.probe_level_max, options));
  }

  std::filesystem::create_directories(config.outdir);
  const auto dir = std::filesystem::path(config.outdir);
  {
    std::ofstream csv(dir / "convergence.csv");
    if (!csv) throw stcut::ConfigError("cannot write to " + config.outdir);
    stcut::write_convergence_csv(table, csv);
  }
  {
    std::ofstream rep(dir / "report.json");
    rep << stcut::report_json(table, probes) << '\n';
  }
  stcut::write_convergence_csv(table, std::cout);
  return 0;
}

int cmd_probe(const std::string& name, const std::string& levels, const std::string& config_path,
              int samples, const std::string& outdir_override) {
  RunConfig config = config_or_default(config_path);
  if (!outdir_override.empty()) config.outdir = outdir_override;
  if (samples > 0) config.probe_samples = samples;
  const auto kind = stcut::parse_probe(name);
  if (!kind) throw stcut::ConfigError("unknown probe '" + name + "'");
  const auto [lo, hi] = stcut::parse_level_range(levels);
  if (lo < 0 || hi < lo) throw stcut::ConfigError("invalid level range '" + levels + "'");

  const auto c = stcut::make_case(config.case_name);
  const auto report = stcut::run_probe(*kind, stcut::probe_problem(c, config.split), lo, hi,
                                       stcut::probe_options(config));
  std::filesystem::create_directories(config.outdir);
  std::ofstream csv(std::filesystem::path(config.outdir) / ("probe_" + name + ".csv"));
  stcut::write_probe_csv(report, csv);
  stcut::write_probe_csv(report, std::cout);
  std::cout << "# max_growth=" << report.max_growth << " limit=" << report.growth_limit
            << " status=" << (report.pass ? "PASS" : "FAIL") << '\n';
  return 0;
}

int cmd_dump(const std::string& times, int grid, int level, const std::string& config_path,
             const std::string& outdir_override) {
  RunConfig config = config_or_default(config_path);
  stcut::FieldDumpOptions options;
  options.times = parse_times(times);
  options.grid = grid;
  options.level = level;
  options.outdir = outdir_override.empty() ? config.outdir : outdir_override;
  for (const auto& path : stcut::dump_field(config, options)) std::cout << path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unfitted space-time finite elements for transport on moving domains"};
  app.require_subcommand(1);

  std::string config_path, outdir, probe_name = "gp_extension", levels = "0..2", times;
  int samples = 0, grid = 200, level = 0;

  auto* run = app.add_subcommand("run", "Convergence study from a key=value config file");
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--outdir", outdir, "Override the output directory");

  auto* probe = app.add_subcommand("probe", "Sample the ratio of a discrete inequality");
  probe->add_option("--name", probe_name, "gp_extension, temporal_inverse, spatial_inverse, "
                                          "time_trace, special_trace, oswald, matderiv, "
                                          "time_commutator");
  probe->add_option("--levels", levels, "Level range a..b");
  probe->add_option("--config", config_path, "Config file (case, orders, gamma_J, seed)");
  probe->add_option("--samples", samples, "Random global samples per slab");
  probe->add_option("--outdir", outdir, "Output directory");

  auto* dump = app.add_subcommand("dump-field", "Sample u_h on a uniform grid");
  dump->add_option("--times", times, "Comma separated times")->required();
  dump->add_option("--grid", grid, "Grid points per direction");
  dump->add_option("--level", level, "Refinement level");
  dump->add_option("--config", config_path, "Config file");
  dump->add_option("--outdir", outdir, "Output directory");

  auto* info = app.add_subcommand("mesh-info", "Mesh and per-slab geometry summary");
  info->add_option("--level", level, "Refinement level");
  info->add_option("--config", config_path, "Config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*run) return cmd_run(config_path, outdir);
    if (*probe) return cmd_probe(probe_name, levels, config_path, samples, outdir);
    if (*dump) return cmd_dump(times, grid, level, config_path, outdir);
    if (*info) {
      std::cout << stcut::mesh_info_json(config_or_default(config_path), level) << '\n';
      return 0;
    }
  } catch (const stcut::ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const std::invalid_argument& e) {
    return fail("config", e.what(), 2);
  } catch (const stcut::SolveError& e) {
    return fail("solve", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
  return 0;
}
