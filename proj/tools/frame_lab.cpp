// frame-lab: run Coulomb-frame scenarios, convergence studies, and list the
// surface catalog.
//
// Exit codes: 0 all enabled checks pass, 1 some check failed, 2 bad
// invocation or config, 3 pipeline error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "framelab/catalog.hpp"
#include "framelab/scenario.hpp"

namespace {

using namespace framelab;

constexpr int kExitFailedChecks = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPipeline = 3;

void print_summary(const RunReport& r, const std::filesystem::path& dir) {
  std::printf("surface %s  grid %dx%d  h=%.4g\n", r.config.surface.c_str(), r.config.n_r,
              r.config.n_theta, r.mesh_size);
  std::printf("total torsion: initial %.8g  final %.8g", r.total_torsion_initial,
              r.total_torsion_final);
  if (r.total_torsion_analytic) std::printf("  (closed form %.8g)", *r.total_torsion_analytic);
  std::printf("\nEL residuals: interior %.3e  boundary %.3e\n", r.el_final.interior,
              r.el_final.boundary);
  for (const auto& route : r.routes) {
    std::printf("route %-8s total torsion %.8g  iterations %d%s\n", route_name(route.route),
                route.total_torsion, route.iterations, route.converged ? "" : "  NOT CONVERGED");
  }
  for (const auto& c : r.checks) {
    std::printf("check %-11s %s", c.name.c_str(), c.passed ? "pass" : "FAIL");
    for (const auto& [k, v] : c.values) std::printf("  %s=%.3e", k.c_str(), v);
    if (c.tolerance > 0.0) std::printf("  (tol %.3e)", c.tolerance);
    std::printf("\n");
  }
  std::printf("report written to %s\n", (dir / "report.json").string().c_str());
}

int run_command(const std::string& path) {
  const ScenarioConfig cfg = load_config(path);
  validate_config(cfg);
  const RunReport report = run_scenario(cfg);
  print_summary(report, resolve_output_dir(cfg));
  return report.all_passed() ? 0 : kExitFailedChecks;
}

int study_command(const std::string& path, const std::string& levels_text) {
  const ScenarioConfig cfg = load_config(path);
  validate_config(cfg);
  const auto levels = parse_levels(levels_text);
  const StudyTable table = convergence_study(cfg, levels);
  std::cout << format_study(table);
  const std::filesystem::path dir = resolve_output_dir(cfg);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "study.json") << study_to_json(table);
  std::printf("study written to %s\n", (dir / "study.json").string().c_str());
  return 0;
}

int catalog_command() {
  for (const auto& e : catalog_entries()) {
    std::printf("%-28s %s\n", e.name.c_str(), e.description.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normal Coulomb frames on discretized disc-type surfaces"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "run a scenario and write its report");
  run->add_option("config", run_config, "scenario config file")->required()->check(CLI::ExistingFile);

  std::string study_config;
  std::string levels = "16x32,32x64,64x128";
  auto* study = app.add_subcommand("study", "convergence study over grid levels");
  study->add_option("config", study_config, "scenario config file")
      ->required()
      ->check(CLI::ExistingFile);
  study->add_option("--levels", levels, "comma-separated n_r x n_theta levels, each doubling")
      ->capture_default_str();

  auto* catalog = app.add_subcommand("catalog", "list catalog surfaces");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return run_command(run_config);
    if (*study) return study_command(study_config, levels);
    if (*catalog) return catalog_command();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ScenarioError& e) {
    std::fprintf(stderr, "error in stage %s\n", e.what());
    return kExitPipeline;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitPipeline;
  }
  return kExitConfig;
}
