#pragma once

// Scenario pipeline: sample a catalog surface, seed and optionally twist a
// normal frame, run the Coulomb route(s), run the enabled verification
// checks, and write report.json, history.csv and fields/*.csv.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "framelab/catalog.hpp"
#include "framelab/gauge.hpp"

namespace framelab {

inline constexpr int kReportSchemaVersion = 1;

/// Environment variable that overrides ScenarioConfig::output_dir.
inline constexpr const char* kOutputDirEnv = "FRAME_LAB_OUTPUT";

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A failure inside run_scenario, tagged with the pipeline stage.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

enum class RouteChoice { neumann, descent, both };

const char* route_choice_name(RouteChoice route);

/// Known check names, in report order.
const std::vector<std::string>& known_checks();

struct ScenarioConfig {
  std::string surface;
  SurfaceParams params;
  int n_r = 32;
  int n_theta = 64;
  RouteChoice route = RouteChoice::descent;
  DescentOptions descent;
  bool descent_random_init = false;
  TwistSpec twist;
  std::vector<std::string> checks = known_checks();
  std::string output_dir = "frame-lab-out";
  std::uint64_t seed = 1;

  // Tolerances. Fixed ones are absolute; c_* multiply h^2.
  double tol_el = 1e-3;
  double tol_route = 5e-3;
  double c_ricci = 2.0;
  double c_weingarten = 2.0;
  double c_tau = 2.0;
  double c_invariance = 5.0;
  int invariance_samples = 3;

  bool enabled(const std::string& check) const;
};

/// Parses a flat `key = value` file (`#` comments, comma lists). Unknown
/// keys, sections and malformed values throw ConfigError naming the key.
ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Inverse of parse_config; the echo stored in every report.
std::string to_config_text(const ScenarioConfig& cfg);

/// Throws ConfigError: grid limits, unknown checks, unknown surface,
/// Neumann route on codimension other than 2, invalid descent options.
void validate_config(const ScenarioConfig& cfg);

struct CheckResult {
  std::string name;
  bool passed = false;
  double tolerance = 0.0;
  std::vector<std::pair<std::string, double>> values;
  std::string note;
};

struct RouteSummary {
  Route route = Route::descent;
  double total_torsion = 0.0;
  double el_interior = 0.0;
  double el_boundary = 0.0;
  int iterations = 0;
  bool converged = true;
  double compatibility_defect = 0.0;
};

struct RunReport {
  ScenarioConfig config;
  double mesh_size = 0.0;
  double conformality_residual = 0.0;
  double total_torsion_initial = 0.0;
  double total_torsion_final = 0.0;
  std::optional<double> total_torsion_analytic;  // Coulomb value, if known
  ElResidual el_initial;
  ElResidual el_final;
  std::vector<RouteSummary> routes;
  std::vector<CheckResult> checks;
  std::optional<AprioriReport> apriori;
  std::vector<HistoryRecord> history;
  double wall_time_seconds = 0.0;

  bool all_passed() const;
  const CheckResult* check(const std::string& name) const;
};

/// Field dumps produced alongside a report.
struct ScenarioFields {
  struct Column {
    std::string name;
    ScalarField values;
  };
  struct Field {
    std::string name;
    std::vector<Column> columns;
  };
  std::vector<Field> fields;
};

/// Runs the pipeline in memory. Errors carry the stage name.
RunReport execute_scenario(const ScenarioConfig& cfg, ScenarioFields* fields = nullptr);

/// execute_scenario plus report.json, history.csv and fields/*.csv under
/// the output directory (or $FRAME_LAB_OUTPUT).
RunReport run_scenario(const ScenarioConfig& cfg);

std::filesystem::path resolve_output_dir(const ScenarioConfig& cfg);

std::string report_to_json(const RunReport& report, const std::string& history_file);

struct StudyLevel {
  int n_r = 0;
  int n_theta = 0;
};

/// Parses "16x32,32x64,64x128".
std::vector<StudyLevel> parse_levels(const std::string& text);

struct StudyRow {
  StudyLevel level;
  double mesh_size = 0.0;
  /// Named quantities (total torsion error, residuals) at this level.
  std::vector<std::pair<std::string, double>> values;
};

struct StudyTable {
  std::vector<std::string> columns;
  std::vector<StudyRow> rows;
  /// orders[k][c]: log2(e_k / e_{k+1}) for column c; nullopt when both
  /// values are at rounding level or no reference exists.
  std::vector<std::vector<std::optional<double>>> orders;
  std::string reference_note;
};

/// Requires >= 3 levels, each doubling n_r and n_theta. The total torsion
/// error uses the closed-form Coulomb value when known, else the finest
/// level.
StudyTable convergence_study(const ScenarioConfig& cfg, const std::vector<StudyLevel>& levels);

std::string format_study(const StudyTable& table);
std::string study_to_json(const StudyTable& table);

}  // namespace framelab
