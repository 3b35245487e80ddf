#include "framelab/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace framelab {
namespace {

using Json = nlohmann::ordered_json;

// Residuals below this are treated as exact when computing orders.
constexpr double kRoundingFloor = 1e-11;

// Shortest round-trip representation.
std::string fmt(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

double to_double(const std::string& key, const std::string& text) {
  double x = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(x)) {
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  }
  return x;
}

template <typename Int>
Int to_integer(const std::string& key, const std::string& text) {
  Int x = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + text + "'");
}

RouteChoice to_route(const std::string& text) {
  if (text == "neumann") return RouteChoice::neumann;
  if (text == "descent") return RouteChoice::descent;
  if (text == "both") return RouteChoice::both;
  throw ConfigError("key 'route': expected neumann, descent or both, got '" + text + "'");
}

using Setter = std::function<void(ScenarioConfig&, const std::string& key,
                                  const std::vector<std::string>& values)>;

const std::string& single(const std::string& key, const std::vector<std::string>& values) {
  if (values.size() != 1) throw ConfigError("key '" + key + "' expects exactly one value");
  return values.front();
}

Setter real(double ScenarioConfig::*member) {
  return [member](ScenarioConfig& c, const std::string& k, const std::vector<std::string>& v) {
    c.*member = to_double(k, single(k, v));
  };
}

Setter real(std::function<double&(ScenarioConfig&)> field) {
  return [field](ScenarioConfig& c, const std::string& k, const std::vector<std::string>& v) {
    field(c) = to_double(k, single(k, v));
  };
}

Setter integer(std::function<int&(ScenarioConfig&)> field) {
  return [field](ScenarioConfig& c, const std::string& k, const std::vector<std::string>& v) {
    field(c) = to_integer<int>(k, single(k, v));
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"surface",
       [](ScenarioConfig& c, const std::string& k, const std::vector<std::string>& v) {
         c.surface = single(k, v);
       }},
      {"codimension",
       [](ScenarioConfig& c, const std::string& k, const std::vector<std::string>& v) {
         c.params.codimension = to_integer<int>(k, single(k, v));
       }},
      {"a", real([](ScenarioConfig& c) -> double& { return c.params.a; })},
      {"lambda", real([](ScenarioConfig& c) -> double& { return c.params.lambda; })},
      {"n_r", integer([](ScenarioConfig& c) -> int& { return c.n_r; })},
      {"n_theta", integer([](ScenarioConfig& c) -> int& { return c.n_theta; })},
      {"route",
       [](ScenarioConfig& c, const std::string& k, const std::vector<std::string>& v) {
         c.route = to_route(single(k, v));
       }},
      {"max_iterations", integer([](ScenarioConfig& c) -> int& { return c.descent.max_iterations; })},
      {"max_backtracks", integer([](ScenarioConfig& c) -> int& { return c.descent.max_backtracks; })},
      {"initial_step", real([](ScenarioConfig& c) -> double& { return c.descent.initial_step; })},
      {"armijo_slope", real([](ScenarioConfig& c) -> double& { return c.descent.armijo_slope; })},
      {"step_shrink", real([](ScenarioConfig& c) -> double& { return c.descent.step_shrink; })},
      {"descent_el_tolerance",
       real([](ScenarioConfig& c) -> double& { return c.descent.el_tolerance; })},
      {"descent_relative_tolerance",
       real([](ScenarioConfig& c) -> double& { return c.descent.relative_tolerance; })},
      {"random_amplitude",
       real([](ScenarioConfig& c) -> double& { return c.descent.random_amplitude; })},
      {"descent_random_init",
       [](ScenarioConfig& c, const std::string& k, const std::vector<std::string>& v) {
         c.descent_random_init = to_bool(k, single(k, v));
       }},
      {"twist",
       [](ScenarioConfig& c, const std::string& k, const std::vector<std::string>& v) {
         try {
           c.twist.kind = parse_twist_kind(single(k, v));
         } catch (const CatalogError& e) {
           throw ConfigError(std::string("key 'twist': ") + e.what());
         }
       }},
      {"twist_a", real([](ScenarioConfig& c) -> double& { return c.twist.a; })},
      {"twist_b", real([](ScenarioConfig& c) -> double& { return c.twist.b; })},
      {"twist_c", real([](ScenarioConfig& c) -> double& { return c.twist.c; })},
      {"checks",
       [](ScenarioConfig& c, const std::string&, const std::vector<std::string>& v) {
         c.checks.clear();
         for (const auto& name : v) {
           if (!name.empty() && name != "none") c.checks.push_back(name);
         }
       }},
      {"output_dir",
       [](ScenarioConfig& c, const std::string& k, const std::vector<std::string>& v) {
         c.output_dir = single(k, v);
       }},
      {"seed",
       [](ScenarioConfig& c, const std::string& k, const std::vector<std::string>& v) {
         c.seed = to_integer<std::uint64_t>(k, single(k, v));
       }},
      {"tol_el", real(&ScenarioConfig::tol_el)},
      {"tol_route", real(&ScenarioConfig::tol_route)},
      {"c_ricci", real(&ScenarioConfig::c_ricci)},
      {"c_weingarten", real(&ScenarioConfig::c_weingarten)},
      {"c_tau", real(&ScenarioConfig::c_tau)},
      {"c_invariance", real(&ScenarioConfig::c_invariance)},
      {"invariance_samples", integer([](ScenarioConfig& c) -> int& { return c.invariance_samples; })},
  };
  return table;
}

int codimension_of(const ScenarioConfig& cfg) {
  return surface_catalog(cfg.surface, cfg.params).codimension;
}

void add_pairs(ScenarioFields::Field& field, const MatrixField& m, const std::string& prefix) {
  for (int s = 0; s < m.rows(); ++s) {
    for (int t = s + 1; t < m.cols(); ++t) {
      const auto c = m.component(s, t);
      field.columns.push_back(
          {prefix + "_" + std::to_string(s + 1) + std::to_string(t + 1), {c.begin(), c.end()}});
    }
  }
}

ScenarioFields::Field torsion_field(const std::string& name, const TorsionField& t) {
  ScenarioFields::Field f{name, {}};
  add_pairs(f, t.t1, "T1");
  add_pairs(f, t.t2, "T2");
  return f;
}

RouteSummary summarize(const CoulombResult& r) {
  return {r.route,      r.total_torsion, r.el_interior,         r.el_boundary,
          r.iterations, r.converged,     r.compatibility_defect};
}

double max_conjugation_difference(const MatrixField& rotated, const MatrixField& original,
                                  const RotationField& rotation) {
  double worst = 0.0;
  for (std::size_t i = 0; i < original.node_count(); ++i) {
    const SmallMatrix r = rotation.r.at(i);
    const SmallMatrix expected = r * original.at(i) * r.transpose();
    worst = std::max(worst, (rotated.at(i) - expected).norm());
  }
  return worst;
}

template <typename Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioError(stage, e.what());
  }
}

Json json_number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ScenarioError("output", "cannot open " + path.string());
  out << text;
  if (!out) throw ScenarioError("output", "cannot write " + path.string());
}

std::string field_csv(const ScenarioFields::Field& field, const DiscGrid& grid) {
  std::string out = "node_index,r,theta,u,v";
  for (const auto& c : field.columns) out += "," + c.name;
  out += "\n";
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    out += std::to_string(i) + "," + fmt(grid.r(i)) + "," + fmt(grid.theta(i)) + "," +
           fmt(grid.u(i)) + "," + fmt(grid.v(i));
    for (const auto& c : field.columns) out += "," + fmt(c.values[i]);
    out += "\n";
  }
  return out;
}

std::string history_csv(const std::vector<HistoryRecord>& history) {
  std::string out = "iteration,total_torsion,el_interior,el_boundary,step\n";
  for (const auto& h : history) {
    out += std::to_string(h.iteration) + "," + fmt(h.total_torsion) + "," + fmt(h.el_interior) +
           "," + fmt(h.el_boundary) + "," + fmt(h.step) + "\n";
  }
  return out;
}

}  // namespace

const char* route_choice_name(RouteChoice route) {
  switch (route) {
    case RouteChoice::neumann:
      return "neumann";
    case RouteChoice::both:
      return "both";
    case RouteChoice::descent:
      break;
  }
  return "descent";
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {"coulomb", "ricci",      "weingarten",
                                                 "tau",     "invariance", "apriori"};
  return names;
}

bool ScenarioConfig::enabled(const std::string& check) const {
  return std::ranges::find(checks, check) != checks.end();
}

ScenarioConfig parse_config(std::istream& in) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  ScenarioConfig cfg;
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (!item.parents.empty()) {
      throw ConfigError("sections are not supported (found '" + item.fullname() + "')");
    }
    const auto it = setters().find(item.name);
    if (it == setters().end()) throw ConfigError("unknown key '" + item.name + "'");
    if (!seen.insert(item.name).second) throw ConfigError("duplicate key '" + item.name + "'");
    it->second(cfg, item.name, item.inputs);
  }
  if (cfg.surface.empty()) throw ConfigError("missing required key 'surface'");
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse_config(in);
}

std::string to_config_text(const ScenarioConfig& cfg) {
  std::ostringstream o;
  o << "surface = " << cfg.surface << "\n";
  if (cfg.params.codimension) o << "codimension = " << *cfg.params.codimension << "\n";
  o << "a = " << fmt(cfg.params.a) << "\n";
  o << "lambda = " << fmt(cfg.params.lambda) << "\n";
  o << "n_r = " << cfg.n_r << "\n";
  o << "n_theta = " << cfg.n_theta << "\n";
  o << "route = " << route_choice_name(cfg.route) << "\n";
  o << "max_iterations = " << cfg.descent.max_iterations << "\n";
  o << "max_backtracks = " << cfg.descent.max_backtracks << "\n";
  o << "initial_step = " << fmt(cfg.descent.initial_step) << "\n";
  o << "armijo_slope = " << fmt(cfg.descent.armijo_slope) << "\n";
  o << "step_shrink = " << fmt(cfg.descent.step_shrink) << "\n";
  o << "descent_el_tolerance = " << fmt(cfg.descent.el_tolerance) << "\n";
  o << "descent_relative_tolerance = " << fmt(cfg.descent.relative_tolerance) << "\n";
  o << "descent_random_init = " << (cfg.descent_random_init ? "true" : "false") << "\n";
  o << "random_amplitude = " << fmt(cfg.descent.random_amplitude) << "\n";
  o << "twist = " << twist_kind_name(cfg.twist.kind) << "\n";
  o << "twist_a = " << fmt(cfg.twist.a) << "\n";
  o << "twist_b = " << fmt(cfg.twist.b) << "\n";
  o << "twist_c = " << fmt(cfg.twist.c) << "\n";
  o << "checks = ";
  if (cfg.checks.empty()) o << "none";
  for (std::size_t i = 0; i < cfg.checks.size(); ++i) o << (i ? ", " : "") << cfg.checks[i];
  o << "\n";
  o << "output_dir = \"" << cfg.output_dir << "\"\n";
  o << "seed = " << cfg.seed << "\n";
  o << "tol_el = " << fmt(cfg.tol_el) << "\n";
  o << "tol_route = " << fmt(cfg.tol_route) << "\n";
  o << "c_ricci = " << fmt(cfg.c_ricci) << "\n";
  o << "c_weingarten = " << fmt(cfg.c_weingarten) << "\n";
  o << "c_tau = " << fmt(cfg.c_tau) << "\n";
  o << "c_invariance = " << fmt(cfg.c_invariance) << "\n";
  o << "invariance_samples = " << cfg.invariance_samples << "\n";
  return o.str();
}

void validate_config(const ScenarioConfig& cfg) {
  if (cfg.n_r < DiscGrid::kMinRings || cfg.n_theta < DiscGrid::kMinSectors ||
      cfg.n_theta % 2 != 0) {
    throw ConfigError("grid must have n_r >= " + std::to_string(DiscGrid::kMinRings) +
                      " and even n_theta >= " + std::to_string(DiscGrid::kMinSectors));
  }
  int n = 0;
  try {
    n = codimension_of(cfg);
  } catch (const CatalogError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.route != RouteChoice::descent && n != 2) {
    throw ConfigError(std::string("route=") + route_choice_name(cfg.route) +
                      " requires a codimension-2 surface; '" + cfg.surface + "' has n=" +
                      std::to_string(n));
  }
  for (const auto& c : cfg.checks) {
    if (std::ranges::find(known_checks(), c) == known_checks().end()) {
      std::string msg = "unknown check '" + c + "'; known:";
      for (const auto& k : known_checks()) msg += " " + k;
      throw ConfigError(msg);
    }
  }
  try {
    cfg.descent.validate();
  } catch (const GaugeError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.twist.kind != TwistKind::none && n < 2) {
    throw ConfigError("a twist needs codimension at least 2");
  }
  for (const double t : {cfg.tol_el, cfg.tol_route, cfg.c_ricci, cfg.c_weingarten, cfg.c_tau,
                         cfg.c_invariance}) {
    if (!(t > 0.0)) throw ConfigError("tolerances must be positive");
  }
  if (cfg.invariance_samples < 1) throw ConfigError("invariance_samples must be at least 1");
}

bool RunReport::all_passed() const {
  return std::ranges::all_of(checks, [](const CheckResult& c) { return c.passed; });
}

const CheckResult* RunReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

RunReport execute_scenario(const ScenarioConfig& cfg, ScenarioFields* fields) {
  const auto start = std::chrono::steady_clock::now();
  staged("config", [&] { validate_config(cfg); });

  RunReport report;
  report.config = cfg;
  const DiscGrid grid = staged("grid", [&] { return DiscGrid::build(cfg.n_r, cfg.n_theta); });
  const double h = grid.mesh_size();
  report.mesh_size = h;
  const double h2 = h * h;

  const SurfaceSpec spec = staged("surface", [&] { return surface_catalog(cfg.surface, cfg.params); });
  const SurfaceJet jet = staged("sample", [&] { return sample_surface(spec, grid); });
  report.conformality_residual = jet.conformality_residual;
  const int n = jet.codimension;
  report.total_torsion_analytic = analytic_coulomb_torsion(cfg.surface, cfg.params);

  const NormalFrameField seed_frame = staged("frame", [&] {
    return apply_twist(initial_frame(spec, jet, grid), cfg.twist, grid);
  });
  const TorsionField seed_torsion = torsion_of_frame(seed_frame, grid);
  report.total_torsion_initial = total_torsion(seed_torsion, grid);
  report.el_initial = el_residual(seed_torsion, grid);

  std::optional<CoulombResult> neumann, descent;
  if (cfg.route != RouteChoice::descent) {
    neumann = staged("neumann", [&] { return coulomb_via_neumann(jet, seed_frame, grid); });
    report.routes.push_back(summarize(*neumann));
  }
  if (cfg.route != RouteChoice::neumann) {
    DescentOptions options = cfg.descent;
    if (cfg.descent_random_init) options.random_seed = cfg.seed;
    descent = staged("descent", [&] { return minimize_total_torsion(jet, seed_frame, grid, options); });
    report.routes.push_back(summarize(*descent));
  }
  const CoulombResult& primary = descent ? *descent : *neumann;
  report.total_torsion_final = primary.total_torsion;
  report.el_final = {primary.el_interior, primary.el_boundary};
  report.history = primary.history;

  staged("checks", [&] {
    if (neumann && descent) {
      CheckResult c{"routes", false, cfg.tol_route, {}, "Neumann vs descent torsion fields"};
      const double d = std::max(max_frobenius_difference(neumann->torsion.t1, descent->torsion.t1),
                                max_frobenius_difference(neumann->torsion.t2, descent->torsion.t2));
      const double dt = std::abs(neumann->total_torsion - descent->total_torsion);
      c.values = {{"max_torsion_difference", d}, {"total_torsion_difference", dt}};
      c.passed = d <= cfg.tol_route && dt <= cfg.tol_route;
      report.checks.push_back(std::move(c));
    }

    const TorsionField frame_torsion = torsion_of_frame(primary.frame, grid);
    const NormalCurvatureField curvature = curvature_from_torsion(frame_torsion, jet, grid);

    if (cfg.enabled("coulomb")) {
      CheckResult c{"coulomb", false, cfg.tol_el, {}, "Euler-Lagrange residuals of the final frame"};
      c.values = {{"el_interior", primary.el_interior},
                  {"el_boundary", primary.el_boundary},
                  {"converged", primary.converged ? 1.0 : 0.0}};
      c.passed = primary.converged && primary.el_interior <= cfg.tol_el &&
                 primary.el_boundary <= cfg.tol_el;
      report.checks.push_back(std::move(c));
    }
    if (cfg.enabled("ricci")) {
      const SecondFundamentalField second = second_fundamental(jet, primary.frame);
      const NormalCurvatureField ricci = curvature_from_ricci(second, jet);
      CheckResult c{"ricci", false, cfg.c_ricci * h2, {}, "S_12 from torsion vs Ricci equation"};
      const double d = max_frobenius_difference(curvature.s12, ricci.s12);
      c.values = {{"max_difference", d}, {"curvature_sup", curvature_sup(ricci)}};
      c.passed = d <= c.tolerance;
      report.checks.push_back(std::move(c));
    }
    if (cfg.enabled("weingarten")) {
      const SecondFundamentalField second = second_fundamental(jet, primary.frame);
      CheckResult c{"weingarten", false, cfg.c_weingarten * h2, {}, "frame derivative decomposition"};
      const double r = weingarten_residual(jet, primary.frame, frame_torsion, second, grid);
      c.values = {{"residual", r}};
      c.passed = r <= c.tolerance;
      report.checks.push_back(std::move(c));
    }
    if (cfg.enabled("tau")) {
      const NormalCurvatureField s = curvature_from_torsion(primary.torsion, jet, grid);
      const TauPotential tau = tau_potential(primary.torsion, s, grid);
      CheckResult c{"tau", false, cfg.c_tau * h2, {}, "potential of the Coulomb torsion"};
      c.values = {{"residual_gradient", tau.residual_gradient},
                  {"residual_poisson", tau.residual_poisson},
                  {"residual_boundary", tau.residual_boundary}};
      c.passed = tau.residual_gradient <= c.tolerance && tau.residual_poisson <= c.tolerance &&
                 tau.residual_boundary == 0.0;
      report.checks.push_back(std::move(c));
      if (fields) {
        ScenarioFields::Field f{"tau", {}};
        add_pairs(f, tau.tau, "tau");
        fields->fields.push_back(std::move(f));
      }
    }
    if (cfg.enabled("invariance")) {
      CheckResult c{"invariance", false, cfg.c_invariance * h2, {}, "curvature covariance"};
      double norm_diff = 0.0, conj_diff = 0.0, constant_diff = 0.0;
      for (int k = 0; k < cfg.invariance_samples; ++k) {
        const RotationField r = random_smooth_rotation(n, grid, cfg.seed + k);
        const TorsionField rotated = transform_torsion(frame_torsion, r, grid);
        const NormalCurvatureField s = curvature_from_torsion(rotated, jet, grid);
        for (std::size_t i = 0; i < grid.node_count(); ++i) {
          norm_diff = std::max(norm_diff, std::abs(s.norm[i] - curvature.norm[i]));
        }
        conj_diff = std::max(conj_diff, max_conjugation_difference(s.s12, curvature.s12, r));

        // Node 0 is the center, where the sampled field is the constant exp(A_0).
        const SmallMatrix r0 = random_smooth_rotation(n, grid, cfg.seed + 1000 + k).r.at(0);
        RotationField constant{MatrixField(grid.node_count(), n, n)};
        for (std::size_t i = 0; i < grid.node_count(); ++i) constant.r.set(i, r0);
        const double t0 = total_torsion(frame_torsion, grid);
        const double t1 = total_torsion(transform_torsion(frame_torsion, constant, grid), grid);
        constant_diff = std::max(constant_diff, std::abs(t1 - t0) / std::max(t0, 1.0));
      }
      c.values = {{"norm_difference", norm_diff},
                  {"conjugation_difference", conj_diff},
                  {"constant_rotation_change", constant_diff}};
      c.passed = norm_diff <= c.tolerance && conj_diff <= c.tolerance && constant_diff <= 1e-10;
      report.checks.push_back(std::move(c));
    }
    if (cfg.enabled("apriori")) {
      const AprioriReport ap = apriori_report(n, primary, curvature);
      CheckResult c{"apriori", false, 0.0, {}, "smallness condition; the constant c is not computed"};
      c.values = {{"lhs", ap.lhs}, {"condition_met", ap.condition_met ? 1.0 : 0.0}};
      c.passed = std::isfinite(ap.lhs) && ap.lhs >= 0.0 && ap.gamma <= std::sqrt(2.0) &&
                 ap.sup_torsion >= 0.0 && ap.curvature_sup >= 0.0;
      report.apriori = ap;
      report.checks.push_back(std::move(c));
    }

    if (fields) {
      fields->fields.push_back({"conformal_factor", {{"W", jet.conformal_factor}}});
      fields->fields.push_back(torsion_field("torsion_initial", seed_torsion));
      fields->fields.push_back(torsion_field("torsion_final", primary.torsion));
      ScenarioFields::Field s{"curvature", {}};
      add_pairs(s, curvature.s12, "S");
      s.columns.push_back({"norm", curvature.norm});
      fields->fields.push_back(std::move(s));
      if (neumann) fields->fields.push_back({"neumann_angle", {{"phi", neumann->angle}}});
    }
  });

  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::filesystem::path resolve_output_dir(const ScenarioConfig& cfg) {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return cfg.output_dir;
}

std::string report_to_json(const RunReport& report, const std::string& history_file) {
  const ScenarioConfig& cfg = report.config;
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  Json config;
  config["surface"] = cfg.surface;
  config["codimension"] =
      cfg.params.codimension ? Json(*cfg.params.codimension) : Json(nullptr);
  config["a"] = cfg.params.a;
  config["lambda"] = cfg.params.lambda;
  config["n_r"] = cfg.n_r;
  config["n_theta"] = cfg.n_theta;
  config["route"] = route_choice_name(cfg.route);
  config["twist"] = {{"kind", twist_kind_name(cfg.twist.kind)},
                     {"a", cfg.twist.a},
                     {"b", cfg.twist.b},
                     {"c", cfg.twist.c}};
  config["checks"] = cfg.checks;
  config["seed"] = cfg.seed;
  config["text"] = to_config_text(cfg);
  j["config"] = config;
  j["mesh_size"] = report.mesh_size;
  j["conformality_residual"] = report.conformality_residual;
  j["total_torsion"] = {
      {"initial", json_number(report.total_torsion_initial)},
      {"final", json_number(report.total_torsion_final)},
      {"analytic", report.total_torsion_analytic ? Json(*report.total_torsion_analytic)
                                                 : Json(nullptr)}};
  j["el_residual"] = {{"initial", {{"interior", json_number(report.el_initial.interior)},
                                   {"boundary", json_number(report.el_initial.boundary)}}},
                      {"final", {{"interior", json_number(report.el_final.interior)},
                                 {"boundary", json_number(report.el_final.boundary)}}}};
  Json routes = Json::array();
  for (const auto& r : report.routes) {
    routes.push_back({{"route", route_name(r.route)},
                      {"total_torsion", json_number(r.total_torsion)},
                      {"el_interior", json_number(r.el_interior)},
                      {"el_boundary", json_number(r.el_boundary)},
                      {"iterations", r.iterations},
                      {"converged", r.converged},
                      {"compatibility_defect", json_number(r.compatibility_defect)}});
  }
  j["routes"] = routes;
  Json checks = Json::object();
  for (const auto& c : report.checks) {
    Json entry;
    entry["passed"] = c.passed;
    entry["tolerance"] = json_number(c.tolerance);
    for (const auto& [k, v] : c.values) entry[k] = json_number(v);
    entry["note"] = c.note;
    checks[c.name] = entry;
  }
  j["checks"] = checks;
  if (report.apriori) {
    const AprioriReport& a = *report.apriori;
    j["apriori"] = {{"n", a.codimension},
                    {"total_torsion_min", json_number(a.total_torsion_min)},
                    {"curvature_sup", json_number(a.curvature_sup)},
                    {"gamma", json_number(a.gamma)},
                    {"lhs", json_number(a.lhs)},
                    {"condition_met", a.condition_met},
                    {"sup_torsion", json_number(a.sup_torsion)},
                    {"estimate_constant", "not computed"}};
  } else {
    j["apriori"] = nullptr;
  }
  j["history"] = {{"file", history_file}, {"records", report.history.size()}};
  j["all_passed"] = report.all_passed();
  j["wall_time_seconds"] = report.wall_time_seconds;
  return j.dump(2) + "\n";
}

RunReport run_scenario(const ScenarioConfig& cfg) {
  ScenarioFields fields;
  RunReport report = execute_scenario(cfg, &fields);
  const DiscGrid grid = DiscGrid::build(cfg.n_r, cfg.n_theta);
  const std::filesystem::path dir = resolve_output_dir(cfg);
  try {
    std::filesystem::create_directories(dir / "fields");
  } catch (const std::filesystem::filesystem_error& e) {
    throw ScenarioError("output", e.what());
  }
  for (const auto& f : fields.fields) {
    write_text(dir / "fields" / (f.name + ".csv"), field_csv(f, grid));
  }
  write_text(dir / "history.csv", history_csv(report.history));
  write_text(dir / "report.json", report_to_json(report, "history.csv"));
  return report;
}

std::vector<StudyLevel> parse_levels(const std::string& text) {
  std::vector<StudyLevel> levels;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto x = item.find('x');
    if (x == std::string::npos) throw ConfigError("level '" + item + "' is not of the form NRxNT");
    levels.push_back({to_integer<int>("levels", item.substr(0, x)),
                      to_integer<int>("levels", item.substr(x + 1))});
  }
  return levels;
}

StudyTable convergence_study(const ScenarioConfig& cfg, const std::vector<StudyLevel>& levels) {
  if (levels.size() < 3) throw ConfigError("a convergence study needs at least 3 levels");
  for (std::size_t k = 1; k < levels.size(); ++k) {
    if (levels[k].n_r != 2 * levels[k - 1].n_r || levels[k].n_theta != 2 * levels[k - 1].n_theta) {
      throw ConfigError("each study level must double n_r and n_theta");
    }
  }
  StudyTable table;
  std::vector<RunReport> reports;
  for (const auto& level : levels) {
    ScenarioConfig c = cfg;
    c.n_r = level.n_r;
    c.n_theta = level.n_theta;
    reports.push_back(execute_scenario(c));
  }

  const std::optional<double> analytic = reports.front().total_torsion_analytic;
  const double reference = analytic ? *analytic : reports.back().total_torsion_final;
  table.reference_note = analytic ? "total torsion error against the closed-form value"
                                  : "total torsion error against the finest level";

  table.columns = {"total_torsion", "total_torsion_error", "el_interior", "el_boundary"};
  for (const auto& c : reports.front().checks) {
    for (const auto& [k, v] : c.values) {
      if (k == "converged" || k == "condition_met" || k == "curvature_sup") continue;
      table.columns.push_back(c.name + "." + k);
    }
  }
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const RunReport& r = reports[l];
    StudyRow row{levels[l], r.mesh_size, {}};
    row.values = {{"total_torsion", r.total_torsion_final},
                  {"total_torsion_error", std::abs(r.total_torsion_final - reference)},
                  {"el_interior", r.el_final.interior},
                  {"el_boundary", r.el_final.boundary}};
    for (const auto& c : r.checks) {
      for (const auto& [k, v] : c.values) {
        if (k == "converged" || k == "condition_met" || k == "curvature_sup") continue;
        row.values.push_back({c.name + "." + k, v});
      }
    }
    table.rows.push_back(std::move(row));
  }
  for (std::size_t l = 0; l + 1 < table.rows.size(); ++l) {
    std::vector<std::optional<double>> orders;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const double e0 = table.rows[l].values[c].second;
      const double e1 = table.rows[l + 1].values[c].second;
      const bool is_value = table.columns[c] == "total_torsion" ||
                            table.columns[c] == "apriori.lhs";
      const bool finest_reference = !analytic && table.columns[c] == "total_torsion_error" &&
                                    l + 2 == table.rows.size();
      if (is_value || finest_reference || (e0 < kRoundingFloor && e1 < kRoundingFloor) ||
          !(e1 > 0.0)) {
        orders.push_back(std::nullopt);
      } else {
        orders.push_back(std::log2(e0 / e1));
      }
    }
    table.orders.push_back(std::move(orders));
  }
  return table;
}

std::string format_study(const StudyTable& table) {
  std::ostringstream o;
  o << table.reference_note << "\n";
  char buf[64];
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    o << table.columns[c] << "\n";
    for (std::size_t l = 0; l < table.rows.size(); ++l) {
      const auto& row = table.rows[l];
      std::snprintf(buf, sizeof buf, "  %4dx%-4d  %.6e", row.level.n_r, row.level.n_theta,
                    row.values[c].second);
      o << buf;
      if (l > 0) {
        const auto& order = table.orders[l - 1][c];
        if (order) {
          std::snprintf(buf, sizeof buf, "  order %.3f", *order);
          o << buf;
        } else {
          o << "  order -";
        }
      }
      o << "\n";
    }
  }
  return o.str();
}

std::string study_to_json(const StudyTable& table) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["reference"] = table.reference_note;
  j["columns"] = table.columns;
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json values = Json::array();
    for (const auto& [k, v] : row.values) values.push_back(json_number(v));
    rows.push_back({{"n_r", row.level.n_r},
                    {"n_theta", row.level.n_theta},
                    {"mesh_size", row.mesh_size},
                    {"values", values}});
  }
  j["rows"] = rows;
  Json orders = Json::array();
  for (const auto& level : table.orders) {
    Json line = Json::array();
    for (const auto& o : level) line.push_back(o ? Json(*o) : Json(nullptr));
    orders.push_back(line);
  }
  j["orders"] = orders;
  return j.dump(2) + "\n";
}

}  // namespace framelab
