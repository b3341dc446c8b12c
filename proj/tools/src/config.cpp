#include "brlab/tools/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace brlab::tools {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Constant: return "constant";
    case ScenarioKind::TwoPhase: return "two_phase";
    case ScenarioKind::LayerTrace: return "layer_trace";
  }
  return "unknown";
}

std::vector<double> RadiiSpec::values() const {
  if (!list.empty()) return list;
  return log_radii(min, max, count);
}

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string at(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

std::string show(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void allow_keys(const Json& j, const std::string& path, std::set<std::string> keys) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!keys.count(key)) throw ConfigError(join(path, key), "unknown key");
  }
}

const Json& require(const Json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) throw ConfigError(join(path, key), "missing required entry");
  return j.at(key);
}

double number(const Json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

double positive(const Json& j, const std::string& field) {
  const double v = number(j, field);
  if (!(v > 0.0)) throw ConfigError(field, "must be positive, got " + show(v));
  return v;
}

int integer(const Json& j, const std::string& field, int lo) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  const auto v = j.get<long long>();
  if (v < lo || v > std::numeric_limits<int>::max()) {
    throw ConfigError(field, "must be an integer >= " + std::to_string(lo));
  }
  return static_cast<int>(v);
}

std::string text(const Json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], at(field, i)));
  return out;
}

/// `dims` coordinates; face points (dims = n) get a zero vertical component.
Point point(const Json& j, const std::string& field, int dims) {
  const auto v = numbers(j, field);
  if (static_cast<int>(v.size()) != dims) {
    throw ConfigError(field, "expected " + std::to_string(dims) + " coordinates, got " +
                                 std::to_string(v.size()));
  }
  Point p{0, 0, 0};
  for (int a = 0; a < dims; ++a) p[a] = v[a];
  return p;
}

std::vector<Point> points(const Json& j, const std::string& field, int dims) {
  if (!j.is_array()) throw ConfigError(field, "expected an array of points");
  std::vector<Point> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(point(j[i], at(field, i), dims));
  return out;
}

RadiiSpec radii_spec(const Json& j, const std::string& field) {
  RadiiSpec r;
  if (j.is_array()) {
    r.list = numbers(j, field);
    if (r.list.empty()) throw ConfigError(field, "needs at least one radius");
    for (std::size_t i = 0; i < r.list.size(); ++i) {
      if (!(r.list[i] > 0.0)) throw ConfigError(at(field, i), "radii must be positive");
      if (i && !(r.list[i] > r.list[i - 1])) {
        throw ConfigError(at(field, i), "radii must be strictly increasing");
      }
    }
    return r;
  }
  allow_keys(j, field, {"min", "max", "count"});
  r.min = positive(require(j, field, "min"), join(field, "min"));
  r.max = positive(require(j, field, "max"), join(field, "max"));
  r.count = integer(require(j, field, "count"), join(field, "count"), 2);
  if (!(r.max > r.min)) throw ConfigError(join(field, "max"), "must exceed min");
  return r;
}

void check_face_point(const Grid& grid, const Point& x, const std::string& field) {
  for (int a = 0; a < grid.n(); ++a) {
    if (std::abs(x[a]) > grid.spec().half_widths[a]) {
      throw ConfigError(field, "lies outside the reaction face");
    }
  }
}

void check_radii(const Grid& grid, const Point& x, double r_max, const std::string& field) {
  const double reach = grid.distance_to_dirichlet(x);
  if (r_max > reach + 1e-9 * grid.h()) {
    throw ConfigError(field, "radius " + show(r_max) + " reaches the Dirichlet boundary (distance " +
                                 show(reach) + ")");
  }
}

void check_region(const Grid& grid, const RegionShape& shape, const std::string& field) {
  try {
    region_weights(grid, shape);
  } catch (const GeometryError& e) {
    throw ConfigError(field, e.what());
  }
}

GridSpec grid_spec(const Json& j) {
  allow_keys(j, "grid", {"n", "h", "half_widths", "height"});
  GridSpec g;
  g.n = integer(require(j, "grid", "n"), "grid.n", 1);
  if (g.n > 2) throw ConfigError("grid.n", "must be 1 or 2");
  g.h = positive(require(j, "grid", "h"), "grid.h");
  g.half_widths = numbers(require(j, "grid", "half_widths"), "grid.half_widths");
  if (static_cast<int>(g.half_widths.size()) != g.n) {
    throw ConfigError("grid.half_widths", "needs one entry per boundary axis (" +
                                              std::to_string(g.n) + ")");
  }
  for (std::size_t i = 0; i < g.half_widths.size(); ++i) {
    if (!(g.half_widths[i] > 0.0)) throw ConfigError(at("grid.half_widths", i), "must be positive");
  }
  g.height = positive(require(j, "grid", "height"), "grid.height");
  return g;
}

Scenario scenario(const Json& j) {
  allow_keys(j, "scenario", {"kind", "value", "epsilon"});
  Scenario s;
  const std::string kind = text(require(j, "scenario", "kind"), "scenario.kind");
  if (kind == "constant") {
    s.kind = ScenarioKind::Constant;
  } else if (kind == "two_phase") {
    s.kind = ScenarioKind::TwoPhase;
  } else if (kind == "layer_trace") {
    s.kind = ScenarioKind::LayerTrace;
  } else {
    throw ConfigError("scenario.kind", "unknown scenario '" + kind +
                                           "' (constant, two_phase, layer_trace)");
  }
  if (j.contains("value")) {
    if (s.kind != ScenarioKind::Constant) throw ConfigError("scenario.value", "only for constant");
    s.value = number(j["value"], "scenario.value");
    if (std::abs(s.value) > 1.0) throw ConfigError("scenario.value", "data must lie in [-1, 1]");
  }
  if (j.contains("epsilon")) {
    if (s.kind != ScenarioKind::LayerTrace) throw ConfigError("scenario.epsilon", "only for layer_trace");
    s.layer_epsilon = positive(j["epsilon"], "scenario.epsilon");
  }
  return s;
}

SolveParams solver_params(const Json& j) {
  SolveParams p;
  if (j.is_null()) return p;
  allow_keys(j, "solver", {"tol", "max_sweeps", "relaxation", "newton_iters", "check_every"});
  if (j.contains("tol")) p.tol = positive(j["tol"], "solver.tol");
  if (j.contains("max_sweeps")) p.max_sweeps = integer(j["max_sweeps"], "solver.max_sweeps", 1);
  if (j.contains("relaxation") && !j["relaxation"].is_null()) {
    const double w = number(j["relaxation"], "solver.relaxation");
    if (!(w > 0.0 && w < 2.0)) throw ConfigError("solver.relaxation", "must lie in (0, 2)");
    p.relaxation = w;
  }
  if (j.contains("newton_iters")) {
    p.newton_iters = integer(j["newton_iters"], "solver.newton_iters", 1);
    if (p.newton_iters > 5) throw ConfigError("solver.newton_iters", "at most 5");
  }
  if (j.contains("check_every")) p.check_every = integer(j["check_every"], "solver.check_every", 1);
  return p;
}

CalibrationSpec calibration(const Json& j, const ScenarioConfig& cfg) {
  CalibrationSpec c;
  c.seed = cfg.seed;
  if (j.is_null()) return c;
  const std::string f = "analysis.calibration";
  allow_keys(j, f, {"h", "half_width", "height", "epsilon", "R", "shift_range", "samples"});
  if (j.contains("h")) c.grid.h = positive(j["h"], join(f, "h"));
  if (j.contains("half_width")) c.grid.half_widths = {positive(j["half_width"], join(f, "half_width"))};
  if (j.contains("height")) c.grid.height = positive(j["height"], join(f, "height"));
  if (j.contains("epsilon")) c.epsilon = positive(j["epsilon"], join(f, "epsilon"));
  if (j.contains("R")) c.R = positive(j["R"], join(f, "R"));
  if (j.contains("shift_range")) c.shift_range = positive(j["shift_range"], join(f, "shift_range"));
  if (j.contains("samples")) c.samples = integer(j["samples"], join(f, "samples"), 1);
  if (c.epsilon / c.R > 1.0 / 16 + 1e-15) {
    throw ConfigError(join(f, "epsilon"), "calibration needs eps / R <= 1/16");
  }
  return c;
}

AnalysisPlan analysis(const Json& j, const ScenarioConfig& cfg, const Grid& grid) {
  AnalysisPlan a;
  const int n = cfg.grid.n;
  a.radii = RadiiSpec{4.0 * cfg.grid.h, 0.8 * grid.distance_to_dirichlet({0, 0, 0}), 12, {}};
  a.calibration = calibration(Json(), cfg);
  if (!j.is_null()) {
    allow_keys(j, "analysis", {"centers", "radii", "eta0", "calibration", "concentration_radius",
                               "balls", "battery", "decay_region", "interior", "corollary"});
    if (j.contains("centers")) a.centers = points(j["centers"], "analysis.centers", n);
    if (j.contains("radii")) a.radii = radii_spec(j["radii"], "analysis.radii");
    if (j.contains("eta0")) {
      const Json& e = j["eta0"];
      if (e.is_string()) {
        if (e.get<std::string>() != "calibrate") {
          throw ConfigError("analysis.eta0", "expected a positive number or \"calibrate\"");
        }
      } else {
        a.eta0 = positive(e, "analysis.eta0");
      }
    }
    if (j.contains("calibration")) a.calibration = calibration(j["calibration"], cfg);
    if (j.contains("concentration_radius")) {
      a.concentration_radius = positive(j["concentration_radius"], "analysis.concentration_radius");
    }
    if (j.contains("balls")) {
      const Json& b = j["balls"];
      if (!b.is_array()) throw ConfigError("analysis.balls", "expected an array");
      for (std::size_t i = 0; i < b.size(); ++i) {
        const std::string f = at("analysis.balls", i);
        allow_keys(b[i], f, {"center", "radius"});
        a.balls.push_back({point(require(b[i], f, "center"), join(f, "center"), n),
                           positive(require(b[i], f, "radius"), join(f, "radius"))});
      }
    }
    if (j.contains("battery")) {
      allow_keys(j["battery"], "analysis.battery", {"center", "scales"});
      const Json& b = j["battery"];
      a.battery_center = point(require(b, "analysis.battery", "center"), "analysis.battery.center", n);
      a.battery_scales = numbers(require(b, "analysis.battery", "scales"), "analysis.battery.scales");
    }
    if (j.contains("decay_region")) {
      const Json& d = j["decay_region"];
      allow_keys(d, "analysis.decay_region", {"center", "radius"});
      a.decay_region = Disc{point(require(d, "analysis.decay_region", "center"),
                                  "analysis.decay_region.center", n),
                            positive(require(d, "analysis.decay_region", "radius"),
                                     "analysis.decay_region.radius")};
    }
    if (j.contains("interior")) {
      const Json& d = j["interior"];
      allow_keys(d, "analysis.interior", {"points", "radii"});
      a.interior_points = points(require(d, "analysis.interior", "points"), "analysis.interior.points", n + 1);
      a.interior_radii = radii_spec(require(d, "analysis.interior", "radii"), "analysis.interior.radii");
    }
    if (j.contains("corollary")) {
      const Json& c = j["corollary"];
      allow_keys(c, "analysis.corollary", {"R", "centers", "samples"});
      a.corollary_R = positive(require(c, "analysis.corollary", "R"), "analysis.corollary.R");
      a.corollary_centers = points(require(c, "analysis.corollary", "centers"), "analysis.corollary.centers", n);
      if (c.contains("samples")) a.corollary_samples = integer(c["samples"], "analysis.corollary.samples", 1);
    }
  }

  const double r_max = a.radii.list.empty() ? a.radii.max : a.radii.list.back();
  for (std::size_t i = 0; i < a.centers.size(); ++i) {
    check_face_point(grid, a.centers[i], at("analysis.centers", i));
    check_radii(grid, a.centers[i], r_max, at("analysis.centers", i));
  }
  if (a.concentration_radius < 4.0 * cfg.grid.h - 1e-12) {
    throw ConfigError("analysis.concentration_radius", "must be at least 4h to be resolvable");
  }
  for (std::size_t i = 0; i < a.balls.size(); ++i) {
    check_region(grid, a.balls[i], at("analysis.balls", i));
  }
  for (std::size_t i = 0; i < a.battery_scales.size(); ++i) {
    if (!(a.battery_scales[i] > 0.0)) throw ConfigError(at("analysis.battery.scales", i), "must be positive");
  }
  if (a.decay_region) check_region(grid, *a.decay_region, "analysis.decay_region");
  for (std::size_t i = 0; i < a.interior_points.size(); ++i) {
    const double r = a.interior_radii.list.empty() ? a.interior_radii.max : a.interior_radii.list.back();
    check_region(grid, Ball{a.interior_points[i], r}, at("analysis.interior.points", i));
  }
  if (a.corollary_R > 0.0) {
    check_radii(grid, {0, 0, 0}, a.corollary_R, "analysis.corollary.R");
    for (std::size_t i = 0; i < a.corollary_centers.size(); ++i) {
      if (!(distance(a.corollary_centers[i], {0, 0, 0}) < 0.5 * a.corollary_R)) {
        throw ConfigError(at("analysis.corollary.centers", i), "needs |x| < R/2");
      }
    }
  }
  return a;
}

ValidatePlan validate_plan(const Json& j) {
  ValidatePlan v;
  if (j.is_null()) return v;
  allow_keys(j, "validate", {"h", "epsilon", "tol", "min_order", "min_identity_rate",
                             "min_variation_rate", "radii", "battery"});
  if (j.contains("h")) {
    v.spacings = numbers(j["h"], "validate.h");
    if (v.spacings.size() < 2) throw ConfigError("validate.h", "needs at least two spacings");
    for (std::size_t i = 0; i < v.spacings.size(); ++i) {
      if (!(v.spacings[i] > 0.0)) throw ConfigError(at("validate.h", i), "must be positive");
    }
  }
  if (j.contains("epsilon")) v.epsilon = positive(j["epsilon"], "validate.epsilon");
  if (j.contains("tol")) v.tol = positive(j["tol"], "validate.tol");
  if (j.contains("min_order")) v.min_order = number(j["min_order"], "validate.min_order");
  if (j.contains("min_identity_rate")) v.min_identity_rate = number(j["min_identity_rate"], "validate.min_identity_rate");
  if (j.contains("min_variation_rate")) v.min_variation_rate = number(j["min_variation_rate"], "validate.min_variation_rate");
  if (j.contains("radii")) v.radii = radii_spec(j["radii"], "validate.radii");
  if (j.contains("battery")) {
    allow_keys(j["battery"], "validate.battery", {"center", "scales"});
    const auto c = numbers(require(j["battery"], "validate.battery", "center"), "validate.battery.center");
    if (c.empty()) throw ConfigError("validate.battery.center", "needs coordinates");
    v.battery_center = {c[0], c.size() > 1 ? c[1] : 0.0, 0.0};
    v.battery_scales = numbers(require(j["battery"], "validate.battery", "scales"), "validate.battery.scales");
  }
  for (double h : v.spacings) {
    if (v.epsilon < 2.0 * h) {
      throw ConfigError("validate.epsilon", "eps = " + show(v.epsilon) +
                                                " violates the eps >= 2h guard (h = " + show(h) + ")");
    }
  }
  return v;
}

}  // namespace

ScenarioConfig parse_config(const Json& j) {
  allow_keys(j, "", {"grid", "potential", "scenario", "epsilons", "solver", "analysis", "validate",
                     "output", "seed", "workers"});
  ScenarioConfig cfg;
  cfg.grid = grid_spec(require(j, "", "grid"));
  std::shared_ptr<const Grid> grid;
  try {
    grid = std::make_shared<const Grid>(cfg.grid);
  } catch (const GeometryError& e) {
    throw ConfigError("grid", e.what());
  }
  if (j.contains("potential")) {
    try {
      cfg.potential = potential_from_string(text(j["potential"], "potential"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("potential", e.what());
    }
  }
  cfg.scenario = scenario(require(j, "", "scenario"));
  cfg.epsilons = numbers(require(j, "", "epsilons"), "epsilons");
  if (cfg.epsilons.empty()) throw ConfigError("epsilons", "needs at least one value");
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
    const double e = cfg.epsilons[i];
    if (!(e > 0.0)) throw ConfigError(at("epsilons", i), "must be positive");
    if (i && !(e < cfg.epsilons[i - 1])) throw ConfigError(at("epsilons", i), "must be strictly decreasing");
    if (e < 2.0 * cfg.grid.h) {
      throw ConfigError(at("epsilons", i), "eps = " + show(e) + " violates the eps >= 2h guard (h = " +
                                               show(cfg.grid.h) + ")");
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("workers")) cfg.workers = integer(j["workers"], "workers", 1);
  if (j.contains("output")) cfg.output = text(j["output"], "output");
  cfg.solver = solver_params(j.contains("solver") ? j["solver"] : Json());
  cfg.analysis = analysis(j.contains("analysis") ? j["analysis"] : Json(), cfg, *grid);
  cfg.validate = validate_plan(j.contains("validate") ? j["validate"] : Json());
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

Field scenario_data(const Grid& grid, const Scenario& scenario, double epsilon) {
  switch (scenario.kind) {
    case ScenarioKind::Constant:
      return two_phase_data(grid, ConstantProfile{scenario.value});
    case ScenarioKind::TwoPhase:
      return two_phase_data(grid, StepProfile{});
    case ScenarioKind::LayerTrace:
      return two_phase_data(grid, LayerTraceProfile{scenario.layer_epsilon.value_or(epsilon)});
  }
  throw std::logic_error("unhandled scenario");
}

}  // namespace brlab::tools
