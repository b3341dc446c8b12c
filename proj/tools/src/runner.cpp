#include "brlab/tools/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "brlab/concentration.hpp"
#include "brlab/energy.hpp"
#include "brlab/varifold.hpp"

namespace brlab::tools {

namespace fs = std::filesystem;

void apply_overrides(ScenarioConfig& cfg, const RunOptions& opts) {
  if (opts.workers) {
    if (*opts.workers < 1) throw ConfigError("--workers", "must be at least 1");
    cfg.workers = *opts.workers;
  }
  if (opts.seed) cfg.seed = *opts.seed;
  cfg.analysis.calibration.seed = cfg.seed;
}

std::vector<Solution> solve_members(const ScenarioConfig& cfg, const std::vector<double>& epsilons,
                                    int workers) {
  auto grid = std::make_shared<const Grid>(cfg.grid);
  std::vector<std::optional<Solution>> slots(epsilons.size());
  std::vector<std::exception_ptr> errors(epsilons.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < epsilons.size(); i = next++) {
      try {
        const Field data = scenario_data(*grid, cfg.scenario, epsilons[i]);
        slots[i] = solve(grid, epsilons[i], cfg.potential, data, std::nullopt, cfg.solver);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int k = std::clamp(workers, 1, static_cast<int>(epsilons.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < k; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<Solution> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

namespace {

Json point_json(const Point& p, int dims) {
  Json a = Json::array();
  for (int i = 0; i < dims; ++i) a.push_back(p[i]);
  return a;
}

Json header(const std::string& command, const ScenarioConfig& cfg) {
  Json j;
  j["schema_version"] = report_schema_version();
  j["command"] = command;
  j["status"] = "ok";
  Json c;
  c["n"] = cfg.grid.n;
  c["h"] = cfg.grid.h;
  c["half_widths"] = cfg.grid.half_widths;
  c["height"] = cfg.grid.height;
  c["potential"] = to_string(cfg.potential);
  c["scenario"] = to_string(cfg.scenario.kind);
  c["epsilons"] = cfg.epsilons;
  c["tol"] = cfg.solver.tol;
  c["seed"] = cfg.seed;
  j["config"] = c;
  return j;
}

Json member_json(const Solution& s) {
  const EnergyBreakdown e = energy(s, region_weights(s.mesh(), WholeDomain{}));
  Json m;
  m["epsilon"] = s.epsilon;
  m["converged"] = s.converged;
  m["sweeps"] = s.sweeps_used;
  m["final_residual"] = finite_or_null(s.final_residual);
  m["max_abs"] = finite_or_null(s.max_abs);
  m["dirichlet"] = e.dirichlet;
  m["potential"] = e.potential;
  m["total"] = e.total;
  return m;
}

Table members_table(const std::vector<Solution>& members) {
  Table t{{"epsilon", "converged", "sweeps", "final_residual", "dirichlet", "potential", "total"}, {}};
  for (const auto& s : members) {
    const EnergyBreakdown e = energy(s, region_weights(s.mesh(), WholeDomain{}));
    t.rows.push_back({s.epsilon, s.converged ? 1.0 : 0.0, static_cast<double>(s.sweeps_used),
                      s.final_residual, e.dirichlet, e.potential, e.total});
  }
  return t;
}

Table face_trace_table(const std::vector<Solution>& members) {
  const Grid& grid = members.front().mesh();
  Table t;
  for (int a = 0; a < grid.n(); ++a) t.columns.push_back("x" + std::to_string(a + 1));
  for (std::size_t i = 0; i < members.size(); ++i) t.columns.push_back("u" + std::to_string(i));
  for (auto idx : grid.face_nodes()) {
    const Point p = grid.position(idx);
    std::vector<double> row(p.begin(), p.begin() + grid.n());
    for (const auto& s : members) row.push_back(s.u[idx]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_report(const fs::path& dir, const Json& report) {
  write_atomic(dir / "report.json", dump_json(report));
}

bool all_converged(const std::vector<Solution>& members) {
  return std::all_of(members.begin(), members.end(), [](const Solution& s) { return s.converged; });
}

void log_members(std::ostream& log, const std::vector<Solution>& members) {
  for (const auto& s : members) {
    log << "eps " << s.epsilon << ": " << (s.converged ? "converged" : "NOT converged") << " after "
        << s.sweeps_used << " sweeps, residual " << s.final_residual << "\n";
  }
}

ScenarioConfig load(const RunOptions& opts) {
  if (!opts.config) throw ConfigError("--config", "a config file is required");
  ScenarioConfig cfg = load_config(*opts.config);
  apply_overrides(cfg, opts);
  return cfg;
}

/// Shared driver for solve and sweep.
int solve_and_write(const RunOptions& opts, std::ostream& log, const std::string& command,
                    bool all_members) {
  const ScenarioConfig cfg = load(opts);
  const fs::path dir = resolve_out_dir(opts.out, cfg.output);
  std::vector<double> eps = cfg.epsilons;
  if (!all_members) eps.resize(1);
  const auto members = solve_members(cfg, eps, cfg.workers);
  log_members(log, members);

  Json report = header(command, cfg);
  report["config"]["epsilons"] = eps;
  Json ms = Json::array();
  for (const auto& s : members) ms.push_back(member_json(s));
  report["members"] = ms;
  write_table(dir, "members", members_table(members));
  write_table(dir, "face_trace", face_trace_table(members));
  if (!all_members) {
    const Solution& s = members.front();
    const Grid& grid = s.mesh();
    Table field;
    for (int a = 0; a <= grid.n(); ++a) {
      field.columns.push_back(a == grid.n() ? "y" : "x" + std::to_string(a + 1));
    }
    field.columns.push_back("u");
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
      const Point p = grid.position(idx);
      std::vector<double> row(p.begin(), p.begin() + grid.dim());
      row.push_back(s.u[idx]);
      field.rows.push_back(std::move(row));
    }
    write_table(dir, "field", field);
  }
  const bool ok = all_converged(members);
  if (!ok) report["status"] = "solver_failure";
  write_report(dir, report);
  log << "wrote " << (dir / "report.json").string() << "\n";
  return ok ? kOk : kSolverFailure;
}

}  // namespace

Json analyze_members(const ScenarioConfig& cfg, const std::vector<Solution>& members,
                     const fs::path& dir) {
  const AnalysisPlan& plan = cfg.analysis;
  const Grid& grid = members.front().mesh();
  const int n = grid.n();
  const EpsFamily family(members);
  Json out;

  out["e0"] = family.e0();
  out["energy_window"] = family.energy_window();

  // Monotonicity profiles, one file per center.
  const std::vector<double> radii = plan.radii.values();
  Json mono = Json::array();
  for (std::size_t c = 0; c < plan.centers.size(); ++c) {
    const Point& x = plan.centers[c];
    Table t{{"epsilon", "radius", "scaled_energy", "term_sphere", "term_disc", "identity_gap"}, {}};
    Json entry;
    entry["center"] = point_json(x, n);
    Json per = Json::array();
    for (std::size_t i = 0; i < family.size(); ++i) {
      const Solution& s = family.members()[i];
      const EnergyMeasure& m = family.measure(i);
      const ScaledEnergyProfile prof = monotonicity_profile(s, m, x, radii);
      double max_gap = 0.0;
      for (std::size_t k = 0; k < radii.size(); ++k) {
        t.rows.push_back({s.epsilon, radii[k], prof.scaled[k], prof.term_sphere[k], prof.term_disc[k],
                          prof.identity_gap(k)});
        max_gap = std::max(max_gap, std::abs(prof.identity_gap(k)));
      }
      const double span = prof.scaled.back() - prof.scaled.front();
      Json r;
      r["epsilon"] = s.epsilon;
      r["max_violation"] = prof.max_violation();
      r["violation_tolerance"] = 1e-3 * m.total();
      r["nondecreasing"] = prof.max_violation() <= 1e-3 * m.total();
      r["max_identity_gap"] = max_gap;
      r["relative_identity_gap"] =
          finite_or_null(span > 0.0 ? std::abs(prof.identity_gap(radii.size() - 1)) / span : NAN);
      per.push_back(r);
    }
    entry["members"] = per;
    mono.push_back(entry);
    write_table(dir, "monotonicity_c" + std::to_string(c), t);
  }
  out["monotonicity"] = mono;

  // Threshold.
  Json eta;
  double eta0 = 0.0;
  if (plan.eta0) {
    eta0 = *plan.eta0;
    eta["source"] = "config";
  } else {
    const Calibration cal = calibrate_eta0(plan.calibration);
    eta0 = cal.eta0;
    eta["source"] = "calibrated";
    eta["min_failing_energy"] = finite_or_null(cal.min_failing_energy);
    eta["samples"] = plan.calibration.samples;
    eta["seed"] = plan.calibration.seed;
    Table t{{"shift", "scaled_energy", "min_abs"}, {}};
    for (const auto& tr : cal.trials) {
      t.rows.push_back({tr.shift, tr.check.scaled_energy, tr.check.min_abs});
    }
    write_table(dir, "calibration", t);
  }
  eta["value"] = eta0;
  out["eta0"] = eta;

  // Concentration set.
  const ConcentrationReport conc = concentration_set(family, plan.concentration_radius, eta0);
  const auto zeros = face_zero_set(grid, family.smallest().u);
  {
    Json c;
    c["r"] = conc.r;
    c["epsilon"] = conc.epsilon;
    c["size"] = conc.sigma_nodes.size();
    c["nested"] = conc.nested;
    c["covering_constant"] = conc.covering_constant;
    c["zero_set_size"] = zeros.size();
    c["hausdorff_to_zero_set"] = finite_or_null(hausdorff_distance(conc.sigma_points, zeros));
    Table t;
    for (int a = 0; a < n; ++a) t.columns.push_back("x" + std::to_string(a + 1));
    t.columns.push_back("theta");
    for (std::size_t i = 0; i < conc.sigma_points.size(); ++i) {
      std::vector<double> row(conc.sigma_points[i].begin(), conc.sigma_points[i].begin() + n);
      row.push_back(conc.theta[i]);
      t.rows.push_back(std::move(row));
    }
    write_table(dir, "sigma", t);
    out["concentration"] = c;
  }

  // Densities at the centers for the smallest member.
  {
    Table t{{"center", "radius", "theta"}, {}};
    for (std::size_t c = 0; c < plan.centers.size(); ++c) {
      const DensityProfile d = density_profile(family.smallest_measure(), plan.centers[c], radii);
      for (std::size_t k = 0; k < d.radii.size(); ++k) {
        t.rows.push_back({static_cast<double>(c), d.radii[k], d.theta[k]});
      }
    }
    write_table(dir, "density", t);
  }

  if (!plan.interior_points.empty()) {
    Json arr = Json::array();
    const auto iradii = plan.interior_radii.values();
    for (const Point& x : plan.interior_points) {
      const InteriorDecay d = interior_density_check(family, x, iradii);
      Json e;
      e["point"] = point_json(x, n + 1);
      e["exact_zero"] = d.exact_zero;
      e["beta"] = finite_or_null(d.beta);
      arr.push_back(e);
    }
    out["interior_density"] = arr;
  }

  if (plan.decay_region) {
    Json d;
    d["center"] = point_json(plan.decay_region->center, n);
    d["radius"] = plan.decay_region->radius;
    try {
      const PotentialDecay pd = potential_decay(family, *plan.decay_region, conc.sigma_points);
      d["values"] = pd.values;
      d["slope"] = finite_or_null(pd.slope);
      Table t{{"epsilon", "potential_energy"}, {}};
      for (std::size_t i = 0; i < pd.values.size(); ++i) t.rows.push_back({pd.epsilons[i], pd.values[i]});
      write_table(dir, "potential_decay", t);
    } catch (const std::invalid_argument& e) {
      d["skipped"] = e.what();
    }
    out["potential_decay"] = d;
  }

  // Limit field.
  const LimitField limit = limit_field(family);
  {
    Json l;
    l["provenance_epsilon"] = limit.provenance_epsilon;
    Json comps = Json::array();
    for (const auto& comp : limit_face_components(limit, conc.sigma_points, plan.concentration_radius)) {
      Json c;
      c["nodes"] = comp.nodes.size();
      c["mean_abs"] = comp.mean_abs;
      c["sign_constant"] = comp.sign_constant;
      c["sign"] = comp.sign;
      comps.push_back(c);
    }
    l["face_components"] = comps;
    out["limit"] = l;
  }

  if (!plan.balls.empty()) {
    if (family.size() >= 3) {
      const auto defects = defect_measure(family, plan.balls);
      const auto parts = decompose(family, limit, plan.balls);
      Json arr = Json::array();
      for (std::size_t b = 0; b < plan.balls.size(); ++b) {
        Json e;
        e["center"] = point_json(plan.balls[b].center, n);
        e["radius"] = plan.balls[b].radius;
        e["energy_mass"] = defects[b].energy_mass;
        e["limit_dirichlet"] = defects[b].limit_dirichlet;
        e["defect"] = defects[b].defect;
        e["varifold_mass"] = parts[b].varifold_mass;
        arr.push_back(e);
      }
      out["defect"] = arr;
    } else {
      out["defect"] = Json{{"skipped", "needs at least 3 members"}};
    }
  }

  // Varifold checks and stationarity.
  {
    std::vector<TestField> battery;
    if (!plan.battery_scales.empty()) battery = bump_battery(grid, plan.battery_center, plan.battery_scales);
    Json arr = Json::array();
    Table t{{"epsilon", "mass", "raw", "combined"}, {}};
    std::vector<double> eps, raw;
    for (std::size_t i = 0; i < family.size(); ++i) {
      const Solution& s = family.members()[i];
      const GeneralizedVarifold V = build_varifold(s);
      std::size_t trace_fail = 0, member_fail = 0;
      for (const auto& sample : V.samples) {
        if (std::abs(sample.T.trace() - (n - 1)) > 1e-12) ++trace_fail;
        if (!a_membership(sample.T, n - 1)) ++member_fail;
      }
      const double dir_energy = energy(family.measure(i), region_weights(grid, WholeDomain{})).dirichlet;
      Json e;
      e["epsilon"] = s.epsilon;
      e["samples"] = V.samples.size();
      e["mass"] = V.mass;
      e["dirichlet"] = dir_energy;
      e["trace_failures"] = trace_fail;
      e["membership_failures"] = member_fail;
      double r = NAN, c = NAN;
      if (!battery.empty()) {
        const StationarityResidual sr = stationarity_residual(V, s, battery);
        r = sr.raw;
        c = sr.combined;
        eps.push_back(s.epsilon);
        raw.push_back(r);
      }
      e["raw_residual"] = finite_or_null(r);
      e["combined_residual"] = finite_or_null(c);
      arr.push_back(e);
      t.rows.push_back({s.epsilon, V.mass, r, c});
    }
    Json v;
    v["members"] = arr;
    double slope = NAN;
    if (eps.size() >= 2 && std::all_of(raw.begin(), raw.end(), [](double x) { return x > 0.0; })) {
      slope = log_log_slope(eps, raw);
    }
    v["raw_slope"] = finite_or_null(slope);
    out["varifold"] = v;
    write_table(dir, "stationarity", t);
  }

  if (!conc.sigma_nodes.empty()) {
    const SigmaVarifold sv = sigma_varifold(grid, conc);
    Json s;
    s["label"] = sv.label;
    Json pts = Json::array();
    for (const auto& p : sv.points) {
      Json e;
      e["location"] = point_json(p.location, n);
      e["theta"] = p.theta;
      e["interior"] = p.interior;
      Json tan = Json::array();
      for (int a = 0; a < sv.points.front().tangent.rows(); ++a) {
        for (int b = 0; b < sv.points.front().tangent.cols(); ++b) tan.push_back(p.tangent(a, b));
      }
      e["tangent"] = tan;
      pts.push_back(e);
    }
    s["points"] = pts;
    out["sigma_varifold"] = s;
  }

  if (plan.corollary_R > 0.0) {
    Json c;
    c["R"] = plan.corollary_R;
    Json arr = Json::array();
    for (std::size_t i = 0; i < family.size(); ++i) {
      const double excess = scaled_energy_corollary_excess(family.measure(i), plan.corollary_R,
                                                           plan.corollary_centers, plan.corollary_samples);
      Json e;
      e["epsilon"] = family.members()[i].epsilon;
      e["excess"] = excess;
      e["tolerance"] = 1e-3 * family.totals()[i];
      arr.push_back(e);
    }
    c["members"] = arr;
    out["corollary"] = c;
  }
  return out;
}

int run_solve(const RunOptions& opts, std::ostream& log) {
  return solve_and_write(opts, log, "solve", false);
}

int run_sweep(const RunOptions& opts, std::ostream& log) {
  return solve_and_write(opts, log, "sweep", true);
}

int run_analyze(const RunOptions& opts, std::ostream& log) {
  const ScenarioConfig cfg = load(opts);
  const fs::path dir = resolve_out_dir(opts.out, cfg.output);
  const auto members = solve_members(cfg, cfg.epsilons, cfg.workers);
  log_members(log, members);
  Json report = header("analyze", cfg);
  Json ms = Json::array();
  for (const auto& s : members) ms.push_back(member_json(s));
  report["members"] = ms;
  write_table(dir, "members", members_table(members));
  write_table(dir, "face_trace", face_trace_table(members));
  if (!all_converged(members)) {
    report["status"] = "solver_failure";
    write_report(dir, report);
    log << "solver failure; partial report written to " << (dir / "report.json").string() << "\n";
    return kSolverFailure;
  }
  const Json analysis = analyze_members(cfg, members, dir);
  for (const auto& [key, value] : analysis.items()) report[key] = value;
  write_report(dir, report);
  log << "wrote " << (dir / "report.json").string() << "\n";
  return kOk;
}

int run_validate(const RunOptions& opts, std::ostream& log) {
  const ScenarioConfig cfg = load(opts);
  if (cfg.potential != PotentialKind::PeierlsNabarro) {
    throw ConfigError("potential", "validate runs the exact-layer oracle and requires peierls_nabarro");
  }
  const ValidatePlan& plan = cfg.validate;
  const fs::path dir = resolve_out_dir(opts.out, cfg.output);
  SolveParams params = cfg.solver;
  params.tol = plan.tol;

  std::vector<double> hs, errors, gaps, variations;
  bool converged = true;
  Table t{{"h", "sweeps", "linf_error", "identity_gap", "variation_residual"}, {}};
  for (double h : plan.spacings) {
    GridSpec spec = cfg.grid;
    spec.h = h;
    auto grid = std::make_shared<const Grid>(spec);
    const Field data = two_phase_data(*grid, LayerTraceProfile{plan.epsilon});
    const Solution s = solve(grid, plan.epsilon, PotentialKind::PeierlsNabarro, data, std::nullopt, params);
    if (!s.converged) {
      converged = false;
      log << "h " << h << ": NOT converged after " << s.sweeps_used << " sweeps (residual "
          << s.final_residual << ")\n";
      continue;
    }
    const Field exact = exact_layer(*grid, plan.epsilon);
    double err = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) err = std::max(err, std::abs(s.u[i] - exact[i]));
    const ScaledEnergyProfile prof = monotonicity_profile(s, Point{0, 0, 0}, plan.radii.values());
    double gap = 0.0;
    for (std::size_t k = 1; k < prof.radii.size(); ++k) gap = std::max(gap, std::abs(prof.identity_gap(k)));
    double var = 0.0;
    for (const auto& X : bump_battery(*grid, plan.battery_center, plan.battery_scales)) {
      var = std::max(var, std::abs(inner_variation_residual(s, X)));
    }
    hs.push_back(h);
    errors.push_back(err);
    gaps.push_back(gap);
    variations.push_back(var);
    t.rows.push_back({h, static_cast<double>(s.sweeps_used), err, gap, var});
    log << "h " << h << ": " << s.sweeps_used << " sweeps, Linf error " << err << ", identity gap "
        << gap << ", variation residual " << var << "\n";
  }
  write_table(dir, "validate", t);

  Json report = header("validate", cfg);
  Json checks = Json::array();
  bool ok = converged;
  auto check = [&](const std::string& name, double measured, double required) {
    const bool pass = std::isfinite(measured) && measured >= required;
    ok = ok && pass;
    log << (pass ? "PASS " : "FAIL ") << name << ": measured " << measured << ", required >= " << required
        << "\n";
    Json c;
    c["name"] = name;
    c["measured"] = finite_or_null(measured);
    c["required"] = required;
    c["pass"] = pass;
    checks.push_back(c);
  };
  Json conv;
  conv["name"] = "solver_convergence";
  conv["pass"] = converged;
  checks.push_back(conv);
  if (!converged) {
    log << "FAIL solver_convergence: at least one spacing did not converge\n";
  } else {
    auto rate = [&](const std::vector<double>& v) {
      const bool positive = std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
      return positive ? log_log_slope(hs, v) : NAN;
    };
    check("solver_order", rate(errors), plan.min_order);
    check("monotonicity_identity_rate", rate(gaps), plan.min_identity_rate);
    check("variation_identity_rate", rate(variations), plan.min_variation_rate);
  }
  report["checks"] = checks;
  if (!ok) report["status"] = "check_failed";
  write_report(dir, report);
  return ok ? kOk : kCheckFailed;
}

int run_report(const RunOptions& opts, std::ostream& log) {
  fs::path path;
  if (opts.report_path) {
    path = *opts.report_path;
  } else {
    std::optional<std::string> cfg_out;
    if (opts.config) cfg_out = load_config(*opts.config).output;
    path = resolve_out_dir(opts.out, cfg_out);
  }
  if (fs::is_directory(path)) path /= "report.json";
  const Json r = read_report(path);
  log << "report " << path.string() << "\n";
  log << "schema " << r["schema_version"].get<std::string>() << ", command "
      << r.value("command", std::string("?")) << ", status " << r.value("status", std::string("?"))
      << "\n";
  if (r.contains("members")) {
    for (const auto& m : r["members"]) {
      log << "  eps " << m["epsilon"].dump() << "  converged " << m["converged"].dump() << "  sweeps "
          << m["sweeps"].dump() << "  E " << m["total"].dump() << "\n";
    }
  }
  if (r.contains("eta0")) log << "eta0 " << r["eta0"]["value"].dump() << " (" << r["eta0"]["source"].get<std::string>() << ")\n";
  if (r.contains("concentration")) {
    const auto& c = r["concentration"];
    log << "Sigma: " << c["size"].dump() << " nodes at r = " << c["r"].dump() << ", nested "
        << c["nested"].dump() << ", Hausdorff to zero set " << c["hausdorff_to_zero_set"].dump() << "\n";
  }
  if (r.contains("potential_decay") && r["potential_decay"].contains("slope")) {
    log << "potential decay slope " << r["potential_decay"]["slope"].dump() << "\n";
  }
  if (r.contains("varifold")) log << "stationarity raw slope " << r["varifold"]["raw_slope"].dump() << "\n";
  if (r.contains("checks")) {
    for (const auto& c : r["checks"]) {
      log << "  " << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << "\n";
    }
  }
  const std::string status = r.value("status", std::string("ok"));
  if (status == "solver_failure") return kSolverFailure;
  if (status == "check_failed") return kCheckFailed;
  return kOk;
}

}  // namespace brlab::tools
