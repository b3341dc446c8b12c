#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "brlab/concentration.hpp"
#include "brlab/energy.hpp"
#include "brlab/solver.hpp"
#include "brlab/varifold.hpp"
#include "brlab/tools/config.hpp"
#include "brlab/tools/output.hpp"
#include "brlab/tools/runner.hpp"

#ifndef BRLAB_SOURCE_DIR
#define BRLAB_SOURCE_DIR "."
#endif

using namespace brlab;
using brlab::tools::Json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  std::printf("%s criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

struct Fixture {
  std::string name;
  const Solution* sol;
  Point battery_center;
  std::vector<double> battery_scales;
};

Point face_point(const Json& j, int n) {
  Point p{0, 0, 0};
  if (j.is_number()) {
    p[0] = j.get<double>();
    return p;
  }
  for (int a = 0; a < n; ++a) p[a] = j.at(a).get<double>();
  return p;
}

std::vector<double> numbers(const Json& j) { return j.get<std::vector<double>>(); }

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double battery_residual(const Solution& s, const Point& c, const std::vector<double>& scales) {
  double worst = 0.0;
  for (const TestField& X : bump_battery(s.mesh(), c, scales)) {
    worst = std::max(worst, std::abs(inner_variation_residual(s, X)) / X.c1_norm(s.mesh()));
  }
  return worst;
}

Solution solve_two_phase(double h, const GridSpec& base, double eps, const SolveParams& p) {
  GridSpec spec = base;
  spec.h = h;
  auto g = std::make_shared<const Grid>(spec);
  return solve(g, eps, PotentialKind::QuarticDoubleWell, two_phase_data(*g, StepProfile{}),
               std::nullopt, p);
}

ScaledEnergyProfile interface_profile(const Solution& s, const Json& t) {
  const auto zeros = face_zero_set(s.mesh(), s.u);
  if (zeros.size() != 1) throw std::runtime_error("expected a single interface point");
  const double h = s.mesh().h();
  const auto radii = log_radii(t["r_min_in_h"].get<double>() * h, t["r_max"].get<double>(),
                               t["radii_count"].get<int>());
  return monotonicity_profile(s, zeros[0], radii);
}

double max_abs_gap(const ScaledEnergyProfile& p) {
  double m = 0.0;
  for (std::size_t k = 0; k < p.radii.size(); ++k) m = std::max(m, std::abs(p.identity_gap(k)));
  return m;
}

double relative_gap(const ScaledEnergyProfile& p) {
  const std::size_t last = p.radii.size() - 1;
  return std::abs(p.identity_gap(last)) / std::abs(p.scaled[last] - p.scaled[0]);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = BRLAB_SOURCE_DIR;
  const fs::path tol_path = argc > 1 ? fs::path(argv[1]) : root / "tests/acceptance/tolerances.json";
  Json tol;
  {
    std::ifstream in(tol_path);
    if (!in) {
      std::fprintf(stderr, "cannot read %s\n", tol_path.c_str());
      return 2;
    }
    tol = Json::parse(in);
  }

  tools::ScenarioConfig canon = tools::load_config(root / tol["fixtures"]["canonical"].get<std::string>());
  tools::ScenarioConfig quad2 = tools::load_config(root / tol["fixtures"]["n2"].get<std::string>());
  canon.analysis.calibration.seed = canon.seed;

  // Oracle solves (criterion 1), reused as fixtures below.
  const Json& t1 = tol["oracle"];
  const double oracle_eps = t1["epsilon"].get<double>();
  std::vector<Solution> oracle;
  std::vector<double> oracle_err;
  {
    const auto t0 = Clock::now();
    SolveParams p;
    p.tol = t1["solver_tol"].get<double>();
    bool converged = true;
    for (double h : numbers(t1["spacings"])) {
      auto g = std::make_shared<const Grid>(GridSpec{1, h, {1.0}, 1.0});
      oracle.push_back(solve(g, oracle_eps, PotentialKind::PeierlsNabarro,
                             two_phase_data(*g, LayerTraceProfile{oracle_eps}), std::nullopt, p));
      converged = converged && oracle.back().converged;
      oracle_err.push_back(max_abs_diff(oracle.back().u, exact_layer(*g, oracle_eps)));
    }
    const double elapsed = seconds_since(t0);
    double min_order = INFINITY;
    std::string orders;
    for (std::size_t k = 1; k < oracle_err.size(); ++k) {
      const double o = std::log2(oracle_err[k - 1] / oracle_err[k]);
      min_order = std::min(min_order, o);
      orders += fmt("%s%.3f", k > 1 ? ", " : "", o);
    }
    const bool pass = converged && min_order >= t1["min_order"].get<double>() &&
                      elapsed <= t1["max_seconds"].get<double>();
    report(1, "oracle accuracy",
           {pass, fmt("errors %.3e %.3e %.3e, orders [%s] >= %.2f, %.1f s <= %.0f s", oracle_err[0],
                      oracle_err[1], oracle_err[2], orders.c_str(), t1["min_order"].get<double>(),
                      elapsed, t1["max_seconds"].get<double>())});
  }

  // Canonical quartic family.
  const auto fam_t0 = Clock::now();
  std::vector<Solution> canon_members = tools::solve_members(canon, canon.epsilons, canon.workers);
  const EpsFamily family(canon_members);
  std::printf("info: canonical family solved in %.1f s, energy window %.1f%%\n",
              seconds_since(fam_t0), 100.0 * family.energy_window());

  // Criterion 2.
  {
    const Json& t = tol["monotonicity"];
    const double eps = t["epsilon"].get<double>();
    const auto t0 = Clock::now();
    const Solution at_h = solve_two_phase(canon.grid.h, canon.grid, eps, canon.solver);
    const Solution at_h2 = solve_two_phase(0.5 * canon.grid.h, canon.grid, eps, canon.solver);
    const ScaledEnergyProfile p1 = interface_profile(at_h, t);
    const ScaledEnergyProfile p2 = interface_profile(at_h2, t);
    const double elapsed = seconds_since(t0);
    const double e_total = energy_measure(at_h).total();
    const double viol = p1.max_violation();
    const double rel1 = relative_gap(p1), rel2 = relative_gap(p2);
    const double g1 = max_abs_gap(p1), g2 = max_abs_gap(p2);
    const bool pass = at_h.converged && at_h2.converged &&
                      viol <= t["violation_fraction"].get<double>() * e_total &&
                      rel1 <= t["identity_relative"].get<double>() && g2 < g1 &&
                      elapsed <= t["max_seconds"].get<double>();
    report(2, "monotonicity",
           {pass, fmt("max drop %.3e <= %.3e, identity gap %.2f%% at h, %.2f%% at h/2, max |gap| "
                      "%.3e -> %.3e, %.1f s",
                      viol, t["violation_fraction"].get<double>() * e_total, 100 * rel1, 100 * rel2,
                      g1, g2, elapsed)});
  }

  // Criterion 3.
  {
    const Json& t = tol["inner_variation"];
    const Point c{t["battery_center"].get<double>(), 0, 0};
    const auto scales = numbers(t["battery_scales"]);
    const double r128 = battery_residual(oracle[1], c, scales);
    const double r256 = battery_residual(oracle[2], c, scales);
    const double rate = std::log2(r128 / r256);
    const bool pass = r128 <= t["max_at_h128"].get<double>() && r256 <= t["max_at_h256"].get<double>() &&
                      rate >= t["min_rate"].get<double>();
    report(3, "inner-variation identity",
           {pass, fmt("residual %.3e at h=1/128, %.3e at h=1/256, rate %.2f", r128, r256, rate)});
  }

  // Criterion 4.
  double eta0 = 0.0;
  {
    const Json& t = tol["clearing_out"];
    const Calibration cal = calibrate_eta0(canon.analysis.calibration);
    eta0 = cal.eta0;
    CalibrationSpec indep = canon.analysis.calibration;
    indep.seed = t["independent_seed"].get<std::uint64_t>();
    const auto trials = clearing_out_trials(indep);
    int admitted = 0, failed = 0, admitted_cal = 0, failed_cal = 0;
    for (const auto& tr : trials) {
      if (tr.check.scaled_energy > eta0) continue;
      ++admitted;
      if (!tr.check.conclusion_holds()) ++failed;
    }
    for (const auto& tr : cal.trials) {
      if (tr.check.scaled_energy > eta0) continue;
      ++admitted_cal;
      if (!tr.check.conclusion_holds()) ++failed_cal;
    }
    const int max_fail = t["max_failures"].get<int>();
    const bool pass = failed <= max_fail && failed_cal <= max_fail && admitted > 0 && admitted_cal > 0;
    report(4, "clearing-out",
           {pass, fmt("eta0 %.5f (seed %llu), %d/%zu calibration trials admitted with %d failures, "
                      "%d/%zu independent trials (seed %llu) admitted with %d failures",
                      eta0, static_cast<unsigned long long>(canon.analysis.calibration.seed),
                      admitted_cal, cal.trials.size(), failed_cal, admitted, trials.size(),
                      static_cast<unsigned long long>(indep.seed), failed)});
  }

  // n = 2 fixture family.
  std::vector<Solution> n2_members = tools::solve_members(quad2, quad2.epsilons, quad2.workers);

  std::vector<Fixture> fixtures;
  for (const auto& s : canon_members) {
    fixtures.push_back({fmt("quartic eps=%g", s.epsilon), &s, canon.analysis.battery_center,
                        canon.analysis.battery_scales});
  }
  {
    const Json& t = tol["inner_variation"];
    for (const auto& s : oracle) {
      fixtures.push_back({fmt("oracle h=%g", s.mesh().h()), &s, Point{t["battery_center"].get<double>(), 0, 0},
                          numbers(t["battery_scales"])});
    }
  }
  for (const auto& s : n2_members) {
    fixtures.push_back({fmt("n2 eps=%g", s.epsilon), &s, quad2.analysis.battery_center,
                        quad2.analysis.battery_scales});
  }

  // Criterion 5.
  {
    const Json& t = tol["corollary"];
    const double R = t["R"].get<double>();
    const int samples = t["samples"].get<int>();
    std::vector<Point> c1, c2;
    for (const auto& c : t["centers_n1"]) c1.push_back(face_point(c, 1));
    for (const auto& c : t["centers_n2"]) c2.push_back(face_point(c, 2));
    bool pass = true;
    double worst = -INFINITY;
    std::string worst_name;
    for (const auto& f : fixtures) {
      const EnergyMeasure m = energy_measure(*f.sol);
      const double excess = scaled_energy_corollary_excess(m, R, f.sol->mesh().n() == 1 ? c1 : c2, samples);
      const double slack = t["slack_fraction"].get<double>() * m.total();
      pass = pass && f.sol->converged && excess <= slack;
      if (excess - slack > worst) {
        worst = excess - slack;
        worst_name = f.name;
      }
    }
    report(5, "scaled-energy corollary",
           {pass, fmt("%zu fixtures, largest excess over bound %.3e (%s)", fixtures.size(), worst,
                      worst_name.c_str())});
  }

  // Criterion 6.
  {
    const Json& t = tol["potential_decay"];
    const std::size_t k = t["members"].get<std::size_t>();
    const EpsFamily window(std::vector<Solution>(canon_members.begin(), canon_members.begin() + k));
    const Disc region{face_point(t["region"]["center"], 1), t["region"]["radius"].get<double>()};
    const auto zeros = face_zero_set(window.grid(), window.smallest().u);
    double dist = INFINITY;
    for (const auto& z : zeros) dist = std::min(dist, distance(z, region.center) - region.radius);
    const PotentialDecay pd = potential_decay(window, region, zeros);
    const bool pass = dist >= t["min_distance"].get<double>() && pd.slope >= t["slope_min"].get<double>() &&
                      pd.slope <= t["slope_max"].get<double>();
    report(6, "vanishing potential",
           {pass, fmt("slope %.3f over eps %g..%g, region %.2f from the interface, window %.1f%%", pd.slope,
                      pd.epsilons.front(), pd.epsilons.back(), dist, 100.0 * window.energy_window())});
  }

  // Criterion 7.
  ConcentrationReport conc;
  {
    const Json& t = tol["concentration"];
    const double r = t["r"].get<double>();
    conc = concentration_set(family, r, eta0);
    const auto zeros = face_zero_set(family.grid(), family.smallest().u);
    const double hd = conc.sigma_nodes.empty() ? INFINITY : hausdorff_distance(conc.sigma_points, zeros);
    const bool pass = !conc.sigma_nodes.empty() && hd <= t["hausdorff_in_r"].get<double>() * r && conc.nested;
    report(7, "concentration",
           {pass, fmt("|Sigma| = %zu nodes, Hausdorff %.4f <= %.2f, nested %s", conc.sigma_nodes.size(), hd,
                      t["hausdorff_in_r"].get<double>() * r, conc.nested ? "yes" : "no")});
  }

  // Criterion 8.
  {
    const Json& t = tol["defect"];
    std::vector<HalfBall> balls{{face_point(t["sigma_ball"]["center"], 1), t["sigma_ball"]["radius"].get<double>()}};
    double min_dist = INFINITY;
    for (const auto& b : t["far_balls"]) {
      balls.push_back({face_point(b["center"], 1), b["radius"].get<double>()});
      for (const auto& s : conc.sigma_points) {
        min_dist = std::min(min_dist, distance(s, balls.back().center) - balls.back().radius);
      }
    }
    const auto full = defect_measure(family, balls);
    const auto prev = defect_measure(family.without_smallest(), balls);
    const double change = std::abs(full[0].defect - prev[0].defect) / full[0].defect;
    double far = 0.0;
    for (std::size_t b = 1; b < full.size(); ++b) far = std::max(far, std::abs(full[b].defect));
    const double bound = t["far_fraction"].get<double>() * family.e0();
    const bool pass = min_dist >= t["min_distance"].get<double>() && far <= bound && full[0].defect > 0.0 &&
                      change <= t["stability"].get<double>();
    report(8, "defect locality",
           {pass, fmt("defect on Sigma ball %.4f (previous eps %.4f, change %.1f%%), far balls %.2e <= %.3e "
                      "at distance %.2f",
                      full[0].defect, prev[0].defect, 100 * change, far, bound, min_dist)});
  }

  // Criterion 9.
  {
    const Json& t = tol["varifold_algebra"];
    const double trace_tol = t["trace_tol"].get<double>();
    std::size_t samples = 0, bad = 0;
    double worst_mass = 0.0;
    for (const auto& f : fixtures) {
      const GeneralizedVarifold V = build_varifold(*f.sol);
      const int n = f.sol->mesh().n();
      for (const auto& s : V.samples) {
        ++samples;
        if (std::abs(s.T.trace() - (n - 1)) > trace_tol || !a_membership(s.T, n - 1)) ++bad;
      }
      const double dir = energy(energy_measure(*f.sol), region_weights(f.sol->mesh(), WholeDomain{})).dirichlet;
      const double massed = pair(V, [](const SymMatrix&) { return 1.0; });
      worst_mass = std::max(worst_mass, std::abs(massed - dir) / dir);
    }
    const bool pass = samples > 0 && bad == 0 && worst_mass <= t["mass_relative"].get<double>();
    report(9, "varifold algebra",
           {pass, fmt("%zu stress samples over %zu fixtures, %zu failures, mass error %.1e", samples,
                      fixtures.size(), bad, worst_mass)});
  }

  // Criterion 10.
  {
    const Json& t = tol["stationarity"];
    const double base = t["tol"].get<double>(), C = t["C"].get<double>();
    bool combined_ok = true;
    double worst_ratio = 0.0;
    std::string worst_name;
    for (const auto& f : fixtures) {
      const GeneralizedVarifold V = build_varifold(*f.sol);
      const auto battery = bump_battery(f.sol->mesh(), f.battery_center, f.battery_scales);
      const StationarityResidual r = stationarity_residual(V, *f.sol, battery);
      const double bound = base + C * f.sol->mesh().h();
      combined_ok = combined_ok && r.combined <= bound;
      if (r.combined / bound > worst_ratio) {
        worst_ratio = r.combined / bound;
        worst_name = f.name;
      }
    }
    std::vector<double> eps, raw;
    for (const auto& s : canon_members) {
      const auto battery = bump_battery(s.mesh(), canon.analysis.battery_center, canon.analysis.battery_scales);
      eps.push_back(s.epsilon);
      raw.push_back(stationarity_residual(build_varifold(s), s, battery).raw);
    }
    const double slope = log_log_slope(eps, raw);
    const bool pass = combined_ok && slope >= t["slope_min"].get<double>() && slope <= t["slope_max"].get<double>();
    report(10, "stationarity trend",
           {pass, fmt("combined residual at most %.2e of tol + C h (%s), raw residual slope %.3f in eps",
                      worst_ratio, worst_name.c_str(), slope)});
  }

  std::printf("%s: %d of 10 criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
