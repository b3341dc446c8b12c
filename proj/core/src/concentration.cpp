#include "brlab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <random>
#include <sstream>

namespace brlab {

EpsFamily::EpsFamily(std::vector<Solution> members) : members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("family: no members");
  const Grid& g = *members_.front().grid;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const Solution& s = members_[i];
    if (!s.converged) {
      std::ostringstream msg;
      msg << "family: member with eps = " << s.epsilon << " did not converge";
      throw std::invalid_argument(msg.str());
    }
    if (s.grid->size() != g.size() || s.grid->h() != g.h()) {
      throw std::invalid_argument("family: members must share one grid");
    }
    if (s.potential != members_.front().potential) {
      throw std::invalid_argument("family: members must share the potential");
    }
    if (i > 0 && !(s.epsilon < members_[i - 1].epsilon)) {
      throw std::invalid_argument("family: epsilon must be strictly decreasing");
    }
  }
  for (const Solution& s : members_) {
    measures_.push_back(energy_measure(s));
    totals_.push_back(measures_.back().total());
  }
  e0_ = *std::max_element(totals_.begin(), totals_.end());
}

double EpsFamily::energy_window() const noexcept {
  const auto [lo, hi] = std::minmax_element(totals_.begin(), totals_.end());
  return *hi > 0.0 ? (*hi - *lo) / *hi : 0.0;
}

EpsFamily EpsFamily::without_smallest() const {
  if (members_.size() < 2) throw std::invalid_argument("family: cannot drop the only member");
  return EpsFamily(std::vector<Solution>(members_.begin(), members_.end() - 1));
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("log_log_slope: need two or more matching samples");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument("log_log_slope: samples must be positive");
    }
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

DensityProfile density_profile(const EnergyMeasure& measure, const Point& x,
                               std::span<const double> radii) {
  const Grid& grid = *measure.grid;
  DensityProfile prof;
  prof.center = x;
  for (double r : radii) {
    const Region ball = region_weights(grid, HalfBall{x, r});
    prof.radii.push_back(r);
    prof.theta.push_back(energy(measure, ball).total * std::pow(r, 1 - grid.n()));
  }
  return prof;
}

InteriorDecay interior_density_check(const EnergyMeasure& measure, const Point& x,
                                     std::span<const double> radii) {
  const Grid& grid = *measure.grid;
  InteriorDecay out;
  out.center = x;
  for (double r : radii) {
    if (!(x[grid.n()] - r > 0.0)) {
      throw GeometryError("interior density: ball must stay above the reaction face");
    }
    const Region ball = region_weights(grid, Ball{x, r});
    out.radii.push_back(r);
    out.values.push_back(energy(measure, ball).total * std::pow(r, 1 - grid.n()));
  }
  out.exact_zero = std::all_of(out.values.begin(), out.values.end(),
                               [](double v) { return v == 0.0; });
  if (!out.exact_zero && out.radii.size() >= 2) out.beta = log_log_slope(out.radii, out.values);
  return out;
}

InteriorDecay interior_density_check(const EpsFamily& family, const Point& x,
                                     std::span<const double> radii) {
  return interior_density_check(family.smallest_measure(), x, radii);
}

std::vector<std::size_t> threshold_set(const EnergyMeasure& measure, double r, double eta0,
                                       std::optional<double> reach) {
  const Grid& grid = *measure.grid;
  const double scale = std::pow(r, 1 - grid.n());
  std::vector<std::size_t> out;
  for (auto idx : grid.face_nodes()) {
    const Point x = grid.position(idx);
    if (grid.distance_to_dirichlet(x) < reach.value_or(r) - 1e-9 * grid.h()) continue;
    const Region ball = region_weights(grid, HalfBall{x, r});
    if (scale * energy(measure, ball).total >= eta0) out.push_back(idx);
  }
  return out;
}

ConcentrationReport concentration_set(const EpsFamily& family, double r, double eta0) {
  const Grid& grid = family.grid();
  if (r < 4.0 * grid.h() - 1e-12) {
    throw std::invalid_argument("concentration set: r must be at least 4h");
  }
  if (!(eta0 > 0.0)) throw std::invalid_argument("concentration set: eta0 must be positive");
  const EnergyMeasure& mu = family.smallest_measure();
  ConcentrationReport rep;
  rep.eta0 = eta0;
  rep.r = r;
  rep.epsilon = family.smallest().epsilon;
  rep.e0 = family.e0();
  rep.sigma_nodes = threshold_set(mu, r, eta0);
  rep.sigma_half = threshold_set(mu, 0.5 * r, eta0, r);
  rep.nested = std::includes(rep.sigma_nodes.begin(), rep.sigma_nodes.end(),
                             rep.sigma_half.begin(), rep.sigma_half.end());
  const double scale = std::pow(r, 1 - grid.n());
  for (auto idx : rep.sigma_nodes) {
    const Point x = grid.position(idx);
    rep.sigma_points.push_back(x);
    rep.theta.push_back(scale * energy(mu, region_weights(grid, HalfBall{x, r})).total);
  }
  const double measure = static_cast<double>(rep.sigma_nodes.size()) * grid.face_cell_area();
  rep.covering_constant = rep.e0 > 0.0 ? measure / r * eta0 / rep.e0 : 0.0;
  return rep;
}

ClearingOut clearing_out_check(const Solution& sol, const EnergyMeasure& measure, const Point& x,
                               double R) {
  if (!(sol.epsilon < R)) throw std::invalid_argument("clearing out: requires eps < R");
  ClearingOut out;
  out.scaled_energy = scaled_energy(measure, x, R);
  const Region disc = region_weights(sol.mesh(), Disc{x, 0.5 * R});
  out.min_abs = std::numeric_limits<double>::infinity();
  for (auto idx : disc.face_cells) out.min_abs = std::min(out.min_abs, std::abs(sol.u[idx]));
  return out;
}

ClearingOut clearing_out_check(const Solution& sol, const Point& x, double R) {
  return clearing_out_check(sol, energy_measure(sol), x, R);
}

std::vector<CalibrationTrial> clearing_out_trials(const CalibrationSpec& spec) {
  if (spec.samples < 1) throw std::invalid_argument("calibration: need at least one sample");
  if (spec.epsilon * 16.0 > spec.R * (1.0 + 1e-12)) {
    throw std::invalid_argument("calibration: requires eps / R <= 1/16");
  }
  auto grid = std::make_shared<const Grid>(spec.grid);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> shift(-spec.shift_range, spec.shift_range);
  std::vector<CalibrationTrial> trials;
  trials.reserve(static_cast<std::size_t>(spec.samples));
  for (int s = 0; s < spec.samples; ++s) {
    const double a = spec.center[0] + shift(rng);
    Solution sol = Solution::from_field(grid, exact_layer(*grid, spec.epsilon, a), spec.epsilon,
                                        PotentialKind::PeierlsNabarro);
    trials.push_back({a, clearing_out_check(sol, spec.center, spec.R)});
  }
  return trials;
}

Calibration calibrate_eta0(const CalibrationSpec& spec) {
  Calibration cal;
  cal.trials = clearing_out_trials(spec);
  for (const auto& t : cal.trials) {
    if (!t.check.conclusion_holds()) {
      cal.min_failing_energy = std::min(cal.min_failing_energy, t.check.scaled_energy);
    }
  }
  bool found = false;
  for (const auto& t : cal.trials) {
    if (t.check.conclusion_holds() && t.check.scaled_energy < cal.min_failing_energy) {
      cal.eta0 = found ? std::max(cal.eta0, t.check.scaled_energy) : t.check.scaled_energy;
      found = true;
    }
  }
  if (!found || !(cal.eta0 > 0.0)) {
    throw std::runtime_error("calibration: no trial satisfies the clearing-out conclusion");
  }
  return cal;
}

PotentialDecay potential_decay(const EpsFamily& family, const Disc& region,
                               std::span<const Point> sigma) {
  const Grid& grid = family.grid();
  for (const Point& p : sigma) {
    if (distance(p, region.center) - region.radius < 4.0 * grid.h()) {
      throw std::invalid_argument("potential decay: region is closer than 4h to Sigma");
    }
  }
  const Region disc = region_weights(grid, region);
  PotentialDecay out;
  for (std::size_t i = 0; i < family.size(); ++i) {
    out.epsilons.push_back(family.members()[i].epsilon);
    out.values.push_back(energy(family.measure(i), disc).potential);
  }
  const bool positive =
      std::all_of(out.values.begin(), out.values.end(), [](double v) { return v > 0.0; });
  if (positive && out.values.size() >= 2) out.slope = log_log_slope(out.epsilons, out.values);
  return out;
}

LimitField limit_field(const EpsFamily& family) {
  const Solution& s = family.smallest();
  return LimitField{s.grid, s.u, s.epsilon, s.potential};
}

std::vector<FaceComponent> limit_face_components(const LimitField& limit,
                                                 std::span<const Point> sigma, double margin) {
  const Grid& grid = *limit.grid;
  std::vector<char> keep(grid.size(), 0);
  for (auto idx : grid.face_nodes()) {
    const Point p = grid.position(idx);
    bool far = true;
    for (const Point& s : sigma) {
      if (distance(p, s) <= margin) {
        far = false;
        break;
      }
    }
    keep[idx] = far ? 1 : 0;
  }
  std::vector<FaceComponent> comps;
  std::vector<char> seen(grid.size(), 0);
  for (auto start : grid.face_nodes()) {
    if (!keep[start] || seen[start]) continue;
    FaceComponent comp;
    std::deque<std::size_t> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
      const auto idx = queue.front();
      queue.pop_front();
      comp.nodes.push_back(idx);
      for (int a = 0; a < grid.n(); ++a) {
        for (int dir : {-1, 1}) {
          const auto nb = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) +
                                                   dir * grid.stride(a));
          if (grid.kind(nb) == NodeKind::ReactionFace && keep[nb] && !seen[nb]) {
            seen[nb] = 1;
            queue.push_back(nb);
          }
        }
      }
    }
    std::sort(comp.nodes.begin(), comp.nodes.end());
    double sum = 0.0;
    int pos = 0, neg = 0;
    for (auto idx : comp.nodes) {
      const double v = limit.u_star[idx];
      sum += std::abs(v);
      if (v > 0.0) ++pos;
      if (v < 0.0) ++neg;
    }
    comp.mean_abs = sum / static_cast<double>(comp.nodes.size());
    comp.sign_constant = pos == 0 || neg == 0;
    comp.sign = pos > neg ? 1 : (neg > pos ? -1 : 0);
    comps.push_back(std::move(comp));
  }
  return comps;
}

std::vector<DefectEntry> defect_measure(const EpsFamily& family, std::span<const HalfBall> balls) {
  if (family.size() < 3) throw std::invalid_argument("defect measure: family needs >= 3 members");
  const LimitField limit = limit_field(family);
  const Solution star = Solution::from_field(limit.grid, limit.u_star, limit.provenance_epsilon,
                                             limit.potential);
  const EnergyMeasure star_measure = energy_measure(star);
  std::vector<DefectEntry> out;
  for (const HalfBall& b : balls) {
    const Region region = region_weights(family.grid(), b);
    DefectEntry e;
    e.ball = b;
    e.energy_mass = energy(family.smallest_measure(), region).total;
    e.limit_dirichlet = energy(star_measure, region).dirichlet;
    e.defect = e.energy_mass - e.limit_dirichlet;
    out.push_back(e);
  }
  return out;
}

std::vector<Point> face_zero_set(const Grid& grid, std::span<const double> u) {
  const int n = grid.n();
  std::vector<Point> zeros;
  const auto& ext = grid.extents();
  const int nj = n == 2 ? ext[1] : 1;
  for (int j = 0; j < nj; ++j) {
    for (int i = 0; i < ext[0]; ++i) {
      const auto idx = grid.index({i, j, 0});
      const Point p = grid.position(idx);
      if (u[idx] == 0.0) {
        zeros.push_back(p);
        continue;
      }
      for (int a = 0; a < n; ++a) {
        const int ia = a == 0 ? i : j;
        if (ia + 1 >= ext[a]) continue;
        const auto nb = idx + static_cast<std::size_t>(grid.stride(a));
        if (u[nb] != 0.0 && (u[idx] < 0.0) != (u[nb] < 0.0)) {
          const double t = u[idx] / (u[idx] - u[nb]);
          Point z = p;
          z[a] += t * grid.h();
          zeros.push_back(z);
        }
      }
    }
  }
  return zeros;
}

double hausdorff_distance(std::span<const Point> a, std::span<const Point> b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  auto directed = [](std::span<const Point> from, std::span<const Point> to) {
    double worst = 0.0;
    for (const Point& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Point& q : to) best = std::min(best, distance(p, q));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace brlab
