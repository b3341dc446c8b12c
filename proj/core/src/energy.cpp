#include "brlab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace brlab {

double EnergyMeasure::total() const noexcept {
  double s = 0.0;
  for (double m : bulk) s += m;
  for (double m : face) s += m;
  return s;
}

Vec node_gradient(const Grid& grid, std::span<const double> u, std::size_t idx) noexcept {
  const auto ijk = grid.coords(idx);
  const double inv2h = 1.0 / (2.0 * grid.h());
  Vec g{0, 0, 0};
  for (int a = 0; a <= grid.n(); ++a) {
    const auto s = grid.stride(a);
    const int i = ijk[a];
    const int e = grid.extents()[a];
    if (i == 0) {
      g[a] = (-3.0 * u[idx] + 4.0 * u[idx + s] - u[idx + 2 * s]) * inv2h;
    } else if (i == e - 1) {
      g[a] = (3.0 * u[idx] - 4.0 * u[idx - s] + u[idx - 2 * s]) * inv2h;
    } else {
      g[a] = (u[idx + s] - u[idx - s]) * inv2h;
    }
  }
  return g;
}

std::vector<Vec> gradient_field(const Grid& grid, std::span<const double> u) {
  std::vector<Vec> g(grid.size());
  for (std::size_t idx = 0; idx < grid.size(); ++idx) g[idx] = node_gradient(grid, u, idx);
  return g;
}

namespace {

double norm2(const Vec& v) noexcept { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; }

void require_face_center(const Grid& grid, const Point& x) {
  if (std::abs(x[grid.n()]) > 1e-9 * grid.h()) {
    throw GeometryError("scaled energy: center must lie on the reaction face");
  }
}

}  // namespace

EnergyMeasure energy_measure(const Solution& sol) {
  const Grid& grid = sol.mesh();
  EnergyMeasure m;
  m.grid = sol.grid;
  m.epsilon = sol.epsilon;
  m.bulk.resize(grid.size());
  m.face.assign(grid.size(), 0.0);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    m.bulk[idx] = 0.5 * norm2(node_gradient(grid, sol.u, idx)) * grid.cell_volume(idx);
  }
  const double area = grid.face_cell_area();
  for (auto idx : grid.face_nodes()) {
    m.face[idx] = potential_value(sol.potential, sol.u[idx]) / sol.epsilon * area;
  }
  return m;
}

EnergyBreakdown energy(const EnergyMeasure& measure, const Region& region) {
  EnergyBreakdown e;
  for (auto idx : region.cells) e.dirichlet += measure.bulk[idx];
  for (auto idx : region.face_cells) e.potential += measure.face[idx];
  e.total = e.dirichlet + e.potential;
  return e;
}

EnergyBreakdown energy(const Solution& sol, const Region& region) {
  return energy(energy_measure(sol), region);
}

double scheme_energy(const Solution& sol) {
  const Grid& grid = sol.mesh();
  const int d = grid.dim();
  const auto& ext = grid.extents();
  const double base = std::pow(grid.h(), grid.n() - 1);
  double bulk = 0.0;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const auto ijk = grid.coords(idx);
    for (int a = 0; a < d; ++a) {
      if (ijk[a] + 1 >= ext[a]) continue;
      double w = base;
      for (int b = 0; b < d; ++b) {
        if (b != a && (ijk[b] == 0 || ijk[b] == ext[b] - 1)) w *= 0.5;
      }
      const double du = sol.u[idx + static_cast<std::size_t>(grid.stride(a))] - sol.u[idx];
      bulk += 0.5 * w * du * du;
    }
  }
  double face = 0.0;
  for (auto idx : grid.face_nodes()) face += potential_value(sol.potential, sol.u[idx]);
  return bulk + face * grid.face_cell_area() / sol.epsilon;
}

double scaled_energy(const EnergyMeasure& measure, const Point& x, double r) {
  const Grid& grid = *measure.grid;
  require_face_center(grid, x);
  const Region ball = region_weights(grid, HalfBall{x, r});
  return std::pow(r, 1 - grid.n()) * energy(measure, ball).total;
}

double scaled_energy(const Solution& sol, const Point& x, double r) {
  return scaled_energy(energy_measure(sol), x, r);
}

double ScaledEnergyProfile::identity_gap(std::size_t k) const {
  return scaled.at(k) - scaled.at(0) - term_sphere.at(k) - term_disc.at(k);
}

double ScaledEnergyProfile::max_violation() const {
  double v = 0.0;
  for (std::size_t k = 1; k < scaled.size(); ++k) v = std::max(v, scaled[k - 1] - scaled[k]);
  return v;
}

ScaledEnergyProfile monotonicity_profile(const Solution& sol, const Point& x,
                                         std::span<const double> radii) {
  return monotonicity_profile(sol, energy_measure(sol), x, radii);
}

ScaledEnergyProfile monotonicity_profile(const Solution& sol, const EnergyMeasure& measure,
                                         const Point& x, std::span<const double> radii) {
  const Grid& grid = sol.mesh();
  const int n = grid.n();
  require_face_center(grid, x);
  if (radii.empty()) throw std::invalid_argument("monotonicity profile: no radii given");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0)) throw std::invalid_argument("monotonicity profile: radii must be positive");
    if (k > 0 && !(radii[k] > radii[k - 1])) {
      throw std::invalid_argument("monotonicity profile: radii must be strictly increasing");
    }
  }
  const double r_max = radii.back();
  if (r_max > grid.distance_to_dirichlet(x) + 1e-9 * grid.h()) {
    std::ostringstream msg;
    msg << "monotonicity profile: radius " << r_max << " reaches the Dirichlet boundary";
    throw GeometryError(msg.str());
  }

  struct Sample {
    double d;
    double bulk;
    double sphere;
    double face;
  };
  const Region outer = region_weights(grid, HalfBall{x, r_max});
  std::vector<Sample> samples;
  samples.reserve(outer.cells.size());
  for (auto idx : outer.cells) {
    const Point p = grid.position(idx);
    const double d = distance(p, x);
    double sphere = 0.0;
    if (d > 0.0) {
      const Vec g = node_gradient(grid, sol.u, idx);
      double radial = 0.0;
      for (int a = 0; a <= n; ++a) radial += (p[a] - x[a]) * g[a];
      sphere = radial * radial * std::pow(d, -(n + 1)) * grid.cell_volume(idx);
    }
    samples.push_back({d, measure.bulk[idx], sphere, measure.face[idx]});
  }

  // int_{a}^{b} r^{-n} dr
  auto kernel = [n](double a, double b) {
    return n == 1 ? std::log(b / a) : 1.0 / a - 1.0 / b;
  };

  const double tol = 1e-9 * grid.h();
  const double r0 = radii.front();
  ScaledEnergyProfile prof;
  prof.center = x;
  prof.radii.assign(radii.begin(), radii.end());
  for (double r : radii) {
    double mass = 0.0;
    double sphere = 0.0;
    double disc = 0.0;
    for (const auto& s : samples) {
      if (s.d > r + tol) continue;
      mass += s.bulk + s.face;
      if (s.d > r0 + tol) sphere += s.sphere;
      if (s.face > 0.0 && r > r0) disc += s.face * kernel(std::max(r0, s.d), r);
    }
    prof.scaled.push_back(std::pow(r, 1 - n) * mass);
    prof.term_sphere.push_back(sphere);
    prof.term_disc.push_back(disc);
  }
  return prof;
}

std::vector<double> log_radii(double r_min, double r_max, int count) {
  if (count < 2 || !(r_min > 0.0) || !(r_max > r_min)) {
    throw std::invalid_argument("log_radii: need count >= 2 and 0 < r_min < r_max");
  }
  std::vector<double> radii(static_cast<std::size_t>(count));
  const double ratio = std::log(r_max / r_min) / (count - 1);
  for (int k = 0; k < count; ++k) radii[k] = r_min * std::exp(ratio * k);
  radii.back() = r_max;
  return radii;
}

double inner_variation_residual(const Solution& sol, const TestField& field) {
  const Grid& grid = sol.mesh();
  const int n = grid.n();
  for (auto idx : grid.face_nodes()) {
    const Vec x = field.value(grid.position(idx));
    if (std::abs(x[n]) > 1e-14) {
      throw GeometryError("inner variation: test field '" + field.label +
                          "' is not tangential on the reaction face");
    }
  }
  double bulk = 0.0;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const Point p = grid.position(idx);
    const Jacobian j = field.jacobian(p);
    const Vec g = node_gradient(grid, sol.u, idx);
    double div = 0.0;
    double quad = 0.0;
    for (int a = 0; a <= n; ++a) {
      div += j[a][a];
      for (int b = 0; b <= n; ++b) quad += g[a] * j[a][b] * g[b];
    }
    bulk += (0.5 * norm2(g) * div - quad) * grid.cell_volume(idx);
  }
  double face = 0.0;
  for (auto idx : grid.face_nodes()) {
    const Jacobian j = field.jacobian(grid.position(idx));
    double div = 0.0;
    for (int a = 0; a < n; ++a) div += j[a][a];
    face += potential_value(sol.potential, sol.u[idx]) * div;
  }
  return bulk + face * grid.face_cell_area() / sol.epsilon;
}

double scaled_energy_corollary_excess(const EnergyMeasure& measure, double R,
                                      std::span<const Point> centers, int samples) {
  const Grid& grid = *measure.grid;
  const Point origin{0, 0, 0};
  const double bound = std::pow(2.0, grid.n() - 1) * scaled_energy(measure, origin, R);
  double excess = -bound;
  for (const Point& x : centers) {
    require_face_center(grid, x);
    const double dx = distance(x, origin);
    if (!(dx < 0.5 * R)) throw std::invalid_argument("corollary: centers need |x| < R/2");
    for (int s = 1; s <= samples; ++s) {
      const double r = (R - dx) * s / samples;
      excess = std::max(excess, scaled_energy(measure, x, r) - bound);
    }
  }
  return excess;
}

}  // namespace brlab
