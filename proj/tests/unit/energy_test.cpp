#include <cmath>
#include <numbers>

#include "brlab/energy.hpp"
#include "doctest.h"

using namespace brlab;

namespace {

std::shared_ptr<const Grid> make_grid(int n, double h, double L = 1.0, double H = 1.0) {
  return std::make_shared<const Grid>(GridSpec{n, h, std::vector<double>(n, L), H});
}

Solution constant(std::shared_ptr<const Grid> g, double c, double eps = 1.0) {
  return Solution::from_field(g, Field(g->size(), c), eps, PotentialKind::QuarticDoubleWell);
}

// 1/2 int |grad u|^2 of the angle field over [-L, L] x [0, H]: midpoint rule
// on a tensor grid graded cubically toward the layer at the origin.
double layer_dirichlet_oracle(double eps, double L, double H) {
  const int nx = 2000, ny = 2000;
  double sum = 0.0;
  for (int j = 0; j < ny; ++j) {
    const double t0 = static_cast<double>(j) / ny, t1 = static_cast<double>(j + 1) / ny;
    const double y0 = H * t0 * t0 * t0, y1 = H * t1 * t1 * t1;
    const double yy = 0.5 * (y0 + y1) + eps;
    for (int i = 0; i < nx; ++i) {
      const double s0 = -1.0 + 2.0 * i / nx, s1 = -1.0 + 2.0 * (i + 1) / nx;
      const double x0 = L * s0 * s0 * s0, x1 = L * s1 * s1 * s1;
      const double xc = 0.5 * (x0 + x1);
      sum += (x1 - x0) * (y1 - y0) / (xc * xc + yy * yy);
    }
  }
  return 0.5 * 4.0 / (std::numbers::pi * std::numbers::pi) * sum;
}

}  // namespace

TEST_CASE("energy of the wells vanishes") {
  auto g = make_grid(1, 0.05);
  const Solution s = constant(g, 1.0, 0.3);
  for (const RegionShape& r : {RegionShape{WholeDomain{}}, RegionShape{HalfBall{{0, 0, 0}, 0.5}}}) {
    const EnergyBreakdown e = energy(s, region_weights(*g, r));
    CHECK(e.dirichlet == 0.0);
    CHECK(e.potential == 0.0);
    CHECK(e.total == 0.0);
  }
}

TEST_CASE("energy of the unstable constant on a half-ball") {
  const double h = 0.01, r = 0.5;
  auto g = make_grid(1, h);
  const EnergyBreakdown e = energy(constant(g, 0.0), region_weights(*g, HalfBall{{0, 0, 0}, r}));
  CHECK(e.dirichlet == 0.0);
  CHECK(std::abs(e.potential - 0.25 * 2 * r) <= 0.25 * 2 * h);
  CHECK(e.total == e.dirichlet + e.potential);
  CHECK(std::abs(scaled_energy(constant(g, 0.0), {0, 0, 0}, r) - 0.25) <= 0.25 * 2 * h);
}

TEST_CASE("monotonicity terms for constant fields") {
  const double h = 1.0 / 512;
  auto g = make_grid(1, h);
  const std::vector<double> radii{0.25, 0.5};
  const ScaledEnergyProfile p = monotonicity_profile(constant(g, 0.0), {0, 0, 0}, radii);
  CHECK(p.scaled[1] - p.scaled[0] == doctest::Approx(0.125).epsilon(0.01));
  CHECK(p.term_sphere[1] == 0.0);
  CHECK(p.term_disc[1] == doctest::Approx(0.125).epsilon(0.01));
  CHECK(std::abs(p.identity_gap(1)) <= 2 * h);

  const ScaledEnergyProfile q = monotonicity_profile(constant(g, 1.0), {0, 0, 0}, radii);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(q.scaled[k] == 0.0);
    CHECK(q.term_sphere[k] == 0.0);
    CHECK(q.term_disc[k] == 0.0);
  }
}

TEST_CASE("monotonicity profile rejects bad radii") {
  auto g = make_grid(1, 0.05);
  const Solution s = constant(g, 0.0);
  const std::vector<double> decreasing{0.5, 0.25};
  const std::vector<double> too_far{0.25, 1.5};
  const std::vector<double> none;
  CHECK_THROWS_AS(monotonicity_profile(s, {0, 0, 0}, decreasing), std::invalid_argument);
  CHECK_THROWS_AS(monotonicity_profile(s, {0, 0, 0}, too_far), GeometryError);
  CHECK_THROWS_AS(monotonicity_profile(s, {0, 0, 0}, none), std::invalid_argument);
  CHECK_THROWS_AS(scaled_energy(s, {0, 0.2, 0}, 0.1), GeometryError);
}

TEST_CASE("log radii") {
  const auto r = log_radii(0.01, 0.8, 12);
  REQUIRE(r.size() == 12);
  CHECK(r.front() == doctest::Approx(0.01));
  CHECK(r.back() == 0.8);
  for (std::size_t k = 1; k < r.size(); ++k) CHECK(r[k] / r[k - 1] == doctest::Approx(r[1] / r[0]));
  CHECK_THROWS(log_radii(0.5, 0.1, 4));
  CHECK_THROWS(log_radii(0.1, 0.5, 1));
}

TEST_CASE("energy measure additivity over disjoint regions") {
  auto g = make_grid(2, 0.0625);
  const Solution s = solve(g, 0.2, PotentialKind::QuarticDoubleWell, two_phase_data(*g, StepProfile{}),
                           std::nullopt, {});
  const EnergyMeasure m = energy_measure(s);
  const Point x{0.125, -0.0625, 0};
  const double whole = energy(m, region_weights(*g, HalfBall{x, 0.6})).total;
  const double inner = energy(m, region_weights(*g, HalfBall{x, 0.3})).total;
  const double ring = energy(m, region_weights(*g, HalfAnnulus{x, 0.3, 0.6})).total;
  CHECK(std::abs(inner + ring - whole) <= 1e-12 * whole);
  CHECK(m.total() == doctest::Approx(energy(m, region_weights(*g, WholeDomain{})).total).epsilon(1e-12));
  for (std::size_t i = 0; i < g->size(); ++i) {
    CHECK(m.bulk[i] >= 0.0);
    CHECK(m.face[i] >= 0.0);
  }
}

TEST_CASE("layer Dirichlet energy against a quadrature oracle") {
  const double h = 1.0 / 256;
  auto g = make_grid(1, h);
  std::vector<double> logs, discrete, oracle;
  for (double eps : {0.25, 0.125, 0.0625}) {
    const Solution s = Solution::from_field(g, exact_layer(*g, eps), eps, PotentialKind::PeierlsNabarro);
    const double d = energy(s, region_weights(*g, WholeDomain{})).dirichlet;
    const double o = layer_dirichlet_oracle(eps, 1.0, 1.0);
    CHECK(d == doctest::Approx(o).epsilon(0.01));
    logs.push_back(std::log(1.0 / eps));
    discrete.push_back(d);
    oracle.push_back(o);
  }
  // growth per unit log(1/eps) tends to 2/pi (a half-plane's worth of angle)
  for (std::size_t k = 1; k < logs.size(); ++k) {
    const double slope = (discrete[k] - discrete[k - 1]) / (logs[k] - logs[k - 1]);
    const double slope_oracle = (oracle[k] - oracle[k - 1]) / (logs[k] - logs[k - 1]);
    CHECK(slope == doctest::Approx(slope_oracle).epsilon(0.05));
    CHECK(slope == doctest::Approx(2.0 / std::numbers::pi).epsilon(0.15));
  }
}

TEST_CASE("scaled energy is nondecreasing on a solved field") {
  auto g = make_grid(1, 1.0 / 128);
  const Solution s = solve(g, 0.1, PotentialKind::QuarticDoubleWell, two_phase_data(*g, StepProfile{}),
                           std::nullopt, {});
  REQUIRE(s.converged);
  const EnergyMeasure m = energy_measure(s);
  for (double x : {0.0, 0.2, -0.3}) {
    const Point c{x, 0, 0};
    const auto radii = log_radii(4.0 / 128, 0.6, 10);
    const ScaledEnergyProfile p = monotonicity_profile(s, m, c, radii);
    CHECK(p.max_violation() <= 1e-3 * m.total());
    for (std::size_t k = 0; k < radii.size(); ++k) {
      CHECK(p.term_sphere[k] >= 0.0);
      CHECK(p.term_disc[k] >= 0.0);
    }
  }
  const std::vector<Point> centers{{-0.3, 0, 0}, {0, 0, 0}, {0.2, 0, 0}};
  CHECK(scaled_energy_corollary_excess(m, 0.8, centers, 12) <= 1e-3 * m.total());
}

TEST_CASE("monotonicity identity gap shrinks under refinement on the oracle") {
  const double eps = 0.25;
  const auto radii = log_radii(0.125, 0.8, 8);
  std::vector<double> gaps;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    auto g = make_grid(1, h);
    const Solution s = Solution::from_field(g, exact_layer(*g, eps), eps, PotentialKind::PeierlsNabarro);
    const ScaledEnergyProfile p = monotonicity_profile(s, {0, 0, 0}, radii);
    double gap = 0.0;
    for (std::size_t k = 1; k < radii.size(); ++k) gap = std::max(gap, std::abs(p.identity_gap(k)));
    gaps.push_back(gap);
  }
  CHECK(std::log2(gaps[0] / gaps[2]) / 2 >= 0.8);
}

TEST_CASE("inner variation residual") {
  auto g = make_grid(1, 1.0 / 64);
  const TestField bump = bspline_bump(*g, {0.25, 0, 0}, 0.3, 0);
  CHECK(inner_variation_residual(constant(g, 1.0, 0.25), bump) == 0.0);

  TestField vertical;
  vertical.label = "vertical";
  vertical.value = [](const Point&) { return Vec{0, 1, 0}; };
  vertical.jacobian = [](const Point&) { return Jacobian{}; };
  CHECK_THROWS_AS(inner_variation_residual(constant(g, 1.0, 0.25), vertical), GeometryError);

  double prev = 0.0;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    auto gh = make_grid(1, h);
    const Solution s = Solution::from_field(gh, exact_layer(*gh, 0.25), 0.25, PotentialKind::PeierlsNabarro);
    double r = 0.0;
    for (const auto& X : bump_battery(*gh, {0.25, 0, 0}, {0.2, 0.4})) {
      r = std::max(r, std::abs(inner_variation_residual(s, X)));
    }
    if (prev > 0.0) CHECK(r < prev);
    prev = r;
  }
}
