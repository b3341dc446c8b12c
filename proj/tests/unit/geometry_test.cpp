#include <cmath>
#include <numbers>
#include <random>

#include "brlab/geometry.hpp"
#include "doctest.h"

using namespace brlab;

namespace {

Field sample(const Grid& grid, double (*f)(const Point&)) {
  Field u(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) u[i] = f(grid.position(i));
  return u;
}

}  // namespace

TEST_CASE("build_grid counts nodes and classifies them") {
  const Grid g = build_grid({1, 0.5, {1.0}, 1.0});
  CHECK(g.extents()[0] == 5);
  CHECK(g.extents()[1] == 3);
  CHECK(g.size() == 15);
  CHECK(g.count(NodeKind::ReactionFace) == 3);
  CHECK(g.count(NodeKind::Interior) == 3);
  CHECK(g.count(NodeKind::DirichletBoundary) == 9);
  for (auto idx : g.face_nodes()) {
    CHECK(g.coords(idx)[1] == 0);
    CHECK(g.position(idx)[1] == 0.0);
  }
}

TEST_CASE("build_grid rejects grids too coarse for the stencils") {
  CHECK_THROWS_AS(build_grid({1, 2.0, {1.0}, 1.0}), GeometryError);
  CHECK_THROWS_AS(build_grid({3, 0.1, {1.0, 1.0, 1.0}, 1.0}), GeometryError);
  CHECK_THROWS_AS(build_grid({1, -0.1, {1.0}, 1.0}), GeometryError);
  CHECK_THROWS_AS(build_grid({2, 0.1, {1.0}, 1.0}), GeometryError);
}

TEST_CASE("n = 2 vertical axis node count") {
  const Grid g = build_grid({2, 0.25, {1.0, 1.0}, 0.5});
  CHECK(g.extents()[2] == 3);
  CHECK(g.extents()[0] == 9);
  CHECK(g.extents()[1] == 9);
  // face = 7 x 7 strictly inside the lateral ring
  CHECK(g.count(NodeKind::ReactionFace) == 49);
}

TEST_CASE("partition: every node has exactly one kind") {
  for (const GridSpec& s : {GridSpec{1, 0.1, {1.0}, 0.7}, GridSpec{1, 1.0 / 64, {0.5}, 1.0},
                            GridSpec{2, 0.125, {1.0, 0.5}, 0.75}}) {
    const Grid g = build_grid(s);
    CHECK(g.count(NodeKind::Interior) + g.count(NodeKind::ReactionFace) +
              g.count(NodeKind::DirichletBoundary) ==
          g.size());
    CHECK(g.face_nodes().size() == g.count(NodeKind::ReactionFace));
    CHECK(g.interior_nodes().size() == g.count(NodeKind::Interior));
  }
}

TEST_CASE("cell volumes sum to the slab volume") {
  const Grid g = build_grid({2, 0.125, {1.0, 0.5}, 0.75});
  double v = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) v += g.cell_volume(i);
  CHECK(v == doctest::Approx(2.0 * 1.0 * 0.75).epsilon(1e-12));
}

TEST_CASE("region quadrature reproduces simple areas and volumes") {
  const Grid g = build_grid({1, 0.01, {1.5}, 1.5});
  const Point o{0, 0, 0};
  const Region disc = region_weights(g, Disc{o, 1.0});
  CHECK(std::abs(disc.face_area(g) - 2.0) <= 0.02);
  const Region half = region_weights(g, HalfBall{o, 1.0});
  CHECK(std::abs(half.volume(g) - std::numbers::pi / 2) <= 0.05);
  const Region ann = region_weights(g, HalfAnnulus{o, 0.5, 1.0});
  CHECK(std::abs(ann.volume(g) - std::numbers::pi / 2 * 0.75) <= 0.05);
}

TEST_CASE("half-annulus is the difference of two half-balls") {
  const Grid g = build_grid({1, 1.0 / 64, {1.0}, 1.0});
  const Point o{0.125, 0, 0};
  const Region outer = region_weights(g, HalfBall{o, 0.5});
  const Region inner = region_weights(g, HalfBall{o, 0.25});
  const Region ann = region_weights(g, HalfAnnulus{o, 0.25, 0.5});
  CHECK(ann.cells.size() + inner.cells.size() == outer.cells.size());
  CHECK(ann.volume(g) + inner.volume(g) == doctest::Approx(outer.volume(g)).epsilon(1e-12));
}

TEST_CASE("half-ball volume converges at first order") {
  const double r = 0.6;
  const double exact = std::numbers::pi * r * r / 2;
  for (double h : {0.02, 0.01, 0.005}) {
    const Grid g = build_grid({1, h, {1.0}, 1.0});
    const double err = std::abs(region_weights(g, HalfBall{{0.1, 0, 0}, r}).volume(g) - exact);
    CHECK(err <= 2.0 * h * (std::numbers::pi * r));
  }
  const double r3 = 0.5;
  const double exact3 = 2.0 / 3.0 * std::numbers::pi * r3 * r3 * r3;
  for (double h : {0.0625, 0.03125}) {
    const Grid g = build_grid({2, h, {1.0, 1.0}, 1.0});
    const double err = std::abs(region_weights(g, HalfBall{{0, 0, 0}, r3}).volume(g) - exact3);
    CHECK(err <= 2.0 * h * (2 * std::numbers::pi * r3 * r3));
  }
}

TEST_CASE("half-ball weights are nested in the radius") {
  const Grid g = build_grid({2, 0.0625, {1.0, 1.0}, 1.0});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(-0.3, 0.3), r(0.05, 0.6);
  for (int trial = 0; trial < 20; ++trial) {
    const Point x{c(rng), c(rng), 0};
    double r1 = r(rng), r2 = r(rng);
    if (r1 > r2) std::swap(r1, r2);
    const Region a = region_weights(g, HalfBall{x, r1});
    const Region b = region_weights(g, HalfBall{x, r2});
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(a.weight(i) <= b.weight(i));
  }
}

TEST_CASE("regions leaving the grid are rejected with the offending extent") {
  const Grid g = build_grid({1, 0.05, {1.0}, 0.5});
  try {
    region_weights(g, HalfBall{{0.8, 0, 0}, 0.3});
    FAIL("expected a GeometryError");
  } catch (const GeometryError& e) {
    const std::string what = e.what();
    CHECK(what.find("axis 0") != std::string::npos);
  }
  try {
    region_weights(g, HalfBall{{0.0, 0, 0}, 0.6});
    FAIL("expected a GeometryError");
  } catch (const GeometryError& e) {
    CHECK(std::string(e.what()).find("axis 1") != std::string::npos);
  }
  CHECK_THROWS_AS(region_weights(g, Disc{{0, 0.2, 0}, 0.1}), GeometryError);
  CHECK_THROWS_AS(region_weights(g, HalfAnnulus{{0, 0, 0}, 0.3, 0.2}), GeometryError);
}

TEST_CASE("whole domain covers every node") {
  const Grid g = build_grid({1, 0.1, {1.0}, 1.0});
  const Region w = region_weights(g, WholeDomain{});
  CHECK(w.cells.size() == g.size());
  CHECK(w.face_cells.size() == g.face_nodes().size());
}

TEST_CASE("boundary normal derivative stencil") {
  const Grid g = build_grid({1, 0.05, {1.0}, 1.0});
  for (double d : boundary_normal_derivative(g, sample(g, [](const Point& p) { return p[1]; }))) {
    CHECK(d == doctest::Approx(-1.0).epsilon(1e-12));
  }
  for (double d : boundary_normal_derivative(g, sample(g, [](const Point& p) { return p[1] * p[1]; }))) {
    CHECK(std::abs(d) <= 1e-12);
  }
}

TEST_CASE("boundary normal derivative of the angle field is second order") {
  const double eps = 0.25;
  auto angle = [](const Point& p) { return 2.0 / std::numbers::pi * std::atan(p[0] / (p[1] + 0.25)); };
  double prev = 0.0;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const Grid g = build_grid({1, h, {1.0}, 1.0});
    Field u(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = angle(g.position(i));
    const auto d = boundary_normal_derivative(g, u);
    double err = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      const double x = g.position(g.face_nodes()[k])[0];
      const double exact = 2.0 / std::numbers::pi * x / (x * x + eps * eps);
      err = std::max(err, std::abs(d[k] - exact));
    }
    if (prev > 0.0) CHECK(std::log2(prev / err) >= 1.8);
    prev = err;
  }
}
