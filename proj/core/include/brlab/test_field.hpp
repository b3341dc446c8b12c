#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "brlab/geometry.hpp"

namespace brlab {

/// Jacobian of a vector field: jac[i][j] = d X_i / d x_j.
using Jacobian = std::array<std::array<double, 3>, 3>;

/// Vector field with an analytic Jacobian, used as a test direction for
/// inner variations and varifold first variations.
struct TestField {
  std::function<Vec(const Point&)> value;
  std::function<Jacobian(const Point&)> jacobian;
  std::string label;

  /// Checks X_{n+1} = 0 on the reaction face and X = 0 on the Dirichlet
  /// faces at every node; throws GeometryError naming the first violation.
  void verify(const Grid& grid) const;

  /// max |X| + max |DX|_F over the grid nodes.
  double c1_norm(const Grid& grid) const;
};

/// Tangential bump X = e_direction * prod_a B(2 (x_a - c_a) / s) * B(2 x_{n+1} / s)
/// built from the cubic B-spline B (support [-2, 2]). The field vanishes
/// for |x_a - c_a| >= s or x_{n+1} >= s and its vertical component is zero
/// everywhere. With `normalize`, the field is divided by its c1_norm on the grid.
TestField bspline_bump(const Grid& grid, const Point& center, double scale, int direction,
                       bool normalize = true);

/// Bumps at every scale and every boundary direction around `center`.
std::vector<TestField> bump_battery(const Grid& grid, const Point& center,
                                    const std::vector<double>& scales);

/// Cubic B-spline and its derivative, support [-2, 2].
double cubic_bspline(double t) noexcept;
double cubic_bspline_derivative(double t) noexcept;

}  // namespace brlab
