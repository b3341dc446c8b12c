#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace brlab {

/// Coordinates in the closed half-slab. Components 0..n-1 are the boundary
/// directions, component n is the vertical direction x_{n+1}; the unused
/// trailing component is zero when n = 1.
using Point = std::array<double, 3>;
using Vec = std::array<double, 3>;

/// Nodal scalar field, indexed like Grid nodes.
using Field = std::vector<double>;

class GeometryError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct GridSpec {
  int n = 1;                        // boundary dimension, 1 or 2
  double h = 0.0;                   // grid spacing
  std::vector<double> half_widths;  // L per boundary axis, boundary spans [-L, L]
  double height = 0.0;              // vertical extent H, slab spans [0, H]
};

enum class NodeKind : std::uint8_t { Interior, ReactionFace, DirichletBoundary };

/// Structured node grid on [-L_1, L_1] x ... x [0, H].
///
/// The reaction face is the bottom row minus the lateral Dirichlet ring; the
/// lateral and top faces hold Dirichlet data. Each node owns the dual cell
/// [x - h/2, x + h/2]^{n+1} clipped to the slab, so bottom-row cells carry
/// half the volume of interior ones.
class Grid {
public:
  explicit Grid(GridSpec spec);

  const GridSpec& spec() const noexcept { return spec_; }
  int n() const noexcept { return spec_.n; }
  int dim() const noexcept { return spec_.n + 1; }
  double h() const noexcept { return spec_.h; }

  /// Node count along each axis (axis n is vertical); unused axes report 1.
  const std::array<int, 3>& extents() const noexcept { return extents_; }
  std::size_t size() const noexcept { return kinds_.size(); }
  std::ptrdiff_t stride(int axis) const noexcept { return strides_[axis]; }

  std::size_t index(const std::array<int, 3>& ijk) const noexcept {
    return static_cast<std::size_t>(ijk[0] * strides_[0] + ijk[1] * strides_[1] +
                                    ijk[2] * strides_[2]);
  }
  std::array<int, 3> coords(std::size_t idx) const noexcept;
  Point position(std::size_t idx) const noexcept;
  double coordinate(int axis, int i) const noexcept { return origin_[axis] + i * spec_.h; }

  NodeKind kind(std::size_t idx) const noexcept { return kinds_[idx]; }
  double cell_volume(std::size_t idx) const noexcept;
  double face_cell_area() const noexcept { return face_area_; }

  std::span<const std::size_t> face_nodes() const noexcept { return face_nodes_; }
  std::span<const std::size_t> interior_nodes() const noexcept { return interior_nodes_; }
  std::size_t count(NodeKind k) const noexcept;

  /// Distance from a face point to the nearest lateral or top face.
  double distance_to_dirichlet(const Point& x) const noexcept;

private:
  GridSpec spec_;
  std::array<int, 3> extents_{1, 1, 1};
  std::array<std::ptrdiff_t, 3> strides_{0, 0, 0};
  std::array<double, 3> origin_{0, 0, 0};
  double full_volume_ = 0.0;
  double face_area_ = 0.0;
  std::vector<NodeKind> kinds_;
  std::vector<std::size_t> face_nodes_;
  std::vector<std::size_t> interior_nodes_;
};

Grid build_grid(const GridSpec& spec);

// Analysis regions. Centers of HalfBall, Disc and HalfAnnulus lie on the
// reaction face (vertical component zero); Ball is a full ball around an
// interior point.
struct HalfBall {
  Point center;
  double radius;
};
struct Disc {
  Point center;
  double radius;
};
struct HalfAnnulus {
  Point center;
  double inner;
  double outer;
};
struct Ball {
  Point center;
  double radius;
};
struct WholeDomain {};

using RegionShape = std::variant<HalfBall, Disc, HalfAnnulus, Ball, WholeDomain>;

/// Indicator quadrature for a region: a node has weight 1 when its position
/// (the center of its cell) lies in the closed region and 0 otherwise.
/// HalfAnnulus uses inner < |y - x| <= outer so it is the exact difference of
/// the two half-balls.
struct Region {
  RegionShape shape;
  std::vector<std::size_t> cells;       // sorted bulk nodes with weight 1
  std::vector<std::size_t> face_cells;  // sorted reaction-face nodes with weight 1

  double weight(std::size_t idx) const noexcept;
  double volume(const Grid& grid) const noexcept;
  double face_area(const Grid& grid) const noexcept;
};

Region region_weights(const Grid& grid, const RegionShape& shape);

/// -d/dx_{n+1} u at every reaction-face node, ordered as Grid::face_nodes(),
/// from the one-sided stencil (-3 u_0 + 4 u_1 - u_2) / (2h).
std::vector<double> boundary_normal_derivative(const Grid& grid, std::span<const double> u);

double distance(const Point& a, const Point& b) noexcept;

}  // namespace brlab
