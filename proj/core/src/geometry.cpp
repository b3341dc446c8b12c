#include "brlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace brlab {

namespace {

constexpr int kMinNodesPerAxis = 3;

int axis_nodes(double extent, double h) {
  return static_cast<int>(std::lround(extent / h)) + 1;
}

// Slack used by every inclusion and containment test, relative to h.
double slack(double h) { return 1e-9 * h; }

}  // namespace

Grid::Grid(GridSpec spec) : spec_(std::move(spec)) {
  const int n = spec_.n;
  if (n != 1 && n != 2) {
    throw GeometryError("grid: boundary dimension n must be 1 or 2, got " + std::to_string(n));
  }
  if (!(spec_.h > 0.0) || !std::isfinite(spec_.h)) {
    throw GeometryError("grid: spacing h must be positive");
  }
  if (spec_.half_widths.size() != static_cast<std::size_t>(n)) {
    throw GeometryError("grid: expected " + std::to_string(n) + " half widths");
  }
  for (double L : spec_.half_widths) {
    if (!(L > 0.0)) throw GeometryError("grid: half widths must be positive");
  }
  if (!(spec_.height > 0.0)) throw GeometryError("grid: height must be positive");

  for (int a = 0; a < n; ++a) {
    extents_[a] = axis_nodes(2.0 * spec_.half_widths[a], spec_.h);
    origin_[a] = -spec_.half_widths[a];
  }
  extents_[n] = axis_nodes(spec_.height, spec_.h);
  origin_[n] = 0.0;
  for (int a = 0; a <= n; ++a) {
    if (extents_[a] < kMinNodesPerAxis) {
      std::ostringstream msg;
      msg << "grid: axis " << a << " has " << extents_[a] << " nodes, at least "
          << kMinNodesPerAxis << " are required (h = " << spec_.h << " is too coarse)";
      throw GeometryError(msg.str());
    }
  }
  strides_[0] = 1;
  strides_[1] = extents_[0];
  strides_[2] = static_cast<std::ptrdiff_t>(extents_[0]) * extents_[1];
  if (n == 1) strides_[2] = 0;

  full_volume_ = std::pow(spec_.h, n + 1);
  face_area_ = std::pow(spec_.h, n);

  const std::size_t total =
      static_cast<std::size_t>(extents_[0]) * extents_[1] * extents_[2];
  kinds_.resize(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    const auto ijk = coords(idx);
    bool lateral = false;
    for (int a = 0; a < n; ++a) {
      lateral = lateral || ijk[a] == 0 || ijk[a] == extents_[a] - 1;
    }
    const int k = ijk[n];
    NodeKind kind = NodeKind::Interior;
    if (lateral || k == extents_[n] - 1) {
      kind = NodeKind::DirichletBoundary;
    } else if (k == 0) {
      kind = NodeKind::ReactionFace;
      face_nodes_.push_back(idx);
    } else {
      interior_nodes_.push_back(idx);
    }
    kinds_[idx] = kind;
  }
}

std::array<int, 3> Grid::coords(std::size_t idx) const noexcept {
  std::array<int, 3> ijk{0, 0, 0};
  auto rest = static_cast<std::ptrdiff_t>(idx);
  ijk[0] = static_cast<int>(rest % extents_[0]);
  rest /= extents_[0];
  if (spec_.n == 1) {
    ijk[1] = static_cast<int>(rest);
  } else {
    ijk[1] = static_cast<int>(rest % extents_[1]);
    ijk[2] = static_cast<int>(rest / extents_[1]);
  }
  return ijk;
}

Point Grid::position(std::size_t idx) const noexcept {
  const auto ijk = coords(idx);
  Point p{0, 0, 0};
  for (int a = 0; a <= spec_.n; ++a) p[a] = coordinate(a, ijk[a]);
  return p;
}

double Grid::cell_volume(std::size_t idx) const noexcept {
  const auto ijk = coords(idx);
  double v = full_volume_;
  for (int a = 0; a <= spec_.n; ++a) {
    if (ijk[a] == 0 || ijk[a] == extents_[a] - 1) v *= 0.5;
  }
  return v;
}

std::size_t Grid::count(NodeKind k) const noexcept {
  return static_cast<std::size_t>(std::count(kinds_.begin(), kinds_.end(), k));
}

double Grid::distance_to_dirichlet(const Point& x) const noexcept {
  double d = spec_.height - x[spec_.n];
  for (int a = 0; a < spec_.n; ++a) {
    d = std::min(d, spec_.half_widths[a] - std::abs(x[a]));
  }
  return d;
}

Grid build_grid(const GridSpec& spec) { return Grid(spec); }

double distance(const Point& a, const Point& b) noexcept {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double Region::weight(std::size_t idx) const noexcept {
  if (std::holds_alternative<WholeDomain>(shape)) return 1.0;
  return std::binary_search(cells.begin(), cells.end(), idx) ? 1.0 : 0.0;
}

double Region::volume(const Grid& grid) const noexcept {
  double v = 0.0;
  for (auto idx : cells) v += grid.cell_volume(idx);
  return v;
}

double Region::face_area(const Grid& grid) const noexcept {
  return static_cast<double>(face_cells.size()) * grid.face_cell_area();
}

namespace {

struct Box {
  std::array<double, 3> lo{0, 0, 0};
  std::array<double, 3> hi{0, 0, 0};
};

void require_inside(const Grid& grid, const Box& box, const char* what) {
  const auto& spec = grid.spec();
  const double tol = slack(grid.h());
  for (int a = 0; a <= spec.n; ++a) {
    const double lo = a < spec.n ? -spec.half_widths[a] : 0.0;
    const double hi = a < spec.n ? spec.half_widths[a] : spec.height;
    if (box.lo[a] < lo - tol || box.hi[a] > hi + tol) {
      std::ostringstream msg;
      msg << what << " extends outside the grid along axis " << a << ": ["
          << box.lo[a] << ", " << box.hi[a] << "] not within [" << lo << ", " << hi << "]";
      throw GeometryError(msg.str());
    }
  }
}

void require_on_face(const Grid& grid, const Point& c, const char* what) {
  if (std::abs(c[grid.n()]) > slack(grid.h())) {
    throw GeometryError(std::string(what) + " center must lie on the reaction face");
  }
}

Box ball_box(const Grid& grid, const Point& c, double r, bool upper_half) {
  Box b;
  for (int a = 0; a <= grid.n(); ++a) {
    b.lo[a] = c[a] - r;
    b.hi[a] = c[a] + r;
  }
  if (upper_half) b.lo[grid.n()] = 0.0;
  return b;
}

// Visit all nodes whose coordinates lie inside the box.
template <class F>
void for_each_in_box(const Grid& grid, const Box& box, F&& f) {
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};
  const double tol = slack(grid.h());
  for (int a = 0; a <= grid.n(); ++a) {
    const double o = grid.coordinate(a, 0);
    lo[a] = std::max(0, static_cast<int>(std::ceil((box.lo[a] - o - tol) / grid.h())));
    hi[a] = std::min(grid.extents()[a] - 1,
                     static_cast<int>(std::floor((box.hi[a] - o + tol) / grid.h())));
  }
  std::array<int, 3> ijk{0, 0, 0};
  for (ijk[2] = lo[2]; ijk[2] <= hi[2]; ++ijk[2]) {
    for (ijk[1] = lo[1]; ijk[1] <= hi[1]; ++ijk[1]) {
      for (ijk[0] = lo[0]; ijk[0] <= hi[0]; ++ijk[0]) {
        const auto idx = grid.index(ijk);
        f(idx, grid.position(idx));
      }
    }
  }
}

template <class Inside>
Region collect(const Grid& grid, RegionShape shape, const Box& box, Inside&& inside,
               bool with_bulk, bool with_face) {
  Region region{std::move(shape), {}, {}};
  for_each_in_box(grid, box, [&](std::size_t idx, const Point& p) {
    if (!inside(p)) return;
    if (with_bulk) region.cells.push_back(idx);
    if (with_face && grid.kind(idx) == NodeKind::ReactionFace) region.face_cells.push_back(idx);
  });
  return region;
}

}  // namespace

Region region_weights(const Grid& grid, const RegionShape& shape) {
  const double tol = slack(grid.h());
  return std::visit(
      [&](const auto& s) -> Region {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, WholeDomain>) {
          Region region{s, {}, {}};
          region.cells.resize(grid.size());
          for (std::size_t i = 0; i < grid.size(); ++i) region.cells[i] = i;
          const auto face = grid.face_nodes();
          region.face_cells.assign(face.begin(), face.end());
          return region;
        } else if constexpr (std::is_same_v<S, HalfBall>) {
          if (!(s.radius > 0.0)) throw GeometryError("half ball radius must be positive");
          require_on_face(grid, s.center, "half ball");
          const Box box = ball_box(grid, s.center, s.radius, true);
          require_inside(grid, box, "half ball");
          return collect(
              grid, s, box,
              [&](const Point& p) { return distance(p, s.center) <= s.radius + tol; }, true, true);
        } else if constexpr (std::is_same_v<S, Disc>) {
          if (!(s.radius > 0.0)) throw GeometryError("disc radius must be positive");
          require_on_face(grid, s.center, "disc");
          Box box = ball_box(grid, s.center, s.radius, true);
          box.hi[grid.n()] = 0.0;
          require_inside(grid, box, "disc");
          return collect(
              grid, s, box,
              [&](const Point& p) { return distance(p, s.center) <= s.radius + tol; }, false, true);
        } else if constexpr (std::is_same_v<S, HalfAnnulus>) {
          if (!(s.inner >= 0.0 && s.outer > s.inner)) {
            throw GeometryError("half annulus needs 0 <= inner < outer");
          }
          require_on_face(grid, s.center, "half annulus");
          const Box box = ball_box(grid, s.center, s.outer, true);
          require_inside(grid, box, "half annulus");
          return collect(
              grid, s, box,
              [&](const Point& p) {
                const double d = distance(p, s.center);
                return d > s.inner + tol && d <= s.outer + tol;
              },
              true, true);
        } else {  // Ball
          if (!(s.radius > 0.0)) throw GeometryError("ball radius must be positive");
          const Box box = ball_box(grid, s.center, s.radius, false);
          require_inside(grid, box, "ball");
          return collect(
              grid, s, box,
              [&](const Point& p) { return distance(p, s.center) <= s.radius + tol; }, true, true);
        }
      },
      shape);
}

std::vector<double> boundary_normal_derivative(const Grid& grid, std::span<const double> u) {
  const auto up = grid.stride(grid.n());
  const double inv2h = 1.0 / (2.0 * grid.h());
  std::vector<double> out;
  out.reserve(grid.face_nodes().size());
  for (auto idx : grid.face_nodes()) {
    const double d = (-3.0 * u[idx] + 4.0 * u[idx + up] - u[idx + 2 * up]) * inv2h;
    out.push_back(-d);
  }
  return out;
}

}  // namespace brlab
