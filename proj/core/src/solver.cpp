#include "brlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace brlab {

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::QuarticDoubleWell:
      return "quartic";
    case PotentialKind::PeierlsNabarro:
      return "peierls_nabarro";
  }
  return "unknown";
}

PotentialKind potential_from_string(const std::string& name) {
  if (name == "quartic") return PotentialKind::QuarticDoubleWell;
  if (name == "peierls_nabarro") return PotentialKind::PeierlsNabarro;
  throw std::invalid_argument("unknown potential '" + name +
                              "' (expected quartic or peierls_nabarro)");
}

double potential_value(PotentialKind kind, double t) noexcept {
  using std::numbers::pi;
  if (kind == PotentialKind::QuarticDoubleWell) {
    const double a = 1.0 - t * t;
    return 0.25 * a * a;
  }
  return (1.0 + std::cos(pi * t)) / (pi * pi);
}

double potential_derivative(PotentialKind kind, double t) noexcept {
  using std::numbers::pi;
  if (kind == PotentialKind::QuarticDoubleWell) return t * t * t - t;
  return -std::sin(pi * t) / pi;
}

double potential_second_derivative(PotentialKind kind, double t) noexcept {
  using std::numbers::pi;
  if (kind == PotentialKind::QuarticDoubleWell) return 3.0 * t * t - 1.0;
  return -std::cos(pi * t);
}

void validate(const SolveParams& params) {
  if (!(params.tol > 0.0)) throw std::invalid_argument("solve: tol must be positive");
  if (params.max_sweeps < 0) throw std::invalid_argument("solve: max_sweeps must be >= 0");
  if (params.relaxation && !(*params.relaxation > 0.0 && *params.relaxation < 2.0)) {
    throw std::invalid_argument("solve: relaxation must lie in (0, 2)");
  }
  if (params.newton_iters < 1) throw std::invalid_argument("solve: newton_iters must be >= 1");
  if (params.check_every < 1) throw std::invalid_argument("solve: check_every must be >= 1");
}

namespace {

// Coefficients of the face equation after ghost elimination:
//   S - 2(n+1) v - c W'(v) = 0,  S = tangential neighbours + 2 u_above, c = 2h/eps.
struct FaceEquation {
  double diag;
  double c;
  PotentialKind kind;

  double value(double s, double v) const noexcept {
    return s - diag * v - c * potential_derivative(kind, v);
  }
  double slope(double v) const noexcept {
    return -diag - c * potential_second_derivative(kind, v);
  }
  double newton(double s, double v, int iters) const noexcept {
    for (int it = 0; it < iters; ++it) {
      const double step = -value(s, v) / slope(v);
      v += step;
      if (std::abs(step) < 1e-15) break;
    }
    return v;
  }
};

struct Stencil {
  int n;
  std::array<int, 3> ext;
  std::ptrdiff_t sx, sy, up;
};

Stencil make_stencil(const Grid& grid) {
  const int n = grid.n();
  return Stencil{n, grid.extents(), grid.stride(0), n == 2 ? grid.stride(1) : 0,
                 grid.stride(n)};
}

double tangential_sum(const Stencil& st, const double* u, std::size_t idx) noexcept {
  double s = u[idx - st.sx] + u[idx + st.sx];
  if (st.n == 2) s += u[idx - st.sy] + u[idx + st.sy];
  return s;
}

// One red or black half sweep. `face` is null for the linear (reflecting) face.
// Returns the largest unrelaxed correction.
double half_sweep(const Stencil& st, double* u, int color, double omega,
                  const FaceEquation* face, int newton_iters) {
  const int nk = st.ext[st.n];
  const int nj = st.n == 2 ? st.ext[1] : 1;
  const int ni = st.ext[0];
  const double diag = 2.0 * (st.n + 1);
  const double inv_diag = 1.0 / diag;
  double max_corr = 0.0;
  for (int k = 0; k < nk - 1; ++k) {
    const int j_lo = st.n == 2 ? 1 : 0;
    const int j_hi = st.n == 2 ? nj - 2 : 0;
    for (int j = j_lo; j <= j_hi; ++j) {
      const int i0 = 1 + ((1 + j + k + color) & 1);
      const std::size_t row = static_cast<std::size_t>(j * st.sy + k * st.up);
      if (k == 0) {
        for (int i = i0; i < ni - 1; i += 2) {
          const std::size_t idx = row + static_cast<std::size_t>(i);
          const double s = tangential_sum(st, u, idx) + 2.0 * u[idx + st.up];
          const double target = face ? face->newton(s, u[idx], newton_iters) : s * inv_diag;
          const double d = target - u[idx];
          max_corr = std::max(max_corr, std::abs(d));
          u[idx] += omega * d;
        }
      } else {
        for (int i = i0; i < ni - 1; i += 2) {
          const std::size_t idx = row + static_cast<std::size_t>(i);
          const double s = tangential_sum(st, u, idx) + u[idx + st.up] + u[idx - st.up];
          const double d = s * inv_diag - u[idx];
          max_corr = std::max(max_corr, std::abs(d));
          u[idx] += omega * d;
        }
      }
    }
  }
  return max_corr;
}

double field_scale(std::span<const double> u) {
  double m = 1.0;
  for (double v : u) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_of(std::span<const double> u) {
  double m = 0.0;
  for (double v : u) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(std::span<const double> u) {
  return std::all_of(u.begin(), u.end(), [](double v) { return std::isfinite(v); });
}

double linear_scheme_residual(const Grid& grid, std::span<const double> u) {
  const Stencil st = make_stencil(grid);
  const double diag = 2.0 * (st.n + 1);
  double r = 0.0;
  for (auto idx : grid.interior_nodes()) {
    const double s = tangential_sum(st, u.data(), idx) + u[idx + st.up] + u[idx - st.up];
    r = std::max(r, std::abs(s / diag - u[idx]));
  }
  for (auto idx : grid.face_nodes()) {
    const double s = tangential_sum(st, u.data(), idx) + 2.0 * u[idx + st.up];
    r = std::max(r, std::abs(s / diag - u[idx]));
  }
  return r / field_scale(u);
}

void check_dirichlet(const Grid& grid, const Field& data) {
  if (data.size() != grid.size()) {
    throw std::invalid_argument("solve: Dirichlet data must be defined on every node");
  }
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    if (grid.kind(idx) != NodeKind::DirichletBoundary) continue;
    const double v = data[idx];
    if (!std::isfinite(v) || std::abs(v) > 1.0 + 1e-12) {
      std::ostringstream msg;
      msg << "solve: Dirichlet value " << v << " at node " << idx << " is outside [-1, 1]";
      throw std::invalid_argument(msg.str());
    }
  }
}

}  // namespace

double scheme_residual(const Grid& grid, std::span<const double> u, double epsilon,
                       PotentialKind potential) {
  const Stencil st = make_stencil(grid);
  const double diag = 2.0 * (st.n + 1);
  const FaceEquation face{diag, 2.0 * grid.h() / epsilon, potential};
  double r = 0.0;
  for (auto idx : grid.interior_nodes()) {
    const double s = tangential_sum(st, u.data(), idx) + u[idx + st.up] + u[idx - st.up];
    r = std::max(r, std::abs(s / diag - u[idx]));
  }
  for (auto idx : grid.face_nodes()) {
    const double s = tangential_sum(st, u.data(), idx) + 2.0 * u[idx + st.up];
    r = std::max(r, std::abs(face.value(s, u[idx]) / face.slope(u[idx])));
  }
  return r / field_scale(u);
}

Solution Solution::from_field(std::shared_ptr<const Grid> grid, Field u, double epsilon,
                              PotentialKind potential) {
  if (!grid || u.size() != grid->size()) {
    throw std::invalid_argument("solution: field size does not match grid");
  }
  Solution sol;
  sol.final_residual = scheme_residual(*grid, u, epsilon, potential);
  sol.max_abs = max_abs_of(u);
  sol.grid = std::move(grid);
  sol.u = std::move(u);
  sol.epsilon = epsilon;
  sol.potential = potential;
  sol.converged = true;
  sol.sweeps_used = 0;
  return sol;
}

ResidualFields residual(const Solution& sol) {
  const Grid& grid = sol.mesh();
  const Stencil st = make_stencil(grid);
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  const double diag = 2.0 * (st.n + 1);
  ResidualFields out;
  out.interior.assign(grid.size(), 0.0);
  for (auto idx : grid.interior_nodes()) {
    const double s = tangential_sum(st, sol.u.data(), idx) + sol.u[idx + st.up] +
                     sol.u[idx - st.up];
    out.interior[idx] = (s - diag * sol.u[idx]) * inv_h2;
  }
  out.face = boundary_normal_derivative(grid, sol.u);
  const auto face = grid.face_nodes();
  for (std::size_t f = 0; f < face.size(); ++f) {
    out.face[f] += potential_derivative(sol.potential, sol.u[face[f]]) / sol.epsilon;
  }
  return out;
}

double default_relaxation(const Grid& grid) {
  using std::numbers::pi;
  const auto& spec = grid.spec();
  double rho = 0.0;
  for (int a = 0; a < spec.n; ++a) rho += std::cos(pi * spec.h / (2.0 * spec.half_widths[a]));
  rho += std::cos(pi * spec.h / (2.0 * spec.height));
  rho /= static_cast<double>(spec.n + 1);
  return 2.0 / (1.0 + std::sqrt(1.0 - rho * rho));
}

Field harmonic_extension(const Grid& grid, const Field& dirichlet, double tol, int max_sweeps) {
  check_dirichlet(grid, dirichlet);
  double mean = 0.0;
  std::size_t count = 0;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    if (grid.kind(idx) == NodeKind::DirichletBoundary) {
      mean += dirichlet[idx];
      ++count;
    }
  }
  mean /= static_cast<double>(std::max<std::size_t>(count, 1));
  Field u(grid.size(), mean);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    if (grid.kind(idx) == NodeKind::DirichletBoundary) u[idx] = dirichlet[idx];
  }
  const Stencil st = make_stencil(grid);
  const double omega = default_relaxation(grid);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (sweep % 10 == 0 && linear_scheme_residual(grid, u) <= tol) break;
    half_sweep(st, u.data(), 0, omega, nullptr, 0);
    half_sweep(st, u.data(), 1, omega, nullptr, 0);
  }
  return u;
}

Solution solve(std::shared_ptr<const Grid> grid_ptr, double epsilon, PotentialKind potential,
               const Field& dirichlet, const std::optional<Field>& initial_guess,
               const SolveParams& params) {
  if (!grid_ptr) throw std::invalid_argument("solve: grid is null");
  const Grid& grid = *grid_ptr;
  validate(params);
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("solve: epsilon must be positive");
  }
  if (epsilon < 2.0 * grid.h()) {
    std::ostringstream msg;
    msg << "solve: epsilon = " << epsilon << " violates the resolution guard eps >= 2h (h = "
        << grid.h() << ")";
    throw std::invalid_argument(msg.str());
  }
  check_dirichlet(grid, dirichlet);

  Field u;
  if (initial_guess) {
    if (initial_guess->size() != grid.size()) {
      throw std::invalid_argument("solve: initial guess size does not match grid");
    }
    u = *initial_guess;
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
      if (grid.kind(idx) == NodeKind::DirichletBoundary) u[idx] = dirichlet[idx];
    }
  } else {
    u = harmonic_extension(grid, dirichlet, 1e-4, params.max_sweeps);
  }

  const Stencil st = make_stencil(grid);
  const double diag = 2.0 * (st.n + 1);
  const FaceEquation face{diag, 2.0 * grid.h() / epsilon, potential};
  const double omega = params.relaxation.value_or(default_relaxation(grid));

  Solution sol;
  sol.epsilon = epsilon;
  sol.potential = potential;
  int sweep = 0;
  double res = scheme_residual(grid, u, epsilon, potential);
  while (res > params.tol && sweep < params.max_sweeps) {
    half_sweep(st, u.data(), 0, omega, &face, params.newton_iters);
    half_sweep(st, u.data(), 1, omega, &face, params.newton_iters);
    ++sweep;
    if (params.observer && params.observe_every > 0 && sweep % params.observe_every == 0) {
      params.observer(sweep, u);
    }
    if (sweep % params.check_every == 0 || sweep == params.max_sweeps) {
      if (!all_finite(u)) {
        throw SolverError("solve: non-finite value detected at sweep " + std::to_string(sweep),
                          sweep);
      }
      res = scheme_residual(grid, u, epsilon, potential);
    }
  }
  if (!all_finite(u)) {
    throw SolverError("solve: non-finite value detected at sweep " + std::to_string(sweep),
                      sweep);
  }
  sol.final_residual = res;
  sol.converged = res <= params.tol;
  sol.sweeps_used = sweep;
  sol.max_abs = max_abs_of(u);
  sol.u = std::move(u);
  sol.grid = std::move(grid_ptr);
  return sol;
}

double exact_layer_value(double x1, double y, double epsilon) noexcept {
  return 2.0 / std::numbers::pi * std::atan(x1 / (y + epsilon));
}

Field exact_layer(const Grid& grid, double epsilon, double shift) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("exact_layer: epsilon must be positive");
  Field u(grid.size());
  const int n = grid.n();
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const Point p = grid.position(idx);
    u[idx] = exact_layer_value(p[0] - shift, p[n], epsilon);
  }
  return u;
}

Field two_phase_data(const Grid& grid, const BoundaryProfile& profile) {
  Field data(grid.size(), 0.0);
  const double L = grid.spec().half_widths[0];
  const double tol = 1e-9 * grid.h();
  const int n = grid.n();
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    if (grid.kind(idx) != NodeKind::DirichletBoundary) continue;
    const Point p = grid.position(idx);
    data[idx] = std::visit(
        [&](const auto& prof) -> double {
          using P = std::decay_t<decltype(prof)>;
          if constexpr (std::is_same_v<P, StepProfile>) {
            if (p[0] <= -L + tol) return -1.0;
            if (p[0] >= L - tol) return 1.0;
            return p[0] / L;
          } else if constexpr (std::is_same_v<P, LayerTraceProfile>) {
            return exact_layer_value(p[0], p[n], prof.epsilon);
          } else {
            return prof.value;
          }
        },
        profile);
  }
  return data;
}

}  // namespace brlab
