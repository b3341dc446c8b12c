#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "brlab/geometry.hpp"

namespace brlab {

enum class PotentialKind { QuarticDoubleWell, PeierlsNabarro };

std::string to_string(PotentialKind kind);
PotentialKind potential_from_string(const std::string& name);

/// W(t): (1 - t^2)^2 / 4 for the quartic well, (1 + cos(pi t)) / pi^2 for
/// Peierls-Nabarro.
double potential_value(PotentialKind kind, double t) noexcept;
/// W'(t).
double potential_derivative(PotentialKind kind, double t) noexcept;
/// W''(t).
double potential_second_derivative(PotentialKind kind, double t) noexcept;

class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, int sweep)
      : std::runtime_error(what), sweep_(sweep) {}
  int sweep() const noexcept { return sweep_; }

private:
  int sweep_;
};

struct SolveParams {
  double tol = 1e-10;                 // Jacobi-normalized residual target, relative to field scale
  int max_sweeps = 200000;
  std::optional<double> relaxation;   // SOR factor; estimated from the grid when unset
  int newton_iters = 5;               // per face node and sweep
  int check_every = 10;               // sweeps between convergence checks
  int observe_every = 0;              // call observer every k sweeps (0 disables)
  std::function<void(int sweep, const Field& u)> observer;
};

void validate(const SolveParams& params);

/// A (discrete) critical point of E_eps together with its convergence record.
struct Solution {
  std::shared_ptr<const Grid> grid;
  Field u;
  double epsilon = 0.0;
  PotentialKind potential = PotentialKind::QuarticDoubleWell;
  bool converged = false;
  double final_residual = 0.0;  // scheme residual, Jacobi normalized, over field scale
  int sweeps_used = 0;
  double max_abs = 0.0;         // max |u| over all nodes

  const Grid& mesh() const noexcept { return *grid; }

  /// Wraps a field (e.g. a closed-form one) as a solution; the residual is
  /// measured, and the field is marked converged.
  static Solution from_field(std::shared_ptr<const Grid> grid, Field u, double epsilon,
                             PotentialKind potential);
};

struct ResidualFields {
  Field interior;              // discrete Laplacian at interior nodes, 0 elsewhere
  std::vector<double> face;    // du/dnu + W'(u)/eps per face node (Grid::face_nodes order)
};

/// Consistency residual of a field: the (2(n+1)+1)-point Laplacian in the
/// interior and the one-sided Neumann defect on the reaction face.
ResidualFields residual(const Solution& sol);

/// Largest Jacobi correction of the ghost-node scheme, divided by the field
/// scale max(1, max|u|). Zero exactly at a discrete solution.
double scheme_residual(const Grid& grid, std::span<const double> u, double epsilon,
                       PotentialKind potential);

/// SOR factor estimated from the Jacobi spectral radius of the slab, treating
/// the Neumann face as a reflection.
double default_relaxation(const Grid& grid);

Solution solve(std::shared_ptr<const Grid> grid, double epsilon, PotentialKind potential,
               const Field& dirichlet, const std::optional<Field>& initial_guess,
               const SolveParams& params);

/// Harmonic extension of the Dirichlet data with a reflecting (zero flux)
/// reaction face.
Field harmonic_extension(const Grid& grid, const Field& dirichlet, double tol, int max_sweeps);

/// u(x, y) = (2/pi) atan(x_1 / (x_{n+1} + eps)), constant in x_2 when n = 2.
/// Harmonic and an exact solution of the Peierls-Nabarro boundary reaction.
Field exact_layer(const Grid& grid, double epsilon, double shift = 0.0);
double exact_layer_value(double x1, double y, double epsilon) noexcept;

struct StepProfile {};
struct LayerTraceProfile {
  double epsilon;
};
struct ConstantProfile {
  double value;
};
using BoundaryProfile = std::variant<StepProfile, LayerTraceProfile, ConstantProfile>;

/// Dirichlet data on the lateral and top faces (zero at other nodes).
/// Step: -1 at x_1 = -L, +1 at x_1 = +L, linear x_1 / L on the remaining faces.
Field two_phase_data(const Grid& grid, const BoundaryProfile& profile);

}  // namespace brlab
