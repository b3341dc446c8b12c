#pragma once

#include <memory>
#include <span>
#include <vector>

#include "brlab/geometry.hpp"
#include "brlab/solver.hpp"
#include "brlab/test_field.hpp"

namespace brlab {

struct EnergyBreakdown {
  double dirichlet = 0.0;  // 1/2 int |grad u|^2 over the region
  double potential = 0.0;  // 1/eps int W(u) over the region's part of the reaction face
  double total = 0.0;
};

/// Cell masses of the energy measure: 1/2 |grad u|^2 times the cell volume in
/// the bulk, W(u)/eps times h^n on reaction-face cells.
struct EnergyMeasure {
  std::shared_ptr<const Grid> grid;
  double epsilon = 0.0;
  std::vector<double> bulk;  // per node
  std::vector<double> face;  // per node, nonzero only on the reaction face

  double total() const noexcept;
};

/// Nodal gradient: centered differences in the interior, three-point
/// one-sided differences on the slab faces (the same stencil as
/// boundary_normal_derivative on the reaction face).
Vec node_gradient(const Grid& grid, std::span<const double> u, std::size_t idx) noexcept;
std::vector<Vec> gradient_field(const Grid& grid, std::span<const double> u);

EnergyMeasure energy_measure(const Solution& sol);

EnergyBreakdown energy(const EnergyMeasure& measure, const Region& region);
EnergyBreakdown energy(const Solution& sol, const Region& region);

/// Edge form of E_eps over the whole grid: 1/2 sum over grid edges of
/// (u_a - u_b)^2 times the clipped dual-face area over h, plus the face
/// potential term. The discretized equations are exactly its stationarity
/// conditions, so relaxation sweeps do not increase it.
double scheme_energy(const Solution& sol);

/// I(r, x) = r^{1-n} E(u, B+_r(x)).
double scaled_energy(const EnergyMeasure& measure, const Point& x, double r);
double scaled_energy(const Solution& sol, const Point& x, double r);

/// Scaled energies at increasing radii plus the two cumulative right-hand
/// terms of the monotonicity identity measured from radii.front():
///   term_sphere[k] = int_{A(r_0, r_k)} |y-x|^{-(n+1)} ((y-x) . grad u)^2 dy
///   term_disc[k]   = int_{r_0}^{r_k} r^{-n} int_{D_r(x)} W(u)/eps dH^n dr
struct ScaledEnergyProfile {
  Point center{0, 0, 0};
  std::vector<double> radii;
  std::vector<double> scaled;
  std::vector<double> term_sphere;
  std::vector<double> term_disc;

  /// I(r_k) - I(r_0) - term_sphere[k] - term_disc[k].
  double identity_gap(std::size_t k) const;
  /// Largest drop I(r_{k-1}) - I(r_k) (zero when nondecreasing).
  double max_violation() const;
};

ScaledEnergyProfile monotonicity_profile(const Solution& sol, const Point& x,
                                         std::span<const double> radii);
ScaledEnergyProfile monotonicity_profile(const Solution& sol, const EnergyMeasure& measure,
                                         const Point& x, std::span<const double> radii);

/// Log-spaced radii in [r_min, r_max], both ends included.
std::vector<double> log_radii(double r_min, double r_max, int count);

/// int (1/2 |grad u|^2 div X - DX<grad u, grad u>) dx + (1/eps) int W(u) div_{R^n} X dH^n.
/// Vanishes for exact critical points and tangential, compactly supported X.
double inner_variation_residual(const Solution& sol, const TestField& field);

/// Largest excess max_r I(r, x) - 2^{n-1} I(R, 0) over the given face centers
/// (each with |x| < R/2) and radii r <= R - |x| sampled at `samples` points.
double scaled_energy_corollary_excess(const EnergyMeasure& measure, double R,
                                      std::span<const Point> centers, int samples);

}  // namespace brlab
