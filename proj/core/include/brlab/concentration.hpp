#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "brlab/energy.hpp"
#include "brlab/geometry.hpp"
#include "brlab/solver.hpp"

namespace brlab {

/// Converged solutions on one grid with strictly decreasing epsilon.
class EpsFamily {
public:
  explicit EpsFamily(std::vector<Solution> members);

  const std::vector<Solution>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  const Solution& smallest() const noexcept { return members_.back(); }
  const Grid& grid() const noexcept { return *members_.front().grid; }
  /// Energy measure of member i (computed once).
  const EnergyMeasure& measure(std::size_t i) const noexcept { return measures_[i]; }
  const EnergyMeasure& smallest_measure() const noexcept { return measures_.back(); }
  /// Total energy of every member; E_0 is their maximum.
  const std::vector<double>& totals() const noexcept { return totals_; }
  double e0() const noexcept { return e0_; }
  /// Relative spread (max - min) / max of the totals: the epsilon window.
  double energy_window() const noexcept;
  /// Family without its smallest member.
  EpsFamily without_smallest() const;

private:
  std::vector<Solution> members_;
  std::vector<EnergyMeasure> measures_;
  std::vector<double> totals_;
  double e0_ = 0.0;
};

/// theta(r) = mu(B+_r(x)) / r^{n-1}, with omega_{n-1} taken as 1.
struct DensityProfile {
  Point center{0, 0, 0};
  std::vector<double> radii;
  std::vector<double> theta;
};

DensityProfile density_profile(const EnergyMeasure& measure, const Point& x,
                               std::span<const double> radii);

/// Decay of mu(B_r(x)) / r^{n-1} at an interior point, fitted as C r^beta.
struct InteriorDecay {
  Point center{0, 0, 0};
  std::vector<double> radii;
  std::vector<double> values;
  bool exact_zero = false;
  double beta = std::numeric_limits<double>::quiet_NaN();
};

InteriorDecay interior_density_check(const EpsFamily& family, const Point& x,
                                     std::span<const double> radii);
InteriorDecay interior_density_check(const EnergyMeasure& measure, const Point& x,
                                     std::span<const double> radii);

struct ConcentrationReport {
  double eta0 = 0.0;
  double r = 0.0;
  double epsilon = 0.0;  // member the set was computed for
  double e0 = 0.0;
  std::vector<std::size_t> sigma_nodes;  // face nodes in Sigma_{i,r}
  std::vector<Point> sigma_points;
  std::vector<double> theta;             // r^{1-n} mu(B+_r(x)) at each Sigma point
  std::vector<std::size_t> sigma_half;   // Sigma_{i,r/2}
  bool nested = true;                    // Sigma_{i,r/2} subset of Sigma_{i,r}
  /// (|Sigma| / r) * eta0 / E_0: the constant in the covering bound.
  double covering_constant = 0.0;
};

/// Face nodes x where r^{1-n} mu(B+_r(x)) >= eta0, among the nodes whose
/// half-ball of radius `reach` (default r) stays inside the grid.
std::vector<std::size_t> threshold_set(const EnergyMeasure& measure, double r, double eta0,
                                       std::optional<double> reach = std::nullopt);

ConcentrationReport concentration_set(const EpsFamily& family, double r, double eta0);

struct ClearingOut {
  double scaled_energy = 0.0;  // I(R, x)
  double min_abs = 0.0;        // min |u| over face nodes in D_{R/2}(x)

  bool conclusion_holds() const noexcept { return min_abs >= 0.5; }
  /// True when the implication "I <= eta => min |u| >= 1/2" is not contradicted.
  bool implication_holds(double eta) const noexcept {
    return scaled_energy > eta || conclusion_holds();
  }
};

ClearingOut clearing_out_check(const Solution& sol, const Point& x, double R);
ClearingOut clearing_out_check(const Solution& sol, const EnergyMeasure& measure, const Point& x,
                               double R);

/// Randomized clearing-out trials on translated Peierls-Nabarro layers.
struct CalibrationSpec {
  GridSpec grid{1, 1.0 / 256, {1.0}, 1.0};
  double epsilon = 0.0125;
  double R = 0.2;
  Point center{0, 0, 0};
  double shift_range = 0.4;  // layer centers drawn uniformly from center +- shift_range
  int samples = 100;
  std::uint64_t seed = 0;
};

struct CalibrationTrial {
  double shift = 0.0;
  ClearingOut check;
};

std::vector<CalibrationTrial> clearing_out_trials(const CalibrationSpec& spec);

struct Calibration {
  double eta0 = 0.0;
  double min_failing_energy = std::numeric_limits<double>::infinity();
  std::vector<CalibrationTrial> trials;
};

/// eta0 = the largest trial energy that is still below every energy at which
/// the clearing-out conclusion failed. Requires eps / R <= 1/16.
Calibration calibrate_eta0(const CalibrationSpec& spec);

/// Per-member int W(u_i)/eps_i over a face disc, with the log-log slope in eps.
struct PotentialDecay {
  std::vector<double> epsilons;
  std::vector<double> values;
  double slope = std::numeric_limits<double>::quiet_NaN();
};

PotentialDecay potential_decay(const EpsFamily& family, const Disc& region,
                               std::span<const Point> sigma);

/// Proxy for the weak limit u_*: the smallest-epsilon member.
struct LimitField {
  std::shared_ptr<const Grid> grid;
  Field u_star;
  double provenance_epsilon = 0.0;
  PotentialKind potential = PotentialKind::QuarticDoubleWell;
};

LimitField limit_field(const EpsFamily& family);

struct FaceComponent {
  std::vector<std::size_t> nodes;
  double mean_abs = 0.0;
  bool sign_constant = true;
  int sign = 0;
};

/// Connected components of the reaction face at distance > margin from Sigma,
/// with the mean |u_*| and sign consistency on each.
std::vector<FaceComponent> limit_face_components(const LimitField& limit,
                                                 std::span<const Point> sigma, double margin);

struct DefectEntry {
  HalfBall ball{};
  double energy_mass = 0.0;     // mu_{smallest}(B)
  double limit_dirichlet = 0.0; // 1/2 int_B |grad u_*|^2
  double defect = 0.0;          // mu_Sigma(B)
};

std::vector<DefectEntry> defect_measure(const EpsFamily& family, std::span<const HalfBall> balls);

/// Zero set of u on the bottom face: sign changes between neighbouring bottom
/// nodes (linearly interpolated) and exact zeros.
std::vector<Point> face_zero_set(const Grid& grid, std::span<const double> u);

/// Exact Hausdorff distance between finite point sets (brute force).
double hausdorff_distance(std::span<const Point> a, std::span<const Point> b);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace brlab
