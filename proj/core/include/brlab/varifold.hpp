#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "brlab/concentration.hpp"
#include "brlab/geometry.hpp"
#include "brlab/solver.hpp"
#include "brlab/test_field.hpp"

namespace brlab {

/// Symmetric (n+1) x (n+1) matrix, stored inline (at most 3 x 3).
using SymMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

/// T = I - 2 nu nu^T with nu = grad / |grad|; the zero matrix when
/// |grad| <= threshold (in particular when grad = 0).
SymMatrix stress_tensor(const Vec& grad, int n, double threshold = 0.0);

/// A in A_{k,n+1}: trace k and -(n+1) I <= A <= I, with 1e-9 slack.
/// Throws std::invalid_argument when A is not symmetric to 1e-12.
bool a_membership(const SymMatrix& A, int k);

struct StressTensorSample {
  Point location{0, 0, 0};
  double weight = 0.0;  // 1/2 |grad u|^2 times the cell volume
  SymMatrix T;
};

/// Discrete (n-1) generalized varifold of a field: one weighted stress tensor
/// per node whose gradient is above 1e-10 max |grad u|.
struct GeneralizedVarifold {
  int n = 1;
  std::vector<StressTensorSample> samples;
  double mass = 0.0;
};

GeneralizedVarifold build_varifold(const Solution& sol);
/// Only samples located in the region.
GeneralizedVarifold build_varifold(const Solution& sol, const Region& region);

/// sum_w w f(T).
double pair(const GeneralizedVarifold& V, const std::function<double(const SymMatrix&)>& f);

/// <delta V, X> = sum_w w <T, DX>_F with DX evaluated at the sample locations.
double first_variation(const GeneralizedVarifold& V, const TestField& X);

/// (1/eps) int W(u) div_{R^n} X dH^n, the boundary term balancing the first variation.
double boundary_variation_term(const Solution& sol, const TestField& X);

struct StationarityResidual {
  double raw = 0.0;       // max_X |<delta V, X>| / |X|_{C^1}
  double combined = 0.0;  // max_X |<delta V, X> + (1/eps) int W div X| / |X|_{C^1}
  std::vector<double> raw_per_field;
  std::vector<double> combined_per_field;
};

StationarityResidual stationarity_residual(const GeneralizedVarifold& V, const Solution& sol,
                                           std::span<const TestField> battery);

/// Rectifiable varifold estimate on Sigma. For n = 1 each connected cluster
/// of Sigma collapses to its densest point with the 0-plane as tangent; for
/// n = 2 every Sigma point carries a tangent line from a weighted principal
/// direction of the Sigma points within 3r. Tangents are estimates.
struct SigmaPoint {
  Point location{0, 0, 0};
  double theta = 0.0;
  SymMatrix tangent;  // orthogonal projection onto the tangent plane
  bool interior = true;  // neighbourhood of radius 3r lies inside the face
};

struct SigmaVarifold {
  int n = 1;
  std::vector<SigmaPoint> points;
  std::string label = "estimate";
};

SigmaVarifold sigma_varifold(const Grid& grid, const ConcentrationReport& report);

struct DecompositionEntry {
  HalfBall ball{};
  double v_star = 0.0;         // 1/2 int_B |grad u_*|^2
  double v_sigma = 0.0;        // defect mass on B
  double varifold_mass = 0.0;  // pair(V_smallest restricted to B, 1)
  double energy_mass = 0.0;    // mu_smallest(B)
};

std::vector<DecompositionEntry> decompose(const EpsFamily& family, const LimitField& limit,
                                          std::span<const HalfBall> balls);

}  // namespace brlab
