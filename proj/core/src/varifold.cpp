#include "brlab/varifold.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "brlab/energy.hpp"

namespace brlab {

SymMatrix stress_tensor(const Vec& grad, int n, double threshold) {
  const int d = n + 1;
  SymMatrix T = SymMatrix::Zero(d, d);
  double g2 = 0.0;
  for (int a = 0; a < d; ++a) g2 += grad[a] * grad[a];
  const double g = std::sqrt(g2);
  if (g == 0.0 || g <= threshold) return T;
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      T(a, b) = (a == b ? 1.0 : 0.0) - 2.0 * grad[a] * grad[b] / g2;
    }
  }
  return T;
}

bool a_membership(const SymMatrix& A, int k) {
  if (A.rows() != A.cols()) throw std::invalid_argument("a_membership: matrix is not square");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("a_membership: matrix is not symmetric");
  }
  const double d = static_cast<double>(A.rows());
  if (std::abs(A.trace() - k) > 1e-9) return false;
  Eigen::SelfAdjointEigenSolver<SymMatrix> eig(A, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  return ev.minCoeff() >= -d - 1e-9 && ev.maxCoeff() <= 1.0 + 1e-9;
}

namespace {

GeneralizedVarifold build_from(const Solution& sol, std::span<const std::size_t> nodes) {
  const Grid& grid = sol.mesh();
  const auto grads = gradient_field(grid, sol.u);
  double gmax = 0.0;
  for (const Vec& g : grads) gmax = std::max(gmax, std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]));
  const double threshold = 1e-10 * gmax;
  GeneralizedVarifold V;
  V.n = grid.n();
  for (auto idx : nodes) {
    const Vec& g = grads[idx];
    const double g2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
    if (g2 == 0.0 || std::sqrt(g2) <= threshold) continue;
    StressTensorSample s;
    s.location = grid.position(idx);
    s.weight = 0.5 * g2 * grid.cell_volume(idx);
    s.T = stress_tensor(g, grid.n(), threshold);
    V.mass += s.weight;
    V.samples.push_back(std::move(s));
  }
  return V;
}

}  // namespace

GeneralizedVarifold build_varifold(const Solution& sol) {
  std::vector<std::size_t> all(sol.mesh().size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return build_from(sol, all);
}

GeneralizedVarifold build_varifold(const Solution& sol, const Region& region) {
  return build_from(sol, region.cells);
}

double pair(const GeneralizedVarifold& V, const std::function<double(const SymMatrix&)>& f) {
  double s = 0.0;
  for (const auto& sample : V.samples) s += sample.weight * f(sample.T);
  return s;
}

double first_variation(const GeneralizedVarifold& V, const TestField& X) {
  const int d = V.n + 1;
  double s = 0.0;
  for (const auto& sample : V.samples) {
    const Jacobian j = X.jacobian(sample.location);
    double frob = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) frob += sample.T(a, b) * j[a][b];
    s += sample.weight * frob;
  }
  return s;
}

double boundary_variation_term(const Solution& sol, const TestField& X) {
  const Grid& grid = sol.mesh();
  double s = 0.0;
  for (auto idx : grid.face_nodes()) {
    const Jacobian j = X.jacobian(grid.position(idx));
    double div = 0.0;
    for (int a = 0; a < grid.n(); ++a) div += j[a][a];
    s += potential_value(sol.potential, sol.u[idx]) * div;
  }
  return s * grid.face_cell_area() / sol.epsilon;
}

StationarityResidual stationarity_residual(const GeneralizedVarifold& V, const Solution& sol,
                                           std::span<const TestField> battery) {
  if (battery.empty()) throw std::invalid_argument("stationarity residual: empty battery");
  StationarityResidual out;
  for (const TestField& X : battery) {
    const double norm = X.c1_norm(sol.mesh());
    if (!(norm > 0.0)) throw std::invalid_argument("stationarity residual: zero test field");
    const double fv = first_variation(V, X);
    const double bt = boundary_variation_term(sol, X);
    out.raw_per_field.push_back(std::abs(fv) / norm);
    out.combined_per_field.push_back(std::abs(fv + bt) / norm);
  }
  out.raw = *std::max_element(out.raw_per_field.begin(), out.raw_per_field.end());
  out.combined = *std::max_element(out.combined_per_field.begin(), out.combined_per_field.end());
  return out;
}

SigmaVarifold sigma_varifold(const Grid& grid, const ConcentrationReport& report) {
  if (report.sigma_nodes.empty()) throw std::invalid_argument("sigma varifold: Sigma is empty");
  const int n = grid.n();
  const int d = n + 1;
  SigmaVarifold out;
  out.n = n;
  if (n == 1) {
    std::size_t start = 0;
    const auto& nodes = report.sigma_nodes;
    for (std::size_t i = 1; i <= nodes.size(); ++i) {
      const bool split = i == nodes.size() ||
                         nodes[i] != nodes[i - 1] + static_cast<std::size_t>(grid.stride(0));
      if (!split) continue;
      std::size_t best = start;
      for (std::size_t k = start; k < i; ++k) {
        if (report.theta[k] > report.theta[best]) best = k;
      }
      out.points.push_back({report.sigma_points[best], report.theta[best],
                            SymMatrix::Zero(d, d), true});
      start = i;
    }
    return out;
  }
  const double reach = 3.0 * report.r;
  for (std::size_t i = 0; i < report.sigma_points.size(); ++i) {
    const Point& p = report.sigma_points[i];
    double wsum = 0.0;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (std::size_t j = 0; j < report.sigma_points.size(); ++j) {
      const Point& q = report.sigma_points[j];
      if (distance(p, q) > reach) continue;
      wsum += report.theta[j];
      mean += report.theta[j] * Eigen::Vector2d(q[0], q[1]);
    }
    mean /= wsum;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (std::size_t j = 0; j < report.sigma_points.size(); ++j) {
      const Point& q = report.sigma_points[j];
      if (distance(p, q) > reach) continue;
      const Eigen::Vector2d v = Eigen::Vector2d(q[0], q[1]) - mean;
      cov += report.theta[j] * v * v.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    const Eigen::Vector2d t = eig.eigenvectors().col(1);
    SymMatrix P = SymMatrix::Zero(d, d);
    P.topLeftCorner(2, 2) = t * t.transpose();
    bool interior = true;
    for (int a = 0; a < n; ++a) {
      interior = interior && std::abs(p[a]) + reach <= grid.spec().half_widths[a];
    }
    out.points.push_back({p, report.theta[i], P, interior});
  }
  return out;
}

std::vector<DecompositionEntry> decompose(const EpsFamily& family, const LimitField& limit,
                                          std::span<const HalfBall> balls) {
  const auto defects = defect_measure(family, balls);
  const Solution star = Solution::from_field(limit.grid, limit.u_star, limit.provenance_epsilon,
                                             limit.potential);
  const EnergyMeasure star_measure = energy_measure(star);
  std::vector<DecompositionEntry> out;
  for (std::size_t b = 0; b < balls.size(); ++b) {
    const Region region = region_weights(family.grid(), balls[b]);
    DecompositionEntry e;
    e.ball = balls[b];
    e.v_star = energy(star_measure, region).dirichlet;
    e.v_sigma = defects[b].defect;
    e.varifold_mass = build_varifold(family.smallest(), region).mass;
    e.energy_mass = defects[b].energy_mass;
    out.push_back(e);
  }
  return out;
}

}  // namespace brlab
