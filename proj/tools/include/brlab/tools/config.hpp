#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "brlab/concentration.hpp"
#include "brlab/geometry.hpp"
#include "brlab/solver.hpp"
#include "brlab/tools/output.hpp"

namespace brlab::tools {

/// Invalid configuration; `field` is the JSON path of the offending entry.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

enum class ScenarioKind { Constant, TwoPhase, LayerTrace };

std::string to_string(ScenarioKind kind);

struct Scenario {
  ScenarioKind kind = ScenarioKind::TwoPhase;
  double value = 1.0;                   // constant scenario
  std::optional<double> layer_epsilon;  // layer trace; defaults to each member's eps
};

struct RadiiSpec {
  double min = 0.0;
  double max = 0.0;
  int count = 0;
  std::vector<double> list;  // explicit radii win over min/max/count

  std::vector<double> values() const;
};

struct AnalysisPlan {
  std::vector<Point> centers{{0, 0, 0}};
  RadiiSpec radii;
  std::optional<double> eta0;  // unset: calibrate
  CalibrationSpec calibration;
  double concentration_radius = 0.2;
  std::vector<HalfBall> balls;
  Point battery_center{0, 0, 0};
  std::vector<double> battery_scales;
  std::optional<Disc> decay_region;
  std::vector<Point> interior_points;
  RadiiSpec interior_radii;
  double corollary_R = 0.0;  // 0 disables
  std::vector<Point> corollary_centers;
  int corollary_samples = 16;
};

struct ValidatePlan {
  std::vector<double> spacings{1.0 / 64, 1.0 / 128, 1.0 / 256};
  double epsilon = 0.25;
  double tol = 1e-11;
  double min_order = 1.8;
  double min_identity_rate = 0.8;
  double min_variation_rate = 0.8;
  RadiiSpec radii{1.0 / 16, 0.8, 12, {}};
  Point battery_center{0.25, 0, 0};
  std::vector<double> battery_scales{0.1, 0.2, 0.4};
};

struct ScenarioConfig {
  GridSpec grid;
  PotentialKind potential = PotentialKind::QuarticDoubleWell;
  Scenario scenario;
  std::vector<double> epsilons;
  SolveParams solver;
  AnalysisPlan analysis;
  ValidatePlan validate;
  std::optional<std::string> output;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Parses and validates; throws ConfigError naming the field.
ScenarioConfig parse_config(const Json& j);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Dirichlet data of the scenario for one member.
Field scenario_data(const Grid& grid, const Scenario& scenario, double epsilon);

}  // namespace brlab::tools
