#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpd/assembly.hpp"
#include "cpd/solver.hpp"

namespace cpd {

struct ProbePointSpec {
  std::string name;
  Vec3 at = Vec3::Zero();
};

struct ProbeLineSpec {
  std::string name;
  int axis = 0;
  Vec3 through = Vec3::Zero();
};

enum class SnapshotMode { none, final, all };

/// Where the strains entering the Poisson ratio are read.
///   centre: central differences across the domain centre, one spacing each way.
///   faces: points nearest the mid-points of the lateral and extension faces.
enum class PoissonProbe { centre, faces };

/// A single JSON document describing grid, material, loading and outputs.
/// Unknown keys are rejected; see configs/ for examples.
struct ScenarioConfig {
  std::string name = "scenario";
  int dim = 2;
  Box domain;
  std::vector<Box> holes;
  double spacing = 0.0;
  /// Optional `id,X1,X2,X3,V` file replacing the generated grid.
  std::optional<std::filesystem::path> point_cloud;
  /// Resolved horizon; `horizon_ratio` is kept when the file gave a ratio.
  double horizon = 0.0;
  std::optional<double> horizon_ratio;
  Material material;
  AssemblyOptions assembly;

  ExtensionSpec extension;
  int increments = 1;
  std::optional<double> layer_thickness;
  double tolerance = 1e-12;
  int max_iterations = 20;
  bool bisection = false;

  SnapshotMode snapshots = SnapshotMode::final;
  bool vtk = false;
  bool newton_log = true;
  bool sparsity = false;
  bool quadrature_report = false;
  std::vector<ProbePointSpec> probe_points;
  std::vector<ProbeLineSpec> probe_lines;
  PoissonProbe poisson_probe = PoissonProbe::centre;

  std::uint64_t seed = 1;
  /// Non-fatal findings of the validation, e.g. a sparse horizon.
  std::vector<std::string> warnings;

  double layer() const { return layer_thickness.value_or(horizon); }
  nlohmann::json to_json() const;
};

/// Validates and converts. Throws InvalidConfig with the offending key.
/// Relative point-cloud paths are resolved against `base_dir`.
ScenarioConfig parse_scenario_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

}  // namespace cpd
