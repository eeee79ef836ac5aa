#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cpd/io.hpp"
#include "cpd/scenario_config.hpp"
#include "cpd/verify.hpp"

namespace cpd {

/// Grid, tags, neighbourhoods, volumes and Dirichlet data of a config.
struct PreparedScenario {
  PointCloud cloud;
  NeighborTable table;
  Material material;
  LoadProgram program;
};

PreparedScenario prepare_scenario(const ScenarioConfig& config);

struct PoissonMeasurement {
  double nu = 0.0;
  double axial_strain = 0.0;
  double lateral_strain = 0.0;
};

/// nu = -lateral / axial. Lateral strain is the mean over the in-dimension
/// axes other than `axis`. In centre mode each strain is a central
/// difference over the points nearest centre +- spacing (ties averaged).
PoissonMeasurement measure_poisson(const PointCloud& cloud, std::span<const Vec3> x, int axis, PoissonProbe probe);

struct ProbeRecord {
  std::string name;
  ProbeValue value;
};

struct LineRecord {
  std::string name;
  std::vector<ProbeValue> stations;
};

struct ScenarioResult {
  PreparedScenario problem;
  IncrementalResult solution;
  PoissonMeasurement poisson;
  std::vector<ProbeRecord> probes;
  std::vector<LineRecord> lines;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
};

/// Runs a config end to end. With a non-empty `output_dir` the bundle is
/// written there: summary.json, newton_log.csv, snapshots, probes and the
/// optional VTK, sparsity and quadrature files. On failure the log and a
/// summary carrying the error are written before the error is rethrown.
ScenarioResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& output_dir = {});

enum class Coefficient { c2, c3 };

struct PoissonRow {
  double ratio = 0.0;
  PoissonMeasurement measurement;
};

/// Sets C2 (or C3) to ratio * C1 and measures nu for every ratio. The
/// interaction is enabled whenever its ratio is positive.
std::vector<PoissonRow> poisson_study(const ScenarioConfig& base, Coefficient which, std::span<const double> ratios,
                                      unsigned threads = 0);

/// `ratio,nu,axial_strain,lateral_strain`
void write_poisson_csv(std::ostream& out, std::span<const PoissonRow> rows);

struct StudyRun {
  double spacing = 0.0;
  double horizon = 0.0;
  std::size_t points = 0;
  std::vector<ProbeRecord> probes;
  std::vector<LineRecord> lines;
  /// Euclidean norm of the change of all point-probe displacements against
  /// the previous run; NaN for the first.
  double difference = 0.0;
};

struct StudyTable {
  std::vector<StudyRun> runs;
  std::vector<std::string> warnings;

  /// Successive differences strictly decrease. Needs at least three runs.
  bool cauchy_decreasing() const;
};

/// Fixed horizon, one run per spacing.
StudyTable convergence_study(const ScenarioConfig& base, std::span<const double> spacings, unsigned threads = 0);

/// Fixed horizon/spacing ratio, one run per horizon. The spacing is snapped to
/// extent / round(extent * ratio / horizon) along the loading axis and the
/// horizon follows it; a snapped horizon is reported in the warnings.
StudyTable nonlocality_study(const ScenarioConfig& base, std::span<const double> horizons, unsigned threads = 0);

/// `spacing,horizon,points,probe,station,X1,X2,X3,u1,u2,u3,difference`
/// Point probes have station 0; line stations count from 0 along the line.
void write_study_csv(std::ostream& out, const StudyTable& table);

/// Oracle checks for a config at a seeded random state near the reference:
/// quadrature, angular momentum, objectivity, translation, symmetry and
/// enumeration equivalence on its grid. The finite-difference checks use the
/// grid itself when it has at most `fd_point_limit` points and otherwise
/// `random_clouds` small random clouds with the same dimension and
/// interactions.
std::vector<VerificationReport> verification_suite(const ScenarioConfig& config, std::uint64_t seed,
                                                   std::size_t fd_point_limit = 150, int random_clouds = 4);

}  // namespace cpd
