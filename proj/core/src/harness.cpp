#include "cpd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "cpd/error.hpp"

namespace cpd {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Runs fn(0..n-1) on up to `threads` workers. Results land by index, so the
// outcome does not depend on scheduling; the lowest-index failure wins.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::exception_ptr> errors(n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  return out;
}

double typical_spacing(const PointCloud& cloud) {
  if (cloud.spacing) return *cloud.spacing;
  return std::pow(cloud.total_volume() / static_cast<double>(cloud.size()), 1.0 / cloud.dim);
}

double axial_strain_between(const ProbeValue& plus, const ProbeValue& minus, int k) {
  const double dX = plus.X[k] - minus.X[k];
  if (!(std::abs(dX) > 0.0)) throw Error(ErrorCode::invalid_argument, "strain probes coincide");
  return (plus.u[k] - minus.u[k]) / dX;
}

nlohmann::json summary_json(const ScenarioConfig& config, const PreparedScenario* p) {
  nlohmann::json j;
  j["config"] = config.to_json();
  j["warnings"] = config.warnings;
  if (p) {
    j["points"] = p->cloud.size();
    j["bonds"] = p->table.total_bonds();
    j["pairs"] = p->table.total_pairs();
    j["triplets"] = p->table.total_triplets();
    j["prescribed_dofs"] = p->program.prescribed.size();
  }
  return j;
}

void write_probe_rows(std::ostream& out, const ProbeValue& v) {
  out << v.X.x() << ',' << v.X.y() << ',' << v.X.z() << ',' << v.u.x() << ',' << v.u.y() << ',' << v.u.z();
}

std::vector<ProbeRecord> take_probes(const ScenarioConfig& c, const PointCloud& cloud, std::span<const Vec3> x) {
  std::vector<ProbeRecord> out;
  for (const auto& p : c.probe_points) out.push_back({p.name, probe_point(cloud, x, p.at)});
  return out;
}

std::vector<LineRecord> take_lines(const ScenarioConfig& c, const PointCloud& cloud, std::span<const Vec3> x) {
  std::vector<LineRecord> out;
  for (const auto& l : c.probe_lines) out.push_back({l.name, probe_line(cloud, x, l.axis, l.through)});
  return out;
}

StudyTable run_study(std::vector<ScenarioConfig> configs, std::vector<std::string> warnings, unsigned threads) {
  StudyTable table;
  table.runs.resize(configs.size());
  parallel_for(configs.size(), threads, [&](std::size_t i) {
    ScenarioResult r = run_scenario(configs[i]);
    StudyRun& run = table.runs[i];
    run.spacing = configs[i].spacing;
    run.horizon = configs[i].horizon;
    run.points = r.problem.cloud.size();
    run.probes = std::move(r.probes);
    run.lines = std::move(r.lines);
  });
  for (std::size_t i = 0; i < table.runs.size(); ++i) {
    StudyRun& run = table.runs[i];
    if (i == 0) {
      run.difference = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const auto& prev = table.runs[i - 1].probes;
    double sq = 0.0;
    for (std::size_t p = 0; p < run.probes.size(); ++p) sq += (run.probes[p].value.u - prev[p].value.u).squaredNorm();
    run.difference = std::sqrt(sq);
  }
  for (const auto& c : configs) {
    for (const auto& w : c.warnings) warnings.push_back(w);
  }
  std::sort(warnings.begin(), warnings.end());
  warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
  table.warnings = std::move(warnings);
  return table;
}

void horizon_warning(ScenarioConfig& c) {
  c.warnings.erase(std::remove_if(c.warnings.begin(), c.warnings.end(),
                                  [](const std::string& w) { return w.starts_with("horizon/spacing"); }),
                   c.warnings.end());
  if (c.horizon < 2.0 * c.spacing) {
    std::ostringstream w;
    w << "horizon/spacing = " << c.horizon / c.spacing << " is below 2; neighbourhoods are sparse";
    c.warnings.push_back(w.str());
  }
}

}  // namespace

PreparedScenario prepare_scenario(const ScenarioConfig& c) {
  PreparedScenario p;
  PointCloud cloud = c.point_cloud ? read_point_cloud_csv(*c.point_cloud, c.dim)
                                   : generate_uniform_grid(c.domain, c.holes, c.spacing, c.dim);
  p.cloud = tag_boundary_layers(std::move(cloud), c.layer(), c.extension.axis);
  p.material = c.material;
  p.material.horizon = c.horizon;
  p.material.validate();
  NeighborOptions options;
  options.horizon = c.horizon;
  options.enabled = p.material.enabled;
  p.table = make_neighbor_table(p.cloud, options);
  p.program.prescribed = extension_dirichlet(p.cloud, c.extension);
  p.program.n_increments = c.increments;
  p.program.tolerance = c.tolerance;
  p.program.max_iterations = c.max_iterations;
  p.program.bisection = c.bisection;
  p.program.validate(3 * p.cloud.size());
  return p;
}

PoissonMeasurement measure_poisson(const PointCloud& cloud, std::span<const Vec3> x, int axis, PoissonProbe probe) {
  if (axis < 0 || axis >= cloud.dim) throw Error(ErrorCode::invalid_argument, "loading axis out of range");
  const Box& b = cloud.bounds;
  Vec3 mid = 0.5 * (b.lo + b.hi);
  if (cloud.dim == 2) mid.z() = 0.0;
  const double d = typical_spacing(cloud);
  double strain[3] = {0.0, 0.0, 0.0};
  for (int k = 0; k < cloud.dim; ++k) {
    Vec3 hi = mid;
    Vec3 lo = mid;
    if (probe == PoissonProbe::centre) {
      hi[k] += d;
      lo[k] -= d;
    } else {
      hi[k] = b.hi[k];
      lo[k] = b.lo[k];
    }
    strain[k] = axial_strain_between(probe_point(cloud, x, hi), probe_point(cloud, x, lo), k);
  }
  PoissonMeasurement m;
  m.axial_strain = strain[axis];
  for (int k = 0; k < cloud.dim; ++k) {
    if (k != axis) m.lateral_strain += strain[k];
  }
  m.lateral_strain /= cloud.dim - 1;
  m.nu = -m.lateral_strain / m.axial_strain;
  return m;
}

ScenarioResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& output_dir) {
  const bool write = !output_dir.empty();
  if (write) std::filesystem::create_directories(output_dir);
  auto fail_summary = [&](const PreparedScenario* p, const Error& e) {
    if (!write) return;
    nlohmann::json j = summary_json(config, p);
    j["converged"] = false;
    j["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.detail()}};
    if (e.point() != kNoPoint) j["error"]["point"] = e.point();
    open_out(output_dir / "summary.json") << j.dump(2) << '\n';
  };

  ScenarioResult r;
  auto t0 = Clock::now();
  try {
    r.problem = prepare_scenario(config);
  } catch (const Error& e) {
    fail_summary(nullptr, e);
    throw;
  }
  r.setup_seconds = seconds_since(t0);
  const PreparedScenario& p = r.problem;

  if (write && config.quadrature_report) {
    auto out = open_out(output_dir / "quadrature.csv");
    write_quadrature_report_csv(out, quadrature_fidelity_report(p.table));
  }

  IncrementalOptions options;
  options.assembly = config.assembly;
  int snapshot = 0;
  if (write && config.snapshots == SnapshotMode::all) {
    options.on_increment = [&](const IncrementLog&, const State& s) {
      char name[32];
      std::snprintf(name, sizeof name, "snapshot_%04d.csv", ++snapshot);
      auto out = open_out(output_dir / name);
      write_snapshot_csv(out, p.cloud, s.x);
    };
  }

  NewtonLog partial;
  t0 = Clock::now();
  try {
    r.solution = run_incremental(p.cloud, p.table, p.material, p.program, options, &partial);
  } catch (const Error& e) {
    if (write && config.newton_log) {
      auto out = open_out(output_dir / "newton_log.csv");
      write_newton_log_csv(out, partial);
    }
    fail_summary(&p, e);
    throw;
  }
  r.solve_seconds = seconds_since(t0);
  const std::vector<Vec3>& x = r.solution.state.x;

  r.poisson = measure_poisson(p.cloud, x, config.extension.axis, config.poisson_probe);
  r.probes = take_probes(config, p.cloud, x);
  r.lines = take_lines(config, p.cloud, x);
  if (!write) return r;

  if (config.newton_log) {
    auto out = open_out(output_dir / "newton_log.csv");
    write_newton_log_csv(out, r.solution.log);
  }
  if (config.snapshots != SnapshotMode::none) {
    auto out = open_out(output_dir / "snapshot_final.csv");
    write_snapshot_csv(out, p.cloud, x);
  }
  if (config.vtk) {
    auto out = open_out(output_dir / "final.vtk");
    write_vtk(out, p.cloud, x, config.name);
  }
  if (config.sparsity) {
    auto out = open_out(output_dir / "sparsity.csv");
    write_sparsity_csv(out, assemble_tangent(p.cloud, p.table, x, p.material, config.assembly));
  }
  if (!r.probes.empty()) {
    auto out = open_out(output_dir / "probes.csv");
    out.precision(17);
    out << "probe,X1,X2,X3,u1,u2,u3,count\n";
    for (const auto& pr : r.probes) {
      out << pr.name << ',';
      write_probe_rows(out, pr.value);
      out << ',' << pr.value.count << '\n';
    }
  }
  for (const auto& line : r.lines) {
    auto out = open_out(output_dir / ("line_" + line.name + ".csv"));
    out.precision(17);
    out << "station,X1,X2,X3,u1,u2,u3,count\n";
    for (std::size_t s = 0; s < line.stations.size(); ++s) {
      out << s << ',';
      write_probe_rows(out, line.stations[s]);
      out << ',' << line.stations[s].count << '\n';
    }
  }

  nlohmann::json j = summary_json(config, &p);
  int iterations = 0;
  for (const auto& inc : r.solution.log.increments) iterations += static_cast<int>(inc.iterations.size());
  j["converged"] = r.solution.log.converged();
  j["increments"] = r.solution.log.increments.size();
  j["newton_iterations"] = iterations;
  j["energy"] = r.solution.energy;
  j["poisson"] = {{"nu", r.poisson.nu},
                  {"axial_strain", r.poisson.axial_strain},
                  {"lateral_strain", r.poisson.lateral_strain}};
  j["setup_seconds"] = r.setup_seconds;
  j["solve_seconds"] = r.solve_seconds;
  open_out(output_dir / "summary.json") << j.dump(2) << '\n';
  return r;
}

std::vector<PoissonRow> poisson_study(const ScenarioConfig& base, Coefficient which, std::span<const double> ratios,
                                      unsigned threads) {
  if (which == Coefficient::c3 && base.dim != 3) {
    throw Error(ErrorCode::invalid_config, "C3 studies need dim 3");
  }
  std::vector<ScenarioConfig> configs;
  for (double ratio : ratios) {
    if (!(ratio >= 0.0) || !std::isfinite(ratio)) throw Error(ErrorCode::invalid_argument, "ratios must be >= 0");
    ScenarioConfig c = base;
    if (which == Coefficient::c2) {
      c.material.c2 = ratio * c.material.c1;
      c.material.enabled.two = base.material.enabled.two || ratio > 0.0;
    } else {
      c.material.c3 = ratio * c.material.c1;
      c.material.enabled.three = base.material.enabled.three || ratio > 0.0;
    }
    configs.push_back(std::move(c));
  }
  std::vector<PoissonRow> rows(configs.size());
  parallel_for(configs.size(), threads, [&](std::size_t i) {
    rows[i].ratio = ratios[i];
    rows[i].measurement = run_scenario(configs[i]).poisson;
  });
  return rows;
}

void write_poisson_csv(std::ostream& out, std::span<const PoissonRow> rows) {
  out << "ratio,nu,axial_strain,lateral_strain\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.ratio << ',' << r.measurement.nu << ',' << r.measurement.axial_strain << ','
        << r.measurement.lateral_strain << '\n';
  }
}

bool StudyTable::cauchy_decreasing() const {
  if (runs.size() < 3) return false;
  for (std::size_t i = 2; i < runs.size(); ++i) {
    if (!(runs[i].difference < runs[i - 1].difference)) return false;
  }
  return true;
}

StudyTable convergence_study(const ScenarioConfig& base, std::span<const double> spacings, unsigned threads) {
  if (base.point_cloud) throw Error(ErrorCode::invalid_config, "studies need a generated grid");
  std::vector<ScenarioConfig> configs;
  for (double h : spacings) {
    if (!(h > 0.0)) throw Error(ErrorCode::invalid_argument, "spacings must be positive");
    ScenarioConfig c = base;
    c.spacing = h;
    c.horizon_ratio.reset();
    horizon_warning(c);
    configs.push_back(std::move(c));
  }
  return run_study(std::move(configs), {}, threads);
}

StudyTable nonlocality_study(const ScenarioConfig& base, std::span<const double> horizons, unsigned threads) {
  if (base.point_cloud) throw Error(ErrorCode::invalid_config, "studies need a generated grid");
  const double ratio = base.horizon_ratio.value_or(base.horizon / base.spacing);
  const double extent = base.domain.extent(base.extension.axis);
  std::vector<ScenarioConfig> configs;
  std::vector<std::string> warnings;
  for (double delta : horizons) {
    if (!(delta > 0.0)) throw Error(ErrorCode::invalid_argument, "horizons must be positive");
    const long cells = std::lround(extent * ratio / delta);
    if (cells < 1) throw Error(ErrorCode::invalid_argument, "horizon larger than the domain");
    ScenarioConfig c = base;
    c.spacing = extent / static_cast<double>(cells);
    c.horizon = ratio * c.spacing;
    c.horizon_ratio = ratio;
    c.material.horizon = c.horizon;
    horizon_warning(c);
    if (std::abs(c.horizon - delta) > 1e-12 * delta) {
      std::ostringstream w;
      w.precision(17);
      w << "horizon " << delta << " snapped to " << c.horizon << " (spacing " << c.spacing << ")";
      warnings.push_back(w.str());
    }
    configs.push_back(std::move(c));
  }
  return run_study(std::move(configs), std::move(warnings), threads);
}

void write_study_csv(std::ostream& out, const StudyTable& table) {
  out << "spacing,horizon,points,probe,station,X1,X2,X3,u1,u2,u3,difference\n";
  out.precision(17);
  for (const auto& run : table.runs) {
    auto lead = [&](const std::string& name, std::size_t station) {
      out << run.spacing << ',' << run.horizon << ',' << run.points << ',' << name << ',' << station << ',';
    };
    auto diff = [&] {
      if (!std::isnan(run.difference)) out << run.difference;
      out << '\n';
    };
    for (const auto& p : run.probes) {
      lead(p.name, 0);
      write_probe_rows(out, p.value);
      out << ',';
      diff();
    }
    for (const auto& l : run.lines) {
      for (std::size_t s = 0; s < l.stations.size(); ++s) {
        lead(l.name, s);
        write_probe_rows(out, l.stations[s]);
        out << ',';
        diff();
      }
    }
  }
}

std::vector<VerificationReport> verification_suite(const ScenarioConfig& config, std::uint64_t seed,
                                                   std::size_t fd_point_limit, int random_clouds) {
  std::mt19937_64 rng(seed);
  const PreparedScenario p = prepare_scenario(config);
  std::vector<VerificationReport> out = quadrature_checks(p.table);
  const double d = typical_spacing(p.cloud);
  // Dyadic so that the rigid shift below is exact.
  const std::vector<Vec3> x = random_state(p.cloud, 0.05 * d, rng, true);

  const Interaction kinds[] = {Interaction::one, Interaction::two, Interaction::three};
  const bool on[] = {p.material.enabled.one, p.material.enabled.two, p.material.enabled.three};
  for (int k = 0; k < 3; ++k) {
    if (on[k]) out.push_back(angular_momentum_check(p.cloud, p.table, x, p.material, kinds[k]));
  }

  const AssemblyOptions var{AssemblyMode::variational, config.assembly.enumeration};
  const AssemblyOptions col{AssemblyMode::collocation, config.assembly.enumeration};
  const DiscreteModel model = make_model(p.cloud, p.table, p.material, var, d);
  out.push_back(objectivity_check(model, x, rng));
  const Vec3 shift = p.cloud.dim == 3 ? Vec3(0.5, -0.25, 0.125) : Vec3(0.5, -0.25, 0.0);
  out.push_back(translation_check(model, x, shift, 0.0));

  out.push_back(symmetry_check(assemble_tangent(p.cloud, p.table, x, p.material, var)));
  VerificationReport pattern = symmetry_check(assemble_tangent(p.cloud, p.table, x, p.material, col));
  pattern.check = "pattern_symmetry_collocation";
  pattern.max_rel_err = 0.0;
  pattern.tolerance = 0.0;
  pattern.pass = pattern.offending.empty();
  out.push_back(pattern);
  out.push_back(enumeration_check(p.cloud, p.table, x, p.material, AssemblyMode::variational));
  out.push_back(enumeration_check(p.cloud, p.table, x, p.material, AssemblyMode::collocation));

  auto fd = [&](const PointCloud& cloud, const NeighborTable& table, const Material& mat, std::span<const Vec3> y,
                double scale, const std::string& suffix) {
    for (const auto& opt : {var, col}) {
      const DiscreteModel m = make_model(cloud, table, mat, opt, scale);
      if (opt.mode == AssemblyMode::variational) {
        out.push_back(fd_gradient_check(m, y));
        out.back().check += suffix;
      }
      out.push_back(fd_tangent_check(m, y));
      out.back().check += std::string(opt.mode == AssemblyMode::variational ? "_variational" : "_collocation") + suffix;
    }
  };
  if (p.cloud.size() <= fd_point_limit) {
    fd(p.cloud, p.table, p.material, x, d, "");
  } else {
    RandomCloudSpec spec;
    spec.dim = config.dim;
    spec.enabled = p.material.enabled;
    spec.horizon_ratio = std::clamp(config.horizon / d, 1.5, 2.5);
    for (int r = 0; r < random_clouds; ++r) {
      spec.hole = r % 2 == 1;
      const RandomProblem rp = random_problem(spec, rng);
      const std::vector<Vec3> y = random_state(rp.cloud, 0.1 * spec.spacing, rng);
      fd(rp.cloud, rp.table, rp.material, y, spec.spacing, "_random" + std::to_string(r));
    }
  }
  return out;
}

}  // namespace cpd
