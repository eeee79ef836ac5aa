#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpd/error.hpp"
#include "cpd/harness.hpp"

namespace fs = std::filesystem;

namespace {

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

// Writes to `dir/name` when a directory was given, otherwise to stdout.
template <class Fn>
void emit(const std::string& dir, const std::string& name, Fn&& write) {
  if (dir.empty()) {
    write(std::cout);
    return;
  }
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name);
  if (!out) throw cpd::Error(cpd::ErrorCode::io, "cannot write " + (fs::path(dir) / name).string());
  write(out);
  std::cerr << "wrote " << (fs::path(dir) / name).string() << '\n';
}

int cmd_run(const std::string& config_path, std::string out_dir, const std::string& mode) {
  cpd::ScenarioConfig c = cpd::load_scenario_config(config_path);
  if (!mode.empty()) c.assembly.mode = cpd::parse_assembly_mode(mode);
  print_warnings(c.warnings);
  if (out_dir.empty()) out_dir = "out/" + c.name;
  const cpd::ScenarioResult r = cpd::run_scenario(c, out_dir);

  int iterations = 0;
  for (const auto& inc : r.solution.log.increments) iterations += static_cast<int>(inc.iterations.size());
  std::cout << c.name << ": " << r.problem.cloud.size() << " points, " << r.problem.table.total_bonds()
            << " bonds, " << r.problem.table.total_pairs() << " pairs, " << r.problem.table.total_triplets()
            << " triplets\n";
  std::cout << "  " << r.solution.log.increments.size() << " increments, " << iterations << " Newton iterations, "
            << "setup " << r.setup_seconds << " s, solve " << r.solve_seconds << " s\n";
  std::cout << "  nu = " << r.poisson.nu << " (axial strain " << r.poisson.axial_strain << ")\n";
  std::cout << "  output in " << out_dir << '\n';
  return 0;
}

int cmd_sweep(const std::string& kind, const std::string& config_path, const std::vector<double>& values,
              const std::string& coefficient, const std::string& out_dir, unsigned threads) {
  const cpd::ScenarioConfig c = cpd::load_scenario_config(config_path);
  print_warnings(c.warnings);
  if (kind == "poisson") {
    cpd::Coefficient which = c.dim == 3 ? cpd::Coefficient::c3 : cpd::Coefficient::c2;
    if (coefficient == "C2") which = cpd::Coefficient::c2;
    if (coefficient == "C3") which = cpd::Coefficient::c3;
    const auto rows = cpd::poisson_study(c, which, values, threads);
    emit(out_dir, "poisson.csv", [&](std::ostream& o) { cpd::write_poisson_csv(o, rows); });
    return 0;
  }
  const cpd::StudyTable t =
      kind == "convergence" ? cpd::convergence_study(c, values, threads) : cpd::nonlocality_study(c, values, threads);
  print_warnings(t.warnings);
  emit(out_dir, kind + ".csv", [&](std::ostream& o) { cpd::write_study_csv(o, t); });
  if (t.runs.size() >= 3) {
    std::cerr << "successive probe differences " << (t.cauchy_decreasing() ? "decrease" : "do NOT decrease") << '\n';
  }
  return 0;
}

int cmd_verify(const std::string& config_path, std::uint64_t seed, const std::string& out_dir) {
  const cpd::ScenarioConfig c = cpd::load_scenario_config(config_path);
  print_warnings(c.warnings);
  const auto reports = cpd::verification_suite(c, seed);
  emit(out_dir, "verification.csv", [&](std::ostream& o) { cpd::write_verification_csv(o, reports); });
  int failed = 0;
  for (const auto& r : reports) {
    if (!r.pass) {
      ++failed;
      std::cerr << "FAIL " << r.check << " max_rel_err " << r.max_rel_err << " > " << r.tolerance
                << (r.note.empty() ? "" : " (" + r.note + ")") << '\n';
    }
  }
  std::cerr << reports.size() - failed << '/' << reports.size() << " checks passed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cpd: continuum-kinematics-inspired peridynamics, implicit meshfree solver"};
  app.require_subcommand(1);

  std::string config_path, out_dir, mode, kind, coefficient;
  std::vector<double> values;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool seed_given = false;

  auto* run = app.add_subcommand("run", "run a scenario and write its output bundle");
  run->add_option("config", config_path, "scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--output-dir", out_dir, "output directory (default out/<name>)");
  run->add_option("--mode", mode, "assembly mode")->check(CLI::IsMember({"collocation", "variational"}));

  auto* sweep = app.add_subcommand("sweep", "run a parameter study");
  sweep->add_option("study", kind, "study kind")->required()->check(CLI::IsMember({"poisson", "convergence", "nonlocality"}));
  sweep->add_option("config", config_path, "base scenario JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--values", values, "ratios, spacings or horizons")->required()->delimiter(',');
  sweep->add_option("--coefficient", coefficient, "poisson: coefficient to vary (default C2 in 2D, C3 in 3D)")
      ->check(CLI::IsMember({"C2", "C3"}));
  sweep->add_option("--output-dir", out_dir, "write the CSV here instead of stdout");
  sweep->add_option("--threads", threads, "concurrent runs (0 = hardware)");

  auto* verify = app.add_subcommand("verify", "run the oracle checks; nonzero exit on failure");
  verify->add_option("config", config_path, "scenario JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--seed", seed, "random seed (default: the config's)")->each([&](const std::string&) {
    seed_given = true;
  });
  verify->add_option("--output-dir", out_dir, "write verification.csv here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out_dir, mode);
    if (*sweep) return cmd_sweep(kind, config_path, values, coefficient, out_dir, threads);
    if (*verify) {
      if (!seed_given) seed = cpd::load_scenario_config(config_path).seed;
      return cmd_verify(config_path, seed, out_dir);
    }
  } catch (const cpd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
