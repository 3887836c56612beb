#ifndef SOFTRB_BENCH_HPP
#define SOFTRB_BENCH_HPP

///
/// \file bench.hpp
///
/// Experiment harness behind the `softrb_bench` command-line tool: builds the
/// desk-scale model from an ExperimentConfig, runs full and reduced forward
/// and LQR problems, and records errors and timings.
///
/// Results CSV columns, in order:
///   scenario, method, N_V, error, t_fom_s, t_rom_offline_s, t_rom_online_s,
///   speedup, residual, stability_margin, status
/// Timings are medians over `timing_repetitions` runs of the online phase;
/// basis construction counts as offline.
///

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "softrb/coupled_model.hpp"
#include "softrb/fem.hpp"
#include "softrb/lqr.hpp"
#include "softrb/mor_forward.hpp"
#include "softrb/mor_lqr.hpp"
#include "softrb/timeint.hpp"

namespace softrb::bench {

enum class Scenario { Forward, Lqr };

std::string_view to_string(Scenario s);

struct ExperimentConfig {
  Index nx = 10;
  Index ny = 20;
  fem::MaterialParams material;
  double solid_mass = 100.0;
  /// Rayleigh damping override; scenario defaults apply when unset
  /// (forward: undamped, LQR: β = 0.1).
  std::optional<Damping> damping;
  double q_scale = 1.0;
  double r_scale = 1.0;
  TimeGrid forward_grid{3.0, 600};
  TimeGrid lqr_grid{300.0, 600};
  Eigen::Vector2d target_solid{5.0, 5.0};
  Eigen::Vector2d body_force{0.0, 0.0};
  /// Empty: every method of the scenario.
  std::vector<std::string> methods;
  /// Explicit basis sizes; when empty the energy rule picks N_V.
  std::vector<Index> basis_sizes;
  double energy = 0.999;
  std::uint64_t seed = 0;
  int timing_repetitions = 5;
  /// When false, timing columns are written as 0 so that repeated runs are
  /// byte-identical.
  bool record_timings = true;
  /// Simulate the full-order closed loop under every reduced gain.
  bool closed_loop_check = true;
  std::filesystem::path output_dir = "softrb_out";

  Damping damping_for(Scenario s) const;
};

/// Throws NumericalError for any value that violates a module precondition.
void validate(const ExperimentConfig& config);

/// Reads a JSON config; missing keys keep their defaults.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

struct DeskModel {
  fem::Mesh2D mesh;
  fem::Assembly assembly;
  CoupledSecondOrder coupled;
  FirstOrderSystem system;
  Index observation_node = -1;
  Equilibrium target;
};

/// Observation node: the free node nearest to the bottom centre.
DeskModel build_model(const ExperimentConfig& config, Scenario scenario);

CostWeights default_weights(const ExperimentConfig& config,
                            const FirstOrderSystem& sys);

struct RunRecord {
  Scenario scenario = Scenario::Forward;
  std::string method;
  Index N = 0;
  double error = 0.0;
  double t_fom = 0.0;
  double t_rom_offline = 0.0;
  double t_rom_online = 0.0;
  double speedup = 0.0;
  double residual = 0.0;
  double stability_margin = 0.0;
  std::string status = "ok";
};

struct ForwardRun {
  Trajectory fom;
  SnapshotSet snapshots;
  Vector singular_values;
  double t_fom = 0.0;
  std::vector<RunRecord> records;
};

ForwardRun run_forward(const ExperimentConfig& config);
ForwardRun run_forward(const ExperimentConfig& config, const DeskModel& model);

struct LqrRun {
  AreSolution fom;
  double t_fom = 0.0;
  std::optional<ClosedLoopRun> fom_closed_loop;
  std::vector<RunRecord> records;
};

/// `simulate_fom` additionally runs the full-order closed loop under K_f.
LqrRun run_lqr(const ExperimentConfig& config, bool simulate_fom = false);
LqrRun run_lqr(const ExperimentConfig& config, const DeskModel& model,
               bool simulate_fom = false);

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_csv(const std::filesystem::path& path);

/// Log-scale error-vs-N_V chart with one curve per method.
std::string render_error_plot(const std::vector<RunRecord>& records,
                              const std::string& title);
void emit_plot(const std::filesystem::path& path,
               const std::vector<RunRecord>& records, const std::string& title);

/// Median wall time in seconds of `reps` calls.
template <typename F>
double median_seconds(int reps, F&& f);

}  // namespace softrb::bench

#include "softrb/bench_timing.hpp"

#endif  // SOFTRB_BENCH_HPP
