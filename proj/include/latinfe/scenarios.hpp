#pragma once

#include "latinfe/config.hpp"
#include "latinfe/latin.hpp"
#include "latinfe/oracles.hpp"

#include <functional>
#include <memory>

namespace latinfe {

// Fully resolved default configuration per scenario name.
json scenario_defaults(const std::string& name);
std::vector<std::string> scenario_names();

struct CurvePoint {
  int step = 0;
  double load_N = 0.0;
  double disp_mm = 0.0;
  double crack_mm = 0.0;
  double dissipated_Nmm = 0.0;
};

struct ArtifactBundle {
  RunConfig config;
  bool success = false;
  std::string failure;
  std::vector<CurvePoint> curve;
  std::vector<ConvergenceRecord> records;
  std::vector<PolicyEvent> events;
  std::vector<int> iterations_per_step;
  std::vector<char> step_converged;
  double wall_seconds = 0.0;
  double max_macro_residual = 0.0;
  double max_macro_jump = 0.0;
  LatinSolver::ContactCheck contact;
  double dissipated_total = 0.0;
  double damaged_area = 0.0;
  double min_eta_seen = 1e300;
};

// A constructed scenario: mesh, decomposition, solver, load program and
// monitors, ready to be stepped.
class ScenarioRun {
 public:
  explicit ScenarioRun(const RunConfig& cfg);

  LatinSolver& solver() { return *solver_; }
  const Decomposition& decomposition() const { return *decomp_; }
  const ReferenceMesh& mesh() const { return *mesh_; }
  int n_steps() const { return cfg_.solver.steps; }

  // Schedule factors for a given step (0 = initial state).
  std::vector<double> factors_at(int step) const;

  StepResult advance();           // run the next step
  CurvePoint measure(int step);   // monitors at the current state
  // Full program with bookkeeping; writes VTK snapshots into out_dir when
  // configured and out_dir is non-empty.
  ArtifactBundle run_all(const std::string& out_dir = "");
  void write_snapshot(const std::string& path) const;

  const RunConfig& config() const { return cfg_; }

 private:
  RunConfig cfg_;
  std::unique_ptr<ReferenceMesh> mesh_;
  std::unique_ptr<Decomposition> decomp_;
  std::unique_ptr<LatinSolver> solver_;
  int current_step_ = 0;
  double initial_crack_len_ = 0.0;
  // load monitor: reaction name, direction, sign
  std::string reaction_name_;
  Vec3 reaction_dir_ = Vec3::UnitX();
  int probe_ply_ = 0;
  int probe_comp_ = 2;
};

ArtifactBundle run_scenario(const RunConfig& cfg);

}  // namespace latinfe
