#pragma once

#include "latinfe/kernels.hpp"
#include "latinfe/search_directions.hpp"

#include <memory>

namespace latinfe {

struct LatinConfig {
  double eta_tol = 1e-3;
  int max_latin_iterations = 500;
  int max_newton = 3;
  double newton_tol = 1e-6;
  double relaxation = 0.8;
  int workers = 1;
  // Reuse the factorized substructure operators across Newton iterations and
  // LATIN iterations while the search directions are unchanged (modified
  // Newton). Appropriate for the small-perturbation studies; the residual is
  // always the exact one, so converged states are unaffected.
  bool reuse_tangent = false;
  int max_bisection = 4;
  Vec3 body_force = Vec3::Zero();
  void validate() const;
};

struct SideFields {
  std::vector<Vec3> W, F, What, Fhat;
  void resize(int n) {
    W.assign(n, Vec3::Zero());
    F.assign(n, Vec3::Zero());
    What.assign(n, Vec3::Zero());
    Fhat.assign(n, Vec3::Zero());
  }
};

struct InterfaceState {
  SideFields a, b;  // b unused on boundary interfaces
  std::vector<DamageState> damage;  // live trial damage (cohesive)
  std::vector<Vec3> mean_nodal;     // mean displacement at interface nodes
};

struct LatinState {
  std::vector<VecX> u;
  std::vector<InterfaceState> itf;
  std::vector<std::vector<DamageState>> committed;  // accepted damage history
};

struct ConvergenceRecord {
  int step = 0;
  int iteration = 0;  // within the step
  double eta = 0.0;
  int newton_iters = 0;
  int macro_solves = 0;
  double macro_residual = 0.0;
  double wall_ms = 0.0;
};

struct StepResult {
  bool converged = false;
  int iterations = 0;
  double final_eta = 0.0;
  int bisections = 0;
  std::string failure;
  std::vector<ConvergenceRecord> records;
};

// s_n = mu * s_new + (1 - mu) * s_prev on all interface fields W, F (and the
// substructure displacements, keeping W the trace of u). Damage history is
// not relaxed.
void relax_fields(LatinState& current, const LatinState& previous, double mu,
                  const Decomposition& decomp);

class LatinSolver {
 public:
  LatinSolver(const Decomposition& decomp, std::vector<MaterialLaw> materials,
              CohesiveParams cohesive, PolicyConfig policy, LatinConfig cfg);
  ~LatinSolver();

  LatinState& state() { return state_; }
  const LatinState& state() const { return state_; }
  const Decomposition& decomposition() const { return *decomp_; }
  PolicyEngine& policy() { return *policy_; }
  LatinConfig& config() { return cfg_; }
  const CohesiveParams& cohesive_params() const { return cohesive_; }

  // One quasi-static step: ramps the boundary schedules from prev_factors to
  // factors, iterating local stage / admissibility stage / relaxation. On
  // non-convergence the increment is bisected (up to max_bisection levels).
  StepResult run_time_step(int step, const std::vector<double>& factors,
                           const std::vector<double>& prev_factors);

  // Individual stages, exposed for targeted tests.
  void set_load_factors(const std::vector<double>& factors);
  void local_stage();
  int admissibility_stage();  // returns the Newton iteration count
  double latin_error() const;

  // Diagnostics and monitors (deterministic reductions).
  double macro_force_residual() const { return last_macro_residual_; }
  double macro_jump_norm() const;  // max ||P_M [W]|| over constrained ifaces
  Vec3 boundary_reaction(const std::string& name) const;
  double probe_max_abs(int ply, int comp) const;
  double probe_min(int ply, int comp) const;
  Vec3 probe_node(const Vec3& X) const;
  double dissipated_energy() const;
  double damaged_area(double threshold = 0.999) const;
  double crack_front_x(int plane_interface_axis = 2) const;
  struct ContactCheck {
    double min_gap_hat = 0.0, min_gap = 0.0;
    double max_complementarity = 0.0;  // |gap * pressure| normalized
    double min_pressure_hat = 0.0;     // most negative pressure (should be ~0)
  };
  ContactCheck contact_check() const;
  double newton_residual() const { return last_newton_residual_; }

  std::vector<PolicyEvent> policy_events;
  std::vector<long> factorization_count;  // per substructure, audit
  long total_iterations = 0;              // cumulative LATIN iterations
  long macro_solve_count = 0;

 private:
  struct Impl;
  bool attempt_step(const std::vector<double>& from,
                    const std::vector<double>& to, int depth, int step,
                    StepResult& result);
  LatinState snapshot() const;
  void restore(const LatinState& s);

  const Decomposition* decomp_;
  std::vector<MaterialLaw> materials_;
  CohesiveParams cohesive_;
  LatinConfig cfg_;
  std::unique_ptr<PolicyEngine> policy_;
  LatinState state_;
  std::unique_ptr<Impl> impl_;
  double last_macro_residual_ = 0.0;
  double last_newton_residual_ = 0.0;
  double last_line_search_ = 1.0;
};

}  // namespace latinfe
