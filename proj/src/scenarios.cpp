#include "latinfe/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>

namespace latinfe {

namespace {

RunConfig base_defaults() { return RunConfig{}; }

RunConfig bending_defaults() {
  RunConfig c;
  c.scenario = "bending";
  c.geometry = {20.0, 1.0, {0.2}, 128, 1, 2, {}};
  c.partition = {8, 1};
  c.policy.anisotropy = true;
  c.policy.macro_continuity = true;
  c.policy.slenderness = 100.0;
  c.solver.steps = 1;
  c.solver.max_latin_iterations = 400;
  c.solver.reuse_tangent = true;
  c.load.magnitude = 1e-5;  // total transverse force, N (small-perturbation study)
  return c;
}

RunConfig buckling_defaults() {
  RunConfig c;
  c.scenario = "buckling";
  c.geometry = {10.0, 1.0, {0.1}, 400, 2, 5, {}};
  c.partition = {16, 1};
  c.policy.anisotropy = true;
  c.policy.macro_continuity = true;
  c.policy.slenderness = 100.0;
  c.solver.steps = 64;
  c.solver.max_latin_iterations = 150;
  c.load.magnitude = 0.032;      // end shortening, mm
  c.load.perturbation = 0.0444;  // ~1% of the critical load, N
  c.load.patch_halfwidth = 0.25;
  return c;
}

RunConfig contact_open_defaults() {
  RunConfig c;
  c.scenario = "contact_open";
  c.geometry = {20.0, 1.0, {0.1, 0.1}, 160, 1, 2,
                {{1, 5.0, 15.0, "contact", "perfect"}}};
  c.partition = {8, 1};
  c.policy.anisotropy = true;
  c.policy.macro_continuity = true;
  c.policy.slenderness = 100.0;
  c.policy.contact_mode = "status_update";
  c.policy.contact_guess = "closed";  // physically wrong: interface opens
  c.solver.steps = 1;
  c.solver.max_latin_iterations = 400;
  c.solver.eta_tol = 1e-6;
  c.solver.reuse_tangent = true;
  c.load.magnitude = 0.008;     // end shortening, mm
  c.load.perturbation = 0.004;  // per-ply separating force, N
  c.load.patch_halfwidth = 0.5;
  return c;
}

RunConfig contact_close_defaults() {
  RunConfig c;
  c.scenario = "contact_close";
  c.geometry = {20.0, 1.0, {0.1, 0.1}, 160, 1, 2,
                {{1, 2.0, 18.0, "contact", "perfect"}}};
  c.partition = {10, 1};
  c.policy.anisotropy = true;
  c.policy.macro_continuity = true;
  c.policy.slenderness = 100.0;
  c.policy.contact_mode = "status_update";
  c.policy.contact_guess = "open";  // physically wrong: interface closes
  c.solver.steps = 1;
  c.solver.max_latin_iterations = 600;
  c.solver.eta_tol = 1e-10;
  c.solver.reuse_tangent = true;
  c.load.magnitude = 0.05;  // upward force on the lower ply, N
  c.load.patch_halfwidth = 0.5;
  return c;
}

RunConfig dcb_defaults() {
  RunConfig c;
  c.scenario = "dcb";
  c.geometry = {14.0, 1.0, {0.25, 0.25}, 224, 1, 2,
                {{1, 0.0, 6.0, "contact", "cohesive"}}};
  c.partition = {8, 1};
  c.policy.anisotropy = true;
  c.policy.macro_continuity = true;
  c.policy.slenderness = 28.0;
  c.policy.contact_mode = "unified";
  c.policy.cohesive_update = "A";
  c.solver.steps = 16;
  c.solver.max_latin_iterations = 4000;
  c.solver.reuse_tangent = true;
  c.load.magnitude = 1.4;  // per-arm opening displacement, mm
  return c;
}

RunConfig buckling_delam_defaults() {
  RunConfig c;
  c.scenario = "buckling_delamination";
  c.geometry = {20.0, 1.0, {0.2, 0.2}, 400, 1, 2,
                {{1, 5.0, 15.0, "contact", "cohesive"}}};
  c.partition = {16, 1};
  c.policy.anisotropy = true;
  c.policy.macro_continuity = true;
  c.policy.slenderness = 100.0;
  c.policy.contact_mode = "unified";
  c.policy.cohesive_update = "C";
  c.solver.steps = 32;
  c.solver.max_latin_iterations = 400;
  c.load.magnitude = 0.05;     // end shortening, mm
  c.load.perturbation = 0.2;   // central perturbation, N
  c.load.patch_halfwidth = 0.25;
  return c;
}

RunConfig multi_delam_defaults() {
  RunConfig c;
  c.scenario = "multi_delamination";
  c.geometry = {20.0, 1.0, {0.2, 0.2, 0.2, 0.2}, 200, 1, 1,
                {{2, 5.0, 15.0, "contact", "cohesive"},
                 {3, 5.0, 15.0, "contact", "cohesive"}}};
  c.partition = {10, 1};
  c.material.type = "orthotropic";
  c.material.layup = {0.0, 90.0, 90.0, 0.0};
  c.policy.anisotropy = true;
  c.policy.macro_continuity = true;
  c.policy.slenderness = 100.0;
  c.policy.contact_mode = "unified";
  c.policy.cohesive_update = "C";
  c.solver.steps = 24;
  c.solver.max_latin_iterations = 400;
  c.load.magnitude = 0.12;    // end shortening, mm
  c.load.perturbation = 0.5;  // upper-ply perturbation, N
  c.load.patch_halfwidth = 0.25;
  return c;
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"custom",        "bending",       "buckling",
          "contact_open",  "contact_close", "dcb",
          "buckling_delamination", "multi_delamination"};
}

json scenario_defaults(const std::string& name) {
  if (name == "custom") return base_defaults().to_json();
  if (name == "bending") return bending_defaults().to_json();
  if (name == "buckling") return buckling_defaults().to_json();
  if (name == "contact_open") return contact_open_defaults().to_json();
  if (name == "contact_close") return contact_close_defaults().to_json();
  if (name == "dcb") return dcb_defaults().to_json();
  if (name == "buckling_delamination")
    return buckling_delam_defaults().to_json();
  if (name == "multi_delamination") return multi_delam_defaults().to_json();
  throw InputError("unknown scenario: " + name);
}

// ---------------------------------------------------------------------------

namespace {

InterfaceBehavior behavior_from(const std::string& s) {
  if (s == "contact") return InterfaceBehavior::contact;
  if (s == "cohesive") return InterfaceBehavior::cohesive;
  return InterfaceBehavior::perfect;
}

PolicyConfig make_policy(const RunConfig& cfg) {
  PolicyConfig p;
  p.anisotropic = cfg.policy.anisotropy;
  p.slenderness = cfg.policy.slenderness > 0.0
                      ? cfg.policy.slenderness
                      : cfg.geometry.length /
                            *std::max_element(cfg.geometry.plies.begin(),
                                              cfg.geometry.plies.end());
  p.macro_continuity = cfg.policy.macro_continuity;
  p.contact_mode = cfg.policy.contact_mode == "unified"
                       ? ContactMode::unified
                       : (cfg.policy.contact_mode == "fixed"
                              ? ContactMode::fixed
                              : ContactMode::status_update);
  p.contact_cadence = cfg.policy.contact_cadence;
  p.contact_guess = cfg.policy.contact_guess == "open" ? ContactGuess::open
                                                       : ContactGuess::closed;
  p.cohesive_update = cfg.policy.cohesive_update == "A"
                          ? CohesiveStrategy::A
                          : (cfg.policy.cohesive_update == "B"
                                 ? CohesiveStrategy::B
                                 : (cfg.policy.cohesive_update == "C"
                                        ? CohesiveStrategy::C
                                        : CohesiveStrategy::D));
  p.cohesive_cadence = cfg.policy.cohesive_cadence;
  p.open_factor = cfg.policy.open_factor;
  return p;
}

}  // namespace

ScenarioRun::ScenarioRun(const RunConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const auto& g = cfg_.geometry;
  std::vector<CrackSpec> cracks;
  for (const auto& c : g.cracks)
    cracks.push_back({c.plane, c.x0, c.x1, behavior_from(c.inside),
                      behavior_from(c.outside)});
  mesh_ = std::make_unique<ReferenceMesh>(generate_laminate_mesh(
      g.length, g.width, g.plies, g.nx, g.ny, g.nz_per_ply, cracks));

  // Central load patches on the outer surfaces.
  double half = cfg_.load.patch_halfwidth;
  double xc = g.length / 2.0;
  auto centered = [&](const Vec3& c) { return std::abs(c.x() - xc) <= half; };
  mesh_->facet_sets["top_patch"] = select_boundary_facets(*mesh_, 5, centered);
  mesh_->facet_sets["bottom_patch"] =
      select_boundary_facets(*mesh_, 4, centered);
  double patch_area = 2.0 * half * g.width;

  std::vector<BoundarySpec> bcs;
  const std::string& s = cfg_.scenario;
  double thick = mesh_->thickness();
  if (s == "bending" || s == "custom") {
    bcs.push_back({"xmin", BCKind::dirichlet, {true, true, true},
                   Vec3::Zero(), 0, "clamp"});
    double strip = 2.0 * g.length / g.nx;
    mesh_->facet_sets["tip_strip"] = select_boundary_facets(
        *mesh_, 5, [&](const Vec3& c) { return c.x() > g.length - strip; });
    double t = cfg_.load.magnitude / (g.width * strip);
    bcs.push_back({"tip_strip", BCKind::neumann, {false, false, true},
                   Vec3(0, 0, t), 0, "tip"});
    reaction_name_ = "clamp";
    reaction_dir_ = Vec3(0, 0, -1);
    probe_ply_ = -1;
  } else if (s == "buckling") {
    bcs.push_back({"xmin", BCKind::dirichlet, {true, true, true},
                   Vec3::Zero(), 0, "support"});
    bcs.push_back({"xmax", BCKind::dirichlet, {true, true, true},
                   Vec3(-cfg_.load.magnitude, 0, 0), 0, "drive"});
    if (cfg_.load.perturbation != 0.0)
      bcs.push_back({"top_patch", BCKind::neumann, {false, false, true},
                     Vec3(0, 0, cfg_.load.perturbation / patch_area), 0,
                     "perturbation"});
    reaction_name_ = "drive";
    reaction_dir_ = Vec3(-1, 0, 0);
    probe_ply_ = -1;
  } else if (s == "contact_open") {
    bcs.push_back({"xmin", BCKind::dirichlet, {true, true, true},
                   Vec3::Zero(), 0, "support"});
    bcs.push_back({"xmax", BCKind::dirichlet, {true, true, true},
                   Vec3(-cfg_.load.magnitude, 0, 0), 0, "drive"});
    double t = cfg_.load.perturbation / patch_area;
    bcs.push_back({"top_patch", BCKind::neumann, {false, false, true},
                   Vec3(0, 0, t), 0, "pull_up"});
    bcs.push_back({"bottom_patch", BCKind::neumann, {false, false, true},
                   Vec3(0, 0, -t), 0, "pull_down"});
    reaction_name_ = "drive";
    reaction_dir_ = Vec3(-1, 0, 0);
    probe_ply_ = static_cast<int>(g.plies.size()) - 1;
  } else if (s == "contact_close") {
    bcs.push_back({"xmin", BCKind::dirichlet, {true, true, true},
                   Vec3::Zero(), 0, "support"});
    bcs.push_back({"xmax", BCKind::dirichlet, {true, true, true},
                   Vec3::Zero(), 0, "support2"});
    double t = cfg_.load.magnitude / patch_area;
    bcs.push_back({"bottom_patch", BCKind::neumann, {false, false, true},
                   Vec3(0, 0, t), 0, "push_up"});
    reaction_name_ = "support";
    reaction_dir_ = Vec3(0, 0, -1);
    probe_ply_ = 0;
  } else if (s == "dcb") {
    bcs.push_back({"xmax", BCKind::dirichlet, {true, true, true},
                   Vec3::Zero(), 0, "root"});
    int top = static_cast<int>(g.plies.size()) - 1;
    bcs.push_back({"xmin_ply" + std::to_string(top), BCKind::dirichlet,
                   {false, false, true}, Vec3(0, 0, cfg_.load.magnitude), 0,
                   "arm_upper"});
    bcs.push_back({"xmin_ply0", BCKind::dirichlet, {false, false, true},
                   Vec3(0, 0, -cfg_.load.magnitude), 0, "arm_lower"});
    reaction_name_ = "arm_upper";
    reaction_dir_ = Vec3(0, 0, 1);
    probe_ply_ = top;
  } else if (s == "buckling_delamination" || s == "multi_delamination") {
    bcs.push_back({"xmin", BCKind::dirichlet, {true, true, true},
                   Vec3::Zero(), 0, "support"});
    bcs.push_back({"xmax", BCKind::dirichlet, {true, true, true},
                   Vec3(-cfg_.load.magnitude, 0, 0), 0, "drive"});
    if (cfg_.load.perturbation != 0.0)
      bcs.push_back({"top_patch", BCKind::neumann, {false, false, true},
                     Vec3(0, 0, cfg_.load.perturbation / patch_area), 1,
                     "perturbation"});
    reaction_name_ = "drive";
    reaction_dir_ = Vec3(-1, 0, 0);
    probe_ply_ = static_cast<int>(g.plies.size()) - 1;
  } else {
    throw InputError("unknown scenario: " + s);
  }

  decomp_ = std::make_unique<Decomposition>(
      Decomposition::build(*mesh_, cfg_.partition.cuts_x,
                           cfg_.partition.cuts_y, bcs));

  std::vector<MaterialLaw> mats;
  const auto& m = cfg_.material;
  for (const auto& sub : decomp_->subs) {
    if (m.type == "isotropic") {
      mats.push_back(MaterialLaw::isotropic(m.E, m.nu, m.rho));
    } else {
      double angle = 0.0;
      if (!m.layup.empty())
        angle = m.layup[sub.ply % m.layup.size()];
      mats.push_back(MaterialLaw::orthotropic(m.E1, m.E2, m.E3, m.nu12,
                                              m.nu13, m.nu23, m.G12, m.G13,
                                              m.G23, m.rho, angle));
    }
  }

  CohesiveParams coh;
  coh.k_n0 = cfg_.interface.k_n0;
  coh.k_t0 = cfg_.interface.k_t0;
  coh.Yc = cfg_.interface.Yc;
  coh.alpha = cfg_.interface.alpha;
  coh.n = cfg_.interface.n;
  coh.gamma1 = cfg_.interface.gamma1;
  coh.gamma2 = cfg_.interface.gamma2;

  LatinConfig lc;
  lc.eta_tol = cfg_.solver.eta_tol;
  lc.max_latin_iterations = cfg_.solver.max_latin_iterations;
  lc.max_newton = cfg_.solver.max_newton;
  lc.newton_tol = cfg_.solver.newton_tol;
  lc.relaxation = cfg_.solver.relaxation;
  lc.workers = cfg_.solver.workers;
  lc.reuse_tangent = cfg_.solver.reuse_tangent;
  lc.max_bisection = cfg_.solver.max_bisection;

  solver_ = std::make_unique<LatinSolver>(*decomp_, std::move(mats), coh,
                                          make_policy(cfg_), lc);

  for (const auto& c : g.cracks)
    if (c.inside == "contact") initial_crack_len_ += c.x1 - c.x0;
}

std::vector<double> ScenarioRun::factors_at(int step) const {
  double ramp = cfg_.solver.steps == 0
                    ? (step > 0 ? 1.0 : 0.0)
                    : static_cast<double>(step) / cfg_.solver.steps;
  double on = step > 0 ? 1.0 : 0.0;
  return {ramp, on};
}

StepResult ScenarioRun::advance() {
  int next = current_step_ + 1;
  StepResult r = solver_->run_time_step(next, factors_at(next),
                                        factors_at(current_step_));
  ++current_step_;
  return r;
}

CurvePoint ScenarioRun::measure(int step) {
  CurvePoint p;
  p.step = step;
  p.load_N = solver_->boundary_reaction(reaction_name_).dot(reaction_dir_);
  p.disp_mm = solver_->probe_max_abs(probe_ply_, 2);
  p.crack_mm =
      initial_crack_len_ +
      solver_->damaged_area() / cfg_.geometry.width;
  p.dissipated_Nmm = solver_->dissipated_energy();
  return p;
}

void ScenarioRun::write_snapshot(const std::string& path) const {
  VecX disp = VecX::Zero(3 * mesh_->nodes.size());
  VecX damage = VecX::Zero(mesh_->nodes.size());
  for (const auto& sub : decomp_->subs) {
    const VecX& u = solver_->state().u[sub.id];
    for (std::size_t n = 0; n < sub.nodes.size(); ++n)
      disp.segment<3>(3 * sub.nodes[n]) = u.segment<3>(3 * n);
  }
  for (const auto& itf : decomp_->interfaces) {
    if (itf.behavior != InterfaceBehavior::cohesive) continue;
    const auto& dmg = solver_->state().committed[itf.id];
    for (int g = 0; g < itf.n_gps(); ++g) {
      const auto& gp = itf.gps[g];
      const auto& fi = itf.facets[gp.facet];
      for (int a = 0; a < 4; ++a) {
        int gn = itf.inodes[fi[a]];
        damage[gn] = std::max(damage[gn], dmg[g].d);
      }
    }
  }
  std::vector<VecX> fields = {disp, damage};
  std::vector<std::string> names = {"displacement", "damage"};
  write_vtk(*mesh_, path, &fields, &names);
}

ArtifactBundle ScenarioRun::run_all(const std::string& out_dir) {
  ArtifactBundle b;
  b.config = cfg_;
  auto t0 = std::chrono::steady_clock::now();
  b.success = true;
  bool snapshots = cfg_.output.write_vtk && !out_dir.empty();
  if (snapshots) std::filesystem::create_directories(out_dir);
  for (int step = 1; step <= cfg_.solver.steps; ++step) {
    StepResult r = advance();
    for (const auto& rec : r.records) b.records.push_back(rec);
    b.iterations_per_step.push_back(r.iterations);
    b.step_converged.push_back(r.converged ? 1 : 0);
    for (const auto& rec : r.records)
      b.min_eta_seen = std::min(b.min_eta_seen, rec.eta);
    b.max_macro_residual =
        std::max(b.max_macro_residual, solver_->macro_force_residual());
    b.max_macro_jump = std::max(b.max_macro_jump, solver_->macro_jump_norm());
    b.curve.push_back(measure(step));
    int cadence = std::max(1, cfg_.output.snapshot_cadence);
    if (snapshots && step % cadence == 0)
      write_snapshot(out_dir + "/snapshot_" + std::to_string(step) + ".vtk");
    if (!r.converged) {
      b.success = false;
      b.failure = "step " + std::to_string(step) + ": " + r.failure;
      break;
    }
  }
  b.events = solver_->policy_events;
  b.contact = solver_->contact_check();
  b.dissipated_total = solver_->dissipated_energy();
  b.damaged_area = solver_->damaged_area();
  b.wall_seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return b;
}

ArtifactBundle run_scenario(const RunConfig& cfg) {
  ScenarioRun run(cfg);
  return run.run_all();
}

}  // namespace latinfe
