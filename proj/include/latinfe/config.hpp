#pragma once

#include "latinfe/types.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace latinfe {

using json = nlohmann::ordered_json;

// Run configuration: a scenario name plus overrides. Parsing fills every
// field from the scenario defaults; unknown keys are rejected.
struct RunConfig {
  std::string scenario = "custom";

  struct Crack {
    int plane = 1;
    double x0 = 0.0, x1 = 0.0;
    std::string inside = "contact";
    std::string outside = "cohesive";
  };
  struct Geometry {
    double length = 10.0, width = 1.0;
    std::vector<double> plies = {0.1};
    int nx = 40, ny = 1, nz_per_ply = 2;
    std::vector<Crack> cracks;
  } geometry;

  struct Material {
    std::string type = "isotropic";
    double E = 135000.0, nu = 0.3, rho = 0.0;
    double E1 = 185500.0, E2 = 9900.0, E3 = 9900.0;
    double nu12 = 0.34, nu13 = 0.34, nu23 = 0.5;
    double G12 = 6160.0, G13 = 6160.0, G23 = 3080.0;
    std::vector<double> layup;  // ply angles in degrees
  } material;

  struct Interface {
    double k_n0 = 100000.0, k_t0 = 100000.0;
    double Yc = 0.4, alpha = 1.0, n = 0.5;
    double gamma1 = 1.0, gamma2 = 1.0;
  } interface;

  struct Partition {
    int cuts_x = 4, cuts_y = 1;
  } partition;

  struct Policy {
    bool anisotropy = false;
    double slenderness = 0.0;  // 0: derive L0/h0 from the geometry
    bool macro_continuity = false;
    std::string contact_mode = "unified";  // or "status_update"
    int contact_cadence = 10;
    std::string contact_guess = "closed";
    std::string cohesive_update = "A";  // A, B, C, D
    int cohesive_cadence = 100;
    double open_factor = 1e-6;
  } policy;

  struct Solver {
    double eta_tol = 1e-3;
    int max_latin_iterations = 500;
    int max_newton = 3;
    double newton_tol = 1e-6;
    double relaxation = 0.8;
    int steps = 16;
    int workers = 1;
    bool reuse_tangent = false;
    int max_bisection = 4;
  } solver;

  struct Load {
    double magnitude = 0.0;      // primary load scale (mm or N/mm^2 context)
    double perturbation = 0.0;   // total perturbation force in N
    double patch_halfwidth = 0.25;
  } load;

  struct Output {
    std::string directory = "out";
    bool write_vtk = false;
    int snapshot_cadence = 0;
  } output;

  json to_json() const;
  static RunConfig from_json(const json& j);
  void validate() const;
};

// Parse with scenario defaults; rejects unknown keys, validates constraints.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);
std::string serialize_config(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

// Set a dotted-path key (e.g. "partition.cuts_x") to a JSON value.
json set_config_key(json base, const std::string& dotted,
                    const std::string& value_text);

}  // namespace latinfe
