#include "latinfe/config.hpp"

#include "latinfe/scenarios.hpp"

#include <fstream>
#include <sstream>

namespace latinfe {

namespace {

void merge_strict(json& base, const json& user, const std::string& path) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    std::string key_path = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key()))
      throw InputError("unknown config key: " + key_path);
    if (base[it.key()].is_object() && it.value().is_object())
      merge_strict(base[it.key()], it.value(), key_path);
    else
      base[it.key()] = it.value();
  }
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config key '") + key + "': " + e.what());
  }
}

void require_pos(double v, const char* key) {
  if (!(v > 0.0)) throw InputError(std::string(key) + " must be > 0");
}

}  // namespace

json RunConfig::to_json() const {
  json j;
  j["scenario"] = scenario;
  json g;
  g["length"] = geometry.length;
  g["width"] = geometry.width;
  g["plies"] = geometry.plies;
  g["nx"] = geometry.nx;
  g["ny"] = geometry.ny;
  g["nz_per_ply"] = geometry.nz_per_ply;
  json cracks = json::array();
  for (const auto& c : geometry.cracks) {
    json cj;
    cj["plane"] = c.plane;
    cj["x0"] = c.x0;
    cj["x1"] = c.x1;
    cj["inside"] = c.inside;
    cj["outside"] = c.outside;
    cracks.push_back(cj);
  }
  g["cracks"] = cracks;
  j["geometry"] = g;

  json m;
  m["type"] = material.type;
  m["E"] = material.E;
  m["nu"] = material.nu;
  m["rho"] = material.rho;
  m["E1"] = material.E1;
  m["E2"] = material.E2;
  m["E3"] = material.E3;
  m["nu12"] = material.nu12;
  m["nu13"] = material.nu13;
  m["nu23"] = material.nu23;
  m["G12"] = material.G12;
  m["G13"] = material.G13;
  m["G23"] = material.G23;
  m["layup"] = material.layup;
  j["material"] = m;

  json i;
  i["k_n0"] = interface.k_n0;
  i["k_t0"] = interface.k_t0;
  i["Yc"] = interface.Yc;
  i["alpha"] = interface.alpha;
  i["n"] = interface.n;
  i["gamma1"] = interface.gamma1;
  i["gamma2"] = interface.gamma2;
  j["interface"] = i;

  json p;
  p["cuts_x"] = partition.cuts_x;
  p["cuts_y"] = partition.cuts_y;
  j["partition"] = p;

  json pol;
  pol["anisotropy"] = policy.anisotropy;
  pol["slenderness"] = policy.slenderness;
  pol["macro_continuity"] = policy.macro_continuity;
  pol["contact_mode"] = policy.contact_mode;
  pol["contact_cadence"] = policy.contact_cadence;
  pol["contact_guess"] = policy.contact_guess;
  pol["cohesive_update"] = policy.cohesive_update;
  pol["cohesive_cadence"] = policy.cohesive_cadence;
  pol["open_factor"] = policy.open_factor;
  j["policy"] = pol;

  json s;
  s["eta_tol"] = solver.eta_tol;
  s["max_latin_iterations"] = solver.max_latin_iterations;
  s["max_newton"] = solver.max_newton;
  s["newton_tol"] = solver.newton_tol;
  s["relaxation"] = solver.relaxation;
  s["steps"] = solver.steps;
  s["workers"] = solver.workers;
  s["reuse_tangent"] = solver.reuse_tangent;
  s["max_bisection"] = solver.max_bisection;
  j["solver"] = s;

  json l;
  l["magnitude"] = load.magnitude;
  l["perturbation"] = load.perturbation;
  l["patch_halfwidth"] = load.patch_halfwidth;
  j["load"] = l;

  json o;
  o["directory"] = output.directory;
  o["write_vtk"] = output.write_vtk;
  o["snapshot_cadence"] = output.snapshot_cadence;
  j["output"] = o;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  c.scenario = get<std::string>(j, "scenario");
  const json& g = j.at("geometry");
  c.geometry.length = get<double>(g, "length");
  c.geometry.width = get<double>(g, "width");
  c.geometry.plies = get<std::vector<double>>(g, "plies");
  c.geometry.nx = get<int>(g, "nx");
  c.geometry.ny = get<int>(g, "ny");
  c.geometry.nz_per_ply = get<int>(g, "nz_per_ply");
  for (const auto& cj : g.at("cracks")) {
    Crack cr;
    cr.plane = get<int>(cj, "plane");
    cr.x0 = get<double>(cj, "x0");
    cr.x1 = get<double>(cj, "x1");
    cr.inside = get<std::string>(cj, "inside");
    cr.outside = get<std::string>(cj, "outside");
    c.geometry.cracks.push_back(cr);
  }
  const json& m = j.at("material");
  c.material.type = get<std::string>(m, "type");
  c.material.E = get<double>(m, "E");
  c.material.nu = get<double>(m, "nu");
  c.material.rho = get<double>(m, "rho");
  c.material.E1 = get<double>(m, "E1");
  c.material.E2 = get<double>(m, "E2");
  c.material.E3 = get<double>(m, "E3");
  c.material.nu12 = get<double>(m, "nu12");
  c.material.nu13 = get<double>(m, "nu13");
  c.material.nu23 = get<double>(m, "nu23");
  c.material.G12 = get<double>(m, "G12");
  c.material.G13 = get<double>(m, "G13");
  c.material.G23 = get<double>(m, "G23");
  c.material.layup = get<std::vector<double>>(m, "layup");
  const json& i = j.at("interface");
  c.interface.k_n0 = get<double>(i, "k_n0");
  c.interface.k_t0 = get<double>(i, "k_t0");
  c.interface.Yc = get<double>(i, "Yc");
  c.interface.alpha = get<double>(i, "alpha");
  c.interface.n = get<double>(i, "n");
  c.interface.gamma1 = get<double>(i, "gamma1");
  c.interface.gamma2 = get<double>(i, "gamma2");
  const json& p = j.at("partition");
  c.partition.cuts_x = get<int>(p, "cuts_x");
  c.partition.cuts_y = get<int>(p, "cuts_y");
  const json& pol = j.at("policy");
  c.policy.anisotropy = get<bool>(pol, "anisotropy");
  c.policy.slenderness = get<double>(pol, "slenderness");
  c.policy.macro_continuity = get<bool>(pol, "macro_continuity");
  c.policy.contact_mode = get<std::string>(pol, "contact_mode");
  c.policy.contact_cadence = get<int>(pol, "contact_cadence");
  c.policy.contact_guess = get<std::string>(pol, "contact_guess");
  c.policy.cohesive_update = get<std::string>(pol, "cohesive_update");
  c.policy.cohesive_cadence = get<int>(pol, "cohesive_cadence");
  c.policy.open_factor = get<double>(pol, "open_factor");
  const json& s = j.at("solver");
  c.solver.eta_tol = get<double>(s, "eta_tol");
  c.solver.max_latin_iterations = get<int>(s, "max_latin_iterations");
  c.solver.max_newton = get<int>(s, "max_newton");
  c.solver.newton_tol = get<double>(s, "newton_tol");
  c.solver.relaxation = get<double>(s, "relaxation");
  c.solver.steps = get<int>(s, "steps");
  c.solver.workers = get<int>(s, "workers");
  c.solver.reuse_tangent = get<bool>(s, "reuse_tangent");
  c.solver.max_bisection = get<int>(s, "max_bisection");
  const json& l = j.at("load");
  c.load.magnitude = get<double>(l, "magnitude");
  c.load.perturbation = get<double>(l, "perturbation");
  c.load.patch_halfwidth = get<double>(l, "patch_halfwidth");
  const json& o = j.at("output");
  c.output.directory = get<std::string>(o, "directory");
  c.output.write_vtk = get<bool>(o, "write_vtk");
  c.output.snapshot_cadence = get<int>(o, "snapshot_cadence");
  c.validate();
  return c;
}

void RunConfig::validate() const {
  require_pos(geometry.length, "geometry.length");
  require_pos(geometry.width, "geometry.width");
  if (geometry.plies.empty()) throw InputError("geometry.plies empty");
  for (double t : geometry.plies) require_pos(t, "geometry.plies");
  if (geometry.nx < 1 || geometry.ny < 1 || geometry.nz_per_ply < 1)
    throw InputError("element counts must be >= 1");
  for (const auto& cr : geometry.cracks) {
    if (cr.inside != "contact" && cr.inside != "cohesive")
      throw InputError("crack.inside must be contact or cohesive");
    if (cr.outside != "cohesive" && cr.outside != "perfect")
      throw InputError("crack.outside must be cohesive or perfect");
  }
  if (material.type != "isotropic" && material.type != "orthotropic")
    throw InputError("material.type must be isotropic or orthotropic");
  require_pos(material.E, "material.E");
  bool needs_cohesive = false;
  for (const auto& cr : geometry.cracks)
    needs_cohesive |= cr.inside == "cohesive" || cr.outside == "cohesive";
  if (needs_cohesive) {
    require_pos(interface.k_n0, "interface.k_n0");
    require_pos(interface.k_t0, "interface.k_t0");
    if (!(interface.Yc > 0.0)) throw InputError("Y_c must be > 0");
    require_pos(interface.n, "interface.n");
    if (interface.alpha < 1.0) throw InputError("interface.alpha must be >= 1");
  }
  if (partition.cuts_x < 1 || partition.cuts_y < 1)
    throw InputError("cuts must be >= 1");
  if (policy.contact_mode != "unified" &&
      policy.contact_mode != "status_update" && policy.contact_mode != "fixed")
    throw InputError("policy.contact_mode invalid");
  if (policy.contact_guess != "closed" && policy.contact_guess != "open")
    throw InputError("policy.contact_guess invalid");
  if (policy.cohesive_update != "A" && policy.cohesive_update != "B" &&
      policy.cohesive_update != "C" && policy.cohesive_update != "D")
    throw InputError("policy.cohesive_update must be A, B, C or D");
  if (policy.slenderness < 0.0)
    throw InputError("policy.slenderness must be >= 0");
  require_pos(solver.eta_tol, "solver.eta_tol");
  if (solver.steps < 0) throw InputError("solver.steps must be >= 0");
  if (solver.workers < 1) throw InputError("solver.workers must be >= 1");
  if (!(solver.relaxation > 0.0 && solver.relaxation <= 1.0))
    throw InputError("solver.relaxation must be in (0,1]");
}

RunConfig parse_config_text(const std::string& text) {
  json user;
  try {
    user = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config parse error: ") + e.what());
  }
  if (!user.contains("scenario"))
    throw InputError("config must name a scenario");
  json base = scenario_defaults(user.at("scenario").get<std::string>());
  merge_strict(base, user, "");
  return RunConfig::from_json(base);
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  return cfg.to_json().dump(2) + "\n";
}

std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(cfg.to_json().dump())));
  return buf;
}

json set_config_key(json base, const std::string& dotted,
                    const std::string& value_text) {
  json value;
  try {
    value = json::parse(value_text);
  } catch (const nlohmann::json::exception&) {
    value = value_text;  // bare string
  }
  json* node = &base;
  std::size_t pos = 0;
  while (true) {
    std::size_t dot = dotted.find('.', pos);
    std::string key = dotted.substr(pos, dot - pos);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
  return base;
}

}  // namespace latinfe
