#include "latinfe/outputs.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace latinfe {

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string curve_csv(const ArtifactBundle& bundle) {
  std::string out = "# config_hash=" + config_hash(bundle.config) + "\n";
  out += "step,load_N,disp_mm,crack_mm,dissipated_Nmm\n";
  for (const auto& p : bundle.curve)
    out += std::to_string(p.step) + "," + fmt(p.load_N) + "," +
           fmt(p.disp_mm) + "," + fmt(p.crack_mm) + "," +
           fmt(p.dissipated_Nmm) + "\n";
  return out;
}

std::vector<std::string> write_outputs(const ArtifactBundle& bundle,
                                       const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec && !fs::is_directory(directory))
    throw SolverError("cannot create output directory: " + directory);
  auto open = [&](const std::string& name) {
    std::ofstream os(directory + "/" + name, std::ios::binary);
    if (!os)
      throw SolverError("cannot write " + directory + "/" + name);
    return os;
  };
  std::vector<std::string> paths;

  {
    auto os = open("curve.csv");
    os << curve_csv(bundle);
    paths.push_back(directory + "/curve.csv");
  }
  {
    auto os = open("convergence.jsonl");
    os << "{\"config_hash\":\"" << config_hash(bundle.config) << "\"}\n";
    for (const auto& r : bundle.records) {
      json j;
      j["step"] = r.step;
      j["iteration"] = r.iteration;
      j["eta"] = r.eta;
      j["newton"] = r.newton_iters;
      j["macro_solves"] = r.macro_solves;
      j["macro_residual"] = r.macro_residual;
      j["wall_ms"] = r.wall_ms;
      os << j.dump() << "\n";
    }
    paths.push_back(directory + "/convergence.jsonl");
  }
  {
    auto os = open("events.jsonl");
    for (const auto& e : bundle.events) {
      json j;
      j["iteration"] = e.iteration;
      j["interface"] = e.interface;
      j["what"] = e.what;
      os << j.dump() << "\n";
    }
    paths.push_back(directory + "/events.jsonl");
  }
  {
    auto os = open("run.json");
    json j;
    j["config_hash"] = config_hash(bundle.config);
    j["success"] = bundle.success;
    j["failure"] = bundle.failure;
    j["iterations_per_step"] = bundle.iterations_per_step;
    j["wall_seconds"] = bundle.wall_seconds;
    j["max_macro_residual"] = bundle.max_macro_residual;
    j["dissipated_Nmm"] = bundle.dissipated_total;
    j["config"] = bundle.config.to_json();
    os << j.dump(2) << "\n";
    paths.push_back(directory + "/run.json");
  }
  return paths;
}

}  // namespace latinfe
