#include <CLI11.hpp>

#include "latinfe/outputs.hpp"
#include "latinfe/scenarios.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace latinfe;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIO = 4;

int do_run(const std::string& path, const std::string& out_override,
           int workers_override) {
  RunConfig cfg = parse_config_file(path);
  if (!out_override.empty()) cfg.output.directory = out_override;
  if (workers_override > 0) cfg.solver.workers = workers_override;
  ScenarioRun run(cfg);
  ArtifactBundle bundle = run.run_all(cfg.output.directory);
  auto paths = write_outputs(bundle, cfg.output.directory);
  for (const auto& p : paths) std::cout << "wrote " << p << "\n";
  if (!bundle.success) {
    std::cerr << "solver did not converge: " << bundle.failure << "\n";
    return kExitSolver;
  }
  std::printf("converged: %d steps, %zu iterations, %.1f s\n",
              (int)bundle.iterations_per_step.size(), bundle.records.size(),
              bundle.wall_seconds);
  return 0;
}

int do_sweep(const std::string& path, const std::string& vary) {
  auto eq = vary.find('=');
  if (eq == std::string::npos)
    throw InputError("--vary expects key=v1,v2,...");
  std::string key = vary.substr(0, eq);
  std::string values = vary.substr(eq + 1);

  std::ifstream is(path);
  if (!is) throw InputError("cannot read config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  json user = json::parse(ss.str());

  RunConfig base = parse_config_text(ss.str());
  std::string summary =
      "# sweep " + key + "\nvalue,converged,steps,total_iterations,wall_s\n";
  int rc = 0;
  std::size_t pos = 0;
  while (pos != std::string::npos) {
    std::size_t comma = values.find(',', pos);
    std::string v = values.substr(pos, comma == std::string::npos
                                           ? std::string::npos
                                           : comma - pos);
    pos = comma == std::string::npos ? comma : comma + 1;
    json mod = set_config_key(user, key, v);
    RunConfig cfg = parse_config_text(mod.dump());
    std::string dir = base.output.directory + "/" + key + "=" + v;
    cfg.output.directory = dir;
    std::cout << "running " << key << "=" << v << "\n";
    ScenarioRun run(cfg);
    ArtifactBundle bundle = run.run_all(dir);
    write_outputs(bundle, dir);
    long total = 0;
    for (int it : bundle.iterations_per_step) total += it;
    summary += v + "," + (bundle.success ? "1" : "0") + "," +
               std::to_string(bundle.iterations_per_step.size()) + "," +
               std::to_string(total) + "," +
               std::to_string(bundle.wall_seconds) + "\n";
    if (!bundle.success) rc = kExitSolver;
  }
  std::ofstream os(base.output.directory + "/sweep.csv", std::ios::binary);
  if (!os) throw SolverError("cannot write sweep summary");
  os << summary;
  std::cout << "wrote " << base.output.directory + "/sweep.csv" << "\n";
  return rc;
}

int do_oracle(const std::string& name, const std::vector<double>& a) {
  auto need = [&](std::size_t n) {
    if (a.size() != n)
      throw InputError("oracle " + name + " expects " + std::to_string(n) +
                       " arguments");
  };
  if (name == "euler_load") {
    need(4);  // E b h L
    std::printf("%.6g\n", oracles::euler_load(a[0], a[1], a[2], a[3]));
  } else if (name == "local_global_buckling") {
    need(5);  // E b h_ply a0 L0
    auto [pl, pg] = oracles::local_global_buckling(a[0], a[1], a[2], a[3],
                                                   a[4]);
    std::printf("P_local %.6g\nP_global %.6g\n", pl, pg);
  } else if (name == "bruno_propagation") {
    need(4);  // Gc b0 P_local a0
    std::printf("%.6g\n", oracles::bruno_propagation(a[0], a[1], a[2], a[3]));
  } else if (name == "dcb_force") {
    need(7);  // E b h_arm a0 k_n0 Yc displacement
    std::printf("%.6g\n",
                oracles::dcb_force(a[0], a[1], a[2], a[3], a[4], a[5], a[6]));
  } else {
    throw InputError(
        "unknown oracle (euler_load, local_global_buckling, "
        "bruno_propagation, dcb_force)");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale mixed domain-decomposition solver for layered "
               "slender structures"};
  app.require_subcommand(1);

  std::string config_path, out_dir, vary, oracle_name;
  int workers = 0;
  std::vector<double> oracle_args;

  auto* run = app.add_subcommand("run", "Run a scenario from a config file");
  run->add_option("config", config_path, "config file (JSON)")->required();
  run->add_option("--out", out_dir, "output directory override");
  run->add_option("--workers", workers, "worker count override");

  auto* sweep =
      app.add_subcommand("sweep", "Run a scenario over a list of values");
  sweep->add_option("config", config_path)->required();
  sweep->add_option("--vary", vary, "dotted key=v1,v2,...")->required();

  auto* oracle = app.add_subcommand("oracle", "Print analytic oracle values");
  oracle->add_option("name", oracle_name)->required();
  oracle->add_option("args", oracle_args);

  auto* validate =
      app.add_subcommand("validate", "Parse, validate and echo a config");
  validate->add_option("config", config_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return do_run(config_path, out_dir, workers);
    if (sweep->parsed()) return do_sweep(config_path, vary);
    if (oracle->parsed()) return do_oracle(oracle_name, oracle_args);
    if (validate->parsed()) {
      RunConfig cfg = parse_config_file(config_path);
      std::cout << serialize_config(cfg);
      return 0;
    }
  } catch (const InputError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::string w = e.what();
    return w.find("cannot write") != std::string::npos ||
                   w.find("cannot create") != std::string::npos
               ? kExitIO
               : kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
