#include <aggfem/aggfem.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace aggfem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr const char* kThreadsEnv = "AGGFEM_THREADS";

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int parse_thread_env(const char* text) {
  char* end = nullptr;
  const long v = std::strtol(text, &end, 10);
  if (end == text || *end != '\0' || v < 1 || v > 4096) {
    throw ConfigError(kThreadsEnv, std::string("expected a positive integer, got '") + text + "'");
  }
  return static_cast<int>(v);
}

int seed_check() {
  bool ok = true;
  for (const CheckResult& r : run_self_check()) {
    std::printf("%-13s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.detail.c_str());
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

int simulate(RunConfig cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const Mesh mesh = build_structured_acute_mesh(cfg.domain, cfg.n_square);
  const NodalField rho0 = init_from_function(mesh, make_initial_function(cfg));
  const AnyKernel kernel = make_kernel(cfg);
  const DiffusionLaw law = make_law(cfg);

  const ConditionReport cond = check_conditions(mesh, kernel, rho0, cfg.time);
  std::fprintf(stderr, "mesh: %d nodes, %d triangles, h = %.6g, max angle %.4f deg\n", mesh.num_nodes(),
               mesh.num_elements(), mesh.h(), verify_acuteness(mesh).max_angle * 180.0 / std::numbers::pi);
  std::fprintf(stderr, "conditions: q_solv = %.6g, q_nonneg = %.6g (reported only)\n", cond.q_solv,
               cond.q_nonneg);
  std::fprintf(stderr, "B_Linf = %.6g\n", compute_B_Linf(kernel, rho0, cfg.time.T_final).cap());

  const fs::path out_dir = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir, "cannot create directory: " + ec.message());

  DiagnosticsCsvWriter csv(out_dir / "diagnostics.csv");
  RunSinks sinks;
  sinks.on_record = [&](const DiagnosticsRecord& r) { csv.write(r); };
  sinks.on_snapshot = [&](const SolverState& s) {
    char name[64];
    std::snprintf(name, sizeof name, "rho_%06ld.vtk", s.step_index);
    char title[64];
    std::snprintf(title, sizeof title, "rho t=%.6g", s.t);
    write_vtk_snapshot(mesh, s.rho, out_dir / name, title);
  };
  sinks.on_warning = [](const std::string& w) { std::fprintf(stderr, "warning: %s\n", w.c_str()); };
  sinks.flush = [&] { csv.flush(); };

  const RunResult result = run(mesh, law, kernel, rho0, cfg.time, sinks);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const DiagnosticsRecord& last = result.diagnostics.back();
  std::printf("steps=%ld wall=%.3fs mass=%.17g linf=%.17g\n", result.final_state.step_index, wall, last.mass,
              last.linf);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-element solver for the aggregation equation with degenerate diffusion"};
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  std::optional<int> snapshot_every;
  bool self_check = false;
  app.add_option("--config", config_path, "JSON run configuration (defaults are used when omitted)");
  app.add_option("--out-dir", out_dir, "output directory (overrides output.dir)");
  app.add_option("--threads", threads, "worker count (overrides AGGFEM_THREADS and the config)")
      ->check(CLI::PositiveNumber);
  app.add_option("--snapshot-every", snapshot_every, "write a VTK snapshot every N steps (0 disables)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--seed-check", self_check, "run the built-in invariant checks instead of a simulation");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (self_check) {
    try {
      return seed_check();
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return kExitRuntime;
    }
  }

  RunConfig cfg;
  try {
    cfg = parse_config(config_path.empty() ? std::string() : read_file(config_path));
    if (const char* env = std::getenv(kThreadsEnv); env && *env) cfg.time.workers = parse_thread_env(env);
    if (threads) cfg.time.workers = *threads;
    if (snapshot_every) cfg.time.snapshot_every = *snapshot_every;
    if (out_dir) cfg.output_dir = *out_dir;
    if (cfg.output_dir.empty()) throw ConfigError("--out-dir", "must not be empty");
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }

  try {
    return simulate(std::move(cfg));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}
