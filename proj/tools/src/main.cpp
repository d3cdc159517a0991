#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "projnod/errors.hpp"
#include "projnod_cli/commands.hpp"
#include "projnod_cli/scenario.hpp"

namespace {

using namespace projnod;
using namespace projnod::cli;

constexpr int kExitOk = 0;
constexpr int kExitChecksFailed = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct CommonFlags {
  std::string config;
  bool print_config = false;
  Overrides overrides;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "Scenario JSON file")->required();
  sub->add_option("--out", f.overrides.out_dir, "Output directory (overrides output.dir)");
  sub->add_option("--seed", f.overrides.seed, "Seed for the initial state (overrides seed)");
  sub->add_option("--dt", f.overrides.dt, "RK4 step (overrides integrator.dt)");
  sub->add_option("--horizon", f.overrides.horizon, "Integration horizon (overrides integrator.horizon)");
  sub->add_option("--u-min", f.overrides.u_min, "Lower end of the u grid");
  sub->add_option("--u-max", f.overrides.u_max, "Upper end of the u grid");
  sub->add_option("--u-steps", f.overrides.u_steps, "Number of u grid points");
  sub->add_flag("--print-config", f.print_config, "Print the resolved scenario with every default and exit");
}

int run(const std::string& command, const CommonFlags& f, unsigned threads) {
  if (command == "verify") {
    std::optional<Scenario> sc;
    VerifyResult r;
    try {
      sc = load_scenario(f.config, f.overrides);
    } catch (const ConfigError& e) {
      if (e.invariant() == "io" || e.invariant() == "json" || e.invariant() == "config") throw;
      r = verify_failure(e);
    }
    if (sc && f.print_config) {
      std::cout << sc->resolved.dump(2) << "\n";
      return kExitOk;
    }
    if (sc) r = run_verify(*sc);
    for (const auto& c : r.checks) {
      std::cout << c.status << "  " << c.name;
      if (!c.tolerance.empty()) std::cout << "  value=" << c.value << " tol " << c.tolerance;
      if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
      std::cout << "\n";
    }
    if (sc) write_verify(*sc, r, std::cerr);
    return r.ok() ? kExitOk : kExitChecksFailed;
  }

  const Scenario sc = load_scenario(f.config, f.overrides);
  if (f.print_config) {
    std::cout << sc.resolved.dump(2) << "\n";
    return kExitOk;
  }
  if (command == "simulate") {
    const SimulateResult r = run_simulate(sc);
    write_simulate(sc, r, std::cerr);
    std::cout << r.summary.dump(2) << "\n";
  } else if (command == "bifurcate") {
    const BifurcateResult r = run_bifurcate(sc);
    write_bifurcate(sc, r, std::cerr);
    std::cout << r.summary.dump(2) << "\n";
  } else if (command == "centrality") {
    const CentralityResult r = run_centrality(sc);
    write_centrality(sc, r, std::cerr);
    std::cout << r.summary.dump(2) << "\n";
  } else if (command == "sweep") {
    const SweepResult r = run_sweep(sc, threads);
    write_sweep(sc, r, std::cerr);
    std::cout << r.summary.dump(2) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projection-constrained nonlinear opinion dynamics"};
  app.require_subcommand(1);
  CommonFlags flags;
  unsigned threads = 0;
  for (const char* name : {"simulate", "bifurcate", "centrality", "verify", "sweep"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub, flags);
    if (std::string(name) == "sweep") sub->add_option("--threads", threads, "Worker threads (0 = all cores)");
  }
  app.get_subcommand("simulate")->description("Integrate the scenario; write trajectory CSV and summary JSON");
  app.get_subcommand("bifurcate")->description("Newton sweep and cubic unfolding over the u grid; write diagram CSV");
  app.get_subcommand("centrality")->description("Exact and closed-form centrality of the effective network");
  app.get_subcommand("verify")->description("Run invariant checks on the scenario's objects");
  app.get_subcommand("sweep")->description("Final state of one simulation per u grid point, in parallel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, flags, threads);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
