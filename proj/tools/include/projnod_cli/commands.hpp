#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "projnod/bifurcation.hpp"
#include "projnod/centrality.hpp"
#include "projnod/dynamics.hpp"
#include "projnod_cli/scenario.hpp"

namespace projnod::cli {

/// |y_i| at or below this is reported as "neutral".
inline constexpr double kNeutralBand = 1e-6;

std::string decision(double y);

struct SimulateResult {
  Trajectory trajectory;
  std::optional<Eigen::VectorXd> final_y;
  std::vector<std::string> decisions;
  Eigen::VectorXd drift;
  std::optional<Eigen::VectorXd> effective_bias;
  nlohmann::json summary;
};

struct BifurcateResult {
  LsReduction ls;
  BifurcationDiagram newton;
  BifurcationDiagram unfolding;
  nlohmann::json summary;
};

struct CentralityResult {
  CentralityReport report;
  nlohmann::json summary;
};

struct Check {
  std::string name;
  std::string status;  // "pass", "fail" or "skipped (...)"
  double value = 0.0;
  std::string tolerance;
  std::string detail;
};

struct VerifyResult {
  std::vector<Check> checks;
  bool ok() const;
  nlohmann::json summary;
};

struct SweepRow {
  double u = 0.0;
  Eigen::MatrixXd z;
  std::optional<Eigen::VectorXd> y;
  double drift = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  nlohmann::json summary;
};

SimulateResult run_simulate(const Scenario& sc);
BifurcateResult run_bifurcate(const Scenario& sc);
CentralityResult run_centrality(const Scenario& sc);
VerifyResult run_verify(const Scenario& sc);
/// One simulation per u on the sweep grid, spread over `threads` workers (0 = hardware).
SweepResult run_sweep(const Scenario& sc, unsigned threads = 0);

/// Each writes its files under sc.out_dir, prefixed by the scenario name, and logs
/// the paths written to `log`.
void write_simulate(const Scenario& sc, const SimulateResult& r, std::ostream& log);
void write_bifurcate(const Scenario& sc, const BifurcateResult& r, std::ostream& log);
void write_centrality(const Scenario& sc, const CentralityResult& r, std::ostream& log);
void write_verify(const Scenario& sc, const VerifyResult& r, std::ostream& log);
void write_sweep(const Scenario& sc, const SweepResult& r, std::ostream& log);

/// Verify scenario whose loading failed on a named invariant.
VerifyResult verify_failure(const ConfigError& e);

}  // namespace projnod::cli
