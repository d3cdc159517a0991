#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "projnod/bifurcation.hpp"
#include "projnod/centrality.hpp"
#include "projnod/dynamics.hpp"

namespace projnod::csv {

/// Provenance written as leading `# key=value` comment lines.
struct Provenance {
  std::string scenario_hash;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> notes;
};

/// The `# scenario_hash=...`, `# seed=...` and note lines every output starts with.
void write_provenance(std::ostream& out, const Provenance& prov);

/// Shortest round-trip decimal form of a double.
std::string format(double v);

/// `t,z_1_1,...,z_n_No,y_1,...,y_n` (agent-major), one row per sample.
void write_trajectory(std::ostream& out, const Trajectory& traj, const Provenance& prov);

/// `method,u,branch_id,stability,x_ls,y_1,...,y_n`; gaps become `# gap ...` lines.
void write_diagram(std::ostream& out, const std::vector<const BifurcationDiagram*>& diagrams, const Provenance& prov);

/// `node,exact,approx,abs_diff`; approx is unit-normalised and sign-aligned with exact.
void write_centrality(std::ostream& out, const CentralityReport& report, const Provenance& prov);

}  // namespace projnod::csv
