#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "projnod/constraints.hpp"
#include "projnod/dynamics.hpp"
#include "projnod/graph.hpp"

namespace projnod::cli {

/// Scenario rejected before any numerics ran. The message leads with "line L" when the
/// offending value could be located in the source text; `pointer` is its JSON pointer.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, std::string invariant, const std::string& message)
      : std::runtime_error(message), pointer_(std::move(pointer)), invariant_(std::move(invariant)) {}
  const std::string& pointer() const { return pointer_; }
  const std::string& invariant() const { return invariant_; }

 private:
  std::string pointer_;
  std::string invariant_;
};

/// Line (1-based) of the value at `pointer` in JSON `text`, if it can be found.
std::optional<int> locate_line(const std::string& text, const std::string& pointer);

struct InitialSpec {
  enum class Kind { Seeded, Explicit, Effective } kind = Kind::Seeded;
  double epsilon = 0.01;
  Eigen::MatrixXd z;  // Explicit
  Eigen::VectorXd y;  // Effective (rank-one scenarios)
};

struct SweepSpec {
  double u_min = 0.0;
  double u_max = 0.0;
  int u_steps = 101;
  int mode = 0;
  std::vector<Eigen::VectorXd> seeds;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<double> u_min;
  std::optional<double> u_max;
  std::optional<int> u_steps;
  std::optional<std::string> out_dir;
};

struct Scenario {
  std::string name;
  Graph graph;
  ConstraintSet constraints;
  NodParams params;
  Eigen::MatrixXd bias;
  InitialSpec initial;
  IntegrationOptions integrator;
  /// "full" or "reduced".
  std::string model = "full";
  SweepSpec sweep;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  /// Fully resolved document, every default explicit.
  nlohmann::json resolved;
  /// 16 hex digits, FNV-1a of resolved.dump().
  std::string hash;

  int agents() const { return graph.size(); }
  int options() const { return constraints.options(); }
  Eigen::MatrixXd initial_state() const;
};

Scenario parse_scenario(const std::string& text, const Overrides& overrides = {});
Scenario load_scenario(const std::string& path, const Overrides& overrides = {});

std::string fnv1a_hex(const std::string& bytes);

}  // namespace projnod::cli
