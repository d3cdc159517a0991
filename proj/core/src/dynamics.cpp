#include "projnod/dynamics.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "projnod/errors.hpp"

namespace projnod {

namespace {

Eigen::MatrixXd apply_sigmoid(const Sigmoid& s, const Eigen::MatrixXd& arg) {
  if (s.is_tanh) return arg.array().tanh().matrix();
  return arg.unaryExpr([&s](double z) { return s(z); });
}

Eigen::MatrixXd apply_slope(const Sigmoid& s, const Eigen::MatrixXd& arg) {
  if (s.is_tanh) return (1.0 - arg.array().tanh().square()).matrix();
  return arg.unaryExpr([&s](double z) { return s.derivative(z); });
}

void require_finite_positive(double v, const char* name) {
  if (!std::isfinite(v) || !(v > 0.0)) {
    throw ValidationError(std::string("parameter ") + name + " must be finite and > 0, got " + std::to_string(v));
  }
}

void check_dims(const Graph& g, const ConstraintSet& c) {
  if (c.agents() != g.size()) {
    throw ValidationError("constraint set has " + std::to_string(c.agents()) + " agents but graph has " +
                          std::to_string(g.size()) + " nodes");
  }
}

template <typename State, typename Field>
State rk4_step(const Field& f, const State& x, double dt) {
  const State k1 = f(x);
  const State k2 = f(State(x + 0.5 * dt * k1));
  const State k3 = f(State(x + 0.5 * dt * k2));
  const State k4 = f(State(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

long long step_count(const IntegrationOptions& opts) {
  return std::llround(opts.horizon / opts.dt);
}

TrajectoryMetadata metadata_for(const Graph& g, const ConstraintSet& c, const NodParams& p) {
  TrajectoryMetadata m;
  m.d = p.d;
  m.u = p.u;
  m.alpha = p.alpha;
  m.gamma = p.gamma;
  m.sigmoid = p.sigmoid.name;
  m.graph = g.label();
  m.constraints = c.label();
  return m;
}

template <typename State, typename Field, typename Record>
void run_rk4(const Field& f, State x, const IntegrationOptions& opts, Trajectory& traj, const Record& record) {
  const long long steps = step_count(opts);
  traj.times.reserve(static_cast<std::size_t>(steps / opts.sample_every + 2));
  traj.times.push_back(0.0);
  record(x);
  for (long long k = 1; k <= steps; ++k) {
    x = rk4_step(f, x, opts.dt);
    const double t = static_cast<double>(k) * opts.dt;
    if (!x.allFinite()) {
      std::ostringstream msg;
      msg << "integration diverged at t = " << t << " (step " << k << ")";
      throw DivergenceError(msg.str(), t);
    }
    if (k % opts.sample_every == 0 || k == steps) {
      traj.times.push_back(t);
      record(x);
    }
  }
}

}  // namespace

void NodParams::validate() const {
  require_finite_positive(d, "d");
  require_finite_positive(u, "u");
  require_finite_positive(alpha, "alpha");
  require_finite_positive(gamma, "gamma");
  if (!sigmoid.is_tanh && !sigmoid.value) throw ValidationError("sigmoid '" + sigmoid.name + "' is empty");
}

NodParams NodParams::with_attention(double attention) const {
  NodParams out = *this;
  out.u = attention;
  return out;
}

FullSystem::FullSystem(const Graph& g, const ConstraintSet& c, NodParams p, Eigen::MatrixXd bias)
    : graph_(g), constraints_(c), params_(std::move(p)), bias_(std::move(bias)) {
  params_.validate();
  check_dims(g, c);
  if (bias_.rows() != c.agents() || bias_.cols() != c.options()) {
    throw ValidationError("bias matrix is " + std::to_string(bias_.rows()) + "x" + std::to_string(bias_.cols()) +
                          ", expected " + std::to_string(c.agents()) + "x" + std::to_string(c.options()));
  }
}

Eigen::MatrixXd FullSystem::raw_field(const Eigen::MatrixXd& z) const {
  if (z.rows() != constraints_.agents() || z.cols() != constraints_.options()) {
    throw ValidationError("state is " + std::to_string(z.rows()) + "x" + std::to_string(z.cols()) + ", expected " +
                          std::to_string(constraints_.agents()) + "x" + std::to_string(constraints_.options()));
  }
  const NodParams& p = params_;
  const Eigen::MatrixXd arg = p.u * (p.alpha * z + p.gamma * (graph_.adjacency() * z));
  return -p.d * z + apply_sigmoid(p.sigmoid, arg) + bias_;
}

Eigen::MatrixXd FullSystem::rhs(const Eigen::MatrixXd& z) const {
  const Eigen::MatrixXd f = raw_field(z);
  Eigen::MatrixXd out(f.rows(), f.cols());
  for (int i = 0; i < constraints_.agents(); ++i) {
    out.row(i).noalias() = f.row(i) * constraints_.projector(i);  // P_i symmetric
  }
  return out;
}

ReducedSystem::ReducedSystem(const Graph& g, const ConstraintSet& c, NodParams p, Eigen::VectorXd effective_bias)
    : graph_(g), constraints_(c), params_(std::move(p)), bias_(std::move(effective_bias)) {
  params_.validate();
  check_dims(g, c);
  units_ = c.unit_vectors();
  if (bias_.size() != c.agents()) {
    throw ValidationError("effective bias has " + std::to_string(bias_.size()) + " entries, expected " +
                          std::to_string(c.agents()));
  }
}

Eigen::MatrixXd ReducedSystem::lift(const Eigen::VectorXd& y) const { return y.asDiagonal() * units_; }

Eigen::MatrixXd ReducedSystem::argument(const Eigen::VectorXd& y) const {
  if (y.size() != agents()) {
    throw ValidationError("effective state has " + std::to_string(y.size()) + " entries, expected " +
                          std::to_string(agents()));
  }
  const Eigen::MatrixXd lifted = lift(y);
  return params_.u * (params_.alpha * lifted + params_.gamma * (graph_.adjacency() * lifted));
}

Eigen::VectorXd ReducedSystem::rhs(const Eigen::VectorXd& y) const {
  const Eigen::MatrixXd s = apply_sigmoid(params_.sigmoid, argument(y));
  return -params_.d * y + units_.cwiseProduct(s).rowwise().sum() + bias_;
}

Eigen::MatrixXd ReducedSystem::jacobian(const Eigen::VectorXd& y) const {
  const Eigen::MatrixXd w = apply_slope(params_.sigmoid, argument(y)).cwiseProduct(units_);
  const Eigen::VectorXd self = w.cwiseProduct(units_).rowwise().sum();
  const Eigen::MatrixXd cross = graph_.adjacency().cwiseProduct(w * units_.transpose());
  Eigen::MatrixXd j = params_.u * params_.gamma * cross;
  j.diagonal().array() += params_.u * params_.alpha * self.array() - params_.d;
  return j;
}

ReducedSystem ReducedSystem::with_attention(double attention) const {
  ReducedSystem out = *this;
  out.params_.u = attention;
  return out;
}

Eigen::MatrixXd full_rhs(const Eigen::MatrixXd& state, const Graph& g, const ConstraintSet& c, const NodParams& p,
                         const Eigen::MatrixXd& bias) {
  return FullSystem(g, c, p, bias).rhs(state);
}

Eigen::VectorXd reduced_rhs(const Eigen::VectorXd& y, const Graph& g, const ConstraintSet& c, const NodParams& p,
                            const BiasField& bias) {
  return ReducedSystem(g, c, p, bias.effective).rhs(y);
}

void IntegrationOptions::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
  if (!(horizon >= dt) || !std::isfinite(horizon)) throw ValidationError("horizon must be >= dt");
  if (sample_every < 1) throw ValidationError("sample_every must be >= 1");
}

Trajectory integrate(const FullSystem& system, Eigen::MatrixXd initial, const IntegrationOptions& opts) {
  opts.validate();
  const ConstraintSet& c = system.constraints();
  if (!initial.allFinite()) throw ValidationError("initial state has non-finite entries");
  Trajectory traj;
  traj.meta = metadata_for(system.graph(), c, system.params());
  const double violation = c.violation(initial).maxCoeff();
  if (violation > opts.violation_tol) {
    if (opts.strict) {
      throw ValidationError("initial state violates constraints (max |P_perp Z_i| = " + std::to_string(violation) + ")");
    }
    if (opts.project_initial) {
      initial = c.project(initial);
      traj.meta.warnings.push_back("initial state projected onto constraint subspaces (violation " +
                                   std::to_string(violation) + ")");
    } else {
      traj.meta.warnings.push_back("initial state violates constraints (violation " + std::to_string(violation) +
                                   "); orthogonal part kept and stays frozen");
    }
  }
  const bool rank_one = c.is_rank_one();
  const Eigen::MatrixXd units = rank_one ? c.unit_vectors() : Eigen::MatrixXd();
  auto field = [&system](const Eigen::MatrixXd& z) { return system.rhs(z); };
  run_rk4(field, std::move(initial), opts, traj, [&](const Eigen::MatrixXd& z) {
    traj.full.push_back(z);
    if (rank_one) traj.effective.push_back(units.cwiseProduct(z).rowwise().sum());
  });
  return traj;
}

Trajectory integrate(const ReducedSystem& system, const Eigen::VectorXd& initial, const IntegrationOptions& opts) {
  opts.validate();
  if (!initial.allFinite()) throw ValidationError("initial state has non-finite entries");
  if (initial.size() != system.agents()) throw ValidationError("initial effective state has wrong length");
  Trajectory traj;
  traj.meta = metadata_for(system.graph(), system.constraints(), system.params());
  auto field = [&system](const Eigen::VectorXd& y) { return system.rhs(y); };
  run_rk4(field, initial, opts, traj, [&](const Eigen::VectorXd& y) {
    traj.effective.push_back(y);
    traj.full.push_back(system.lift(y));
  });
  return traj;
}

Eigen::MatrixXd seeded_initial_state(const ConstraintSet& c, std::uint64_t seed, double epsilon) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd z(c.agents(), c.options());
  // Explicit 53-bit mapping keeps draws identical across standard libraries.
  for (int i = 0; i < z.rows(); ++i) {
    for (int j = 0; j < z.cols(); ++j) {
      const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      z(i, j) = epsilon * (2.0 * unit - 1.0);
    }
  }
  return c.project(z);
}

Eigen::VectorXd constraint_drift(const Trajectory& traj, const ConstraintSet& c) {
  Eigen::VectorXd drift = Eigen::VectorXd::Zero(c.agents());
  for (const auto& z : traj.full) drift = drift.cwiseMax(c.violation(z));
  return drift;
}

double full_reduced_equivalence(const Graph& g, const ConstraintSet& c, const NodParams& p,
                                const Eigen::MatrixXd& bias, const Eigen::VectorXd& initial_effective,
                                double horizon, double dt) {
  const FullSystem full(g, c, p, bias);
  const ReducedSystem reduced(g, c, p, effective_bias(c, bias).effective);
  IntegrationOptions opts;
  opts.horizon = horizon;
  opts.dt = dt;
  opts.sample_every = 1;
  const Trajectory a = integrate(full, reduced.lift(initial_effective), opts);
  const Trajectory b = integrate(reduced, initial_effective, opts);
  double worst = 0.0;
  for (std::size_t k = 0; k < a.samples(); ++k) {
    worst = std::max(worst, (a.effective[k] - b.effective[k]).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace projnod
