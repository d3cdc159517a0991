#include "projnod/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <tuple>

#include "projnod/errors.hpp"
#include "projnod/linalg.hpp"

namespace projnod {

namespace {

constexpr double kDegenerateThreshold = 1e-12;
constexpr double kSimpleGap = 1e-8;

// Greedy nearest-neighbour matching between consecutive grid samples.
std::vector<std::vector<int>> link_branches(const std::vector<std::vector<Eigen::VectorXd>>& samples) {
  std::vector<std::vector<int>> ids(samples.size());
  int next_id = 0;
  const std::vector<Eigen::VectorXd>* prev = nullptr;
  const std::vector<int>* prev_ids = nullptr;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& cur = samples[s];
    ids[s].assign(cur.size(), -1);
    if (prev != nullptr && !prev->empty()) {
      std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
      for (std::size_t i = 0; i < cur.size(); ++i) {
        for (std::size_t j = 0; j < prev->size(); ++j) pairs.emplace_back((cur[i] - (*prev)[j]).norm(), i, j);
      }
      std::sort(pairs.begin(), pairs.end());
      std::vector<bool> used(prev->size(), false);
      for (const auto& [dist, i, j] : pairs) {
        if (ids[s][i] >= 0 || used[j]) continue;
        ids[s][i] = (*prev_ids)[j];
        used[j] = true;
      }
    }
    for (auto& id : ids[s]) {
      if (id < 0) id = next_id++;
    }
    if (!cur.empty()) {
      prev = &cur;
      prev_ids = &ids[s];
    }
  }
  return ids;
}

Stability stability_from(double value, double scale) {
  if (std::abs(value) <= 1e-10 * std::max(1.0, scale)) return Stability::Marginal;
  return value < 0.0 ? Stability::Stable : Stability::Unstable;
}

}  // namespace

std::string to_string(Stability s) {
  switch (s) {
    case Stability::Stable:
      return "stable";
    case Stability::Unstable:
      return "unstable";
    case Stability::Marginal:
      return "marginal";
  }
  return "unknown";
}

CriticalAttention critical_attention(const NodParams& p, double lambda) {
  const double denom = p.alpha + lambda * p.gamma;
  if (std::abs(denom) <= kDegenerateThreshold) {
    throw DomainError("degenerate threshold: alpha + lambda gamma = " + std::to_string(denom));
  }
  const double u = p.d / denom;
  return {u, u > 0.0};
}

Eigen::MatrixXd jacobian_origin(const NodParams& p, const EffectiveNetwork& en, double u) {
  Eigen::MatrixXd j = u * p.gamma * en.graph_prime.adjacency();
  j.diagonal().array() += u * p.alpha - p.d;
  return j;
}

LsReduction ls_coefficients(const NodParams& p, const Graph& g, const ConstraintSet& c, const Eigen::MatrixXd& bias,
                            int mode) {
  const EffectiveNetwork en = effective_adjacency(g, c);
  const BiasField bf = effective_bias(c, bias);
  const int n = g.size();
  if (mode < 0 || mode >= n) throw DomainError("mode index " + std::to_string(mode) + " out of range");
  const auto spec = linalg::symmetric_spectrum(en.graph_prime.adjacency());
  const int idx = n - 1 - mode;
  const double lambda = spec.values(idx);
  const double scale = std::max(1.0, std::abs(lambda));
  const bool repeated_above = idx + 1 < n && spec.values(idx + 1) - lambda <= kSimpleGap * scale;
  const bool repeated_below = idx > 0 && lambda - spec.values(idx - 1) <= kSimpleGap * scale;
  if (repeated_above || repeated_below) {
    throw NonSimpleEigenvalueError("eigenvalue " + std::to_string(lambda) + " of A' (mode " + std::to_string(mode) +
                                   ") is not simple");
  }

  LsReduction ls;
  ls.mode = mode;
  ls.lambda = lambda;
  ls.v = canonical_sign(spec.vectors.col(idx));
  ls.u_star = critical_attention(p, lambda).value;
  ls.a = p.alpha + lambda * p.gamma;

  // Third directional derivative of Phi along v at the origin:
  //   S'''(0) u*^3 sum_i v_i sum_j p_ij w_ij^3,  w = (alpha I + gamma A) diag(v) U.
  const Eigen::MatrixXd units = c.unit_vectors();
  const Eigen::MatrixXd lifted = ls.v.asDiagonal() * units;
  const Eigen::MatrixXd w = p.alpha * lifted + p.gamma * (g.adjacency() * lifted);
  const Eigen::VectorXd per_agent = units.cwiseProduct(w.array().cube().matrix()).rowwise().sum();
  ls.third_derivative = p.sigmoid.third_at_zero * std::pow(ls.u_star, 3) * ls.v.dot(per_agent);
  ls.b_cubic = ls.third_derivative / 6.0;
  ls.unfold = ls.v.dot(bf.effective);
  return ls;
}

std::vector<const DiagramPoint*> BifurcationDiagram::at(int sample) const {
  std::vector<const DiagramPoint*> out;
  for (const auto& pt : points) {
    if (pt.sample == sample) out.push_back(&pt);
  }
  return out;
}

int BifurcationDiagram::equilibria_at(int sample) const { return static_cast<int>(at(sample).size()); }

int BifurcationDiagram::branch_count() const {
  std::set<int> ids;
  for (const auto& pt : points) ids.insert(pt.branch);
  return static_cast<int>(ids.size());
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw ValidationError("grid needs at least one point");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

std::vector<double> depressed_cubic_roots(double c3, double c1, double c0) {
  if (c3 == 0.0) throw DomainError("cubic coefficient is zero");
  const double p = c1 / c3;
  const double q = c0 / c3;
  std::vector<double> roots;
  const double disc = -(4.0 * p * p * p + 27.0 * q * q);
  const double disc_scale = 4.0 * std::abs(p * p * p) + 27.0 * q * q;
  if (std::abs(disc) <= 1e-14 * disc_scale && p != 0.0) {
    roots = {3.0 * q / p, -1.5 * q / p};
  } else if (disc > 0.0) {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0));
  } else {
    const double s = std::sqrt(std::max(0.0, q * q / 4.0 + p * p * p / 27.0));
    const double a = -std::copysign(std::cbrt(std::abs(q) / 2.0 + s), q);
    const double b = a != 0.0 ? -p / (3.0 * a) : 0.0;
    roots.push_back(a + b);
  }
  // One Newton polish on the monic cubic.
  for (auto& x : roots) {
    const double f = x * x * x + p * x + q;
    const double df = 3.0 * x * x + p;
    if (df != 0.0) x -= f / df;
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double l, double r) { return std::abs(l - r) <= 1e-12 * std::max(1.0, std::abs(l)); }),
              roots.end());
  return roots;
}

BifurcationDiagram unfolding_roots(const LsReduction& ls, double u_min, double u_max, int steps) {
  if (ls.b_cubic == 0.0) throw DomainError("cubic coefficient is zero; unfolding is undefined");
  BifurcationDiagram diag;
  diag.method = "unfolding";
  diag.grid = linspace(u_min, u_max, steps);
  std::vector<std::vector<Eigen::VectorXd>> coords(diag.grid.size());
  std::vector<std::vector<double>> xs(diag.grid.size());
  for (std::size_t s = 0; s < diag.grid.size(); ++s) {
    const double uhat = diag.grid[s] - ls.u_star;
    xs[s] = depressed_cubic_roots(ls.b_cubic, ls.a * uhat, ls.unfold);
    for (double x : xs[s]) coords[s].push_back(Eigen::VectorXd::Constant(1, x));
  }
  const auto ids = link_branches(coords);
  for (std::size_t s = 0; s < diag.grid.size(); ++s) {
    const double uhat = diag.grid[s] - ls.u_star;
    for (std::size_t r = 0; r < xs[s].size(); ++r) {
      const double x = xs[s][r];
      const double slope = ls.a * uhat + 3.0 * ls.b_cubic * x * x;
      DiagramPoint pt;
      pt.sample = static_cast<int>(s);
      pt.u = diag.grid[s];
      pt.branch = ids[s][r];
      pt.stability = stability_from(slope, std::abs(ls.a * uhat) + std::abs(3.0 * ls.b_cubic * x * x));
      pt.x_ls = x;
      pt.y = x * ls.v;
      diag.points.push_back(std::move(pt));
    }
  }
  return diag;
}

NewtonResult newton_equilibrium(const ReducedSystem& sys, Eigen::VectorXd seed, const NewtonOptions& opts) {
  NewtonResult out;
  out.y = std::move(seed);
  Eigen::VectorXd f = sys.rhs(out.y);
  out.residual = f.cwiseAbs().maxCoeff();
  for (out.iterations = 0; out.iterations < opts.max_iterations; ++out.iterations) {
    if (out.residual <= opts.tolerance) break;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.jacobian(out.y));
    if (!lu.isInvertible()) break;
    const Eigen::VectorXd step = lu.solve(f);
    if (!step.allFinite()) break;
    out.y -= step;
    f = sys.rhs(out.y);
    out.residual = f.cwiseAbs().maxCoeff();
    if (!std::isfinite(out.residual)) break;
  }
  out.converged = std::isfinite(out.residual) && out.residual <= opts.accept;
  return out;
}

Stability classify(const ReducedSystem& sys, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd j = sys.jacobian(y);
  Eigen::EigenSolver<Eigen::MatrixXd> es(j, false);
  if (es.info() != Eigen::Success) throw NumericError("eigensolver failed while classifying stability");
  const double lead = es.eigenvalues().real().maxCoeff();
  return stability_from(lead, linalg::max_abs(j));
}

BifurcationDiagram equilibrium_sweep(const Graph& g, const ConstraintSet& c, const NodParams& p,
                                     const Eigen::MatrixXd& bias, const std::vector<double>& u_grid,
                                     const std::vector<Eigen::VectorXd>& seeds, const NewtonOptions& opts, int mode) {
  if (!c.is_rank_one()) throw UnsupportedRankError("equilibrium sweep requires rank-one constraints");
  const BiasField bf = effective_bias(c, bias);
  const ReducedSystem base(g, c, p, bf.effective);
  const int n = g.size();
  for (const auto& s : seeds) {
    if (s.size() != n) throw ValidationError("sweep seed has wrong length");
  }

  Eigen::VectorXd v;
  std::optional<LsReduction> ls;
  try {
    ls = ls_coefficients(p, g, c, bias, mode);
    v = ls->v;
  } catch (const NonSimpleEigenvalueError&) {
    v = dominant_eigenpair(effective_adjacency(g, c).graph_prime.adjacency()).vector;
  }

  BifurcationDiagram diag;
  diag.method = "newton";
  diag.grid = u_grid;
  std::vector<std::vector<Eigen::VectorXd>> found(u_grid.size());
  const std::vector<Eigen::VectorXd>* previous = nullptr;
  for (std::size_t s = 0; s < u_grid.size(); ++s) {
    const double u = u_grid[s];
    if (s > 0 && !(u > u_grid[s - 1])) throw ValidationError("sweep grid must be strictly increasing");
    const ReducedSystem sys = base.with_attention(u);

    std::vector<Eigen::VectorXd> trial = seeds;
    trial.push_back(Eigen::VectorXd::Zero(n));
    if (previous != nullptr) trial.insert(trial.end(), previous->begin(), previous->end());
    for (double amp : {0.1, 1.0}) {
      trial.push_back(amp * v);
      trial.push_back(-amp * v);
    }
    if (ls && ls->b_cubic < 0.0 && u > ls->u_star) {
      // Predicted pitchfork amplitude from the cubic model.
      const double amp = std::sqrt((u - ls->u_star) * ls->a / -ls->b_cubic);
      trial.push_back(amp * v);
      trial.push_back(-amp * v);
    }

    auto& eq = found[s];
    for (const auto& seed : trial) {
      const NewtonResult r = newton_equilibrium(sys, seed, opts);
      if (!r.converged) continue;
      const bool duplicate = std::any_of(eq.begin(), eq.end(), [&](const Eigen::VectorXd& e) {
        return (e - r.y).norm() <= opts.dedup_distance;
      });
      if (!duplicate) eq.push_back(r.y);
    }
    std::sort(eq.begin(), eq.end(),
              [&v](const Eigen::VectorXd& l, const Eigen::VectorXd& r) { return v.dot(l) < v.dot(r); });
    if (eq.empty()) {
      diag.gaps.push_back(u);
    } else {
      previous = &eq;
    }
  }

  const auto ids = link_branches(found);
  for (std::size_t s = 0; s < u_grid.size(); ++s) {
    const ReducedSystem sys = base.with_attention(u_grid[s]);
    for (std::size_t k = 0; k < found[s].size(); ++k) {
      DiagramPoint pt;
      pt.sample = static_cast<int>(s);
      pt.u = u_grid[s];
      pt.branch = ids[s][k];
      pt.stability = classify(sys, found[s][k]);
      pt.x_ls = v.dot(found[s][k]);
      pt.y = found[s][k];
      diag.points.push_back(std::move(pt));
    }
  }
  return diag;
}

}  // namespace projnod
