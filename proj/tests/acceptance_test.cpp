// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "projnod/bifurcation.hpp"
#include "projnod/centrality.hpp"
#include "projnod/dynamics.hpp"
#include "projnod/linalg.hpp"

using namespace projnod;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(xs.size());
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

NodParams paper_params(double u = 0.14) {
  NodParams p;
  p.d = 0.3;
  p.u = u;
  p.alpha = 1.0;
  p.gamma = 0.5;
  return p;
}

ConstraintSet agent_two(int n, const Eigen::VectorXd& p2) {
  std::vector<Eigen::VectorXd> vs(n, vec({1, 1, 1}));
  vs[1] = p2;
  return ConstraintSet::from_vectors(vs);
}

Eigen::MatrixXd scaled_edges(const Eigen::MatrixXd& a, double s, int h = 0) {
  Eigen::MatrixXd k = a;
  k.row(h) *= s;
  k.col(h) *= s;
  k(h, h) = 0;
  return k;
}

double oracle_error(const Eigen::VectorXd& approx, const Eigen::MatrixXd& k) {
  const Eigen::VectorXd exact = oracle::dominant(k).second;
  const Eigen::VectorXd a = approx.normalized();
  return std::min((a - exact).norm(), (a + exact).norm());
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome effective_bias_values() {
  Outcome o;
  const Eigen::MatrixXd b = [] {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(6, 3);
    m.row(1) = vec({1, 1, -1}).transpose();
    return m;
  }();
  const double hom = effective_bias(agent_two(6, vec({1, 1, 1})), b).effective(1);
  const double het = effective_bias(agent_two(6, vec({1, 1, 3})), b).effective(1);
  o.require(std::abs(hom - 1 / std::sqrt(3.0)) <= 1e-3, "b_e2 homogeneous " + fmt(hom));
  o.require(std::abs(het + 1 / std::sqrt(11.0)) <= 1e-3, "b_e2 heterogeneous " + fmt(het));
  Eigen::MatrixXd b4 = Eigen::MatrixXd::Zero(6, 3);
  b4.row(0).setConstant(0.3);
  b4.row(3).setConstant(-0.24);
  const Eigen::VectorXd e4 = effective_bias(agent_two(6, vec({1, 1, 3})), b4).effective;
  o.require(std::abs(e4(0) - 0.9 / std::sqrt(3.0)) <= 1e-3, "b_e1 " + fmt(e4(0)));
  o.require(std::abs(e4(3) + 0.72 / std::sqrt(3.0)) <= 1e-3, "b_e4 " + fmt(e4(3)));
  o.require(std::abs(e4(0) - 0.520) <= 1e-3 && std::abs(e4(3) + 0.416) <= 1e-3, "b_e1/b_e4 vs 0.520/-0.416");
  o.detail << "b_e2 = " << fmt(hom) << " / " << fmt(het) << ", b_e1 = " << fmt(e4(0)) << ", b_e4 = " << fmt(e4(3));
  return o;
}

Outcome critical_attention_values() {
  Outcome o;
  const ConstraintSet h5 = ConstraintSet::homogeneous(5, vec({1, 1, 1}));
  const ConstraintSet h6 = ConstraintSet::homogeneous(6, vec({1, 1, 1}));
  struct Case {
    Graph g;
    const ConstraintSet* c;
    double want;
  };
  for (const Case& cs : {Case{graphs::ring(5), &h5, 0.15}, Case{graphs::complete(6), &h6, 0.085714}}) {
    const EffectiveNetwork en = effective_adjacency(cs.g, *cs.c);
    const double u_star = critical_attention(paper_params(), dominant_eigenpair(en.graph_prime).value).value;
    const double tol = cs.want == 0.15 ? 1e-12 : 1e-6;
    o.require(std::abs(u_star - cs.want) <= tol, cs.g.label() + " u* = " + fmt(u_star));
    auto lead = [&](double u) { return oracle::jacobi_eigen(jacobian_origin(paper_params(), en, u)).first.maxCoeff(); };
    double lo = 1e-4, hi = 1.0;
    while (hi - lo > 1e-13) {
      const double mid = 0.5 * (lo + hi);
      (lead(mid) < 0 ? lo : hi) = mid;
    }
    const double bis = 0.5 * (lo + hi);
    o.require(std::abs(bis - u_star) <= 1e-8, cs.g.label() + " bisection " + fmt(bis));
    o.detail << cs.g.label() << ": u* = " << fmt(u_star) << ", |bisection - u*| = " << fmt(std::abs(bis - u_star))
             << "  ";
  }
  return o;
}

Outcome decision_sign_flip() {
  Outcome o;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(6, 3);
  b.row(1) = vec({1, 1, -1}).transpose();
  const Graph g = graphs::complete(6);
  IntegrationOptions opts;
  opts.sample_every = 1000;
  for (const auto& [p2, sign] : {std::pair{vec({1, 1, 1}), 1.0}, std::pair{vec({1, 1, 3}), -1.0}}) {
    const ConstraintSet c = agent_two(6, p2);
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
      const Trajectory t = integrate(FullSystem(g, c, paper_params(), b), seeded_initial_state(c, seed), opts);
      const Eigen::VectorXd y = t.effective.back();
      o.require((sign * y).minCoeff() > 1e-6,
                "p2 = (1,1," + fmt(p2(2)) + ") seed " + std::to_string(seed) + " min sign*y " + fmt((sign * y).minCoeff()));
    }
    o.detail << "p2=(1,1," << fmt(p2(2)) << "): all agents " << (sign > 0 ? "positive" : "negative") << " for 5 seeds  ";
  }
  return o;
}

Outcome invariance_and_equivalence() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> uni(-1, 1);
  double worst_drift = 0, worst_equiv = 0;
  int rank_one = 0;
  for (int f = 0; f < 20; ++f) {
    const int n = 2 + static_cast<int>(rng() % 19);
    const int no = 1 + static_cast<int>(rng() % 5);
    const int max_rank = std::min(no, 1 + f % 3);
    const Graph g = graphs::custom(oracle::random_connected(n, rng, 0.25));
    std::vector<Eigen::MatrixXd> bases;
    for (int i = 0; i < n; ++i) {
      const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_rank));
      Eigen::MatrixXd bm(no, k);
      for (int e = 0; e < bm.size(); ++e) bm(e) = gauss(rng);
      bases.push_back(bm);
    }
    const ConstraintSet c(no, bases);
    Eigen::MatrixXd bias(n, no), z0(n, no);
    for (int e = 0; e < bias.size(); ++e) bias(e) = 0.5 * uni(rng);
    for (int e = 0; e < z0.size(); ++e) z0(e) = uni(rng);
    const NodParams p = paper_params(0.05 + 0.3 * (uni(rng) + 1) / 2);
    IntegrationOptions opts;
    opts.horizon = 100;
    opts.dt = 0.01;
    opts.sample_every = 10;
    const Trajectory t = integrate(FullSystem(g, c, p, bias), c.project(z0), opts);
    const double drift = constraint_drift(t, c).maxCoeff();
    worst_drift = std::max(worst_drift, drift);
    o.require(drift <= 1e-8, "fixture " + std::to_string(f) + " drift " + fmt(drift));
    if (c.is_rank_one()) {
      ++rank_one;
      Eigen::VectorXd y0(n);
      for (int i = 0; i < n; ++i) y0(i) = 0.5 * uni(rng);
      const double dev = full_reduced_equivalence(g, c, p, bias, y0, 100, 0.01);
      worst_equiv = std::max(worst_equiv, dev);
      o.require(dev <= 1e-6, "fixture " + std::to_string(f) + " equivalence " + fmt(dev));
    }
  }
  o.require(rank_one > 0, "no rank-one fixtures drawn");
  o.detail << "20 fixtures, max drift " << fmt(worst_drift) << "; " << rank_one << " rank-one, max full/reduced "
           << fmt(worst_equiv);
  return o;
}

Outcome pitchfork_structure() {
  Outcome o;
  const NodParams p = paper_params();
  // b_cubic sign over unsigned connected fixtures.
  std::vector<std::pair<Graph, ConstraintSet>> fixtures;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> pos(0.2, 1.0);
  for (int n = 3; n <= 8; ++n) {
    for (const Graph& g : {graphs::complete(n), graphs::ring(n), graphs::star(n)}) {
      fixtures.emplace_back(g, ConstraintSet::homogeneous(n, vec({1, 1, 1})));
      fixtures.emplace_back(g, agent_two(n, vec({1, 1, 3})));
      std::vector<Eigen::VectorXd> vs;
      for (int i = 0; i < n; ++i) vs.push_back(vec({pos(rng), pos(rng), pos(rng)}));
      fixtures.emplace_back(g, ConstraintSet::from_vectors(vs));
    }
  }
  for (int t = 0; t < 6; ++t) {
    const int n = 5 + t;
    std::vector<Eigen::VectorXd> vs;
    for (int i = 0; i < n; ++i) vs.push_back(vec({pos(rng), pos(rng), pos(rng)}));
    fixtures.emplace_back(graphs::custom(oracle::random_connected(n, rng, 0.3)), ConstraintSet::from_vectors(vs));
  }
  double max_b = -1e300;
  for (const auto& [g, c] : fixtures) {
    const LsReduction ls = ls_coefficients(p, g, c, Eigen::MatrixXd::Zero(g.size(), 3));
    max_b = std::max(max_b, ls.b_cubic);
    o.require(ls.b_cubic < 0, g.label() + " b_cubic " + fmt(ls.b_cubic));
  }

  // Branch count, tangency and symmetry on three sweeps.
  double worst_angle = 0;
  int transitions = 0;
  for (const auto& [g, c] : {std::pair{graphs::complete(6), ConstraintSet::homogeneous(6, vec({1, 1, 1}))},
                             std::pair{graphs::ring(5), agent_two(5, vec({1, 1, 3}))},
                             std::pair{graphs::star(6), agent_two(6, vec({1, 1, 3}))}}) {
    const int n = g.size();
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(n, 3);
    const LsReduction ls = ls_coefficients(p, g, c, zero);
    const double step = 0.01 * ls.u_star;
    const auto grid = linspace(0.5 * ls.u_star + 0.3 * step, 1.5 * ls.u_star + 0.3 * step, 101);
    const BifurcationDiagram d = equilibrium_sweep(g, c, p, zero, grid);
    int first_three = -1, last_one = -1;
    for (int s = 0; s < static_cast<int>(grid.size()); ++s) {
      const int count = d.equilibria_at(s);
      if (count == 1) last_one = s;
      if (count == 3 && first_three < 0) first_three = s;
      o.require(count == 1 || count == 3, g.label() + " " + std::to_string(count) + " equilibria at u=" + fmt(grid[s]));
    }
    const bool transition = first_three == last_one + 1 && first_three >= 0 &&
                            std::abs(grid[first_three] - ls.u_star) <= step + 1e-15 &&
                            std::abs(grid[last_one] - ls.u_star) <= step + 1e-15;
    o.require(transition, g.label() + " 1->3 transition not within one grid step of u*");
    transitions += transition;
    const ReducedSystem red(g, c, p, Eigen::VectorXd::Zero(n));
    for (const auto& pt : d.points) {
      o.require(red.with_attention(pt.u).rhs(pt.y).cwiseAbs().maxCoeff() <= 1e-10, g.label() + " residual");
      bool mirrored = false;
      for (const auto* other : d.at(pt.sample)) mirrored |= (other->y + pt.y).norm() <= 1e-8;
      o.require(mirrored, g.label() + " branch not odd-symmetric at u=" + fmt(pt.u));
      if (std::abs(pt.u - ls.u_star) <= 0.1 * ls.u_star && pt.y.norm() > 1e-9) {
        const double cosang = std::min(1.0, std::abs(pt.y.dot(ls.v)) / pt.y.norm());
        const double angle = std::acos(cosang) * 180 / std::numbers::pi;
        worst_angle = std::max(worst_angle, angle);
        o.require(angle <= 5.0, g.label() + " angle " + fmt(angle) + " deg at u=" + fmt(pt.u));
      }
    }
  }
  o.detail << fixtures.size() << " fixtures, max b_cubic " << fmt(max_b) << "; " << transitions
           << "/3 sweeps switch 1->3 at u*; max angle to v " << fmt(worst_angle) << " deg";
  return o;
}

Outcome ring_corollaries() {
  Outcome o;
  double worst = 0;
  for (double delta : {-0.05, -0.1, -0.2, 0.1}) {
    const Eigen::VectorXd r3 = ring_approx(3, 1 + delta) - (Eigen::VectorXd::Ones(3) - delta / 9 * vec({-2, 1, 1}));
    const Eigen::VectorXd r4 = ring_approx(4, 1 + delta) - (Eigen::VectorXd::Ones(4) - delta / 2 * vec({-1, 0, 1, 0}));
    worst = std::max({worst, r3.cwiseAbs().maxCoeff(), r4.cwiseAbs().maxCoeff()});
  }
  o.require(worst <= 1e-12, "n=3/4 deviation " + fmt(worst));
  for (int n : {6, 7}) {
    const Eigen::VectorXd v = ring_approx(n, 0.9);
    for (int j = 1; j < n; ++j) o.require(v(j) > v(0), "ring(" + std::to_string(n) + ") node 1 not least central");
    for (int dist = 1; dist <= n / 2; ++dist) {
      o.require(v(dist) + 1e-15 >= v(dist - 1) && std::abs(v(dist) - v((n - dist) % n)) <= 1e-12,
                "ring(" + std::to_string(n) + ") not monotone in distance");
    }
  }
  o.detail << "n=3/4 max deviation " << fmt(worst) << "; rings 6 and 7 minimal at node 1 and monotone in distance";
  return o;
}

Outcome first_order_accuracy() {
  Outcome o;
  struct Form {
    std::string name;
    std::function<Eigen::VectorXd(double)> approx;
    Eigen::MatrixXd a;
  };
  std::vector<Form> forms;
  for (int n = 3; n <= 20; ++n) {
    const Graph ring = graphs::ring(n), comp = graphs::complete(n);
    forms.push_back({"ring_approx n=" + std::to_string(n), [n](double d) { return ring_approx(n, 1 + d); }, ring.adjacency()});
    forms.push_back({"complete_approx n=" + std::to_string(n), [n](double d) { return complete_approx(n, 1 + d); },
                     comp.adjacency()});
    for (const Graph& g : {ring, comp}) {
      const Eigen::MatrixXd k = g.adjacency();
      const Eigen::MatrixXd kp = scaled_edges(k, 2.0) - k;
      const auto [lam, v] = oracle::dominant(k);
      forms.push_back({"lemma " + g.label(),
                       [k, kp, lam = lam, v = v](double d) {
                         return eigenpair_perturbation({k, kp, lam, v}, d).vector;
                       },
                       k});
    }
  }
  Eigen::MatrixXd k33 = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < 3; ++i)
    for (int j = 3; j < 6; ++j) k33(i, j) = k33(j, i) = 1;
  for (const Graph& g : {graphs::circulant(8, {1, 2}), graphs::circulant(9, {1, 3}), graphs::circulant(12, {1, 5}),
                         graphs::circulant(16, {1, 4}), graphs::circulant(20, {1, 2, 5}), Graph(k33, "K33"),
                         graphs::ring(10), graphs::complete(7)}) {
    forms.push_back({"regular_approx " + g.label(), [g](double d) { return regular_approx(g, 1 + d).vector; },
                     g.adjacency()});
  }
  int failures = 0;
  double lo = 1e300, hi = 0;
  for (const auto& f : forms) {
    double err[3];
    int i = 0;
    for (double d : {-0.2, -0.1, -0.05}) err[i++] = oracle_error(f.approx(d), scaled_edges(f.a, 1 + d));
    for (const double ratio : {err[0] / err[1], err[1] / err[2]}) {
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      if (ratio < 3.0 || ratio > 5.0) {
        if (failures < 6) o.require(false, f.name + " ratio " + fmt(ratio));
        ++failures;
        o.pass = false;
      }
    }
  }
  if (failures > 6) o.detail << "; ... " << failures - 6 << " more";
  o.detail << (o.pass ? "" : " | ") << forms.size() << " forms, ratios in [" << fmt(lo) << ", " << fmt(hi) << "], "
           << failures << " outside [3, 5]";
  return o;
}

Outcome closed_form_consistency() {
  Outcome o;
  double worst = 0, worst_mp = 0;
  for (int n = 3; n <= 12; ++n) {
    for (double a : {0.95, 0.9, 0.7}) {
      worst = std::max(worst, (regular_approx(graphs::complete(n), a).vector - complete_approx(n, a)).cwiseAbs().maxCoeff());
      worst = std::max(worst, (regular_approx(graphs::ring(n), a).vector - ring_approx(n, a)).cwiseAbs().maxCoeff());
    }
    for (const Graph& g : {graphs::complete(n), graphs::ring(n)}) {
      const Eigen::MatrixXd s = g.adjacency() - *g.regular_degree() * Eigen::MatrixXd::Identity(n, n);
      const Eigen::MatrixXd m = s * s;
      const Eigen::MatrixXd pinv = linalg::symmetric_pseudo_inverse(m);
      worst_mp = std::max({worst_mp, (m * pinv * m - m).cwiseAbs().maxCoeff(), (pinv * m * pinv - pinv).cwiseAbs().maxCoeff(),
                           ((m * pinv).transpose() - m * pinv).cwiseAbs().maxCoeff(),
                           ((pinv * m).transpose() - pinv * m).cwiseAbs().maxCoeff()});
    }
  }
  o.require(worst <= 1e-10, "closed forms disagree by " + fmt(worst));
  o.require(worst_mp <= 1e-10, "Moore-Penrose residual " + fmt(worst_mp));
  o.detail << "max closed-form gap " << fmt(worst) << ", max Moore-Penrose residual " << fmt(worst_mp);
  return o;
}

Outcome star_theorem() {
  Outcome o;
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst = 0;
  for (int draw = 0; draw < 200; ++draw) {
    const int n = 3 + draw % 8;
    std::vector<double> a(n - 1);
    for (double& x : a) x = 1.0 - uni(rng);
    // Realise the alignments through unit constraint vectors: hub e1, leaf j at angle acos(a_j).
    std::vector<Eigen::VectorXd> vs{vec({1, 0})};
    for (double x : a) vs.push_back(vec({x, std::sqrt(1 - x * x)}));
    const EffectiveNetwork en = effective_adjacency(graphs::star(n), ConstraintSet::from_vectors(vs));
    const auto [lam, exact] = oracle::dominant(en.graph_prime.adjacency());
    int argmax = 0;
    exact.maxCoeff(&argmax);
    o.require(argmax == 0, "draw " + std::to_string(draw) + " argmax " + std::to_string(argmax));
    const Eigenpair closed = star_exact(n, a);
    for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(exact(j) - closed.vector(j)) / closed.vector(j));
    worst = std::max(worst, std::abs(lam - closed.value) / closed.value);
  }
  o.require(worst <= 1e-8, "relative error " + fmt(worst));
  o.detail << "200 draws, hub always argmax, max relative error " << fmt(worst);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"effective-bias values", effective_bias_values},
      {"critical attention", critical_attention_values},
      {"decision sign flip", decision_sign_flip},
      {"invariance drift and full/reduced equivalence", invariance_and_equivalence},
      {"pitchfork structure", pitchfork_structure},
      {"ring corollary matches", ring_corollaries},
      {"first-order accuracy", first_order_accuracy},
      {"closed-form consistency", closed_form_consistency},
      {"star theorem", star_theorem},
  };
  int failed = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "threw: " << e.what();
    }
    failed += !o.pass;
    std::printf("%s  [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%zu criteria, %d failed, %.1f s\n", criteria.size(), failed, secs);
  return failed == 0 ? 0 : 1;
}
