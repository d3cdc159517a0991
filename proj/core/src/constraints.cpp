#include "projnod/constraints.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "projnod/errors.hpp"

namespace projnod {

Eigen::MatrixXd projection_matrix(const Eigen::MatrixXd& basis) {
  if (basis.cols() == 0 || basis.rows() == 0) throw DomainError("empty constraint basis");
  if (basis.cols() > basis.rows()) {
    throw DomainError("constraint basis has more columns (" + std::to_string(basis.cols()) + ") than options (" +
                      std::to_string(basis.rows()) + ")");
  }
  if (!basis.allFinite()) throw DomainError("constraint basis has non-finite entries");
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    if (basis.col(j).norm() == 0.0) throw DomainError("constraint basis column " + std::to_string(j + 1) + " is zero");
  }
  const Eigen::MatrixXd gram = basis.transpose() * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kGramConditionLimit) {
    throw DomainError("constraint basis is rank deficient (Gram condition number " +
                      (lo > 0.0 ? std::to_string(hi / lo) : std::string("inf")) + ")");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw DomainError("constraint basis Gram matrix is not positive definite");
  // Same projector as B (B^T B)^{-1} B^T, formed from an orthonormal basis of
  // range(B) so that idempotence holds to rounding for any accepted basis.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(basis.rows(), basis.cols());
  Eigen::MatrixXd p = q * q.transpose();
  return 0.5 * (p + p.transpose());
}

Eigen::MatrixXd projection_matrix(const Eigen::VectorXd& vector) {
  const double n2 = vector.squaredNorm();
  if (!(n2 > 0.0)) throw DomainError("constraint vector is zero");
  if (!vector.allFinite()) throw DomainError("constraint vector has non-finite entries");
  const Eigen::VectorXd unit = vector / std::sqrt(n2);
  return unit * unit.transpose();
}

ConstraintSet::ConstraintSet(int n_options, std::vector<Eigen::MatrixXd> bases, std::string label)
    : n_options_(n_options), bases_(std::move(bases)), label_(std::move(label)) {
  if (n_options_ < 1) throw ValidationError("constraint set needs at least one option");
  projectors_.reserve(bases_.size());
  for (std::size_t i = 0; i < bases_.size(); ++i) {
    if (bases_[i].rows() != n_options_) {
      throw ValidationError("agent " + std::to_string(i + 1) + " constraint has " + std::to_string(bases_[i].rows()) +
                            " rows, expected " + std::to_string(n_options_));
    }
    try {
      projectors_.push_back(bases_[i].cols() == 1 ? projection_matrix(Eigen::VectorXd(bases_[i].col(0)))
                                                  : projection_matrix(bases_[i]));
    } catch (const DomainError& e) {
      throw DomainError("agent " + std::to_string(i + 1) + ": " + e.what());
    }
  }
}

ConstraintSet ConstraintSet::homogeneous(int n_agents, const Eigen::VectorXd& p) {
  std::vector<Eigen::MatrixXd> bases(n_agents, Eigen::MatrixXd(p));
  return ConstraintSet(static_cast<int>(p.size()), std::move(bases), "homogeneous");
}

ConstraintSet ConstraintSet::from_vectors(const std::vector<Eigen::VectorXd>& vectors, std::string label) {
  if (vectors.empty()) throw ValidationError("constraint set needs at least one agent");
  std::vector<Eigen::MatrixXd> bases;
  bases.reserve(vectors.size());
  for (const auto& v : vectors) bases.emplace_back(v);
  return ConstraintSet(static_cast<int>(vectors.front().size()), std::move(bases), std::move(label));
}

namespace {

Eigen::VectorXd json_vector(const nlohmann::json& j, int n_options, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + " must be an array");
  if (static_cast<int>(j.size()) != n_options) {
    throw ValidationError(where + " has " + std::to_string(j.size()) + " entries, expected " + std::to_string(n_options));
  }
  Eigen::VectorXd v(n_options);
  for (int k = 0; k < n_options; ++k) {
    if (!j[k].is_number()) throw ValidationError(where + " entry " + std::to_string(k + 1) + " is not a number");
    v(k) = j[k].get<double>();
  }
  return v;
}

int agent_key(const std::string& key, int n_agents, const std::string& where) {
  int id = 0;
  try {
    std::size_t used = 0;
    id = std::stoi(key, &used);
    if (used != key.size()) throw std::invalid_argument(key);
  } catch (const std::exception&) {
    throw ValidationError(where + ": agent key \"" + key + "\" is not an integer");
  }
  if (id < 1 || id > n_agents) {
    throw ValidationError(where + ": agent " + key + " out of range 1.." + std::to_string(n_agents));
  }
  return id - 1;
}

}  // namespace

ConstraintSet ConstraintSet::from_json(const std::string& text, int n_agents) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("constraints JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("options") || !doc["options"].is_number_integer()) {
    throw ValidationError("constraints JSON: expected integer field \"options\"");
  }
  const int n_options = doc["options"].get<int>();
  if (n_options < 1) throw ValidationError("constraints JSON: \"options\" must be >= 1");
  std::vector<std::optional<Eigen::MatrixXd>> bases(n_agents);
  if (doc.contains("vectors")) {
    for (const auto& [key, value] : doc["vectors"].items()) {
      const int i = agent_key(key, n_agents, "constraints JSON vectors");
      bases[i] = Eigen::MatrixXd(json_vector(value, n_options, "constraints JSON vectors[\"" + key + "\"]"));
    }
  }
  if (doc.contains("bases")) {
    for (const auto& [key, value] : doc["bases"].items()) {
      const int i = agent_key(key, n_agents, "constraints JSON bases");
      if (!value.is_array() || value.empty()) {
        throw ValidationError("constraints JSON bases[\"" + key + "\"] must be a non-empty array of columns");
      }
      Eigen::MatrixXd b(n_options, static_cast<Eigen::Index>(value.size()));
      for (std::size_t c = 0; c < value.size(); ++c) {
        b.col(static_cast<Eigen::Index>(c)) =
            json_vector(value[c], n_options, "constraints JSON bases[\"" + key + "\"][" + std::to_string(c) + "]");
      }
      bases[i] = std::move(b);
    }
  }
  std::optional<Eigen::VectorXd> fallback;
  if (doc.contains("default")) fallback = json_vector(doc["default"], n_options, "constraints JSON default");
  std::vector<Eigen::MatrixXd> out;
  out.reserve(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    if (bases[i]) {
      out.push_back(*bases[i]);
    } else if (fallback) {
      out.emplace_back(*fallback);
    } else {
      throw ValidationError("constraints JSON: agent " + std::to_string(i + 1) + " has no vector and no \"default\"");
    }
  }
  return ConstraintSet(n_options, std::move(out), doc.value("label", std::string("custom")));
}

ConstraintSet ConstraintSet::load_json(const std::string& path, int n_agents) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open constraints file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str(), n_agents);
}

bool ConstraintSet::is_rank_one() const {
  for (const auto& b : bases_) {
    if (b.cols() != 1) return false;
  }
  return true;
}

Eigen::MatrixXd ConstraintSet::complement(int agent) const {
  return Eigen::MatrixXd::Identity(n_options_, n_options_) - projectors_[agent];
}

Eigen::VectorXd ConstraintSet::unit_vector(int agent) const {
  if (rank(agent) != 1) {
    throw UnsupportedRankError("agent " + std::to_string(agent + 1) + " has rank-" + std::to_string(rank(agent)) +
                               " constraints; only rank-one constraints have an effective opinion");
  }
  return bases_[agent].col(0).normalized();
}

Eigen::MatrixXd ConstraintSet::unit_vectors() const {
  Eigen::MatrixXd out(agents(), n_options_);
  for (int i = 0; i < agents(); ++i) out.row(i) = unit_vector(i).transpose();
  return out;
}

Eigen::MatrixXd ConstraintSet::project(const Eigen::MatrixXd& state) const {
  Eigen::MatrixXd out(state.rows(), state.cols());
  for (int i = 0; i < agents(); ++i) out.row(i) = (projectors_[i] * state.row(i).transpose()).transpose();
  return out;
}

Eigen::VectorXd ConstraintSet::violation(const Eigen::MatrixXd& state) const {
  Eigen::VectorXd out(agents());
  for (int i = 0; i < agents(); ++i) {
    const Eigen::VectorXd zi = state.row(i).transpose();
    out(i) = (zi - projectors_[i] * zi).norm();
  }
  return out;
}

EffectiveNetwork effective_adjacency(const Graph& g, const ConstraintSet& c) {
  if (c.agents() != g.size()) {
    throw ValidationError("constraint set has " + std::to_string(c.agents()) + " agents but graph has " +
                          std::to_string(g.size()) + " nodes");
  }
  const Eigen::MatrixXd units = c.unit_vectors();
  const int n = g.size();
  Eigen::MatrixXd align = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      // Identical directions align exactly, so homogeneous sets give A' == A bitwise.
      const double dot = units.row(i) == units.row(k) ? 1.0 : units.row(i).dot(units.row(k));
      align(i, k) = align(k, i) = dot;
      a(i, k) = a(k, i) = dot * g.weight(i, k);
    }
  }
  return {Graph(std::move(a), g.label() + "'"), std::move(align)};
}

BiasField effective_bias(const ConstraintSet& c, const Eigen::MatrixXd& bias) {
  if (bias.rows() != c.agents() || bias.cols() != c.options()) {
    throw ValidationError("bias matrix is " + std::to_string(bias.rows()) + "x" + std::to_string(bias.cols()) +
                          ", expected " + std::to_string(c.agents()) + "x" + std::to_string(c.options()));
  }
  const Eigen::MatrixXd units = c.unit_vectors();
  return {bias, units.cwiseProduct(bias).rowwise().sum()};
}

}  // namespace projnod
