#include "projnod_cli/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "projnod/errors.hpp"
#include "projnod/sigmoid.hpp"

namespace projnod::cli {

using nlohmann::json;

namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char ch : key) {
    if (ch == '~') {
      out += "~0";
    } else if (ch == '/') {
      out += "~1";
    } else {
      out += ch;
    }
  }
  return out;
}

struct Frame {
  bool object = false;
  bool want_key = false;
  std::string key;
  int index = 0;
};

std::string pointer_of(const std::vector<Frame>& stack) {
  std::string p;
  for (const auto& f : stack) p += "/" + (f.object ? escape_token(f.key) : std::to_string(f.index));
  return p;
}

}  // namespace

std::optional<int> locate_line(const std::string& text, const std::string& pointer) {
  std::vector<Frame> stack;
  int line = 1;
  std::size_t i = 0;
  auto value_starts = [&]() { return pointer_of(stack) == pointer; };
  while (i < text.size()) {
    const char ch = text[i];
    if (ch == '\n') {
      ++line;
      ++i;
    } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == ':') {
      ++i;
    } else if (ch == '{' || ch == '[') {
      if (value_starts()) return line;
      stack.push_back({ch == '{', ch == '{', "", 0});
      ++i;
    } else if (ch == '}' || ch == ']') {
      if (stack.empty()) return std::nullopt;
      stack.pop_back();
      ++i;
    } else if (ch == ',') {
      if (stack.empty()) return std::nullopt;
      if (stack.back().object) {
        stack.back().want_key = true;
      } else {
        ++stack.back().index;
      }
      ++i;
    } else if (ch == '"') {
      std::string s;
      ++i;
      while (i < text.size() && text[i] != '"') {
        if (text[i] == '\\' && i + 1 < text.size()) ++i;
        s += text[i++];
      }
      ++i;
      if (!stack.empty() && stack.back().object && stack.back().want_key) {
        stack.back().key = s;
        stack.back().want_key = false;
      } else if (value_starts()) {
        return line;
      }
    } else {
      if (value_starts()) return line;
      while (i < text.size() && std::string_view(",]}\n \t\r").find(text[i]) == std::string_view::npos) ++i;
    }
  }
  return std::nullopt;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& message,
                         const std::string& invariant = "config") const {
    const auto line = locate_line(text_, pointer);
    std::string where = line ? "line " + std::to_string(*line) + ": " : std::string();
    if (!pointer.empty()) where += pointer + ": ";
    throw ConfigError(pointer, invariant, where + message);
  }

  const json& at(const json& obj, const std::string& key) const { return obj.at(key); }

  double number(const json& obj, const std::string& key, const std::string& base, double fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(base + "/" + key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(base + "/" + key, "must be finite");
    return x;
  }

  double positive(const json& obj, const std::string& key, const std::string& base, double fallback) const {
    const double x = number(obj, key, base, fallback);
    if (!(x > 0.0)) fail(base + "/" + key, "must be positive, got " + std::to_string(x));
    return x;
  }

  int integer(const json& obj, const std::string& key, const std::string& base, int fallback, int min) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(base + "/" + key, "expected an integer");
    const auto x = v.get<long long>();
    if (x < min || x > 1'000'000'000) fail(base + "/" + key, "must be an integer >= " + std::to_string(min));
    return static_cast<int>(x);
  }

  bool boolean(const json& obj, const std::string& key, const std::string& base, bool fallback) const {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean()) fail(base + "/" + key, "expected true or false");
    return obj.at(key).get<bool>();
  }

  std::string string(const json& obj, const std::string& key, const std::string& base,
                     const std::string& fallback) const {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string()) fail(base + "/" + key, "expected a string");
    return obj.at(key).get<std::string>();
  }

  const json& object(const json& root, const std::string& key) const {
    static const json empty = json::object();
    if (!root.contains(key)) return empty;
    if (!root.at(key).is_object()) fail("/" + key, "expected an object");
    return root.at(key);
  }

  Eigen::VectorXd vector(const json& v, const std::string& pointer, int expected) const {
    if (!v.is_array()) fail(pointer, "expected an array of numbers");
    if (expected >= 0 && static_cast<int>(v.size()) != expected) {
      fail(pointer, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) fail(pointer + "/" + std::to_string(k), "expected a number");
      out(static_cast<Eigen::Index>(k)) = v[k].get<double>();
      if (!std::isfinite(out(static_cast<Eigen::Index>(k)))) fail(pointer + "/" + std::to_string(k), "must be finite");
    }
    return out;
  }

  Eigen::MatrixXd matrix(const json& v, const std::string& pointer, int rows, int cols) const {
    if (!v.is_array()) fail(pointer, "expected an array of rows");
    if (rows >= 0 && static_cast<int>(v.size()) != rows) {
      fail(pointer, "expected " + std::to_string(rows) + " rows, got " + std::to_string(v.size()));
    }
    if (v.empty()) fail(pointer, "matrix has no rows");
    const int c = cols >= 0 ? cols : static_cast<int>(v[0].is_array() ? v[0].size() : 0);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(v.size()), c);
    for (std::size_t r = 0; r < v.size(); ++r) {
      out.row(static_cast<Eigen::Index>(r)) = vector(v[r], pointer + "/" + std::to_string(r), c).transpose();
    }
    return out;
  }

  // Agent-keyed rows ("1".."n") or a full n x cols matrix.
  Eigen::MatrixXd rows(const json& v, const std::string& pointer, int n, int cols) const {
    if (v.is_array()) return matrix(v, pointer, n, cols);
    if (!v.is_object()) fail(pointer, "expected a matrix or an object of agent rows");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, cols);
    for (const auto& [key, row] : v.items()) {
      int agent = 0;
      try {
        std::size_t used = 0;
        agent = std::stoi(key, &used);
        if (used != key.size()) agent = 0;
      } catch (const std::exception&) {
        agent = 0;
      }
      if (agent < 1 || agent > n) fail(pointer + "/" + key, "agent key must be 1.." + std::to_string(n));
      out.row(agent - 1) = vector(row, pointer + "/" + key, cols).transpose();
    }
    return out;
  }

 private:
  const std::string& text_;
};

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
  return a;
}

std::string graph_invariant(const std::string& message) {
  if (message.find("symmetric") != std::string::npos) return "adjacency-symmetric";
  if (message.find("self-loop") != std::string::npos) return "adjacency-zero-diagonal";
  if (message.find("finite") != std::string::npos) return "adjacency-finite";
  if (message.find("square") != std::string::npos) return "adjacency-square";
  return "graph";
}

Graph build_graph(const Reader& rd, const json& spec, json& resolved) {
  if (spec.empty()) rd.fail("/graph", "missing graph section");
  const std::string type = rd.string(spec, "type", "/graph", "");
  resolved["type"] = type;
  try {
    if (type == "ring" || type == "star" || type == "complete" || type == "circulant") {
      if (!spec.contains("n")) rd.fail("/graph", "missing \"n\"");
      const int n = rd.integer(spec, "n", "/graph", 0, 2);
      resolved["n"] = n;
      if (type == "ring") return graphs::ring(n);
      if (type == "star") return graphs::star(n);
      if (type == "complete") return graphs::complete(n);
      if (!spec.contains("offsets") || !spec.at("offsets").is_array()) rd.fail("/graph", "circulant needs \"offsets\"");
      std::vector<int> offsets;
      for (const auto& o : spec.at("offsets")) {
        if (!o.is_number_integer()) rd.fail("/graph/offsets", "offsets must be integers");
        offsets.push_back(o.get<int>());
      }
      resolved["offsets"] = offsets;
      return graphs::circulant(n, offsets);
    }
    if (type == "edges") {
      json g = {{"n", spec.value("n", json())}, {"edges", spec.value("edges", json())}};
      resolved["n"] = g["n"];
      resolved["edges"] = g["edges"];
      return graphs::from_json(g.dump());
    }
    if (type == "matrix") {
      if (!spec.contains("adjacency")) rd.fail("/graph", "matrix graph needs \"adjacency\"");
      const Eigen::MatrixXd a = rd.matrix(spec.at("adjacency"), "/graph/adjacency", -1, -1);
      resolved["adjacency"] = to_json(a);
      return Graph(a, "custom");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    const std::string inv = graph_invariant(e.what());
    rd.fail(type == "matrix" ? "/graph/adjacency" : "/graph", e.what(), inv);
  }
  rd.fail("/graph/type", "unknown graph type \"" + type + "\" (ring, star, complete, circulant, edges, matrix)");
}

ConstraintSet build_constraints(const Reader& rd, const json& spec, int n, json& resolved) {
  if (spec.empty()) rd.fail("/constraints", "missing constraints section");
  try {
    if (spec.contains("heterogeneous_alignment")) {
      const json& h = spec.at("heterogeneous_alignment");
      if (!h.is_object()) rd.fail("/constraints/heterogeneous_alignment", "expected {\"agent\", \"alignment\"}");
      const std::string base = "/constraints/heterogeneous_alignment";
      const int agent = rd.integer(h, "agent", base, 1, 1);
      if (agent > n) rd.fail(base + "/agent", "agent must be 1.." + std::to_string(n));
      const double a = rd.number(h, "alignment", base, 1.0);
      if (a < -1.0 || a > 1.0) rd.fail(base + "/alignment", "alignment must lie in [-1, 1]");
      resolved = {{"heterogeneous_alignment", {{"agent", agent}, {"alignment", a}}}};
      Eigen::VectorXd same(2), odd(2);
      same << 1.0, 0.0;
      odd << a, std::sqrt(std::max(0.0, 1.0 - a * a));
      std::vector<Eigen::VectorXd> vs(n, same);
      vs[agent - 1] = odd;
      return ConstraintSet::from_vectors(vs, "heterogeneous");
    }
    resolved = spec;
    return ConstraintSet::from_json(spec.dump(), n);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    rd.fail("/constraints", e.what(), "constraints");
  }
}

}  // namespace

Eigen::MatrixXd Scenario::initial_state() const {
  switch (initial.kind) {
    case InitialSpec::Kind::Seeded:
      return seeded_initial_state(constraints, seed, initial.epsilon);
    case InitialSpec::Kind::Explicit:
      return initial.z;
    case InitialSpec::Kind::Effective:
      return constraints.unit_vectors().array().colwise() * initial.y.array();
  }
  return {};
}

Scenario parse_scenario(const std::string& text, const Overrides& ov) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "json", std::string("malformed JSON: ") + e.what());
  }
  const Reader rd(text);
  if (!root.is_object()) rd.fail("", "scenario must be a JSON object");
  static const std::vector<std::string> known{"name",  "graph",      "constraints", "params", "bias", "initial",
                                              "integrator", "sweep", "seed",        "output"};
  for (const auto& [key, _] : root.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) rd.fail("/" + key, "unknown section");
  }

  json res;
  res["name"] = rd.string(root, "name", "", "scenario");

  json rg;
  Graph graph = build_graph(rd, rd.object(root, "graph"), rg);
  res["graph"] = rg;
  const int n = graph.size();

  json rc;
  ConstraintSet constraints = build_constraints(rd, rd.object(root, "constraints"), n, rc);
  res["constraints"] = rc;
  const int no = constraints.options();

  const json& pj = rd.object(root, "params");
  NodParams params;
  params.d = rd.positive(pj, "d", "/params", params.d);
  params.u = rd.positive(pj, "u", "/params", params.u);
  params.alpha = rd.positive(pj, "alpha", "/params", params.alpha);
  params.gamma = rd.positive(pj, "gamma", "/params", params.gamma);
  const std::string sig = rd.string(pj, "sigmoid", "/params", "tanh");
  try {
    params.sigmoid = SigmoidRegistry::instance().get(sig);
  } catch (const Error& e) {
    rd.fail("/params/sigmoid", e.what());
  }
  res["params"] = {{"d", params.d}, {"u", params.u}, {"alpha", params.alpha}, {"gamma", params.gamma}, {"sigmoid", sig}};

  Eigen::MatrixXd bias = Eigen::MatrixXd::Zero(n, no);
  if (root.contains("bias")) bias = rd.rows(root.at("bias"), "/bias", n, no);
  res["bias"] = to_json(bias);

  const std::uint64_t seed = ov.seed ? *ov.seed : [&]() -> std::uint64_t {
    if (!root.contains("seed")) return 1;
    if (!root.at("seed").is_number_unsigned()) rd.fail("/seed", "seed must be a non-negative integer");
    return root.at("seed").get<std::uint64_t>();
  }();
  res["seed"] = seed;

  const json& ij = rd.object(root, "initial");
  InitialSpec init;
  const std::string kind = rd.string(ij, "type", "/initial", "seeded");
  if (kind == "seeded") {
    init.epsilon = rd.positive(ij, "epsilon", "/initial", init.epsilon);
    res["initial"] = {{"type", kind}, {"epsilon", init.epsilon}};
  } else if (kind == "explicit") {
    init.kind = InitialSpec::Kind::Explicit;
    if (!ij.contains("z")) rd.fail("/initial", "explicit initial state needs \"z\"");
    init.z = rd.matrix(ij.at("z"), "/initial/z", n, no);
    res["initial"] = {{"type", kind}, {"z", to_json(init.z)}};
  } else if (kind == "effective") {
    init.kind = InitialSpec::Kind::Effective;
    if (!constraints.is_rank_one()) rd.fail("/initial/type", "effective initial state needs rank-one constraints");
    if (!ij.contains("y")) rd.fail("/initial", "effective initial state needs \"y\"");
    init.y = rd.vector(ij.at("y"), "/initial/y", n);
    res["initial"] = {{"type", kind}, {"y", to_json(init.y)}};
  } else {
    rd.fail("/initial/type", "unknown initial type \"" + kind + "\" (seeded, explicit, effective)");
  }

  const json& tj = rd.object(root, "integrator");
  IntegrationOptions integ;
  integ.dt = ov.dt ? *ov.dt : rd.positive(tj, "dt", "/integrator", integ.dt);
  integ.horizon = ov.horizon ? *ov.horizon : rd.positive(tj, "horizon", "/integrator", integ.horizon);
  integ.sample_every = rd.integer(tj, "sample_every", "/integrator", integ.sample_every, 1);
  integ.strict = rd.boolean(tj, "strict", "/integrator", integ.strict);
  integ.project_initial = rd.boolean(tj, "project_initial", "/integrator", integ.project_initial);
  integ.violation_tol = rd.positive(tj, "violation_tol", "/integrator", integ.violation_tol);
  try {
    integ.validate();
  } catch (const Error& e) {
    rd.fail("/integrator", e.what());
  }
  const std::string model = rd.string(tj, "model", "/integrator", "full");
  if (model != "full" && model != "reduced") rd.fail("/integrator/model", "model must be \"full\" or \"reduced\"");
  if (model == "reduced" && !constraints.is_rank_one()) {
    rd.fail("/integrator/model", "the reduced model needs rank-one constraints");
  }
  res["integrator"] = {{"dt", integ.dt},         {"horizon", integ.horizon},
                       {"sample_every", integ.sample_every}, {"strict", integ.strict},
                       {"project_initial", integ.project_initial}, {"violation_tol", integ.violation_tol},
                       {"model", model}};

  // The default u window brackets the threshold of the dominant effective mode.
  const json& sj = rd.object(root, "sweep");
  double centre = params.u;
  if (constraints.is_rank_one()) {
    const double lambda = dominant_eigenpair(effective_adjacency(graph, constraints).graph_prime).value;
    const double denom = params.alpha + lambda * params.gamma;
    if (denom > 1e-12) centre = params.d / denom;
  }
  SweepSpec sweep;
  sweep.u_min = ov.u_min ? *ov.u_min : rd.positive(sj, "u_min", "/sweep", 0.5 * centre);
  sweep.u_max = ov.u_max ? *ov.u_max : rd.positive(sj, "u_max", "/sweep", 1.5 * centre);
  sweep.u_steps = ov.u_steps ? *ov.u_steps : rd.integer(sj, "u_steps", "/sweep", sweep.u_steps, 1);
  if (sweep.u_steps < 1) rd.fail("/sweep/u_steps", "need at least one grid point");
  if (sweep.u_max < sweep.u_min) rd.fail("/sweep", "u_max must not be below u_min");
  sweep.mode = rd.integer(sj, "mode", "/sweep", 0, 0);
  if (sweep.mode >= n) rd.fail("/sweep/mode", "mode index must be below the number of agents");
  json seeds = json::array();
  if (sj.contains("seeds")) {
    const json& s = sj.at("seeds");
    if (!s.is_array()) rd.fail("/sweep/seeds", "expected an array of effective states");
    for (std::size_t k = 0; k < s.size(); ++k) {
      sweep.seeds.push_back(rd.vector(s[k], "/sweep/seeds/" + std::to_string(k), n));
      seeds.push_back(to_json(sweep.seeds.back()));
    }
  }
  res["sweep"] = {{"u_min", sweep.u_min}, {"u_max", sweep.u_max}, {"u_steps", sweep.u_steps},
                  {"mode", sweep.mode},   {"seeds", seeds}};

  const json& oj = rd.object(root, "output");
  const std::string out_dir = ov.out_dir ? *ov.out_dir : rd.string(oj, "dir", "/output", ".");

  try {
    (void)FullSystem(graph, constraints, params, bias);
  } catch (const Error& e) {
    rd.fail("", e.what());
  }

  Scenario sc{.name = res["name"].get<std::string>(),
              .graph = std::move(graph),
              .constraints = std::move(constraints),
              .params = params,
              .bias = bias,
              .initial = init,
              .integrator = integ,
              .model = model,
              .sweep = sweep,
              .seed = seed,
              .out_dir = out_dir,
              .resolved = res,
              .hash = fnv1a_hex(res.dump())};
  // Output location is not part of the run's identity, so it is kept out of the hash.
  sc.resolved["output"] = {{"dir", out_dir}};
  return sc;
}

Scenario load_scenario(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "io", "cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str(), overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(e.pointer(), e.invariant(), path + ": " + e.what());
  }
}

}  // namespace projnod::cli
