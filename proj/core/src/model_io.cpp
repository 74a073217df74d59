#include "bopt/model_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bopt/rng.hpp"

namespace bopt {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument(where + ": " + what);
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (!j.is_object()) throw std::runtime_error(path + ": top level must be an object");
  return j;
}

void reject_unknown_keys(const json& j, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) { known = true; break; }
    if (!known) fail(where, "unknown key \"" + it.key() + "\"");
  }
}

long long get_integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<long long>();
}

double get_real(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(where, "value is not finite");
  return x;
}

bool get_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected true or false");
  return j.get<bool>();
}

std::uint64_t get_seed(const json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const long long v = get_integer(j, where);
  if (v < 0) fail(where, "seed must be non-negative");
  return static_cast<std::uint64_t>(v);
}

int get_count(const json& j, const std::string& where, long long lo,
              long long hi = 1000000000LL) {
  const long long v = get_integer(j, where);
  if (v < lo || v > hi)
    fail(where, "value " + std::to_string(v) + " outside [" +
                    std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

// Shared by the binary and Gaussian loaders; weights must be finite and
// edges unique with i < j, all indices in [0, n).
std::vector<Edge> parse_edges(const json& j, int n, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of [i, j, w] triples");
  std::vector<Edge> edges;
  std::set<std::pair<int, int>> seen;
  edges.reserve(j.size());
  for (size_t k = 0; k < j.size(); ++k) {
    const std::string at = where + "[" + std::to_string(k) + "]";
    const json& entry = j[k];
    if (!entry.is_array() || entry.size() != 3)
      fail(at, "expected [i, j, w]");
    const long long i = get_integer(entry[0], at + "[0]");
    const long long jj = get_integer(entry[1], at + "[1]");
    const double w = get_real(entry[2], at + "[2]");
    if (i < 0 || jj < 0 || i >= n || jj >= n)
      fail(at, "node index out of range for num_nodes=" + std::to_string(n));
    if (i >= jj) fail(at, "edges must satisfy i < j");
    if (!seen.insert({static_cast<int>(i), static_cast<int>(jj)}).second)
      fail(at, "duplicate edge (" + std::to_string(i) + ", " +
                   std::to_string(jj) + ")");
    edges.push_back({static_cast<int>(i), static_cast<int>(jj), w});
  }
  return edges;
}

std::vector<double> parse_real_array(const json& j, int n,
                                     const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  if (static_cast<int>(j.size()) != n)
    fail(where, "expected " + std::to_string(n) + " entries, found " +
                    std::to_string(j.size()));
  std::vector<double> out;
  out.reserve(j.size());
  for (size_t k = 0; k < j.size(); ++k)
    out.push_back(get_real(j[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

Evidence parse_evidence(const json& j, int n) {
  if (!j.is_object()) fail("evidence", "expected an object of index: value");
  Evidence ev;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string where = "evidence[\"" + it.key() + "\"]";
    size_t used = 0;
    long long node = -1;
    try {
      node = std::stoll(it.key(), &used);
    } catch (const std::exception&) {
      fail(where, "key is not a node index");
    }
    if (used != it.key().size()) fail(where, "key is not a node index");
    if (node < 0 || node >= n)
      fail(where, "node index out of range for num_nodes=" + std::to_string(n));
    const long long value = get_integer(*it, where);
    if (value != 0 && value != 1) fail(where, "evidence values must be 0 or 1");
    if (ev.contains(static_cast<int>(node)))
      fail(where, "duplicate evidence for node " + std::to_string(node));
    ev.set(static_cast<int>(node), static_cast<int>(value));
  }
  return ev;
}

SolveConfig config_from_json(const json& j, SolveConfig config,
                             const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  reject_unknown_keys(j, where,
                      {"max_iters", "tol_q", "tol_f", "tol_grad", "step0",
                       "step_up", "step_down", "damping_max",
                       "damping_ramp_iters", "init", "seed", "restarts",
                       "record_trace"});
  if (j.contains("max_iters"))
    config.max_iters = get_count(j["max_iters"], where + ".max_iters", 1);
  if (j.contains("tol_q")) {
    config.tol_q = get_real(j["tol_q"], where + ".tol_q");
    if (config.tol_q < 0) fail(where + ".tol_q", "must be >= 0");
  }
  if (j.contains("tol_f")) {
    config.tol_f = get_real(j["tol_f"], where + ".tol_f");
    if (config.tol_f < 0) fail(where + ".tol_f", "must be >= 0");
  }
  if (j.contains("tol_grad")) {
    config.tol_grad = get_real(j["tol_grad"], where + ".tol_grad");
    if (config.tol_grad < 0) fail(where + ".tol_grad", "must be >= 0");
  }
  if (j.contains("step0")) {
    config.step0 = get_real(j["step0"], where + ".step0");
    if (config.step0 <= 0) fail(where + ".step0", "must be > 0");
  }
  if (j.contains("step_up")) {
    config.step_up = get_real(j["step_up"], where + ".step_up");
    if (config.step_up < 1) fail(where + ".step_up", "must be >= 1");
  }
  if (j.contains("step_down")) {
    config.step_down = get_real(j["step_down"], where + ".step_down");
    if (config.step_down <= 0 || config.step_down >= 1)
      fail(where + ".step_down", "must be inside (0, 1)");
  }
  if (j.contains("damping_max")) {
    config.damping_max = get_real(j["damping_max"], where + ".damping_max");
    if (config.damping_max < 0 || config.damping_max >= 1)
      fail(where + ".damping_max", "must be in [0, 1)");
  }
  if (j.contains("damping_ramp_iters"))
    config.damping_ramp_iters =
        get_count(j["damping_ramp_iters"], where + ".damping_ramp_iters", 1);
  if (j.contains("init")) {
    const json& init = j["init"];
    if (!init.is_string()) fail(where + ".init", "expected a string");
    if (!parse_init_kind(init.get<std::string>(), config.init))
      fail(where + ".init",
           "unknown kind \"" + init.get<std::string>() +
               "\" (uniform-half | bias-sigmoid | seeded-noise)");
  }
  if (j.contains("seed")) config.seed = get_seed(j["seed"], where + ".seed");
  if (j.contains("restarts"))
    config.restarts = get_count(j["restarts"], where + ".restarts", 1);
  if (j.contains("record_trace"))
    config.record_trace = get_bool(j["record_trace"], where + ".record_trace");
  return config;
}

Topology topology_from_json(const json& j, std::uint64_t spec_seed) {
  if (!j.is_object()) fail("topology", "expected an object");
  if (!j.contains("kind")) fail("topology", "missing \"kind\"");
  if (!j["kind"].is_string()) fail("topology.kind", "expected a string");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "square") {
    reject_unknown_keys(j, "topology", {"kind", "rows", "cols"});
    if (!j.contains("rows") || !j.contains("cols"))
      fail("topology", "square needs \"rows\" and \"cols\"");
    return lattice_square(get_count(j["rows"], "topology.rows", 1),
                          get_count(j["cols"], "topology.cols", 1));
  }
  if (kind == "cubic-periodic") {
    reject_unknown_keys(j, "topology", {"kind", "side"});
    if (!j.contains("side")) fail("topology", "cubic-periodic needs \"side\"");
    return lattice_cubic_periodic(get_count(j["side"], "topology.side", 3));
  }
  if (kind == "tree") {
    reject_unknown_keys(j, "topology", {"kind", "n", "seed"});
    if (!j.contains("n")) fail("topology", "tree needs \"n\"");
    const std::uint64_t seed = j.contains("seed")
                                   ? get_seed(j["seed"], "topology.seed")
                                   : derive_seed(spec_seed, 0x746f706fULL);
    return random_tree(get_count(j["n"], "topology.n", 1), seed);
  }
  if (kind == "edges") {
    reject_unknown_keys(j, "topology", {"kind", "num_nodes", "edges"});
    if (!j.contains("num_nodes") || !j.contains("edges"))
      fail("topology", "edges kind needs \"num_nodes\" and \"edges\"");
    Topology topo;
    topo.n = get_count(j["num_nodes"], "topology.num_nodes", 0);
    topo.kind = TopologyKind::arbitrary;
    const json& edges = j["edges"];
    if (!edges.is_array()) fail("topology.edges", "expected an array of [i, j]");
    std::set<std::pair<int, int>> seen;
    for (size_t k = 0; k < edges.size(); ++k) {
      const std::string at = "topology.edges[" + std::to_string(k) + "]";
      const json& entry = edges[k];
      if (!entry.is_array() || entry.size() != 2) fail(at, "expected [i, j]");
      const long long i = get_integer(entry[0], at + "[0]");
      const long long jj = get_integer(entry[1], at + "[1]");
      if (i < 0 || jj < 0 || i >= topo.n || jj >= topo.n)
        fail(at, "node index out of range");
      if (i >= jj) fail(at, "edges must satisfy i < j");
      if (!seen.insert({static_cast<int>(i), static_cast<int>(jj)}).second)
        fail(at, "duplicate edge");
      topo.edges.push_back({static_cast<int>(i), static_cast<int>(jj)});
    }
    return topo;
  }
  fail("topology.kind", "unknown kind \"" + kind +
                            "\" (square | cubic-periodic | tree | edges)");
}

}  // namespace

LoadedModel load_model(const std::string& path) {
  const json j = parse_file(path);
  reject_unknown_keys(j, path, {"num_nodes", "biases", "edges", "evidence"});
  if (!j.contains("num_nodes")) fail(path, "missing \"num_nodes\"");
  const int n = get_count(j["num_nodes"], "num_nodes", 0);
  std::vector<double> biases(static_cast<size_t>(n), 0.0);
  if (j.contains("biases")) biases = parse_real_array(j["biases"], n, "biases");
  std::vector<Edge> edges;
  if (j.contains("edges")) edges = parse_edges(j["edges"], n, "edges");

  LoadedModel out;
  out.model = Model(n, std::move(edges), std::move(biases));
  if (j.contains("evidence")) out.evidence = parse_evidence(j["evidence"], n);
  return out;
}

void save_model(const LoadedModel& loaded, const std::string& path) {
  const Model& m = loaded.model;
  json j;
  j["num_nodes"] = m.num_nodes();
  j["biases"] = m.biases();
  json edges = json::array();
  for (const Edge& e : m.edges()) edges.push_back({e.i, e.j, e.w});
  j["edges"] = std::move(edges);
  if (!loaded.evidence.empty()) {
    json ev = json::object();
    for (const auto& [node, value] : loaded.evidence.assignments())
      ev[std::to_string(node)] = value;
    j["evidence"] = std::move(ev);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << '\n';
}

GaussianModel load_gaussian_model(const std::string& path) {
  const json j = parse_file(path);
  reject_unknown_keys(j, path, {"num_nodes", "diag", "biases", "edges"});
  if (!j.contains("num_nodes")) fail(path, "missing \"num_nodes\"");
  if (!j.contains("diag")) fail(path, "missing \"diag\"");
  const int n = get_count(j["num_nodes"], "num_nodes", 0);
  std::vector<double> diag = parse_real_array(j["diag"], n, "diag");
  std::vector<double> biases(static_cast<size_t>(n), 0.0);
  if (j.contains("biases")) biases = parse_real_array(j["biases"], n, "biases");
  std::vector<Edge> edges;
  if (j.contains("edges")) edges = parse_edges(j["edges"], n, "edges");
  return GaussianModel(std::move(diag), std::move(edges), std::move(biases));
}

SolveConfig load_solve_config(const std::string& path,
                              const SolveConfig& defaults) {
  return config_from_json(parse_file(path), defaults, "config");
}

SweepSpec load_sweep_spec(const std::string& path) {
  const json j = parse_file(path);
  reject_unknown_keys(j, path,
                      {"preset", "topology", "w_scales", "b_scales",
                       "instances_per_cell", "methods", "oracle", "seed",
                       "sample_exponent", "config", "gibbs"});

  SweepSpec spec;
  bool have_topology = false;
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) fail("preset", "expected a string");
    spec = sweep_preset(j["preset"].get<std::string>());
    have_topology = true;
  }
  if (j.contains("seed")) spec.seed = get_seed(j["seed"], "seed");
  if (j.contains("topology")) {
    spec.topology = topology_from_json(j["topology"], spec.seed);
    have_topology = true;
  }
  if (!have_topology) fail(path, "needs \"topology\" or \"preset\"");

  const auto scales = [&](const char* key) {
    const json& arr = j[key];
    if (!arr.is_array() || arr.empty())
      fail(key, "expected a non-empty array of scales");
    std::vector<double> out;
    for (size_t k = 0; k < arr.size(); ++k) {
      const std::string at = std::string(key) + "[" + std::to_string(k) + "]";
      const double s = get_real(arr[k], at);
      if (s < 0) fail(at, "scales must be >= 0");
      out.push_back(s);
    }
    return out;
  };
  if (j.contains("w_scales")) spec.w_scales = scales("w_scales");
  if (j.contains("b_scales")) spec.b_scales = scales("b_scales");
  if (spec.w_scales.empty() || spec.b_scales.empty())
    fail(path, "needs non-empty \"w_scales\" and \"b_scales\"");

  if (j.contains("instances_per_cell"))
    spec.instances_per_cell =
        get_count(j["instances_per_cell"], "instances_per_cell", 1);
  if (j.contains("methods")) {
    const json& arr = j["methods"];
    if (!arr.is_array() || arr.empty())
      fail("methods", "expected a non-empty array of method names");
    spec.methods.clear();
    for (size_t k = 0; k < arr.size(); ++k) {
      const std::string at = "methods[" + std::to_string(k) + "]";
      if (!arr[k].is_string()) fail(at, "expected a string");
      Method m;
      if (!parse_method(arr[k].get<std::string>(), m))
        fail(at, "unknown method \"" + arr[k].get<std::string>() +
                     "\" (mf | tap | bp | bo-grad | bo-fp)");
      for (Method prev : spec.methods)
        if (prev == m) fail(at, "duplicate method");
      spec.methods.push_back(m);
    }
  }
  if (spec.methods.empty()) fail(path, "needs a non-empty \"methods\" list");

  if (j.contains("oracle")) {
    if (!j["oracle"].is_string()) fail("oracle", "expected a string");
    if (!parse_oracle(j["oracle"].get<std::string>(), spec.oracle))
      fail("oracle", "unknown oracle \"" + j["oracle"].get<std::string>() +
                         "\" (elimination | brute | gibbs)");
  }
  if (j.contains("sample_exponent")) {
    spec.sample_exponent = get_real(j["sample_exponent"], "sample_exponent");
    if (spec.sample_exponent <= 0) fail("sample_exponent", "must be > 0");
  }
  if (j.contains("config"))
    spec.config = config_from_json(j["config"], spec.config, "config");
  if (j.contains("gibbs")) {
    const json& g = j["gibbs"];
    if (!g.is_object()) fail("gibbs", "expected an object");
    reject_unknown_keys(g, "gibbs",
                        {"n_samples", "burn_in", "anneal_from", "anneal_steps"});
    if (g.contains("n_samples"))
      spec.gibbs.n_samples = get_count(g["n_samples"], "gibbs.n_samples", 1);
    if (g.contains("burn_in"))
      spec.gibbs.burn_in = get_count(g["burn_in"], "gibbs.burn_in", 0);
    if (g.contains("anneal_from")) {
      spec.gibbs.anneal_from = get_real(g["anneal_from"], "gibbs.anneal_from");
      if (spec.gibbs.anneal_from < 1)
        fail("gibbs.anneal_from", "must be >= 1");
    }
    if (g.contains("anneal_steps"))
      spec.gibbs.anneal_steps =
          get_count(g["anneal_steps"], "gibbs.anneal_steps", 1);
  }
  return spec;
}

}  // namespace bopt
