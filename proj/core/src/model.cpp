#include "bopt/model.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "bopt/rng.hpp"

namespace bopt {

Model::Model(int n, std::vector<Edge> edges, std::vector<double> biases)
    : n_(n), edges_(std::move(edges)), biases_(std::move(biases)) {
  if (n_ < 0) throw std::invalid_argument("Model: negative node count");
  if (static_cast<int>(biases_.size()) != n_)
    throw std::invalid_argument("Model: biases length does not match node count");
  for (double b : biases_)
    if (!std::isfinite(b)) throw std::invalid_argument("Model: non-finite bias");

  adjacency_.assign(static_cast<size_t>(n_), {});
  std::set<std::pair<int, int>> seen;
  for (size_t e = 0; e < edges_.size(); ++e) {
    const Edge& ed = edges_[e];
    if (ed.i < 0 || ed.j < 0 || ed.i >= n_ || ed.j >= n_)
      throw std::invalid_argument("Model: edge references out-of-range node");
    if (ed.i >= ed.j)
      throw std::invalid_argument("Model: edges must satisfy i < j");
    if (!std::isfinite(ed.w))
      throw std::invalid_argument("Model: non-finite edge weight");
    if (!seen.insert({ed.i, ed.j}).second)
      throw std::invalid_argument("Model: duplicate edge");
    adjacency_[static_cast<size_t>(ed.i)].push_back({ed.j, static_cast<int>(e)});
    adjacency_[static_cast<size_t>(ed.j)].push_back({ed.i, static_cast<int>(e)});
  }
}

void Evidence::set(int node, int value) {
  if (node < 0) throw std::invalid_argument("Evidence: negative node index");
  if (value != 0 && value != 1)
    throw std::invalid_argument("Evidence: value must be 0 or 1");
  auto it = assignments_.find(node);
  if (it != assignments_.end() && it->second != value)
    throw std::invalid_argument("Evidence: contradictory duplicate assignment");
  assignments_[node] = value;
}

ConditionResult condition(const Model& model, const Evidence& evidence) {
  const int n = model.num_nodes();
  for (const auto& [node, value] : evidence.assignments()) {
    (void)value;
    if (node < 0 || node >= n)
      throw std::invalid_argument("condition: evidence index out of range");
  }

  ConditionResult result;
  result.old_to_new.assign(static_cast<size_t>(n), -1);
  int next = 0;
  for (int i = 0; i < n; ++i)
    if (!evidence.contains(i)) result.old_to_new[static_cast<size_t>(i)] = next++;

  std::vector<double> biases;
  biases.reserve(static_cast<size_t>(next));
  for (int i = 0; i < n; ++i)
    if (!evidence.contains(i)) biases.push_back(model.bias(i));

  for (const auto& [node, value] : evidence.assignments())
    if (value == 1) result.log_constant += model.bias(node);

  std::vector<Edge> edges;
  for (const Edge& e : model.edges()) {
    const bool oi = evidence.contains(e.i);
    const bool oj = evidence.contains(e.j);
    if (oi && oj) {
      if (evidence.assignments().at(e.i) == 1 && evidence.assignments().at(e.j) == 1)
        result.log_constant += e.w;
    } else if (oi || oj) {
      const int observed = oi ? e.i : e.j;
      const int hidden = oi ? e.j : e.i;
      if (evidence.assignments().at(observed) == 1)
        biases[static_cast<size_t>(result.old_to_new[static_cast<size_t>(hidden)])] += e.w;
    } else {
      edges.push_back({result.old_to_new[static_cast<size_t>(e.i)],
                       result.old_to_new[static_cast<size_t>(e.j)], e.w});
    }
  }

  result.model = Model(next, std::move(edges), std::move(biases));
  return result;
}

Topology lattice_square(int rows, int cols) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("lattice_square: dimensions must be >= 1");
  Topology t;
  t.n = rows * cols;
  t.kind = TopologyKind::square_lattice;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) t.edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) t.edges.emplace_back(id(r, c), id(r + 1, c));
    }
  return t;
}

Topology lattice_cubic_periodic(int side) {
  if (side < 3)
    throw std::invalid_argument("lattice_cubic_periodic: side must be >= 3");
  Topology t;
  t.n = side * side * side;
  t.kind = TopologyKind::cubic_periodic;
  auto id = [side](int x, int y, int z) { return (x * side + y) * side + z; };
  for (int x = 0; x < side; ++x)
    for (int y = 0; y < side; ++y)
      for (int z = 0; z < side; ++z) {
        const int a = id(x, y, z);
        // one edge per node per dimension, in the + direction
        const int bs[3] = {id((x + 1) % side, y, z), id(x, (y + 1) % side, z),
                           id(x, y, (z + 1) % side)};
        for (int b : bs) t.edges.emplace_back(std::min(a, b), std::max(a, b));
      }
  return t;
}

Topology random_tree(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_tree: n must be >= 1");
  Topology t;
  t.n = n;
  t.kind = TopologyKind::tree;
  Rng rng(seed);
  for (int i = 1; i < n; ++i) {
    const int parent = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i));
    t.edges.emplace_back(parent, i);
  }
  return t;
}

Model sample_instance(const Topology& topology, double w_scale, double b_scale,
                      std::uint64_t seed, double exponent) {
  if (w_scale < 0.0 || b_scale < 0.0)
    throw std::invalid_argument("sample_instance: scales must be >= 0");
  Rng rng(seed);

  std::vector<Edge> edges;
  edges.reserve(topology.edges.size());
  for (const auto& [i, j] : topology.edges)
    edges.push_back({i, j, w_scale * rng.super_gaussian(exponent)});

  std::vector<double> biases(static_cast<size_t>(topology.n));
  for (double& b : biases) b = b_scale * rng.normal();

  // shift so that, absent evidence, a zero-bias unit has mean 1/2
  for (const Edge& e : edges) {
    biases[static_cast<size_t>(e.i)] -= 0.5 * e.w;
    biases[static_cast<size_t>(e.j)] -= 0.5 * e.w;
  }
  return Model(topology.n, std::move(edges), std::move(biases));
}

}  // namespace bopt
