#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace bopt {

struct Edge {
  int i = 0;  // i < j, both in [0, n)
  int j = 0;
  double w = 0.0;
};

// One entry of a node's neighbor list: the neighbor index and the position
// of the connecting edge in Model::edges.
struct Neighbor {
  int node = 0;
  int edge = 0;
};

// Binary pairwise MRF over {0,1} variables:
//   p(s) proportional to exp( sum_(ij) W_ij s_i s_j + sum_i b_i s_i ).
// Immutable after construction; adjacency and degrees are derived from the
// edge list and kept consistent by the constructor.
class Model {
 public:
  Model() = default;
  Model(int n, std::vector<Edge> edges, std::vector<double> biases);

  int num_nodes() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[static_cast<size_t>(e)]; }
  const std::vector<double>& biases() const { return biases_; }
  double bias(int i) const { return biases_[static_cast<size_t>(i)]; }
  const std::vector<Neighbor>& neighbors(int i) const {
    return adjacency_[static_cast<size_t>(i)];
  }
  int degree(int i) const {
    return static_cast<int>(adjacency_[static_cast<size_t>(i)].size());
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> biases_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

// Observed nodes and their {0,1} values.
class Evidence {
 public:
  Evidence() = default;

  // Throws on a contradictory duplicate assignment or a value outside {0,1}.
  void set(int node, int value);
  bool contains(int node) const { return assignments_.count(node) != 0; }
  const std::map<int, int>& assignments() const { return assignments_; }
  bool empty() const { return assignments_.empty(); }

 private:
  std::map<int, int> assignments_;
};

enum class TopologyKind { square_lattice, cubic_periodic, tree, arbitrary };

// Unweighted graph structure; sample_instance attaches weights and biases.
struct Topology {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // i < j
  TopologyKind kind = TopologyKind::arbitrary;
};

struct ConditionResult {
  Model model;                  // reduced model over the unobserved nodes
  std::vector<int> old_to_new;  // -1 for observed nodes
  // log-weight absorbed by the observed assignment: sum of b_v over nodes
  // observed at 1 plus W_ij over edges with both endpoints observed at 1.
  // ln Z(original) = log_constant + ln Z(reduced) when marginalizing the
  // hidden nodes of the clamped distribution.
  double log_constant = 0.0;
};

// Clamps the observed nodes: each neighbor i of a node observed at 1 gains
// W_ij on its bias; observed nodes and their edges are removed.
ConditionResult condition(const Model& model, const Evidence& evidence);

// rows x cols grid, 4-neighbor, non-periodic.
Topology lattice_square(int rows, int cols);

// side^3 nodes with periodic wraparound; every node has degree 6.
// Requires side >= 3 so wraparound cannot create duplicate edges.
Topology lattice_cubic_periodic(int side);

// Uniform random attachment tree on n nodes.
Topology random_tree(int n, std::uint64_t seed);

// Random instance on a topology following the experiment protocol:
// weights are sign(x)|x|^p of a standard normal (p = exponent, default 1.5),
// rescaled to unit sd and multiplied by w_scale; biases are drawn from
// normal(0, b_scale^2) and then shifted by -1/2 sum_{j in N(i)} W_ij so a
// unit with zero shifted bias has an exact mean of 1/2. Deterministic given
// the seed: weights are drawn in edge order, then biases in node order.
Model sample_instance(const Topology& topology, double w_scale, double b_scale,
                      std::uint64_t seed, double exponent = 1.5);

}  // namespace bopt
