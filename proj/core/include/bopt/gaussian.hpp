#pragma once

#include <cstdint>
#include <vector>

#include "bopt/model.hpp"
#include "bopt/solver_config.hpp"

namespace bopt {

// Gaussian pairwise model with density proportional to
// exp(-1/2 x^T W x - b^T x): `diag` holds W_ii, the edge list the symmetric
// off-diagonal couplings. W need not be positive definite; the solvers
// detect and report unbounded instances instead of assuming boundedness.
class GaussianModel {
 public:
  GaussianModel() = default;
  GaussianModel(std::vector<double> diag, std::vector<Edge> edges,
                std::vector<double> biases);

  int num_nodes() const { return static_cast<int>(diag_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[static_cast<size_t>(e)]; }
  double diag(int i) const { return diag_[static_cast<size_t>(i)]; }
  const std::vector<double>& diagonal() const { return diag_; }
  double bias(int i) const { return biases_[static_cast<size_t>(i)]; }
  const std::vector<double>& biases() const { return biases_; }
  const std::vector<Neighbor>& neighbors(int i) const {
    return adjacency_[static_cast<size_t>(i)];
  }
  int degree(int i) const {
    return static_cast<int>(adjacency_[static_cast<size_t>(i)].size());
  }

 private:
  std::vector<double> diag_;
  std::vector<Edge> edges_;
  std::vector<double> biases_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

struct GaussianBeliefs {
  std::vector<double> mu;
  std::vector<double> v;       // node variances, > 0
  std::vector<double> v_edge;  // per-edge covariances, V_ij^2 < V_i V_j
};

// One line of the convergence-vs-boundedness phase diagram.
struct ProbeRow {
  bool pd = false;
  SolveStatus gabo_status = SolveStatus::max_iters;
  SolveStatus gabp_status = SolveStatus::max_iters;
  int n = 0;
  std::uint64_t seed = 0;
};

// Cholesky test on the assembled dense matrix.
bool is_positive_definite(const GaussianModel& model);

// Steepest descent with exact line steps on 1/2 mu^T W mu + b^T mu; the
// minimizer satisfies W mu = -b, so the means are exact. Refuses models
// whose W is not positive definite.
std::vector<double> ga_mean_solve(const GaussianModel& model, const SolveConfig& config);

// The unique stationary covariance inside (-sqrt(v_i v_j), sqrt(v_i v_j)):
//   1/(2w) - sign(w) sqrt((1/(2w))^2 + v_i v_j),
// evaluated in a cancellation-free form; returns 0 at w = 0.
double ga_vij_solve(double v_i, double v_j, double w);

// E - S1 - S2 for the Gaussian parameterization (up to the additive
// constant dropped by the derivation).
double ga_free_energy(const GaussianModel& model, const GaussianBeliefs& beliefs);

// Means by ga_mean_solve's inner descent (without the positive-definite
// refusal), then adaptive descent on y_i = ln V_i with the covariances
// re-solved per step. Unbounded instances are reported as diverged: the
// free energy falling below -1e12, a variance above 1e12, or a descent
// direction of nonpositive curvature in the mean phase.
SolveReport ga_solve(const GaussianModel& model, GaussianBeliefs& beliefs,
                     const SolveConfig& config);

// Damped fixed-point reference on the same stationarity system (Jacobi on
// the means, the variance consistency update on V_i); used only as the
// comparison column of the boundedness probe.
SolveReport ga_bp_reference(const GaussianModel& model, GaussianBeliefs& beliefs,
                            const SolveConfig& config);

// Runs both solvers plus the definiteness check on one instance.
ProbeRow ga_boundedness_probe(const GaussianModel& model, const SolveConfig& config);

}  // namespace bopt
