#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bopt/model.hpp"

namespace bopt {

struct ExactResult {
  std::vector<double> q;
  std::vector<double> xi;            // aligned with Model::edges
  std::optional<double> log_z;       // unset for sampling estimates
};

struct GibbsConfig {
  int n_samples = 10000;
  int burn_in = 1000;
  double anneal_from = 4.0;  // temperature at the start of burn-in
  int anneal_steps = 1000;   // sweeps over which T ramps down to 1
  std::uint64_t seed = 0;
};

// Exhaustive enumeration of all 2^n states; refuses n > 20.
ExactResult brute_force(const Model& model);

// Exact ln Z by summing out nodes in the given order (a permutation of all
// nodes). Factor tables live in log space and are summed out with
// log-sum-exp, so the result is stable for strongly weighted models. Throws
// when the induced width along the order exceeds 14.
double eliminate(const Model& model, const std::vector<int>& order);

// Greedy minimum-degree ordering on the fill graph.
std::vector<int> default_elimination_order(const Model& model);

// Largest factor scope (minus the summed variable) produced by eliminating
// along the order; useful for checking feasibility before a long run.
int induced_width(const Model& model, const std::vector<int>& order);

// Marginals by clamping: q_i = exp(lnZ[s_i=1] - lnZ), xi_ij by clamping both
// endpoints to 1, each through condition() plus a fresh elimination.
ExactResult exact_marginals_via_elimination(const Model& model);

// Single-site Gibbs sampling with a linear temperature ramp during burn-in;
// log_z is left unset.
ExactResult gibbs(const Model& model, const GibbsConfig& config);

}  // namespace bopt
