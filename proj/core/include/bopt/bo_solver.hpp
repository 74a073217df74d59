#pragma once

#include <vector>

#include "bopt/bethe.hpp"
#include "bopt/model.hpp"
#include "bopt/solver_config.hpp"

namespace bopt {

// Starting point per config.init; xi entries already solved against q.
Beliefs init_beliefs(const Model& model, const SolveConfig& config);

// Logits y_i with grad_q(model, beliefs)[i] == (logit(q_i) - y_i) * q_i * (1 - q_i).
// A belief vector is stationary exactly when q_i == sigmoid(y_i) for all i.
std::vector<double> fixed_point_logits(const Model& model, const Beliefs& beliefs);

// Minimizes the free energy over q[node] alone, with all other marginals and
// all pair beliefs held fixed. The restriction is strictly convex, so the
// minimizer is unique; returns it without modifying `beliefs`.
double coordinate_update_q(const Model& model, const Beliefs& beliefs, int node);

// Damped descent on y = logit(q) with an adaptive step size; every accepted
// step lowers the free energy. `beliefs` is the starting point when non-empty,
// otherwise it is initialized per config; holds the solution on return.
SolveReport solve_gradient(const Model& model, Beliefs& beliefs, const SolveConfig& config);

// Damped fixed-point iteration q <- sigmoid(y*(q)). Faster per sweep than the
// gradient solver but not a descent method; may cycle on frustrated models.
SolveReport solve_fixed_point(const Model& model, Beliefs& beliefs, const SolveConfig& config);

}  // namespace bopt
